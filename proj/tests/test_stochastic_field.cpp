#include "qlkit/quadrature.hpp"
#include "qlkit/stochastic_field.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace qlkit;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

CorrelationSpec pair_spec(int k, double omega, CorrelationFamily fam, double a, double tau)
{
    return {{{k, omega, fam, a, tau}, {-k, -omega, fam, a, tau}}};
}

std::vector<FieldRealization> ensemble(CorrelationSpec const &spec, int count, TimeGrid tg,
                                       SynthesisBackend b = SynthesisBackend::spectral)
{
    std::vector<FieldRealization> out;
    for (int r = 0; r < count; ++r)
        out.push_back(synthesize_realization(spec, 1000 + r, 1.0, tg, b));
    return out;
}

} // namespace

TEST_CASE("hat transforms")
{
    CorrelationMode tri{1, 0.0, CorrelationFamily::triangular, 1.0, 1.0};
    CorrelationMode boh{1, 0.0, CorrelationFamily::bohman, 0.7, 1.3};

    CHECK(hat_transform(tri, 0.0) == Approx(1.0).epsilon(1e-14));
    CHECK(hat_transform(CorrelationMode{1, 0.0, CorrelationFamily::triangular, 2.0, 0.5}, 0.0) ==
          Approx(1.0).epsilon(1e-14));

    for (double s : {0.3, 1.0, 2.5, 7.0, 13.0}) {
        double const x = s / 2.0;
        CHECK(hat_transform(tri, s) == Approx(std::pow(std::sin(x) / x, 2)).epsilon(1e-12));
    }
    // Defining integral by quadrature, both families.
    for (auto const &m : {tri, boh})
        for (double s : {0.0, 0.4, 3.0, 9.5}) {
            double const q = quad::integrate<double>(
                [&](double sig) { return correlation(m, sig) * std::cos(s * sig); }, -m.tau, m.tau,
                1e-13, 1e-15, 4).value;
            CHECK(hat_transform(m, s) == Approx(q).epsilon(1e-10).margin(1e-13));
        }
    for (int i = 0; i < 2000; ++i) {
        double const s = -60.0 + 0.06 * i;
        CHECK(hat_transform(tri, s) >= 0.0);
        CHECK(hat_transform(boh, s) >= 0.0);
    }
    CHECK(hat_transform(CorrelationMode{1, 0.0, CorrelationFamily::bohman, 0.0, 1.0}, 1.0) == 0.0);
    CHECK(parse_family("bohman") == CorrelationFamily::bohman);
    CHECK_THROWS_AS(parse_family("raised_cosine_typo"), Error);
}

TEST_CASE("spec validation")
{
    CHECK_NOTHROW(validate(pair_spec(1, 1.0, CorrelationFamily::triangular, 1.0, 1.0)));
    CorrelationSpec missing{{{1, 1.0, CorrelationFamily::triangular, 1.0, 1.0}}};
    CHECK_THROWS_AS(validate(missing), Error);
    CorrelationSpec wrong_omega{{{1, 1.0, CorrelationFamily::triangular, 1.0, 1.0},
                                 {-1, 1.0, CorrelationFamily::triangular, 1.0, 1.0}}};
    CHECK_THROWS_AS(validate(wrong_omega), Error);
    CHECK_THROWS_AS(validate(pair_spec(0, 0.0, CorrelationFamily::triangular, 1.0, 1.0)), Error);
    CHECK_THROWS_AS(validate(pair_spec(1, 0.0, CorrelationFamily::triangular, -1.0, 1.0)), Error);
    CHECK(std::isfinite(bound_constant(pair_spec(2, 1.0, CorrelationFamily::bohman, 1.0, 1.0))));
}

TEST_CASE("synthesis")
{
    auto const spec = pair_spec(1, 1.0, CorrelationFamily::triangular, 1.0, 1.0);
    TimeGrid const tg{1.0 / 16.0, 200};

    SECTION("empty spec gives a zero field")
    {
        auto const r = synthesize_realization({}, 3, 0.1, tg);
        CHECK(r.mode_count() == 0);
        auto const E = field_at(r, make_grid(8, 16, 1.0), 0.5 * 0.01);
        for (double e : E.values)
            CHECK(e == 0.0);
    }

    SECTION("deterministic, conjugate symmetric, zero-mean field")
    {
        auto const a = synthesize_realization(spec, 42, 0.2, tg);
        auto const b = synthesize_realization(spec, 42, 0.2, tg);
        CHECK(a.envelope == b.envelope);
        auto const c = synthesize_realization(spec, 43, 0.2, tg);
        CHECK(a.envelope != c.envelope);
        CHECK(a.potential_signed(-1, 1.3) == std::conj(a.potential_signed(1, 1.3)));
        auto const E = field_at(a, make_grid(16, 16, 1.0), 0.04 * 3.1);
        double mean = 0.0;
        for (double e : E.values)
            mean += e / E.values.size();
        CHECK(std::abs(mean) < 1e-14);
    }

    SECTION("under-resolved time grid is rejected")
    {
        CHECK_THROWS_AS(synthesize_realization(spec, 1, 0.1, TimeGrid{0.2, 100}), Error);
        auto const fast = pair_spec(1, 20.0, CorrelationFamily::triangular, 1.0, 1.0);
        CHECK_THROWS_AS(synthesize_realization(fast, 1, 0.1, TimeGrid{1.0 / 16.0, 100}), Error);
    }

    SECTION("empirical correlation, both backends")
    {
        for (auto b : {SynthesisBackend::spectral, SynthesisBackend::moving_average}) {
            auto const rs = ensemble(spec, 2000, tg, b);
            auto const rep = verify_correlation(rs, spec);
            REQUIRE(rep.modes.size() == 1);
            auto const &m = rep.modes[0];
            CHECK(rep.worst_relative_deviation < 0.1);
            CHECK(rep.worst_relative_leakage < 0.1);
            CHECK(m.max_mean_modulus < 3.0 * 3.0 * std::sqrt(1.0 / 2000.0));
            CHECK(m.bochner_min > -1e-3);
        }
    }

    SECTION("zero amplitude correlations vanish")
    {
        auto const zero = pair_spec(1, 1.0, CorrelationFamily::triangular, 0.0, 1.0);
        auto const rep = verify_correlation(ensemble(zero, 4, tg), zero);
        for (double e : rep.modes[0].empirical)
            CHECK(std::abs(e) <= 1e-14);
    }

    SECTION("independent modes do not correlate")
    {
        CorrelationSpec two = pair_spec(1, 1.0, CorrelationFamily::triangular, 1.0, 1.0);
        two.modes.push_back({2, 0.5, CorrelationFamily::bohman, 0.5, 1.0});
        two.modes.push_back({-2, -0.5, CorrelationFamily::bohman, 0.5, 1.0});
        auto const rep = verify_correlation(ensemble(two, 1000, tg), two);
        REQUIRE(!rep.cross.empty());
        for (auto const &c : rep.cross)
            CHECK(c.magnitude <= 3.0 * c.sigma);
    }

    SECTION("duplicated realization is accepted")
    {
        auto const one = synthesize_realization(spec, 9, 1.0, tg);
        std::vector<FieldRealization> dup(5, one);
        CHECK_NOTHROW(verify_correlation(dup, spec));
        CHECK_THROWS_AS(verify_correlation({one}, spec), Error);
    }
}

TEST_CASE("deterministic ansatz field")
{
    AnsatzSpec const s{{{1, 1.0, 2.0, cplx(0.5, 0.0)}, {-1, -1.0, 2.0, cplx(0.5, 0.0)}}};
    auto const g = make_grid(16, 16, 1.0);
    double const eps = 0.1;
    auto const E = deterministic_ansatz_field(s, eps, 0.0, g);
    for (int j = 0; j < g.nx(); ++j)
        CHECK(E.values[j] == Approx(std::sin(g.x(j))).margin(1e-14));

    double const period = 2.0 * pi * eps * eps;
    auto const E1 = deterministic_ansatz_field(s, eps, 0.37 * period, g);
    auto const E2 = deterministic_ansatz_field(s, eps, 1.37 * period, g);
    for (int j = 0; j < g.nx(); ++j)
        CHECK(E1.values[j] == Approx(E2.values[j]).margin(1e-12));

    AnsatzSpec const frozen{{{1, 0.0, 0.0, cplx(0.5, 0.0)}, {-1, 0.0, 0.0, cplx(0.5, 0.0)}}};
    auto const F0 = deterministic_ansatz_field(frozen, eps, 0.0, g);
    auto const F1 = deterministic_ansatz_field(frozen, eps, 3.3, g);
    CHECK(F0.values == F1.values);

    AnsatzSpec const lonely{{{1, 0.0, 0.0, cplx(0.5, 0.0)}}};
    CHECK_THROWS_AS(validate(lonely), Error);
}
