#include "qlkit/diffusion.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace qlkit;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

CorrelationSpec tri_pair(double omega)
{
    return {{{1, omega, CorrelationFamily::triangular, 1.0, 1.0},
             {-1, -omega, CorrelationFamily::triangular, 1.0, 1.0}}};
}

AnsatzSpec ansatz_pair(double beta)
{
    return {{{1, 1.0, beta, cplx(0.5, 0.0)}, {-1, -1.0, beta, cplx(0.5, 0.0)}}};
}

DiffusionField ansatz_D(double beta, double eps, VelocityGrid const &vg)
{
    double const S = 1.0 / (eps * eps);
    int const samples = 64;
    auto const r = ansatz_realization(ansatz_pair(beta), eps, TimeGrid{S / (samples - 1), samples});
    return empirical_diffusion(r, 1.0, eps, vg);
}

double sinc2(double u) { return u == 0.0 ? 1.0 : std::pow(std::sin(u) / u, 2); }

std::vector<double> gaussian(VelocityGrid const &vg, double s)
{
    std::vector<double> g(vg.nv);
    for (int i = 0; i < vg.nv; ++i)
        g[i] = std::exp(-0.5 * std::pow(vg.v(i) / s, 2)) / (s * std::sqrt(2.0 * pi));
    return g;
}

double variance(BarProfile const &p)
{
    auto const w = p.vgrid.weights();
    double m = 0.0, s = 0.0;
    for (int i = 0; i < p.vgrid.nv; ++i) {
        m += w[i] * p.values[i];
        s += w[i] * p.values[i] * p.vgrid.v(i) * p.vgrid.v(i);
    }
    return s / m;
}

} // namespace

TEST_CASE("analytic diffusion coefficient")
{
    auto const vg = make_vgrid(257, 8.0);

    auto const zero = analytic_diffusion({}, vg);
    for (double d : zero.values)
        CHECK(d == 0.0);

    auto const D = analytic_diffusion(tri_pair(0.0), vg);
    for (int i = 0; i < vg.nv; ++i)
        CHECK(D.values[i] == Approx(sinc2(vg.v(i) / 2.0)).margin(1e-14));
    CHECK(D.values[128] == Approx(1.0));

    auto const at2pi = analytic_diffusion(tri_pair(0.0), VelocityGrid{3, 2.0 * pi});
    CHECK(at2pi.values[2] == Approx(0.0).margin(1e-15));

    // A carrier moves the resonance to v = omega / k.
    auto const shifted = analytic_diffusion(tri_pair(1.5), vg);
    for (int i = 0; i < vg.nv; ++i)
        CHECK(shifted.values[i] == Approx(sinc2((1.5 - vg.v(i)) / 2.0)).margin(1e-14));

    CorrelationSpec both = tri_pair(0.5);
    both.modes.push_back({2, -1.0, CorrelationFamily::bohman, 0.3, 0.7});
    both.modes.push_back({-2, 1.0, CorrelationFamily::bohman, 0.3, 0.7});
    for (double d : analytic_diffusion(both, vg).values)
        CHECK(d >= -1e-12);
}

TEST_CASE("empirical diffusion of the single-mode ansatz")
{
    auto const vg = make_vgrid(2001, 6.0);
    for (double eps : {0.2, 0.1}) {
        double const S = 1.0 / (eps * eps);
        auto const D = ansatz_D(2.0, eps, vg);
        double worst = 0.0, peak = 0.0;
        for (int i = 0; i < vg.nv; ++i) {
            double const a = 1.0 - vg.v(i);
            double const want = a == 0.0 ? 0.5 * S : 0.5 * std::sin(a * S) / a;
            worst = std::max(worst, std::abs(D.values[i] - want));
            peak = std::max(peak, std::abs(want));
        }
        CHECK(worst <= 1e-6 * peak);
    }

    auto const quiet = synthesize_realization({}, 1, 0.1, TimeGrid{1.0, 200});
    for (double d : empirical_diffusion(quiet, 1.0, 0.1, vg).values)
        CHECK(d == 0.0);
}

TEST_CASE("weak pairings concentrate on the resonance")
{
    auto const vg = make_vgrid(8001, 6.0);
    auto const phi = [](double v) { return bump(v, 0.3, 1.5); };
    DiffusionField const none{vg, std::vector<double>(vg.nv, 0.0)};
    CHECK(weak_limit_pairing(none, phi) == 0.0);

    for (double beta : {2.0, 1.0}) {
        double const c = beta == 2.0 ? 1.0 : 0.0;
        double const want = pi * 2.0 * 0.25 * phi(c);
        double prev = INFINITY;
        for (double eps : {0.2, 0.1, 0.05}) {
            double const err = std::abs(weak_limit_pairing(ansatz_D(beta, eps, vg), phi) - want);
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev < 0.03);
    }
}

TEST_CASE("Fick flux")
{
    auto const g = make_grid(16, 65, 6.0);
    auto const homog = sample(g, [](double, double v) { return std::exp(-v * v / 2); });
    std::vector<double> ev(g.nx());
    for (int j = 0; j < g.nx(); ++j)
        ev[j] = std::sin(g.x(j)) + 0.3 * std::cos(2 * g.x(j));
    auto const E = field_from_values(g, ev);
    for (double j : fick_flux(homog, E, 0.1).values)
        CHECK(std::abs(j) < 1e-14);

    auto const bumpy = sample(g, [](double x, double v) { return (1 + 0.5 * std::sin(x)) * std::exp(-v * v / 2); });
    auto const zero = field_from_values(g, std::vector<double>(g.nx(), 0.0));
    for (double j : fick_flux(bumpy, zero, 0.1).values)
        CHECK(j == 0.0);
    // mean of sin x * 0.5 sin x = 1/4, divided by eps.
    auto const J = fick_flux(bumpy, E, 0.1);
    CHECK(J.values[32] == Approx(2.5).epsilon(1e-12));
}

TEST_CASE("diffusion solver")
{
    auto const vg = make_vgrid(401, 10.0);
    auto const p0 = make_profile(vg, gaussian(vg, 0.5));

    SECTION("zero coefficient is the identity")
    {
        DiffusionField const zero{vg, std::vector<double>(vg.nv, 0.0)};
        auto const p = step_diffusion(p0, zero, 0.1);
        for (int i = 0; i < vg.nv; ++i)
            CHECK(p.values[i] == Approx(p0.values[i]).epsilon(1e-15).margin(1e-300));
    }

    SECTION("constant coefficient: variance grows by 2 D dt")
    {
        double const d = 0.2, dt = 0.01;
        DiffusionField const D{vg, std::vector<double>(vg.nv, d)};
        auto p = p0;
        double const m0 = mass(p0);
        for (int n = 0; n < 50; ++n) {
            double const var0 = variance(p);
            double const l0 = l2_norm(p);
            p = step_diffusion(p, D, dt, 0.5);
            CHECK(variance(p) - var0 == Approx(2.0 * d * dt).epsilon(0.01));
            CHECK(std::abs(mass(p) - m0) < 1e-12);
            CHECK(l2_norm(p) <= l0 + 1e-15);
        }
        CHECK(p.t == Approx(0.5));
    }

    SECTION("resonant coefficient: conservation, dissipation, positivity")
    {
        auto const D = analytic_diffusion(tri_pair(1.0), vg);
        auto p = make_profile(vg, gaussian(vg, 1.0));
        double const m0 = mass(p);
        for (int n = 0; n < 100; ++n) {
            double const l0 = l2_norm(p);
            CHECK(dissipation(p, D) >= 0.0);
            p = step_diffusion(p, D, 0.02);
            CHECK(l2_norm(p) <= l0 + 1e-15);
            for (double x : p.values)
                CHECK(x >= 0.0);
        }
        CHECK(std::abs(mass(p) - m0) < 1e-10);

        auto const q = solve_diffusion(make_profile(vg, gaussian(vg, 1.0)), D, 2.0, 0.02);
        CHECK(q.t == Approx(2.0));
        for (int i = 0; i < vg.nv; ++i)
            CHECK(q.values[i] == Approx(p.values[i]).margin(1e-13));
    }

    SECTION("closure of a Gaussian")
    {
        DiffusionField const D{vg, std::vector<double>(vg.nv, 1.0)};
        auto const J = fick_closure(D, p0);
        // -dG/dv = v G / s^2 for the s = 0.5 Gaussian.
        for (int i = 100; i < 300; ++i)
            CHECK(J.values[i] == Approx(vg.v(i) / 0.25 * p0.values[i]).margin(1e-2));
    }
}
