#include "qlkit/phase_space.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace qlkit;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

double gauss(double v) { return std::exp(-0.5 * v * v) / std::sqrt(2.0 * pi); }

double max_diff(std::vector<double> const &a, std::vector<double> const &b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("grid construction and validation")
{
    auto const g = make_grid(64, 129, 6.0);
    CHECK(g.dx() == Approx(2.0 * pi / 64));
    CHECK(g.dv() == Approx(0.09375));
    CHECK(g.v(0) == -6.0);
    CHECK(g.v(128) == Approx(6.0));

    CHECK_NOTHROW(make_grid(4, 8, 1.0));
    CHECK_THROWS_AS(make_grid(63, 129, 6.0), Error);
    CHECK_THROWS_AS(make_grid(64, 129, 0.0), Error);
    CHECK_THROWS_AS(make_grid(64, 129, -1.0), Error);
    CHECK_THROWS_AS(make_grid(2, 129, 6.0), Error);
    CHECK_THROWS_AS(make_grid(8, 7, 6.0), Error);
}

TEST_CASE("free streaming")
{
    auto const g = make_grid(32, 65, 6.0);

    SECTION("x-independent data is invariant")
    {
        auto const f = sample(g, [](double, double v) { return gauss(v); });
        auto const s = free_stream(f, 3.7);
        CHECK(max_diff(f.values, s.values) < 1e-14);
    }

    SECTION("cos mode shifts exactly")
    {
        auto const f = sample(g, [](double x, double v) { return std::cos(x) * gauss(v); });
        double const tau = 2.3;
        auto const s = free_stream(f, tau);
        auto const want = sample(g, [&](double x, double v) { return std::cos(x - v * tau) * gauss(v); });
        CHECK(max_diff(s.values, want.values) < 1e-13);
    }

    SECTION("group property and mode amplitudes")
    {
        auto const f = sample(g, [](double x, double v) {
            return (1.0 + 0.3 * std::cos(x) + 0.2 * std::sin(3.0 * x)) * gauss(v);
        });
        auto const ab = free_stream(free_stream(f, 0.7), 1.9);
        auto const once = free_stream(f, 2.6);
        CHECK(max_diff(ab.values, once.values) < 1e-12);
        CHECK(mass(once) == Approx(mass(f)).epsilon(1e-14));
        auto const m0 = x_mode(f, 3), m1 = x_mode(once, 3);
        for (std::size_t i = 0; i < m0.size(); ++i)
            CHECK(std::abs(m1[i]) == Approx(std::abs(m0[i])).margin(1e-14));
    }

    SECTION("phase mixing of a smooth pairing")
    {
        auto const fine = make_grid(8, 2049, 8.0);
        auto const f = sample(fine, [](double x, double v) { return std::cos(x) * gauss(v); });
        auto const s = free_stream(f, 40.0);
        auto const m = x_mode(s, 1);
        auto const w = fine.v_weights();
        std::complex<double> pair{};
        for (int i = 0; i < fine.nv(); ++i) {
            double const v = fine.v(i);
            double const phi = std::abs(v) < 3.0 ? std::exp(-1.0 / (1.0 - v * v / 9.0)) : 0.0;
            pair += w[i] * m[i] * phi;
        }
        CHECK(std::abs(pair) < 1e-3);
    }
}

TEST_CASE("Poisson solve")
{
    auto const g = make_grid(32, 129, 6.0);

    SECTION("neutral density gives zero field")
    {
        auto const f = sample(g, [](double, double v) { return gauss(v); });
        auto const E = solve_poisson(f, 1e-6);
        for (double e : E.values)
            CHECK(std::abs(e) < 1e-12);
    }

    SECTION("dE/dx = rho on single modes")
    {
        for (int m : {1, 2}) {
            double const a = 0.05;
            auto const f = sample(g, [&](double x, double v) { return (1.0 + a * std::cos(m * x)) * gauss(v); });
            auto const E = solve_poisson(f, 1e-6);
            double err = 0.0;
            for (int j = 0; j < g.nx(); ++j)
                err = std::max(err, std::abs(E.values[j] - a / m * std::sin(m * g.x(j))));
            CHECK(err < 1e-8);
            CHECK(std::abs(E.mode(0)) < 1e-15);
            CHECK(std::abs(E.mode(-m) - std::conj(E.mode(m))) < 1e-15);
        }
    }

    SECTION("neutrality violation is an error")
    {
        auto const f = sample(g, [](double, double v) { return 1.1 * gauss(v); });
        CHECK_THROWS_AS(solve_poisson(f), Error);
    }
}

TEST_CASE("x averaging")
{
    auto const g = make_grid(16, 33, 4.0);
    auto const f = sample(g, [](double x, double v) { return (1.0 + std::cos(x)) * gauss(v); });
    auto const p = x_average(f);
    for (int i = 0; i < g.nv(); ++i)
        CHECK(p.values[i] == Approx(gauss(g.v(i))).epsilon(1e-14));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Distribution r(g);
    for (double &x : r.values)
        x = u(rng);
    auto const q = x_average(r);
    for (int i = 0; i < g.nv(); ++i) {
        double s = 0.0;
        for (int j = 0; j < g.nx(); ++j)
            s += r.at(j, i);
        CHECK(q.values[i] == Approx(s / g.nx()).epsilon(1e-14));
    }
}

TEST_CASE("distribution validation")
{
    auto const g = make_grid(8, 33, 3.0);
    auto f = sample(g, [](double, double v) { return gauss(v); });
    CHECK_NOTHROW(validate(f));
    CHECK_THROWS_AS(validate(f, 1e-12), Error); // gauss(3) is not below the floor
    f.at(0, 5) = std::nan("");
    CHECK_THROWS_AS(validate(f), Error);
}
