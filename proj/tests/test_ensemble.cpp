#include "qlkit/ensemble.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace qlkit;
using Catch::Approx;

namespace {

EnsembleConfig small()
{
    auto cfg = default_benchmark();
    cfg.nx = 16;
    cfg.nv = 65;
    cfg.T = 0.25;
    cfg.outputs = 2;
    cfg.members = 4;
    cfg.threads = 2;
    cfg.diffusion_dt = 1e-3;
    return cfg;
}

} // namespace

TEST_CASE("configuration")
{
    auto const cfg = default_benchmark();
    CHECK_NOTHROW(validate(cfg));
    CHECK(cfg.spec.modes.size() == 4);
    CHECK(ensemble_dt(cfg, 0.1) < ensemble_dt(cfg, 0.4));
    CHECK(ensemble_dt(cfg, 0.1) <= 0.01 / 16.0 + 1e-15);

    auto bad = cfg;
    bad.members = 0;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = cfg;
    bad.epsilons = {0.5, 1.5};
    CHECK_THROWS_AS(validate(bad), Error);
    bad = cfg;
    bad.outputs = 0;
    CHECK_THROWS_AS(validate(bad), Error);

    auto const g = make_grid(16, 65, 6.0);
    auto const f0 = initial_distribution(g, cfg.initial);
    CHECK(mass(f0) == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("single member has zero variance")
{
    auto cfg = small();
    cfg.members = 1;
    auto const st = run_ensemble(cfg, 0.4);
    CHECK(st.members == 1);
    CHECK(st.seeds.size() == 1);
    REQUIRE(st.times.size() == 3);
    CHECK(st.times.back() == Approx(cfg.T));
    for (auto const &row : st.stderr_)
        for (double s : row)
            CHECK(s == 0.0);
    CHECK(st.mc_stderr_l2 == 0.0);
    for (double m : st.mass_mean)
        CHECK(m == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("zero field keeps x-independent data")
{
    auto cfg = small();
    for (auto &m : cfg.spec.modes)
        m.amplitude = 0.0;
    cfg.initial.amplitude = 0.0;
    auto const st = run_ensemble(cfg, 0.4);
    auto const g = make_grid(cfg.nx, cfg.nv, cfg.v_max);
    auto const f0 = x_average(initial_distribution(g, cfg.initial));
    for (auto const &row : st.mean)
        for (int i = 0; i < g.nv(); ++i)
            CHECK(row[i] == Approx(f0.values[i]).margin(1e-14));
    // The diffusion limit is frozen as well, so the error vanishes.
    CHECK(st.final_l2_error < 1e-13);
}

TEST_CASE("results do not depend on the thread count")
{
    auto cfg = small();
    cfg.threads = 1;
    auto const a = run_ensemble(cfg, 0.4);
    cfg.threads = 3;
    auto const b = run_ensemble(cfg, 0.4);
    CHECK(a.seeds == b.seeds);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    CHECK(a.final_l2_error == b.final_l2_error);
    cfg.seed += 1;
    auto const c = run_ensemble(cfg, 0.4);
    CHECK(c.mean != a.mean);
}

TEST_CASE("Monte Carlo error shrinks with the ensemble size")
{
    auto cfg = small();
    cfg.members = 8;
    double const s8 = run_ensemble(cfg, 0.4).mc_stderr_l2;
    cfg.members = 32;
    double const s32 = run_ensemble(cfg, 0.4).mc_stderr_l2;
    CHECK(s8 > 0.0);
    CHECK(s32 / s8 == Approx(0.5).margin(0.2));
}

TEST_CASE("log-log fits")
{
    auto const f = fit_loglog({0.4, 0.2, 0.1}, {0.8, 0.2, 0.05});
    CHECK_FALSE(f.degenerate);
    CHECK(f.slope == Approx(2.0).epsilon(1e-12));
    CHECK(f.slope_stderr < 1e-10);

    CHECK(fit_loglog({0.4, 0.2, 0.1}, {0.0, 0.0, 0.0}).degenerate);
    CHECK(fit_loglog({0.4, 0.2}, {0.1, 0.05}).degenerate);
}

TEST_CASE("frozen-field control")
{
    auto cfg = small();
    cfg.obstruction.T = 0.25;
    auto const a = obstruction_run(cfg, 0.4);
    auto const b = obstruction_run(cfg, 0.2);
    CHECK(a.flux_l2 > 0.0);
    CHECK(b.flux_l2 < a.flux_l2);
}

TEST_CASE("diffusion reference")
{
    auto const cfg = small();
    auto const ref = diffusion_reference(cfg, {0.0, 0.125, 0.25}, 1e-3);
    REQUIRE(ref.size() == 3);
    auto const vg = make_vgrid(cfg.nv, cfg.v_max);
    double const m0 = mass(make_profile(vg, ref[0]));
    double prev = l2_norm(make_profile(vg, ref[0]));
    for (auto const &r : ref) {
        auto const p = make_profile(vg, r);
        CHECK(std::abs(mass(p) - m0) < 1e-10);
        CHECK(l2_norm(p) <= prev + 1e-15);
        prev = l2_norm(p);
    }
}

TEST_CASE("small convergence study")
{
    auto cfg = small();
    cfg.epsilons = {0.4, 0.3};
    CHECK_THROWS_AS(convergence_study(cfg, false), Error);
    cfg.epsilons = {0.3, 0.4, 0.35};
    auto const rep = convergence_study(cfg, false);
    CHECK(rep.epsilons == std::vector<double>{0.4, 0.35, 0.3});
    CHECK(rep.errors.size() == 3);
    CHECK(rep.obstruction.size() == 3);
    CHECK(rep.budget.total == 0.0);
}
