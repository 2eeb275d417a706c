// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criterion 8 collects the conservation checks of every run made
// for the other criteria.

#include "qlkit/config.hpp"
#include "qlkit/dispersion.hpp"
#include "qlkit/ensemble.hpp"
#include "qlkit/quasilinear.hpp"
#include "qlkit/vlasov.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace qlkit;

namespace {

constexpr double pi = std::numbers::pi;
cplx const landau_reference{-0.1533, 1.4156};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, std::string const &what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void report(int id, char const *name, Outcome const &o, double secs)
{
    std::printf("criterion %d %-28s %s  (%.2f s)%s\n", id, name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass)
        ++failures;
}

// Conservation ledger shared by every run below.
struct Ledger {
    Outcome out;
    int vp_runs = 0, diffusion_runs = 0, ql_runs = 0;

    void vp(TrajectoryRecord const &rec, char const *label)
    {
        ++vp_runs;
        double drift = 0.0;
        double const e0 = rec.total_energy.front();
        for (double e : rec.total_energy)
            drift = std::max(drift, std::abs(e - e0) / std::abs(e0));
        out.detail << " " << label << ": dmass/step=" << rec.max_step_mass_change
                   << " denergy=" << drift;
        out.require(rec.max_step_mass_change <= 1e-10, std::string(label) + " mass");
        out.require(drift <= 1e-3, std::string(label) + " energy");
    }

    void profiles(VelocityGrid const &vg, std::vector<std::vector<double>> const &series,
                  std::string const &label)
    {
        ++diffusion_runs;
        double const m0 = mass(make_profile(vg, series.front()));
        double prev = l2_norm(make_profile(vg, series.front()));
        double worst_mass = 0.0;
        bool l2_ok = true;
        for (auto const &s : series) {
            auto const p = make_profile(vg, s);
            worst_mass = std::max(worst_mass, std::abs(mass(p) - m0));
            l2_ok = l2_ok && l2_norm(p) <= prev * (1.0 + 1e-14);
            prev = l2_norm(p);
        }
        out.require(worst_mass <= 1e-10, label + " mass");
        out.require(l2_ok, label + " L2");
    }

    void ql(QLRecord const &rec)
    {
        ++ql_runs;
        double worst_mass = 0.0;
        bool l2_ok = true;
        for (std::size_t n = 0; n < rec.t.size(); ++n) {
            worst_mass = std::max(worst_mass, std::abs(rec.mass[n] - rec.mass[0]));
            if (n > 0)
                l2_ok = l2_ok && rec.l2[n] <= rec.l2[n - 1] * (1.0 + 1e-14);
        }
        out.detail << " ql: dmass=" << worst_mass;
        out.require(worst_mass <= 1e-10, "ql mass");
        out.require(l2_ok, "ql L2");
    }
};

Ledger ledger;
cplx landau_root{};

std::filesystem::path config_path(char const *name)
{
    return std::filesystem::path(QLKIT_CONFIG_DIR) / name;
}

void criterion1()
{
    auto const t0 = Clock::now();
    Outcome o;
    auto const G = maxwellian_profile(make_vgrid(257, 6.0));
    Rect const rect{-0.5, 0.5, 0.5, 2.5};
    auto const rs = find_roots(G, 0.5, rect);
    auto const half = find_roots(G, 0.5, rect, 0.5e-10);
    double const secs = seconds_since(t0);
    o.require(rs.roots.size() == 1 && half.roots.size() == 1, "one root");
    if (o.pass) {
        landau_root = rs.roots[0].lambda;
        double const dl = std::abs(landau_root - landau_reference);
        double const dh = std::abs(half.roots[0].lambda - landau_root);
        o.detail << " lambda=" << landau_root.real() << (landau_root.imag() < 0 ? "" : "+")
                 << landau_root.imag() << "i |dlambda|=" << dl << " winding=" << rs.winding
                 << " tol-halving shift=" << dh;
        o.require(dl <= 1e-3, "|dlambda| <= 1e-3");
        o.require(rs.winding == 1, "winding == 1");
        o.require(dh <= 1e-6, "halving shift <= 1e-6");
    }
    o.require(secs < 1.0, "runtime < 1 s");
    report(1, "dispersion benchmark", o, secs);
}

void criterion2()
{
    auto const t0 = Clock::now();
    Outcome o;
    auto const cfg = load_config(config_path("landau.json"));
    auto const g = make_grid(cfg.grid);
    auto const f0 = initial_distribution(g, cfg.initial);
    DiagnosticsSchedule sch;
    sch.every = 1;
    auto const rec = run(f0, cfg.simulate.epsilon, SelfConsistentField{}, cfg.simulate.T,
                         cfg.simulate.dt, sch, cfg.solver);
    auto const fit = landau_decay_fit(rec.t, rec.field_energy);
    double const secs = seconds_since(t0);
    double const want = 2.0 * landau_root.real();
    double const rel = std::abs(fit.rate - want) / std::abs(want);
    o.detail << " rate=" << fit.rate << " 2Re(lambda)=" << want << " rel=" << rel
             << " R2=" << fit.r2 << " window=[" << fit.t_begin << "," << fit.t_end << "]";
    o.require(g.x_length() == 4.0 * pi && g.nx() == 64 && g.nv() == 257, "grid");
    o.require(rel <= 0.10, "rate within 10%");
    o.require(fit.r2 >= 0.98, "R2 >= 0.98");
    o.require(secs < 120.0, "runtime < 2 min");
    report(2, "Landau damping", o, secs);
    ledger.vp(rec, "landau");

    // A nonlinear run for the ledger.
    auto const strong = initial_distribution(g, InitialData{1.0, 0.0, 0.05, 1});
    ledger.vp(run(strong, 1.0, SelfConsistentField{}, 20.0, 0.05, sch, cfg.solver), "nonlinear");
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

void criterion3()
{
    auto const t0 = Clock::now();
    Outcome o;
    auto const vg = make_vgrid(2001, 6.0);
    for (double eps : {0.2, 0.1}) {
        double const S = 1.0 / (eps * eps);
        auto const D = ansatz_D(2.0, eps, vg);
        double worst = 0.0, peak = 0.0;
        for (int i = 0; i < vg.nv; ++i) {
            // Dirichlet kernel: sum over +-1 of |Phi|^2 int_0^S e^{i(1 - v)s} ds.
            double const a = 1.0 - vg.v(i);
            double const want = a == 0.0 ? 0.5 * S : 0.5 * std::sin(a * S) / a;
            worst = std::max(worst, std::abs(D.values[i] - want));
            peak = std::max(peak, std::abs(want));
        }
        o.detail << " eps=" << eps << ": " << worst / peak;
        o.require(worst <= 1e-6 * peak, "relative sup <= 1e-6");
    }
    double const secs = seconds_since(t0);
    o.require(secs < 1.0, "runtime < 1 s");
    report(3, "diffusion identity", o, secs);
}

void criterion4()
{
    auto const t0 = Clock::now();
    Outcome o;
    auto const vg = make_vgrid(8001, 6.0);
    auto const phi = [](double v) { return bump(v, 0.3, 1.5); };
    for (double beta : {2.0, 1.0}) {
        double const c = beta == 2.0 ? 1.0 : 0.0;
        double const want = pi * 2.0 * 0.25 * phi(c);
        double prev = INFINITY;
        o.detail << " beta=" << beta << ":";
        for (double eps : {0.2, 0.1, 0.05}) {
            double const err = std::abs(weak_limit_pairing(ansatz_D(beta, eps, vg), phi) - want);
            o.detail << " " << err;
            o.require(err < prev, "monotone decrease");
            prev = err;
        }
    }
    double const secs = seconds_since(t0);
    o.require(secs < 1.0, "runtime < 1 s");
    report(4, "weak-limit concentration", o, secs);
}

void criterion5()
{
    auto const t0 = Clock::now();
    Outcome o;
    double min_hat = INFINITY;
    for (auto fam : {CorrelationFamily::triangular, CorrelationFamily::bohman}) {
        CorrelationMode const m{1, 0.0, fam, 1.0, 1.0};
        for (int i = 0; i < 10000; ++i)
            min_hat = std::min(min_hat, hat_transform(m, -100.0 + 0.02 * i));
    }
    o.detail << " min A^=" << min_hat;
    o.require(min_hat >= 0.0, "A^ >= 0");

    CorrelationSpec spec = default_benchmark().spec;
    spec.modes.push_back({3, 0.5, CorrelationFamily::bohman, 0.05, 1.5});
    spec.modes.push_back({-3, -0.5, CorrelationFamily::bohman, 0.05, 1.5});
    auto const D = analytic_diffusion(spec, make_vgrid(4001, 20.0));
    double min_d = INFINITY;
    for (double d : D.values)
        min_d = std::min(min_d, d);
    o.detail << " min D=" << min_d;
    o.require(min_d >= -1e-12, "D >= -1e-12");

    std::vector<FieldRealization> rs;
    rs.reserve(10000);
    TimeGrid const tg{1.0 / 16.0, 128};
    for (int r = 0; r < 10000; ++r)
        rs.push_back(synthesize_realization(spec, 5000 + r, 1.0, tg));
    auto const rep = verify_correlation(rs, spec);
    o.detail << " corr dev=" << rep.worst_relative_deviation
             << " leakage=" << rep.worst_relative_leakage;
    o.require(rep.worst_relative_deviation <= 0.05, "correlation within 5%");
    o.require(rep.worst_relative_leakage <= 0.05, "leakage within 5%");
    double const secs = seconds_since(t0);
    o.require(secs < 30.0, "runtime < 30 s");
    report(5, "Bochner/positivity", o, secs);
}

ConvergenceReport study;

void criterion6()
{
    auto const t0 = Clock::now();
    Outcome o;
    auto cfg = default_benchmark();
    cfg.members = 200;
    cfg.threads = 0;
    study = convergence_study(cfg, true);
    double const secs = seconds_since(t0);
    for (std::size_t i = 0; i < study.epsilons.size(); ++i)
        o.detail << " eps=" << study.epsilons[i] << ": err=" << study.errors[i]
                 << " stderr=" << study.stats[i].mc_stderr_l2;
    double const err = study.errors.back();
    double const bound = 2.0 * study.stats.back().mc_stderr_l2 + study.budget.total;
    o.detail << " bound=" << bound << " (budget " << study.budget.total << ") slope="
             << study.fit.slope;
    o.require(study.strictly_decreasing, "strictly decreasing");
    o.require(err < bound, "smallest-eps error < 2 stderr + budget");
    report(6, "stochastic diffusion limit", o, secs);

    for (auto const &s : study.stats)
        ledger.profiles(s.vgrid, s.diffusion, "diffusion eps=" + std::to_string(s.epsilon));
}

void criterion7()
{
    Outcome o;
    for (auto const &p : study.obstruction)
        o.detail << " eps=" << p.epsilon << ": |J|=" << p.flux_l2;
    o.detail << " slope=" << study.obstruction_fit.slope;
    o.require(study.obstruction_decreasing, "decreasing in eps");
    o.require(!study.obstruction_fit.degenerate && study.obstruction_fit.slope > 0.5,
              "slope > 0.5");
    report(7, "obstruction control", o, 0.0);
}

QLRecord ql_record;

void criterion9()
{
    auto const t0 = Clock::now();
    Outcome o;
    auto const cfg = load_config(config_path("bump_on_tail.json"));
    auto const &q = cfg.quasilinear;
    auto const vg = make_vgrid(q.nv, q.v_max);
    std::vector<QLMode> modes;
    for (auto const &m : q.modes) {
        modes.push_back({m.k, m.lambda, m.e0_sq});
        if (q.add_conjugates)
            modes.push_back({-m.k, std::conj(m.lambda), m.e0_sq});
    }
    auto const state = make_ql_state(build_profile(q.profile, vg), q.epsilon, modes, q.ql);
    auto const fc = flux_consistency(state);
    ql_record = run_quasilinear(state, q.T, q.dt, q.ql, q.snapshot_every);
    double const secs = seconds_since(t0);

    bool monotone = true;
    for (std::size_t n = 1; n < ql_record.t.size(); ++n)
        for (std::size_t m = 0; m < modes.size(); ++m)
            monotone = monotone && ql_record.lambda[n][m].real() <=
                                       ql_record.lambda[n - 1][m].real() + 1e-12;
    double min_d = INFINITY;
    for (double d : ql_record.min_D)
        min_d = std::min(min_d, d);
    o.detail << " Re(lambda0)=" << state.modes[0].lambda.real()
             << " saturation t=" << ql_record.saturation_time << " min D=" << min_d
             << " flux identity=" << fc.relative_error;
    o.require(monotone, "Re lambda non-increasing");
    o.require(std::isfinite(ql_record.saturation_time), "reaches the clamp");
    o.require(min_d >= 0.0, "D >= 0");
    o.require(fc.relative_error <= 1e-8, "flux identity <= 1e-8");
    o.require(secs < 60.0, "runtime < 1 min");
    report(9, "quasilinear saturation", o, secs);
    ledger.ql(ql_record);
}

void criterion8()
{
    ledger.out.detail << " runs: vp=" << ledger.vp_runs << " diffusion=" << ledger.diffusion_runs
                      << " ql=" << ledger.ql_runs;
    ledger.out.require(ledger.vp_runs > 0 && ledger.diffusion_runs > 0 && ledger.ql_runs > 0,
                       "every run kind covered");
    report(8, "conservation ledger", ledger.out, 0.0);
}

template <class F>
void guarded(int id, char const *name, F &&f)
{
    try {
        f();
    } catch (std::exception const &e) {
        Outcome o;
        o.require(false, e.what());
        report(id, name, o, 0.0);
    }
}

} // namespace

int main()
{
    guarded(1, "dispersion benchmark", criterion1);
    guarded(2, "Landau damping", criterion2);
    guarded(3, "diffusion identity", criterion3);
    guarded(4, "weak-limit concentration", criterion4);
    guarded(5, "Bochner/positivity", criterion5);
    guarded(6, "stochastic diffusion limit", criterion6);
    guarded(7, "obstruction control", criterion7);
    guarded(9, "quasilinear saturation", criterion9);
    guarded(8, "conservation ledger", criterion8);
    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
