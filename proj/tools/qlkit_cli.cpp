// qlkit command line: one subcommand per experiment, all driven by a JSON
// config (see include/qlkit/config.hpp). Outputs go to --out.

#include "qlkit/config.hpp"
#include "qlkit/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;
using namespace qlkit;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
};

RunConfig load(Common const &c)
{
    return c.config.empty() ? default_config() : load_config(c.config);
}

std::ofstream open_out(Common const &c, std::string const &name,
                       std::ios::openmode mode = std::ios::out)
{
    fs::create_directories(c.out);
    auto const path = fs::path(c.out) / name;
    std::ofstream os(path, mode);
    if (!os)
        throw Error("cannot write '" + path.string() + "'");
    return os;
}

TimeGrid fast_grid(CorrelationSpec const &spec, double eps, double T)
{
    double dtau = 1.0 / 16.0;
    for (auto const &m : spec.modes) {
        dtau = std::min(dtau, m.tau / 16.0);
        if (m.omega != 0.0)
            dtau = std::min(dtau, std::numbers::pi / (8.0 * std::abs(m.omega)));
    }
    return {dtau, static_cast<int>(std::ceil(T / (eps * eps) / dtau)) + 2};
}

SynthesisBackend backend_of(std::string const &name)
{
    if (name == "spectral")
        return SynthesisBackend::spectral;
    if (name == "moving_average")
        return SynthesisBackend::moving_average;
    throw Error("unknown synthesis backend '" + name + "'");
}

int cmd_simulate(Common const &c)
{
    auto const cfg = load(c);
    auto const &s = cfg.simulate;
    auto const grid = make_grid(cfg.grid);
    auto const f0 = initial_distribution(grid, cfg.initial);
    FieldSource src;
    std::shared_ptr<FieldRealization const> real;
    double tau_field = 0.0;
    if (s.source == "stochastic") {
        real = std::make_shared<FieldRealization const>(synthesize_realization(
            cfg.correlation, s.seed, s.epsilon, fast_grid(cfg.correlation, s.epsilon, s.T),
            backend_of(s.backend)));
        src = ExternalField{real};
        tau_field = 1.0;
        for (auto const &m : cfg.correlation.modes)
            tau_field = std::min(tau_field, m.tau);
    } else if (s.source == "ansatz") {
        src = AnsatzField{cfg.ansatz};
    } else if (s.source == "self_consistent") {
        src = SelfConsistentField{};
    } else {
        throw Error("simulate: unknown source '" + s.source + "'");
    }
    double dt = s.dt;
    if (!(dt > 0.0))
        dt = suggest_dt(make_state(f0, s.epsilon, src), tau_field);
    DiagnosticsSchedule sched;
    sched.every = s.every;
    sched.snapshot_every = s.snapshot_every;
    sched.average_flux = true;
    auto const rec = run(f0, s.epsilon, src, s.T, dt, sched, cfg.solver);

    auto const vg = velocity_part(grid);
    {
        auto os = open_out(c, "trajectory.csv");
        io::write_trajectory_csv(os, rec);
    }
    {
        std::vector<std::vector<double>> p;
        for (auto const &x : rec.profiles)
            p.push_back(x.values);
        auto os = open_out(c, "profiles.csv");
        io::write_profile_series_csv(os, vg, rec.profile_times, p);
    }
    {
        auto os = open_out(c, "flux_average.csv");
        io::write_profile_csv(os, vg, rec.flux_average.values, "flux");
    }
    {
        auto os = open_out(c, "final.csv");
        io::write_distribution_csv(os, rec.final_state);
    }
    {
        auto os = open_out(c, "final.bin", std::ios::out | std::ios::binary);
        io::write_checkpoint(os, rec.final_state);
    }
    if (real) {
        auto os = open_out(c, "realization.csv");
        io::write_realization_csv(os, *real);
    }
    std::cout << "simulate: " << rec.t.size() << " records, dt = " << dt
              << ", mass drift = " << rec.mass.back() - rec.mass.front()
              << ", max step mass change = " << rec.max_step_mass_change << "\n";
    return 0;
}

int cmd_estimate_d(Common const &c)
{
    auto const cfg = load(c);
    auto const &d = cfg.diffusion;
    auto const grid = make_grid(cfg.grid);
    auto const vg = velocity_part(grid);
    auto const Da = analytic_diffusion(cfg.correlation, vg, cfg.grid.x_length);
    {
        auto os = open_out(c, "D_analytic.csv");
        io::write_profile_csv(os, vg, Da.values, "D");
    }
    if (d.source == "empirical") {
        auto const tg = fast_grid(cfg.correlation, d.epsilon, d.t);
        FieldRealization r;
        if (d.field == "ansatz")
            r = ansatz_realization(cfg.ansatz, d.epsilon, tg);
        else if (d.field == "stochastic")
            r = synthesize_realization(cfg.correlation, d.seed, d.epsilon, tg);
        else
            throw Error("estimate-d: unknown field '" + d.field + "'");
        auto const De = empirical_diffusion(r, d.t, d.epsilon, vg, cfg.grid.x_length);
        auto os = open_out(c, "D_empirical.csv");
        io::write_profile_csv(os, vg, De.values, "D");
    } else if (d.source != "analytic") {
        throw Error("estimate-d: unknown source '" + d.source + "'");
    }
    std::cout << "estimate-d: wrote D on " << vg.nv << " nodes\n";
    return 0;
}

int cmd_diffuse(Common const &c)
{
    auto const cfg = load(c);
    auto const &d = cfg.diffusion;
    auto const grid = make_grid(cfg.grid);
    auto const vg = velocity_part(grid);
    auto const D = analytic_diffusion(cfg.correlation, vg, cfg.grid.x_length);
    BarProfile p{vg, x_average(initial_distribution(grid, cfg.initial)).values, 0.0};
    std::vector<double> times{0.0};
    std::vector<std::vector<double>> profiles{p.values};
    int const outputs = std::max(1, d.outputs);
    for (int n = 1; n <= outputs; ++n) {
        double const target = d.T * n / outputs;
        p = solve_diffusion(p, D, target - p.t, d.dt, d.theta);
        p.t = target;
        times.push_back(target);
        profiles.push_back(p.values);
    }
    {
        auto os = open_out(c, "D.csv");
        io::write_profile_csv(os, vg, D.values, "D");
    }
    {
        auto os = open_out(c, "diffusion_profiles.csv");
        io::write_profile_series_csv(os, vg, times, profiles);
    }
    std::cout << "diffuse: T = " << d.T << ", mass = " << mass(p) << ", L2 = " << l2_norm(p)
              << "\n";
    return 0;
}

int cmd_dispersion(Common const &c)
{
    auto const cfg = load(c);
    auto const &d = cfg.dispersion;
    auto const vg = make_vgrid(cfg.grid.nv, cfg.grid.v_max);
    auto const G = build_profile(d.profile, vg);
    std::vector<RootSearch> searches;
    std::vector<DispersionRoot> all;
    for (double k : d.k) {
        Rect rect;
        if (d.rect) {
            rect = *d.rect;
        } else {
            double const b = analyticity_bound(G, k);
            double const reach = std::abs(k) * vg.v_max + 3.0;
            rect = {b < 0.0 ? std::max(-0.5, 0.5 * b) : 1e-3, 1.0, -reach, reach};
        }
        auto s = find_roots(G, k, rect, d.rel_tol);
        for (auto const &r : s.roots)
            all.push_back(r);
        if (s.flagged)
            std::cerr << "dispersion: k = " << k << " flagged: " << s.diagnostic << "\n";
        searches.push_back(std::move(s));
    }
    std::optional<StabilityMargin> margin;
    if (d.k_max > 0)
        margin = stability_margin(G, d.k_max, cfg.grid.x_length);
    {
        auto os = open_out(c, "roots.csv");
        io::write_roots_csv(os, all);
    }
    {
        auto os = open_out(c, "roots.json");
        os << io::roots_json(searches, margin);
    }
    for (auto const &r : all)
        std::cout << "k = " << r.k << "  lambda = " << r.lambda.real()
                  << (r.lambda.imag() < 0 ? " - " : " + ") << std::abs(r.lambda.imag())
                  << "i  residual = " << r.residual << "\n";
    if (margin)
        std::cout << "stability margin = " << margin->kappa << "\n";
    return 0;
}

int cmd_quasilinear(Common const &c)
{
    auto const cfg = load(c);
    auto const &q = cfg.quasilinear;
    auto const vg = make_vgrid(q.nv, q.v_max);
    auto const G = build_profile(q.profile, vg);
    std::vector<QLMode> modes;
    for (auto const &m : q.modes) {
        QLMode a;
        a.k = m.k;
        a.lambda = m.lambda;
        a.e0_sq = m.e0_sq;
        modes.push_back(a);
        if (q.add_conjugates) {
            a.k = -m.k;
            a.lambda = std::conj(m.lambda);
            modes.push_back(a);
        }
    }
    auto state = make_ql_state(G, q.epsilon, modes, q.ql);
    auto const fc = flux_consistency(state);
    auto const rec = run_quasilinear(state, q.T, q.dt, q.ql, q.snapshot_every);
    {
        auto os = open_out(c, "lambda.csv");
        io::write_lambda_csv(os, rec);
    }
    {
        auto os = open_out(c, "G_snapshots.csv");
        io::write_profile_series_csv(os, vg, rec.snapshot_times, rec.G_snapshots);
    }
    {
        auto os = open_out(c, "D_snapshots.csv");
        io::write_profile_series_csv(os, vg, rec.snapshot_times, rec.D_snapshots);
    }
    std::cout << "quasilinear: " << rec.t.size() - 1 << " steps, saturation time = "
              << rec.saturation_time << ", flux identity error = " << fc.relative_error
              << ", audits = " << rec.audits << " (" << rec.audit_failures << " failed)\n";
    return 0;
}

void apply_overrides(EnsembleConfig &e, int members, int threads)
{
    if (members > 0)
        e.members = members;
    if (threads >= 0)
        e.threads = threads;
}

int cmd_ensemble(Common const &c, int members, int threads)
{
    auto cfg = load(c);
    if (std::abs(cfg.grid.x_length - 2.0 * std::numbers::pi) > 1e-12)
        throw Error("ensemble: the x period must be 2 pi");
    apply_overrides(cfg.ensemble, members, threads);
    auto const t0 = std::chrono::steady_clock::now();
    std::vector<EnsembleStats> stats;
    for (double e : cfg.ensemble.epsilons) {
        stats.push_back(run_ensemble(cfg.ensemble, e));
        auto const &s = stats.back();
        std::cout << "eps = " << e << "  L2 error = " << s.final_l2_error
                  << "  MC stderr = " << s.mc_stderr_l2 << "  (" << s.wall_seconds << " s)\n";
    }
    double const wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        auto os = open_out(c, "stats.csv");
        io::write_stats_csv(os, stats);
    }
    {
        auto os = open_out(c, "manifest.json");
        os << io::manifest_json(cfg.ensemble, stats, nullptr, wall);
    }
    return 0;
}

int cmd_study(Common const &c, int members, int threads)
{
    auto cfg = load(c);
    if (std::abs(cfg.grid.x_length - 2.0 * std::numbers::pi) > 1e-12)
        throw Error("study: the x period must be 2 pi");
    apply_overrides(cfg.ensemble, members, threads);
    auto rep = convergence_study(cfg.ensemble, false);
    rep.budget = discretization_budget(cfg.ensemble, rep.epsilons.back(), cfg.budget_members);
    {
        auto os = open_out(c, "stats.csv");
        io::write_stats_csv(os, rep.stats);
    }
    {
        auto os = open_out(c, "errors.csv");
        io::write_errors_csv(os, rep);
    }
    {
        auto os = open_out(c, "manifest.json");
        os << io::manifest_json(cfg.ensemble, rep.stats, &rep, rep.wall_seconds);
    }
    for (std::size_t i = 0; i < rep.epsilons.size(); ++i)
        std::cout << "eps = " << rep.epsilons[i] << "  L2 error = " << rep.errors[i]
                  << "  obstruction flux = " << rep.obstruction[i].flux_l2 << "\n";
    std::cout << "error slope = " << rep.fit.slope << " +- " << rep.fit.slope_stderr
              << (rep.fit.degenerate ? " (degenerate: " + rep.fit.note + ")" : "")
              << "\nobstruction slope = " << rep.obstruction_fit.slope
              << "\nbudget = " << rep.budget.total << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"qlkit: stochastic Vlasov, diffusion limits and quasilinear theory"};
    app.require_subcommand(0, 1);
    bool print_default = false;
    app.add_flag("--print-default-config", print_default, "Print the default JSON config and exit");

    Common common;
    int members = 0;
    int threads = -1;
    auto add = [&](char const *name, char const *help) {
        auto *sc = app.add_subcommand(name, help);
        sc->add_option("-c,--config", common.config, "JSON config file")->check(CLI::ExistingFile);
        sc->add_option("-o,--out", common.out, "Output directory");
        return sc;
    };
    auto *simulate = add("simulate", "Run the Vlasov solver for one field source");
    auto *estimate = add("estimate-d", "Analytic and empirical diffusion coefficients");
    auto *diffuse = add("diffuse", "Solve the velocity diffusion equation");
    auto *dispersion = add("dispersion", "Dispersion roots and stability margin");
    auto *quasilinear = add("quasilinear", "Quasilinear relaxation from unstable roots");
    auto *ensemble = add("ensemble", "Monte Carlo ensemble per epsilon");
    auto *study = add("study", "Epsilon scan with fit, obstruction control and budget");
    for (auto *sc : {ensemble, study}) {
        sc->add_option("-M,--members", members, "Override the ensemble size");
        sc->add_option("-j,--threads", threads, "Worker threads (0: all cores)");
    }

    CLI11_PARSE(app, argc, argv);
    try {
        if (print_default) {
            std::cout << dump_config(default_config());
            return 0;
        }
        if (simulate->parsed())
            return cmd_simulate(common);
        if (estimate->parsed())
            return cmd_estimate_d(common);
        if (diffuse->parsed())
            return cmd_diffuse(common);
        if (dispersion->parsed())
            return cmd_dispersion(common);
        if (quasilinear->parsed())
            return cmd_quasilinear(common);
        if (ensemble->parsed())
            return cmd_ensemble(common, members, threads);
        if (study->parsed())
            return cmd_study(common, members, threads);
        std::cout << app.help();
        return 0;
    } catch (std::exception const &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
