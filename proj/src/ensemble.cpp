#include "qlkit/ensemble.hpp"

#include "qlkit/random.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

namespace qlkit {
namespace {

constexpr double pi = std::numbers::pi;

double weighted_l2(VelocityGrid const &vg, std::vector<double> const &a,
                   std::vector<double> const *b = nullptr)
{
    auto const w = vg.weights();
    double s = 0.0;
    for (int i = 0; i < vg.nv; ++i) {
        double const d = b ? a[i] - (*b)[i] : a[i];
        s += w[i] * d * d;
    }
    return std::sqrt(s);
}

double pairing(VelocityGrid const &vg, std::vector<double> const &f, double c, double width)
{
    auto const w = vg.weights();
    double s = 0.0;
    for (int i = 0; i < vg.nv; ++i)
        s += w[i] * f[i] * bump(vg.v(i), c, width);
    return s;
}

// Fixed test profiles for weak pairings: (center, half-width).
constexpr std::array<std::pair<double, double>, 3> test_profiles{
    {{0.0, 2.0}, {1.0, 1.5}, {-1.5, 1.5}}};

double field_bound(CorrelationSpec const &spec, double x_length)
{
    double var = 0.0;
    for (auto const &m : spec.modes)
        if (m.k > 0) {
            double const k = 2.0 * pi * m.k / x_length;
            var += 2.0 * k * k * correlation(m, 0.0);
        }
    return 4.0 * std::sqrt(var);
}

double min_tau(CorrelationSpec const &spec)
{
    double t = std::numeric_limits<double>::infinity();
    for (auto const &m : spec.modes)
        t = std::min(t, m.tau);
    return std::isfinite(t) ? t : 1.0;
}

TimeGrid realization_grid(CorrelationSpec const &spec, double epsilon, double T)
{
    double dtau = min_tau(spec) / 16.0;
    for (auto const &m : spec.modes)
        if (m.omega != 0.0)
            dtau = std::min(dtau, pi / (8.0 * std::abs(m.omega)));
    int const samples = static_cast<int>(std::ceil(T / (epsilon * epsilon) / dtau)) + 2;
    return {dtau, samples};
}

struct MemberResult {
    std::vector<std::vector<double>> profiles;
    std::vector<double> field_energy;
    std::vector<double> mass;
    std::vector<double> flux;
    double max_step_mass_change = 0.0;
};

struct RunPlan {
    double dt = 0.0;
    int steps = 0;
    int every = 1;
    std::vector<double> times;
};

RunPlan make_plan(EnsembleConfig const &cfg, double epsilon)
{
    RunPlan p;
    int const outputs = std::max(1, cfg.outputs);
    double const dt0 = ensemble_dt(cfg, epsilon);
    int const chunks = static_cast<int>(std::ceil(cfg.T / (dt0 * outputs) - 1e-9));
    p.steps = std::max(1, chunks) * outputs;
    p.dt = cfg.T / p.steps;
    p.every = p.steps / outputs;
    for (int n = 0; n <= outputs; ++n)
        p.times.push_back(cfg.T * n / outputs);
    return p;
}

MemberResult run_member(EnsembleConfig const &cfg, PhaseSpaceGrid const &grid, double epsilon,
                        RunPlan const &plan, std::uint64_t seed)
{
    auto const f0 = initial_distribution(grid, cfg.initial);
    auto const tg = realization_grid(cfg.spec, epsilon, cfg.T);
    auto r = std::make_shared<FieldRealization const>(
        synthesize_realization(cfg.spec, seed, epsilon, tg));
    DiagnosticsSchedule sched;
    sched.every = plan.every;
    sched.average_flux = true;
    auto rec = run(f0, epsilon, ExternalField{r}, cfg.T, plan.dt, sched, cfg.solver);
    MemberResult m;
    for (auto &p : rec.profiles)
        m.profiles.push_back(std::move(p.values));
    m.field_energy = rec.field_energy;
    m.mass = rec.mass;
    m.flux = std::move(rec.flux_average.values);
    m.max_step_mass_change = rec.max_step_mass_change;
    return m;
}

template <class Fn>
void parallel_for(int count, int threads, Fn &&fn)
{
    int const nt = std::max(1, std::min(count, threads > 0 ? threads
                                                           : static_cast<int>(std::max(
                                                                 1u, std::thread::hardware_concurrency()))));
    if (nt == 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < count; i += nt)
                fn(i);
        });
    for (auto &th : pool)
        th.join();
}

// Diffusion solution at the output times plus the time average of the
// closure flux -D d f_diff / dv over [0, T].
struct DiffusionTrack {
    std::vector<std::vector<double>> profiles;
    std::vector<double> closure_average;
    DiffusionField D;
};

DiffusionTrack diffusion_track(EnsembleConfig const &cfg, std::vector<double> const &times,
                               double dt)
{
    auto const grid = make_grid(cfg.nx, cfg.nv, cfg.v_max);
    auto const vg = velocity_part(grid);
    DiffusionTrack out;
    out.D = analytic_diffusion(cfg.spec, vg);
    auto const fbar = x_average(initial_distribution(grid, cfg.initial));
    BarProfile p{vg, fbar.values, 0.0};
    out.closure_average.assign(vg.nv, 0.0);
    out.profiles.push_back(p.values);
    for (std::size_t n = 1; n < times.size(); ++n) {
        double const target = times[n];
        while (p.t < target - 1e-12) {
            double const h = std::min(dt, target - p.t);
            auto const j0 = fick_closure(out.D, p);
            p = step_diffusion(p, out.D, h);
            auto const j1 = fick_closure(out.D, p);
            for (int i = 0; i < vg.nv; ++i)
                out.closure_average[i] += 0.5 * h * (j0.values[i] + j1.values[i]);
        }
        p.t = target;
        out.profiles.push_back(p.values);
    }
    double const T = times.back();
    if (T > 0.0)
        for (double &x : out.closure_average)
            x /= T;
    return out;
}

} // namespace

Distribution initial_distribution(PhaseSpaceGrid const &grid, InitialData const &init)
{
    if (!(init.sigma > 0.0))
        throw Error("initial data: sigma must be > 0");
    double const norm = 1.0 / (init.sigma * std::sqrt(2.0 * pi));
    double const kx = grid.wavenumber(init.mode);
    return sample(grid, [&](double x, double v) {
        double const u = (v - init.drift) / init.sigma;
        return (1.0 + init.amplitude * std::cos(kx * x)) * norm * std::exp(-0.5 * u * u);
    });
}

ObstructionControl default_obstruction()
{
    ObstructionControl c;
    c.field.modes = {{1, 0.0, 0.0, cplx(0.5, 0.0)}, {-1, 0.0, 0.0, cplx(0.5, 0.0)}};
    return c;
}

void validate(EnsembleConfig const &cfg)
{
    validate(cfg.spec);
    if (cfg.members < 1)
        throw Error("ensemble: M must be >= 1");
    if (!(cfg.T > 0.0))
        throw Error("ensemble: T must be > 0");
    if (cfg.epsilons.empty())
        throw Error("ensemble: epsilon list is empty");
    for (double e : cfg.epsilons)
        if (!(e > 0.0 && e <= 1.0))
            throw Error("ensemble: epsilon values must lie in (0, 1]");
    if (cfg.outputs < 1)
        throw Error("ensemble: outputs must be >= 1");
    if (!(cfg.dt_factor > 0.0) || !(cfg.diffusion_dt > 0.0))
        throw Error("ensemble: step factors must be > 0");
    make_grid(cfg.nx, cfg.nv, cfg.v_max);
    validate(cfg.obstruction.field);
}

EnsembleConfig default_benchmark()
{
    EnsembleConfig cfg;
    auto add = [&](int k, double omega, double a) {
        cfg.spec.modes.push_back({k, omega, CorrelationFamily::triangular, a, 1.0});
        cfg.spec.modes.push_back({-k, -omega, CorrelationFamily::triangular, a, 1.0});
    };
    add(1, 1.0, 0.1);
    add(2, 2.0, 0.025);
    return cfg;
}

double ensemble_dt(EnsembleConfig const &cfg, double epsilon)
{
    double const dv = 2.0 * cfg.v_max / (cfg.nv - 1);
    double dt = epsilon * epsilon * min_tau(cfg.spec) / 16.0;
    double const eb = field_bound(cfg.spec, 2.0 * pi);
    if (eb > 0.0)
        dt = std::min(dt, epsilon * dv / (4.0 * eb));
    return dt * cfg.dt_factor;
}

std::vector<std::vector<double>> diffusion_reference(EnsembleConfig const &cfg,
                                                     std::vector<double> const &times, double dt)
{
    return diffusion_track(cfg, times, dt).profiles;
}

EnsembleStats run_ensemble(EnsembleConfig const &cfg, double epsilon)
{
    validate(cfg);
    auto const t0 = std::chrono::steady_clock::now();
    auto const grid = make_grid(cfg.nx, cfg.nv, cfg.v_max);
    auto const vg = velocity_part(grid);
    auto const plan = make_plan(cfg, epsilon);
    int const M = cfg.members;

    EnsembleStats st;
    st.epsilon = epsilon;
    st.members = M;
    st.dt = plan.dt;
    st.vgrid = vg;
    st.times = plan.times;
    for (int i = 0; i < M; ++i)
        st.seeds.push_back(member_seed(cfg.seed, static_cast<std::uint64_t>(i)));

    std::vector<MemberResult> results(M);
    std::vector<std::exception_ptr> errors(M);
    parallel_for(M, cfg.threads, [&](int i) {
        try {
            results[i] = run_member(cfg, grid, epsilon, plan, st.seeds[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (int i = 0; i < M; ++i)
        if (errors[i]) {
            std::string what = "unknown error";
            try {
                std::rethrow_exception(errors[i]);
            } catch (std::exception const &e) {
                what = e.what();
            }
            std::ostringstream msg;
            msg << "ensemble member " << i << " (seed " << st.seeds[i] << ", eps " << epsilon
                << ") failed: " << what;
            throw Error(msg.str());
        }

    // Reduction in index order.
    std::size_t const nt = plan.times.size();
    st.mean.assign(nt, std::vector<double>(vg.nv, 0.0));
    st.stderr_.assign(nt, std::vector<double>(vg.nv, 0.0));
    st.field_energy_mean.assign(nt, 0.0);
    st.field_energy_stderr.assign(nt, 0.0);
    st.mass_mean.assign(nt, 0.0);
    st.flux_mean.assign(vg.nv, 0.0);
    for (auto const &r : results) {
        if (r.profiles.size() != nt)
            throw Error("ensemble: member recorded an unexpected number of profiles");
        for (std::size_t n = 0; n < nt; ++n) {
            for (int i = 0; i < vg.nv; ++i)
                st.mean[n][i] += r.profiles[n][i] / M;
            st.field_energy_mean[n] += r.field_energy[n] / M;
            st.mass_mean[n] += r.mass[n] / M;
        }
        for (int i = 0; i < vg.nv; ++i)
            st.flux_mean[i] += r.flux[i] / M;
        st.max_step_mass_change = std::max(st.max_step_mass_change, r.max_step_mass_change);
    }
    if (M > 1) {
        for (auto const &r : results)
            for (std::size_t n = 0; n < nt; ++n) {
                for (int i = 0; i < vg.nv; ++i) {
                    double const d = r.profiles[n][i] - st.mean[n][i];
                    st.stderr_[n][i] += d * d;
                }
                double const d = r.field_energy[n] - st.field_energy_mean[n];
                st.field_energy_stderr[n] += d * d;
            }
        double const norm = 1.0 / (double(M - 1) * M);
        for (std::size_t n = 0; n < nt; ++n) {
            for (double &x : st.stderr_[n])
                x = std::sqrt(x * norm);
            st.field_energy_stderr[n] = std::sqrt(st.field_energy_stderr[n] * norm);
        }
    }

    auto const track = diffusion_track(cfg, plan.times, cfg.diffusion_dt);
    st.diffusion = track.profiles;
    for (std::size_t n = 0; n < nt; ++n) {
        double const e = weighted_l2(vg, st.mean[n], &st.diffusion[n]);
        st.l2_error.push_back(e);
        st.sup_l2_error = std::max(st.sup_l2_error, e);
    }
    st.final_l2_error = st.l2_error.back();
    st.mc_stderr_l2 = weighted_l2(vg, st.stderr_.back());
    for (auto const &[c, w] : test_profiles) {
        st.weak_pairings_mean.push_back(pairing(vg, st.mean.back(), c, w));
        st.weak_pairings_diff.push_back(pairing(vg, st.diffusion.back(), c, w));
    }

    st.flux_closure = track.closure_average;
    double const dmax = *std::max_element(track.D.values.begin(), track.D.values.end());
    auto const w = vg.weights();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < vg.nv; ++i)
        if (dmax > 0.0 && track.D.values[i] >= 0.1 * dmax) {
            double const d = st.flux_mean[i] - st.flux_closure[i];
            num += w[i] * d * d;
            den += w[i] * st.flux_closure[i] * st.flux_closure[i];
        }
    st.flux_relative_error = den > 0.0 ? std::sqrt(num / den) : 0.0;
    st.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return st;
}

LogLogFit fit_loglog(std::vector<double> const &x, std::vector<double> const &y)
{
    LogLogFit fit;
    if (x.size() != y.size() || x.size() < 3) {
        fit.degenerate = true;
        fit.note = "needs at least 3 points";
        return fit;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] > 0.0) || !(y[i] > 1e-300)) {
            fit.degenerate = true;
            fit.note = "non-positive value; slope undefined";
            return fit;
        }
    std::size_t const n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double const a = std::log(x[i]) - mx;
        sxx += a * a;
        sxy += a * (std::log(y[i]) - my);
    }
    if (sxx == 0.0) {
        fit.degenerate = true;
        fit.note = "identical abscissae";
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double const r = std::log(y[i]) - (fit.intercept + fit.slope * std::log(x[i]));
        ss += r * r;
    }
    fit.slope_stderr = n > 2 ? std::sqrt(ss / double(n - 2) / sxx) : 0.0;
    return fit;
}

ObstructionPoint obstruction_run(EnsembleConfig const &cfg, double epsilon)
{
    auto const grid = make_grid(cfg.nx, cfg.nv, cfg.v_max);
    InitialData flat = cfg.initial;
    flat.amplitude = 0.0;
    auto const f0 = initial_distribution(grid, flat);
    FieldSource const src = AnsatzField{cfg.obstruction.field};
    double emax = 0.0;
    {
        auto const E = deterministic_ansatz_field(cfg.obstruction.field, epsilon, 0.0, grid);
        emax = max_abs(E);
    }
    double dt = epsilon * epsilon / 16.0;
    if (emax > 0.0)
        dt = std::min(dt, epsilon * grid.dv() / (4.0 * emax));
    dt *= cfg.obstruction.dt_factor;
    DiagnosticsSchedule sched;
    sched.every = 1 << 30;
    sched.keep_profiles = false;
    sched.average_flux = true;
    auto const rec = run(f0, epsilon, src, cfg.obstruction.T, dt, sched, cfg.solver);
    return {epsilon, weighted_l2(velocity_part(grid), rec.flux_average.values)};
}

DiscretizationBudget discretization_budget(EnsembleConfig const &cfg, double epsilon,
                                           int members)
{
    DiscretizationBudget b;
    auto const plan = make_plan(cfg, epsilon);
    auto const grid = make_grid(cfg.nx, cfg.nv, cfg.v_max);
    auto const vg = velocity_part(grid);

    std::vector<double> const ends{0.0, cfg.T};
    auto const coarse = diffusion_track(cfg, ends, cfg.diffusion_dt).profiles.back();
    auto const fine = diffusion_track(cfg, ends, 0.5 * cfg.diffusion_dt).profiles.back();
    b.diffusion_dt = weighted_l2(vg, coarse, &fine);

    EnsembleConfig refined = cfg;
    refined.nv = 2 * cfg.nv - 1;
    auto const rgrid = make_grid(refined.nx, refined.nv, refined.v_max);
    RunPlan rplan = plan;
    rplan.dt = 0.5 * plan.dt;
    rplan.steps = 2 * plan.steps;
    rplan.every = 2 * plan.every;
    int const m = std::max(1, std::min(members, cfg.members));
    std::vector<std::vector<double>> base(m), ref(m);
    parallel_for(m, cfg.threads, [&](int i) {
        auto const seed = member_seed(cfg.seed, static_cast<std::uint64_t>(i));
        base[i] = run_member(cfg, grid, epsilon, plan, seed).profiles.back();
        ref[i] = run_member(refined, rgrid, epsilon, rplan, seed).profiles.back();
    });
    std::vector<double> mb(vg.nv, 0.0), mr(vg.nv, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < vg.nv; ++j) {
            mb[j] += base[i][j] / m;
            mr[j] += ref[i][2 * j] / m;
        }
    b.vlasov = weighted_l2(vg, mb, &mr);
    b.total = b.diffusion_dt + b.vlasov;
    return b;
}

ConvergenceReport convergence_study(EnsembleConfig const &cfg, bool with_budget)
{
    validate(cfg);
    if (cfg.epsilons.size() < 3)
        throw Error("convergence_study: needs at least 3 epsilon values");
    auto const t0 = std::chrono::steady_clock::now();
    ConvergenceReport rep;
    rep.epsilons = cfg.epsilons;
    std::sort(rep.epsilons.begin(), rep.epsilons.end(), std::greater<>());
    for (double e : rep.epsilons) {
        rep.stats.push_back(run_ensemble(cfg, e));
        rep.errors.push_back(rep.stats.back().final_l2_error);
    }
    rep.fit = fit_loglog(rep.epsilons, rep.errors);
    rep.strictly_decreasing = true;
    for (std::size_t i = 1; i < rep.errors.size(); ++i)
        if (!(rep.errors[i] < rep.errors[i - 1]))
            rep.strictly_decreasing = false;

    std::vector<double> flux;
    for (double e : rep.epsilons) {
        rep.obstruction.push_back(obstruction_run(cfg, e));
        flux.push_back(rep.obstruction.back().flux_l2);
    }
    rep.obstruction_fit = fit_loglog(rep.epsilons, flux);
    rep.obstruction_decreasing = true;
    for (std::size_t i = 1; i < flux.size(); ++i)
        if (!(flux[i] < flux[i - 1]))
            rep.obstruction_decreasing = false;

    if (with_budget)
        rep.budget = discretization_budget(cfg, rep.epsilons.back());
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace qlkit
