#include "qlkit/vlasov.hpp"

#include "qlkit/diffusion.hpp"
#include "qlkit/spline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qlkit {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double sup_abs(std::vector<double> const &v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

void check_support(SolverState const &s, SolverConfig const &cfg)
{
    if (cfg.support_floor <= 0.0)
        return;
    double const b = boundary_magnitude(s.f);
    double const limit = cfg.support_floor * s.sup_f0;
    if (b > limit) {
        std::ostringstream msg;
        msg << "compact-support violation at t = " << s.t << ": |f| = " << b
            << " at v = +-" << s.f.grid.v_max() << " exceeds " << limit;
        throw Error(msg.str());
    }
}

} // namespace

SolverState make_state(Distribution f0, double epsilon, FieldSource source)
{
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw Error("solver: epsilon must lie in (0, 1]");
    validate(f0);
    if (auto const *ext = std::get_if<ExternalField>(&source); ext && !ext->realization)
        throw Error("solver: external field source without a realization");
    if (auto const *an = std::get_if<AnsatzField>(&source))
        validate(an->spec);
    SolverState s;
    s.sup_f0 = sup_abs(f0.values);
    s.f = std::move(f0);
    s.epsilon = epsilon;
    s.source = std::move(source);
    return s;
}

FieldOnGrid field_of(SolverState const &state, double t)
{
    return std::visit(
        overloaded{
            [&](SelfConsistentField) { return solve_poisson(state.f); },
            [&](ExternalField const &e) { return field_at(*e.realization, state.f.grid, t); },
            [&](AnsatzField const &a) {
                return deterministic_ansatz_field(a.spec, state.epsilon, t, state.f.grid);
            }},
        state.source);
}

StepInfo advance(SolverState &state, double dt, SolverConfig const &cfg)
{
    if (!std::isfinite(dt) || dt == 0.0)
        throw Error("solver: dt must be finite and nonzero");
    auto const &g = state.f.grid;
    double const eps = state.epsilon;
    double const stream = 0.5 * dt / (eps * eps);

    StepInfo info;
    info.half = free_stream(state.f, stream);
    if (std::holds_alternative<SelfConsistentField>(state.source))
        info.field = solve_poisson(info.half);
    else
        info.field = field_of(state, state.t + 0.5 * dt);
    info.max_field = max_abs(info.field);
    double const dv = g.dv();
    if (cfg.enforce_dt && std::abs(dt) * info.max_field / (eps * dv) > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "solver: dt = " << dt << " violates dt max|E| / (eps dv) <= 1 (max|E| = "
            << info.max_field << ")";
        throw Error(msg.str());
    }

    Distribution f = info.half;
    double const before = mass(f);
    for (int j = 0; j < g.nx(); ++j) {
        double const shift = info.field.values[j] * dt / (eps * dv);
        if (shift != 0.0)
            spline::shift_periodic(f.row(j), shift);
    }

    if (!cfg.clip_negative) {
        auto const avg = x_average(f).values;
        double const lo = *std::min_element(avg.begin(), avg.end());
        if (lo < -cfg.overshoot_tolerance * state.sup_f0) {
            std::ostringstream msg;
            msg << "solver: x-averaged profile undershoots to " << lo << " at t = " << state.t
                << ", beyond " << cfg.overshoot_tolerance << " sup f0";
            throw Error(msg.str());
        }
    } else {
        double negative = 0.0;
        auto const w = g.v_weights();
        for (int j = 0; j < g.nx(); ++j) {
            auto r = f.row(j);
            for (int i = 0; i < g.nv(); ++i)
                if (r[i] < 0.0) {
                    negative -= w[i] * r[i];
                    r[i] = 0.0;
                }
        }
        negative /= g.nx();
        if (negative > 0.0) {
            if (negative > cfg.clip_tolerance) {
                std::ostringstream msg;
                msg << "solver: spline undershoot removes mass " << negative << " at t = "
                    << state.t << " (tolerance " << cfg.clip_tolerance << ")";
                throw Error(msg.str());
            }
            double const after = mass(f);
            double const scale = before / after;
            for (double &x : f.values)
                x *= scale;
        }
        info.clipped_mass = negative;
    }

    state.f = free_stream(f, stream);
    state.t += dt;
    check_support(state, cfg);
    return info;
}

SolverState step(SolverState state, double dt, SolverConfig const &cfg)
{
    advance(state, dt, cfg);
    return state;
}

double suggest_dt(SolverState const &state, double tau_field)
{
    double const eps = state.epsilon;
    double const e = max_abs(field_of(state, state.t));
    double dt = tau_field > 0.0 ? eps * eps * tau_field / 16.0 : 1.0;
    if (e > 0.0)
        dt = std::min(dt, eps * state.f.grid.dv() / (4.0 * e));
    return dt;
}

TrajectoryRecord run(Distribution const &f0, double epsilon, FieldSource const &source, double T,
                     double dt, DiagnosticsSchedule const &schedule, SolverConfig const &cfg)
{
    if (!(T >= 0.0))
        throw Error("run: T must be >= 0");
    if (!(dt > 0.0))
        throw Error("run: dt must be > 0");
    SolverState state = make_state(f0, epsilon, source);
    check_support(state, cfg);

    TrajectoryRecord rec;
    rec.epsilon = epsilon;
    int const every = std::max(1, schedule.every);
    auto record = [&](bool profile) {
        auto const E = field_of(state, state.t);
        double const W = field_energy(E);
        double const K = kinetic_energy(state.f);
        rec.t.push_back(state.t);
        rec.mass.push_back(mass(state.f));
        rec.l2.push_back(l2_norm(state.f));
        rec.kinetic.push_back(K);
        rec.field_energy.push_back(W);
        rec.total_energy.push_back(K + epsilon * W);
        rec.max_grad_field.push_back(max_abs_gradient(E));
        auto [lo, hi] = std::minmax_element(state.f.values.begin(), state.f.values.end());
        rec.min_f.push_back(*lo);
        rec.max_f.push_back(*hi);
        if (profile && schedule.keep_profiles) {
            rec.profile_times.push_back(state.t);
            rec.profiles.push_back(x_average(state.f));
        }
    };
    auto snapshot = [&] {
        if (schedule.keep_snapshots) {
            rec.snapshot_times.push_back(state.t);
            rec.snapshots.push_back(state.f);
        }
    };

    record(true);
    snapshot();

    int const steps = static_cast<int>(std::ceil(T / dt - 1e-9));
    auto const vg = velocity_part(f0.grid);
    std::vector<double> flux_sum(vg.nv, 0.0);
    double prev_mass = rec.mass.front();
    for (int n = 1; n <= steps; ++n) {
        double const h = n == steps ? T - state.t : dt;
        if (h <= 0.0)
            break;
        auto info = advance(state, h, cfg);
        rec.total_clipped_mass += info.clipped_mass;
        if (schedule.average_flux) {
            auto const J = fick_flux(info.half, info.field, epsilon);
            for (int i = 0; i < vg.nv; ++i)
                flux_sum[i] += h * J.values[i];
        }
        double const m = mass(state.f);
        rec.max_step_mass_change = std::max(rec.max_step_mass_change, std::abs(m - prev_mass));
        prev_mass = m;
        bool const last = n == steps;
        if (n % every == 0 || last)
            record(true);
        if ((schedule.snapshot_every > 0 && n % schedule.snapshot_every == 0) || last)
            snapshot();
    }
    if (schedule.average_flux) {
        rec.flux_average.vgrid = vg;
        rec.flux_average.values.assign(vg.nv, 0.0);
        if (T > 0.0)
            for (int i = 0; i < vg.nv; ++i)
                rec.flux_average.values[i] = flux_sum[i] / T;
    }
    rec.final_state = std::move(state.f);
    return rec;
}

} // namespace qlkit
