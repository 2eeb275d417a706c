#include "qlkit/quasilinear.hpp"

#include "qlkit/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qlkit {
namespace {

// Index of the conjugate partner (-k, lambda*) that precedes mode i, or -1.
int find_partner(std::vector<QLMode> const &modes, std::size_t i)
{
    for (std::size_t j = 0; j < i; ++j)
        if (modes[j].k == -modes[i].k && modes[j].partner < 0 &&
            std::abs(std::conj(modes[j].lambda) - modes[i].lambda) <
                1e-3 * (1.0 + std::abs(modes[i].lambda)))
            return static_cast<int>(j);
    return -1;
}

std::vector<double> divergence(VelocityGrid const &vg, std::vector<double> const &flux)
{
    return spectral_derivative(vg, flux);
}

} // namespace

std::vector<double> spectral_derivative(VelocityGrid const &vg, std::vector<double> const &g)
{
    int const n = vg.nv - 1;
    double const period = n * vg.dv();
    std::vector<double> in(g.begin(), g.begin() + n);
    std::vector<cplx> hat(n / 2 + 1);
    fft::r2c(in, hat);
    for (int m = 0; m <= n / 2; ++m) {
        double const kk = 2.0 * std::numbers::pi * m / period;
        hat[m] *= (n % 2 == 0 && m == n / 2) ? cplx{} : cplx(0.0, kk / n);
    }
    std::vector<double> out(n);
    fft::c2r(hat, out);
    out.push_back(out.front());
    return out;
}

QLState make_ql_state(ProfileG const &G0, double epsilon, std::vector<QLMode> modes,
                      QLConfig const &cfg)
{
    if (!(epsilon > 0.0))
        throw Error("quasilinear: eps must be > 0");
    QLState s;
    s.G = gridded_profile(G0.vgrid, G0.values);
    s.epsilon = epsilon;
    s.modes = std::move(modes);
    for (std::size_t i = 0; i < s.modes.size(); ++i) {
        auto &m = s.modes[i];
        if (!(m.e0_sq >= 0.0))
            throw Error("quasilinear: |E(0)|^2 must be >= 0");
        m.partner = find_partner(s.modes, i);
        if (int const p = m.partner; p >= 0) {
            m.lambda = std::conj(s.modes[p].lambda);
            m.residual = s.modes[p].residual;
            continue;
        }
        auto nr = newton_root(s.G, m.k, m.lambda, cfg.newton_tol, cfg.kernel_tol, 60, cfg.re_floor);
        if (!nr.converged || nr.root.residual > 1e-8) {
            std::ostringstream msg;
            msg << "quasilinear: mode k = " << m.k << " seeded at " << m.lambda
                << " does not converge on the gridded profile (" << nr.diagnostic << ")";
            throw Error(msg.str());
        }
        if (!(nr.root.lambda.real() > 0.0))
            throw Error("quasilinear: initial mode is not unstable");
        m.lambda = nr.root.lambda;
        m.residual = nr.root.residual;
    }
    return s;
}

DiffusionField ql_diffusion(QLState const &state)
{
    auto const &vg = state.G.vgrid;
    DiffusionField D{vg, std::vector<double>(vg.nv, 0.0)};
    double const e2 = state.epsilon * state.epsilon;
    for (auto const &m : state.modes) {
        if (!m.active)
            continue;
        double const g = m.lambda.real(), w = m.lambda.imag();
        if (!(g > 0.0)) {
            std::ostringstream msg;
            msg << "ql_diffusion: active mode k = " << m.k << " has Re lambda = " << g << " <= 0";
            throw Error(msg.str());
        }
        double const amp = e2 * m.e0_sq * g * std::exp(2.0 * m.growth_integral);
        for (int i = 0; i < vg.nv; ++i) {
            double const r = m.k * vg.v(i) + w;
            D.values[i] += amp / (r * r + g * g);
        }
    }
    return D;
}

QLStepInfo ql_step(QLState &state, double dt, QLConfig const &cfg)
{
    if (!(dt > 0.0))
        throw Error("ql_step: dt must be > 0");
    double gmax = 0.0;
    for (auto const &m : state.modes)
        if (m.active)
            gmax = std::max(gmax, m.lambda.real());
    if (dt * gmax > 0.1 + 1e-12) {
        std::ostringstream msg;
        msg << "ql_step: dt = " << dt << " does not resolve growth rate " << gmax
            << " (needs dt max Re lambda <= 0.1)";
        throw Error(msg.str());
    }

    QLStepInfo info;
    info.D = ql_diffusion(state);
    BarProfile p{state.G.vgrid, state.G.values, state.t};
    p = step_diffusion(p, info.D, dt, cfg.theta);
    state.G.values = std::move(p.values);
    state.t += dt;
    ++state.steps;

    for (std::size_t i = 0; i < state.modes.size(); ++i) {
        auto &m = state.modes[i];
        if (!m.active)
            continue;
        double const g_old = m.lambda.real();
        if (int const pi = m.partner; pi >= 0) {
            auto const &p = state.modes[pi];
            m.lambda = std::conj(p.lambda);
            m.residual = p.residual;
            m.growth_integral = p.growth_integral;
            if (!p.active) {
                m.active = false;
                m.clamp_time = p.clamp_time;
                info.clamped.push_back(static_cast<int>(i));
            }
            continue;
        }
        auto nr = newton_root(state.G, m.k, m.lambda, cfg.newton_tol, cfg.kernel_tol, 60,
                              cfg.re_floor);
        bool const pinned = nr.root.lambda.real() <= cfg.re_floor * (1.0 + 1e-12);
        if (!nr.converged && !pinned) {
            std::ostringstream msg;
            msg << "ql_step: root continuation failed for k = " << m.k << " at t = " << state.t
                << " (" << nr.diagnostic << "); last good lambda = " << m.lambda;
            throw Error(msg.str());
        }
        if (pinned) {
            // Saturated: freeze the amplitude factor, drop the growth.
            m.growth_integral += 0.5 * dt * g_old;
            m.active = false;
            m.clamp_time = state.t;
            m.lambda = cplx(0.0, nr.root.lambda.imag());
            m.residual = nr.root.residual;
            info.clamped.push_back(static_cast<int>(i));
            continue;
        }
        m.growth_integral += 0.5 * dt * (g_old + nr.root.lambda.real());
        m.lambda = nr.root.lambda;
        m.residual = nr.root.residual;
    }

    if (cfg.audit_every > 0 && state.steps % cfg.audit_every == 0) {
        info.audited = true;
        for (auto const &m : state.modes) {
            if (!m.active || m.k < 0.0)
                continue;
            double const g = m.lambda.real(), w = m.lambda.imag();
            Rect const box{0.5 * std::min(g, cfg.re_floor) + 0.5 * cfg.re_floor, g + 0.5, w - 1.0,
                           w + 1.0};
            auto const wn = winding_number(state.G, m.k, box, 1e-8);
            if (wn.count != 1)
                info.audit_ok = false;
        }
    }
    return info;
}

QLRecord run_quasilinear(QLState state, double T, double dt, QLConfig const &cfg,
                         int snapshot_every, bool stop_at_saturation)
{
    QLRecord rec;
    auto record = [&](DiffusionField const *D) {
        rec.t.push_back(state.t);
        std::vector<cplx> lam;
        for (auto const &m : state.modes)
            lam.push_back(m.lambda);
        rec.lambda.push_back(std::move(lam));
        BarProfile const p{state.G.vgrid, state.G.values, state.t};
        rec.mass.push_back(mass(p));
        rec.l2.push_back(l2_norm(p));
        if (D)
            rec.min_D.push_back(*std::min_element(D->values.begin(), D->values.end()));
    };
    auto snapshot = [&](DiffusionField const &D) {
        rec.snapshot_times.push_back(state.t);
        rec.G_snapshots.push_back(state.G.values);
        rec.D_snapshots.push_back(D.values);
    };

    auto D0 = ql_diffusion(state);
    record(&D0);
    if (snapshot_every > 0)
        snapshot(D0);
    int const steps = static_cast<int>(std::ceil(T / dt - 1e-9));
    double const end = state.t + T;
    for (int n = 1; n <= steps; ++n) {
        double const h = n == steps ? end - state.t : dt;
        if (h <= 0.0)
            break;
        auto info = ql_step(state, h, cfg);
        if (info.audited) {
            ++rec.audits;
            if (!info.audit_ok)
                ++rec.audit_failures;
        }
        if (!info.clamped.empty() && std::isnan(rec.saturation_time))
            rec.saturation_time = state.t;
        auto D = ql_diffusion(state);
        record(&info.D);
        bool const all_clamped =
            std::none_of(state.modes.begin(), state.modes.end(), [](auto const &m) { return m.active; });
        if (snapshot_every > 0 && (n % snapshot_every == 0 || n == steps || all_clamped))
            snapshot(D);
        if (stop_at_saturation && all_clamped)
            break;
    }
    rec.final_state = std::move(state);
    return rec;
}

FluxConsistency flux_consistency(QLState const &state, int nx)
{
    auto const &vg = state.G.vgrid;
    double const e2 = state.epsilon * state.epsilon;
    auto const dG = spectral_derivative(vg, state.G.values);
    auto const D = ql_diffusion(state);

    FluxConsistency out;
    out.ql_flux.resize(vg.nv);
    for (int i = 0; i < vg.nv; ++i)
        out.ql_flux[i] = -D.values[i] * dG[i];

    // Explicit x-average over one period of the slowest mode.
    double kmin = std::numeric_limits<double>::infinity();
    for (auto const &m : state.modes)
        if (m.active)
            kmin = std::min(kmin, std::abs(m.k));
    out.direct_flux.assign(vg.nv, 0.0);
    if (std::isfinite(kmin)) {
        double const L = 2.0 * std::numbers::pi / kmin;
        // Field coefficients: a real amplitude for the first entry of each
        // conjugate pair, its conjugate for the partner.
        std::vector<cplx> coeff(state.modes.size());
        for (std::size_t i = 0; i < state.modes.size(); ++i) {
            auto const &m = state.modes[i];
            double const a = std::sqrt(m.e0_sq) * std::exp(m.growth_integral);
            int const p = m.partner;
            coeff[i] = p >= 0 ? std::conj(coeff[p]) : cplx(a, 0.0);
        }
        for (int j = 0; j < nx; ++j) {
            double const x = L * j / nx;
            double E = 0.0;
            std::vector<cplx> phase(state.modes.size());
            for (std::size_t q = 0; q < state.modes.size(); ++q) {
                if (!state.modes[q].active)
                    continue;
                phase[q] = coeff[q] * std::polar(1.0, state.modes[q].k * x);
                E += phase[q].real();
            }
            for (int i = 0; i < vg.nv; ++i) {
                cplx h{};
                for (std::size_t q = 0; q < state.modes.size(); ++q) {
                    auto const &m = state.modes[q];
                    if (!m.active)
                        continue;
                    h += -phase[q] * dG[i] / (m.lambda + cplx(0.0, m.k * vg.v(i)));
                }
                out.direct_flux[i] += e2 * E * h.real() / nx;
            }
        }
    }
    out.ql_divergence = divergence(vg, out.ql_flux);
    out.direct_divergence = divergence(vg, out.direct_flux);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < vg.nv; ++i) {
        num = std::max(num, std::abs(out.ql_divergence[i] - out.direct_divergence[i]));
        den = std::max(den, std::abs(out.ql_divergence[i]));
    }
    out.relative_error = den > 0.0 ? num / den : num;
    return out;
}

} // namespace qlkit
