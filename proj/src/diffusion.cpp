#include "qlkit/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qlkit {
namespace {

void check_same(VelocityGrid const &a, VelocityGrid const &b, char const *what)
{
    if (!(a == b))
        throw Error(std::string(what) + ": velocity grids differ");
}

// E1(z) = (e^z - 1)/z and E2(z) = integral_0^1 s e^{zs} ds.
void filon_weights(cplx z, cplx &e1, cplx &e2)
{
    if (std::abs(z) < 0.5) {
        cplx term = 1.0; // z^n / n!
        e1 = 0.0;
        e2 = 0.0;
        for (int n = 0; n < 24; ++n) {
            e1 += term / double(n + 1);
            e2 += term / double(n + 2);
            term *= z / double(n + 1);
        }
        return;
    }
    cplx const ez = std::exp(z);
    e1 = (ez - 1.0) / z;
    e2 = (ez * (z - 1.0) + 1.0) / (z * z);
}

} // namespace

BarProfile make_profile(VelocityGrid const &vg, std::vector<double> values, double t)
{
    if (static_cast<int>(values.size()) != vg.nv)
        throw Error("profile: value count does not match the velocity grid");
    for (double x : values)
        if (!std::isfinite(x))
            throw Error("profile: non-finite value");
    return {vg, std::move(values), t};
}

double mass(BarProfile const &p)
{
    return mass(VelocityProfile{p.vgrid, p.values});
}

double l2_norm(BarProfile const &p)
{
    return l2_norm(VelocityProfile{p.vgrid, p.values});
}

DiffusionField analytic_diffusion(CorrelationSpec const &spec, VelocityGrid const &vg,
                                  double x_length)
{
    validate(spec);
    DiffusionField D{vg, std::vector<double>(vg.nv, 0.0)};
    for (auto const &m : spec.modes) {
        double const k = 2.0 * std::numbers::pi * m.k / x_length;
        for (int i = 0; i < vg.nv; ++i)
            D.values[i] += 0.5 * k * k * hat_transform(m, m.omega - k * vg.v(i));
    }
    return D;
}

DiffusionField empirical_diffusion(FieldRealization const &r, double t, double epsilon,
                                   VelocityGrid const &vg, double x_length)
{
    if (!(epsilon > 0.0) || !(t >= 0.0))
        throw Error("empirical_diffusion: needs eps > 0 and t >= 0");
    if (std::abs(epsilon - r.epsilon) > 1e-12 * epsilon)
        throw Error("empirical_diffusion: eps does not match the realization");
    double const tau_t = t / (epsilon * epsilon);
    double const dtau = r.time.dtau;
    if (tau_t > r.time.end() + 1e-9 * dtau) {
        std::ostringstream msg;
        msg << "empirical_diffusion: realization covers fast time " << r.time.end()
            << " but t / eps^2 = " << tau_t;
        throw Error(msg.str());
    }

    // Nodes in s: 0 and every s = tau_t - tau_n with tau_n < tau_t, so the
    // interpolated envelope is linear on each panel.
    std::vector<double> s{0.0};
    std::vector<double> tau{tau_t};
    for (int n = static_cast<int>(std::ceil(tau_t / dtau - 1e-9)) - 1; n >= 0; --n) {
        double const tn = n * dtau;
        if (tau_t - tn <= s.back() + 1e-12 * dtau)
            continue;
        s.push_back(tau_t - tn);
        tau.push_back(tn);
    }

    DiffusionField D{vg, std::vector<double>(vg.nv, 0.0)};
    std::size_t const panels = s.size() - 1;
    if (panels == 0)
        return D;
    std::vector<cplx> product(s.size());
    for (std::size_t q = 0; q < r.mode_count(); ++q) {
        double const k = 2.0 * std::numbers::pi * r.k[q] / x_length;
        double const omega = r.carrier ? r.omega[q] : 0.0;
        cplx const now = std::conj(r.envelope_at(q, tau_t));
        for (std::size_t n = 0; n < s.size(); ++n)
            product[n] = r.envelope_at(q, tau[n]) * now;
        for (int i = 0; i < vg.nv; ++i) {
            double const Om = omega - k * vg.v(i);
            double h_cached = -1.0;
            cplx e1, e2;
            cplx acc{};
            for (std::size_t p = 0; p < panels; ++p) {
                double const a = s[p], h = s[p + 1] - s[p];
                if (h != h_cached) {
                    filon_weights(cplx(0.0, Om * h), e1, e2);
                    h_cached = h;
                }
                cplx const slope = product[p + 1] - product[p];
                acc += std::polar(1.0, Om * a) * h * (product[p] * e1 + slope * e2);
            }
            D.values[i] += 2.0 * k * k * acc.real();
        }
    }
    return D;
}

double weak_limit_pairing(DiffusionField const &D, std::function<double(double)> const &phi)
{
    std::vector<double> values(D.vgrid.nv);
    for (int i = 0; i < D.vgrid.nv; ++i)
        values[i] = phi(D.vgrid.v(i));
    return weak_limit_pairing(D, values);
}

double weak_limit_pairing(DiffusionField const &D, std::span<double const> phi)
{
    if (static_cast<int>(phi.size()) != D.vgrid.nv)
        throw Error("weak_limit_pairing: test profile size mismatch");
    auto const w = D.vgrid.weights();
    double s = 0.0;
    for (int i = 0; i < D.vgrid.nv; ++i)
        s += w[i] * D.values[i] * phi[i];
    return s;
}

double bump(double v, double center, double width)
{
    double const u = (v - center) / width;
    if (std::abs(u) >= 1.0)
        return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

VelocityProfile fick_flux(Distribution const &f, FieldOnGrid const &E, double epsilon)
{
    auto const &g = f.grid;
    if (!(E.grid == g))
        throw Error("fick_flux: field and distribution grids differ");
    VelocityProfile J{velocity_part(g), std::vector<double>(g.nv(), 0.0)};
    for (int j = 0; j < g.nx(); ++j) {
        double const e = E.values[j];
        if (e == 0.0)
            continue;
        auto r = f.row(j);
        for (int i = 0; i < g.nv(); ++i)
            J.values[i] += e * r[i];
    }
    double const scale = 1.0 / (epsilon * g.nx());
    for (double &x : J.values)
        x *= scale;
    return J;
}

VelocityProfile fick_flux(SolverState const &state)
{
    return fick_flux(state.f, field_of(state, state.t), state.epsilon);
}

VelocityProfile fick_closure(DiffusionField const &D, BarProfile const &p)
{
    check_same(D.vgrid, p.vgrid, "fick_closure");
    int const n = p.vgrid.nv;
    double const dv = p.vgrid.dv();
    VelocityProfile J{p.vgrid, std::vector<double>(n)};
    for (int i = 0; i < n; ++i) {
        double d;
        if (i == 0)
            d = (p.values[1] - p.values[0]) / dv;
        else if (i == n - 1)
            d = (p.values[n - 1] - p.values[n - 2]) / dv;
        else
            d = (p.values[i + 1] - p.values[i - 1]) / (2.0 * dv);
        J.values[i] = -D.values[i] * d;
    }
    return J;
}

BarProfile step_diffusion(BarProfile const &p, DiffusionField const &D, double dt, double theta)
{
    check_same(D.vgrid, p.vgrid, "step_diffusion");
    if (!(dt > 0.0))
        throw Error("step_diffusion: dt must be > 0");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw Error("step_diffusion: theta must lie in [0, 1]");
    int const n = p.vgrid.nv;
    double const dv = p.vgrid.dv();
    auto const w = p.vgrid.weights();

    // Face conductances c_{i+1/2} = D_{i+1/2} / dv; flux F = -c (f_{i+1} - f_i).
    std::vector<double> c(n - 1);
    for (int i = 0; i + 1 < n; ++i)
        c[i] = 0.5 * (D.values[i] + D.values[i + 1]) / dv;

    // (A f)_i = F_{i+1/2} - F_{i-1/2}; rows of W + theta dt A.
    std::vector<double> lower(n, 0.0), diag(n), upper(n, 0.0), rhs(n);
    for (int i = 0; i < n; ++i) {
        double const cl = i > 0 ? c[i - 1] : 0.0;
        double const cr = i + 1 < n ? c[i] : 0.0;
        double af = (cl + cr) * p.values[i];
        if (i > 0)
            af -= cl * p.values[i - 1];
        if (i + 1 < n)
            af -= cr * p.values[i + 1];
        rhs[i] = w[i] * p.values[i] - (1.0 - theta) * dt * af;
        diag[i] = w[i] + theta * dt * (cl + cr);
        if (i > 0)
            lower[i] = -theta * dt * cl;
        if (i + 1 < n)
            upper[i] = -theta * dt * cr;
    }

    // Thomas algorithm; the matrix is strictly diagonally dominant for D >= 0.
    for (int i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0)
            throw Error("step_diffusion: singular tridiagonal system");
        double const m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0)
        throw Error("step_diffusion: singular tridiagonal system");
    BarProfile out{p.vgrid, std::vector<double>(n), p.t + dt};
    out.values[n - 1] = rhs[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 0; --i)
        out.values[i] = (rhs[i] - upper[i] * out.values[i + 1]) / diag[i];
    return out;
}

BarProfile solve_diffusion(BarProfile p, DiffusionField const &D, double T, double dt,
                           double theta)
{
    if (!(dt > 0.0) || !(T >= 0.0))
        throw Error("solve_diffusion: needs dt > 0 and T >= 0");
    double const end = p.t + T;
    int const steps = static_cast<int>(std::ceil(T / dt - 1e-9));
    for (int n = 1; n <= steps; ++n) {
        double const h = n == steps ? end - p.t : dt;
        if (h <= 0.0)
            break;
        p = step_diffusion(p, D, h, theta);
    }
    p.t = end;
    return p;
}

double dissipation(BarProfile const &p, DiffusionField const &D)
{
    check_same(D.vgrid, p.vgrid, "dissipation");
    double const dv = p.vgrid.dv();
    double s = 0.0;
    for (int i = 0; i + 1 < p.vgrid.nv; ++i) {
        double const d = p.values[i + 1] - p.values[i];
        s += 0.5 * (D.values[i] + D.values[i + 1]) * d * d / dv;
    }
    return s;
}

} // namespace qlkit
