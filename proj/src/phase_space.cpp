#include "qlkit/phase_space.hpp"

#include "qlkit/fft.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qlkit {

PhaseSpaceGrid make_grid(int nx, int nv, double v_max, double x_length)
{
    if (nx < 4 || nx % 2 != 0) {
        std::ostringstream msg;
        msg << "make_grid: nx must be even and >= 4 (got " << nx << ")";
        throw Error(msg.str());
    }
    if (nv < 8)
        throw Error("make_grid: nv must be >= 8 (got " + std::to_string(nv) + ")");
    if (!(v_max > 0.0) || !std::isfinite(v_max))
        throw Error("make_grid: v_max must be positive");
    if (!(x_length > 0.0) || !std::isfinite(x_length))
        throw Error("make_grid: x_length must be positive");
    PhaseSpaceGrid g;
    g.nx_ = nx;
    g.nv_ = nv;
    g.v_max_ = v_max;
    g.x_length_ = x_length;
    return g;
}

std::vector<double> PhaseSpaceGrid::v_nodes() const
{
    return velocity_part(*this).nodes();
}

std::vector<double> PhaseSpaceGrid::x_nodes() const
{
    std::vector<double> x(nx_);
    for (int j = 0; j < nx_; ++j)
        x[j] = this->x(j);
    return x;
}

std::vector<double> PhaseSpaceGrid::v_weights() const
{
    return velocity_part(*this).weights();
}

VelocityGrid make_vgrid(int nv, double v_max)
{
    if (nv < 8)
        throw Error("make_vgrid: nv must be >= 8");
    if (!(v_max > 0.0))
        throw Error("make_vgrid: v_max must be positive");
    return VelocityGrid{nv, v_max};
}

VelocityGrid velocity_part(PhaseSpaceGrid const &grid)
{
    return VelocityGrid{grid.nv(), grid.v_max()};
}

std::vector<double> VelocityGrid::nodes() const
{
    std::vector<double> v(nv);
    for (int i = 0; i < nv; ++i)
        v[i] = this->v(i);
    return v;
}

std::vector<double> VelocityGrid::weights() const
{
    std::vector<double> w(nv, dv());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

Distribution::Distribution(PhaseSpaceGrid g) : grid(g), values(g.size(), 0.0) {}

double mass(Distribution const &f)
{
    auto const w = f.grid.v_weights();
    double total = 0.0;
    for (int j = 0; j < f.grid.nx(); ++j) {
        auto r = f.row(j);
        for (int i = 0; i < f.grid.nv(); ++i)
            total += w[i] * r[i];
    }
    return total / f.grid.nx();
}

double l2_norm(Distribution const &f)
{
    auto const w = f.grid.v_weights();
    double total = 0.0;
    for (int j = 0; j < f.grid.nx(); ++j) {
        auto r = f.row(j);
        for (int i = 0; i < f.grid.nv(); ++i)
            total += w[i] * r[i] * r[i];
    }
    return std::sqrt(total / f.grid.nx());
}

double kinetic_energy(Distribution const &f)
{
    auto const w = f.grid.v_weights();
    double total = 0.0;
    for (int j = 0; j < f.grid.nx(); ++j) {
        auto r = f.row(j);
        for (int i = 0; i < f.grid.nv(); ++i) {
            double const v = f.grid.v(i);
            total += w[i] * 0.5 * v * v * r[i];
        }
    }
    return total / f.grid.nx();
}

double boundary_magnitude(Distribution const &f)
{
    double m = 0.0;
    int const last = f.grid.nv() - 1;
    for (int j = 0; j < f.grid.nx(); ++j)
        m = std::max({m, std::abs(f.at(j, 0)), std::abs(f.at(j, last))});
    return m;
}

void validate(Distribution const &f, double support_floor)
{
    if (f.values.size() != f.grid.size())
        throw Error("distribution: value count does not match the grid");
    for (double x : f.values)
        if (!std::isfinite(x))
            throw Error("distribution: non-finite value");
    if (!(mass(f) > 0.0))
        throw Error("distribution: total mass is not positive");
    if (support_floor > 0.0) {
        double const b = boundary_magnitude(f);
        if (b > support_floor) {
            std::ostringstream msg;
            msg << "distribution: compact support violated, |f| = " << b
                << " at v = +-v_max exceeds floor " << support_floor;
            throw Error(msg.str());
        }
    }
}

cplx FieldOnGrid::mode(int m) const
{
    int const nx = grid.nx();
    if (m > nx / 2 || m <= -nx / 2)
        throw Error("FieldOnGrid::mode: index out of range");
    return m >= 0 ? fourier[m] : std::conj(fourier[-m]);
}

FieldOnGrid field_from_values(PhaseSpaceGrid const &grid, std::vector<double> values)
{
    if (static_cast<int>(values.size()) != grid.nx())
        throw Error("field_from_values: expected nx values");
    FieldOnGrid E{grid, std::move(values), std::vector<cplx>(grid.nx() / 2 + 1)};
    fft::r2c(E.values, E.fourier);
    for (auto &z : E.fourier)
        z /= grid.nx();
    return E;
}

double field_energy(FieldOnGrid const &E)
{
    double s = 0.0;
    for (double e : E.values)
        s += e * e;
    return 0.5 * s / E.grid.nx();
}

double max_abs(FieldOnGrid const &E)
{
    double m = 0.0;
    for (double e : E.values)
        m = std::max(m, std::abs(e));
    return m;
}

double max_abs_gradient(FieldOnGrid const &E)
{
    int const nx = E.grid.nx();
    std::vector<cplx> d(nx / 2 + 1);
    for (int m = 1; m < nx / 2; ++m)
        d[m] = cplx(0.0, E.grid.wavenumber(m)) * E.fourier[m];
    std::vector<double> g(nx);
    fft::c2r(d, g);
    double mx = 0.0;
    for (double x : g)
        mx = std::max(mx, std::abs(x));
    return mx;
}

double mass(VelocityProfile const &p)
{
    auto const w = p.vgrid.weights();
    double s = 0.0;
    for (int i = 0; i < p.vgrid.nv; ++i)
        s += w[i] * p.values[i];
    return s;
}

double l2_norm(VelocityProfile const &p)
{
    auto const w = p.vgrid.weights();
    double s = 0.0;
    for (int i = 0; i < p.vgrid.nv; ++i)
        s += w[i] * p.values[i] * p.values[i];
    return std::sqrt(s);
}

Distribution free_stream(Distribution const &f, double tau)
{
    auto const &g = f.grid;
    int const nx = g.nx(), nv = g.nv();
    std::vector<cplx> hat(static_cast<std::size_t>(nx / 2 + 1) * nv);
    fft::forward_x(nx, nv, f.values, hat);
    for (int m = 1; m <= nx / 2; ++m) {
        double const k = g.wavenumber(m);
        for (int i = 0; i < nv; ++i) {
            double const phase = k * g.v(i) * tau;
            auto &z = hat[static_cast<std::size_t>(m) * nv + i];
            // The Nyquist mode is a pure cosine; only its in-phase part survives.
            if (m == nx / 2)
                z *= std::cos(phase);
            else
                z *= std::polar(1.0, -phase);
        }
    }
    Distribution out(g);
    fft::backward_x(nx, nv, hat, out.values);
    return out;
}

std::vector<double> charge_density(Distribution const &f)
{
    auto const w = f.grid.v_weights();
    std::vector<double> rho(f.grid.nx());
    for (int j = 0; j < f.grid.nx(); ++j) {
        auto r = f.row(j);
        double s = 0.0;
        for (int i = 0; i < f.grid.nv(); ++i)
            s += w[i] * r[i];
        rho[j] = s - 1.0;
    }
    return rho;
}

FieldOnGrid solve_poisson(Distribution const &f, double neutrality_tol)
{
    auto const &g = f.grid;
    int const nx = g.nx();
    auto rho = charge_density(f);
    double mean = 0.0;
    for (double r : rho)
        mean += r;
    mean /= nx;
    if (std::abs(mean) > neutrality_tol) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "solve_poisson: neutrality violated, mass defect " << mean
            << " exceeds tolerance " << neutrality_tol;
        throw Error(msg.str());
    }
    std::vector<cplx> rhat(nx / 2 + 1);
    fft::r2c(rho, rhat);
    FieldOnGrid E{g, std::vector<double>(nx), std::vector<cplx>(nx / 2 + 1)};
    for (int m = 1; m < nx / 2; ++m)
        E.fourier[m] = cplx(0.0, -1.0 / g.wavenumber(m)) * (rhat[m] / double(nx));
    fft::c2r(E.fourier, E.values);
    return E;
}

VelocityProfile x_average(Distribution const &f)
{
    auto const &g = f.grid;
    VelocityProfile p{velocity_part(g), std::vector<double>(g.nv(), 0.0)};
    for (int j = 0; j < g.nx(); ++j) {
        auto r = f.row(j);
        for (int i = 0; i < g.nv(); ++i)
            p.values[i] += r[i];
    }
    for (auto &x : p.values)
        x /= g.nx();
    return p;
}

std::vector<cplx> x_mode(Distribution const &f, int m)
{
    auto const &g = f.grid;
    int const nx = g.nx(), nv = g.nv();
    if (m > nx / 2 || m <= -nx / 2)
        throw Error("x_mode: index out of range");
    std::vector<cplx> hat(static_cast<std::size_t>(nx / 2 + 1) * nv);
    fft::forward_x(nx, nv, f.values, hat);
    std::vector<cplx> out(nv);
    int const am = std::abs(m);
    for (int i = 0; i < nv; ++i) {
        auto z = hat[static_cast<std::size_t>(am) * nv + i];
        out[i] = m >= 0 ? z : std::conj(z);
    }
    return out;
}

} // namespace qlkit
