#pragma once

// Phase-space grids on T x [-v_max, v_max], the distribution container,
// exact free streaming, the spectral Poisson solve and x-averaging.

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlkit {

using cplx = std::complex<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniform tensor grid. x is periodic on [0, x_length) with nx cells,
/// v has nv nodes including both endpoints -v_max and +v_max.
class PhaseSpaceGrid {
public:
    PhaseSpaceGrid() = default;

    [[nodiscard]] int nx() const noexcept { return nx_; }
    [[nodiscard]] int nv() const noexcept { return nv_; }
    [[nodiscard]] double v_max() const noexcept { return v_max_; }
    [[nodiscard]] double x_length() const noexcept { return x_length_; }
    [[nodiscard]] double dx() const noexcept { return x_length_ / nx_; }
    [[nodiscard]] double dv() const noexcept { return 2.0 * v_max_ / (nv_ - 1); }
    [[nodiscard]] double x(int j) const noexcept { return j * dx(); }
    [[nodiscard]] double v(int i) const noexcept { return -v_max_ + i * dv(); }
    /// Physical wavenumber of the x-Fourier index m (m may be negative).
    [[nodiscard]] double wavenumber(int m) const noexcept
    {
        return 2.0 * std::numbers::pi * m / x_length_;
    }
    [[nodiscard]] std::size_t size() const noexcept
    {
        return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(nv_);
    }
    [[nodiscard]] std::vector<double> v_nodes() const;
    [[nodiscard]] std::vector<double> x_nodes() const;
    /// Trapezoid weights in v (dv inside, dv/2 at both ends).
    [[nodiscard]] std::vector<double> v_weights() const;

    friend bool operator==(PhaseSpaceGrid const &, PhaseSpaceGrid const &) = default;

private:
    friend PhaseSpaceGrid make_grid(int, int, double, double);
    int nx_ = 0;
    int nv_ = 0;
    double v_max_ = 0.0;
    double x_length_ = 2.0 * std::numbers::pi;
};

/// Validating constructor. nx must be even and >= 4, nv >= 8, v_max > 0.
PhaseSpaceGrid make_grid(int nx, int nv, double v_max,
                         double x_length = 2.0 * std::numbers::pi);

/// A velocity grid alone (the v-part of a PhaseSpaceGrid).
struct VelocityGrid {
    int nv = 0;
    double v_max = 0.0;

    [[nodiscard]] double dv() const noexcept { return 2.0 * v_max / (nv - 1); }
    [[nodiscard]] double v(int i) const noexcept { return -v_max + i * dv(); }
    [[nodiscard]] std::vector<double> nodes() const;
    [[nodiscard]] std::vector<double> weights() const;
    friend bool operator==(VelocityGrid const &, VelocityGrid const &) = default;
};

VelocityGrid make_vgrid(int nv, double v_max);
VelocityGrid velocity_part(PhaseSpaceGrid const &grid);

/// f(x_j, v_i) stored row-major as values[j * nv + i].
struct Distribution {
    PhaseSpaceGrid grid;
    std::vector<double> values;

    Distribution() = default;
    explicit Distribution(PhaseSpaceGrid g);

    [[nodiscard]] double &at(int j, int i) noexcept
    {
        return values[static_cast<std::size_t>(j) * grid.nv() + i];
    }
    [[nodiscard]] double at(int j, int i) const noexcept
    {
        return values[static_cast<std::size_t>(j) * grid.nv() + i];
    }
    [[nodiscard]] std::span<double> row(int j) noexcept
    {
        return {values.data() + static_cast<std::size_t>(j) * grid.nv(),
                static_cast<std::size_t>(grid.nv())};
    }
    [[nodiscard]] std::span<double const> row(int j) const noexcept
    {
        return {values.data() + static_cast<std::size_t>(j) * grid.nv(),
                static_cast<std::size_t>(grid.nv())};
    }
};

/// Sample f(x, v) on the grid nodes.
template <class F>
Distribution sample(PhaseSpaceGrid const &grid, F &&fn)
{
    Distribution d(grid);
    for (int j = 0; j < grid.nx(); ++j)
        for (int i = 0; i < grid.nv(); ++i)
            d.at(j, i) = fn(grid.x(j), grid.v(i));
    return d;
}

/// Normalized mass: (1/L) * integral f dx dv (midpoint in x, trapezoid in v).
double mass(Distribution const &f);
/// Discrete L^2 norm with the same quadrature.
double l2_norm(Distribution const &f);
/// (1/L) * integral v^2/2 f dx dv.
double kinetic_energy(Distribution const &f);
/// Largest |f| on the two velocity boundary rows.
double boundary_magnitude(Distribution const &f);

/// Throws if any value is non-finite or the mass is not positive. When
/// support_floor > 0, also throws if |f| at v = +-v_max exceeds it.
void validate(Distribution const &f, double support_floor = 0.0);

/// Periodic field E(x_j) together with its Fourier coefficients
/// E(k) = (1/nx) sum_j E(x_j) e^{-i k x_j}, stored for m = 0..nx/2.
struct FieldOnGrid {
    PhaseSpaceGrid grid;
    std::vector<double> values;
    std::vector<cplx> fourier;

    /// Fourier coefficient for any integer index m in (-nx/2, nx/2].
    [[nodiscard]] cplx mode(int m) const;
};

/// Build a FieldOnGrid from nodal values (computes the Fourier side).
FieldOnGrid field_from_values(PhaseSpaceGrid const &grid, std::vector<double> values);

/// (1/L) * integral |E|^2 / 2 dx.
double field_energy(FieldOnGrid const &E);
double max_abs(FieldOnGrid const &E);
/// max |dE/dx| by spectral differentiation.
double max_abs_gradient(FieldOnGrid const &E);

struct VelocityProfile {
    VelocityGrid vgrid;
    std::vector<double> values;
};

double mass(VelocityProfile const &p);
double l2_norm(VelocityProfile const &p);

/// f(x - v tau, v) by an exact per-mode phase shift e^{-i k v tau}.
Distribution free_stream(Distribution const &f, double tau);

/// Spectral solve of dE/dx = rho = integral f dv - 1, E(0) = 0.
/// Throws if |mass(f) - 1| > neutrality_tol.
FieldOnGrid solve_poisson(Distribution const &f, double neutrality_tol = 1e-8);

/// Charge density integral f dv - 1 at every x node.
std::vector<double> charge_density(Distribution const &f);

/// profile_i = mean over j of f(x_j, v_i).
VelocityProfile x_average(Distribution const &f);

/// Per-row x-Fourier coefficient f^(m, v_i) (normalized by 1/nx).
std::vector<cplx> x_mode(Distribution const &f, int m);

} // namespace qlkit
