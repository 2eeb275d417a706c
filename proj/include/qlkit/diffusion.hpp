#pragma once

// Velocity-space diffusion: the analytic coefficient
//     D(v) = 1/2 sum_k k^2 A^_k(omega_k - k v),
// its pre-limit estimate from a single field trajectory, weak pairings,
// the x-averaged Fick flux and a conservative solver for
//     df/dt = d/dv (D df/dv).

#include "qlkit/phase_space.hpp"
#include "qlkit/stochastic_field.hpp"
#include "qlkit/vlasov.hpp"

#include <functional>
#include <numbers>

namespace qlkit {

/// D(v) at the velocity nodes. The 1D reduction of k (x) k is k^2.
struct DiffusionField {
    VelocityGrid vgrid;
    std::vector<double> values;
};

struct BarProfile {
    VelocityGrid vgrid;
    std::vector<double> values;
    double t = 0.0;
};

BarProfile make_profile(VelocityGrid const &vg, std::vector<double> values, double t = 0.0);
double mass(BarProfile const &p);
double l2_norm(BarProfile const &p);

/// Wavenumbers are 2 pi k / x_length for the integer mode indices k.
DiffusionField analytic_diffusion(CorrelationSpec const &spec, VelocityGrid const &vg,
                                  double x_length = 2.0 * std::numbers::pi);

/// sum_k k^2 integral_0^{t/eps^2} Phi(t - eps^2 s, k) Phi(t, k)* e^{-ikvs} ds.
/// The envelope product is linear between realization samples, so each
/// panel is integrated exactly against the oscillating factor.
DiffusionField empirical_diffusion(FieldRealization const &r, double t, double epsilon,
                                   VelocityGrid const &vg,
                                   double x_length = 2.0 * std::numbers::pi);

/// Trapezoid pairing integral D(v) phi(v) dv.
double weak_limit_pairing(DiffusionField const &D, std::function<double(double)> const &phi);
double weak_limit_pairing(DiffusionField const &D, std::span<double const> phi);

/// C-infinity bump exp(1 - 1/(1 - ((v - c)/w)^2)) on |v - c| < w, peak 1 at c.
double bump(double v, double center, double width);

/// J(v) = (1/eps) mean_x E(x) f(x, v).
VelocityProfile fick_flux(Distribution const &f, FieldOnGrid const &E, double epsilon);
VelocityProfile fick_flux(SolverState const &state);

/// -D df/dv by centered differences (one-sided at the ends).
VelocityProfile fick_closure(DiffusionField const &D, BarProfile const &p);

/// One theta-scheme step of the finite-volume discretization with
/// trapezoid control volumes, faces D_{i+1/2} = (D_i + D_{i+1})/2 and zero
/// flux at +-v_max. theta = 1 is backward Euler.
BarProfile step_diffusion(BarProfile const &p, DiffusionField const &D, double dt,
                          double theta = 1.0);

/// Repeated steps up to T (last step shortened).
BarProfile solve_diffusion(BarProfile p, DiffusionField const &D, double T, double dt,
                           double theta = 1.0);

/// sum over faces D_{i+1/2} (f_{i+1} - f_i)^2 / dv: the discrete rate of
/// decrease of (1/2) integral f^2 dv.
double dissipation(BarProfile const &p, DiffusionField const &D);

} // namespace qlkit
