#pragma once

// Short-time quasilinear integrator: the averaged profile G diffuses with
//     D~(v) = eps^2 sum_m |E_m(0)|^2 g_m e^{2 int g_m} / ((k_m v + w_m)^2 + g_m^2),
// lambda_m = g_m + i w_m, while each root is continued against the
// evolving G.

#include "qlkit/diffusion.hpp"
#include "qlkit/dispersion.hpp"

#include <limits>

namespace qlkit {

/// One Fourier coefficient E(0, k) e^{lambda t} of the field. A real field
/// carries the conjugate entry (-k, lambda*) as well.
struct QLMode {
    double k = 0.0;
    cplx lambda;
    double e0_sq = 0.0;          ///< |E_m(0)|^2
    double growth_integral = 0.0; ///< integral_0^t Re lambda ds
    bool active = true;
    double clamp_time = std::numeric_limits<double>::quiet_NaN();
    double residual = 0.0;
    int partner = -1; ///< earlier entry (-k, lambda*) this one mirrors
};

struct QLState {
    ProfileG G; ///< gridded
    double epsilon = 0.1;
    std::vector<QLMode> modes;
    double t = 0.0;
    long steps = 0;
};

struct QLConfig {
    double theta = 1.0;
    /// Roots are kept at Re lambda >= re_floor; a root pinned there is clamped.
    double re_floor = 1e-3;
    int audit_every = 50;
    double newton_tol = 1e-9;
    double kernel_tol = 1e-10;
};

/// Builds a state on the gridded form of G0 and polishes every root
/// against it. Throws if a root does not converge to residual <= 1e-8.
QLState make_ql_state(ProfileG const &G0, double epsilon, std::vector<QLMode> modes,
                      QLConfig const &cfg = {});

/// D~ on the profile's grid. Clamped modes contribute nothing. Throws if
/// an active mode has Re lambda <= 0.
DiffusionField ql_diffusion(QLState const &state);

struct QLStepInfo {
    DiffusionField D;
    bool audited = false;
    bool audit_ok = true;
    std::vector<int> clamped; ///< indices of modes clamped in this step
};

/// D~ -> diffusion step -> root continuation -> trapezoid update of the
/// growth integrals -> clamp. Requires dt max Re lambda <= 0.1.
QLStepInfo ql_step(QLState &state, double dt, QLConfig const &cfg = {});

struct QLRecord {
    std::vector<double> t;
    std::vector<std::vector<cplx>> lambda; ///< lambda[n][mode]
    std::vector<double> mass;
    std::vector<double> l2;
    std::vector<double> min_D;
    std::vector<double> snapshot_times;
    std::vector<std::vector<double>> G_snapshots;
    std::vector<std::vector<double>> D_snapshots;
    double saturation_time = std::numeric_limits<double>::quiet_NaN();
    int audits = 0;
    int audit_failures = 0;
    QLState final_state;
};

/// Steps until T or until every mode is clamped (when stop_at_saturation).
QLRecord run_quasilinear(QLState state, double T, double dt, QLConfig const &cfg = {},
                         int snapshot_every = 0, bool stop_at_saturation = true);

struct FluxConsistency {
    std::vector<double> ql_flux;     ///< -D~ dG/dv
    std::vector<double> direct_flux; ///< eps^2 mean_x E h~
    std::vector<double> ql_divergence;
    std::vector<double> direct_divergence;
    double relative_error = 0.0; ///< sup |div difference| / sup |ql divergence|
};

/// The t = 0 identity between the quasilinear flux and the flux of the
/// slaved linear ansatz h~_m = -E_m(0) G' / (lambda_m + i k_m v), with the
/// x-average taken on an explicit grid over one period.
FluxConsistency flux_consistency(QLState const &state, int nx = 64);

/// Spectral derivative of a gridded profile (treated as periodic on the
/// first nv - 1 nodes, which is exact up to the boundary tail).
std::vector<double> spectral_derivative(VelocityGrid const &vg, std::vector<double> const &g);

} // namespace qlkit
