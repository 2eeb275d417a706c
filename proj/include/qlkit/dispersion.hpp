#pragma once

// Linear theory around a homogeneous profile G(v): the kernel
//     K_G(lambda, k) = integral_0^inf e^{-lambda s} s (F G)(k s) ds,
//     (F G)(xi) = integral G(v) e^{-i v xi} dv,
// roots of 1 + K_G, the stability margin and decay-rate fitting.

#include "qlkit/phase_space.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qlkit {

struct GaussianComponent {
    double weight = 1.0;
    double center = 0.0;
    double width = 1.0; ///< standard deviation
};

/// Velocity profile with an optional closed form (a Gaussian mixture).
/// Closed-form profiles allow continuation to Re lambda > -3 sigma_min |k|;
/// gridded profiles are restricted to Re lambda > 0.
struct ProfileG {
    VelocityGrid vgrid;
    std::vector<double> values;
    std::optional<std::vector<GaussianComponent>> mixture;

    [[nodiscard]] bool closed_form() const noexcept { return mixture.has_value(); }
};

ProfileG maxwellian_profile(VelocityGrid const &vg, double sigma = 1.0);
ProfileG mixture_profile(VelocityGrid const &vg, std::vector<GaussianComponent> components);
/// The bump-on-tail profile 0.9 N(0, 1) + 0.1 N(4.5, 0.5^2).
ProfileG bump_on_tail_profile(VelocityGrid const &vg);
/// Gridded profile; checks G >= 0 and unit trapezoid mass to 1e-8.
ProfileG gridded_profile(VelocityGrid const &vg, std::vector<double> values);

/// (F G)(xi); gridded profiles use a windowed trapezoid transform.
cplx profile_transform(ProfileG const &G, double xi);

/// Lower bound on Re lambda for which kernel_K is defined.
double analyticity_bound(ProfileG const &G, double k);

struct KernelValue {
    cplx value;      ///< K_G(lambda, k)
    cplx derivative; ///< dK/dlambda
    double error = 0.0;
    int evaluations = 0;
};

/// Adaptive quadrature of the s-integral. Throws outside the strip.
KernelValue kernel_K(ProfileG const &G, double k, cplx lambda, double rel_tol = 1e-10);

/// Velocity form integral G(v) / (lambda + i k v)^2 dv, Re lambda > 0 only.
cplx kernel_K_velocity(ProfileG const &G, double k, cplx lambda, double rel_tol = 1e-11);

/// 1 + K_G(lambda, k).
cplx dispersion_function(ProfileG const &G, double k, cplx lambda, double rel_tol = 1e-10);

struct Rect {
    double re_lo, re_hi, im_lo, im_hi;
};

struct WindingResult {
    int count = 0;
    double total_phase = 0.0;
    double min_modulus = 0.0;
    int evaluations = 0;
};

/// Argument-principle zero count of 1 + K over the rectangle, sampling the
/// boundary until successive phase changes stay below pi/8.
WindingResult winding_number(ProfileG const &G, double k, Rect const &rect,
                             double rel_tol = 1e-10);

struct DispersionRoot {
    double k = 0.0;
    cplx lambda;
    double residual = 0.0;
    bool simple = true;
    int iterations = 0;
};

struct NewtonResult {
    DispersionRoot root;
    bool converged = false;
    std::string diagnostic;
};

/// Damped Newton on 1 + K from `seed` to residual <= tol. When
/// min_re is set the iterate is kept at Re lambda >= min_re.
NewtonResult newton_root(ProfileG const &G, double k, cplx seed, double tol = 1e-9,
                         double rel_tol = 1e-10, int max_iter = 60,
                         std::optional<double> min_re = std::nullopt);

struct RootSearch {
    std::vector<DispersionRoot> roots;
    int winding = 0;
    bool flagged = false; ///< winding count and converged roots disagree
    std::string diagnostic;
};

/// Winding-count enumeration, recursive subdivision and Newton polish.
RootSearch find_roots(ProfileG const &G, double k, Rect const &rect, double rel_tol = 1e-10);

/// |1 + K| at the mirrored pair (lambda*, -k).
double mirror_residual(ProfileG const &G, DispersionRoot const &root, double rel_tol = 1e-10);

struct StabilityMargin {
    double kappa = 0.0; ///< inf over k and Re lambda >= 0 of |1 + K|, capped at 1
    double k_at_min = 0.0;
    double y_at_min = 0.0;
    std::vector<double> per_k;
    std::optional<DispersionRoot> unstable_root;
};

/// Scans k = 2 pi m / x_length for m = 1..k_max. Closed-form profiles only.
StabilityMargin stability_margin(ProfileG const &G, int k_max,
                                 double x_length = 2.0 * std::numbers::pi);

struct DecayFit {
    double rate = 0.0; ///< slope of log W, about 2 Re lambda
    double intercept = 0.0;
    double r2 = 0.0;
    double t_begin = 0.0, t_end = 0.0;
    int points = 0;
    bool envelope = false; ///< fitted on local maxima of an oscillating series
};

/// Fits log W over the longest window where local slopes stay within 20%
/// of their mean. Throws when no such window exists.
DecayFit landau_decay_fit(std::vector<double> const &t, std::vector<double> const &W);

} // namespace qlkit
