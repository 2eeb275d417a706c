#pragma once

// Stochastic potentials with prescribed two-time correlations
//     E[Phi(t,k) Phi(s,k)*] = A_k((t - s) / eps^2),
// deterministic oscillatory ansatz fields, and the transforms
//     A^_k(s) = integral A_k(sigma) exp(-i s sigma) dsigma.

#include "qlkit/phase_space.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qlkit {

/// Built-in correlation shapes. Both are even, supported in [-tau, tau]
/// and positive definite:
///   triangular: a (1 - |s|/tau)_+
///   bohman:     a [(1 - |s|/tau) cos(pi s/tau) + sin(pi |s|/tau)/pi]
/// (bohman is the autocorrelation of a cosine pulse of width tau).
enum class CorrelationFamily { triangular, bohman };

CorrelationFamily parse_family(std::string_view name);
std::string_view to_string(CorrelationFamily family);

struct CorrelationMode {
    int k = 0;          ///< nonzero integer mode index
    double omega = 0.0; ///< carrier frequency in fast time
    CorrelationFamily family = CorrelationFamily::triangular;
    double amplitude = 0.0; ///< A_k(0)
    double tau = 1.0;       ///< decorrelation time (fast time)
};

struct CorrelationSpec {
    std::vector<CorrelationMode> modes;
};

/// Checks conjugate closure (k, omega) <-> (-k, -omega) with identical
/// shape parameters, k != 0, amplitude >= 0, tau > 0.
void validate(CorrelationSpec const &spec);

/// sum_k |k|^3 integral |A_k|; finite for any valid spec.
double bound_constant(CorrelationSpec const &spec);

/// A_k(sigma).
double correlation(CorrelationMode const &mode, double sigma);

/// Closed-form A^_k(s); real and nonnegative.
double hat_transform(CorrelationMode const &mode, double s);

struct TimeGrid {
    double dtau = 0.0; ///< fast-time step
    int samples = 0;   ///< tau_n = n * dtau for n in [0, samples)

    [[nodiscard]] double end() const noexcept { return (samples - 1) * dtau; }
};

/// One sampled potential trajectory. Only modes k > 0 are stored; the
/// k < 0 partners are the complex conjugates.
struct FieldRealization {
    TimeGrid time;
    double epsilon = 1.0;
    bool carrier = true; ///< multiply the envelope by exp(-i omega_k tau)
    std::vector<int> k;
    std::vector<double> omega;
    std::vector<std::vector<cplx>> envelope; ///< envelope[mode][n]

    [[nodiscard]] std::size_t mode_count() const noexcept { return k.size(); }
    /// Linearly interpolated envelope at fast time tau.
    [[nodiscard]] cplx envelope_at(std::size_t mode, double tau) const;
    /// Potential Phi(tau, k_mode) including the carrier.
    [[nodiscard]] cplx potential_at(std::size_t mode, double tau) const;
    /// Potential for a signed index: Phi(tau, -k) = Phi(tau, k)*.
    [[nodiscard]] cplx potential_signed(int k_signed, double tau) const;
};

enum class SynthesisBackend { spectral, moving_average };

/// Random-phase spectral synthesis (default) or moving-average synthesis
/// of the envelopes, deterministic in (spec, seed, grid).
FieldRealization synthesize_realization(CorrelationSpec const &spec, std::uint64_t seed,
                                        double epsilon, TimeGrid const &grid,
                                        SynthesisBackend backend = SynthesisBackend::spectral);

/// E(x) at slow time t: sum over k of -i k Phi(t/eps^2, k) e^{ikx}.
FieldOnGrid field_at(FieldRealization const &r, PhaseSpaceGrid const &grid, double t);

struct AnsatzMode {
    int k = 0;
    double omega = 0.0;
    double beta = 0.0;
    cplx amplitude{}; ///< fixed envelope Phi_k
};

struct AnsatzSpec {
    std::vector<AnsatzMode> modes;
};

void validate(AnsatzSpec const &spec);

/// E(t,k) = -i k Phi_k exp(-i omega eps^{-beta} t), reconstructed on the grid.
FieldOnGrid deterministic_ansatz_field(AnsatzSpec const &spec, double epsilon, double t,
                                       PhaseSpaceGrid const &grid);

/// The ansatz written as a FieldRealization on a fast-time grid: constant
/// envelopes and carriers omega * eps^{2 - beta}.
FieldRealization ansatz_realization(AnsatzSpec const &spec, double epsilon,
                                    TimeGrid const &grid);

struct ModeCorrelation {
    int k = 0;
    std::vector<double> lags;      ///< fast-time lags l * dtau
    std::vector<double> empirical; ///< Re E[Phi(tau + lag) Phi(tau)*]
    std::vector<double> target;    ///< A_k(lag)
    double max_deviation = 0.0;    ///< sup over |lag| <= tau of |emp - target|
    double max_leakage = 0.0;      ///< sup over |lag| > 2 tau of |emp|
    double scale = 0.0;            ///< A_k(0), for relative reading
    double max_mean_modulus = 0.0; ///< sup_tau |E[Phi(tau, k)]|
    double bochner_min = 0.0;      ///< min of the tapered empirical transform / peak
};

struct CrossCorrelation {
    int k1 = 0, k2 = 0;
    double magnitude = 0.0; ///< |E[Phi(., k1) Phi(., k2)*]| at equal times
    double sigma = 0.0;     ///< Monte Carlo standard error of that estimate
};

struct CorrelationReport {
    std::size_t realizations = 0;
    std::vector<ModeCorrelation> modes;
    std::vector<CrossCorrelation> cross;
    double worst_relative_deviation = 0.0;
    double worst_relative_leakage = 0.0;
};

/// Empirical check of the correlation identities over an ensemble.
/// Throws on fewer than 2 realizations or a mismatch with `spec`.
CorrelationReport verify_correlation(std::vector<FieldRealization> const &realizations,
                                     CorrelationSpec const &spec);

} // namespace qlkit
