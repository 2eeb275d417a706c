#pragma once

// Monte Carlo ensembles of stochastic-field runs, compared against the
// velocity diffusion limit, and epsilon scans.

#include "qlkit/diffusion.hpp"
#include "qlkit/stochastic_field.hpp"
#include "qlkit/vlasov.hpp"

#include <cstdint>
#include <string>

namespace qlkit {

/// f0(x, v) = (1 + amplitude cos(mode x)) N(drift, sigma^2)(v).
struct InitialData {
    double sigma = 1.0;
    double drift = 0.0;
    double amplitude = 0.5;
    int mode = 1;
};

Distribution initial_distribution(PhaseSpaceGrid const &grid, InitialData const &init);

struct ObstructionControl {
    AnsatzSpec field; ///< frozen field, beta = 0 and omega = 0
    double T = 1.0;
    double dt_factor = 1.0;
};

/// The frozen-field pair k = +-1 with Phi = 1/2, i.e. E(x) = sin x.
ObstructionControl default_obstruction();

struct EnsembleConfig {
    CorrelationSpec spec;
    std::vector<double> epsilons{0.4, 0.2, 0.1};
    int members = 200;
    std::uint64_t seed = 20240917;
    int nx = 32;
    int nv = 129;
    double v_max = 6.0;
    InitialData initial;
    double T = 1.0;
    int outputs = 4;        ///< profiles at T * n / outputs
    double dt_factor = 1.0; ///< multiplies the suggested step
    int threads = 0;        ///< 0: hardware concurrency
    double diffusion_dt = 1e-3;
    SolverConfig solver{.clip_negative = false}; ///< v-filaments outrun the grid at small eps
    ObstructionControl obstruction = default_obstruction();
};

void validate(EnsembleConfig const &cfg);

/// The benchmark: modes k = +-1 (omega = +-1) and k = +-2 (omega = +-2),
/// triangular correlations with tau = 1.
EnsembleConfig default_benchmark();

/// Step used for one epsilon: min(eps^2 tau_min / 16, eps dv / (4 E_bound)).
double ensemble_dt(EnsembleConfig const &cfg, double epsilon);

struct EnsembleStats {
    double epsilon = 0.0;
    int members = 0;
    double dt = 0.0;
    VelocityGrid vgrid;
    std::vector<double> times;
    std::vector<std::vector<double>> mean;   ///< mean[n][i] of E[f bar](t_n, v_i)
    std::vector<std::vector<double>> stderr_; ///< Monte Carlo standard error
    std::vector<double> field_energy_mean;   ///< at the output times
    std::vector<double> field_energy_stderr;
    std::vector<std::vector<double>> diffusion; ///< f bar_diff(t_n)
    std::vector<double> l2_error;               ///< per output time
    double final_l2_error = 0.0;
    double sup_l2_error = 0.0;
    double mc_stderr_l2 = 0.0; ///< L2 norm of the stderr profile at T
    std::vector<double> mass_mean;
    std::vector<double> weak_pairings_mean; ///< against the three test profiles at T
    std::vector<double> weak_pairings_diff;
    std::vector<double> flux_mean;    ///< time-averaged Fick flux, ensemble mean
    std::vector<double> flux_closure; ///< time average of -D d f_diff / dv
    double flux_relative_error = 0.0; ///< relative L2 on the resonant support
    double max_step_mass_change = 0.0;
    std::vector<std::uint64_t> seeds;
    double wall_seconds = 0.0;
};

/// Runs M members (seeds member_seed(cfg.seed, index)) to T and reduces in
/// index order, so results do not depend on the thread schedule. A failing
/// member aborts with its index and seed.
EnsembleStats run_ensemble(EnsembleConfig const &cfg, double epsilon);

struct LogLogFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
    bool degenerate = false;
    std::string note;
};

LogLogFit fit_loglog(std::vector<double> const &x, std::vector<double> const &y);

struct ObstructionPoint {
    double epsilon = 0.0;
    double flux_l2 = 0.0; ///< L2 norm of the time-averaged Fick flux
};

struct DiscretizationBudget {
    double diffusion_dt = 0.0; ///< |f_diff(dt) - f_diff(dt/2)| in L2
    double vlasov = 0.0;       ///< L2 change of a member mean under dt/2 and 2x nv
    double total = 0.0;
};

struct ConvergenceReport {
    std::vector<EnsembleStats> stats;
    std::vector<double> epsilons;
    std::vector<double> errors;
    LogLogFit fit;
    bool strictly_decreasing = false;
    std::vector<ObstructionPoint> obstruction;
    LogLogFit obstruction_fit;
    bool obstruction_decreasing = false;
    DiscretizationBudget budget; ///< at the smallest epsilon
    double wall_seconds = 0.0;
};

/// Ensemble per epsilon, error fit, the frozen-field control and the
/// discretization budget at the smallest epsilon. Needs >= 3 epsilons.
ConvergenceReport convergence_study(EnsembleConfig const &cfg, bool with_budget = true);

/// Time-averaged Fick flux of the frozen-field control at one epsilon.
ObstructionPoint obstruction_run(EnsembleConfig const &cfg, double epsilon);

/// Diffusion-limit profiles at the output times for the config's initial data.
std::vector<std::vector<double>> diffusion_reference(EnsembleConfig const &cfg,
                                                     std::vector<double> const &times,
                                                     double dt);

/// Budget estimate at one epsilon using `members` members.
DiscretizationBudget discretization_budget(EnsembleConfig const &cfg, double epsilon,
                                           int members = 8);

} // namespace qlkit
