#pragma once

// Strang-split semi-Lagrangian integrator for
//     eps^2 df/dt + v df/dx + eps E df/dv = 0
// with a prescribed (stochastic or ansatz) field or the self-consistent
// Poisson field.

#include "qlkit/phase_space.hpp"
#include "qlkit/stochastic_field.hpp"

#include <memory>
#include <variant>

namespace qlkit {

struct SelfConsistentField {};

struct ExternalField {
    std::shared_ptr<FieldRealization const> realization;
};

struct AnsatzField {
    AnsatzSpec spec;
};

using FieldSource = std::variant<SelfConsistentField, ExternalField, AnsatzField>;

struct SolverConfig {
    /// Largest allowed |f| on the v boundary rows, relative to sup f0.
    /// Non-positive disables the check.
    double support_floor = 1e-6;
    /// Negative spline overshoot is clipped at 0 when the removed mass is
    /// below this; larger clips are an error.
    double clip_tolerance = 1e-8;
    /// Enforce dt max|E| / (eps dv) <= 1.
    bool enforce_dt = true;
    /// false: leave spline undershoot in place, keeping the step linear in f
    /// and mass exact, and only require the x-averaged profile to stay
    /// above -overshoot_tolerance * sup f0. For runs whose v-filaments are
    /// below grid resolution.
    bool clip_negative = true;
    double overshoot_tolerance = 1e-3;
};

struct SolverState {
    Distribution f;
    double t = 0.0;
    double epsilon = 1.0;
    FieldSource source;
    double sup_f0 = 0.0;
};

SolverState make_state(Distribution f0, double epsilon, FieldSource source);

/// The field acting on the state at slow time t (self-consistent fields
/// are solved from the current f and ignore t).
FieldOnGrid field_of(SolverState const &state, double t);

struct StepInfo {
    double clipped_mass = 0.0; ///< mass removed by clipping, before renormalization
    double max_field = 0.0;    ///< max |E| used for the v-advection
    Distribution half;         ///< f after the first half x-step
    FieldOnGrid field;         ///< the field used for the v-advection
};

/// Advance in place by dt. Throws Error on a dt-constraint violation,
/// compact-support breach or excessive clipping.
StepInfo advance(SolverState &state, double dt, SolverConfig const &cfg = {});

/// Value-semantics wrapper around advance.
SolverState step(SolverState state, double dt, SolverConfig const &cfg = {});

/// min(eps dv / (4 max|E|), eps^2 tau_field / 16).
double suggest_dt(SolverState const &state, double tau_field);

struct DiagnosticsSchedule {
    int every = 1;           ///< record scalar diagnostics every this many steps
    int snapshot_every = 0;  ///< 0: snapshots only at t = 0 and the end
    bool keep_snapshots = false;
    bool keep_profiles = true;
    bool average_flux = false; ///< time-average the Fick flux over the run
};

struct TrajectoryRecord {
    double epsilon = 1.0;
    std::vector<double> t;
    std::vector<double> mass;
    std::vector<double> l2;
    std::vector<double> kinetic;
    std::vector<double> field_energy; ///< (1/L) integral E^2/2 dx
    std::vector<double> total_energy; ///< kinetic + eps * field_energy
    std::vector<double> max_grad_field;
    std::vector<double> min_f;
    std::vector<double> max_f;
    double max_step_mass_change = 0.0;
    double total_clipped_mass = 0.0;
    std::vector<double> profile_times;
    std::vector<VelocityProfile> profiles;
    std::vector<double> snapshot_times;
    std::vector<Distribution> snapshots;
    VelocityProfile flux_average; ///< (1/T) integral J dt (when requested)
    Distribution final_state;
};

/// Steps from 0 to T with a uniform step (the last step is shortened to
/// land on T). T = 0 records only the initial diagnostics.
TrajectoryRecord run(Distribution const &f0, double epsilon, FieldSource const &source, double T,
                     double dt, DiagnosticsSchedule const &schedule = {},
                     SolverConfig const &cfg = {});

} // namespace qlkit
