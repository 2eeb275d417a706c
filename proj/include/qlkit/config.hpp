#pragma once

// JSON run configuration shared by every CLI subcommand.
//
//   {
//     "schema_version": 1,
//     "grid":        {"nx": 32, "nv": 129, "v_max": 6, "x_length": 6.283185307179586},
//     "correlation": {"add_conjugates": true, "modes": [{"k": 1, "omega": 1,
//                     "family": "triangular", "amplitude": 0.1, "tau": 1}]},
//     "ansatz":      {"add_conjugates": true, "modes": [{"k": 1, "omega": 0,
//                     "beta": 0, "amplitude": [0, 0.5]}]},
//     "initial":     {"sigma": 1, "drift": 0, "amplitude": 0.5, "mode": 1},
//     "solver":      {...}, "simulate": {...}, "diffusion": {...},
//     "dispersion":  {...}, "quasilinear": {...}, "ensemble": {...}
//   }
//
// Every section is optional; unknown keys are rejected.

#include "qlkit/dispersion.hpp"
#include "qlkit/ensemble.hpp"
#include "qlkit/quasilinear.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qlkit {

inline constexpr int config_schema_version = 1;

struct GridConfig {
    int nx = 32;
    int nv = 129;
    double v_max = 6.0;
    double x_length = 2.0 * std::numbers::pi;
};

/// kind: maxwellian | mixture | bump_on_tail | csv
struct ProfileConfig {
    std::string kind = "maxwellian";
    double sigma = 1.0;
    std::vector<GaussianComponent> components;
    std::string file; ///< two-column (v, value) CSV for kind = csv
};

ProfileG build_profile(ProfileConfig const &cfg, VelocityGrid const &vg);

struct SimulateConfig {
    std::string source = "stochastic"; ///< stochastic | ansatz | self_consistent
    double epsilon = 0.1;
    double T = 1.0;
    double dt = 0.0; ///< 0: suggested step
    std::uint64_t seed = 1;
    std::string backend = "spectral"; ///< spectral | moving_average
    int every = 10;
    int snapshot_every = 0;
};

struct DiffusionConfig {
    std::string source = "analytic"; ///< analytic | empirical (estimate-d)
    double epsilon = 0.1;
    double t = 1.0; ///< slow time at which the empirical tensor is formed
    std::uint64_t seed = 1;
    std::string field = "ansatz"; ///< ansatz | stochastic (empirical source)
    double T = 1.0;
    double dt = 1e-3;
    double theta = 1.0;
    int outputs = 4;
};

struct DispersionConfig {
    ProfileConfig profile;
    std::vector<double> k{0.5};
    std::optional<Rect> rect; ///< default: a box around the real axis
    int k_max = 0;            ///< > 0: also report the stability margin
    double rel_tol = 1e-10;
};

struct QLModeConfig {
    double k = 0.3;
    cplx lambda{0.2, -1.0}; ///< Newton seed
    double e0_sq = 1e-3;
};

struct QuasilinearConfig {
    ProfileConfig profile{"bump_on_tail", 1.0, {}, {}};
    int nv = 513;
    double v_max = 8.0;
    std::vector<QLModeConfig> modes{QLModeConfig{}};
    bool add_conjugates = true;
    double epsilon = 0.1;
    double T = 40.0;
    double dt = 0.05;
    int snapshot_every = 20;
    QLConfig ql;
};

struct RunConfig {
    int schema_version = config_schema_version;
    GridConfig grid;
    CorrelationSpec correlation;
    AnsatzSpec ansatz;
    InitialData initial;
    SolverConfig solver;
    SimulateConfig simulate;
    DiffusionConfig diffusion;
    DispersionConfig dispersion;
    QuasilinearConfig quasilinear;
    EnsembleConfig ensemble; ///< spec, grid and initial data mirror the sections above
    int budget_members = 8;
};

/// The ensemble benchmark together with defaults for every other section.
RunConfig default_config();

RunConfig parse_config(std::string const &json_text);
RunConfig load_config(std::filesystem::path const &path);
std::string dump_config(RunConfig const &cfg);

PhaseSpaceGrid make_grid(GridConfig const &g);

} // namespace qlkit
