#pragma once

// CSV and binary exports. Reals are written with 17 significant digits, so
// identical inputs give identical bytes.

#include "qlkit/dispersion.hpp"
#include "qlkit/ensemble.hpp"
#include "qlkit/quasilinear.hpp"

#include <iosfwd>
#include <string>

namespace qlkit::io {

std::string fmt(double x);

/// Header `v\x,x0,x1,...`, then one row per v node.
void write_distribution_csv(std::ostream &os, Distribution const &f);
Distribution read_distribution_csv(std::istream &is);

/// Little-endian: int64 nx, int64 nv, float64 v_max, then nx*nv float64
/// values row-major (x outer). The x period is not stored.
void write_checkpoint(std::ostream &os, Distribution const &f);
Distribution read_checkpoint(std::istream &is, double x_length = 2.0 * std::numbers::pi);

/// Two columns: v,<name>.
void write_profile_csv(std::ostream &os, VelocityGrid const &vg, std::vector<double> const &values,
                       std::string const &name = "value");
VelocityProfile read_profile_csv(std::istream &is);

/// tau, then re_k,im_k per stored mode.
void write_realization_csv(std::ostream &os, FieldRealization const &r);

/// t,mass,l2,kinetic,field_energy,total_energy,max_grad_field,min_f,max_f
void write_trajectory_csv(std::ostream &os, TrajectoryRecord const &rec);

/// Long format t,v,value for a series of profiles.
void write_profile_series_csv(std::ostream &os, VelocityGrid const &vg,
                              std::vector<double> const &times,
                              std::vector<std::vector<double>> const &profiles);

void write_roots_csv(std::ostream &os, std::vector<DispersionRoot> const &roots);
std::string roots_json(std::vector<RootSearch> const &searches,
                       std::optional<StabilityMargin> const &margin);

/// t,mode,k,re_lambda,im_lambda
void write_lambda_csv(std::ostream &os, QLRecord const &rec);

/// epsilon,t,v,mean,stderr
void write_stats_csv(std::ostream &os, std::vector<EnsembleStats> const &stats);
/// epsilon,l2_error,sup_l2_error,mc_stderr,slope,slope_stderr,intercept
void write_errors_csv(std::ostream &os, ConvergenceReport const &rep);
std::string manifest_json(EnsembleConfig const &cfg, std::vector<EnsembleStats> const &stats,
                          ConvergenceReport const *report, double wall_seconds);

} // namespace qlkit::io
