#pragma once

#include <span>
#include <vector>

namespace qlkit::spline {

/// Coefficients of the periodic interpolating cubic B-spline through
/// values (uniform unit spacing, period values.size()).
std::vector<double> periodic_coefficients(std::span<double const> values);

/// In place: values[i] <- s(i - displacement), where s is the periodic
/// interpolating cubic spline and displacement is in grid cells.
/// Preserves sum(values) exactly (up to round-off).
void shift_periodic(std::span<double> values, double displacement);

} // namespace qlkit::spline
