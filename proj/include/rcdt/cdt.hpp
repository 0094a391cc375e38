#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rcdt {

/// Probability density sampled on a uniform grid over [lo, hi]; the grid
/// includes both endpoints, so spacing = (hi - lo) / (size - 1).
struct Density {
  std::vector<double> values;
  double lo = 0.0;
  double hi = 1.0;

  std::size_t size() const noexcept { return values.size(); }
  double spacing() const noexcept { return (hi - lo) / static_cast<double>(values.size() - 1); }
  double point(std::size_t i) const noexcept { return lo + static_cast<double>(i) * spacing(); }
};

/// Transport map from the reference density onto a source density, sampled
/// at the reference grid points. Non-decreasing.
struct CdtFunction {
  std::vector<double> values;
  double lo = 0.0;
  double hi = 1.0;
};

/// Uniform density on [lo, hi] with n grid points.
Density uniform_density(std::size_t n, double lo = 0.0, double hi = 1.0);

/// Scales a nonnegative signal so that sum(values) * spacing == 1. Signals
/// with total mass at or below 1e-12 * length get a 1e-8 floor in every bin
/// first, which makes them uniform.
Density normalize_density(std::span<const double> signal, double lo, double hi);

/// Trapezoidal CDF at the grid points, scaled so the last entry is exactly 1.
std::vector<double> cumulative(const Density& density);

/// Generalized inverse of a tabulated CDF (see cumulative) on the grid
/// lo + k * spacing. Between knots the inverse is linear; a query that lands
/// exactly on an interior flat run returns the run's midpoint, and queries at
/// 0 or 1 return the support edges.
double inverse_cdf(std::span<const double> cdf, double lo, double spacing, double y);

/// s_hat(t) = F_source^-1(F_reference(t)) at every reference grid point.
/// Throws InvalidInput if the reference has a zero (or negative) value.
CdtFunction cdt_forward(const Density& source, const Density& reference);

}  // namespace rcdt
