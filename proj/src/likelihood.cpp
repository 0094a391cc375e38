#include "rcdt/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rcdt/error.hpp"

namespace rcdt {

namespace {

double quantile_sorted(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double DistanceDensity::pdf(double x) const {
  const double norm = 1.0 / (static_cast<double>(support.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  double sum = 0.0;
  for (double d : support) {
    const double z = (x - d) / bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return sum * norm;
}

double DistanceDensity::cdf(double x) const {
  double sum = 0.0;
  for (double d : support) sum += 0.5 * std::erfc(-(x - d) / (bandwidth * std::numbers::sqrt2));
  return std::clamp(sum / static_cast<double>(support.size()), 0.0, 1.0);
}

double silverman_bandwidth(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double h = 0.9 * spread * std::pow(n, -0.2);
  const double floor = 1e-6 * (sorted.back() - sorted.front() + 1e-12);
  return std::max(h, floor);
}

DistanceDensity fit_kde(std::span<const double> distances, std::optional<double> bandwidth, std::size_t class_id) {
  if (distances.size() < 2) {
    throw Error(ErrorKind::InsufficientData, "class " + std::to_string(class_id) + ": KDE needs at least 2 distances, got " +
                                                 std::to_string(distances.size()));
  }
  for (double d : distances) {
    if (!std::isfinite(d) || d < 0.0) throw Error(ErrorKind::InvalidInput, "distances must be finite and nonnegative");
  }
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw Error(ErrorKind::InvalidInput, "bandwidth must be positive");
  }
  DistanceDensity out;
  out.support.assign(distances.begin(), distances.end());
  out.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(distances);
  out.class_id = class_id;
  return out;
}

double likelihood(const DistanceDensity& density, double x) {
  // Upper tails summed directly.
  double sum = 0.0;
  for (double d : density.support) sum += 0.5 * std::erfc((x - d) / (density.bandwidth * std::numbers::sqrt2));
  return std::clamp(sum / static_cast<double>(density.support.size()), 0.0, 1.0);
}

Decision decide_from_likelihood(std::size_t nearest_class, double likelihood_value, double alpha) {
  return likelihood_value >= alpha ? Decision::accept(nearest_class) : Decision::reject();
}

Decision decide(std::size_t nearest_class, double nearest_distance, std::span<const DistanceDensity> densities,
                double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidInput, "alpha must lie in (0, 1)");
  if (nearest_class >= densities.size()) {
    throw Error(ErrorKind::ModelIncomplete, "no distance density for class " + std::to_string(nearest_class));
  }
  return decide_from_likelihood(nearest_class, likelihood(densities[nearest_class], nearest_distance), alpha);
}

}  // namespace rcdt
