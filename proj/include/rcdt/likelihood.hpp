#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rcdt {

/// Gaussian-kernel density over one class's validation distances.
struct DistanceDensity {
  std::vector<double> support;
  double bandwidth = 1.0;
  std::size_t class_id = 0;

  double pdf(double x) const;
  /// Closed-form mixture CDF.
  double cdf(double x) const;
};

/// Silverman's rule, 0.9 * min(sd, IQR / 1.34) * n^(-1/5). A zero IQR falls
/// back to the standard deviation alone. Floored at 1e-6 * (range + 1e-12).
double silverman_bandwidth(std::span<const double> values);

/// Throws InsufficientData for fewer than 2 values and InvalidInput for
/// negative or non-finite values or a non-positive bandwidth override.
DistanceDensity fit_kde(std::span<const double> distances, std::optional<double> bandwidth = std::nullopt,
                        std::size_t class_id = 0);

/// 1 - CDF(x): the probability of a distance at least this large. Always in
/// [0, 1] and non-increasing in x.
double likelihood(const DistanceDensity& density, double x);

struct Decision {
  bool accepted = false;
  std::size_t class_id = 0;

  static Decision accept(std::size_t k) { return {true, k}; }
  static Decision reject() { return {false, 0}; }
  friend bool operator==(const Decision&, const Decision&) = default;
};

/// Accept when likelihood >= alpha. The boundary accepts.
Decision decide_from_likelihood(std::size_t nearest_class, double likelihood_value, double alpha);

/// Accepts nearest_class when the class's likelihood at nearest_distance is
/// at least alpha. Throws ModelIncomplete if densities has no entry for
/// nearest_class and InvalidInput unless 0 < alpha < 1.
Decision decide(std::size_t nearest_class, double nearest_distance, std::span<const DistanceDensity> densities,
                double alpha);

}  // namespace rcdt
