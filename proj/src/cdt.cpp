#include "rcdt/cdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rcdt/error.hpp"

namespace rcdt {

namespace {

constexpr double kFlatTolerance = 1e-12;
constexpr double kMassFloor = 1e-12;
constexpr double kEpsilonFloor = 1e-8;

void check_density(const Density& d, const char* what) {
  if (d.size() < 2) throw Error(ErrorKind::InvalidInput, std::string(what) + " needs at least 2 points");
  if (!(d.hi > d.lo)) throw Error(ErrorKind::InvalidInput, std::string(what) + " has an empty interval");
}

}  // namespace

Density uniform_density(std::size_t n, double lo, double hi) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, "uniform density needs at least 2 points");
  const double value = static_cast<double>(n - 1) / (static_cast<double>(n) * (hi - lo));
  return {std::vector<double>(n, value), lo, hi};
}

Density normalize_density(std::span<const double> signal, double lo, double hi) {
  if (signal.size() < 2) throw Error(ErrorKind::InvalidInput, "signal needs at least 2 samples");
  if (!(hi > lo)) throw Error(ErrorKind::InvalidInput, "density interval is empty");
  Density d{std::vector<double>(signal.begin(), signal.end()), lo, hi};
  for (double v : d.values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::InvalidInput, "signal has a negative or non-finite entry");
    }
  }
  double total = std::accumulate(d.values.begin(), d.values.end(), 0.0);
  if (total <= kMassFloor * static_cast<double>(d.size())) {
    for (double& v : d.values) v += kEpsilonFloor;
    total = std::accumulate(d.values.begin(), d.values.end(), 0.0);
  }
  const double scale = 1.0 / (total * d.spacing());
  for (double& v : d.values) v *= scale;
  return d;
}

std::vector<double> cumulative(const Density& density) {
  const double dx = density.spacing();
  std::vector<double> cdf(density.size(), 0.0);
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * dx * (density.values[i - 1] + density.values[i]);
  }
  const double total = cdf.back();
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidInput, "density has zero mass");
  for (double& v : cdf) v /= total;
  cdf.back() = 1.0;
  return cdf;
}

double inverse_cdf(std::span<const double> cdf, double lo, double spacing, double y) {
  const std::size_t n = cdf.size();
  auto x_at = [&](std::size_t k) { return lo + static_cast<double>(k) * spacing; };

  // Support edges: last grid point still at 0 and first grid point at 1.
  std::size_t first = 0;
  while (first + 1 < n && cdf[first + 1] <= kFlatTolerance) ++first;
  std::size_t last = n - 1;
  while (last > first && cdf[last - 1] >= 1.0 - kFlatTolerance) --last;

  if (y <= cdf[first]) return x_at(first);
  if (y >= cdf[last]) return x_at(last);

  const auto begin = cdf.begin() + static_cast<std::ptrdiff_t>(first);
  const auto end = cdf.begin() + static_cast<std::ptrdiff_t>(last) + 1;
  const auto k = static_cast<std::size_t>(std::lower_bound(begin, end, y) - cdf.begin());

  if (cdf[k] - y <= kFlatTolerance) {
    std::size_t run_end = k;
    while (run_end + 1 <= last && cdf[run_end + 1] - cdf[k] <= kFlatTolerance) ++run_end;
    if (run_end == k) return x_at(k);
    return 0.5 * (x_at(k) + x_at(run_end));
  }
  // cdf[k - 1] < y < cdf[k]
  const double frac = (y - cdf[k - 1]) / (cdf[k] - cdf[k - 1]);
  return x_at(k - 1) + frac * spacing;
}

CdtFunction cdt_forward(const Density& source, const Density& reference) {
  check_density(source, "source density");
  check_density(reference, "reference density");
  for (double v : reference.values) {
    if (!(v > 0.0)) {
      throw Error(ErrorKind::InvalidInput, "reference density must be strictly positive");
    }
  }
  const std::vector<double> source_cdf = cumulative(source);
  const std::vector<double> reference_cdf = cumulative(reference);

  CdtFunction out{std::vector<double>(reference.size()), reference.lo, reference.hi};
  const double dx = source.spacing();
  for (std::size_t j = 0; j < reference.size(); ++j) {
    out.values[j] = inverse_cdf(source_cdf, source.lo, dx, reference_cdf[j]);
  }
  return out;
}

}  // namespace rcdt
