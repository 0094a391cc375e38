#include "rcdt/subspace.hpp"

#include <algorithm>
#include <string>

#include "rcdt/error.hpp"

namespace rcdt {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void check_compatible(const RcdtVector& v, const SubspaceBasis& basis) {
  if (v.fingerprint != basis.fingerprint) {
    throw Error(ErrorKind::ConfigMismatch, "vector and subspace were produced by different transforms");
  }
  if (v.values.size() != basis.dimension()) {
    throw Error(ErrorKind::ConfigMismatch, "vector length " + std::to_string(v.values.size()) +
                                               " does not match subspace dimension " +
                                               std::to_string(basis.dimension()));
  }
}

}  // namespace

SubspaceBasis fit_subspace(std::span<const RcdtVector> samples, const SubspaceOptions& options) {
  if (samples.empty()) throw Error(ErrorKind::InvalidInput, "cannot fit a subspace to zero samples");
  if (!(options.rank_tolerance > 0.0 && options.rank_tolerance < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "rank_tolerance must lie in (0, 1)");
  }
  const std::uint64_t fingerprint = samples.front().fingerprint;
  const std::size_t dim = samples.front().values.size();
  if (dim == 0) throw Error(ErrorKind::InvalidInput, "samples are empty vectors");
  for (const auto& s : samples) {
    if (s.fingerprint != fingerprint || s.values.size() != dim) {
      throw Error(ErrorKind::ConfigMismatch, "samples come from different transform configurations");
    }
  }

  Eigen::MatrixXd data(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t j = 0; j < samples.size(); ++j) {
    data.col(static_cast<Eigen::Index>(j)) = as_vector(samples[j].values);
  }

  const Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "samples span only the zero vector");
  }
  Eigen::Index rank = 0;
  const double cutoff = options.rank_tolerance * sv(0);
  while (rank < sv.size() && sv(rank) >= cutoff) ++rank;
  if (options.max_rank > 0) rank = std::min(rank, static_cast<Eigen::Index>(options.max_rank));

  SubspaceBasis out;
  out.basis = svd.matrixU().leftCols(rank);
  out.singular_values = sv.head(rank);
  out.fingerprint = fingerprint;
  return out;
}

Eigen::VectorXd project(std::span<const double> v, const SubspaceBasis& basis) {
  const auto x = as_vector(v);
  const Eigen::VectorXd coeffs = basis.basis.transpose() * x;
  return basis.basis * coeffs;
}

double distance_to_subspace(const RcdtVector& v, const SubspaceBasis& basis) {
  check_compatible(v, basis);
  return (as_vector(v.values) - project(v.values, basis)).norm();
}

std::size_t nearest_index(std::span<const double> distances) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < distances.size(); ++k) {
    if (distances[k] < distances[best]) best = k;
  }
  return best;
}

std::vector<double> distance_matrix(std::span<const RcdtVector> samples,
                                    std::span<const SubspaceBasis> bases) {
  const std::size_t n_classes = bases.size();
  for (const auto& s : samples) {
    for (const auto& b : bases) check_compatible(s, b);
  }
  std::vector<double> out(samples.size() * n_classes);
  const auto n = static_cast<long>(samples.size());

#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    const auto& v = samples[static_cast<std::size_t>(i)];
    const auto x = as_vector(v.values);
    for (std::size_t k = 0; k < n_classes; ++k) {
      const Eigen::VectorXd coeffs = bases[k].basis.transpose() * x;
      out[static_cast<std::size_t>(i) * n_classes + k] = (x - bases[k].basis * coeffs).norm();
    }
  }
  return out;
}

std::vector<double> distance_matrix_serial(std::span<const RcdtVector> samples,
                                           std::span<const SubspaceBasis> bases) {
  std::vector<double> out;
  out.reserve(samples.size() * bases.size());
  for (const auto& s : samples) {
    for (const auto& b : bases) out.push_back(distance_to_subspace(s, b));
  }
  return out;
}

}  // namespace rcdt
