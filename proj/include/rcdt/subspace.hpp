#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rcdt/rcdt.hpp"

namespace rcdt {

/// Orthonormal basis (columns) of one class's span in transform space.
struct SubspaceBasis {
  Eigen::MatrixXd basis;
  Eigen::VectorXd singular_values;
  std::uint64_t fingerprint = 0;

  std::size_t rank() const noexcept { return static_cast<std::size_t>(basis.cols()); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(basis.rows()); }
};

struct SubspaceOptions {
  /// Directions with singular value below rank_tolerance * largest are dropped.
  double rank_tolerance = 1e-4;
  /// Hard cap on the rank; 0 means unlimited.
  std::size_t max_rank = 0;
};

/// Thin SVD of the sample matrix (one sample per column); the retained left
/// singular vectors form the basis.
/// Throws InvalidInput (empty input, bad tolerance, all-zero samples) or
/// ConfigMismatch (fingerprints or lengths differ).
SubspaceBasis fit_subspace(std::span<const RcdtVector> samples, const SubspaceOptions& options = {});

/// Euclidean distance from v to its orthogonal projection onto the subspace.
double distance_to_subspace(const RcdtVector& v, const SubspaceBasis& basis);

/// B * B^T * v.
Eigen::VectorXd project(std::span<const double> v, const SubspaceBasis& basis);

/// Index of the smallest distance; ties go to the lowest index.
std::size_t nearest_index(std::span<const double> distances);

/// distances[i * bases.size() + k] = distance of sample i to subspace k.
/// Parallel over samples.
std::vector<double> distance_matrix(std::span<const RcdtVector> samples,
                                    std::span<const SubspaceBasis> bases);

/// Single-threaded reference for distance_matrix.
std::vector<double> distance_matrix_serial(std::span<const RcdtVector> samples,
                                           std::span<const SubspaceBasis> bases);

}  // namespace rcdt
