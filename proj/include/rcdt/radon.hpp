#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rcdt/image.hpp"

namespace rcdt {

/// Projection angles in radians, uniformly spaced over [0, pi).
class AngleGrid {
 public:
  /// Throws InvalidInput when count is zero.
  static AngleGrid uniform(std::size_t count);

  std::size_t size() const noexcept { return angles_.size(); }
  std::span<const double> angles() const noexcept { return angles_; }
  double operator[](std::size_t i) const { return angles_[i]; }

 private:
  std::vector<double> angles_;
};

/// One line-integral profile per angle, stored angle-major. Offsets are the
/// centers of n equal bins covering [-D/2, D/2], D = ceil(sqrt(H^2 + W^2)).
class Sinogram {
 public:
  Sinogram() = default;
  Sinogram(std::size_t n_angles, std::size_t n_offsets, double extent)
      : n_angles_(n_angles), n_offsets_(n_offsets), extent_(extent),
        values_(n_angles * n_offsets, 0.0) {}

  std::size_t n_angles() const noexcept { return n_angles_; }
  std::size_t n_offsets() const noexcept { return n_offsets_; }
  /// D: the offset axis covers [-extent/2, extent/2].
  double extent() const noexcept { return extent_; }
  double spacing() const noexcept { return extent_ / static_cast<double>(n_offsets_); }
  double offset(std::size_t j) const noexcept {
    return -0.5 * extent_ + (static_cast<double>(j) + 0.5) * spacing();
  }

  std::span<double> row(std::size_t i) noexcept {
    return {values_.data() + i * n_offsets_, n_offsets_};
  }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * n_offsets_, n_offsets_};
  }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t n_angles_ = 0;
  std::size_t n_offsets_ = 0;
  double extent_ = 0.0;
  std::vector<double> values_;
};

/// ceil(sqrt(rows^2 + cols^2)): the offset extent for an image of this shape.
std::size_t diagonal_extent(std::size_t rows, std::size_t cols);

/// Forward Radon transform by rotate-and-sum about the image center. The
/// rotation splats every pixel, as 2 x 2 equal sub-pixel masses, onto the
/// rotated grid with quadratic B-spline weights, so after summing along the
/// rays each sub-pixel spreads over the three offsets nearest its projected
/// position. The weights are nonnegative and sum to one, and their first and
/// second moments do not depend on the sub-bin position: the transform is
/// linear, mass-conserving, and smooths every angle by the same 1/4 bin^2. Rows are clamped at
/// zero and rescaled to the image mass. n_offsets == 0 selects one offset per
/// unit of extent. Angles are processed in parallel (OpenMP).
Sinogram radon_forward(const Image& image, const AngleGrid& grid, std::size_t n_offsets = 0);

/// Single-threaded reference: splats the image onto an explicit rotated
/// n x n grid (separable quadratic B-spline weights), then sums the grid's columns.
Sinogram radon_forward_serial(const Image& image, const AngleGrid& grid, std::size_t n_offsets = 0);

}  // namespace rcdt
