#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rcdt {

/// Row-major grayscale image with unit pixel spacing. Intensities are
/// nonnegative; anything entering the transform pipeline must also carry
/// positive total mass (see validate_image).
class Image {
 public:
  Image() = default;
  Image(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), pixels_(rows * cols, fill) {}
  Image(std::size_t rows, std::size_t cols, std::vector<double> pixels);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return pixels_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return pixels_[r * cols_ + c]; }

  std::span<double> pixels() noexcept { return pixels_; }
  std::span<const double> pixels() const noexcept { return pixels_; }

  double mass() const noexcept;

  /// Bilinear sample at fractional (row, col); zero outside the pixel grid.
  double sample(double row, double col) const noexcept;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> pixels_;
};

/// Throws InvalidInput if the image is empty, has a negative or non-finite
/// pixel, or has zero total mass.
void validate_image(const Image& image);

}  // namespace rcdt
