#include "rcdt/image.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "rcdt/error.hpp"

namespace rcdt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ModelIncomplete: return "ModelIncomplete";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::GenerationFailed: return "GenerationFailed";
  }
  return "Error";
}

Image::Image(std::size_t rows, std::size_t cols, std::vector<double> pixels)
    : rows_(rows), cols_(cols), pixels_(std::move(pixels)) {
  if (pixels_.size() != rows_ * cols_) {
    throw Error(ErrorKind::InvalidInput, "pixel buffer has " + std::to_string(pixels_.size()) +
                                             " values, expected " + std::to_string(rows_ * cols_));
  }
}

double Image::mass() const noexcept {
  return std::accumulate(pixels_.begin(), pixels_.end(), 0.0);
}

double Image::sample(double row, double col) const noexcept {
  const double r0f = std::floor(row);
  const double c0f = std::floor(col);
  const double fr = row - r0f;
  const double fc = col - c0f;
  const long r0 = static_cast<long>(r0f);
  const long c0 = static_cast<long>(c0f);
  const long nr = static_cast<long>(rows_);
  const long nc = static_cast<long>(cols_);

  auto at = [&](long r, long c) -> double {
    if (r < 0 || c < 0 || r >= nr || c >= nc) return 0.0;
    return pixels_[static_cast<std::size_t>(r) * cols_ + static_cast<std::size_t>(c)];
  };

  // Skip zero-weight neighbours so that integer coordinates reproduce the
  // pixel value exactly.
  double value = 0.0;
  if (fr < 1.0 && fc < 1.0) value += (1.0 - fr) * (1.0 - fc) * at(r0, c0);
  if (fr < 1.0 && fc > 0.0) value += (1.0 - fr) * fc * at(r0, c0 + 1);
  if (fr > 0.0 && fc < 1.0) value += fr * (1.0 - fc) * at(r0 + 1, c0);
  if (fr > 0.0 && fc > 0.0) value += fr * fc * at(r0 + 1, c0 + 1);
  return value;
}

void validate_image(const Image& image) {
  if (image.empty()) throw Error(ErrorKind::InvalidInput, "image is empty");
  for (double v : image.pixels()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::InvalidInput, "image has a negative or non-finite intensity");
    }
  }
  if (!(image.mass() > 0.0)) throw Error(ErrorKind::InvalidInput, "image has zero total mass");
}

}  // namespace rcdt
