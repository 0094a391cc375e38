#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rcdt/image.hpp"

namespace rcdt {

/// Transform parameters. Zero for n_offsets means one offset per unit of the
/// image diagonal; zero for reference_size means "same as n_offsets".
struct TransformConfig {
  std::size_t n_angles = 180;
  std::size_t n_offsets = 0;
  std::size_t reference_size = 0;

  friend bool operator==(const TransformConfig&, const TransformConfig&) = default;
};

/// Config with the image-dependent defaults filled in.
struct ResolvedTransform {
  std::size_t n_angles = 0;
  std::size_t n_offsets = 0;
  std::size_t reference_size = 0;
  std::size_t extent = 0;

  std::size_t dimension() const noexcept { return n_angles * reference_size; }
  std::uint64_t fingerprint() const;
  std::string describe() const;
};

ResolvedTransform resolve(const TransformConfig& config, std::size_t rows, std::size_t cols);

/// Stacked per-angle CDTs (angle-major). Vectors are only comparable when
/// their fingerprints match.
struct RcdtVector {
  std::vector<double> values;
  std::uint64_t fingerprint = 0;
};

/// R-CDT of an image: Radon transform, then for each projection the CDT
/// against a uniform reference on [0, 1] with reference_size grid points.
RcdtVector rcdt_forward(const Image& image, const TransformConfig& config);

/// Transforms a batch in parallel. Output order follows input order; if any
/// image fails, the error for the lowest failing index is rethrown.
std::vector<RcdtVector> rcdt_forward_batch(std::span<const Image> images, const TransformConfig& config);

/// Single-threaded reference for rcdt_forward_batch.
std::vector<RcdtVector> rcdt_forward_batch_serial(std::span<const Image> images,
                                                  const TransformConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace rcdt
