#include "rcdt/rcdt.hpp"

#include <exception>

#include "rcdt/cdt.hpp"
#include "rcdt/error.hpp"
#include "rcdt/radon.hpp"

namespace rcdt {

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ResolvedTransform::describe() const {
  return "rcdt/v1 angles=" + std::to_string(n_angles) + " offsets=" + std::to_string(n_offsets) +
         " extent=" + std::to_string(extent) + " reference=uniform[0,1]x" +
         std::to_string(reference_size);
}

std::uint64_t ResolvedTransform::fingerprint() const {
  const std::string text = describe();
  return fnv1a({reinterpret_cast<const unsigned char*>(text.data()), text.size()});
}

ResolvedTransform resolve(const TransformConfig& config, std::size_t rows, std::size_t cols) {
  if (config.n_angles < 1) throw Error(ErrorKind::InvalidInput, "n_angles must be at least 1");
  ResolvedTransform r;
  r.n_angles = config.n_angles;
  r.extent = diagonal_extent(rows, cols);
  r.n_offsets = config.n_offsets == 0 ? r.extent : config.n_offsets;
  r.reference_size = config.reference_size == 0 ? r.n_offsets : config.reference_size;
  if (r.n_offsets < 2) throw Error(ErrorKind::InvalidInput, "n_offsets must be at least 2");
  if (r.reference_size < 2) throw Error(ErrorKind::InvalidInput, "reference_size must be at least 2");
  return r;
}

RcdtVector rcdt_forward(const Image& image, const TransformConfig& config) {
  validate_image(image);
  const ResolvedTransform r = resolve(config, image.rows(), image.cols());
  const Sinogram sino = radon_forward(image, AngleGrid::uniform(r.n_angles), r.n_offsets);
  const Density reference = uniform_density(r.reference_size, 0.0, 1.0);

  const double half_bin = 0.5 * sino.spacing();
  const double lo = -0.5 * sino.extent() + half_bin;
  const double hi = 0.5 * sino.extent() - half_bin;

  RcdtVector out;
  out.fingerprint = r.fingerprint();
  out.values.reserve(r.dimension());
  for (std::size_t i = 0; i < sino.n_angles(); ++i) {
    const CdtFunction block = cdt_forward(normalize_density(sino.row(i), lo, hi), reference);
    out.values.insert(out.values.end(), block.values.begin(), block.values.end());
  }
  return out;
}

std::vector<RcdtVector> rcdt_forward_batch(std::span<const Image> images, const TransformConfig& config) {
  std::vector<RcdtVector> out(images.size());
  std::vector<std::exception_ptr> errors(images.size());
  const auto n = static_cast<long>(images.size());

#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = rcdt_forward(images[k], config);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<RcdtVector> rcdt_forward_batch_serial(std::span<const Image> images,
                                                  const TransformConfig& config) {
  std::vector<RcdtVector> out;
  out.reserve(images.size());
  for (const Image& image : images) out.push_back(rcdt_forward(image, config));
  return out;
}

}  // namespace rcdt
