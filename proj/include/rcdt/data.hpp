#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcdt/image.hpp"

namespace rcdt {

/// Label reserved for samples from classes absent at training time.
inline constexpr std::string_view kOutOfClass = "__ood__";

struct LabeledDataset {
  std::vector<Image> images;
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return images.size(); }
  bool empty() const noexcept { return images.empty(); }
  void push_back(Image image, std::string label) {
    images.push_back(std::move(image));
    labels.push_back(std::move(label));
  }
};

// --- IDX -------------------------------------------------------------------

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Either may be gzip-compressed. Pixels are divided by 255; labels become
/// their decimal string. Throws FormatError on bad magic, count mismatch, or
/// truncation.
LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Writes uncompressed IDX files; pixels are scaled by 255 and rounded.
/// Labels must be decimal integers in [0, 255].
void save_idx(const LabeledDataset& dataset, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

// --- PGM / manifests ---------------------------------------------------------

/// Binary PGM (P5), 8- or 16-bit. Intensities are scaled to [0, 1] by maxval.
Image load_pgm(const std::filesystem::path& path);

/// Writes a 16-bit P5 PGM with the image maximum mapped to 65535. An all-zero
/// image is written as zeros.
void save_pgm(const std::filesystem::path& path, const Image& image);

/// CSV manifest with header `path,label`; relative paths resolve against the
/// manifest's directory. All images must share one size.
LabeledDataset load_directory(const std::filesystem::path& manifest_path);

/// Writes images as images/<prefix>_<index>.pgm next to the manifest and the
/// manifest itself.
void save_directory(const LabeledDataset& dataset, const std::filesystem::path& manifest_path,
                    std::string_view image_prefix);

// --- Synthetic generative model ----------------------------------------------

struct Template {
  std::string name;
  Image image;
};

/// Shapes with soft (anti-aliased) edges on a size x size canvas:
/// "blob", "ring", "cross", "crescent".
Template make_template(std::string_view name, std::size_t size = 32);

/// blob, ring, cross (in-class) followed by crescent (held out).
std::vector<Template> default_templates(std::size_t size = 32);

/// Affine deformation family: translation in [-max_translation, max_translation]
/// per axis, isotropic scale in [scale_min, scale_max], and horizontal shear in
/// [-max_shear, max_shear], all drawn uniformly.
struct DeformationSpec {
  double max_translation = 0.0;
  double scale_min = 1.0;
  double scale_max = 1.0;
  double max_shear = 0.0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

/// Throws InvalidInput with the offending field name.
void validate(const DeformationSpec& spec);

struct Deformation {
  double tx = 0.0;
  double ty = 0.0;
  double scale = 1.0;
  double shear = 0.0;
};

/// Applies x -> c + t + scale * Shear * (x - c) by inverse mapping with
/// bilinear interpolation (c is the image center). No renormalization.
Image warp(const Image& image, const Deformation& g);

/// warp() rescaled to the input's mass. Empty when the warp pushes more than
/// 10% of the expected mass (input mass * scale^2) off-frame.
std::optional<Image> deform(const Image& image, const Deformation& g);

/// Draws spec.count deformations per template and labels samples with the
/// template name. Each output is rescaled to its template's mass. A draw that
/// loses more than 10% of the mass off-frame is redrawn, up to 100 times,
/// after which GenerationFailed is thrown. Each template has its own random
/// stream derived from (seed, template index).
LabeledDataset generate_synthetic(const std::vector<Template>& templates, const DeformationSpec& spec);

}  // namespace rcdt
