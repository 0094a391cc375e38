#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rcdt/classifier.hpp"

namespace cli {

/// A labeled image source: a `path,label` manifest or an IDX image/label pair.
struct DataSource {
  std::filesystem::path manifest;
  std::filesystem::path idx_images;
  std::filesystem::path idx_labels;

  bool is_idx() const { return !idx_images.empty(); }
  rcdt::LabeledDataset load() const;
  std::string describe() const;
};

struct GenConfig {
  std::size_t size = 32;
  std::vector<std::string> templates{"blob", "ring", "cross"};
  std::vector<std::string> ood_templates{"crescent"};
  std::size_t train_count = 100;
  std::size_t test_count = 100;
  std::size_t ood_count = 100;
  double translation = 6.0;
  double scale_min = 0.8;
  double scale_max = 1.2;
  double shear = 0.0;
};

struct RunConfig {
  rcdt::TransformConfig transform;
  double rank_tolerance = 1e-4;
  std::size_t max_rank = 0;
  double validation_fraction = 0.2;
  std::optional<double> bandwidth;
  std::vector<double> alphas{0.0, 0.01, 0.05, 0.10};
  std::uint64_t seed = 0;
  std::filesystem::path out = "rcdt-run";
  GenConfig gen;

  std::optional<DataSource> train;
  std::optional<DataSource> test;
  std::vector<std::string> in_labels;
  std::vector<std::string> ood_labels;
  std::size_t train_per_class = 0;
  std::optional<std::filesystem::path> model;

  DataSource train_source() const;
  DataSource test_source() const;
  std::filesystem::path model_path() const;
  rcdt::TrainConfig train_config() const;
};

/// Parses a JSON config file. Unknown keys, wrong types, and out-of-range
/// values throw rcdt::Error(InvalidInput) naming the key.
RunConfig load_config(const std::filesystem::path& path);

/// Range checks shared by file values and flag overrides.
void validate(const RunConfig& config);

}  // namespace cli
