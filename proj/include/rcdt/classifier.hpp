#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcdt/data.hpp"
#include "rcdt/likelihood.hpp"
#include "rcdt/rcdt.hpp"
#include "rcdt/subspace.hpp"

namespace rcdt {

struct TrainConfig {
  TransformConfig transform;
  SubspaceOptions subspace;
  double validation_fraction = 0.2;
  std::optional<double> bandwidth;
  std::uint64_t seed = 0;
};

/// Per-class training diagnostics.
struct ClassSummary {
  std::string label;
  std::size_t n_fit = 0;
  std::size_t n_validation = 0;
  std::size_t rank = 0;
  double bandwidth = 0.0;
  /// Validation-distance quantiles at 0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.
  std::vector<double> distance_quantiles;
  /// Training-set indices held out for the distance density.
  std::vector<std::size_t> validation_indices;
};

struct ClassifierModel {
  static constexpr std::uint32_t kFormatVersion = 1;

  TransformConfig transform;
  ResolvedTransform resolved;
  std::vector<std::string> labels;
  std::vector<SubspaceBasis> bases;
  std::vector<DistanceDensity> densities;

  std::size_t n_classes() const noexcept { return labels.size(); }
  std::uint64_t fingerprint() const { return resolved.fingerprint(); }
  /// Index of a label, or nullopt.
  std::optional<std::size_t> class_index(std::string_view label) const;
  /// Throws ModelIncomplete / ConfigMismatch when the invariants do not hold.
  void validate() const;
};

struct TrainResult {
  ClassifierModel model;
  std::vector<ClassSummary> summary;
};

/// Stratified split per class (seeded), subspace on the fit part, KDE on the
/// validation part's distances to its own subspace. Classes are ordered by
/// label. Throws InsufficientData naming the class when a class has fewer
/// than 2 samples or fewer than 2 validation samples.
TrainResult train(const LabeledDataset& train_set, const TrainConfig& config);

struct Prediction {
  std::size_t nearest = 0;
  std::vector<double> distances;
  double likelihood = 1.0;
  Decision decision;
};

/// alpha == 0 disables rejection; otherwise 0 < alpha < 1.
Prediction predict(const ClassifierModel& model, const Image& image, double alpha);

/// Nearest class, distances, and likelihood for every sample; the decision
/// uses alpha. Parallel over samples.
std::vector<Prediction> predict_batch(const ClassifierModel& model, std::span<const Image> images, double alpha);

/// Re-applies the acceptance rule to existing predictions.
Decision decide_prediction(const Prediction& p, double alpha);

struct SampleRecord {
  std::string true_label;
  std::string nearest_label;
  double distance = 0.0;
  double likelihood = 0.0;
  Decision decision;
  bool correct = false;
};

/// Rows: model classes then __ood__ (true label). Columns: model classes
/// then "reject" (decision).
struct EvaluationReport {
  double alpha = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_correct = 0;
  std::size_t n_rejected = 0;
  double accuracy = 0.0;  // percent
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
  std::vector<std::vector<std::size_t>> confusion;
  /// Percent correct per row label; rows with no samples are omitted.
  std::vector<std::pair<std::string, double>> per_class_accuracy;
  std::vector<SampleRecord> samples;
};

/// Throws InvalidInput for an empty test set or a label that is neither a
/// model class nor __ood__.
EvaluationReport evaluate(const ClassifierModel& model, const LabeledDataset& test_set, double alpha);

/// One report per alpha, sharing the transforms.
std::vector<EvaluationReport> evaluate(const ClassifierModel& model, const LabeledDataset& test_set,
                                       std::span<const double> alphas);

/// Builds a report from precomputed predictions (predictions[i] for
/// test_labels[i]).
EvaluationReport make_report(const ClassifierModel& model, std::span<const std::string> test_labels,
                             std::span<const Prediction> predictions, double alpha);

// --- model file ---------------------------------------------------------------

void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace rcdt
