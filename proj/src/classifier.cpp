#include "rcdt/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>

#include "rcdt/error.hpp"
#include "rcdt/random.hpp"

namespace rcdt {

namespace {

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidInput, "alpha must lie in [0, 1)");
}

Prediction predict_from_distances(const ClassifierModel& model, std::vector<double> distances, double alpha) {
  Prediction p;
  p.distances = std::move(distances);
  p.nearest = nearest_index(p.distances);
  if (p.nearest >= model.densities.size()) {
    throw Error(ErrorKind::ModelIncomplete, "no distance density for class " + std::to_string(p.nearest));
  }
  p.likelihood = likelihood(model.densities[p.nearest], p.distances[p.nearest]);
  p.decision = decide_prediction(p, alpha);
  return p;
}

}  // namespace

std::optional<std::size_t> ClassifierModel::class_index(std::string_view label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

void ClassifierModel::validate() const {
  if (labels.empty()) throw Error(ErrorKind::ModelIncomplete, "model has no classes");
  if (bases.size() != labels.size() || densities.size() != labels.size()) {
    throw Error(ErrorKind::ModelIncomplete, "every class needs both a subspace and a distance density");
  }
  const std::uint64_t fp = fingerprint();
  for (std::size_t k = 0; k < bases.size(); ++k) {
    if (bases[k].fingerprint != fp || bases[k].dimension() != resolved.dimension()) {
      throw Error(ErrorKind::ConfigMismatch, "subspace for class '" + labels[k] + "' has a different transform");
    }
    if (bases[k].rank() == 0) throw Error(ErrorKind::ModelIncomplete, "subspace for class '" + labels[k] + "' is empty");
    if (densities[k].support.size() < 2 || !(densities[k].bandwidth > 0.0)) {
      throw Error(ErrorKind::ModelIncomplete, "distance density for class '" + labels[k] + "' is invalid");
    }
  }
}

TrainResult train(const LabeledDataset& train_set, const TrainConfig& config) {
  if (train_set.empty()) throw Error(ErrorKind::InsufficientData, "training set is empty");
  if (!(config.validation_fraction > 0.0 && config.validation_fraction <= 0.5)) {
    throw Error(ErrorKind::InvalidInput, "validation_fraction must lie in (0, 0.5]");
  }

  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    if (train_set.labels[i] == kOutOfClass) {
      throw Error(ErrorKind::InvalidInput, "training set contains an out-of-class sample");
    }
    by_label[train_set.labels[i]].push_back(i);
  }
  for (const auto& [label, idx] : by_label) {
    if (idx.size() < 2) {
      throw Error(ErrorKind::InsufficientData, "class '" + label + "' has " + std::to_string(idx.size()) +
                                                   " sample(s), need at least 2");
    }
  }

  const Image& first = train_set.images.front();
  TrainResult result;
  ClassifierModel& model = result.model;
  model.transform = config.transform;
  model.resolved = resolve(config.transform, first.rows(), first.cols());

  const std::vector<RcdtVector> vectors = rcdt_forward_batch(train_set.images, config.transform);

  std::size_t class_no = 0;
  for (const auto& [label, indices] : by_label) {
    std::vector<std::size_t> order = indices;
    Random rng = Random::stream(config.seed, class_no);
    rng.shuffle(order);

    const std::size_t n = order.size();
    const auto rounded = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(n)));
    const std::size_t n_val = std::min(rounded, n - 1);
    if (n_val < 2) {
      throw Error(ErrorKind::InsufficientData, "class '" + label + "' yields " + std::to_string(n_val) +
                                                   " validation sample(s), need at least 2");
    }
    const std::size_t n_fit = n - n_val;

    std::vector<RcdtVector> fit;
    fit.reserve(n_fit);
    for (std::size_t j = 0; j < n_fit; ++j) fit.push_back(vectors[order[j]]);
    SubspaceBasis basis = fit_subspace(fit, config.subspace);

    std::vector<double> distances;
    distances.reserve(n_val);
    for (std::size_t j = n_fit; j < n; ++j) distances.push_back(distance_to_subspace(vectors[order[j]], basis));
    DistanceDensity density = fit_kde(distances, config.bandwidth, class_no);

    ClassSummary s;
    s.label = label;
    s.n_fit = n_fit;
    s.n_validation = n_val;
    s.rank = basis.rank();
    s.bandwidth = density.bandwidth;
    for (double p : {0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0}) s.distance_quantiles.push_back(quantile(distances, p));
    s.validation_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_fit), order.end());
    result.summary.push_back(std::move(s));

    model.labels.push_back(label);
    model.bases.push_back(std::move(basis));
    model.densities.push_back(std::move(density));
    ++class_no;
  }
  model.validate();
  return result;
}

Decision decide_prediction(const Prediction& p, double alpha) {
  check_alpha(alpha);
  if (alpha == 0.0) return Decision::accept(p.nearest);
  return decide_from_likelihood(p.nearest, p.likelihood, alpha);
}

Prediction predict(const ClassifierModel& model, const Image& image, double alpha) {
  check_alpha(alpha);
  const RcdtVector v = rcdt_forward(image, model.transform);
  std::vector<double> distances;
  distances.reserve(model.n_classes());
  for (const auto& b : model.bases) distances.push_back(distance_to_subspace(v, b));
  return predict_from_distances(model, std::move(distances), alpha);
}

std::vector<Prediction> predict_batch(const ClassifierModel& model, std::span<const Image> images, double alpha) {
  check_alpha(alpha);
  const std::vector<RcdtVector> vectors = rcdt_forward_batch(images, model.transform);
  const std::vector<double> dist = distance_matrix(vectors, model.bases);
  const std::size_t k = model.n_classes();
  std::vector<Prediction> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.push_back(predict_from_distances(
        model, std::vector<double>(dist.begin() + static_cast<std::ptrdiff_t>(i * k),
                                   dist.begin() + static_cast<std::ptrdiff_t>((i + 1) * k)),
        alpha));
  }
  return out;
}

EvaluationReport make_report(const ClassifierModel& model, std::span<const std::string> test_labels,
                             std::span<const Prediction> predictions, double alpha) {
  check_alpha(alpha);
  if (test_labels.empty()) throw Error(ErrorKind::InvalidInput, "test set is empty");
  if (test_labels.size() != predictions.size()) {
    throw Error(ErrorKind::InvalidInput, "labels and predictions differ in length");
  }
  const std::size_t k = model.n_classes();

  EvaluationReport r;
  r.alpha = alpha;
  r.n_samples = test_labels.size();
  r.row_labels = model.labels;
  r.row_labels.emplace_back(kOutOfClass);
  r.column_labels = model.labels;
  r.column_labels.emplace_back("reject");
  r.confusion.assign(k + 1, std::vector<std::size_t>(k + 1, 0));

  for (std::size_t i = 0; i < test_labels.size(); ++i) {
    const std::string& truth = test_labels[i];
    std::size_t row = k;
    if (truth != kOutOfClass) {
      const auto idx = model.class_index(truth);
      if (!idx) throw Error(ErrorKind::InvalidInput, "test label '" + truth + "' is not a model class");
      row = *idx;
    }
    const Prediction& p = predictions[i];
    const Decision d = decide_prediction(p, alpha);
    const std::size_t col = d.accepted ? d.class_id : k;
    ++r.confusion[row][col];
    if (!d.accepted) ++r.n_rejected;

    SampleRecord rec;
    rec.true_label = truth;
    rec.nearest_label = model.labels[p.nearest];
    rec.distance = p.distances[p.nearest];
    rec.likelihood = p.likelihood;
    rec.decision = d;
    rec.correct = row == col;
    if (rec.correct) ++r.n_correct;
    r.samples.push_back(std::move(rec));
  }
  r.accuracy = 100.0 * static_cast<double>(r.n_correct) / static_cast<double>(r.n_samples);
  for (std::size_t row = 0; row <= k; ++row) {
    std::size_t total = 0;
    for (std::size_t v : r.confusion[row]) total += v;
    if (total == 0) continue;
    r.per_class_accuracy.emplace_back(r.row_labels[row],
                                      100.0 * static_cast<double>(r.confusion[row][row]) / static_cast<double>(total));
  }
  return r;
}

std::vector<EvaluationReport> evaluate(const ClassifierModel& model, const LabeledDataset& test_set,
                                       std::span<const double> alphas) {
  if (test_set.empty()) throw Error(ErrorKind::InvalidInput, "test set is empty");
  for (double a : alphas) check_alpha(a);
  const std::vector<Prediction> predictions = predict_batch(model, test_set.images, 0.0);
  std::vector<EvaluationReport> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.push_back(make_report(model, test_set.labels, predictions, a));
  return out;
}

EvaluationReport evaluate(const ClassifierModel& model, const LabeledDataset& test_set, double alpha) {
  const double alphas[] = {alpha};
  return std::move(evaluate(model, test_set, alphas).front());
}

}  // namespace rcdt
