// rcdt: gen / train / predict / eval driver. Every command writes a JSON
// report and prints only its path on stdout; diagnostics go to stderr.
//
// Exit codes: 0 success, 2 configuration or input-format error, 3 runtime
// failure.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "rcdt/classifier.hpp"
#include "rcdt/error.hpp"
#include "rcdt/random.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rcdt;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t tag) { return Random::stream(seed, tag).next(); }

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::FormatError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::FormatError, "cannot write " + path.string());
  return out;
}

json transform_json(const ResolvedTransform& r) {
  return {{"n_angles", r.n_angles},
          {"n_offsets", r.n_offsets},
          {"reference_size", r.reference_size},
          {"extent", r.extent},
          {"dimension", r.dimension()}};
}

std::string decision_label(const ClassifierModel& m, const Decision& d) {
  return d.accepted ? m.labels[d.class_id] : std::string("reject");
}

// Keeps in-class labels (all, or data.in_labels), relabels data.ood_labels
// as out-of-class, and drops everything else.
LabeledDataset select(const LabeledDataset& d, const cli::RunConfig& c, bool allow_ood, std::size_t per_class) {
  const std::set<std::string> in(c.in_labels.begin(), c.in_labels.end());
  const std::set<std::string> ood(c.ood_labels.begin(), c.ood_labels.end());
  std::map<std::string, std::size_t> taken;
  LabeledDataset out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::string label = d.labels[i];
    if (ood.count(label) || label == kOutOfClass) {
      if (!allow_ood) continue;
      label = std::string(kOutOfClass);
    } else if (!in.empty() && !in.count(label)) {
      continue;
    } else if (per_class > 0 && taken[label]++ >= per_class) {
      continue;
    }
    out.push_back(d.images[i], std::move(label));
  }
  return out;
}

// --- gen ---------------------------------------------------------------------

fs::path cmd_gen(const cli::RunConfig& c) {
  const auto& g = c.gen;
  std::vector<Template> in_class, ood;
  for (const auto& n : g.templates) in_class.push_back(make_template(n, g.size));
  for (const auto& n : g.ood_templates) ood.push_back(make_template(n, g.size));

  auto spec = [&](std::size_t count, std::uint64_t seed) {
    DeformationSpec s{g.translation, g.scale_min, g.scale_max, g.shear, count, seed};
    validate(s);
    return s;
  };
  if (g.train_count == 0) std::cerr << "warning: gen.train_count is 0; the training manifest will be empty\n";
  if (g.test_count == 0 && (ood.empty() || g.ood_count == 0)) {
    std::cerr << "warning: no test samples requested; the test manifest will be empty\n";
  }

  const LabeledDataset train = generate_synthetic(in_class, spec(g.train_count, c.seed));
  LabeledDataset test = generate_synthetic(in_class, spec(g.test_count, derived_seed(c.seed, 1)));
  if (!ood.empty()) {
    const LabeledDataset extra = generate_synthetic(ood, spec(g.ood_count, derived_seed(c.seed, 2)));
    for (std::size_t i = 0; i < extra.size(); ++i) test.push_back(extra.images[i], std::string(kOutOfClass));
  }

  fs::create_directories(c.out);
  save_directory(train, c.out / "train.csv", "train");
  save_directory(test, c.out / "test.csv", "test");

  json counts;
  counts["train"] = json::object();
  counts["test"] = json::object();
  for (const auto& l : train.labels) counts["train"][l] = counts["train"].value(l, 0) + 1;
  for (const auto& l : test.labels) counts["test"][l] = counts["test"].value(l, 0) + 1;
  const json report{{"seed", c.seed},
                    {"size", g.size},
                    {"templates", g.templates},
                    {"ood_templates", g.ood_templates},
                    {"deformation",
                     {{"translation", g.translation},
                      {"scale_min", g.scale_min},
                      {"scale_max", g.scale_max},
                      {"shear", g.shear}}},
                    {"train_manifest", "train.csv"},
                    {"test_manifest", "test.csv"},
                    {"counts", counts}};
  const fs::path path = c.out / "gen.json";
  write_json(path, report);
  return path;
}

// --- train -------------------------------------------------------------------

fs::path cmd_train(const cli::RunConfig& c) {
  const cli::DataSource src = c.train_source();
  const LabeledDataset data = select(src.load(), c, false, c.train_per_class);
  if (data.empty()) throw Error(ErrorKind::InsufficientData, "no training samples in " + src.describe());

  const TrainResult result = train(data, c.train_config());
  fs::create_directories(c.out);
  const fs::path model_path = c.model_path();
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  save_model(result.model, model_path);

  json classes = json::array();
  for (const auto& s : result.summary) {
    json q = json::object();
    const char* names[] = {"min", "p05", "p25", "median", "p75", "p95", "max"};
    for (std::size_t i = 0; i < s.distance_quantiles.size(); ++i) q[names[i]] = s.distance_quantiles[i];
    classes.push_back({{"label", s.label},
                       {"n_fit", s.n_fit},
                       {"n_validation", s.n_validation},
                       {"rank", s.rank},
                       {"bandwidth", s.bandwidth},
                       {"validation_distance_quantiles", q}});
  }
  const json report{{"model", model_path.string()},
                    {"fingerprint", hex64(result.model.fingerprint())},
                    {"transform", transform_json(result.model.resolved)},
                    {"seed", c.seed},
                    {"validation_fraction", c.validation_fraction},
                    {"rank_tolerance", c.rank_tolerance},
                    {"max_rank", c.max_rank},
                    {"n_samples", data.size()},
                    {"classes", classes}};
  const fs::path path = c.out / "train_summary.json";
  write_json(path, report);
  return path;
}

// --- predict -----------------------------------------------------------------

fs::path cmd_predict(const cli::RunConfig& c) {
  const ClassifierModel model = load_model(c.model_path());
  const cli::DataSource src = c.test_source();
  const LabeledDataset data = src.load();
  if (data.empty()) throw Error(ErrorKind::InvalidInput, "no images in " + src.describe());
  const std::vector<Prediction> preds = predict_batch(model, data.images, 0.0);

  json rows = json::array();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Prediction& p = preds[i];
    json distances = json::object();
    for (std::size_t k = 0; k < model.n_classes(); ++k) distances[model.labels[k]] = p.distances[k];
    json decisions = json::array();
    for (double a : c.alphas) decisions.push_back(decision_label(model, decide_prediction(p, a)));
    rows.push_back({{"index", i},
                    {"label", data.labels[i]},
                    {"nearest_class", model.labels[p.nearest]},
                    {"distances", distances},
                    {"likelihood", p.likelihood},
                    {"decisions", decisions}});
  }
  fs::create_directories(c.out);
  const json report{{"model", c.model_path().string()},
                    {"input", src.describe()},
                    {"alphas", c.alphas},
                    {"predictions", rows}};
  const fs::path path = c.out / "predictions.json";
  write_json(path, report);
  return path;
}

// --- eval --------------------------------------------------------------------

fs::path cmd_eval(const cli::RunConfig& c) {
  const ClassifierModel model = load_model(c.model_path());
  const cli::DataSource src = c.test_source();
  const LabeledDataset data = select(src.load(), c, true, 0);
  if (data.empty()) throw Error(ErrorKind::InvalidInput, "no test samples in " + src.describe());
  const std::vector<EvaluationReport> reports = evaluate(model, data, c.alphas);
  fs::create_directories(c.out);

  json results = json::array();
  for (const auto& r : reports) {
    json per_class = json::object();
    for (const auto& [label, acc] : r.per_class_accuracy) per_class[label] = acc;
    results.push_back({{"alpha", r.alpha},
                       {"accuracy", r.accuracy},
                       {"n_correct", r.n_correct},
                       {"n_rejected", r.n_rejected},
                       {"per_class_accuracy", per_class},
                       {"confusion", {{"rows", r.row_labels}, {"columns", r.column_labels}, {"counts", r.confusion}}}});
  }
  const auto n_ood = std::count(data.labels.begin(), data.labels.end(), std::string(kOutOfClass));
  const json report{{"model", c.model_path().string()},
                    {"fingerprint", hex64(model.fingerprint())},
                    {"test_set", src.describe()},
                    {"n_samples", data.size()},
                    {"n_out_of_class", n_ood},
                    {"results", results},
                    {"samples_csv", "samples.csv"},
                    {"likelihood_curves_csv", "likelihood_curves.csv"}};

  std::ofstream samples = open_csv(c.out / "samples.csv");
  samples << "alpha,index,true_label,nearest_class,distance,likelihood,decision\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      const SampleRecord& s = r.samples[i];
      fmt::print(samples, "{},{},{},{},{},{},{}\n", r.alpha, i, s.true_label, s.nearest_label, s.distance,
                 s.likelihood, decision_label(model, s.decision));
    }
  }

  // L(x) per class on a shared distance grid covering the test distances
  // and every density's support.
  double x_max = 0.0;
  for (const auto& s : reports.front().samples) x_max = std::max(x_max, s.distance);
  for (const auto& d : model.densities) {
    for (double v : d.support) x_max = std::max(x_max, v + 4.0 * d.bandwidth);
  }
  constexpr int kGrid = 256;
  std::ofstream curves = open_csv(c.out / "likelihood_curves.csv");
  curves << "class,distance,likelihood\n";
  for (std::size_t k = 0; k < model.n_classes(); ++k) {
    for (int i = 0; i < kGrid; ++i) {
      const double x = x_max * static_cast<double>(i) / (kGrid - 1);
      fmt::print(curves, "{},{},{}\n", model.labels[k], x, likelihood(model.densities[k], x));
    }
  }

  const fs::path path = c.out / "report.json";
  write_json(path, report);
  return path;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::ConfigMismatch:
    case ErrorKind::FormatError:
      return kExitConfig;
    case ErrorKind::InsufficientData:
    case ErrorKind::ModelIncomplete:
    case ErrorKind::GenerationFailed:
      return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"R-CDT nearest-subspace classifier with out-of-class rejection"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<double> alphas;
  std::string out;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--alpha", alphas, "confidence level(s) for predict/eval; repeat or comma-separate")
      ->delimiter(',');
  CLI::App* gen = app.add_subcommand("gen", "write a synthetic train/test dataset");
  CLI::App* trn = app.add_subcommand("train", "fit subspaces and distance densities");
  CLI::App* prd = app.add_subcommand("predict", "classify images with a trained model");
  CLI::App* evl = app.add_subcommand("eval", "score a labeled test set");
  for (CLI::App* sub : {gen, trn, prd, evl}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    cli::RunConfig config = config_path.empty() ? cli::RunConfig{} : cli::load_config(config_path);
    if (seed) config.seed = *seed;
    if (!alphas.empty()) config.alphas = alphas;
    if (!out.empty()) config.out = out;
    cli::validate(config);

    fs::path report;
    if (*gen) report = cmd_gen(config);
    else if (*trn) report = cmd_train(config);
    else if (*prd) report = cmd_predict(config);
    else if (*evl) report = cmd_eval(config);
    std::cout << report.string() << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
