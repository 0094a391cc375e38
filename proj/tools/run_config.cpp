#include "run_config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"
#include "rcdt/error.hpp"

namespace cli {

namespace fs = std::filesystem;
using nlohmann::json;
using rcdt::Error;
using rcdt::ErrorKind;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::InvalidInput, "config key '" + key + "' " + what);
}

void only_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) bad(where.empty() ? "<root>" : where, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) bad(where.empty() ? key : where + "." + key, "is not recognized");
  }
}

template <class T>
void read(const json& obj, const std::string& key, const std::string& path, T& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) bad(path, "must be a number");
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) bad(path, "must be a nonnegative integer");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) bad(path, "must be a string");
  }
  out = v.get<T>();
}

DataSource parse_source(const json& v, const std::string& key) {
  DataSource s;
  if (v.is_string()) {
    s.manifest = v.get<std::string>();
    return s;
  }
  only_keys(v, key, {"idx_images", "idx_labels"});
  std::string images, labels;
  read(v, "idx_images", key + ".idx_images", images);
  read(v, "idx_labels", key + ".idx_labels", labels);
  if (images.empty() || labels.empty()) bad(key, "needs both idx_images and idx_labels");
  s.idx_images = images;
  s.idx_labels = labels;
  return s;
}

std::vector<std::string> string_list(const json& obj, const std::string& key, const std::string& path) {
  std::vector<std::string> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  if (!v.is_array()) bad(path, "must be a list of strings");
  for (const auto& e : v) {
    if (!e.is_string()) bad(path, "must be a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

rcdt::LabeledDataset DataSource::load() const {
  return is_idx() ? rcdt::load_idx(idx_images, idx_labels) : rcdt::load_directory(manifest);
}

std::string DataSource::describe() const {
  return is_idx() ? idx_images.string() + " + " + idx_labels.string() : manifest.string();
}

DataSource RunConfig::train_source() const {
  return train ? *train : DataSource{out / "train.csv", {}, {}};
}

DataSource RunConfig::test_source() const {
  return test ? *test : DataSource{out / "test.csv", {}, {}};
}

fs::path RunConfig::model_path() const { return model ? *model : out / "model.rcdt"; }

rcdt::TrainConfig RunConfig::train_config() const {
  rcdt::TrainConfig c;
  c.transform = transform;
  c.subspace = {rank_tolerance, max_rank};
  c.validation_fraction = validation_fraction;
  c.bandwidth = bandwidth;
  c.seed = seed;
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::FormatError, "cannot open config " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::FormatError, path.string() + ": " + e.what());
  }

  RunConfig c;
  only_keys(root, "",
            {"transform", "rank_tolerance", "max_rank", "validation_fraction", "bandwidth", "alphas", "seed", "out",
             "gen", "data", "model"});

  if (root.contains("transform")) {
    const json& t = root["transform"];
    only_keys(t, "transform", {"n_angles", "n_offsets", "reference_size"});
    read(t, "n_angles", "transform.n_angles", c.transform.n_angles);
    read(t, "n_offsets", "transform.n_offsets", c.transform.n_offsets);
    read(t, "reference_size", "transform.reference_size", c.transform.reference_size);
  }
  read(root, "rank_tolerance", "rank_tolerance", c.rank_tolerance);
  read(root, "max_rank", "max_rank", c.max_rank);
  read(root, "validation_fraction", "validation_fraction", c.validation_fraction);
  if (root.contains("bandwidth") && !root["bandwidth"].is_null()) {
    double h = 0.0;
    read(root, "bandwidth", "bandwidth", h);
    c.bandwidth = h;
  }
  if (root.contains("alphas")) {
    const json& a = root["alphas"];
    if (!a.is_array() || a.empty()) bad("alphas", "must be a non-empty list of numbers");
    c.alphas.clear();
    for (const auto& e : a) {
      if (!e.is_number()) bad("alphas", "must be a non-empty list of numbers");
      c.alphas.push_back(e.get<double>());
    }
  }
  read(root, "seed", "seed", c.seed);
  std::string out;
  read(root, "out", "out", out);
  if (!out.empty()) c.out = out;

  if (root.contains("gen")) {
    const json& g = root["gen"];
    only_keys(g, "gen",
              {"size", "templates", "ood_templates", "train_count", "test_count", "ood_count", "translation",
               "scale_min", "scale_max", "shear"});
    read(g, "size", "gen.size", c.gen.size);
    if (g.contains("templates")) c.gen.templates = string_list(g, "templates", "gen.templates");
    if (g.contains("ood_templates")) c.gen.ood_templates = string_list(g, "ood_templates", "gen.ood_templates");
    read(g, "train_count", "gen.train_count", c.gen.train_count);
    read(g, "test_count", "gen.test_count", c.gen.test_count);
    read(g, "ood_count", "gen.ood_count", c.gen.ood_count);
    read(g, "translation", "gen.translation", c.gen.translation);
    read(g, "scale_min", "gen.scale_min", c.gen.scale_min);
    read(g, "scale_max", "gen.scale_max", c.gen.scale_max);
    read(g, "shear", "gen.shear", c.gen.shear);
  }

  if (root.contains("data")) {
    const json& d = root["data"];
    only_keys(d, "data", {"train", "test", "in_labels", "ood_labels", "train_per_class"});
    if (d.contains("train")) c.train = parse_source(d["train"], "data.train");
    if (d.contains("test")) c.test = parse_source(d["test"], "data.test");
    c.in_labels = string_list(d, "in_labels", "data.in_labels");
    c.ood_labels = string_list(d, "ood_labels", "data.ood_labels");
    read(d, "train_per_class", "data.train_per_class", c.train_per_class);
  }
  if (root.contains("model")) {
    std::string m;
    read(root, "model", "model", m);
    c.model = m;
  }
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  if (c.transform.n_angles < 1) bad("transform.n_angles", "must be at least 1");
  if (c.transform.n_offsets == 1) bad("transform.n_offsets", "must be 0 (auto) or at least 2");
  if (c.transform.reference_size == 1) bad("transform.reference_size", "must be 0 (auto) or at least 2");
  if (!(c.rank_tolerance > 0.0 && c.rank_tolerance < 1.0)) bad("rank_tolerance", "must lie in (0, 1)");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction <= 0.5)) {
    bad("validation_fraction", "must lie in (0, 0.5]");
  }
  if (c.bandwidth && !(*c.bandwidth > 0.0)) bad("bandwidth", "must be positive");
  for (double a : c.alphas) {
    if (!(a >= 0.0 && a < 1.0)) bad("alphas", "entries must lie in [0, 1)");
  }
  if (c.gen.size < 8) bad("gen.size", "must be at least 8");
  if (c.gen.templates.empty()) bad("gen.templates", "must name at least one template");
  if (!(c.gen.translation >= 0.0)) bad("gen.translation", "must be >= 0");
  if (!(c.gen.scale_min > 0.0)) bad("gen.scale_min", "must be > 0");
  if (!(c.gen.scale_max >= c.gen.scale_min)) bad("gen.scale_max", "must be >= gen.scale_min");
  if (!(c.gen.shear >= 0.0)) bad("gen.shear", "must be >= 0");
  for (const auto& l : c.in_labels) {
    if (l == rcdt::kOutOfClass) bad("data.in_labels", "cannot contain the out-of-class label");
  }
}

}  // namespace cli
