#include "rcdt/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "rcdt/error.hpp"
#include "rcdt/random.hpp"

namespace rcdt {

namespace fs = std::filesystem;

namespace {

// Reads a whole file, inflating it if it is gzip-compressed.
std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::unique_ptr<gzFile_s, int (*)(gzFile)> file(gzopen(path.c_str(), "rb"), gzclose);
  if (!file) throw Error(ErrorKind::FormatError, "cannot open " + path.string());
  std::vector<unsigned char> out;
  unsigned char buf[1 << 16];
  int n = 0;
  while ((n = gzread(file.get(), buf, sizeof buf)) > 0) out.insert(out.end(), buf, buf + n);
  if (n < 0) throw Error(ErrorKind::FormatError, "read error in " + path.string());
  return out;
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const fs::path& path) {
  if (offset + 4 > bytes.size()) throw Error(ErrorKind::FormatError, "truncated IDX header in " + path.string());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

std::string hex_magic(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

void expect_magic(std::uint32_t got, std::uint32_t want, const fs::path& path) {
  if (got != want) {
    throw Error(ErrorKind::FormatError, path.string() + ": expected IDX magic " + hex_magic(want) + ", found " +
                                            hex_magic(got));
  }
}

// PGM header token, skipping whitespace and '#' comments.
std::string pgm_token(const std::vector<unsigned char>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') tok += static_cast<char>(bytes[pos++]);
  return tok;
}

std::size_t pgm_number(const std::vector<unsigned char>& bytes, std::size_t& pos, const fs::path& path) {
  const std::string tok = pgm_token(bytes, pos);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorKind::FormatError, "malformed PGM header in " + path.string());
  }
  return std::stoul(tok);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

double soft_inside(double signed_distance) { return std::clamp(0.5 - signed_distance, 0.0, 1.0); }

}  // namespace

// --- IDX -------------------------------------------------------------------

LabeledDataset load_idx(const fs::path& images_path, const fs::path& labels_path) {
  const auto images = read_bytes(images_path);
  const auto labels = read_bytes(labels_path);
  expect_magic(read_be32(images, 0, images_path), 0x00000803, images_path);
  expect_magic(read_be32(labels, 0, labels_path), 0x00000801, labels_path);

  const std::size_t n_images = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t n_labels = read_be32(labels, 4, labels_path);
  if (n_images != n_labels) {
    throw Error(ErrorKind::FormatError, "image count " + std::to_string(n_images) + " does not match label count " +
                                            std::to_string(n_labels));
  }
  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + n_images * pixels) {
    throw Error(ErrorKind::FormatError, "truncated IDX image data in " + images_path.string());
  }
  if (labels.size() < 8 + n_labels) {
    throw Error(ErrorKind::FormatError, "truncated IDX label data in " + labels_path.string());
  }

  LabeledDataset out;
  out.images.reserve(n_images);
  out.labels.reserve(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    std::vector<double> px(pixels);
    const unsigned char* src = images.data() + 16 + i * pixels;
    for (std::size_t k = 0; k < pixels; ++k) px[k] = static_cast<double>(src[k]) / 255.0;
    out.push_back(Image(rows, cols, std::move(px)), std::to_string(labels[8 + i]));
  }
  return out;
}

void save_idx(const LabeledDataset& dataset, const fs::path& images_path, const fs::path& labels_path) {
  const std::size_t rows = dataset.empty() ? 0 : dataset.images.front().rows();
  const std::size_t cols = dataset.empty() ? 0 : dataset.images.front().cols();
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw Error(ErrorKind::FormatError, "cannot write IDX files");
  write_be32(img, 0x00000803);
  write_be32(img, static_cast<std::uint32_t>(dataset.size()));
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  write_be32(lab, 0x00000801);
  write_be32(lab, static_cast<std::uint32_t>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Image& im = dataset.images[i];
    if (im.rows() != rows || im.cols() != cols) throw Error(ErrorKind::InvalidInput, "IDX images must share one size");
    for (double v : im.pixels()) img.put(static_cast<char>(std::clamp(std::lround(v * 255.0), 0L, 255L)));
    const int label = std::stoi(dataset.labels[i]);
    if (label < 0 || label > 255) throw Error(ErrorKind::InvalidInput, "IDX labels must be in [0, 255]");
    lab.put(static_cast<char>(label));
  }
}

// --- PGM / manifests ---------------------------------------------------------

Image load_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FormatError, "cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  if (pgm_token(bytes, pos) != "P5") throw Error(ErrorKind::FormatError, "not a binary PGM (P5): " + path.string());
  const std::size_t width = pgm_number(bytes, pos, path);
  const std::size_t height = pgm_number(bytes, pos, path);
  const std::size_t maxval = pgm_number(bytes, pos, path);
  if (width == 0 || height == 0 || maxval == 0 || maxval > 65535) {
    throw Error(ErrorKind::FormatError, "malformed PGM header in " + path.string());
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  const std::size_t n = width * height;
  if (bytes.size() < pos + n * bytes_per) throw Error(ErrorKind::FormatError, "truncated PGM data in " + path.string());

  std::vector<double> px(n);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t raw = bytes_per == 1 ? bytes[pos + k]
                                           : (std::size_t{bytes[pos + 2 * k]} << 8) | bytes[pos + 2 * k + 1];
    if (raw > maxval) throw Error(ErrorKind::FormatError, "PGM sample exceeds maxval in " + path.string());
    px[k] = static_cast<double>(raw) * scale;
  }
  return Image(height, width, std::move(px));
}

void save_pgm(const fs::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::FormatError, "cannot write " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n65535\n";
  double peak = 0.0;
  for (double v : image.pixels()) peak = std::max(peak, v);
  const double scale = peak > 0.0 ? 65535.0 / peak : 0.0;
  for (double v : image.pixels()) {
    const auto q = static_cast<unsigned>(std::clamp(std::lround(v * scale), 0L, 65535L));
    out.put(static_cast<char>(q >> 8));
    out.put(static_cast<char>(q & 0xff));
  }
}

LabeledDataset load_directory(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorKind::FormatError, "cannot open manifest " + manifest_path.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"path", "label"}) {
    throw Error(ErrorKind::FormatError, manifest_path.string() + ": header must be `path,label`");
  }
  const fs::path base = manifest_path.parent_path();
  LabeledDataset out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorKind::FormatError, manifest_path.string() + ":" + std::to_string(line_no) +
                                              ": expected `path,label`");
    }
    const fs::path p = fs::path(fields[0]).is_absolute() ? fs::path(fields[0]) : base / fields[0];
    if (!fs::exists(p)) throw Error(ErrorKind::FormatError, "missing image file " + p.string());
    Image image = load_pgm(p);
    if (!out.empty() && (image.rows() != out.images.front().rows() || image.cols() != out.images.front().cols())) {
      throw Error(ErrorKind::FormatError, "inconsistent image size in " + p.string());
    }
    out.push_back(std::move(image), fields[1]);
  }
  return out;
}

void save_directory(const LabeledDataset& dataset, const fs::path& manifest_path, std::string_view image_prefix) {
  const fs::path base = manifest_path.parent_path();
  fs::create_directories(base / "images");
  std::ofstream manifest(manifest_path);
  if (!manifest) throw Error(ErrorKind::FormatError, "cannot write " + manifest_path.string());
  manifest << "path,label\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "%05zu.pgm", i);
    const fs::path rel = fs::path("images") / (std::string(image_prefix) + "_" + name);
    save_pgm(base / rel, dataset.images[i]);
    manifest << rel.generic_string() << ',' << dataset.labels[i] << '\n';
  }
}

// --- Synthetic generative model ----------------------------------------------

Template make_template(std::string_view name, std::size_t size) {
  Image image(size, size);
  const double c = 0.5 * (static_cast<double>(size) - 1.0);
  // Shapes are designed for size 32 and scaled with the canvas.
  const double u = static_cast<double>(size) / 32.0;
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t col = 0; col < size; ++col) {
      const double x = (static_cast<double>(col) - c) / u;
      const double y = (static_cast<double>(r) - c) / u;
      const double rad = std::hypot(x, y);
      double v = 0.0;
      if (name == "blob") {
        v = std::exp(-(x * x + y * y) / (2.0 * 3.5 * 3.5));
      } else if (name == "ring") {
        v = std::exp(-(rad - 6.0) * (rad - 6.0) / (2.0 * 1.2 * 1.2));
      } else if (name == "cross") {
        const double bar_h = std::max(std::abs(x) - 6.5, std::abs(y) - 1.5);
        const double bar_v = std::max(std::abs(y) - 6.5, std::abs(x) - 1.5);
        v = soft_inside(std::min(bar_h, bar_v));
      } else if (name == "crescent") {
        const double outer = rad - 7.0;
        const double inner = 6.0 - std::hypot(x - 3.5, y);
        v = soft_inside(std::max(outer, inner));
      } else {
        throw Error(ErrorKind::InvalidInput, "unknown template '" + std::string(name) + "'");
      }
      image(r, col) = v;
    }
  }
  return {std::string(name), std::move(image)};
}

std::vector<Template> default_templates(std::size_t size) {
  return {make_template("blob", size), make_template("ring", size), make_template("cross", size),
          make_template("crescent", size)};
}

void validate(const DeformationSpec& spec) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw Error(ErrorKind::InvalidInput, "deformation field '" + field + "' " + why);
  };
  if (!(spec.max_translation >= 0.0) || !std::isfinite(spec.max_translation)) bad("max_translation", "must be >= 0");
  if (!(spec.scale_min > 0.0) || !std::isfinite(spec.scale_min)) bad("scale_min", "must be > 0");
  if (!(spec.scale_max >= spec.scale_min) || !std::isfinite(spec.scale_max)) bad("scale_max", "must be >= scale_min");
  if (!(spec.max_shear >= 0.0) || !std::isfinite(spec.max_shear)) bad("max_shear", "must be >= 0");
}

Image warp(const Image& image, const Deformation& g) {
  const double cr = 0.5 * (static_cast<double>(image.rows()) - 1.0);
  const double cc = 0.5 * (static_cast<double>(image.cols()) - 1.0);
  // Forward map on (x, y) = (col, row) offsets from center: A = scale * [[1, shear], [0, 1]].
  // Inverse: A^-1 = (1 / scale) * [[1, -shear], [0, 1]].
  const double inv = 1.0 / g.scale;
  Image out(image.rows(), image.cols());
  for (std::size_t r = 0; r < image.rows(); ++r) {
    for (std::size_t c = 0; c < image.cols(); ++c) {
      const double x = static_cast<double>(c) - cc - g.tx;
      const double y = static_cast<double>(r) - cr - g.ty;
      const double sx = inv * (x - g.shear * y);
      const double sy = inv * y;
      out(r, c) = image.sample(cr + sy, cc + sx);
    }
  }
  return out;
}

std::optional<Image> deform(const Image& image, const Deformation& g) {
  const double mass = image.mass();
  Image out = warp(image, g);
  const double warped_mass = out.mass();
  // Without losses the warp scales mass by det(A) = scale^2.
  if (!(warped_mass >= 0.9 * g.scale * g.scale * mass)) return std::nullopt;
  const double factor = mass / warped_mass;
  if (factor != 1.0) {
    for (double& v : out.pixels()) v *= factor;
  }
  return out;
}

LabeledDataset generate_synthetic(const std::vector<Template>& templates, const DeformationSpec& spec) {
  if (templates.empty()) throw Error(ErrorKind::InvalidInput, "need at least one template");
  validate(spec);
  for (const auto& t : templates) {
    validate_image(t.image);
  }

  LabeledDataset out;
  for (std::size_t k = 0; k < templates.size(); ++k) {
    const Template& tpl = templates[k];
    Random rng = Random::stream(spec.seed, k);
    for (std::size_t j = 0; j < spec.count; ++j) {
      bool done = false;
      for (int attempt = 0; attempt <= 100 && !done; ++attempt) {
        Deformation g;
        g.tx = rng.uniform(-spec.max_translation, spec.max_translation);
        g.ty = rng.uniform(-spec.max_translation, spec.max_translation);
        g.scale = rng.uniform(spec.scale_min, spec.scale_max);
        g.shear = rng.uniform(-spec.max_shear, spec.max_shear);
        std::optional<Image> sample = deform(tpl.image, g);
        if (!sample) continue;
        out.push_back(std::move(*sample), tpl.name);
        done = true;
      }
      if (!done) {
        throw Error(ErrorKind::GenerationFailed, "template '" + tpl.name + "': 100 redraws all pushed over 10% of the mass off-frame");
      }
    }
  }
  return out;
}

}  // namespace rcdt
