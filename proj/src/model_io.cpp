// Model file layout (all integers and doubles little-endian):
//
//   bytes 0..7    magic "RCDTMODL"
//   u32           format version (1)
//   u32           header length L
//   L bytes       JSON header: transform config, resolved transform,
//                 fingerprint (hex), and per-class {label, rank, n_support}
//   per class, in header order:
//     f64                      KDE bandwidth
//     f64[n_support]           validation distances
//     f64[rank]                singular values
//     f64[dimension * rank]    basis, column-major
//   u64           FNV-1a of every preceding byte

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "rcdt/classifier.hpp"
#include "rcdt/error.hpp"

namespace rcdt {

namespace {

constexpr char kMagic[8] = {'R', 'C', 'D', 'T', 'M', 'O', 'D', 'L'};

static_assert(std::endian::native == std::endian::little, "model I/O assumes a little-endian host");

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void f64s(const double* p, std::size_t n) { raw(p, n * 8); }
  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  Reader(std::span<const unsigned char> bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

  void raw(void* p, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw Error(ErrorKind::FormatError, source_ + ": model file is truncated");
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
  double f64() { double v; raw(&v, 8); return v; }
  void f64s(double* p, std::size_t n) { raw(p, n * 8); }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const unsigned char> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  model.validate();
  nlohmann::json header;
  header["transform"] = {{"n_angles", model.transform.n_angles},
                         {"n_offsets", model.transform.n_offsets},
                         {"reference_size", model.transform.reference_size}};
  header["resolved"] = {{"n_angles", model.resolved.n_angles},
                        {"n_offsets", model.resolved.n_offsets},
                        {"reference_size", model.resolved.reference_size},
                        {"extent", model.resolved.extent}};
  header["fingerprint"] = hex64(model.fingerprint());
  header["classes"] = nlohmann::json::array();
  for (std::size_t k = 0; k < model.n_classes(); ++k) {
    header["classes"].push_back({{"label", model.labels[k]},
                                 {"rank", model.bases[k].rank()},
                                 {"n_support", model.densities[k].support.size()}});
  }
  const std::string text = header.dump();

  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(ClassifierModel::kFormatVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw(text.data(), text.size());
  for (std::size_t k = 0; k < model.n_classes(); ++k) {
    const auto& d = model.densities[k];
    const auto& b = model.bases[k];
    w.f64(d.bandwidth);
    w.f64s(d.support.data(), d.support.size());
    w.f64s(b.singular_values.data(), b.rank());
    w.f64s(b.basis.data(), b.dimension() * b.rank());
  }
  w.u64(fnv1a(w.bytes()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::FormatError, "cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error(ErrorKind::FormatError, "failed writing model file " + path.string());
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FormatError, "cannot open model file " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string src = path.string();
  if (bytes.size() < sizeof kMagic + 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorKind::FormatError, src + ": not a model file");
  }
  std::uint64_t stored_sum;
  std::memcpy(&stored_sum, bytes.data() + bytes.size() - 8, 8);
  const std::span<const unsigned char> body(bytes.data(), bytes.size() - 8);
  if (fnv1a(body) != stored_sum) throw Error(ErrorKind::FormatError, src + ": checksum mismatch");

  Reader r(body, src);
  char magic[8];
  r.raw(magic, 8);
  const std::uint32_t version = r.u32();
  if (version != ClassifierModel::kFormatVersion) {
    throw Error(ErrorKind::FormatError, src + ": unsupported model format version " + std::to_string(version));
  }
  std::string text(r.u32(), '\0');
  r.raw(text.data(), text.size());

  ClassifierModel model;
  try {
    const auto header = nlohmann::json::parse(text);
    const auto& t = header.at("transform");
    model.transform = {t.at("n_angles").get<std::size_t>(), t.at("n_offsets").get<std::size_t>(),
                       t.at("reference_size").get<std::size_t>()};
    const auto& rs = header.at("resolved");
    model.resolved = {rs.at("n_angles").get<std::size_t>(), rs.at("n_offsets").get<std::size_t>(),
                      rs.at("reference_size").get<std::size_t>(), rs.at("extent").get<std::size_t>()};
    if (header.at("fingerprint").get<std::string>() != hex64(model.fingerprint())) {
      throw Error(ErrorKind::FormatError, src + ": fingerprint does not match transform");
    }
    const std::size_t dim = model.resolved.dimension();
    std::size_t class_no = 0;
    for (const auto& c : header.at("classes")) {
      const auto rank = c.at("rank").get<std::size_t>();
      const auto n_support = c.at("n_support").get<std::size_t>();
      model.labels.push_back(c.at("label").get<std::string>());

      DistanceDensity d;
      d.class_id = class_no++;
      d.bandwidth = r.f64();
      d.support.resize(n_support);
      r.f64s(d.support.data(), n_support);

      SubspaceBasis b;
      b.fingerprint = model.fingerprint();
      b.singular_values.resize(static_cast<Eigen::Index>(rank));
      r.f64s(b.singular_values.data(), rank);
      b.basis.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rank));
      r.f64s(b.basis.data(), dim * rank);

      model.densities.push_back(std::move(d));
      model.bases.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, src + ": bad model header: " + e.what());
  }
  if (r.pos() != body.size()) throw Error(ErrorKind::FormatError, src + ": trailing bytes in model file");
  model.validate();
  return model;
}

}  // namespace rcdt
