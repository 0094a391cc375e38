#include <gtest/gtest.h>
#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "rcdt/data.hpp"
#include "rcdt/error.hpp"
#include "rcdt/subspace.hpp"

using namespace rcdt;
namespace fs = std::filesystem;

namespace {

class DataFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(::testing::TempDir()) / (std::string("rcdt_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

using Bytes = std::vector<unsigned char>;

void put_be32(Bytes& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<unsigned char>(v >> s));
}

void write_file(const fs::path& p, const Bytes& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

Bytes idx_images(std::uint32_t magic, std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                 const Bytes& pixels) {
  Bytes b;
  put_be32(b, magic);
  put_be32(b, count);
  put_be32(b, rows);
  put_be32(b, cols);
  b.insert(b.end(), pixels.begin(), pixels.end());
  return b;
}

Bytes idx_labels(std::uint32_t magic, const Bytes& labels) {
  Bytes b;
  put_be32(b, magic);
  put_be32(b, static_cast<std::uint32_t>(labels.size()));
  b.insert(b.end(), labels.begin(), labels.end());
  return b;
}

Bytes pgm8(std::size_t w, std::size_t h, const Bytes& px) {
  const std::string head = "P5\n# made by hand\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  Bytes b(head.begin(), head.end());
  b.insert(b.end(), px.begin(), px.end());
  return b;
}

Bytes pgm16(std::size_t w, std::size_t h, const std::vector<unsigned>& px) {
  const std::string head = "P5 " + std::to_string(w) + " " + std::to_string(h) + " 65535\n";
  Bytes b(head.begin(), head.end());
  for (unsigned v : px) {
    b.push_back(static_cast<unsigned char>(v >> 8));
    b.push_back(static_cast<unsigned char>(v & 0xff));
  }
  return b;
}

template <class F>
Error capture(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected an rcdt::Error";
  return Error(ErrorKind::InvalidInput, "none");
}

Image disk(std::size_t size, double radius) {
  Image im(size, size);
  const double c = 0.5 * (static_cast<double>(size) - 1.0);
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t q = 0; q < size; ++q) {
      const double d = std::hypot(static_cast<double>(r) - c, static_cast<double>(q) - c) - radius;
      im(r, q) = std::clamp(0.5 - d, 0.0, 1.0);
    }
  return im;
}

}  // namespace

// --- IDX ---------------------------------------------------------------------

TEST_F(DataFiles, IdxHappyPath) {
  write_file(dir_ / "img", idx_images(0x803, 2, 2, 3, {0, 255, 51, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  write_file(dir_ / "lab", idx_labels(0x801, {7, 3}));
  const LabeledDataset d = load_idx(dir_ / "img", dir_ / "lab");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.labels[0], "7");
  EXPECT_EQ(d.labels[1], "3");
  EXPECT_EQ(d.images[0].rows(), 2u);
  EXPECT_EQ(d.images[0].cols(), 3u);
  EXPECT_EQ(d.images[0](0, 1), 1.0);
  EXPECT_DOUBLE_EQ(d.images[0](0, 2), 0.2);
  EXPECT_DOUBLE_EQ(d.images[1](1, 2), 9.0 / 255.0);
}

TEST_F(DataFiles, IdxReadsGzip) {
  const Bytes img = idx_images(0x803, 1, 2, 2, {10, 20, 30, 255});
  gzFile f = gzopen((dir_ / "img.gz").c_str(), "wb");
  gzwrite(f, img.data(), static_cast<unsigned>(img.size()));
  gzclose(f);
  write_file(dir_ / "lab", idx_labels(0x801, {1}));
  const LabeledDataset d = load_idx(dir_ / "img.gz", dir_ / "lab");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.images[0](1, 1), 1.0);
}

TEST_F(DataFiles, IdxWrongMagicNamesExpected) {
  write_file(dir_ / "img", idx_images(0x801, 1, 1, 1, {0}));
  write_file(dir_ / "lab", idx_labels(0x801, {0}));
  const Error e = capture([&] { load_idx(dir_ / "img", dir_ / "lab"); });
  EXPECT_EQ(e.kind(), ErrorKind::FormatError);
  EXPECT_NE(std::string(e.what()).find("0x00000803"), std::string::npos) << e.what();
}

TEST_F(DataFiles, IdxCountMismatch) {
  write_file(dir_ / "img", idx_images(0x803, 2, 1, 1, {0, 1}));
  write_file(dir_ / "lab", idx_labels(0x801, {0}));
  EXPECT_EQ(capture([&] { load_idx(dir_ / "img", dir_ / "lab"); }).kind(), ErrorKind::FormatError);
}

TEST_F(DataFiles, IdxTruncated) {
  write_file(dir_ / "img", idx_images(0x803, 2, 2, 2, {0, 1, 2, 3, 4}));
  write_file(dir_ / "lab", idx_labels(0x801, {0, 1}));
  EXPECT_EQ(capture([&] { load_idx(dir_ / "img", dir_ / "lab"); }).kind(), ErrorKind::FormatError);
  Bytes header = idx_images(0x803, 1, 1, 1, {});
  header.resize(10);
  write_file(dir_ / "img", header);
  EXPECT_EQ(capture([&] { load_idx(dir_ / "img", dir_ / "lab"); }).kind(), ErrorKind::FormatError);
}

TEST_F(DataFiles, IdxRoundTrip) {
  LabeledDataset d;
  d.push_back(Image(2, 2, {0.0, 1.0, 0.2, 0.4}), "4");
  d.push_back(Image(2, 2, {1.0, 1.0, 0.0, 0.0}), "9");
  save_idx(d, dir_ / "i", dir_ / "l");
  const LabeledDataset back = load_idx(dir_ / "i", dir_ / "l");
  EXPECT_EQ(back.images, d.images);
  EXPECT_EQ(back.labels, d.labels);
}

// --- PGM / manifest ----------------------------------------------------------

TEST_F(DataFiles, Pgm8And16BitScaling) {
  write_file(dir_ / "a.pgm", pgm8(2, 1, {255, 0}));
  write_file(dir_ / "b.pgm", pgm16(1, 2, {65535, 257}));
  const Image a = load_pgm(dir_ / "a.pgm");
  EXPECT_EQ(a.rows(), 1u);
  EXPECT_EQ(a.cols(), 2u);
  EXPECT_EQ(a(0, 0), 1.0);
  const Image b = load_pgm(dir_ / "b.pgm");
  EXPECT_EQ(b.rows(), 2u);
  EXPECT_EQ(b(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(b(1, 0), 257.0 / 65535.0);
}

TEST_F(DataFiles, PgmMalformedHeaderNamesPath) {
  write_text(dir_ / "bad.pgm", "P2\n2 2\n255\n0 0 0 0\n");
  Error e = capture([&] { load_pgm(dir_ / "bad.pgm"); });
  EXPECT_EQ(e.kind(), ErrorKind::FormatError);
  EXPECT_NE(std::string(e.what()).find("bad.pgm"), std::string::npos);
  write_text(dir_ / "bad2.pgm", "P5\nx 2\n255\n");
  e = capture([&] { load_pgm(dir_ / "bad2.pgm"); });
  EXPECT_NE(std::string(e.what()).find("bad2.pgm"), std::string::npos);
}

TEST_F(DataFiles, ManifestWithOutOfClassLabel) {
  fs::create_directories(dir_ / "px");
  write_file(dir_ / "px/0.pgm", pgm8(2, 2, {1, 2, 3, 4}));
  write_file(dir_ / "px/1.pgm", pgm8(2, 2, {4, 3, 2, 1}));
  write_file(dir_ / "px/2.pgm", pgm8(2, 2, {0, 9, 0, 9}));
  write_text(dir_ / "m.csv", "path,label\npx/0.pgm,a\npx/1.pgm,a\npx/2.pgm,__ood__\n");
  const LabeledDataset d = load_directory(dir_ / "m.csv");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(std::count(d.labels.begin(), d.labels.end(), "a"), 2);
  EXPECT_EQ(d.labels[2], kOutOfClass);
}

TEST_F(DataFiles, ManifestMissingFileNamesPath) {
  write_text(dir_ / "m.csv", "path,label\nnowhere/x.pgm,a\n");
  const Error e = capture([&] { load_directory(dir_ / "m.csv"); });
  EXPECT_EQ(e.kind(), ErrorKind::FormatError);
  EXPECT_NE(std::string(e.what()).find("nowhere/x.pgm"), std::string::npos) << e.what();
}

TEST_F(DataFiles, ManifestInconsistentSizesAndBadHeader) {
  write_file(dir_ / "a.pgm", pgm8(2, 2, {1, 2, 3, 4}));
  write_file(dir_ / "b.pgm", pgm8(3, 1, {1, 2, 3}));
  write_text(dir_ / "m.csv", "path,label\na.pgm,x\nb.pgm,x\n");
  Error e = capture([&] { load_directory(dir_ / "m.csv"); });
  EXPECT_EQ(e.kind(), ErrorKind::FormatError);
  EXPECT_NE(std::string(e.what()).find("b.pgm"), std::string::npos);
  write_text(dir_ / "h.csv", "file,class\na.pgm,x\n");
  EXPECT_EQ(capture([&] { load_directory(dir_ / "h.csv"); }).kind(), ErrorKind::FormatError);
}

TEST_F(DataFiles, DirectoryRoundTripKeepsShapeAndLabels) {
  const LabeledDataset d = generate_synthetic({make_template("ring", 16)}, {2.0, 0.9, 1.1, 0.0, 3, 1});
  save_directory(d, dir_ / "set.csv", "train");
  const LabeledDataset back = load_directory(dir_ / "set.csv");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back.labels, d.labels);
  for (std::size_t i = 0; i < 3; ++i) {
    double peak = 0.0;
    for (double v : d.images[i].pixels()) peak = std::max(peak, v);
    for (std::size_t k = 0; k < d.images[i].size(); ++k) {
      EXPECT_NEAR(back.images[i].pixels()[k], d.images[i].pixels()[k] / peak, 1.0 / 65535.0);
    }
  }
}

// --- Synthetic generator -----------------------------------------------------

TEST(Synthetic, IdentitySpecReproducesTemplates) {
  const auto templates = default_templates();
  const LabeledDataset d = generate_synthetic(templates, {0.0, 1.0, 1.0, 0.0, 3, 9});
  ASSERT_EQ(d.size(), 12u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.images[i], templates[i / 3].image);
    EXPECT_EQ(d.labels[i], templates[i / 3].name);
  }
}

TEST(Synthetic, TranslationPreservesMass) {
  const Template blob = make_template("blob");
  const Image moved = warp(blob.image, {3.0, 1.0, 1.0, 0.0});
  EXPECT_NEAR(moved(15 + 1, 15 + 3), blob.image(15, 15), 1e-12);
  const auto kept = deform(blob.image, {3.0, 1.0, 1.0, 0.0});
  ASSERT_TRUE(kept);
  EXPECT_NEAR(kept->mass(), blob.image.mass(), 1e-6 * blob.image.mass());
  EXPECT_FALSE(deform(blob.image, {30.0, 0.0, 1.0, 0.0}));
}

TEST(Synthetic, HalfScaleDiskHasHalfRadius) {
  const Template t{"disk", disk(40, 8.0)};
  const Image small = warp(t.image, {0.0, 0.0, 0.5, 0.0});
  const double c = 19.5;
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t q = 0; q < 40; ++q) {
      const double rad = std::hypot(r - c, q - c);
      if (rad < 3.0) EXPECT_GT(small(r, q), 0.5) << r << "," << q;
      if (rad > 5.0) EXPECT_LT(small(r, q), 0.5) << r << "," << q;
    }
  const LabeledDataset d = generate_synthetic({t}, {0.0, 0.5, 0.5, 0.0, 1, 0});
  EXPECT_NEAR(d.images[0].mass(), t.image.mass(), 1e-9 * t.image.mass());
}

TEST(Synthetic, EverySampleKeepsTemplateMass) {
  const auto templates = default_templates();
  const LabeledDataset d = generate_synthetic(templates, {6.0, 0.8, 1.2, 0.2, 40, 3});
  ASSERT_EQ(d.size(), 160u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double m = templates[i / 40].image.mass();
    EXPECT_NEAR(d.images[i].mass(), m, 1e-6 * m);
    for (double v : d.images[i].pixels()) ASSERT_GE(v, 0.0);
  }
}

TEST(Synthetic, SeedDeterminism) {
  const auto templates = default_templates(24);
  const DeformationSpec spec{4.0, 0.8, 1.2, 0.1, 10, 77};
  const LabeledDataset a = generate_synthetic(templates, spec);
  const LabeledDataset b = generate_synthetic(templates, spec);
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.labels, b.labels);
  DeformationSpec other = spec;
  other.seed = 78;
  EXPECT_NE(generate_synthetic(templates, other).images, a.images);
}

TEST(Synthetic, ClassStreamsAreIndependentOfOtherTemplates) {
  const auto all = default_templates();
  const DeformationSpec spec{4.0, 0.8, 1.2, 0.1, 5, 12};
  const LabeledDataset both = generate_synthetic({all[0], all[1]}, spec);
  const LabeledDataset first = generate_synthetic({all[0]}, spec);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(both.images[i], first.images[i]);
}

TEST(Synthetic, ValidationNamesTheField) {
  const auto templates = default_templates();
  Error e = capture([&] { generate_synthetic(templates, {0.0, -0.5, 1.0, 0.0, 1, 0}); });
  EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  EXPECT_NE(std::string(e.what()).find("scale_min"), std::string::npos);
  e = capture([&] { generate_synthetic(templates, {-1.0, 1.0, 1.0, 0.0, 1, 0}); });
  EXPECT_NE(std::string(e.what()).find("max_translation"), std::string::npos);
  EXPECT_THROW(make_template("hexagon"), Error);
}

TEST(Synthetic, ImpossibleSpecFailsAfterRedraws) {
  const Error e = capture([] { generate_synthetic({make_template("blob")}, {200.0, 1.0, 1.0, 0.0, 1, 0}); });
  EXPECT_EQ(e.kind(), ErrorKind::GenerationFailed);
}

TEST(Synthetic, ZeroCountGivesEmptyDataset) {
  EXPECT_TRUE(generate_synthetic(default_templates(), {6.0, 0.8, 1.2, 0.0, 0, 0}).empty());
}

TEST(Synthetic, MidpointsOfSameClassStayNearestToTheirClass) {
  const auto all = default_templates();
  const std::vector<Template> in_class(all.begin(), all.begin() + 3);
  const TransformConfig cfg{60, 0, 0};
  const LabeledDataset train = generate_synthetic(in_class, {6.0, 0.8, 1.2, 0.0, 60, 100});
  const LabeledDataset pairs = generate_synthetic(in_class, {6.0, 0.8, 1.2, 0.0, 40, 200});
  const auto train_v = rcdt_forward_batch(train.images, cfg);
  const auto pair_v = rcdt_forward_batch(pairs.images, cfg);

  std::vector<SubspaceBasis> bases;
  for (std::size_t k = 0; k < 3; ++k) {
    bases.push_back(fit_subspace(std::span(train_v).subspan(60 * k, 60)));
  }
  int good = 0, total = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < 40; i += 2) {
      const auto& a = pair_v[40 * k + i];
      const auto& b = pair_v[40 * k + i + 1];
      RcdtVector mid{std::vector<double>(a.values.size()), a.fingerprint};
      for (std::size_t j = 0; j < mid.values.size(); ++j) mid.values[j] = 0.5 * (a.values[j] + b.values[j]);
      std::vector<double> d;
      for (const auto& B : bases) d.push_back(distance_to_subspace(mid, B));
      good += nearest_index(d) == k;
      ++total;
    }
  }
  EXPECT_GE(good, static_cast<int>(std::ceil(0.95 * total))) << good << "/" << total;
}
