#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("rcdt_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" RCDT_CLI_PATH "' " + args + " 2>'" + err.string() + "'";
    Outcome r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 256> buf;
    while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
  }

  fs::path write_config(const std::string& name, const json& j) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  // Small and fast.
  json small_config(const std::string& out) {
    return json{{"out", out},
                {"seed", 7},
                {"transform", {{"n_angles", 30}}},
                {"gen", {{"train_count", 20}, {"test_count", 10}, {"ood_count", 10}}}};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenWritesManifestsAndIsDeterministic) {
  const fs::path cfg = write_config("c.json", small_config("a"));
  const Outcome a = run("gen --config c.json");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, "a/gen.json\n");

  const json report = json::parse(slurp(dir_ / "a/gen.json"));
  EXPECT_EQ(report["counts"]["train"].size(), 3u);
  EXPECT_EQ(report["counts"]["test"].size(), 4u);

  std::ifstream test(dir_ / "a/test.csv");
  std::string line;
  std::size_t ood = 0, rows = 0;
  std::getline(test, line);
  while (std::getline(test, line)) {
    ++rows;
    ood += line.ends_with(",__ood__");
  }
  EXPECT_EQ(rows, 40u);
  EXPECT_EQ(ood, 10u);

  ASSERT_EQ(run("gen --config c.json --out b").code, 0);
  EXPECT_EQ(slurp(dir_ / "a/train.csv"), slurp(dir_ / "b/train.csv"));
  for (const auto& e : fs::directory_iterator(dir_ / "a/images")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b/images" / e.path().filename())) << e.path();
  }
}

TEST_F(Cli, FlagsWorkBeforeOrAfterSubcommand) {
  write_config("c.json", small_config("ignored"));
  EXPECT_EQ(run("--out x gen --config c.json").code, 0);
  EXPECT_EQ(run("gen --config c.json --out y").code, 0);
  EXPECT_EQ(slurp(dir_ / "x/train.csv").size(), slurp(dir_ / "y/train.csv").size());
}

TEST_F(Cli, NegativeScaleIsConfigError) {
  json j = small_config("a");
  j["gen"]["scale_min"] = -0.5;
  write_config("c.json", j);
  const Outcome r = run("gen --config c.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("gen.scale_min"), std::string::npos) << r.err;
}

TEST_F(Cli, UnknownKeyAndBadJsonAreConfigErrors) {
  json j = small_config("a");
  j["gen"]["colour"] = 1;
  write_config("c.json", j);
  const Outcome r = run("gen --config c.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("gen.colour"), std::string::npos) << r.err;

  std::ofstream(dir_ / "bad.json") << "{ \"seed\": ";
  EXPECT_EQ(run("gen --config bad.json").code, 2);
  EXPECT_EQ(run("gen --config missing.json").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("eval --alpha 1.5 --config c.json").code, 2);
}

TEST_F(Cli, ZeroCountWarnsAndWritesEmptyManifest) {
  json j = small_config("a");
  j["gen"]["test_count"] = 0;
  j["gen"]["ood_count"] = 0;
  write_config("c.json", j);
  const Outcome r = run("gen --config c.json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  std::ifstream test(dir_ / "a/test.csv");
  std::string header, line;
  std::getline(test, header);
  EXPECT_FALSE(std::getline(test, line));
}

TEST_F(Cli, TrainSummaryAndByteIdenticalModels) {
  write_config("c.json", small_config("a"));
  ASSERT_EQ(run("gen --config c.json").code, 0);
  const Outcome t = run("train --config c.json");
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_EQ(t.out, "a/train_summary.json\n");
  const json summary = json::parse(slurp(dir_ / "a/train_summary.json"));
  ASSERT_EQ(summary["classes"].size(), 3u);
  for (const auto& c : summary["classes"]) {
    EXPECT_EQ(c["n_fit"].get<int>() + c["n_validation"].get<int>(), 20);
    EXPECT_GT(c["bandwidth"].get<double>(), 0.0);
  }

  const std::string first = slurp(dir_ / "a/model.rcdt");
  ASSERT_FALSE(first.empty());
  ASSERT_EQ(run("train --config c.json").code, 0);
  EXPECT_EQ(first, slurp(dir_ / "a/model.rcdt"));

  ASSERT_EQ(run("train --config c.json --seed 8").code, 0);
  EXPECT_NE(first, slurp(dir_ / "a/model.rcdt"));
}

TEST_F(Cli, CorruptManifestIsFormatError) {
  write_config("c.json", small_config("a"));
  ASSERT_EQ(run("gen --config c.json").code, 0);
  std::ofstream(dir_ / "a/train.csv") << "path,label\nimages/nope.pgm,blob\n";
  const Outcome r = run("train --config c.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope.pgm"), std::string::npos) << r.err;
}

TEST_F(Cli, MissingModelIsConfigError) {
  write_config("c.json", small_config("a"));
  ASSERT_EQ(run("gen --config c.json").code, 0);
  EXPECT_EQ(run("eval --config c.json").code, 2);
}

TEST_F(Cli, EvalReportsEveryAlpha) {
  write_config("c.json", small_config("a"));
  ASSERT_EQ(run("gen --config c.json").code, 0);
  ASSERT_EQ(run("train --config c.json").code, 0);
  const Outcome e = run("eval --config c.json --alpha 0,0.01,0.05,0.1");
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(e.out, "a/report.json\n");

  const json report = json::parse(slurp(dir_ / "a/report.json"));
  ASSERT_EQ(report["results"].size(), 4u);
  EXPECT_EQ(report["results"][0]["n_rejected"].get<int>(), 0);
  int previous = 0;
  for (const auto& r : report["results"]) {
    const int rejected = r["n_rejected"].get<int>();
    EXPECT_GE(rejected, previous);
    previous = rejected;

    int total = 0, correct = 0;
    const auto& counts = r["confusion"]["counts"];
    const auto& rows = r["confusion"]["rows"];
    const auto& cols = r["confusion"]["columns"];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const int n = counts[i][j].get<int>();
        total += n;
        const bool ok = rows[i] == "__ood__" ? cols[j] == "reject" : rows[i] == cols[j];
        if (ok) correct += n;
      }
    }
    EXPECT_EQ(total, 40);
    EXPECT_EQ(correct, r["n_correct"].get<int>());
    EXPECT_DOUBLE_EQ(r["accuracy"].get<double>(), 100.0 * correct / total);
  }

  // No rejection at alpha 0, so every OOD sample counts as an error.
  EXPECT_LE(report["results"][0]["accuracy"].get<double>(), 75.0);

  std::ifstream curves(dir_ / "a/likelihood_curves.csv");
  std::string line;
  std::getline(curves, line);
  EXPECT_EQ(line, "class,distance,likelihood");
  std::string last_class;
  double last = 2.0;
  std::size_t n = 0;
  while (std::getline(curves, line)) {
    std::stringstream ss(line);
    std::string cls, x, l;
    std::getline(ss, cls, ',');
    std::getline(ss, x, ',');
    std::getline(ss, l, ',');
    const double value = std::strtod(l.c_str(), nullptr);
    if (cls != last_class) last = 2.0;
    EXPECT_LE(value, last + 1e-15) << line;
    EXPECT_GE(value, 0.0);
    EXPECT_LE(value, 1.0);
    last = value;
    last_class = cls;
    ++n;
  }
  EXPECT_EQ(n, 3u * 256u);

  std::ifstream samples(dir_ / "a/samples.csv");
  std::getline(samples, line);
  EXPECT_EQ(line, "alpha,index,true_label,nearest_class,distance,likelihood,decision");
  std::size_t rows = 0;
  while (std::getline(samples, line)) ++rows;
  EXPECT_EQ(rows, 4u * 40u);
}

TEST_F(Cli, EvalIsByteIdenticalAcrossRuns) {
  write_config("c.json", small_config("a"));
  ASSERT_EQ(run("gen --config c.json").code, 0);
  ASSERT_EQ(run("train --config c.json").code, 0);
  ASSERT_EQ(run("eval --config c.json").code, 0);
  const std::string report = slurp(dir_ / "a/report.json");
  const std::string samples = slurp(dir_ / "a/samples.csv");
  ASSERT_EQ(run("eval --config c.json").code, 0);
  EXPECT_EQ(report, slurp(dir_ / "a/report.json"));
  EXPECT_EQ(samples, slurp(dir_ / "a/samples.csv"));
}

TEST_F(Cli, PredictWritesDecisionsPerAlpha) {
  write_config("c.json", small_config("a"));
  ASSERT_EQ(run("gen --config c.json").code, 0);
  ASSERT_EQ(run("train --config c.json").code, 0);
  const Outcome p = run("predict --config c.json --alpha 0.05");
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(p.out, "a/predictions.json\n");
  const json j = json::parse(slurp(dir_ / "a/predictions.json"));
  ASSERT_FALSE(j["predictions"].empty());
  for (const auto& row : j["predictions"]) {
    EXPECT_EQ(row["distances"].size(), 3u);
    EXPECT_EQ(row["decisions"].size(), 1u);
  }
}
