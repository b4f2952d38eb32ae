#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "gbfilt/bench.hpp"
#include "gbfilt/io.hpp"
#include "gbfilt/metrics.hpp"
#include "gbfilt/model.hpp"

namespace gbf::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run gbfilt(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gbfilt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    io::write_file_atomic(path(name), text);
  }
  Signal signal(const std::string& name) const { return io::read_signal(path(name)).signal; }
  void synth_example1(std::uint64_t seed = 7) const {
    ASSERT_EQ(gbfilt({"synth", "example1", "--seed", std::to_string(seed), "--out-dir", dir_.string()}).code, kOk);
  }

  fs::path dir_;
};

const char* kIdentityModel = R"({"version": "1", "stages": [{"p": 1, "m": 0, "poly": [0, 1], "fir": [1]}]})";

TEST_F(Cli, TrainWritesNonIncreasingReport) {
  synth_example1();
  const auto r = gbfilt({"train", "-x", path("example1_train_input.csv"), "-t",
                         path("example1_train_target.csv"), "-o", path("m.json")});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::istringstream report(io::read_file(path("m.json.report.csv")));
  std::string line;
  std::getline(report, line);
  EXPECT_EQ(line, "stage,p,m,mse,iterations,converged");
  std::vector<double> mse;
  while (std::getline(report, line)) {
    std::stringstream row(line);
    std::string cell;
    for (int i = 0; i < 4; ++i) std::getline(row, cell, ',');
    mse.push_back(std::stod(cell));
  }
  ASSERT_EQ(mse.size(), 3u);
  EXPECT_LE(mse[1], mse[0] + 1e-12);
  EXPECT_LE(mse[2], mse[1] + 1e-12);
  EXPECT_EQ(load_model(path("m.json")).size(), 3u);
}

TEST_F(Cli, LengthMismatchIsADataError) {
  write("x.csv", "1\n2\n3\n4\n5\n");
  write("t.csv", "1\n2\n3\n");
  const auto r = gbfilt({"train", "-x", path("x.csv"), "-t", path("t.csv"), "-o", path("m.json"),
                         "--stages", "1:1"});
  EXPECT_EQ(r.code, kBadData);
  EXPECT_NE(r.err.find("5"), std::string::npos);
  EXPECT_NE(r.err.find("3"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("m.json")));
}

TEST_F(Cli, ZeroItersGivesIdentityPolynomials) {
  synth_example1();
  const auto r = gbfilt({"train", "-x", path("example1_train_input.csv"), "-t",
                         path("example1_train_target.csv"), "-o", path("m.json"), "--max-iters", "0",
                         "--init", "identity"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto model = load_model(path("m.json"));
  for (const auto& s : model.stages()) {
    EXPECT_EQ(s.poly.coeffs()[0], 0.0);
    EXPECT_EQ(s.poly.coeffs()[1], 1.0);
  }
}

TEST_F(Cli, BadFlagsAndConfigs) {
  EXPECT_EQ(gbfilt({"train", "--no-such-flag"}).code, kBadConfig);
  EXPECT_EQ(gbfilt({"frobnicate"}).code, kBadConfig);
  EXPECT_EQ(gbfilt({"--help"}).code, kOk);
  synth_example1();
  write("cfg.json", R"({"stages": [[1, 2]], "bogus": 1})");
  const auto r = gbfilt({"train", "-x", path("example1_train_input.csv"), "-t",
                         path("example1_train_target.csv"), "-o", path("m.json"), "--config",
                         path("cfg.json")});
  EXPECT_EQ(r.code, kBadConfig);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
  EXPECT_EQ(gbfilt({"train", "-x", path("example1_train_input.csv"), "-t",
                    path("example1_train_target.csv"), "-o", path("m.json"), "--stages", "1-2"})
                .code,
            kBadConfig);
  write("bad.csv", "1\nfoo\n");
  EXPECT_EQ(gbfilt({"train", "-x", path("bad.csv"), "-t", path("bad.csv"), "-o", path("m.json")}).code,
            kBadData);
}

TEST_F(Cli, SingularTrainingExitsFour) {
  write("x.csv", "0\n0\n0\n0\n0\n0\n");
  write("t.csv", "1\n1\n1\n1\n1\n1\n");
  const auto r = gbfilt({"train", "-x", path("x.csv"), "-t", path("t.csv"), "-o", path("m.json"),
                         "--stages", "1:2", "--ridge", "0", "--init", "identity"});
  EXPECT_EQ(r.code, kTrainFailed);
  EXPECT_NE(r.err.find("ridge"), std::string::npos);
}

TEST_F(Cli, PredictWithIdentityModelCopiesInput) {
  write("id.json", kIdentityModel);
  write("x.csv", "0.5\n-1\n2\n");
  ASSERT_EQ(gbfilt({"predict", "-m", path("id.json"), "-x", path("x.csv"), "-o", path("y.csv")}).code, kOk);
  EXPECT_EQ(signal("y.csv").vec(), (std::vector<double>{0.5, -1, 2}));
  ASSERT_EQ(gbfilt({"predict", "-m", path("id.json"), "-x", path("x.csv"), "-o", path("y2.csv")}).code, kOk);
  EXPECT_EQ(io::read_file(path("y.csv")), io::read_file(path("y2.csv")));
  EXPECT_EQ(gbfilt({"predict", "-m", path("missing.json"), "-x", path("x.csv"), "-o", path("y.csv")}).code,
            kBadConfig);
}

TEST_F(Cli, PredictMirrorsWavInput) {
  write("id.json", kIdentityModel);
  ASSERT_EQ(gbfilt({"synth", "hammerstein", "--length", "64", "--format", "wav32", "--out-dir", dir_.string()}).code,
            kOk);
  ASSERT_EQ(gbfilt({"predict", "-m", path("id.json"), "-x", path("hammerstein_input.wav"), "-o",
                    path("y.wav")})
                .code,
            kOk);
  const auto y = io::read_signal(path("y.wav"));
  EXPECT_EQ(y.format, io::SignalFormat::WavFloat32);
  EXPECT_EQ(y.signal, signal("hammerstein_input.wav"));
}

TEST_F(Cli, EvalReportsMetrics) {
  write("zero.json", R"({"version": "1", "stages": [{"p": 0, "m": 0, "poly": [0], "fir": [0]}]})");
  write("x.csv", "1\n2\n3\n");
  write("z.csv", "0\n0\n0\n");
  auto r = gbfilt({"eval", "-m", path("zero.json"), "-x", path("x.csv"), "-t", path("z.csv")});
  ASSERT_EQ(r.code, kOk) << r.err;
  auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["samples"], 3);
  EXPECT_EQ(doc["mse"], 0.0);
  EXPECT_EQ(doc["nmse"], 0.0);

  write("cube.json", R"({"version": "1", "stages": [{"p": 3, "m": 0, "poly": [0, 0, 0, 1], "fir": [1]}]})");
  write("c.csv", "1\n8\n27\n");
  r = gbfilt({"eval", "-m", path("cube.json"), "-x", path("x.csv"), "-t", path("c.csv")});
  doc = nlohmann::json::parse(r.out);
  EXPECT_LT(doc["mse"].get<double>(), 1e-10);
  EXPECT_EQ(doc["stage_cumulative_mse"].size(), 1u);
}

TEST_F(Cli, SynthIsDeterministic) {
  synth_example1(5);
  const auto first = io::read_file(path("example1_train_input.csv"));
  synth_example1(5);
  EXPECT_EQ(io::read_file(path("example1_train_input.csv")), first);
  const auto x = signal("example1_train_input.csv");
  EXPECT_EQ(x.size(), 200u);
  for (double v : x) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(signal("example1_test_target.csv"), bench::simulate_example1(signal("example1_test_input.csv")));
  EXPECT_EQ(gbfilt({"synth", "lorenz", "--out-dir", dir_.string()}).code, kBadConfig);
}

TEST_F(Cli, ExportTransforms) {
  write("m.json", R"({"version": "1", "stages": [
      {"p": 1, "m": 0, "poly": [0, 1], "fir": [1]},
      {"p": 2, "m": 0, "poly": [0, 1, 0.1], "fir": [1]}]})");
  ASSERT_EQ(gbfilt({"export-transforms", "-m", path("m.json"), "--range", "-1,1", "--points", "3", "-o",
                    path("p.csv")})
                .code,
            kOk);
  EXPECT_EQ(io::read_file(path("p.csv")), "x,stage1,stage2\n-1,-1,-0.9\n0,0,0\n1,1,1.1\n");
  ASSERT_EQ(gbfilt({"export-transforms", "-m", path("m.json"), "--range", "0,2", "--points", "2", "-o",
                    path("q.csv")})
                .code,
            kOk);
  std::istringstream q(io::read_file(path("q.csv")));
  std::string line;
  std::getline(q, line);
  std::getline(q, line);
  std::getline(q, line);
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "2.4");
  EXPECT_EQ(gbfilt({"export-transforms", "-m", path("m.json"), "--range", "1,1", "-o", path("r.csv")}).code,
            kBadConfig);
}

TEST_F(Cli, Example1EndToEnd) {
  synth_example1();
  ASSERT_EQ(gbfilt({"train", "-x", path("example1_train_input.csv"), "-t",
                    path("example1_train_target.csv"), "-o", path("m.json")})
                .code,
            kOk);
  ASSERT_EQ(gbfilt({"predict", "-m", path("m.json"), "-x", path("example1_test_input.csv"), "-o",
                    path("y.csv")})
                .code,
            kOk);
  EXPECT_LT(nmse(signal("y.csv"), signal("example1_test_target.csv")), 0.05);
}

TEST_F(Cli, ChirpGbfBeatsLinearBaseline) {
  ASSERT_EQ(gbfilt({"synth", "chirp", "--seed", "2024", "--out-dir", dir_.string()}).code, kOk);
  const std::vector<std::string> data{"-x", path("chirp_train_reference.csv"), "-t",
                                      path("chirp_train_recorded.csv")};
  auto args = std::vector<std::string>{"train"};
  args.insert(args.end(), data.begin(), data.end());
  auto base = args;
  base.insert(base.end(), {"-o", path("lin.json"), "--stages", "1:1600", "--max-iters", "0", "--init", "identity"});
  ASSERT_EQ(gbfilt(base).code, kOk);
  auto gbf = args;
  gbf.insert(gbf.end(), {"-o", path("gbf.json"), "--stages", "1:1600,5:400,5:400,5:400,5:400,5:400",
                         "--max-iters", "20", "--lr", "0.03"});
  ASSERT_EQ(gbfilt(gbf).code, kOk);
  auto eval = [&](const std::string& model) {
    const auto r = gbfilt({"eval", "-m", path(model), "-x", path("chirp_val_reference.csv"), "-t",
                           path("chirp_val_recorded.csv")});
    return nlohmann::json::parse(r.out)["mse"].get<double>();
  };
  EXPECT_LE(eval("gbf.json"), 0.8 * eval("lin.json"));
}

}  // namespace
}  // namespace gbf::cli
