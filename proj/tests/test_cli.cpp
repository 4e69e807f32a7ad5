#include "csl/cli.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace csl;
using namespace csl::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cslpose_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run(const std::string& args) {
  const std::string cmd = std::string(CSLPOSE_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesKeyValueLines) {
  std::istringstream is("# comment\nepochs = 3\n\nbatch_size: 4  # trailing\n  seed=9\n");
  const KeyValues kv = parse_key_values(is);
  EXPECT_EQ(kv.at("epochs"), "3");
  EXPECT_EQ(kv.at("batch_size"), "4");
  EXPECT_EQ(kv.at("seed"), "9");
  std::istringstream bad("no separator here\n");
  EXPECT_THROW(parse_key_values(bad), ConfigError);
}

TEST(Config, AppliesKeysAndRejectsUnknown) {
  toylab::ExperimentConfig cfg;
  apply_experiment_keys({{"representations", "csl-vector,angle"}, {"epochs", "7"}, {"learning_rate", "0.01"}}, cfg);
  ASSERT_EQ(cfg.representations.size(), 2u);
  EXPECT_EQ(cfg.representations[1], toylab::Representation::Angle);
  EXPECT_EQ(cfg.epochs, 7);
  EXPECT_EQ(cfg.learning_rate, 0.01);
  EXPECT_THROW(apply_experiment_keys({{"epoch", "7"}}, cfg), ConfigError);
  EXPECT_THROW(apply_experiment_keys({{"epochs", "seven"}}, cfg), ConfigError);
  EXPECT_THROW(apply_experiment_keys({{"num_restarts", "4"}}, cfg), ConfigError);
  EXPECT_THROW(apply_experiment_keys({{"representations", "pixels"}}, cfg), ConfigError);
}

TEST(Config, ManifestRoundTrip) {
  toylab::ExperimentConfig cfg;
  cfg.epochs = 12;
  cfg.learning_rate = 0.0025;
  cfg.representations = {toylab::Representation::CslImage};
  RunManifest m;
  m.command = "toy";
  m.config = experiment_keys(cfg);
  m.seeds = {1, 2, 3};
  m.outputs = {{"results", "out/results.csv"}};
  const fs::path dir = scratch("manifest");
  write_manifest_atomic(dir / "manifest.txt", m);
  EXPECT_FALSE(fs::exists(dir / "manifest.txt.tmp"));
  toylab::ExperimentConfig back;
  apply_experiment_keys(read_key_values(dir / "manifest.txt"), back);
  EXPECT_EQ(experiment_keys(back), experiment_keys(cfg));
  EXPECT_THROW(read_key_values(dir / "missing.txt"), ConfigError);
}

TEST(Parsers, ObjectsPosesSymmetries) {
  EXPECT_NO_THROW(parse_object("box:0.1,0.1,0.15"));
  EXPECT_NO_THROW(parse_object("cylinder:0.08,0.12"));
  EXPECT_THROW(parse_object("box:0.1,0.1"), ConfigError);
  EXPECT_THROW(parse_object("box:0.1,-1,0.1"), ConfigError);
  EXPECT_THROW(parse_object("sphere:1"), ConfigError);
  const Pose p = parse_pose("0,0,0,1,2,3");
  EXPECT_EQ(p.translation, Vec3d(1, 2, 3));
  EXPECT_TRUE(p.rotation.isIdentity());
  EXPECT_THROW(parse_pose("0,0,0,1,2"), ConfigError);
  const SymmetrySpec s = parse_symmetry("z:inf");
  EXPECT_TRUE(s.is_continuous());
  EXPECT_EQ(parse_symmetry("y:3").primary().axis, Vec3d(0, 1, 0));
  EXPECT_TRUE(parse_symmetry("z:4,x:2").secondary().has_value());
  EXPECT_THROW(parse_symmetry("w:2"), ConfigError);
  EXPECT_THROW(parse_symmetry("z:0"), ConfigError);
}

TEST(Commands, RoundtripReportsTinyErrors) {
  std::ostringstream out, err;
  ASSERT_EQ(cmd_roundtrip(RoundtripArgs{}, out, err), kOk) << err.str();
  std::istringstream is(out.str());
  std::string key;
  double value;
  std::map<std::string, double> fields;
  while (is >> key >> value) fields[key] = value;
  EXPECT_GT(fields.at("valid_pixels:"), 100);
  EXPECT_LT(fields.at("map_error:"), 1e-9);
  EXPECT_LT(fields.at("rotation_error:"), 1e-9);
  EXPECT_LT(fields.at("translation_error:"), 1e-9);
}

TEST(Commands, RoundtripErrorsMapToExitCodes) {
  std::ostringstream out, err;
  RoundtripArgs behind;
  behind.pose = "0,0,0,0,0,-1";
  EXPECT_EQ(cmd_roundtrip(behind, out, err), kDegenerate);
  RoundtripArgs two_axis;
  two_axis.symmetry = "z:4,x:2";
  EXPECT_EQ(cmd_roundtrip(two_axis, out, err), kBadConfig);
  RoundtripArgs bad;
  bad.object = "box:1";
  EXPECT_EQ(cmd_roundtrip(bad, out, err), kBadConfig);
}

TEST(Commands, RoundtripDumpsMaps) {
  const fs::path dir = scratch("dump");
  RoundtripArgs args;
  args.dump = dir;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_roundtrip(args, out, err), kOk);
  int bins = 0, pngs = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    bins += e.path().extension() == ".bin";
    pngs += e.path().extension() == ".png";
  }
  EXPECT_GE(bins, 2);
  EXPECT_GE(pngs, 2);
}

TEST(Commands, LosscheckPasses) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_losscheck(LosscheckArgs{200, 3}, out, err), kOk);
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
  EXPECT_NE(out.str().find("PASS pmos_le_imos"), std::string::npos);
}

TEST(Commands, ToyWritesCsvAndManifest) {
  const fs::path dir = scratch("toy");
  ToyArgs args;
  args.representation = "csl-vector";
  args.overrides = {"epochs=1", "num_restarts=1", "width=16"};
  args.out_dir = dir;
  args.quiet = true;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_toy(args, out, err), kOk) << err.str();
  const std::string csv = slurp(dir / "results.csv");
  EXPECT_EQ(csv, out.str());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_NE(csv.find("\ncsl-vector,ae,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "sweep_csl-vector.csv"));
  const std::string manifest = slurp(dir / "manifest.txt");
  EXPECT_NE(manifest.find("command: toy"), std::string::npos);
  EXPECT_NE(manifest.find("seeds: 1\n"), std::string::npos);

  // Rerunning from the manifest reproduces the CSV byte for byte.
  const fs::path again = scratch("toy_again");
  ToyArgs rerun;
  rerun.config = dir / "manifest.txt";
  rerun.out_dir = again;
  rerun.quiet = true;
  std::ostringstream out2;
  ASSERT_EQ(cmd_toy(rerun, out2, err), kOk) << err.str();
  EXPECT_EQ(slurp(again / "results.csv"), csv);
}

TEST(Commands, ToyBadConfig) {
  ToyArgs args;
  args.overrides = {"epochs=0"};
  args.out_dir = scratch("toy_bad");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_toy(args, out, err), kBadConfig);
  args.overrides = {"colour=blue"};
  EXPECT_EQ(cmd_toy(args, out, err), kBadConfig);
}

TEST(Binary, ExitCodes) {
  EXPECT_EQ(run("--version"), 0);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("roundtrip"), 0);
  EXPECT_EQ(run("roundtrip --pose 0,0,0,0,0,-1"), 3);
  EXPECT_EQ(run("roundtrip --symmetry z:4,x:2"), 2);
  EXPECT_EQ(run("toy --config /nonexistent/cfg.txt"), 2);
  EXPECT_EQ(run("losscheck --trials 50"), 0);
}
