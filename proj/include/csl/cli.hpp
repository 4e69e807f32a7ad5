#pragma once

#include "csl/geom.hpp"
#include "csl/render.hpp"
#include "csl/symmetry.hpp"
#include "csl/toylab/study.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace csl::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInvariantViolated = 1, kBadConfig = 2, kDegenerate = 3 };

/// Bad user input; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key-value text: one `key = value` or `key: value` per line, `#`
/// starts a comment. Later keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& is);
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies known experiment keys to `cfg`. Manifest bookkeeping keys are
/// ignored so that a manifest can be fed back as a config; any other key is
/// an error.
void apply_experiment_keys(const KeyValues& kv, toylab::ExperimentConfig& cfg);
KeyValues experiment_keys(const toylab::ExperimentConfig& cfg);
/// Key reference with defaults, for --help.
std::string experiment_key_help();

struct RunManifest {
  std::string command;
  KeyValues config;
  std::vector<std::uint64_t> seeds;
  std::string version = kVersion;
  std::vector<std::pair<std::string, std::filesystem::path>> outputs;
};

void write_manifest(std::ostream& os, const RunManifest& m);
/// Writes to a temporary sibling and renames it into place.
void write_manifest_atomic(const std::filesystem::path& path, const RunManifest& m);

struct ToyArgs {
  std::optional<std::filesystem::path> config;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::string> representation;
  std::filesystem::path out_dir = "toy_out";
  bool quiet = false;
};

struct RoundtripArgs {
  std::string object = "box:0.1,0.1,0.15";
  std::string pose = "0.3,-0.2,0.5,0,0,1";  // rotation vector, translation
  std::string symmetry = "z:4";
  double noise = 0;
  std::uint64_t seed = 0;
  int ransac_samples = 16;
  std::optional<std::filesystem::path> dump;
};

struct LosscheckArgs {
  int trials = 1000;
  std::uint64_t seed = 0;
};

int cmd_toy(const ToyArgs& args, std::ostream& out, std::ostream& err);
int cmd_roundtrip(const RoundtripArgs& args, std::ostream& out, std::ostream& err);
int cmd_losscheck(const LosscheckArgs& args, std::ostream& out, std::ostream& err);

// Parsers for the roundtrip specs; throw ConfigError.
Shape parse_object(const std::string& s);
Pose parse_pose(const std::string& s);
SymmetrySpec parse_symmetry(const std::string& s);

}  // namespace csl::cli
