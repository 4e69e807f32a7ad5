#include "csl/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace csl::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T> T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config: bad value '" + v + "' for " + key);
  return out;
}

const char* const kManifestKeys[] = {"command", "version", "seeds", "output.results", "output.sweeps",
                                     "output.manifest"};

}  // namespace

KeyValues parse_key_values(std::istream& is) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto sep = line.find_first_of("=:");
    if (sep == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, sep));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(sep + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  return parse_key_values(is);
}

void apply_experiment_keys(const KeyValues& kv, toylab::ExperimentConfig& cfg) {
  for (const auto& [key, v] : kv) {
    if (key == "representations") {
      cfg.representations.clear();
      if (v == "all") {
        cfg.representations.assign(std::begin(toylab::kAllRepresentations),
                                   std::end(toylab::kAllRepresentations));
        continue;
      }
      std::istringstream names(v);
      for (std::string name; std::getline(names, name, ',');) {
        try {
          cfg.representations.push_back(toylab::parse_representation(trim(name)));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      }
    } else if (key == "epochs") {
      cfg.epochs = parse_number<int>(key, v);
    } else if (key == "batch_size") {
      cfg.batch_size = parse_number<int>(key, v);
    } else if (key == "learning_rate") {
      cfg.learning_rate = parse_number<double>(key, v);
    } else if (key == "num_restarts") {
      cfg.num_restarts = parse_number<int>(key, v);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, v);
    } else if (key == "texture_seed") {
      cfg.texture_seed = parse_number<std::uint64_t>(key, v);
    } else if (key == "fold") {
      cfg.fold = parse_number<int>(key, v);
    } else if (key == "width") {
      cfg.width = parse_number<int>(key, v);
    } else if (key == "threads") {
      cfg.threads = parse_number<int>(key, v);
    } else if (std::find(std::begin(kManifestKeys), std::end(kManifestKeys), key) ==
               std::end(kManifestKeys)) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

KeyValues experiment_keys(const toylab::ExperimentConfig& cfg) {
  std::string reps;
  for (auto r : cfg.representations) {
    if (!reps.empty()) reps += ',';
    reps += toylab::name(r);
  }
  std::ostringstream lr;
  lr.precision(17);
  lr << cfg.learning_rate;
  return {{"representations", reps},
          {"epochs", std::to_string(cfg.epochs)},
          {"batch_size", std::to_string(cfg.batch_size)},
          {"learning_rate", lr.str()},
          {"num_restarts", std::to_string(cfg.num_restarts)},
          {"seed", std::to_string(cfg.seed)},
          {"texture_seed", std::to_string(cfg.texture_seed)},
          {"fold", std::to_string(cfg.fold)},
          {"width", std::to_string(cfg.width)},
          {"threads", std::to_string(cfg.threads)}};
}

std::string experiment_key_help() {
  std::ostringstream os;
  os << "Config keys (key = value, defaults shown):\n";
  for (const auto& [k, v] : experiment_keys(toylab::ExperimentConfig{})) os << "  " << k << " = " << v << '\n';
  os << "  representations accepts a comma list or 'all'\n";
  return os.str();
}

void write_manifest(std::ostream& os, const RunManifest& m) {
  os << "command: " << m.command << '\n';
  os << "version: " << m.version << '\n';
  for (const auto& [k, v] : m.config) os << k << ": " << v << '\n';
  os << "seeds: ";
  for (std::size_t i = 0; i < m.seeds.size(); ++i) os << (i ? "," : "") << m.seeds[i];
  os << '\n';
  for (const auto& [k, p] : m.outputs) os << "output." << k << ": " << p.string() << '\n';
}

void write_manifest_atomic(const std::filesystem::path& path, const RunManifest& m) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    write_manifest(os, m);
    os.flush();
    if (!os) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace csl::cli
