#include "csl/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace csl::cli;
  CLI::App app{"Symmetry-aware object point representations: toy study and pose round trips"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ToyArgs toy;
  auto* toy_cmd = app.add_subcommand("toy", "Train the representation comparison on the textured disc");
  toy_cmd->add_option("-c,--config", toy.config, "Key-value config file (a manifest works too)");
  toy_cmd->add_option("-s,--set", toy.overrides, "Override one key, key=value");
  toy_cmd->add_option("-r,--representation", toy.representation, "Comma list of representations");
  toy_cmd->add_option("-o,--out", toy.out_dir, "Output directory")->capture_default_str();
  toy_cmd->add_flag("-q,--quiet", toy.quiet, "No progress log");
  toy_cmd->footer(experiment_key_help());

  RoundtripArgs rt;
  auto* rt_cmd = app.add_subcommand("roundtrip", "Render, encode, reverse and solve PnP for one scene");
  rt_cmd->add_option("--object", rt.object, "box:hx,hy,hz or cylinder:r,half_height")->capture_default_str();
  rt_cmd->add_option("--pose", rt.pose, "rx,ry,rz,tx,ty,tz (rotation vector, meters)")->capture_default_str();
  rt_cmd->add_option("--symmetry", rt.symmetry, "axis:fold, e.g. z:4, z:inf")->capture_default_str();
  rt_cmd->add_option("--noise", rt.noise, "Gaussian noise sigma on star and dash maps")->capture_default_str();
  rt_cmd->add_option("--seed", rt.seed, "Noise and RANSAC seed")->capture_default_str();
  rt_cmd->add_option("--samples", rt.ransac_samples, "RANSAC samples")->capture_default_str();
  rt_cmd->add_option("--dump", rt.dump, "Directory for .bin and .png maps");

  LosscheckArgs lc;
  auto* lc_cmd = app.add_subcommand("losscheck", "Randomized checks of the loss and star invariants");
  lc_cmd->add_option("--trials", lc.trials, "Random trials per check")->capture_default_str();
  lc_cmd->add_option("--seed", lc.seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadConfig;
  }

  if (*toy_cmd) return cmd_toy(toy, std::cout, std::cerr);
  if (*rt_cmd) return cmd_roundtrip(rt, std::cout, std::cerr);
  return cmd_losscheck(lc, std::cout, std::cerr);
}
