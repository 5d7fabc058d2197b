#include <iostream>

#include <CLI11.hpp>

#include "stiefelgd/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ground states on the discretized Stiefel manifold"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool log_frames = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "INI run description")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, "Override [output] directory");
    sub->add_option("--seed", seed, "Override [model] seed");
  };

  auto* solve = app.add_subcommand("solve", "Run the configured methods");
  add_common(solve);
  solve->add_flag("--log-frames", log_frames, "Keep every iterate in memory");

  auto* oracle = app.add_subcommand("oracle", "Dense eigenpairs of the linear (kappa = 0) problem");
  add_common(oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  stiefelgd::CliOverrides overrides;
  if (!out_dir.empty()) overrides.out_dir = out_dir;
  if (app.got_subcommand(solve) ? solve->count("--seed") : oracle->count("--seed")) {
    overrides.seed = seed;
  }
  overrides.log_frames = log_frames;

  try {
    if (app.got_subcommand(solve)) return stiefelgd::run_solve(config, overrides, std::cerr);
    return stiefelgd::run_oracle(config, overrides, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
