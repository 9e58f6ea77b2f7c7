#include <iostream>

#include <CLI11.hpp>

#include "sectorial/cli/commands.hpp"

using namespace sectorial::cli;

int main(int argc, char** argv) {
  CLI::App app{"Gaussian random field laboratory: simulation, verification and geometry surveys"};
  std::string sub, config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 1;

  std::string names;
  for (const auto& n : subcommand_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("subcommand", sub, "one of: " + names)->required();
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--seed", seed, "overrides rng.seed in the config");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--out", out, "output directory, overrides output.dir");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  json doc;
  try {
    doc = load_json_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  const auto res = run_subcommand(sub, doc, RunOptions{seed, threads, out});
  if (!res.error.empty()) {
    std::cerr << "error: " << res.error << '\n';
    return res.exit_code;
  }
  for (const auto& a : res.assertions)
    std::cout << (a.passed ? "ok    " : "FAIL  ") << a.name << ": " << a.detail << '\n';
  std::cout << "wrote " << res.files.size() << " files to " << res.out_dir << " (config " << res.config_hash
            << ", " << res.wall_seconds << " s)\n";
  return res.exit_code;
}
