#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sectorial/cli/config.hpp"
#include "sectorial/cli/report.hpp"

namespace sectorial::cli {

struct RunEnv {
  int threads = 1;
  std::string out_dir;
};

// parse() reads the experiment block and must validate everything; run()
// only executes. The runner finalizes the config in between, so unknown
// keys are rejected before any computation.
class Command {
 public:
  virtual ~Command() = default;
  virtual void parse(Section& exp, const ExperimentConfig& cfg) = 0;
  virtual CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) = 0;
};

const std::vector<std::string>& subcommand_names();
std::unique_ptr<Command> make_command(const std::string& name);  // nullptr if unknown

struct RunOptions {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<std::string> out_dir;  // overrides output.dir
};

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitConfig = 2, kExitRuntime = 3 };

struct RunOutcome {
  int exit_code = kExitOk;
  std::string error;  // set when the run did not complete
  std::string out_dir;
  std::string config_hash;
  std::vector<Assertion> assertions;
  json summary;
  std::vector<std::string> files;  // relative to out_dir, manifest last
  double wall_seconds = 0.0;
};

// Parses, validates, runs and writes every report plus manifest.json.
RunOutcome run_subcommand(const std::string& name, const json& doc, const RunOptions& opts);

// Factories, one per family of subcommands.
std::unique_ptr<Command> make_simulate();
std::unique_ptr<Command> make_verify_cov();
std::unique_ptr<Command> make_verify_lnd();
std::unique_ptr<Command> make_verify_a2();
std::unique_ptr<Command> make_verify_a3();
std::unique_ptr<Command> make_sojourn();
std::unique_ptr<Command> make_small_ball();
std::unique_ptr<Command> make_chung();
std::unique_ptr<Command> make_modulus();
std::unique_ptr<Command> make_dimension();
std::unique_ptr<Command> make_level_set();
std::unique_ptr<Command> make_local_time();
std::unique_ptr<Command> make_cover();

}  // namespace sectorial::cli
