#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sectorial/core/ensemble.hpp"
#include "sectorial/models/field_model.hpp"

namespace sectorial::cli {

using nlohmann::json;

// Invalid configuration; what() starts with the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Typed reader over one JSON object. Every getter records the value it
// resolved (explicit or default), so resolved() is the config with defaults
// filled in. finish() rejects keys nobody asked for.
class Section {
 public:
  Section(const json* src, std::string path);

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;

  double number(const std::string& key, std::optional<double> fallback = std::nullopt);
  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt);
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt);
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);
  std::vector<std::string> texts(const std::string& key,
                                 std::optional<std::vector<std::string>> fallback = std::nullopt);
  // Number or the literal "inf".
  double extended(const std::string& key, std::optional<double> fallback = std::nullopt);
  std::vector<double> extended_list(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt);

  Section& child(const std::string& key);

  // Path of a field for error messages.
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const;

  void finish();
  const json& resolved() const { return resolved_; }

 private:
  const json* lookup(const std::string& key);

  const json* src_;
  std::string path_;
  std::set<std::string> used_;
  std::map<std::string, std::unique_ptr<Section>> children_;
  json resolved_ = json::object();
};

struct GridConfig {
  std::vector<std::size_t> counts;
  std::size_t budget = core::Grid::kDefaultBudget;
  core::FactorLayout layout = core::FactorLayout::Auto;
};

struct OutputConfig {
  std::string dir = "out";
  bool csv = true;
  bool json_report = true;
};

struct ExperimentConfig {
  std::optional<models::FieldModel> model_block;
  std::optional<GridConfig> grid;
  std::uint64_t seed = 1;
  OutputConfig output;
  json resolved;  // canonical form, output block excluded

  const models::FieldModel& model() const { return *model_block; }
  core::Grid make_grid() const;  // throws ConfigError when there is no grid block
};

// Parses and validates everything except the experiment block, which the
// subcommand reads through `experiment`. Call finalize() afterwards.
class ConfigReader {
 public:
  explicit ConfigReader(json doc, std::optional<std::uint64_t> seed_override = std::nullopt);
  const ExperimentConfig& config() const { return cfg_; }
  Section& experiment() { return *experiment_; }
  // Checks for unknown keys and fixes the canonical form.
  void finalize();

 private:
  json doc_;
  Section root_;
  Section* experiment_ = nullptr;
  ExperimentConfig cfg_;
};

json load_json_file(const std::string& file);

// FNV-1a 64 of the canonical dump (sorted keys), as 16 hex digits.
std::string config_hash(const json& canonical);

models::FieldModel parse_model(Section& s);

}  // namespace sectorial::cli
