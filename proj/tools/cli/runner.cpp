#include <chrono>
#include <filesystem>
#include <fstream>

#include "sectorial/cli/commands.hpp"
#include "sectorial/cli/params.hpp"
#include "sectorial/util/errors.hpp"

namespace sectorial::cli {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"simulate", "verify-cov", "verify-lnd", "verify-a2", "verify-a3",
                                              "sojourn",  "small-ball", "chung",      "modulus",   "dimension",
                                              "level-set", "local-time", "cover"};
  return names;
}

std::unique_ptr<Command> make_command(const std::string& name) {
  if (name == "simulate") return make_simulate();
  if (name == "verify-cov") return make_verify_cov();
  if (name == "verify-lnd") return make_verify_lnd();
  if (name == "verify-a2") return make_verify_a2();
  if (name == "verify-a3") return make_verify_a3();
  if (name == "sojourn") return make_sojourn();
  if (name == "small-ball") return make_small_ball();
  if (name == "chung") return make_chung();
  if (name == "modulus") return make_modulus();
  if (name == "dimension") return make_dimension();
  if (name == "level-set") return make_level_set();
  if (name == "local-time") return make_local_time();
  if (name == "cover") return make_cover();
  return nullptr;
}

namespace {

json assertions_json(const std::vector<Assertion>& list) {
  json a = json::array();
  for (const auto& x : list) a.push_back({{"name", x.name}, {"passed", x.passed}, {"detail", x.detail}});
  return a;
}

}  // namespace

RunOutcome run_subcommand(const std::string& name, const json& doc, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome res;
  auto cmd = make_command(name);
  if (!cmd) {
    res.exit_code = kExitConfig;
    res.error = "unknown subcommand \"" + name + "\"";
    return res;
  }
  std::optional<ConfigReader> reader;
  try {
    reader.emplace(doc, opts.seed);
    cmd->parse(reader->experiment(), reader->config());
    reader->finalize();
  } catch (const ConfigError& e) {
    res.exit_code = kExitConfig;
    res.error = e.what();
    return res;
  } catch (const DomainError& e) {
    res.exit_code = kExitConfig;
    res.error = std::string("config: ") + e.what();
    return res;
  } catch (const BudgetError& e) {
    res.exit_code = kExitConfig;
    res.error = std::string("grid: ") + e.what();
    return res;
  }
  const ExperimentConfig& cfg = reader->config();
  res.config_hash = config_hash(cfg.resolved);
  res.out_dir = opts.out_dir.value_or(cfg.output.dir);

  CommandOutput out;
  try {
    fs::create_directories(res.out_dir);
    out = cmd->run(cfg, RunEnv{opts.threads, res.out_dir});
  } catch (const ResolutionError& e) {
    res.exit_code = kExitRuntime;
    res.error = std::string("resolution: ") + e.what();
    return res;
  } catch (const BudgetError& e) {
    res.exit_code = kExitRuntime;
    res.error = std::string("budget: ") + e.what();
    return res;
  } catch (const std::exception& e) {
    res.exit_code = kExitRuntime;
    res.error = e.what();
    return res;
  }

  res.files = out.extra_files;
  if (cfg.output.csv) {
    for (std::size_t k = 0; k < out.tables.size(); ++k) {
      const auto& t = out.tables[k];
      const std::string file = k == 0 ? name + ".csv" : name + "_" + t.name() + ".csv";
      std::ofstream f(fs::path(res.out_dir) / file, std::ios::binary);
      t.write_csv(f);
      res.files.push_back(file);
    }
  }
  if (cfg.output.json_report) {
    json report = {{"subcommand", name},
                   {"config_hash", res.config_hash},
                   {"config", cfg.resolved},
                   {"summary", out.summary},
                   {"assertions", assertions_json(out.assertions)},
                   {"passed", out.passed()}};
    std::ofstream f(fs::path(res.out_dir) / (name + ".json"), std::ios::binary);
    f << report.dump(2) << '\n';
    res.files.push_back(name + ".json");
  }
  res.assertions = out.assertions;
  res.summary = out.summary;
  res.exit_code = out.passed() ? kExitOk : kExitAssertion;
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  res.files.push_back("manifest.json");
  json manifest = {{"subcommand", name},
                   {"config_hash", res.config_hash},
                   {"code_version", SECTORIAL_VERSION},
                   {"seed", cfg.seed},
                   {"threads", opts.threads},
                   {"wall_time_seconds", res.wall_seconds},
                   {"files", res.files},
                   {"assertions", assertions_json(out.assertions)},
                   {"exit_code", res.exit_code}};
  std::ofstream f(fs::path(res.out_dir) / "manifest.json", std::ios::binary);
  f << manifest.dump(2) << '\n';
  return res;
}

// ---- parameter helpers

models::Point point_param(Section& s, const std::string& key, std::size_t dim, std::optional<models::Point> fallback) {
  auto p = s.numbers(key, fallback);
  if (p.size() != dim) s.fail(key, "needs " + std::to_string(dim) + " coordinates, got " + std::to_string(p.size()));
  return p;
}

models::Box box_param(Section& s, const std::string& key, std::size_t dim, std::optional<models::Box> fallback) {
  Section& b = s.child(key);
  const auto lo = b.numbers("lo", fallback ? std::optional(fallback->lo) : std::nullopt);
  const auto hi = b.numbers("hi", fallback ? std::optional(fallback->hi) : std::nullopt);
  if (lo.size() != dim || hi.size() != dim) b.fail("lo", "needs " + std::to_string(dim) + " coordinates");
  for (std::size_t j = 0; j < dim; ++j)
    if (!(hi[j] > lo[j])) b.fail("hi", "each hi must exceed lo");
  return {lo, hi};
}

std::vector<double> scale_param(Section& s, int from, int to) {
  if (s.has("scales")) {
    auto v = s.numbers("scales");
    for (double x : v)
      if (!(x > 0.0)) s.fail("scales", "entries must be positive");
    return v;
  }
  Section& d = s.child("dyadic_scales");
  const auto a = d.integer("from", from), b = d.integer("to", to);
  if (a < 0 || b <= a || b > 40) d.fail("to", "need 0 <= from < to <= 40");
  std::vector<double> out;
  for (auto k = a; k <= b; ++k) out.push_back(std::ldexp(1.0, -static_cast<int>(k)));
  return out;
}

int positive_int(Section& s, const std::string& key, std::int64_t fallback, std::int64_t max) {
  const auto v = s.integer(key, fallback);
  if (v < 1 || v > max) s.fail(key, "must lie in [1, " + std::to_string(max) + "]");
  return static_cast<int>(v);
}

std::vector<std::string> input_param(Section& s) {
  auto files = s.texts("input", std::vector<std::string>{});
  for (const auto& f : files)
    if (!fs::exists(f)) s.fail("input", "no such file: " + f);
  return files;
}

std::vector<core::SamplePath> load_inputs(const std::vector<std::string>& files, const models::FieldModel& model) {
  std::vector<core::SamplePath> out;
  for (const auto& f : files) {
    auto p = core::load_sample_path(f);
    if (p.grid().dim() != static_cast<std::size_t>(model.n()) || p.d() != model.d())
      throw ConfigError("experiment.input: " + f + " has N=" + std::to_string(p.grid().dim()) +
                        ", d=" + std::to_string(p.d()) + ", which does not match the model");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::string> lineage_header(std::vector<std::string> rest) {
  std::vector<std::string> h{"model", "seed", "replicate", "spacing", "scale"};
  h.insert(h.end(), rest.begin(), rest.end());
  return h;
}

std::vector<Cell> lineage(const ExperimentConfig& cfg, Cell replicate, Cell spacing, Cell scale,
                          std::vector<Cell> rest) {
  std::vector<Cell> row{cfg.model().tag(), static_cast<std::int64_t>(cfg.seed), std::move(replicate),
                        std::move(spacing), std::move(scale)};
  row.insert(row.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
  return row;
}

std::vector<Cell> lineage(const ExperimentConfig& cfg, const core::SamplePath& path, Cell scale,
                          std::vector<Cell> rest) {
  std::vector<Cell> row{cfg.model().tag(), static_cast<std::int64_t>(path.lineage().master_seed),
                        static_cast<std::int64_t>(path.lineage().replicate), path.grid().max_spacing(),
                        std::move(scale)};
  row.insert(row.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
  return row;
}

core::GaussianEnsemble make_ensemble(const ExperimentConfig& cfg, int threads) {
  core::EnsembleOptions eo;
  eo.layout = cfg.grid ? cfg.grid->layout : core::FactorLayout::Auto;
  eo.threads = threads;
  return core::build_ensemble(cfg.model(), cfg.make_grid(), eo);
}

std::string replicate_range(std::uint64_t first, std::uint64_t count) {
  return count == 1 ? std::to_string(first) : std::to_string(first) + ".." + std::to_string(first + count - 1);
}

}  // namespace sectorial::cli
