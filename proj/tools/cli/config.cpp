#include "sectorial/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sectorial/util/errors.hpp"
#include "sectorial/util/format.hpp"

namespace sectorial::cli {

namespace {

std::string describe(const json& v) {
  std::string s = v.dump();
  return s.size() > 40 ? s.substr(0, 40) + "..." : s;
}

}  // namespace

Section::Section(const json* src, std::string path) : src_(src), path_(std::move(path)) {
  if (src_ && !src_->is_object()) throw ConfigError((path_.empty() ? "config" : path_) + ": must be an object");
}

bool Section::has(const std::string& key) const { return src_ && src_->contains(key); }

void Section::fail(const std::string& key, const std::string& msg) const { throw ConfigError(field(key) + ": " + msg); }

const json* Section::lookup(const std::string& key) {
  used_.insert(key);
  if (!src_) return nullptr;
  const auto it = src_->find(key);
  return it == src_->end() ? nullptr : &*it;
}

double Section::number(const std::string& key, std::optional<double> fallback) {
  const json* v = lookup(key);
  double out;
  if (!v) {
    if (!fallback) fail(key, "required");
    out = *fallback;
  } else {
    if (!v->is_number()) fail(key, "expected a number, got " + describe(*v));
    out = v->get<double>();
    if (!std::isfinite(out)) fail(key, "must be finite");
  }
  resolved_[key] = out;
  return out;
}

std::int64_t Section::integer(const std::string& key, std::optional<std::int64_t> fallback) {
  const json* v = lookup(key);
  std::int64_t out;
  if (!v) {
    if (!fallback) fail(key, "required");
    out = *fallback;
  } else {
    if (v->is_number_integer()) {
      out = v->get<std::int64_t>();
    } else if (v->is_number_float() && std::floor(v->get<double>()) == v->get<double>() &&
               std::abs(v->get<double>()) < 9e15) {
      out = static_cast<std::int64_t>(v->get<double>());
    } else {
      fail(key, "expected an integer, got " + describe(*v));
    }
  }
  resolved_[key] = out;
  return out;
}

bool Section::boolean(const std::string& key, std::optional<bool> fallback) {
  const json* v = lookup(key);
  bool out;
  if (!v) {
    if (!fallback) fail(key, "required");
    out = *fallback;
  } else {
    if (!v->is_boolean()) fail(key, "expected true or false, got " + describe(*v));
    out = v->get<bool>();
  }
  resolved_[key] = out;
  return out;
}

std::string Section::text(const std::string& key, std::optional<std::string> fallback) {
  const json* v = lookup(key);
  std::string out;
  if (!v) {
    if (!fallback) fail(key, "required");
    out = *fallback;
  } else {
    if (!v->is_string()) fail(key, "expected a string, got " + describe(*v));
    out = v->get<std::string>();
  }
  resolved_[key] = out;
  return out;
}

std::vector<double> Section::numbers(const std::string& key, std::optional<std::vector<double>> fallback) {
  const json* v = lookup(key);
  std::vector<double> out;
  if (!v) {
    if (!fallback) fail(key, "required");
    out = *fallback;
  } else {
    if (!v->is_array()) fail(key, "expected a list of numbers, got " + describe(*v));
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto& e = (*v)[i];
      if (!e.is_number() || !std::isfinite(e.get<double>()))
        fail(key, "entry " + std::to_string(i) + " must be a finite number, got " + describe(e));
      out.push_back(e.get<double>());
    }
  }
  resolved_[key] = out;
  return out;
}

std::vector<std::string> Section::texts(const std::string& key, std::optional<std::vector<std::string>> fallback) {
  const json* v = lookup(key);
  std::vector<std::string> out;
  if (!v) {
    if (!fallback) fail(key, "required");
    out = *fallback;
  } else {
    if (!v->is_array()) fail(key, "expected a list of strings, got " + describe(*v));
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_string()) fail(key, "entry " + std::to_string(i) + " must be a string");
      out.push_back((*v)[i].get<std::string>());
    }
  }
  resolved_[key] = out;
  return out;
}

namespace {

std::optional<double> as_extended(const json& e) {
  if (e.is_number() && std::isfinite(e.get<double>())) return e.get<double>();
  if (e.is_string() && e.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  return std::nullopt;
}

json extended_json(double x) { return std::isinf(x) ? json("inf") : json(x); }

}  // namespace

double Section::extended(const std::string& key, std::optional<double> fallback) {
  const json* v = lookup(key);
  double out;
  if (!v) {
    if (!fallback) fail(key, "required");
    out = *fallback;
  } else {
    const auto x = as_extended(*v);
    if (!x) fail(key, "expected a number or \"inf\", got " + describe(*v));
    out = *x;
  }
  resolved_[key] = extended_json(out);
  return out;
}

std::vector<double> Section::extended_list(const std::string& key, std::optional<std::vector<double>> fallback) {
  const json* v = lookup(key);
  std::vector<double> out;
  if (!v) {
    if (!fallback) fail(key, "required");
    out = *fallback;
  } else {
    if (!v->is_array()) fail(key, "expected a list, got " + describe(*v));
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto x = as_extended((*v)[i]);
      if (!x) fail(key, "entry " + std::to_string(i) + " must be a number or \"inf\"");
      out.push_back(*x);
    }
  }
  json arr = json::array();
  for (double x : out) arr.push_back(extended_json(x));
  resolved_[key] = arr;
  return out;
}

Section& Section::child(const std::string& key) {
  auto it = children_.find(key);
  if (it != children_.end()) return *it->second;
  const json* v = lookup(key);
  if (v && !v->is_object()) fail(key, "must be an object");
  auto s = std::make_unique<Section>(v, field(key));
  auto& ref = *s;
  children_.emplace(key, std::move(s));
  return ref;
}

void Section::finish() {
  if (src_)
    for (const auto& [key, _] : src_->items())
      if (!used_.count(key)) throw ConfigError(field(key) + ": unknown key");
  for (auto& [key, c] : children_) {
    c->finish();
    resolved_[key] = c->resolved();
  }
}

models::FieldModel parse_model(Section& s) {
  const std::string family = s.text("family");
  Section& dom = s.child("domain");
  const auto lo = dom.numbers("lo"), hi = dom.numbers("hi");
  if (lo.size() != hi.size() || lo.empty()) dom.fail("hi", "lo and hi must be nonempty lists of equal length");
  for (std::size_t j = 0; j < lo.size(); ++j)
    if (!(hi[j] > lo[j])) dom.fail("hi", "each hi must exceed lo (axis " + std::to_string(j) + ")");
  const models::Box box{lo, hi};
  const auto d = s.integer("d", 1);
  if (d < 1 || d > 64) s.fail("d", "must lie in [1, 64]");
  auto check_dim = [&](std::size_t n) {
    if (lo.size() != n)
      dom.fail("lo", "needs " + std::to_string(n) + " coordinates, got " + std::to_string(lo.size()));
  };
  try {
    if (family == "fractional_sheet" || family == "brownian_sheet") {
      const auto n = s.integer("N", static_cast<std::int64_t>(lo.size()));
      if (n < 1 || n > 8) s.fail("N", "must lie in [1, 8]");
      check_dim(static_cast<std::size_t>(n));
      for (std::size_t j = 0; j < lo.size(); ++j)
        if (!(lo[j] > 0.0)) dom.fail("lo", "sheet domains must stay away from the axes (lo > 0)");
      if (family == "brownian_sheet") return models::FieldModel::brownian_sheet(static_cast<int>(n), static_cast<int>(d), box);
      const double alpha = s.number("alpha");
      if (!(alpha > 0.0 && alpha < 1.0))
        s.fail("alpha", "must lie in the open interval (0, 1), got " + util::format_double(alpha));
      return models::FieldModel::fractional_sheet(static_cast<int>(n), static_cast<int>(d), alpha, box);
    }
    if (family == "wave_white" || family == "wave_colored") {
      check_dim(2);
      if (family == "wave_white") return models::FieldModel::wave_white(static_cast<int>(d), box);
      const double beta = s.number("beta");
      if (!(beta > 0.0 && beta < 1.0))
        s.fail("beta", "must lie in the open interval (0, 1) for colored noise, got " + util::format_double(beta));
      Section& q = s.child("quadrature");
      models::QuadratureSpec quad;
      quad.rel_tol = q.number("rel_tol", quad.rel_tol);
      quad.max_cutoff = q.number("max_cutoff", quad.max_cutoff);
      quad.gl_points = static_cast<int>(q.integer("gl_points", quad.gl_points));
      if (!(quad.rel_tol > 0.0)) q.fail("rel_tol", "must be positive");
      if (quad.gl_points < 2 || quad.gl_points > 64) q.fail("gl_points", "must lie in [2, 64]");
      return models::FieldModel::wave_colored(static_cast<int>(d), beta, box, quad);
    }
  } catch (const DomainError& e) {
    throw ConfigError(s.path() + ": " + e.what());
  }
  s.fail("family", "unknown family \"" + family +
                       "\"; expected fractional_sheet, brownian_sheet, wave_white or wave_colored");
}

namespace {

GridConfig parse_grid(Section& s, const models::Box& box) {
  GridConfig g;
  const bool has_spacing = s.has("spacing"), has_counts = s.has("counts");
  if (has_spacing == has_counts) s.fail("spacing", "give exactly one of spacing or counts");
  if (has_counts) {
    const auto c = s.numbers("counts");
    if (c.size() != box.dim()) s.fail("counts", "needs one entry per axis");
    for (double v : c) {
      if (!(v >= 1 && std::floor(v) == v)) s.fail("counts", "entries must be positive integers");
      g.counts.push_back(static_cast<std::size_t>(v));
    }
  } else {
    const double h = s.number("spacing");
    if (!(h > 0.0)) s.fail("spacing", "must be positive");
    for (std::size_t j = 0; j < box.dim(); ++j) {
      const double m = (box.hi[j] - box.lo[j]) / h;
      if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, m))
        s.fail("spacing", "must divide the domain side on axis " + std::to_string(j));
      g.counts.push_back(static_cast<std::size_t>(std::llround(m)) + 1);
    }
  }
  const auto budget = s.integer("budget", static_cast<std::int64_t>(core::Grid::kDefaultBudget));
  if (budget < 1) s.fail("budget", "must be positive");
  g.budget = static_cast<std::size_t>(budget);
  const auto layout = s.text("layout", "auto");
  if (layout == "auto") g.layout = core::FactorLayout::Auto;
  else if (layout == "dense") g.layout = core::FactorLayout::Dense;
  else if (layout == "kronecker") g.layout = core::FactorLayout::Kronecker;
  else if (layout == "wave_quadrant") g.layout = core::FactorLayout::WaveQuadrant;
  else s.fail("layout", "expected auto, dense, kronecker or wave_quadrant");
  std::size_t total = 1;
  for (auto c : g.counts) total *= c;
  if (total > g.budget)
    s.fail("counts", "grid has " + std::to_string(total) + " points, above grid.budget = " + std::to_string(g.budget) +
                         "; coarsen the grid or raise the budget");
  return g;
}

}  // namespace

core::Grid ExperimentConfig::make_grid() const {
  if (!grid) throw ConfigError("grid: required by this subcommand");
  return core::Grid::spanning(model().domain(), grid->counts, grid->budget);
}

ConfigReader::ConfigReader(json doc, std::optional<std::uint64_t> seed_override)
    : doc_(std::move(doc)), root_(&doc_, "") {
  cfg_.model_block = parse_model(root_.child("model"));
  if (root_.has("grid")) cfg_.grid = parse_grid(root_.child("grid"), cfg_.model().domain());
  Section& rng = root_.child("rng");
  const auto seed = rng.integer("seed", 1);
  if (seed < 0) rng.fail("seed", "must be nonnegative");
  cfg_.seed = static_cast<std::uint64_t>(seed);
  if (seed_override) {
    cfg_.seed = *seed_override;
    // the override is what the run used, so it is what gets hashed
    rng.integer("seed", 1);
  }
  Section& out = root_.child("output");
  cfg_.output.dir = out.text("dir", "out");
  const auto formats = out.texts("formats", std::vector<std::string>{"csv", "json"});
  cfg_.output.csv = cfg_.output.json_report = false;
  for (const auto& f : formats) {
    if (f == "csv") cfg_.output.csv = true;
    else if (f == "json") cfg_.output.json_report = true;
    else out.fail("formats", "unknown format \"" + f + "\"; expected csv or json");
  }
  experiment_ = &root_.child("experiment");
}

void ConfigReader::finalize() {
  root_.finish();
  cfg_.resolved = root_.resolved();
  cfg_.resolved["rng"]["seed"] = cfg_.seed;
  cfg_.resolved.erase("output");
}

json load_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot open " + file);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + file + " is not valid JSON (" + e.what() + ")");
  }
}

std::string config_hash(const json& canonical) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sectorial::cli
