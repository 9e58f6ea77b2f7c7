// dimension, level-set, local-time, cover.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "sectorial/cli/commands.hpp"
#include "sectorial/cli/params.hpp"
#include "sectorial/fractal/fractal.hpp"
#include "sectorial/path_stats/path_stats.hpp"
#include "sectorial/util/errors.hpp"
#include "sectorial/util/format.hpp"
#include "sectorial/util/parallel.hpp"
#include "sectorial/util/stats.hpp"

namespace sectorial::cli {

namespace {

using models::Point;
using util::format_double;
namespace fs = std::filesystem;

// Paths either ingested from experiment.input or drawn from the ensemble.
class PathSource {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg, std::int64_t default_count) {
    inputs_ = input_param(exp);
    if (inputs_.empty() && !cfg.grid) exp.fail("input", "give sample-path files or a grid block");
    if (inputs_.empty()) {
      count_ = positive_int(exp, "count", default_count);
      const auto first = exp.integer("first", 0);
      if (first < 0) exp.fail("first", "must be nonnegative");
      first_ = static_cast<std::uint64_t>(first);
    }
  }

  void open(const ExperimentConfig& cfg, const RunEnv& env) {
    if (!inputs_.empty())
      loaded_ = load_inputs(inputs_, cfg.model());
    else
      ens_.emplace(make_ensemble(cfg, env.threads));
  }

  bool from_files() const { return !inputs_.empty(); }
  std::size_t count() const { return from_files() ? loaded_.size() : static_cast<std::size_t>(count_); }
  std::uint64_t first() const { return first_; }
  const core::GaussianEnsemble* ensemble() const { return ens_ ? &*ens_ : nullptr; }

  // Path k of the nominal sequence. For ensembles k may exceed count().
  core::SamplePath get(const ExperimentConfig& cfg, std::size_t k) const {
    if (from_files()) return loaded_.at(k);
    return core::sample_path(*ens_, cfg.seed, first_ + k);
  }

  double spacing(const ExperimentConfig& cfg) const {
    return from_files() ? loaded_.front().grid().max_spacing() : cfg.make_grid().max_spacing();
  }
  const core::Grid& grid() const { return from_files() ? loaded_.front().grid() : ens_->grid(); }

 private:
  std::vector<std::string> inputs_;
  std::vector<core::SamplePath> loaded_;
  std::optional<core::GaussianEnsemble> ens_;
  int count_ = 1;
  std::uint64_t first_ = 0;
};

fractal::LevelSetTolerance tolerance_param(Section& exp, double alpha) {
  Section& t = exp.child("tolerance");
  const auto policy = t.text("policy", "scaled");
  if (policy == "absolute") {
    const double v = t.number("value");
    if (!(v >= 0.0)) t.fail("value", "must be nonnegative");
    return fractal::LevelSetTolerance::absolute(v);
  }
  if (policy != "scaled" && policy != "modulus") t.fail("policy", "expected scaled, modulus or absolute");
  const double c = t.number("c", 1.0);
  if (!(c > 0.0)) t.fail("c", "must be positive");
  return policy == "scaled" ? fractal::LevelSetTolerance::scaled(alpha, c)
                            : fractal::LevelSetTolerance::modulus(alpha, c);
}

std::vector<double> level_param(Section& exp, const models::FieldModel& m) {
  auto z = exp.numbers("z", std::vector<double>(static_cast<std::size_t>(m.d()), 0.0));
  if (z.size() != static_cast<std::size_t>(m.d()))
    exp.fail("z", "needs " + std::to_string(m.d()) + " components, got " + std::to_string(z.size()));
  return z;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t j = 0; j < v.size(); ++j) s += (j ? ";" : "") + format_double(v[j]);
  return s;
}

// ---------------------------------------------------------------- dimension

class Dimension : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    const auto& m = cfg.model();
    const int N = m.n(), d = m.d();
    const double alpha = m.alpha();
    target_ = exp.text("target", "level_set");
    if (target_ != "level_set" && target_ != "range") exp.fail("target", "expected level_set or range");
    source_.parse(exp, cfg, 200);
    min_paths_ = positive_int(exp, "min_paths", source_.from_files() ? 1 : 200);
    if (!source_.from_files()) {
      max_attempts_ = positive_int(exp, "max_attempts", 2 * static_cast<std::int64_t>(min_paths_));
      if (max_attempts_ < min_paths_) exp.fail("max_attempts", "must be at least min_paths");
    }
    J_ = box_param(exp, "J", static_cast<std::size_t>(N), m.domain());
    double width = 0.0;
    for (std::size_t j = 0; j < J_.dim(); ++j) width = std::max(width, J_.hi[j] - J_.lo[j]);

    const double Nd = static_cast<double>(N), ad = alpha * static_cast<double>(d);
    if (target_ == "level_set") {
      z_ = level_param(exp, m);
      tol_ = tolerance_param(exp, alpha);
      scales_ = scale_param(exp, 3, 9);
      if (!exp.has("scales"))
        for (double& s : scales_) s *= width;
      if (Nd > ad) predicted_ = Nd - ad;
      else if (Nd < ad) prediction_note_ = "N < alpha d: level sets are empty";
    } else {
      anchor_ = exp.numbers("anchor", std::vector<double>(static_cast<std::size_t>(d), 0.0));
      if (anchor_.size() != static_cast<std::size_t>(d)) exp.fail("anchor", "needs one coordinate per component");
      scales_ = scale_param(exp, 3, 8);
      if (Nd < ad) predicted_ = Nd / alpha;
      else if (Nd > ad) predicted_ = static_cast<double>(d);
    }
    if (Nd == ad) prediction_note_ = "critical case N = alpha d is open; no prediction";
    const auto [smin, smax] = std::minmax_element(scales_.begin(), scales_.end());
    if (scales_.size() < 4 || *smax / *smin < std::pow(10.0, 1.5))
      exp.fail("scales", "box counting needs at least 4 scales spanning 1.5 decades");

    Section& ex = exp.child("expect");
    assert_ = ex.boolean("enabled", predicted_.has_value());
    if (assert_ && !predicted_) ex.fail("enabled", prediction_note_.empty() ? "no prediction" : prediction_note_);
    if (ex.has("value")) predicted_ = ex.number("value");
    slope_tol_ = ex.number("tolerance", 0.15);
    if (!(slope_tol_ > 0.0)) ex.fail("tolerance", "must be positive");
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    source_.open(cfg, env);
    const double alpha = cfg.model().alpha();
    struct Result {
      bool valid = false;
      std::string reason;
      std::size_t cells = 0;
      double tol = 0.0;
      fractal::BoxDimension bd;
      std::uint64_t seed = 0, replicate = 0;
      double spacing = 0.0;
    };
    auto estimate = [&](std::size_t k) {
      Result r;
      const auto path = source_.get(cfg, k);
      r.seed = path.lineage().master_seed;
      r.replicate = path.lineage().replicate;
      r.spacing = path.grid().max_spacing();
      try {
        if (target_ == "level_set") {
          const auto cells = fractal::extract_level_set(path, z_, tol_);
          r.cells = cells.size();
          const double h = path.grid().max_spacing();
          r.tol = tol_.fixed ? *tol_.fixed
                             : tol_.value(h) * (tol_.path_scaled ? fractal::increment_scale(path, alpha) : 1.0);
          if (cells.empty()) {
            r.reason = "empty level set";
            return r;
          }
          r.bd = fractal::box_dimension(cells, scales_);
        } else {
          const auto pts = fractal::range_points(path, J_);
          r.cells = pts.size() / static_cast<std::size_t>(path.d());
          r.bd = fractal::box_dimension(pts, static_cast<std::size_t>(path.d()), anchor_, scales_);
        }
        r.valid = true;
      } catch (const DomainError& e) {
        r.reason = e.what();
      }
      return r;
    };

    std::vector<Result> results;
    std::size_t valid = 0;
    const std::size_t limit = source_.from_files() ? source_.count() : static_cast<std::size_t>(max_attempts_);
    std::size_t next = 0;
    // Batches keep the accepted set the first min_paths valid replicates in
    // order, whatever the thread count.
    while (valid < static_cast<std::size_t>(min_paths_) && next < limit) {
      const std::size_t want = static_cast<std::size_t>(min_paths_) - valid;
      const std::size_t batch = std::min(limit - next, std::max<std::size_t>(want, 1));
      std::vector<Result> part(batch);
      util::parallel_for(batch, env.threads, [&](std::size_t k) { part[k] = estimate(next + k); });
      next += batch;
      for (auto& r : part) {
        if (valid >= static_cast<std::size_t>(min_paths_)) break;
        if (r.valid) ++valid;
        results.push_back(std::move(r));
      }
    }

    CommandOutput out;
    out.tables.emplace_back("paths", lineage_header({"target", "valid", "reason", "points", "tolerance", "slope",
                                                     "stderr"}));
    out.tables.emplace_back("counts", lineage_header({"box_count"}));
    std::vector<double> slopes;
    for (const auto& r : results) {
      auto row = [&](Cell scale, std::vector<Cell> rest) {
        auto c = lineage(cfg, static_cast<std::int64_t>(r.replicate), r.spacing, std::move(scale), std::move(rest));
        c[1] = static_cast<std::int64_t>(r.seed);
        return c;
      };
      out.tables[0].add(row(std::monostate{},
                            {target_, std::int64_t{r.valid}, r.reason, static_cast<std::int64_t>(r.cells),
                             target_ == "level_set" ? Cell{r.tol} : Cell{}, r.valid ? Cell{r.bd.slope} : Cell{},
                             r.valid ? Cell{r.bd.stderr_} : Cell{}}));
      if (!r.valid) continue;
      slopes.push_back(r.bd.slope);
      for (std::size_t j = 0; j < r.bd.scales.size(); ++j) out.tables[1].add(row(r.bd.scales[j], {r.bd.counts[j]}));
    }
    const double med = slopes.empty() ? NAN : util::median(slopes);
    out.summary = {{"target", target_},
                   {"attempted", results.size()},
                   {"valid", slopes.size()},
                   {"median_slope", slopes.empty() ? json(nullptr) : json(med)},
                   {"q25", slopes.empty() ? json(nullptr) : json(util::quantile(slopes, 0.25))},
                   {"q75", slopes.empty() ? json(nullptr) : json(util::quantile(slopes, 0.75))},
                   {"scales", scales_},
                   {"predicted", predicted_ ? json(*predicted_) : json(nullptr)}};
    if (!prediction_note_.empty()) out.summary["prediction_note"] = prediction_note_;
    out.check("enough_valid_paths", slopes.size() >= static_cast<std::size_t>(min_paths_),
              std::to_string(slopes.size()) + " valid of " + std::to_string(results.size()) + ", need " +
                  std::to_string(min_paths_));
    if (assert_)
      out.check("median_matches_prediction", std::abs(med - *predicted_) <= slope_tol_,
                "median " + format_double(med) + ", predicted " + format_double(*predicted_) + " +- " +
                    format_double(slope_tol_));
    return out;
  }

 private:
  PathSource source_;
  std::string target_;
  int min_paths_ = 200, max_attempts_ = 400;
  models::Box J_;
  std::vector<double> z_, anchor_, scales_;
  fractal::LevelSetTolerance tol_;
  std::optional<double> predicted_;
  std::string prediction_note_;
  bool assert_ = false;
  double slope_tol_ = 0.15;
};

// ---------------------------------------------------------------- level-set

void write_cells(const fractal::CellSet& cells, const std::string& file) {
  std::ofstream f(file, std::ios::binary);
  f << "# dim " << cells.dim << "\n# cell " << format_double(cells.cell) << "\n# anchor " << join(cells.anchor)
    << "\n";
  for (std::size_t j = 0; j < cells.dim; ++j) f << (j ? "," : "") << "i" << j;
  f << '\n';
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto idx = cells.at(k);
    for (std::size_t j = 0; j < cells.dim; ++j) f << (j ? "," : "") << idx[j];
    f << '\n';
  }
}

class LevelSet : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    source_.parse(exp, cfg, 1);
    z_ = level_param(exp, cfg.model());
    tol_ = tolerance_param(exp, cfg.model().alpha());
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    source_.open(cfg, env);
    CommandOutput out;
    out.tables.emplace_back("sets", lineage_header({"file", "z", "tolerance", "cells"}));
    std::size_t nonempty = 0;
    for (std::size_t k = 0; k < source_.count(); ++k) {
      const auto path = source_.get(cfg, k);
      const auto cells = fractal::extract_level_set(path, z_, tol_);
      const double h = path.grid().max_spacing();
      const double tol = tol_.fixed ? *tol_.fixed
                                    : tol_.value(h) * (tol_.path_scaled
                                                           ? fractal::increment_scale(path, cfg.model().alpha())
                                                           : 1.0);
      const std::string file = "cells_" + std::to_string(path.lineage().replicate) + ".csv";
      write_cells(cells, (fs::path(env.out_dir) / file).string());
      out.extra_files.push_back(file);
      nonempty += !cells.empty();
      out.tables.back().add(lineage(cfg, path, cells.cell,
                                    {file, join(z_), tol, static_cast<std::int64_t>(cells.size())}));
    }
    out.summary = {{"paths", source_.count()}, {"nonempty", nonempty}, {"z", z_}};
    return out;
  }

 private:
  PathSource source_;
  std::vector<double> z_;
  fractal::LevelSetTolerance tol_;
};

// ---------------------------------------------------------------- local-time

class LocalTime : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    const auto& m = cfg.model();
    if (!(static_cast<double>(m.n()) > m.alpha() * m.d()))
      exp.fail("experiment", "local times exist only when N > alpha d");
    source_.parse(exp, cfg, 1);
    J_ = box_param(exp, "J", static_cast<std::size_t>(m.n()), m.domain());
    eps_ = exp.number("eps", 0.05);
    if (!(eps_ > 0.0)) exp.fail("eps", "must be positive");
    if (exp.has("z_list")) {
      const auto flat = exp.numbers("z_list");
      if (flat.size() % static_cast<std::size_t>(m.d()) != 0)
        exp.fail("z_list", "length must be a multiple of d = " + std::to_string(m.d()));
      z_list_ = flat;
    }
    Section& occ = exp.child("occupation");
    occupation_ = occ.boolean("enabled", true);
    step_ = occ.number("step", 0.25);  // in units of eps
    if (!(step_ > 0.0 && step_ <= 1.0)) occ.fail("step", "must lie in (0, 1]");
    identity_tol_ = occ.number("tolerance", 0.05);
    if (occupation_ && m.d() > 2) occ.fail("enabled", "the z-grid integral supports d <= 2");
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    source_.open(cfg, env);
    const auto d = static_cast<std::size_t>(cfg.model().d());
    CommandOutput out;
    out.tables.emplace_back("estimates", lineage_header({"z", "eps", "local_time"}));
    out.tables.emplace_back("occupation", lineage_header({"z_points", "dz", "integral", "volume", "ratio"}));
    double worst = 0.0;
    for (std::size_t k = 0; k < source_.count(); ++k) {
      const auto path = source_.get(cfg, k);
      for (std::size_t i = 0; i < z_list_.size(); i += d) {
        const std::vector<double> z(z_list_.begin() + static_cast<std::ptrdiff_t>(i),
                                    z_list_.begin() + static_cast<std::ptrdiff_t>(i + d));
        out.tables[0].add(lineage(cfg, path, std::monostate{},
                                  {join(z), eps_, fractal::local_time_estimate(path, z, J_, eps_)}));
      }
      if (!occupation_) continue;
      // Product z-grid covering the range of v on J with margin eps.
      std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
      const auto pts = fractal::range_points(path, J_);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        lo[i % d] = std::min(lo[i % d], pts[i]);
        hi[i % d] = std::max(hi[i % d], pts[i]);
      }
      const double dz = step_ * eps_;
      std::vector<std::size_t> n(d);
      std::size_t total = 1;
      for (std::size_t c = 0; c < d; ++c) {
        lo[c] -= eps_ + dz;
        n[c] = static_cast<std::size_t>(std::ceil((hi[c] + eps_ + dz - lo[c]) / dz)) + 1;
        total *= n[c];
      }
      std::vector<double> vals(total);
      util::parallel_for(total, env.threads, [&](std::size_t flat) {
        std::vector<double> z(d);
        std::size_t rem = flat;
        for (std::size_t c = d; c-- > 0;) {
          z[c] = lo[c] + static_cast<double>(rem % n[c]) * dz;
          rem /= n[c];
        }
        vals[flat] = fractal::local_time_estimate(path, z, J_, eps_);
      });
      double integral = 0.0;
      for (double v : vals) integral += v;
      integral *= std::pow(dz, static_cast<double>(d));
      const double vol = J_.volume();
      const double ratio = integral / vol;
      worst = std::max(worst, std::abs(ratio - 1.0));
      out.tables[1].add(lineage(cfg, path, eps_,
                                {static_cast<std::int64_t>(total), dz, integral, vol, ratio}));
    }
    out.summary = {{"paths", source_.count()}, {"eps", eps_}, {"J", {{"lo", J_.lo}, {"hi", J_.hi}}}};
    if (occupation_) {
      out.summary["occupation"] = {{"max_abs_deviation", worst}, {"tolerance", identity_tol_}, {"step", step_}};
      out.check("occupation_identity", worst <= identity_tol_,
                "worst |integral / volume - 1| = " + format_double(worst));
    }
    return out;
  }

 private:
  PathSource source_;
  models::Box J_;
  double eps_ = 0.05, step_ = 0.25, identity_tol_ = 0.05;
  std::vector<double> z_list_;
  bool occupation_ = true;
};

// ---------------------------------------------------------------- cover

class Cover : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    const auto& m = cfg.model();
    const auto N = static_cast<std::size_t>(m.n());
    source_.parse(exp, cfg, 1);
    J_ = box_param(exp, "J", N, m.domain());
    const auto plist = exp.numbers("p_list", std::vector<double>{3, 4, 5});
    for (double p : plist) {
      if (p != std::floor(p) || p < 2 || p > 15) exp.fail("p_list", "orders must be integers in [2, 15]");
      p_list_.push_back(static_cast<int>(p));
    }
    if (exp.has("K1")) {
      K1_ = exp.number("K1");
      if (!(*K1_ > 0.0)) exp.fail("K1", "must be positive");
    }
    if (exp.has("K2")) {
      K2_ = exp.number("K2");
      if (!(*K2_ > 0.0)) exp.fail("K2", "must be positive");
    }
    if (!K1_ || !K2_) {
      // Calibration of the existential constants from the Chung ensemble.
      Section& c = exp.child("calibration");
      Point centre(N);
      for (std::size_t j = 0; j < N; ++j) centre[j] = 0.5 * (J_.lo[j] + J_.hi[j]);
      cal_s_ = point_param(c, "s", N, centre);
      cal_q1_ = c.number("K1_quantile", 0.10);
      cal_q2_ = c.number("K2_quantile", 0.95);
      if (!(cal_q1_ >= 0.0 && cal_q1_ <= 1.0)) c.fail("K1_quantile", "must lie in [0, 1]");
      if (!(cal_q2_ >= 0.0 && cal_q2_ <= 1.0)) c.fail("K2_quantile", "must lie in [0, 1]");
      cal_count_ = positive_int(c, "count", 20, 100000);
      cal_r_max_ = c.number("r_max", 0.25);
      cal_r_min_ = c.number("r_min", 0.0);  // 0: four grid spacings
      if (!cfg.grid) c.fail("count", "calibration needs a grid block; give K1 and K2 instead");
    }
    const double ad = m.alpha() * m.d();
    level_ = exp.boolean("level_sets", static_cast<double>(N) > ad);
    if (level_) {
      z_ = level_param(exp, m);
      level_k_ = exp.numbers("level_k", std::vector<double>{ad, ad / static_cast<double>(N)});
      if (level_k_.empty()) exp.fail("level_k", "needs at least one loglog exponent");
    }
    if (exp.has("range_band")) {
      range_band_ = exp.number("range_band");
      if (!(*range_band_ >= 1.0)) exp.fail("range_band", "must be at least 1");
    }
    order_fraction_ = exp.number("ordering_fraction", 0.7);
    order_check_ = level_ && level_k_.size() >= 2 && p_list_.size() >= 2;
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    source_.open(cfg, env);
    const auto& m = cfg.model();
    const double alpha = m.alpha();
    json calibration = json::object();
    double K1 = K1_.value_or(0.0), K2 = K2_.value_or(0.0);
    if (!K1_ || !K2_) {
      const auto* ens = source_.ensemble();
      std::optional<core::GaussianEnsemble> own;
      if (!ens) ens = &own.emplace(make_ensemble(cfg, env.threads));
      const double r_min = cal_r_min_ > 0.0 ? cal_r_min_ : 4.0 * ens->grid().max_spacing();
      // A separate stream family keeps calibration draws apart from the paths.
      const auto ce = path_stats::chung_ensemble(*ens, cal_s_, r_min, cal_r_max_,
                                                 static_cast<std::size_t>(cal_count_), cfg.seed ^ 0xCA1B00ULL,
                                                 env.threads);
      if (!K1_) K1 = util::quantile(ce.minima, cal_q1_);
      if (!K2_) K2 = util::quantile(ce.minima, cal_q2_);
      calibration = {{"count", cal_count_}, {"K1_quantile", cal_q1_}, {"K2_quantile", cal_q2_},
                     {"s", cal_s_}, {"r_min", r_min}, {"r_max", cal_r_max_}};
    }

    fractal::CoverOptions opts;
    if (level_) {
      opts.z = z_;
      const double s_exp = m.n() - alpha * m.d();
      for (double k : level_k_) opts.level_gauges.emplace_back(s_exp, k);
    }

    const std::size_t P = p_list_.size();
    std::vector<std::vector<fractal::CoverReport>> reps(source_.count());
    std::vector<core::SeedLineage> lin(source_.count());
    std::vector<double> spacing(source_.count());
    util::parallel_for(source_.count(), env.threads, [&](std::size_t k) {
      const auto path = source_.get(cfg, k);
      lin[k] = path.lineage();
      spacing[k] = path.grid().max_spacing();
      for (int p : p_list_) reps[k].push_back(fractal::adaptive_cover(path, J_, p, K1, K2, alpha, opts));
    });

    CommandOutput out;
    out.tables.emplace_back("cover", lineage_header({"p", "K1", "K2", "bad_count", "range_sum", "level_cubes",
                                                     "covered_volume"}));
    out.tables.emplace_back("orders", lineage_header({"p", "q", "good_count"}));
    out.tables.emplace_back("levels", lineage_header({"p", "gauge", "s_exp", "k_exp", "level_sum"}));
    out.tables.emplace_back("drift", lineage_header({"gauge", "k_exp", "drift_slope"}));

    const double volume = J_.volume();
    double worst_volume = 0.0, worst_band = 1.0;
    int ordered = 0, comparable = 0;
    for (std::size_t k = 0; k < reps.size(); ++k) {
      auto row = [&](Cell scale, std::vector<Cell> rest) {
        auto c = lineage(cfg, static_cast<std::int64_t>(lin[k].replicate), spacing[k], std::move(scale),
                         std::move(rest));
        c[1] = static_cast<std::int64_t>(lin[k].master_seed);
        return c;
      };
      double rmin = INFINITY, rmax = 0.0;
      for (std::size_t i = 0; i < P; ++i) {
        const auto& r = reps[k][i];
        const double scale = std::ldexp(1.0, -r.p);
        out.tables[0].add(row(scale, {std::int64_t{r.p}, K1, K2, std::int64_t{r.bad_count}, r.range_sum,
                                      std::int64_t{r.level_cubes}, r.covered_volume}));
        for (std::size_t q = 0; q < r.orders.size(); ++q)
          out.tables[1].add(row(scale, {std::int64_t{r.p}, std::int64_t{r.orders[q]}, std::int64_t{r.good_counts[q]}}));
        for (std::size_t g = 0; g < r.level_sums.size(); ++g)
          out.tables[2].add(row(scale, {std::int64_t{r.p}, static_cast<std::int64_t>(g), r.level_gauges[g].s_exp(),
                                        r.level_gauges[g].k_exp(), r.level_sums[g]}));
        worst_volume = std::max(worst_volume, std::abs(r.covered_volume - volume) / volume);
        rmin = std::min(rmin, r.range_sum);
        rmax = std::max(rmax, r.range_sum);
      }
      worst_band = std::max(worst_band, rmin > 0.0 ? rmax / rmin : INFINITY);

      // Drift: slope of log(level sum) against p.
      if (!level_ || P < 2) continue;
      std::vector<double> slopes;
      bool usable = true;
      for (std::size_t g = 0; g < level_k_.size(); ++g) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < P; ++i) {
          const double v = reps[k][i].level_sums[g];
          if (!(v > 0.0)) usable = false;
          xs.push_back(reps[k][i].p);
          ys.push_back(std::log(std::max(v, 1e-300)));
        }
        const double slope = usable ? util::fit_line(xs, ys).slope : NAN;
        slopes.push_back(slope);
        out.tables[3].add(row(std::monostate{}, {static_cast<std::int64_t>(g), level_k_[g],
                                                 usable ? Cell{slope} : Cell{}}));
      }
      if (order_check_ && usable) {
        ++comparable;
        ordered += std::abs(slopes[0]) < std::abs(slopes[1]);
      }
    }

    out.summary = {{"K1", K1},
                   {"K2", K2},
                   {"calibration", calibration},
                   {"p_list", p_list_},
                   {"paths", reps.size()},
                   {"worst_volume_error", worst_volume},
                   {"range_sum_max_over_min", worst_band}};
    if (level_) out.summary["level_k"] = level_k_;
    out.check("cubes_tile_J", worst_volume <= 1e-9, "worst relative volume error " + format_double(worst_volume));
    if (range_band_)
      out.check("range_sums_within_band", worst_band <= *range_band_,
                "max/min range sum over p " + format_double(worst_band) + " vs " + format_double(*range_band_));
    if (order_check_) {
      const double frac = comparable ? static_cast<double>(ordered) / comparable : 0.0;
      out.summary["gauge_ordering"] = {{"ordered", ordered}, {"comparable", comparable}, {"fraction", frac},
                                       {"required", order_fraction_}};
      out.check("first_gauge_drifts_less", comparable > 0 && frac >= order_fraction_,
                std::to_string(ordered) + " of " + std::to_string(comparable) +
                    " replicates have |drift(k=" + format_double(level_k_[0]) + ")| < |drift(k=" +
                    format_double(level_k_[1]) + ")|");
    }
    return out;
  }

 private:
  PathSource source_;
  models::Box J_;
  std::vector<int> p_list_;
  std::optional<double> K1_, K2_, range_band_;
  Point cal_s_;
  double cal_q1_ = 0.10, cal_q2_ = 0.95, cal_r_max_ = 0.25, cal_r_min_ = 0.0;
  int cal_count_ = 20;
  bool level_ = false, order_check_ = false;
  std::vector<double> z_, level_k_;
  double order_fraction_ = 0.7;
};

}  // namespace

std::unique_ptr<Command> make_dimension() { return std::make_unique<Dimension>(); }
std::unique_ptr<Command> make_level_set() { return std::make_unique<LevelSet>(); }
std::unique_ptr<Command> make_local_time() { return std::make_unique<LocalTime>(); }
std::unique_ptr<Command> make_cover() { return std::make_unique<Cover>(); }

}  // namespace sectorial::cli
