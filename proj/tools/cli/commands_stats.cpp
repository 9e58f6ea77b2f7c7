// simulate, sojourn, small-ball, chung, modulus.

#include <cmath>
#include <filesystem>

#include "sectorial/cli/commands.hpp"
#include "sectorial/cli/params.hpp"
#include "sectorial/path_stats/path_stats.hpp"
#include "sectorial/util/format.hpp"
#include "sectorial/util/parallel.hpp"
#include "sectorial/util/stats.hpp"

namespace sectorial::cli {

namespace {

using util::format_double;
namespace fs = std::filesystem;

models::Point centre(const models::FieldModel& m) {
  models::Point c(m.domain().dim());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = 0.5 * (m.domain().lo[j] + m.domain().hi[j]);
  return c;
}

// ---------------------------------------------------------------- simulate

class Simulate : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    if (!cfg.grid) exp.fail("count", "simulate needs a grid block");
    count_ = positive_int(exp, "count", 1, 100000);
    const auto first = exp.integer("first", 0);
    if (first < 0) exp.fail("first", "must be nonnegative");
    first_ = static_cast<std::uint64_t>(first);
    const auto fmt = exp.text("format", "binary");
    if (fmt != "binary" && fmt != "csv") exp.fail("format", "expected binary or csv");
    binary_ = fmt == "binary";
    residual_tol_ = exp.number("residual_tolerance", 1e-10);
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    const auto ens = make_ensemble(cfg, env.threads);
    CommandOutput out;
    out.tables.emplace_back("paths", lineage_header({"file", "component", "min", "max", "mean"}));
    for (int k = 0; k < count_; ++k) {
      const std::uint64_t rep = first_ + static_cast<std::uint64_t>(k);
      const auto path = core::sample_path(ens, cfg.seed, rep);
      const std::string file = "path_" + std::to_string(rep) + (binary_ ? ".spth" : ".csv");
      core::save_sample_path(path, (fs::path(env.out_dir) / file).string(), binary_);
      out.extra_files.push_back(file);
      for (int c = 0; c < path.d(); ++c) {
        double lo = INFINITY, hi = -INFINITY, sum = 0.0;
        for (std::size_t i = 0; i < path.size(); ++i) {
          const double v = path.value(i, c);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          sum += v;
        }
        out.tables.back().add(lineage(cfg, path, std::monostate{},
                                      {file, std::int64_t{c}, lo, hi, sum / static_cast<double>(path.size())}));
      }
    }
    out.summary = {{"count", count_},
                   {"first", first_},
                   {"points", ens.size()},
                   {"jitter", ens.jitter_used()},
                   {"residual", ens.residual()},
                   {"format", binary_ ? "binary" : "csv"}};
    out.check("factorization_residual", ens.residual() <= residual_tol_,
              "relative residual " + format_double(ens.residual()));
    return out;
  }

 private:
  int count_ = 1;
  std::uint64_t first_ = 0;
  bool binary_ = true;
  double residual_tol_ = 1e-10;
};

// ---------------------------------------------------------------- sojourn

class Sojourn : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    if (!cfg.grid) exp.fail("s", "sojourn needs a grid block");
    s_ = point_param(exp, "s", static_cast<std::size_t>(cfg.model().n()), centre(cfg.model()));
    spec_.r_list = exp.numbers("r_list", std::vector<double>{0.1, 0.05});
    for (double r : spec_.r_list)
      if (!(r > 0.0)) exp.fail("r_list", "radii must be positive");
    spec_.n_max = positive_int(exp, "n_max", 3, 4);
    spec_.reps = positive_int(exp, "reps", 1000, 10000000);
    if (spec_.reps < 1000) exp.fail("reps", "moment surveys need at least 1000 replicates");
    spec_.bootstrap = positive_int(exp, "bootstrap", 400, 100000);
    spec_.k_tolerance = exp.number("k_tolerance", 0.3);
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    const auto ens = make_ensemble(cfg, env.threads);
    const auto sv = path_stats::sojourn_moment_survey(ens, s_, spec_, cfg.seed, env.threads);
    CommandOutput out;
    const auto reps = replicate_range(0, static_cast<std::uint64_t>(spec_.reps));
    out.tables.emplace_back("moments", lineage_header({"n", "moment", "ci_lo", "ci_hi", "ratio"}));
    for (const auto& r : sv.rows)
      out.tables.back().add(lineage(cfg, reps, sv.spacing, r.r, {std::int64_t{r.n}, r.moment, r.ci_lo, r.ci_hi,
                                                                  r.ratio}));
    out.tables.emplace_back("k_hat", lineage_header({"k_hat"}));
    for (std::size_t k = 0; k < sv.k_hat.size(); ++k)
      out.tables.back().add(lineage(cfg, reps, sv.spacing, spec_.r_list[k], {sv.k_hat[k]}));
    out.summary = {{"k_hat", sv.k_hat},
                   {"k_spread", sv.k_spread},
                   {"k_tolerance", sv.k_tolerance},
                   {"resolution_ok", sv.resolution_ok},
                   {"resolution_note", sv.resolution_note},
                   {"spacing", sv.spacing},
                   {"reps", spec_.reps}};
    out.check("grid_resolution", sv.resolution_ok, sv.resolution_ok ? "ok" : sv.resolution_note);
    out.check("k_hat_stable_across_r", sv.r_stable(),
              "max/min K-hat - 1 = " + format_double(sv.k_spread) + " vs " + format_double(sv.k_tolerance));
    return out;
  }

 private:
  models::Point s_;
  path_stats::SojournSurveySpec spec_;
};

// ---------------------------------------------------------------- small-ball

class SmallBall : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    const auto& m = cfg.model();
    s_ = point_param(exp, "s", static_cast<std::size_t>(m.n()), centre(m));
    Section& band = exp.child("band");
    const double a = band.number("a", 2.0), b = band.extended("b", 32.0);
    if (!(a >= 0.0 && b > a)) band.fail("b", "need 0 <= a < b");
    band_ = spectral::BandSpec::for_model(m, s_, a, b);
    r_ = exp.number("r", 0.2);
    if (!(r_ > 0.0)) exp.fail("r", "must be positive");
    spec_.eps_list = exp.numbers("eps_list", std::vector<double>{0.08, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4});
    const double cap = std::pow(r_, m.alpha());
    for (double e : spec_.eps_list)
      if (!(e > 0.0 && e < cap)) exp.fail("eps_list", "every eps must lie in (0, r^alpha) = (0, " + format_double(cap) + ")");
    spec_.reps = positive_int(exp, "reps", 4000, 10000000);
    if (spec_.reps < 2) exp.fail("reps", "need at least 2 replicates");
    spec_.points_per_axis = static_cast<std::size_t>(positive_int(exp, "points_per_axis", 41, 10000));
    drift_limit_ = exp.number("drift_limit", 0.2);
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    const auto rep = path_stats::band_small_ball(cfg.model(), band_, s_, r_, spec_, cfg.seed, {}, env.threads);
    CommandOutput out;
    const auto reps = replicate_range(0, static_cast<std::uint64_t>(spec_.reps));
    const double h = 2.0 * r_ / static_cast<double>(spec_.points_per_axis - 1);
    out.tables.emplace_back("eps", lineage_header({"r", "successes", "p_hat", "neg_log_p", "censored", "k0"}));
    for (const auto& row : rep.rows)
      out.tables.back().add(lineage(cfg, reps, h, row.eps,
                                    {r_, std::int64_t{row.successes}, row.p_hat, row.neg_log_p,
                                     std::int64_t{row.censored}, row.k0}));
    const double drift = rep.drift();
    out.summary = {{"k0_hat", rep.k0_hat},
                   {"k0_hat_half", rep.k0_hat_half},
                   {"drift", drift},
                   {"drift_limit", drift_limit_},
                   {"band", {{"a", band_.a}, {"b", std::isinf(band_.b) ? json("inf") : json(band_.b)}}},
                   {"r", r_},
                   {"reps", spec_.reps}};
    out.check("k0_finite", std::isfinite(rep.k0_hat) && rep.k0_hat > 0.0, "K0-hat " + format_double(rep.k0_hat));
    out.check("k0_stable", drift <= drift_limit_, "half vs full replicates differ by " + format_double(drift));
    return out;
  }

 private:
  models::Point s_;
  spectral::BandSpec band_;
  double r_ = 0.2, drift_limit_ = 0.2;
  path_stats::SmallBallSpec spec_;
};

// ---------------------------------------------------------------- chung

class Chung : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    inputs_ = input_param(exp);
    if (inputs_.empty() && !cfg.grid) exp.fail("input", "give sample-path files or a grid block");
    s_ = point_param(exp, "s", static_cast<std::size_t>(cfg.model().n()), centre(cfg.model()));
    r_min_ = exp.number("r_min", 0.0);  // 0: four grid spacings
    r_max_ = exp.number("r_max", 0.25);
    if (!(r_max_ > 0.0 && r_max_ < 1.0 / std::exp(1.0))) exp.fail("r_max", "must lie in (0, 1/e)");
    count_ = positive_int(exp, "count", 500, 1000000);
    Section& ev = exp.child("event");
    r0_ = ev.number("r0", r_max_);
    if (!(r0_ > 0.0 && r0_ < 1.0)) ev.fail("r0", "must lie in (0, 1)");
    quantile_k_ = ev.number("k_quantile", 0.95);
    if (!(quantile_k_ >= 0.0 && quantile_k_ <= 1.0)) ev.fail("k_quantile", "must lie in [0, 1]");
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    const double alpha = cfg.model().alpha();
    std::vector<path_stats::ChungStatistic> stats;
    std::vector<core::SamplePath> paths;
    double h;
    if (!inputs_.empty()) {
      paths = load_inputs(inputs_, cfg.model());
      h = paths.front().grid().max_spacing();
      const double r_min = r_min_ > 0.0 ? r_min_ : 4.0 * h;
      stats.resize(paths.size());
      util::parallel_for(paths.size(), env.threads, [&](std::size_t k) {
        stats[k] = path_stats::chung_statistic(paths[k], s_, r_min, r_max_, alpha);
      });
    } else {
      const auto ens = make_ensemble(cfg, env.threads);
      h = ens.grid().max_spacing();
      const double r_min = r_min_ > 0.0 ? r_min_ : 4.0 * h;
      stats = path_stats::chung_ensemble(ens, s_, r_min, r_max_, static_cast<std::size_t>(count_), cfg.seed,
                                         env.threads)
                  .stats;
    }
    std::vector<double> minima;
    for (const auto& st : stats) minima.push_back(st.min_over_r);
    const double q05 = util::quantile(minima, 0.05), q10 = util::quantile(minima, 0.10),
                 q95 = util::quantile(minima, 0.95);
    const double K = util::quantile(minima, quantile_k_);
    const double freq = path_stats::chung_event_frequency(stats, r0_, K);

    CommandOutput out;
    out.tables.emplace_back("sups", lineage_header({"normalized_sup"}));
    out.tables.emplace_back("minima", lineage_header({"min_over_r"}));
    for (std::size_t k = 0; k < stats.size(); ++k) {
      const auto seed = inputs_.empty() ? cfg.seed : paths[k].lineage().master_seed;
      const auto rep = inputs_.empty() ? k : paths[k].lineage().replicate;
      auto row = [&](Cell scale, double v) {
        auto r = lineage(cfg, static_cast<std::int64_t>(rep), h, std::move(scale), {v});
        r[1] = static_cast<std::int64_t>(seed);
        return r;
      };
      for (std::size_t j = 0; j < stats[k].r_values.size(); ++j)
        out.tables[0].add(row(stats[k].r_values[j], stats[k].normalized_sups[j]));
      out.tables[1].add(row(std::monostate{}, stats[k].min_over_r));
    }
    out.summary = {{"paths", stats.size()},
                   {"q05", q05},
                   {"q10", q10},
                   {"q95", q95},
                   {"r_values", stats.front().r_values},
                   {"event", {{"r0", r0_}, {"K", K}, {"k_quantile", quantile_k_}, {"frequency", freq}}},
                   {"note", "min over dyadic r stands in for the liminf; K for the event is an empirical quantile"}};
    out.check("lower_quantile_positive", q05 > 0.0, "q05 " + format_double(q05));
    out.check("upper_quantile_finite", std::isfinite(q95), "q95 " + format_double(q95));
    return out;
  }

 private:
  std::vector<std::string> inputs_;
  models::Point s_;
  double r_min_ = 0.0, r_max_ = 0.25, r0_ = 0.25, quantile_k_ = 0.95;
  int count_ = 500;
};

// ---------------------------------------------------------------- modulus

class Modulus : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    if (!cfg.grid) exp.fail("s", "modulus needs a grid block");
    s_ = point_param(exp, "s", static_cast<std::size_t>(cfg.model().n()), centre(cfg.model()));
    r_ = exp.number("r", 0.1);
    if (!(r_ > 0.0 && r_ < 0.25)) exp.fail("r", "must lie in (0, 0.25)");
    L_ = exp.numbers("L_list", std::vector<double>{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0});
    for (double L : L_)
      if (!(L > 0.0)) exp.fail("L_list", "entries must be positive");
    reps_ = positive_int(exp, "reps", 1000, 10000000);
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    const auto ens = make_ensemble(cfg, env.threads);
    const auto rep = path_stats::modulus_tail_check(ens, s_, r_, L_, reps_, cfg.seed, env.threads);
    CommandOutput out;
    const auto reps = replicate_range(0, static_cast<std::uint64_t>(reps_));
    out.tables.emplace_back("levels", lineage_header({"L", "hits", "frequency", "censored", "exponent"}));
    for (const auto& row : rep.rows)
      out.tables.back().add(lineage(cfg, reps, ens.grid().max_spacing(), r_,
                                    {row.L, std::int64_t{row.hits}, row.frequency, std::int64_t{row.censored},
                                     row.censored ? Cell{} : Cell{row.exponent}}));
    out.summary = {{"r", r_},
                   {"reps", reps_},
                   {"estimable", rep.estimable},
                   {"quadratic_slope", rep.quadratic_slope},
                   {"monotone", rep.monotone}};
    out.check("frequencies_nonincreasing", rep.monotone, rep.monotone ? "ok" : "frequency rose with L");
    out.check("quadratic_exponent_growth", rep.quadratic_growth(),
              std::to_string(rep.estimable) + " estimable levels, slope in L^2 " +
                  format_double(rep.quadratic_slope));
    return out;
  }

 private:
  models::Point s_;
  double r_ = 0.1;
  std::vector<double> L_;
  int reps_ = 1000;
};

}  // namespace

std::unique_ptr<Command> make_simulate() { return std::make_unique<Simulate>(); }
std::unique_ptr<Command> make_sojourn() { return std::make_unique<Sojourn>(); }
std::unique_ptr<Command> make_small_ball() { return std::make_unique<SmallBall>(); }
std::unique_ptr<Command> make_chung() { return std::make_unique<Chung>(); }
std::unique_ptr<Command> make_modulus() { return std::make_unique<Modulus>(); }

}  // namespace sectorial::cli
