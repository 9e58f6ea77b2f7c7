// verify-cov, verify-lnd, verify-a2, verify-a3.

#include <cmath>
#include <sstream>

#include "sectorial/cli/commands.hpp"
#include "sectorial/cli/params.hpp"
#include "sectorial/core/ensemble.hpp"
#include "sectorial/lnd/lnd.hpp"
#include "sectorial/models/covariance.hpp"
#include "sectorial/spectral/remainder.hpp"
#include "sectorial/spectral/spectral.hpp"
#include "sectorial/util/format.hpp"
#include "sectorial/util/parallel.hpp"
#include "sectorial/util/rng.hpp"
#include "sectorial/util/stats.hpp"

namespace sectorial::cli {

namespace {

using models::Family;
using models::FieldModel;
using models::Point;
using util::format_double;

std::string point_text(const Point& p) {
  std::string s;
  for (std::size_t j = 0; j < p.size(); ++j) s += (j ? ";" : "") + format_double(p[j]);
  return s;
}

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

Point uniform_point(util::RandomStream& rng, const models::Box& box) {
  Point p(box.dim());
  for (std::size_t j = 0; j < box.dim(); ++j) p[j] = rng.uniform(box.lo[j], box.hi[j]);
  return p;
}

// ---------------------------------------------------------------- verify-cov

class VerifyCov : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    const auto& m = cfg.model();
    is_sheet_ = m.is_sheet();
    if (is_sheet_) {
      Section& sp = exp.child("spectral");
      spectral_ = sp.boolean("enabled", m.n() <= 2);
      if (spectral_ && m.n() > 2) sp.fail("enabled", "the spectral check supports N <= 2 only");
      spectral_pairs_ = positive_int(sp, "pairs", 20, 100000);
      spectral_tol_ = sp.number("tolerance", m.n() == 1 ? 1e-3 : 1e-2);
      if (!(spectral_tol_ > 0.0)) sp.fail("tolerance", "must be positive");
    } else {
      Section& cone = exp.child("cone");
      cone_ = cone.boolean("enabled", m.family() == Family::WaveWhite);
      if (cone_ && m.family() != Family::WaveWhite)
        cone.fail("enabled", "the light-cone oracle exists for white noise only");
      cone_pairs_ = positive_int(cone, "pairs", 50, 100000);
      const auto tr = cone.numbers("t_range", std::vector<double>{0.5, 2.0});
      const auto xr = cone.numbers("x_range", std::vector<double>{-1.0, 1.0});
      if (tr.size() != 2 || !(tr[0] > 0.0 && tr[1] > tr[0])) cone.fail("t_range", "need 0 < t_lo < t_hi");
      if (xr.size() != 2 || !(xr[1] > xr[0])) cone.fail("x_range", "need x_lo < x_hi");
      cone_box_ = {{tr[0], xr[0]}, {tr[1], xr[1]}};
      cone_tol_ = cone.number("tolerance", 1e-3);

      Section& vs = exp.child("variance_scaling");
      scaling_ = vs.boolean("enabled", true);
      t_values_ = vs.numbers("t_values", std::vector<double>{0.5, 0.70710678118654757, 1.0, 1.4142135623730951, 2.0});
      if (t_values_.size() < 3) vs.fail("t_values", "need at least three times");
      for (double t : t_values_)
        if (!(t > 0.0)) vs.fail("t_values", "times must be positive");
      scaling_tol_ = vs.number("tolerance", 0.02);
    }
    Section& mc = exp.child("monte_carlo");
    mc_ = mc.boolean("enabled", cfg.grid.has_value());
    if (mc_ && !cfg.grid) mc.fail("enabled", "needs a grid block");
    reps_ = positive_int(mc, "reps", 10000, 10000000);
    se_limit_ = mc.number("se_limit", 5.0);
    if (mc_) {
      std::size_t n = 1;
      for (auto c : cfg.grid->counts) n *= c;
      if (n > 2000) mc.fail("enabled", "the all-pairs check is limited to 2000 grid points");
    }
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    const auto& m = cfg.model();
    CommandOutput out;
    out.tables.emplace_back("checks", lineage_header({"check", "i", "j", "point_a", "point_b", "value", "reference",
                                                      "error", "limit", "pass"}));
    auto& tab = out.tables.back();
    if (spectral_) {
      util::RandomStream rng(cfg.seed, 0x5EC);
      double worst = 0.0;
      const auto band = spectral::BandSpec::for_model(m, m.domain().lo, 0.0, spectral::kInfinity);
      for (int k = 0; k < spectral_pairs_; ++k) {
        const Point x = uniform_point(rng, m.domain()), y = uniform_point(rng, m.domain());
        const double q = spectral::fbs_spectral_l2(m, x, y, band);
        const double ref = models::model_covariance(m, x, x) + models::model_covariance(m, y, y) -
                           2.0 * models::model_covariance(m, x, y);
        const double err = std::abs(q - ref) / ref;
        worst = std::max(worst, err);
        tab.add(lineage(cfg, std::monostate{}, std::monostate{}, distance(x, y),
                        {"spectral_l2", std::int64_t{k}, std::monostate{}, point_text(x), point_text(y), q, ref, err,
                         spectral_tol_, std::int64_t{err <= spectral_tol_}}));
      }
      out.summary["spectral"] = {{"pairs", spectral_pairs_}, {"max_rel_error", worst}, {"tolerance", spectral_tol_}};
      out.check("spectral_full_band", worst <= spectral_tol_,
                "max relative error " + format_double(worst) + " vs " + format_double(spectral_tol_));
    }
    if (cone_) {
      util::RandomStream rng(cfg.seed, 0xC0E);
      double worst = 0.0;
      for (int k = 0; k < cone_pairs_; ++k) {
        const Point a = uniform_point(rng, cone_box_), b = uniform_point(rng, cone_box_);
        const auto q = models::swe_covariance_spectral(a[0], a[1], b[0], b[1], 1.0, m.quadrature());
        const double ref = 0.25 * models::cone_intersection_area(a[0], a[1], b[0], b[1]);
        // nearly disjoint cones: measure the error on the scale of the variances
        const double scale = 0.25 * std::sqrt(models::cone_intersection_area(a[0], a[1], a[0], a[1]) *
                                              models::cone_intersection_area(b[0], b[1], b[0], b[1]));
        const double err = std::abs(q.value - ref) / (std::abs(ref) < 1e-6 * scale ? scale : std::abs(ref));
        worst = std::max(worst, err);
        tab.add(lineage(cfg, std::monostate{}, std::monostate{}, distance(a, b),
                        {"quadrature_vs_cone", std::int64_t{k}, std::monostate{}, point_text(a), point_text(b), q.value,
                         ref, err, cone_tol_, std::int64_t{err <= cone_tol_}}));
      }
      out.summary["cone"] = {{"pairs", cone_pairs_}, {"max_rel_error", worst}, {"tolerance", cone_tol_}};
      out.check("quadrature_vs_cone_area", worst <= cone_tol_,
                "max relative error " + format_double(worst) + " vs " + format_double(cone_tol_));
    }
    if (scaling_) {
      const double beta = m.family() == Family::WaveWhite ? 1.0 : m.beta();
      std::vector<double> lx, ly;
      for (double t : t_values_) {
        // quadrature route for every beta, the cone area would make beta = 1 trivial
        const double v = models::swe_covariance_spectral(t, 0.0, t, 0.0, beta, m.quadrature()).value;
        lx.push_back(std::log(t));
        ly.push_back(std::log(v));
        tab.add(lineage(cfg, std::monostate{}, std::monostate{}, t,
                        {"variance", std::monostate{}, std::monostate{}, point_text({t, 0.0}), std::monostate{}, v,
                         std::monostate{}, std::monostate{}, std::monostate{}, std::monostate{}}));
      }
      const auto fit = util::fit_line(lx, ly);
      const double err = std::abs(fit.slope - (3.0 - beta));
      out.summary["variance_scaling"] = {
          {"slope", fit.slope}, {"expected", 3.0 - beta}, {"tolerance", scaling_tol_}, {"t_values", t_values_}};
      out.check("variance_slope", err <= scaling_tol_,
                "slope " + format_double(fit.slope) + ", expected " + format_double(3.0 - beta));
    }
    if (mc_) monte_carlo(cfg, env, out);
    return out;
  }

 private:
  void monte_carlo(const ExperimentConfig& cfg, const RunEnv& env, CommandOutput& out) const {
    const auto& m = cfg.model();
    const auto ens = make_ensemble(cfg, env.threads);
    const core::Grid& grid = ens.grid();
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd X(reps_, n);
    util::parallel_for(static_cast<std::size_t>(reps_), env.threads, [&](std::size_t r) {
      util::RandomStream rng(cfg.seed, r, 0);
      Eigen::VectorXd v(n);
      ens.draw(rng, v.data());
      X.row(static_cast<Eigen::Index>(r)) = v.transpose();
    });
    const double R = reps_;
    const Eigen::MatrixXd first = X.transpose() * X / R;
    const Eigen::MatrixXd X2 = X.array().square().matrix();
    const Eigen::MatrixXd second = X2.transpose() * X2 / R;
    auto& tab = out.tables.front();
    double worst = 0.0;
    std::int64_t failures = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) {
        const Point a = grid.point(static_cast<std::size_t>(i)), b = grid.point(static_cast<std::size_t>(j));
        const double k = models::model_covariance(m, a, b);
        const double var = std::max(second(i, j) - first(i, j) * first(i, j), 0.0);
        const double se = std::sqrt(var / R);
        const double z = se > 0.0 ? std::abs(first(i, j) - k) / se : (first(i, j) == k ? 0.0 : INFINITY);
        worst = std::max(worst, z);
        failures += z > se_limit_;
        tab.add(lineage(cfg, replicate_range(0, static_cast<std::uint64_t>(reps_)), grid.max_spacing(),
                        distance(a, b),
                        {"monte_carlo", std::int64_t{i}, std::int64_t{j}, point_text(a), point_text(b), first(i, j), k,
                         z, se_limit_, std::int64_t{z <= se_limit_}}));
      }
    out.summary["monte_carlo"] = {{"reps", reps_},
                                  {"points", n},
                                  {"max_standard_errors", worst},
                                  {"pairs_outside", failures},
                                  {"se_limit", se_limit_},
                                  {"jitter", ens.jitter_used()},
                                  {"residual", ens.residual()}};
    out.check("monte_carlo_covariance", failures == 0,
              "max deviation " + format_double(worst) + " standard errors over " + std::to_string(n * (n + 1) / 2) +
                  " pairs");
  }

  bool is_sheet_ = true;
  bool spectral_ = false, cone_ = false, scaling_ = false, mc_ = false;
  int spectral_pairs_ = 20, cone_pairs_ = 50, reps_ = 10000;
  double spectral_tol_ = 1e-3, cone_tol_ = 1e-3, scaling_tol_ = 0.02, se_limit_ = 5.0;
  models::Box cone_box_;
  std::vector<double> t_values_;
};

// ---------------------------------------------------------------- verify-lnd

class VerifyLnd : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig&) override {
    cfg_.n_points = positive_int(exp, "n_points", 4, 64);
    cfg_.vary_n = exp.boolean("vary_n", true);
    cfg_.trials = positive_int(exp, "trials", 200, 1000000);
    cfg_.locality = exp.number("locality", 0.25);
    if (!(cfg_.locality > 0.0)) exp.fail("locality", "must be positive");
    cfg_.include_origin_anchor = exp.boolean("include_origin_anchor", true);
    cfg_.degenerate_floor = exp.number("degenerate_floor", 1e-10);
    stability_ = exp.number("stability", 0.25);
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    CommandOutput out;
    // the doubled survey extends the base one trial for trial
    lnd::LndConfig twice = cfg_;
    twice.trials = 2 * cfg_.trials;
    const auto full = lnd::lnd_ratio_survey(cfg.model(), twice, cfg.seed, env.threads);
    double base_min = INFINITY;
    std::size_t base_used = 0;
    out.tables.emplace_back("trials", lineage_header({"n", "conditional_variance", "bound", "ratio", "skipped",
                                                      "in_base_survey"}));
    for (const auto& t : full.trials) {
      const bool base = t.index < static_cast<std::size_t>(cfg_.trials);
      if (base && !t.skipped) {
        base_min = std::min(base_min, t.ratio);
        ++base_used;
      }
      out.tables.back().add(lineage(cfg, static_cast<std::int64_t>(t.index), std::monostate{},
                                    static_cast<std::int64_t>(t.n),
                                    {std::int64_t{t.n}, t.conditional_variance, t.bound,
                                     t.skipped ? Cell{} : Cell{t.ratio}, std::int64_t{t.skipped}, std::int64_t{base}}));
    }
    const double drift = base_used ? std::abs(full.min_ratio / base_min - 1.0) : INFINITY;
    out.summary = {{"min_ratio", base_min},
                   {"min_ratio_doubled", full.min_ratio},
                   {"drift", drift},
                   {"stability", stability_},
                   {"trials", cfg_.trials},
                   {"used", base_used},
                   {"used_doubled", full.used},
                   {"skipped_doubled", full.skipped},
                   {"quantile_levels", full.quantile_levels},
                   {"quantiles", full.quantiles},
                   {"inconclusive", full.inconclusive}};
    out.check("min_ratio_positive", base_used > 0 && base_min > 0.0,
              base_used ? "min ratio " + format_double(base_min) : "every configuration was degenerate");
    out.check("min_ratio_stable", drift <= stability_,
              "doubling trials moves the minimum by " + format_double(drift));
    return out;
  }

 private:
  lnd::LndConfig cfg_;
  double stability_ = 0.25;
};

// ---------------------------------------------------------------- verify-a2

class VerifyA2 : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    const auto& m = cfg.model();
    s_ = point_param(exp, "s", static_cast<std::size_t>(m.n()), m.domain().lo);
    sweep_.r_values = exp.numbers("r_values", std::vector<double>{0.1, 0.05});
    sweep_.a_values = exp.numbers("a_values", m.is_sheet() ? std::vector<double>{2, 8} : std::vector<double>{4, 8});
    sweep_.b_values = exp.extended_list("b_values", m.is_sheet() ? std::vector<double>{32, 128}
                                                                 : std::vector<double>{16, 32});
    sweep_.pairs = positive_int(exp, "pairs", 20, 100000);
    if (sweep_.pairs < 2) exp.fail("pairs", "need at least 2 pairs for the doubling diagnostic");
    drift_limit_ = exp.number("drift_limit", 0.2);
    for (double r : sweep_.r_values)
      if (!(r > 0.0)) exp.fail("r_values", "radii must be positive");
    for (double a : sweep_.a_values)
      if (!(a >= 0.0)) exp.fail("a_values", "band edges must be nonnegative");
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    const auto rep = spectral::remainder_bound_sweep(cfg.model(), s_, sweep_, cfg.seed, {}, env.threads);
    CommandOutput out;
    out.tables.emplace_back("pairs", lineage_header({"a", "b", "pair", "x", "y", "remainder", "envelope_low",
                                                     "envelope_high", "envelope_local", "ratio", "degenerate"}));
    for (const auto& r : rep.rows)
      out.tables.back().add(lineage(cfg, static_cast<std::int64_t>(r.pair), std::monostate{}, r.r,
                                    {r.a, std::isinf(r.b) ? Cell{std::string("inf")} : Cell{r.b},
                                     std::int64_t{r.pair}, point_text(r.x), point_text(r.y), r.remainder,
                                     r.envelope.low, r.envelope.high, r.envelope.local,
                                     r.degenerate ? Cell{} : Cell{r.ratio}, std::int64_t{r.degenerate}}));
    const double drift = std::abs(rep.drift);
    out.summary = {{"c2_hat", rep.c2_hat},
                   {"c2_hat_half", rep.c2_hat_half},
                   {"drift", drift},
                   {"drift_limit", drift_limit_},
                   {"pairs", sweep_.pairs}};
    out.check("c2_finite", std::isfinite(rep.c2_hat) && rep.c2_hat > 0.0, "c2_hat " + format_double(rep.c2_hat));
    out.check("c2_stable", drift <= drift_limit_, "doubling pairs moves c2_hat by " + format_double(drift));
    return out;
  }

 private:
  Point s_;
  spectral::SweepSpec sweep_;
  double drift_limit_ = 0.2;
};

// ---------------------------------------------------------------- verify-a3

class VerifyA3 : public Command {
 public:
  void parse(Section& exp, const ExperimentConfig& cfg) override {
    if (!cfg.model().is_wave()) exp.fail("region", "the smoothness check is defined for the wave families only");
    rho_ = exp.number("rho", 0.05);
    if (!(rho_ > 0.0)) exp.fail("rho", "must be positive");
    // probes reach 2 rho beyond the region
    models::Box inner = cfg.model().domain();
    for (std::size_t j = 0; j < 2; ++j) {
      inner.lo[j] += 2 * rho_;
      inner.hi[j] -= 2 * rho_;
    }
    if (!(inner.hi[0] > inner.lo[0] && inner.hi[1] > inner.lo[1])) exp.fail("rho", "too large for the model domain");
    region_ = box_param(exp, "region", 2, inner);
    for (std::size_t j = 0; j < 2; ++j)
      if (region_.lo[j] < inner.lo[j] - 1e-12 || region_.hi[j] > inner.hi[j] + 1e-12)
        exp.fail("region", "must stay 2 rho inside the model domain");
    trials_ = positive_int(exp, "trials", 200, 1000000);
    stability_ = exp.number("stability", 0.1);
    probe_ = positive_int(exp, "grid_probe", 9, 1000);
  }

  CommandOutput run(const ExperimentConfig& cfg, const RunEnv& env) override {
    const auto& m = cfg.model();
    const auto rep = lnd::a3_smoothness_check(m, region_, rho_, 2 * trials_, cfg.seed, env.threads);
    const double floor = lnd::a3_variance_floor(m, region_, probe_);
    CommandOutput out;
    const double drift = std::abs(rep.max_ratio / rep.max_ratio_half - 1.0);
    out.tables.emplace_back("summary", lineage_header({"trials", "max_ratio", "max_ratio_half", "drift",
                                                       "variance_floor"}));
    out.tables.back().add(lineage(cfg, replicate_range(0, static_cast<std::uint64_t>(2 * trials_)), std::monostate{},
                                  rho_, {std::int64_t{rep.trials}, rep.max_ratio, rep.max_ratio_half, drift, floor}));
    out.summary = {{"max_ratio", rep.max_ratio},   {"max_ratio_half", rep.max_ratio_half},
                   {"drift", drift},               {"stability", stability_},
                   {"trials", rep.trials},         {"rho", rho_},
                   {"variance_floor", floor}};
    out.check("a3_ratio_finite", std::isfinite(rep.max_ratio), "max ratio " + format_double(rep.max_ratio));
    out.check("a3_ratio_stable", drift <= stability_,
              "doubling trials moves the max ratio by " + format_double(drift));
    out.check("variance_floor_positive", floor > 0.0, "min standard deviation " + format_double(floor));
    return out;
  }

 private:
  models::Box region_;
  double rho_ = 0.05, stability_ = 0.1;
  int trials_ = 200, probe_ = 9;
};

}  // namespace

std::unique_ptr<Command> make_verify_cov() { return std::make_unique<VerifyCov>(); }
std::unique_ptr<Command> make_verify_lnd() { return std::make_unique<VerifyLnd>(); }
std::unique_ptr<Command> make_verify_a2() { return std::make_unique<VerifyA2>(); }
std::unique_ptr<Command> make_verify_a3() { return std::make_unique<VerifyA3>(); }

}  // namespace sectorial::cli
