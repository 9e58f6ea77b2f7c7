#include "sectorial/lnd/lnd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sectorial/core/ensemble.hpp"
#include "sectorial/models/covariance.hpp"
#include "sectorial/util/errors.hpp"
#include "sectorial/util/parallel.hpp"
#include "sectorial/util/rng.hpp"
#include "sectorial/util/stats.hpp"

namespace sectorial::lnd {

double sectorial_lower_bound(const FieldModel& model, std::span<const double> x, const std::vector<Point>& pts,
                             bool include_origin_anchor) {
  if (model.is_sheet()) {
    const double h = 2.0 * model.alpha();
    double total = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      double best = include_origin_anchor ? std::abs(x[j]) : std::numeric_limits<double>::infinity();
      for (const auto& y : pts) best = std::min(best, std::abs(x[j] - y[j]));
      total += std::pow(best, h);
    }
    return total;
  }
  if (pts.empty()) throw DomainError("the wave bound needs at least one conditioning point");
  const double h = 2.0 - model.beta();
  double gap_plus = std::numeric_limits<double>::infinity(), gap_minus = gap_plus;
  for (const auto& y : pts) {
    gap_plus = std::min(gap_plus, std::numbers::sqrt2 * std::abs(x[1] - y[1]));
    gap_minus = std::min(gap_minus, std::numbers::sqrt2 * std::abs(x[0] - y[0]));
  }
  return std::pow(gap_plus, h) + std::pow(gap_minus, h);
}

namespace {

Point uniform_point(util::RandomStream& rng, const Box& box) {
  Point p(box.dim());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = rng.uniform(box.lo[j], box.hi[j]);
  return p;
}

// |t - t'| + |x - x'| = sqrt2 max(|d eta|, |d theta|).
double time_space_l1(const Point& a, const Point& b) {
  return std::numbers::sqrt2 * std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
}

}  // namespace

LndSurvey lnd_ratio_survey(const FieldModel& model, const LndConfig& cfg, std::uint64_t seed, int threads) {
  if (cfg.n_points < 1) throw DomainError("n_points must be >= 1");
  if (!(cfg.locality > 0.0)) throw DomainError("locality must be positive");
  if (cfg.trials < 1) throw DomainError("trials must be >= 1");
  LndSurvey out;
  out.trials.resize(static_cast<std::size_t>(cfg.trials));
  util::parallel_for(out.trials.size(), threads, [&](std::size_t k) {
    util::RandomStream rng(seed, k, 0x1D);
    LndTrial& tr = out.trials[k];
    tr.index = k;
    tr.n = cfg.vary_n ? 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n_points))) : cfg.n_points;
    const Point x = uniform_point(rng, model.domain());
    std::vector<Point> cond;
    for (int i = 0; i < tr.n; ++i) {
      Point y = uniform_point(rng, model.domain());
      if (model.is_wave()) {
        int attempts = 0;
        while (time_space_l1(x, y) > cfg.locality) {
          if (++attempts > 100000) throw DomainError("locality radius too small for the domain");
          y = uniform_point(rng, model.domain());
        }
      }
      cond.push_back(std::move(y));
    }
    tr.bound = sectorial_lower_bound(model, x, cond, model.is_sheet() && cfg.include_origin_anchor);
    if (tr.bound < cfg.degenerate_floor) {
      tr.skipped = true;
      return;
    }
    tr.conditional_variance = core::conditional_variance(model, x, cond);
    tr.ratio = tr.conditional_variance / tr.bound;
  });
  std::vector<double> ratios;
  for (const auto& tr : out.trials) {
    if (tr.skipped)
      ++out.skipped;
    else
      ratios.push_back(tr.ratio);
  }
  out.used = ratios.size();
  if (ratios.empty()) {
    out.inconclusive = true;
    return out;
  }
  out.min_ratio = *std::min_element(ratios.begin(), ratios.end());
  for (double q : out.quantile_levels) out.quantiles.push_back(util::quantile(ratios, q));
  return out;
}

double a3_ratio(const FieldModel& model, const Point& x, const Point& y, const Point& ybar) {
  const double dist = std::abs(y[0] - ybar[0]) + std::abs(y[1] - ybar[1]);
  if (dist == 0.0) return 0.0;
  return std::abs(models::model_covariance(model, y, x) - models::model_covariance(model, ybar, x)) / dist;
}

A3Report a3_smoothness_check(const FieldModel& model, const Box& region, double rho, int trials, std::uint64_t seed,
                             int threads) {
  if (!model.is_wave()) throw DomainError("the Assumption 3 smoothness check is specified for wave models only");
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (trials < 2) throw DomainError("a3 check needs at least 2 trials");
  if (!(region.lo[0] + region.lo[1] > 0.0)) throw DomainError("region must lie inside {eta + theta > 0}");
  for (std::size_t j = 0; j < 2; ++j)
    if (region.lo[j] - 2 * rho < model.domain().lo[j] - 1e-12 || region.hi[j] + 2 * rho > model.domain().hi[j] + 1e-12)
      throw DomainError("region widened by 2 rho must stay inside the model domain");
  std::vector<double> ratio(static_cast<std::size_t>(trials), 0.0);
  util::parallel_for(ratio.size(), threads, [&](std::size_t k) {
    util::RandomStream rng(seed, k, 0xA3);
    const Point x = uniform_point(rng, region);
    Box near{{x[0] - 2 * rho, x[1] - 2 * rho}, {x[0] + 2 * rho, x[1] + 2 * rho}};
    const Point y = uniform_point(rng, near), yb = uniform_point(rng, near);
    model.require_admissible(y, "a3 probe point");
    model.require_admissible(yb, "a3 probe point");
    ratio[k] = a3_ratio(model, x, y, yb);
  });
  A3Report r;
  r.trials = trials;
  r.rho = rho;
  r.max_ratio = *std::max_element(ratio.begin(), ratio.end());
  r.max_ratio_half = *std::max_element(ratio.begin(), ratio.begin() + trials / 2);
  return r;
}

double a3_variance_floor(const FieldModel& model, const Box& region, int grid_probe) {
  if (grid_probe < 1) throw DomainError("grid_probe must be >= 1");
  if (static_cast<int>(region.dim()) != model.n()) throw DomainError("region dimension mismatch");
  if (model.is_wave() && !(region.lo[0] + region.lo[1] > 0.0))
    throw DomainError("region touches {eta + theta = 0}; it must lie compactly inside the domain");
  if (model.is_sheet())
    for (double l : region.lo)
      if (!(l > 0.0)) throw DomainError("region must lie compactly inside (0, inf)^N");
  const std::size_t n = region.dim();
  std::size_t total = 1;
  for (std::size_t j = 0; j < n; ++j) total *= static_cast<std::size_t>(grid_probe);
  double best = std::numeric_limits<double>::infinity();
  Point x(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t j = n; j-- > 0;) {
      const auto i = rem % static_cast<std::size_t>(grid_probe);
      rem /= static_cast<std::size_t>(grid_probe);
      x[j] = grid_probe == 1 ? 0.5 * (region.lo[j] + region.hi[j])
                             : region.lo[j] + (region.hi[j] - region.lo[j]) * static_cast<double>(i) / (grid_probe - 1);
    }
    best = std::min(best, std::sqrt(models::model_covariance(model, x, x)));
  }
  return best;
}

}  // namespace sectorial::lnd
