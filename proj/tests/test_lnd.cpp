#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "sectorial/core/ensemble.hpp"
#include "sectorial/lnd/lnd.hpp"
#include "sectorial/models/covariance.hpp"
#include "sectorial/util/errors.hpp"
#include "sectorial/util/rng.hpp"

using namespace sectorial;
using namespace sectorial::lnd;
using doctest::Approx;

namespace {

// Exhaustive scan written independently of the library loop.
double brute_sheet_bound(const Point& x, const std::vector<Point>& pts, double alpha) {
  std::vector<Point> all = pts;
  all.insert(all.begin(), Point(x.size(), 0.0));
  double total = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : all) best = std::fmin(best, std::pow(std::fabs(x[j] - y[j]), 2 * alpha));
    total += best;
  }
  return total;
}

}  // namespace

TEST_CASE("sectorial bound: basic cases") {
  auto bs = FieldModel::brownian_sheet(2, 1, Box::cube(2, 0.5, 2));
  CHECK(sectorial_lower_bound(bs, Point{1.2, 1.7}, {{1.2, 1.7}, {0.9, 1.1}}) == 0.0);

  auto bm = FieldModel::fractional_sheet(1, 1, 0.7, Box::cube(1, 0.5, 2));
  const double t = 1.5, s = 1.0;
  CHECK(sectorial_lower_bound(bm, Point{t}, {{s}}) == Approx(std::pow(t - s, 1.4)).epsilon(1e-15));
  // without the anchor the origin term disappears
  CHECK(sectorial_lower_bound(bm, Point{0.6}, {{1.9}}, false) == Approx(std::pow(1.3, 1.4)));
  CHECK(sectorial_lower_bound(bm, Point{0.6}, {{1.9}}, true) == Approx(std::pow(0.6, 1.4)));
}

TEST_CASE("sectorial bound matches brute force and is dominated by every term") {
  util::RandomStream rng(42, 0);
  for (double alpha : {0.3, 0.5, 0.8}) {
    auto m = FieldModel::fractional_sheet(2, 1, alpha, Box::cube(2, 0.2, 3));
    for (int k = 0; k < 200; ++k) {
      Point x{rng.uniform(0.2, 3), rng.uniform(0.2, 3)};
      std::vector<Point> pts;
      const int n = 1 + static_cast<int>(rng.below(5));
      for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(0.2, 3), rng.uniform(0.2, 3)});
      const double b = sectorial_lower_bound(m, x, pts);
      CHECK(b == Approx(brute_sheet_bound(x, pts, alpha)).epsilon(1e-14));
      for (const auto& y : pts)
        CHECK(b <= std::pow(std::fabs(x[0] - y[0]), 2 * alpha) + std::pow(std::fabs(x[1] - y[1]), 2 * alpha) + 1e-15);
    }
  }
}

TEST_CASE("sectorial bound homogeneity near a base point") {
  auto m = FieldModel::fractional_sheet(2, 1, 0.7, Box::cube(2, 0.5, 3));
  const Point base{1.5, 1.5};
  const std::vector<Point> offsets{{0.1, -0.05}, {-0.07, 0.12}, {0.02, 0.03}};
  const Point dx{0.04, -0.09};
  auto eval = [&](double lambda) {
    std::vector<Point> pts;
    for (const auto& o : offsets) pts.push_back({base[0] + lambda * o[0], base[1] + lambda * o[1]});
    return sectorial_lower_bound(m, Point{base[0] + lambda * dx[0], base[1] + lambda * dx[1]}, pts, false);
  };
  for (double lambda : {0.5, 0.25, 2.0}) CHECK(eval(lambda) == Approx(std::pow(lambda, 1.4) * eval(1.0)).epsilon(1e-12));
}

TEST_CASE("wave bound uses gaps in t+x and t-x") {
  auto w = FieldModel::wave_white(1, Box{{0.2, 0.2}, {1.5, 1.5}});
  const Point x = models::to_rotated(1.0, 0.1);
  const Point y = models::to_rotated(0.9, 0.15);
  const double expected = std::fabs((1.0 + 0.1) - (0.9 + 0.15)) + std::fabs((1.0 - 0.1) - (0.9 - 0.15));
  CHECK(sectorial_lower_bound(w, x, {y}) == Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(sectorial_lower_bound(w, x, {}), DomainError);
}

TEST_CASE("Brownian motion ratio is one when t - s <= s") {
  auto bm = FieldModel::brownian_sheet(1, 1, Box::cube(1, 0.5, 3));
  for (auto [s, t] : {std::pair{1.0, 1.5}, {2.0, 2.9}, {0.8, 1.6}}) {
    const double cv = core::conditional_variance(bm, Point{t}, {{s}});
    CHECK(cv / sectorial_lower_bound(bm, Point{t}, {{s}}) == Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("lnd survey: positivity, skipping, prefix consistency") {
  auto bs = FieldModel::brownian_sheet(2, 1, Box::cube(2, 0.5, 2));
  LndConfig cfg;
  cfg.trials = 60;
  auto rep = lnd_ratio_survey(bs, cfg, 7);
  CHECK(rep.used + rep.skipped == 60);
  CHECK(rep.min_ratio > 0.0);
  CHECK(rep.quantiles.size() == rep.quantile_levels.size());
  for (std::size_t i = 1; i < rep.quantiles.size(); ++i) CHECK(rep.quantiles[i] >= rep.quantiles[i - 1]);
  for (const auto& tr : rep.trials) {
    if (tr.skipped) continue;
    CHECK(tr.conditional_variance >= 0.0);
  }

  cfg.trials = 120;
  auto longer = lnd_ratio_survey(bs, cfg, 7, 2);
  for (std::size_t k = 0; k < 60; ++k) CHECK(longer.trials[k].ratio == rep.trials[k].ratio);
  CHECK(longer.min_ratio <= rep.min_ratio);

  // a floor above every achievable bound makes all configurations degenerate
  LndConfig one;
  one.trials = 5;
  one.degenerate_floor = 1e6;
  auto deg = lnd_ratio_survey(bs, one, 1);
  CHECK(deg.inconclusive);
  CHECK(deg.skipped == 5);

  LndConfig bad;
  bad.locality = 0.0;
  CHECK_THROWS_AS(lnd_ratio_survey(bs, bad, 1), DomainError);
}

TEST_CASE("lnd survey: wave configurations respect locality") {
  auto w = FieldModel::wave_white(1, Box{{0.4, 0.4}, {1.2, 1.2}});
  LndConfig cfg;
  cfg.trials = 40;
  cfg.locality = 0.25;
  auto rep = lnd_ratio_survey(w, cfg, 3);
  CHECK(rep.min_ratio > 0.0);
  for (const auto& tr : rep.trials)
    if (!tr.skipped) CHECK(tr.conditional_variance <= 0.25 * 1.2 * 1.2 * 2 + 1e-12);
}

TEST_CASE("a3 ratio equals finite difference of cone areas") {
  auto w = FieldModel::wave_white(1, Box{{0.2, 0.2}, {1.5, 1.5}});
  const Point x = models::to_rotated(1.0, 0.0);
  CHECK(a3_ratio(w, x, x, x) == 0.0);
  const Point y = models::to_rotated(1.02, 0.01), yb = models::to_rotated(0.97, -0.02);
  const double fd = (models::cone_intersection_area(1.02, 0.01, 1.0, 0.0) -
                     models::cone_intersection_area(0.97, -0.02, 1.0, 0.0)) / 4.0;
  const double dist = std::fabs(y[0] - yb[0]) + std::fabs(y[1] - yb[1]);
  CHECK(a3_ratio(w, x, y, yb) == Approx(std::fabs(fd) / dist).epsilon(1e-12));

  auto rep = a3_smoothness_check(w, Box{{0.6, 0.6}, {0.8, 0.8}}, 0.02, 200, 5);
  CHECK(std::isfinite(rep.max_ratio));
  CHECK(rep.max_ratio > 0.0);
  CHECK(rep.max_ratio_half <= rep.max_ratio);
  auto rep2 = a3_smoothness_check(w, Box{{0.6, 0.6}, {0.8, 0.8}}, 0.02, 400, 5);
  CHECK(rep2.max_ratio >= rep.max_ratio);
  CHECK(rep.max_ratio / rep2.max_ratio >= 0.9);

  // probes would leave the domain
  CHECK_THROWS_AS(a3_smoothness_check(w, Box{{0.2, 0.6}, {0.8, 0.8}}, 0.02, 10, 5), DomainError);

  auto bs = FieldModel::brownian_sheet(2, 1, Box::cube(2, 1, 2));
  CHECK_THROWS_AS(a3_smoothness_check(bs, Box::cube(2, 1, 2), 0.1, 10, 1), DomainError);
}

TEST_CASE("a3 variance floor") {
  auto w = FieldModel::wave_white(1, Box{{0.2, 0.2}, {1.5, 1.5}});
  const Point x = models::to_rotated(1.0, 0.0);
  CHECK(a3_variance_floor(w, Box{x, x}, 1) == Approx(0.5).epsilon(1e-12));
  CHECK(a3_variance_floor(w, Box{{0.5, 0.5}, {1.0, 1.0}}, 5) > 0.0);
  CHECK_THROWS_AS(a3_variance_floor(w, Box{{-0.5, 0.5}, {1.0, 1.0}}, 3), DomainError);

  for (double alpha : {0.3, 0.5, 0.9}) {
    auto m = FieldModel::fractional_sheet(3, 1, alpha, Box::cube(3, 0.5, 2));
    CHECK(a3_variance_floor(m, Box::cube(3, 1, 1), 1) == Approx(1.0).epsilon(1e-14));
  }
}
