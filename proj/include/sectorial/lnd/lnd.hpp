#pragma once

#include <cstdint>
#include <vector>

#include "sectorial/models/field_model.hpp"

namespace sectorial::lnd {

using models::Box;
using models::FieldModel;
using models::Point;

struct LndConfig {
  int n_points = 4;            // conditioning set size, or its maximum when vary_n
  bool vary_n = true;          // draw n uniformly from 1..n_points per trial
  int trials = 200;
  double locality = 0.25;      // delta_0: max |t - t^i| + |x - x^i| for wave configurations
  bool include_origin_anchor = true;  // the y^0 = 0 term for sheets
  double degenerate_floor = 1e-10;
};

// Sheets: sum_j min_{0<=i<=n} |x_j - y^i_j|^{2 alpha} (y^0 = 0 when anchored).
// Waves, in (eta, theta): min_i |sqrt2 (theta - theta_i)|^{2-beta}
// + min_i |sqrt2 (eta - eta_i)|^{2-beta}, i.e. gaps in t+x and t-x.
double sectorial_lower_bound(const FieldModel& model, std::span<const double> x, const std::vector<Point>& pts,
                             bool include_origin_anchor = true);

struct LndTrial {
  std::size_t index = 0;
  int n = 0;
  double conditional_variance = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool skipped = false;
};

struct LndSurvey {
  double min_ratio = 0.0;
  std::vector<double> quantile_levels{0.05, 0.25, 0.5, 0.75, 0.95};
  std::vector<double> quantiles;
  std::size_t used = 0;
  std::size_t skipped = 0;
  bool inconclusive = false;  // every configuration was degenerate
  std::vector<LndTrial> trials;
};

// Trial k draws from stream (seed, k), so a longer survey extends a shorter one.
LndSurvey lnd_ratio_survey(const FieldModel& model, const LndConfig& cfg, std::uint64_t seed, int threads = 1);

struct AssumptionThreeParams {
  double delta = 1.0;  // smoothness exponent, must exceed alpha
  double rho = 0.0;
  double c3_hat = 0.0;
  double c4_hat = 0.0;
  double eps0 = 0.0;
};

struct A3Report {
  double max_ratio = 0.0;       // over all trials
  double max_ratio_half = 0.0;  // over the first half, for the doubling diagnostic
  int trials = 0;
  double rho = 0.0;
};

// |E[(v(y) - v(ybar)) v(x)]| / (|eta - eta'| + |theta - theta'|); 0 when y == ybar.
double a3_ratio(const FieldModel& model, const Point& x, const Point& y, const Point& ybar);

// max over trials of |E[(v(y) - v(ybar)) v(x)]| / (|eta - eta'| + |theta - theta'|),
// with x uniform on I and y, ybar uniform on the box of radius 2 rho around x.
A3Report a3_smoothness_check(const FieldModel& model, const Box& region, double rho, int trials, std::uint64_t seed,
                             int threads = 1);

// min of sqrt Var v_1 over a probe^N lattice covering the region.
double a3_variance_floor(const FieldModel& model, const Box& region, int grid_probe);

}  // namespace sectorial::lnd
