#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sectorial/core/ensemble.hpp"
#include "sectorial/core/grid.hpp"
#include "sectorial/core/sample_path.hpp"
#include "sectorial/models/field_model.hpp"
#include "sectorial/spectral/spectral.hpp"

namespace sectorial::path_stats {

using core::Grid;
using core::SamplePath;
using models::FieldModel;
using models::Point;

// Grid points of the closed window I_r(s) = T n prod [s_j - r, s_j + r].
struct Window {
  std::vector<std::size_t> lo, hi;  // inclusive index range per axis
  std::size_t size() const;
  std::vector<std::size_t> indices(const Grid& grid) const;
};
Window window(const Grid& grid, std::span<const double> s, double r);

struct SojournResult {
  Point s;
  double r = 0.0;
  double tau = 0.0;
  double cell_volume = 0.0;
};

// Closed ball: counts grid points with |v(x) - v(s)| <= r. The grid measure
// of T is size() * cell_volume().
SojournResult sojourn_time(const SamplePath& path, std::span<const double> s, double r);

struct SojournSurveySpec {
  std::vector<double> r_list;
  int n_max = 3;
  int reps = 1000;
  int bootstrap = 400;
  double k_tolerance = 0.3;  // allowed relative spread of K-hat across r
};

struct SojournMomentRow {
  int n = 0;
  double r = 0.0;
  double moment = 0.0;  // E-hat[tau^n]
  double ci_lo = 0.0, ci_hi = 0.0;
  double ratio = 0.0;   // moment / ((n!)^N r^{nN/alpha})
};

struct SojournSurvey {
  std::vector<SojournMomentRow> rows;
  std::vector<double> k_hat;  // per r: max_n ratio_n^{1/n}
  double k_spread = 0.0;      // max k_hat / min k_hat - 1
  double k_tolerance = 0.3;
  bool resolution_ok = true;
  std::string resolution_note;
  double spacing = 0.0;
  bool r_stable() const;
};

SojournSurvey sojourn_moment_survey(const core::GaussianEnsemble& ens, std::span<const double> s,
                                    const SojournSurveySpec& spec, std::uint64_t seed, int threads = 1);

// max |v(x) - v(s)| over the grid points of I_r(s).
double sup_increment(const SamplePath& path, std::span<const double> s, double r);
// max |v(x) - v(y)| over pairs in I_r(s).
double window_diameter(const SamplePath& path, std::span<const double> s, double r);

struct ModulusRow {
  double L = 0.0;
  int hits = 0;
  double frequency = 0.0;
  bool censored = false;  // no hits
  double exponent = 0.0;  // -log(frequency) / log(1/r), when hits > 0
};

struct ModulusReport {
  double r = 0.0;
  int reps = 0;
  std::vector<ModulusRow> rows;
  int estimable = 0;         // rows with >= 10 hits
  double quadratic_slope = 0.0;  // exponent ~ c0 + c2 L^2 over estimable rows
  bool monotone = true;
  bool quadratic_growth() const { return estimable >= 2 && quadratic_slope > 0.0; }
};

ModulusReport modulus_tail_check(const core::GaussianEnsemble& ens, std::span<const double> s, double r,
                                 const std::vector<double>& L_list, int reps, std::uint64_t seed, int threads = 1);

struct SmallBallRow {
  double eps = 0.0;
  int successes = 0;
  double p_hat = 0.0;
  double neg_log_p = 0.0;  // point estimate, or the lower confidence bound when censored
  bool censored = false;
  double k0 = 0.0;         // neg_log_p * eps^{1/alpha} / r
};

struct SmallBallReport {
  double r = 0.0;
  int reps = 0;
  std::vector<SmallBallRow> rows;
  double k0_hat = 0.0;       // max over uncensored rows
  double k0_hat_half = 0.0;  // same from the first reps/2 replicates
  double drift() const;      // |k0_hat / k0_hat_half - 1|
};

struct SmallBallSpec {
  std::vector<double> eps_list;
  int reps = 2000;
  std::size_t points_per_axis = 41;
};

// Sup of |vt([a,b), x)| over I_r(s), with vt(x) = sum_j vt^j(x_j) sampled on
// the cross through s.
SmallBallReport band_small_ball(const FieldModel& model, const spectral::BandSpec& band, const Point& s, double r,
                                const SmallBallSpec& spec, std::uint64_t seed,
                                const spectral::SpectralDiscretization& disc = {}, int threads = 1);

struct ChungStatistic {
  Point s;
  std::vector<double> r_values;
  std::vector<double> normalized_sups;
  double min_over_r = 0.0;
};

// r runs over r_max, r_max/2, ... down to r_min.
std::vector<double> dyadic_radii(double r_min, double r_max);
double chung_normalizer(double r, double alpha);  // r^alpha (loglog 1/r)^{-alpha}

ChungStatistic chung_statistic(const SamplePath& path, std::span<const double> s, double r_min, double r_max,
                               double alpha);

// The same statistic for a wave field given at scattered (t, x) points: the
// window is the square I_r(s) of the rotated coordinates.
ChungStatistic chung_statistic_tx(const std::vector<Point>& tx_points, std::span<const double> values, int d,
                                  const Point& s_tx, double r_min, double r_max, double alpha);

struct ChungEnsemble {
  std::vector<ChungStatistic> stats;
  std::vector<double> minima;
  double q05 = 0.0, q10 = 0.0, q95 = 0.0;
};

ChungEnsemble chung_ensemble(const core::GaussianEnsemble& ens, std::span<const double> s, double r_min,
                             double r_max, std::size_t count, std::uint64_t seed, int threads = 1);

// Fraction of paths with some dyadic r in [r0^2, r0] whose normalized sup is
// at most K.
double chung_event_frequency(const std::vector<ChungStatistic>& stats, double r0, double K);

}  // namespace sectorial::path_stats
