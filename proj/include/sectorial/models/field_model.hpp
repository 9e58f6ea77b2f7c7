#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sectorial::models {

using Point = std::vector<double>;

// Compact axis-aligned interval [lo_1, hi_1] x ... x [lo_N, hi_N].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  double volume() const;
  bool contains(std::span<const double> x, double slack = 0.0) const;
  static Box cube(std::size_t n, double lo, double hi);
};

enum class Family { FractionalBrownianSheet, BrownianSheet, WaveWhite, WaveColored };

std::string family_name(Family f);

// Controls the oscillatory quadrature behind the colored-noise wave covariance.
struct QuadratureSpec {
  double rel_tol = 1e-8;     // target error relative to the covariance scale
  double max_cutoff = 1e7;   // refuse frequency cutoffs beyond this
  int gl_points = 12;        // Gauss-Legendre nodes per panel
};

// One of the field families. Wave families live in rotated coordinates
// (eta, theta) = ((t - x)/sqrt2, (t + x)/sqrt2), so n() == 2 for them.
class FieldModel {
 public:
  static FieldModel fractional_sheet(int n, int d, double alpha, Box domain);
  static FieldModel brownian_sheet(int n, int d, Box domain);
  static FieldModel wave_white(int d, Box domain);
  static FieldModel wave_colored(int d, double beta, Box domain, QuadratureSpec quad = {});

  Family family() const { return family_; }
  int n() const { return n_; }
  int d() const { return d_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const Box& domain() const { return domain_; }
  const QuadratureSpec& quadrature() const { return quad_; }

  bool is_sheet() const {
    return family_ == Family::FractionalBrownianSheet || family_ == Family::BrownianSheet;
  }
  bool is_wave() const { return !is_sheet(); }

  // Whether x lies in the open parameter set of the family (not just the box).
  bool admissible(std::span<const double> x) const;
  void require_admissible(std::span<const double> x, const char* what) const;

  std::string tag() const;  // short identifier used in reports

 private:
  FieldModel(Family f, int n, int d, double alpha, double beta, Box domain, QuadratureSpec quad);

  Family family_;
  int n_;
  int d_;
  double alpha_;
  double beta_;
  Box domain_;
  QuadratureSpec quad_;
};

// Rotation between (t, x) and (eta, theta).
Point to_rotated(double t, double x);
Point to_time_space(double eta, double theta);

}  // namespace sectorial::models
