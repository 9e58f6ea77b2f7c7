#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <vector>

#include "sectorial/models/field_model.hpp"

namespace sectorial::spectral {

using models::FieldModel;
using models::Point;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Frequency band [a, b) in the sup-norm of the frequency vector, plus the
// parameters of the remainder envelope.
struct BandSpec {
  double a = 0.0;
  double b = kInfinity;
  Point s;  // base point of the axis decomposition
  double r0 = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.5;
  double a0 = 0.0;

  // Parameters the model's lemma prescribes: sheets get gamma2 = alpha and
  // a0 = 0; waves get gamma2 = 1/2, a0 = 4 and, for beta < 1, gamma1 at the
  // midpoint of ((1 - beta)/2, 1/2).
  static BandSpec for_model(const FieldModel& model, Point s, double a, double b);
  void validate(const FieldModel& model) const;
};

struct SpectralDiscretization {
  // Deterministic quadrature.
  double cutoff = 1e4;      // Xi: panels stop here, the rest is integrated exactly
  double small_xi = 1e-6;   // below this (relative to the oscillation scale) use the series head
  int gl_points = 16;
  // Node lattice used by the samplers: panels of this width, with
  // `grading_levels` halvings towards the origin.
  double node_panel = 1.0;
  int node_gl = 4;
  int grading_levels = 10;
  double node_cutoff = 64.0;
};

// c_alpha from matching the one-dimensional identity at x = y = 1.
double fbs_alpha_constant(double alpha, const SpectralDiscretization& disc = {});

// 2 * int_0^c f_p(u xi) f_p(w xi) xi^{-2 alpha - 1} d xi, f_0 = 1 - cos, f_1 = sin.
// c may be infinite.
double fbs_axis_integral(int p, double u, double w, double c, double alpha,
                         const SpectralDiscretization& disc = {});

// Covariance of the band-restricted field v([a, b), .) at all pairs of `points`.
// Sheets: product-of-axis integrals; waves: two-dimensional quadrature over
// (tau, xi), with points in (eta, theta) and the full band taken from the
// closed-form kernel.
Eigen::MatrixXd band_covariance(const FieldModel& model, const std::vector<Point>& points, double a, double b,
                                const SpectralDiscretization& disc = {});

// ||v([a, b), x) - v([a, b), y)||^2 by quadrature (sheets, N <= 2).
double fbs_spectral_l2(const FieldModel& model, const Point& x, const Point& y, const BandSpec& band,
                       const SpectralDiscretization& disc = {});

// Square root of the normalising factor in front of the wave representation.
double wave_representation_constant(double beta);

}  // namespace sectorial::spectral
