#pragma once

#include <span>

#include "sectorial/models/field_model.hpp"

namespace sectorial::models {

// Product kernel prod_j (|x_j|^{2a} + |y_j|^{2a} - |x_j - y_j|^{2a}) / 2.
double fbs_covariance(std::span<const double> x, std::span<const double> y, double alpha);

// Area of the intersection of the backward light cones Delta(t, x) and
// Delta(t', x') in the (s, y) half-plane.
double cone_intersection_area(double t1, double x1, double t2, double x2);

struct SpectralResult {
  double value = 0.0;
  double cutoff = 0.0;      // frequency where the panels stop
  double tail_bound = 0.0;  // bound on the part of the tail not integrated exactly
};

// E[U(t,x) U(t',x')] from the frequency-space form, for 0 < beta <= 1.
// With beta = 1 the constant is 1, which makes this an independent check of
// the cone-area route.
SpectralResult swe_covariance_spectral(double t1, double x1, double t2, double x2, double beta,
                                       const QuadratureSpec& quad = {});

// Covariance of the 1-D wave solution at (t, x) and (t', x'); p = (t, x).
double swe_covariance(std::span<const double> p, std::span<const double> q, double beta,
                      const QuadratureSpec& quad = {});

// Normalisation of the Riesz spectral density; equals 1 at beta = 1 by
// convention for white noise.
double riesz_constant(double beta);

// Single-component covariance of the model at two admissible points.
double model_covariance(const FieldModel& model, std::span<const double> x,
                        std::span<const double> y);

}  // namespace sectorial::models
