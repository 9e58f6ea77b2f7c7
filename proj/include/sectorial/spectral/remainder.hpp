#pragma once

#include <cstdint>
#include <vector>

#include "sectorial/spectral/spectral.hpp"

namespace sectorial::spectral {

// Variance split of R = v(x) - v(y) - vt([a,b), x) + vt([a,b), y): the part
// of v(x) - v(y) outside the band, and the band part of (v(x) - v(y)) minus
// the axis decomposition.
struct TildeParts {
  double outside = 0.0;
  double inside = 0.0;
  double l2() const;  // sqrt(outside + inside)
};

// Points vt is built from: x, y and their axis projections through band.s.
// Sheets use s^{(j)}(x_j); waves use (eta, theta_0) and (eta_0, theta).
TildeParts tilde_decomposition_parts(const FieldModel& model, const BandSpec& band, const Point& x, const Point& y,
                                     double r, const SpectralDiscretization& disc = {});

double tilde_decomposition_l2(const FieldModel& model, const BandSpec& band, const Point& x, const Point& y, double r,
                              const SpectralDiscretization& disc = {});

// Right-hand side of the remainder bound without its constant, term by term.
struct Envelope {
  double low = 0.0;     // a^{1-alpha} |x - y|
  double high = 0.0;    // r^{gamma1} b^{gamma1 - alpha}
  double local = 0.0;   // r^{gamma2} |x - y|^alpha
  double total() const { return low + high + local; }
};

// |x - y| is Euclidean for sheets and |eta - eta'| + |theta - theta'| for waves.
Envelope remainder_envelope(const FieldModel& model, const BandSpec& band, double r, const Point& x, const Point& y);

struct SweepSpec {
  std::vector<double> r_values;
  std::vector<double> a_values;
  std::vector<double> b_values;  // may contain infinity
  int pairs = 20;                // per (r, a, b)
};

struct SweepRow {
  double r = 0.0, a = 0.0, b = 0.0;
  int pair = 0;
  Point x, y;
  double remainder = 0.0;
  Envelope envelope;
  double ratio = 0.0;
  bool degenerate = false;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double c2_hat = 0.0;        // max ratio over all pairs
  double c2_hat_half = 0.0;   // max over the first half of the pairs
  double drift = 0.0;         // (c2_hat - c2_hat_half) / c2_hat_half
};

// Pairs are drawn uniformly from prod_j [s_j, s_j + r]; pair k of a cell uses
// stream (seed, k) so doubling `pairs` keeps the first half.
SweepReport remainder_bound_sweep(const FieldModel& model, const Point& s, const SweepSpec& sweep, std::uint64_t seed,
                                  const SpectralDiscretization& disc = {}, int threads = 1);

}  // namespace sectorial::spectral
