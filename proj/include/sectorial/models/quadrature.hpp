#pragma once

#include <span>
#include <vector>

namespace sectorial::models {

class GaussLegendre {
 public:
  explicit GaussLegendre(int n);

  int size() const { return static_cast<int>(x_.size()); }
  const std::vector<double>& nodes() const { return x_; }    // on [-1, 1]
  const std::vector<double>& weights() const { return w_; }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) s += w_[i] * f(mid + half * x_[i]);
    return half * s;
  }

 private:
  std::vector<double> x_;
  std::vector<double> w_;
};

// Shared rule for n in [1, 64]; thread-safe.
const GaussLegendre& gauss_legendre(int n);

struct Panel {
  double lo;
  double hi;
};

// Panels covering [eps0, c): geometric doubling from eps0 up to h0, then
// panels of width at most `width`, with every value of `breaks` inside
// (eps0, c) used as a panel boundary.
std::vector<Panel> graded_panels(double eps0, double h0, double width, double c,
                                 std::span<const double> breaks = {});

// Integral of cos(omega xi) xi^p over [X, inf), for -3 < p < -1 and X > 0.
double cos_power_tail(double omega, double p, double X);

}  // namespace sectorial::models
