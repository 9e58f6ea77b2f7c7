#include "sectorial/models/gauge.hpp"

#include <algorithm>
#include <cmath>

#include "sectorial/util/errors.hpp"

namespace sectorial::models {

namespace {

// Root u > 1 of u log u = c, by bisection (u log u is increasing there).
double solve_u_log_u(double c) {
  double lo = 1.0, hi = 2.0;
  while (hi * std::log(hi) < c) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::log(mid) < c ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

GaugeFunction::GaugeFunction(double s_exp, double k_exp) : s_(s_exp), k_(k_exp) {
  if (!(s_exp >= 0.0) || !(k_exp >= 0.0)) throw DomainError("gauge exponents must be >= 0");
  if (k_exp > 0.0 && s_exp == 0.0)
    throw DomainError("a pure loglog gauge is decreasing; need s_exp > 0");
  // d/dr log(raw) = (s L log(1/r) - k) / (r L log(1/r)) with L = loglog(1/r).
  r_freeze_ = k_exp == 0.0 ? std::exp(-1.0) : std::exp(-solve_u_log_u(k_exp / s_exp));
}

double GaugeFunction::raw(double r) const {
  if (!(r > 0.0 && r < std::exp(-1.0))) throw DomainError("raw gauge needs 0 < r < 1/e");
  return std::pow(r, s_) * std::pow(std::log(std::log(1.0 / r)), k_);
}

double GaugeFunction::operator()(double r) const {
  if (r < 0.0) throw DomainError("gauge radius must be nonnegative");
  if (r == 0.0) return 0.0;
  if (k_ == 0.0) return std::pow(r, s_);
  const double rl = std::min(r, r_freeze_);
  return std::pow(r, s_) * std::pow(std::log(std::log(1.0 / rl)), k_);
}

GaugeFunction GaugeFunction::range(int n, double alpha) { return {n / alpha, static_cast<double>(n)}; }

GaugeFunction GaugeFunction::level(int n, int d, double alpha) {
  return {n - alpha * d, alpha * d};
}

}  // namespace sectorial::models
