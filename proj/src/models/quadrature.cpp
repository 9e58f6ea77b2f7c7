#include "sectorial/models/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "sectorial/util/errors.hpp"

namespace sectorial::models {

GaussLegendre::GaussLegendre(int n) : x_(static_cast<std::size_t>(n)), w_(static_cast<std::size_t>(n)) {
  if (n < 1) throw DomainError("Gauss-Legendre order must be positive");
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    x_[static_cast<std::size_t>(i)] = -z;
    x_[static_cast<std::size_t>(n - 1 - i)] = z;
    w_[static_cast<std::size_t>(i)] = w;
    w_[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) x_[static_cast<std::size_t>(n / 2)] = 0.0;
}

const GaussLegendre& gauss_legendre(int n) {
  static std::array<std::unique_ptr<GaussLegendre>, 65> rules;
  static std::mutex mutex;
  if (n < 1 || n > 64) throw DomainError("Gauss-Legendre order must lie in [1, 64]");
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = rules[static_cast<std::size_t>(n)];
  if (!slot) slot = std::make_unique<GaussLegendre>(n);
  return *slot;
}

std::vector<Panel> graded_panels(double eps0, double h0, double width, double c,
                                 std::span<const double> breaks) {
  std::vector<Panel> panels;
  if (!(c > eps0)) return panels;
  if (!(eps0 > 0.0) || !(h0 > eps0) || !(width > 0.0))
    throw DomainError("graded_panels needs 0 < eps0 < h0 and width > 0");
  std::vector<double> pts{eps0};
  const double top = std::min(h0, c);
  for (double x = 2.0 * eps0; x < top; x *= 2.0) pts.push_back(x);
  pts.push_back(top);
  for (double b : breaks)
    if (b > eps0 && b < c) pts.push_back(b);
  pts.push_back(c);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double u = pts[i], v = pts[i + 1];
    if (u < h0) {
      panels.push_back({u, v});
      continue;
    }
    const auto pieces = static_cast<std::size_t>(std::ceil((v - u) / width - 1e-9));
    const double step = (v - u) / static_cast<double>(std::max<std::size_t>(pieces, 1));
    for (std::size_t k = 0; k < std::max<std::size_t>(pieces, 1); ++k) {
      const double lo = u + step * static_cast<double>(k);
      const double hi = k + 1 == std::max<std::size_t>(pieces, 1) ? v : u + step * static_cast<double>(k + 1);
      panels.push_back({lo, hi});
    }
  }
  return panels;
}

namespace {

// Re of i e^{iY} Y^p sum_k i^k p(p-1)...(p-k+1) Y^{-k}: the asymptotic
// expansion of the integral of cos(u) u^p over [Y, inf).
double cos_tail_asymptotic(double p, double Y) {
  double re = 0.0, im = 0.0;  // accumulates sum_k i^k c_k / Y^k
  double coef = 1.0;
  for (int k = 0; k < 24; ++k) {
    switch (k % 4) {
      case 0: re += coef; break;
      case 1: im += coef; break;
      case 2: re -= coef; break;
      case 3: im -= coef; break;
    }
    coef *= (p - k) / Y;
  }
  // i e^{iY} (re + i im) = i (cos Y + i sin Y)(re + i im); take the real part.
  const double c = std::cos(Y), s = std::sin(Y);
  return std::pow(Y, p) * (-(s * re + c * im));
}

}  // namespace

double cos_power_tail(double omega, double p, double X) {
  if (!(p > -3.0 && p < -1.0)) throw DomainError("cos_power_tail needs -3 < p < -1");
  if (!(X > 0.0)) throw DomainError("cos_power_tail needs X > 0");
  omega = std::abs(omega);
  const double plain = std::pow(X, p + 1.0) / (-p - 1.0);
  if (omega == 0.0) return plain;
  const double Y = omega * X;
  const double scale = std::pow(omega, -p - 1.0);
  if (Y < 1.0) {
    // Integral of (cos u - 1) u^p over [0, inf) by reflection, minus its
    // Taylor part on [0, Y].
    const double full = std::numbers::pi /
                        (2.0 * std::tgamma(-p) * std::sin(std::numbers::pi * (p + 1.0) / 2.0));
    double head = 0.0, term = 1.0;
    for (int k = 1; k < 30; ++k) {
      term *= -1.0 / ((2.0 * k - 1.0) * (2.0 * k));
      const double e = 2.0 * k + p + 1.0;
      head += term * std::pow(Y, e) / e;
      if (std::abs(term) < 1e-20) break;
    }
    return plain + scale * (full - head);
  }
  constexpr double kSwitch = 40.0;
  if (Y >= kSwitch) return scale * cos_tail_asymptotic(p, Y);
  const auto& gl = gauss_legendre(16);
  double mid = 0.0;
  const int pieces = static_cast<int>(std::ceil((kSwitch - Y) / 0.5));
  const double step = (kSwitch - Y) / pieces;
  for (int i = 0; i < pieces; ++i) {
    const double a = Y + i * step;
    mid += gl.integrate([p](double u) { return std::cos(u) * std::pow(u, p); }, a, a + step);
  }
  return scale * (mid + cos_tail_asymptotic(p, kSwitch));
}

}  // namespace sectorial::models
