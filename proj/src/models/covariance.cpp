#include "sectorial/models/covariance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sectorial/models/quadrature.hpp"
#include "sectorial/util/errors.hpp"

namespace sectorial::models {

double fbs_covariance(std::span<const double> x, std::span<const double> y, double alpha) {
  if (x.size() != y.size()) throw DomainError("fbs_covariance: dimension mismatch");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  const double h = 2.0 * alpha;
  double c = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < 0.0 || y[j] < 0.0) throw DomainError("fbs_covariance needs nonnegative coordinates");
    if (alpha == 0.5)
      c *= std::min(x[j], y[j]);
    else
      c *= 0.5 * (std::pow(x[j], h) + std::pow(y[j], h) - std::pow(std::abs(x[j] - y[j]), h));
  }
  return c;
}

namespace {

struct Vec2 {
  double s, y;
};

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.s - o.s) * (b.y - o.y) - (a.y - o.y) * (b.s - o.s); }

// Counterclockwise triangle {0 <= s <= t, |y - x| <= t - s}.
std::array<Vec2, 3> cone(double t, double x) { return {{{0.0, x - t}, {t, x}, {0.0, x + t}}}; }

// Sutherland-Hodgman clip of a convex polygon by one half-plane.
std::vector<Vec2> clip(const std::vector<Vec2>& poly, Vec2 a, Vec2 b) {
  std::vector<Vec2> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i], q = poly[(i + 1) % n];
    const double cp = cross(a, b, p), cq = cross(a, b, q);
    if (cp >= 0) out.push_back(p);
    if ((cp >= 0) != (cq >= 0)) {
      const double f = cp / (cp - cq);
      out.push_back({p.s + f * (q.s - p.s), p.y + f * (q.y - p.y)});
    }
  }
  return out;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i], q = poly[(i + 1) % poly.size()];
    a += p.s * q.y - q.s * p.y;
  }
  return 0.5 * std::abs(a);
}

double sinc(double z) { return std::abs(z) < 1e-4 ? 1.0 - z * z / 6.0 : std::sin(z) / z; }

}  // namespace

double cone_intersection_area(double t1, double x1, double t2, double x2) {
  if (t1 < 0.0 || t2 < 0.0) throw DomainError("light cones need t >= 0");
  if (t1 == 0.0 || t2 == 0.0) return 0.0;
  if (std::abs(x1 - x2) >= t1 + t2) return 0.0;
  const auto a = cone(t1, x1);
  const auto b = cone(t2, x2);
  std::vector<Vec2> poly(a.begin(), a.end());
  for (int e = 0; e < 3 && !poly.empty(); ++e) poly = clip(poly, b[e], b[(e + 1) % 3]);
  return poly.size() < 3 ? 0.0 : polygon_area(poly);
}

SpectralResult swe_covariance_spectral(double t1, double x1, double t2, double x2, double beta,
                                       const QuadratureSpec& quad) {
  if (t1 < 0.0 || t2 < 0.0) throw DomainError("wave covariance needs t >= 0");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0,1]");
  if (t1 == 0.0 || t2 == 0.0) return {};

  const double m = std::min(t1, t2);
  const double dt = t1 - t2;
  const double sum = t1 + t2;
  const double dx = std::abs(x1 - x2);
  const double c_beta = riesz_constant(beta);
  const double pref = c_beta / std::numbers::pi;
  const double p = beta - 3.0;

  // s-integral of sin((t1-s)xi) sin((t2-s)xi) / xi^2 over [0, m].
  const auto& gl_s = gauss_legendre(16);
  auto kernel = [&](double xi) {
    if (xi * sum < 1.0) {
      return gl_s.integrate(
          [&](double s) {
            const double a = t1 - s, b = t2 - s;
            return a * b * sinc(a * xi) * sinc(b * xi);
          },
          0.0, m);
    }
    const double big = 0.5 * m * std::cos(dt * xi);
    const double small = (std::sin(sum * xi) - std::sin(std::abs(dt) * xi)) / (4.0 * xi);
    return (big - small) / (xi * xi);
  };
  const double g0 = t1 * t2 * m - sum * m * m / 2.0 + m * m * m / 3.0;

  const double scale = std::pow(t1 * t2, (3.0 - beta) / 2.0) / 4.0;
  const double tol = quad.rel_tol * scale;
  const double h0 = std::min(1.0, std::numbers::pi / (sum + dx));
  const double eps0 = 1e-6 * h0;
  // Remainder beyond the exactly integrated leading tail is at most
  // pref * Xi^{beta-3} / (2 (3 - beta)); keep it below tol / 2.
  double cutoff = std::pow(tol / pref * (3.0 - beta), 1.0 / p);
  cutoff = std::max(cutoff, 20.0 * h0);
  if (cutoff > quad.max_cutoff)
    throw QuadratureError("wave covariance quadrature needs cutoff " + std::to_string(cutoff) +
                          " beyond the configured maximum");

  const auto& gl = gauss_legendre(quad.gl_points);
  const auto panels = graded_panels(eps0, h0, h0, cutoff);
  double body = 0.0;
  for (const auto& pn : panels) {
    body += gl.integrate(
        [&](double xi) {
          const double w = beta == 1.0 ? 1.0 : std::pow(xi, beta - 1.0);
          return w * std::cos(dx * xi) * kernel(xi);
        },
        pn.lo, pn.hi);
  }
  const double head = g0 * std::pow(eps0, beta) / beta;
  const double tail = 0.25 * m * (cos_power_tail(dx - dt, p, cutoff) + cos_power_tail(dx + dt, p, cutoff));

  SpectralResult r;
  r.value = pref * (head + body + tail);
  r.cutoff = cutoff;
  r.tail_bound = pref * std::pow(cutoff, p) / (2.0 * (3.0 - beta));
  return r;
}

double swe_covariance(std::span<const double> p, std::span<const double> q, double beta,
                      const QuadratureSpec& quad) {
  if (p.size() != 2 || q.size() != 2) throw DomainError("wave points are (t, x) pairs");
  if (p[0] < 0.0 || q[0] < 0.0) throw DomainError("wave covariance needs t >= 0");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0,1]");
  if (p[0] == 0.0 || q[0] == 0.0) return 0.0;
  if (beta == 1.0) return 0.25 * cone_intersection_area(p[0], p[1], q[0], q[1]);
  return swe_covariance_spectral(p[0], p[1], q[0], q[1], beta, quad).value;
}

namespace {

// (4/pi) * integral of sin^2(xi/2) xi^{beta-3} over (0, inf): the spectral
// side of the Riesz energy of 1_[0,1] with unit constant.
double riesz_unit_energy(double beta) {
  const double p = beta - 3.0;
  const double eps0 = 1e-6, h0 = 1.0, cutoff = 200.0;
  const auto& gl = gauss_legendre(16);
  double body = 0.0;
  for (const auto& pn : graded_panels(eps0, h0, 1.0, cutoff)) {
    body += gl.integrate(
        [&](double xi) {
          const double s = std::sin(0.5 * xi) / xi;
          return s * s * std::pow(xi, beta - 1.0);
        },
        pn.lo, pn.hi);
  }
  const double head = 0.25 * std::pow(eps0, beta) / beta;
  const double tail = 0.5 * std::pow(cutoff, beta - 2.0) / (2.0 - beta) - 0.5 * cos_power_tail(1.0, p, cutoff);
  return 4.0 / std::numbers::pi * (head + body + tail);
}

}  // namespace

double riesz_constant(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("riesz_constant needs 0 < beta <= 1");
  if (beta == 1.0) return 1.0;
  static std::mutex mutex;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(beta); it != cache.end()) return it->second;
  }
  // Spatial side for A = B = [0,1]: double integral of |y - y'|^{-beta}.
  const double spatial = 2.0 / ((1.0 - beta) * (2.0 - beta));
  const double c = spatial / riesz_unit_energy(beta);
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(beta, c).first->second;
}

double model_covariance(const FieldModel& model, std::span<const double> x,
                        std::span<const double> y) {
  model.require_admissible(x, "first covariance argument");
  model.require_admissible(y, "second covariance argument");
  if (model.is_sheet()) return fbs_covariance(x, y, model.alpha());
  const Point p = to_time_space(x[0], x[1]);
  const Point q = to_time_space(y[0], y[1]);
  return swe_covariance(p, q, model.beta(), model.quadrature());
}

}  // namespace sectorial::models
