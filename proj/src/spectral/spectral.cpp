#include "sectorial/spectral/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "sectorial/models/covariance.hpp"
#include "sectorial/models/quadrature.hpp"
#include "sectorial/spectral/wave_kernel.hpp"
#include "sectorial/util/errors.hpp"

namespace sectorial::spectral {

BandSpec BandSpec::for_model(const FieldModel& model, Point s, double a, double b) {
  BandSpec band;
  band.a = a;
  band.b = b;
  band.s = std::move(s);
  band.r0 = 1.0;
  if (model.is_sheet()) {
    band.gamma1 = 0.0;
    band.gamma2 = model.alpha();
    band.a0 = 0.0;
  } else {
    band.gamma2 = 0.5;
    band.a0 = 4.0;
    band.gamma1 = model.beta() == 1.0 ? 0.0 : 0.5 * ((1.0 - model.beta()) / 2.0 + 0.5);
  }
  band.validate(model);
  return band;
}

void BandSpec::validate(const FieldModel& model) const {
  if (!(a >= 0.0) || !(b > a)) throw DomainError("band needs 0 <= a < b");
  if (!s.empty() && static_cast<int>(s.size()) != model.n()) throw DomainError("band base point has the wrong dimension");
  if (!(r0 > 0.0 && r0 <= 1.0)) throw DomainError("r0 must lie in (0, 1]");
  if (!(gamma2 > 0.0)) throw DomainError("gamma2 must be positive");
  if (!(a0 >= 0.0)) throw DomainError("a0 must be nonnegative");
  if (model.is_sheet()) {
    if (!(gamma1 >= 0.0 && gamma1 < model.alpha())) throw DomainError("gamma1 must lie in [0, alpha)");
  } else if (model.beta() == 1.0) {
    if (gamma1 != 0.0) throw DomainError("gamma1 must be 0 for white noise");
  } else if (!(gamma1 > (1.0 - model.beta()) / 2.0 && gamma1 < 0.5)) {
    throw DomainError("gamma1 must lie in ((1 - beta)/2, 1/2)");
  }
}

namespace {

// 2 sin^2(x/2), the cancellation-free 1 - cos x.
double one_minus_cos(double x) {
  const double h = std::sin(0.5 * x);
  return 2.0 * h * h;
}

// Integral over [X, inf) of the product f_p(u xi) f_p(w xi) xi^q, written
// as a combination of cosine tails.
double axis_tail(int p, double u, double w, double q, double X) {
  using models::cos_power_tail;
  if (p == 1) return 0.5 * (cos_power_tail(u - w, q, X) - cos_power_tail(u + w, q, X));
  return cos_power_tail(0.0, q, X) - cos_power_tail(u, q, X) - cos_power_tail(w, q, X) +
         0.5 * cos_power_tail(u - w, q, X) + 0.5 * cos_power_tail(u + w, q, X);
}

// Integral over [0, eps] from the leading small-xi term.
double axis_head(int p, double u, double w, double alpha, double eps) {
  if (p == 1) return u * w * std::pow(eps, 2.0 - 2.0 * alpha) / (2.0 - 2.0 * alpha);
  return u * u * w * w * std::pow(eps, 4.0 - 2.0 * alpha) / (4.0 * (4.0 - 2.0 * alpha));
}

}  // namespace

double fbs_axis_integral(int p, double u, double w, double c, double alpha, const SpectralDiscretization& disc) {
  if (p != 0 && p != 1) throw DomainError("axis integral index must be 0 or 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!(c >= 0.0)) throw DomainError("cutoff must be nonnegative");
  u = std::abs(u);
  w = std::abs(w);
  if (u == 0.0 || w == 0.0 || c == 0.0) return 0.0;
  const double q = -2.0 * alpha - 1.0;
  const double m = std::max(u, w);
  const double eps = disc.small_xi / m;
  if (c <= eps) return 2.0 * axis_head(p, u, w, alpha, c);
  double total = axis_head(p, u, w, alpha, eps);
  const double top = std::min(c, disc.cutoff);
  const auto& gl = models::gauss_legendre(disc.gl_points);
  auto integrand = [&](double xi) {
    const double fu = p == 0 ? one_minus_cos(u * xi) : std::sin(u * xi);
    const double fw = p == 0 ? one_minus_cos(w * xi) : std::sin(w * xi);
    return fu * fw * std::pow(xi, q);
  };
  for (const auto& pan : models::graded_panels(eps, 1.0 / m, 1.5 / (u + w), top))
    total += gl.integrate(integrand, pan.lo, pan.hi);
  if (c > disc.cutoff) {
    total += axis_tail(p, u, w, q, disc.cutoff);
    if (std::isfinite(c)) total -= axis_tail(p, u, w, q, c);
  }
  return 2.0 * total;
}

double fbs_alpha_constant(double alpha, const SpectralDiscretization& disc) {
  static std::map<double, double> cache;
  static std::mutex mutex;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(alpha); it != cache.end()) return it->second;
  }
  const double value = 1.0 / (fbs_axis_integral(0, 1.0, 1.0, kInfinity, alpha, disc) +
                              fbs_axis_integral(1, 1.0, 1.0, kInfinity, alpha, disc));
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(alpha, value);
  return value;
}

double wave_representation_constant(double beta) {
  return std::sqrt(models::riesz_constant(beta)) / (2.0 * std::numbers::pi);
}

namespace {

Eigen::MatrixXd sheet_band_covariance(const FieldModel& model, const std::vector<Point>& pts, double a, double b,
                                      const SpectralDiscretization& disc) {
  const int n = model.n();
  const double alpha = model.alpha();
  const double ca = fbs_alpha_constant(alpha, disc);
  std::map<std::tuple<int, double, double, double>, double> memo;
  auto J = [&](int p, double u, double w, double c) {
    if (u > w) std::swap(u, w);
    auto key = std::make_tuple(p, u, w, c);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const double v = fbs_axis_integral(p, u, w, c, alpha, disc);
    memo.emplace(key, v);
    return v;
  };
  auto box = [&](const Point& x, const Point& y, double c) {
    if (c == 0.0) return 0.0;
    double sum = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      double prod = 1.0;
      for (int i = 0; i < n && prod != 0.0; ++i) prod *= J((mask >> i) & 1u, x[i], y[i], c);
      sum += prod;
    }
    return std::pow(ca, n) * sum;
  };
  const auto m = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd K(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const auto& x = pts[static_cast<std::size_t>(i)];
      const auto& y = pts[static_cast<std::size_t>(j)];
      K(i, j) = K(j, i) = box(x, y, b) - box(x, y, a);
    }
  return K;
}

}  // namespace

Eigen::MatrixXd band_covariance(const FieldModel& model, const std::vector<Point>& points, double a, double b,
                                const SpectralDiscretization& disc) {
  if (!(a >= 0.0) || !(b > a)) throw DomainError("band needs 0 <= a < b");
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != model.n()) throw DomainError("point dimension does not match the model");
    model.require_admissible(p, "band covariance point");
  }
  if (model.is_sheet()) return sheet_band_covariance(model, points, a, b, disc);

  std::vector<double> cuts;
  if (a > 0.0) cuts.push_back(a);
  if (std::isfinite(b)) cuts.push_back(b);
  const auto moments = wave_box_moments(points, cuts, model.beta(), disc);
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd upper(m, m);
  if (std::isfinite(b)) {
    upper = moments.back();
  } else {
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        upper(i, j) = upper(j, i) =
            models::model_covariance(model, points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
  }
  if (a > 0.0) upper -= moments.front();
  return upper;
}

double fbs_spectral_l2(const FieldModel& model, const Point& x, const Point& y, const BandSpec& band,
                       const SpectralDiscretization& disc) {
  if (!model.is_sheet()) throw DomainError("fbs_spectral_l2 applies to sheet models");
  if (model.n() > 2) throw DomainError("spectral quadrature is limited to N <= 2");
  if (x == y) return 0.0;
  const auto K = band_covariance(model, {x, y}, band.a, band.b, disc);
  return std::max(0.0, K(0, 0) + K(1, 1) - 2.0 * K(0, 1));
}

}  // namespace sectorial::spectral
