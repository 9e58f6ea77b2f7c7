#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "sectorial/models/covariance.hpp"
#include "sectorial/models/gauge.hpp"
#include "sectorial/models/quadrature.hpp"
#include "sectorial/util/errors.hpp"
#include "sectorial/util/rng.hpp"

using namespace sectorial;
using namespace sectorial::models;
using doctest::Approx;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Intersection of two cones in rotated coordinates is the quadrant at the
// componentwise minimum cut by {eta + theta >= 0}; its area is (a + b)^2 / 2.
double cone_area_closed(double t1, double x1, double t2, double x2) {
  const double a = std::min(t1 - x1, t2 - x2), b = std::min(t1 + x1, t2 + x2);
  const double s = std::max(0.0, a + b) / std::numbers::sqrt2;
  return s * s / 2.0;
}

double riesz_closed(double beta) {
  return 2.0 * std::tgamma(1.0 - beta) * std::sin(std::numbers::pi * beta / 2.0);
}

// Var U(t, x) for colored noise via the Mellin transform of u - sin u.
double wave_variance_closed(double t, double beta) {
  const double p = beta - 3.0;
  return riesz_closed(beta) / std::numbers::pi * std::pow(2.0, 1.0 - beta) *
         (-std::tgamma(p) * std::sin(std::numbers::pi * p / 2.0)) * std::pow(t, 3.0 - beta);
}

}  // namespace

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const auto& gl = gauss_legendre(6);
  CHECK(gl.integrate([](double x) { return std::pow(x, 11) + 3 * x * x; }, 0.0, 2.0) ==
        Approx(std::pow(2.0, 12) / 12 + 8.0).epsilon(1e-13));
  double sw = 0;
  for (double w : gauss_legendre(13).weights()) sw += w;
  CHECK(sw == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("graded panels cover the interval and honour breaks") {
  const double br[] = {0.75, 3.0};
  const auto p = graded_panels(1e-6, 0.5, 0.4, 5.0, br);
  CHECK(p.front().lo == 1e-6);
  CHECK(p.back().hi == 5.0);
  bool saw_075 = false, saw_3 = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) CHECK(p[i].lo == p[i - 1].hi);
    CHECK(p[i].hi > p[i].lo);
    if (p[i].lo >= 0.5) CHECK(p[i].hi - p[i].lo <= 0.4 + 1e-12);
    saw_075 |= p[i].hi == 0.75;
    saw_3 |= p[i].hi == 3.0;
  }
  CHECK(saw_075);
  CHECK(saw_3);
}

TEST_CASE("cosine power tails against high-precision values") {
  // Reference values: omega^{-p-1} Re[E_{-p}(i omega X) (omega X)^{p+1}] at 40 digits.
  CHECK(cos_power_tail(0.3, -2.0, 0.5) == Approx(1.55124704578784).epsilon(1e-10));
  CHECK(cos_power_tail(2.0, -1.6, 3.0) == Approx(0.0403757872691241).epsilon(1e-10));
  CHECK(cos_power_tail(5.0, -2.5, 10.0) == Approx(0.000195690620244680).epsilon(1e-9));
  CHECK(cos_power_tail(1e-3, -1.4, 2.0) == Approx(1.70460516829429).epsilon(1e-10));
  CHECK(cos_power_tail(1.0, -2.7, 100.0) == Approx(2.10639859411980e-6).epsilon(1e-9));
  CHECK(cos_power_tail(0.0, -2.0, 4.0) == Approx(0.25));
  CHECK(cos_power_tail(-2.0, -1.6, 3.0) == cos_power_tail(2.0, -1.6, 3.0));
}

TEST_CASE("fractional sheet covariance") {
  const std::vector<double> one{1, 1}, two{2, 2};
  CHECK(fbs_covariance(one, one, 0.5) == 1.0);
  CHECK(fbs_covariance(std::vector<double>{1, 2}, std::vector<double>{3, 1}, 0.5) == 1.0);
  CHECK(fbs_covariance(one, two, 0.7) == Approx(std::pow(0.5 * std::pow(2.0, 1.4), 2)).epsilon(1e-14));
  CHECK(fbs_covariance(one, two, 0.7) == Approx(1.7411).epsilon(1e-4));
  CHECK(fbs_covariance(one, two, 0.3) == fbs_covariance(two, one, 0.3));
  CHECK_THROWS_AS(fbs_covariance(std::vector<double>{-1, 1}, one, 0.5), DomainError);
  // alpha = 1/2 reduces to the min-product.
  util::RandomStream rng(1, 0);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x{rng.uniform(0, 3), rng.uniform(0, 3)}, y{rng.uniform(0, 3), rng.uniform(0, 3)};
    const double general = 0.5 * (x[0] + y[0] - std::abs(x[0] - y[0])) * 0.5 * (x[1] + y[1] - std::abs(x[1] - y[1]));
    CHECK(fbs_covariance(x, y, 0.5) == Approx(general).epsilon(1e-13));
  }
}

TEST_CASE("light cone areas") {
  CHECK(cone_intersection_area(1, 0, 1, 0) == Approx(1.0));
  CHECK(swe_covariance(std::vector<double>{1, 0}, std::vector<double>{1, 0}, 1.0) == Approx(0.25));
  CHECK(swe_covariance(std::vector<double>{0, 0.3}, std::vector<double>{1, 0}, 1.0) == 0.0);
  CHECK(swe_covariance(std::vector<double>{0, 0.3}, std::vector<double>{1, 0}, 0.5) == 0.0);
  CHECK(swe_covariance(std::vector<double>{1, 0}, std::vector<double>{1, 5}, 1.0) == 0.0);
  util::RandomStream rng(2, 0);
  for (int i = 0; i < 200; ++i) {
    const double t1 = rng.uniform(0, 2), x1 = rng.uniform(-1, 1), t2 = rng.uniform(0, 2), x2 = rng.uniform(-1, 1);
    CHECK(cone_intersection_area(t1, x1, t2, x2) == Approx(cone_area_closed(t1, x1, t2, x2)).epsilon(1e-12));
  }
}

TEST_CASE("Riesz constant") {
  for (double beta : {0.25, 0.5, 0.9}) {
    const double c = riesz_constant(beta);
    CHECK(c > 0);
    CHECK(rel(c, riesz_closed(beta)) < 1e-7);
    CHECK(riesz_constant(beta) == c);  // cached value is reused
  }
  CHECK(riesz_constant(1.0) == 1.0);
}

TEST_CASE("Riesz spectral form reproduces the spatial kernel at a second pair") {
  // A = [0,1], B = [2,3]: spatial energy F(3) - 2F(2) + F(1) with
  // F(d) = d^{2-b} / ((1-b)(2-b)); spectral side uses 4 sin^2(xi/2) cos(2 xi).
  for (double beta : {0.3, 0.7}) {
    auto F = [beta](double d) { return std::pow(d, 2 - beta) / ((1 - beta) * (2 - beta)); };
    const double spatial = F(3) - 2 * F(2) + F(1);
    const double p = beta - 3, cutoff = 300;
    const auto& gl = gauss_legendre(16);
    double body = 0;
    for (const auto& pn : graded_panels(1e-7, 0.5, 0.5, cutoff)) {
      body += gl.integrate(
          [&](double xi) {
            const double s = std::sin(xi / 2) / xi;
            return 4 * s * s * std::cos(2 * xi) * std::pow(xi, beta - 1);
          },
          pn.lo, pn.hi);
    }
    // Near zero the integrand is xi^{beta-1}; beyond the cutoff it expands
    // into 2 cos 2xi - cos xi - cos 3xi.
    const double head = std::pow(1e-7, beta) / beta;
    const double tail = 2 * cos_power_tail(2, p, cutoff) - cos_power_tail(1, p, cutoff) - cos_power_tail(3, p, cutoff);
    const double spectral = riesz_constant(beta) / std::numbers::pi * (head + body + tail);
    CHECK(rel(spectral, spatial) < 1e-6);
  }
}

TEST_CASE("spectral wave covariance agrees with light cones at beta = 1") {
  util::RandomStream rng(3, 0);
  for (int i = 0; i < 20; ++i) {
    const double t1 = rng.uniform(0.5, 2), x1 = rng.uniform(-1, 1), t2 = rng.uniform(0.5, 2), x2 = rng.uniform(-1, 1);
    const double exact = 0.25 * cone_intersection_area(t1, x1, t2, x2);
    const auto q = swe_covariance_spectral(t1, x1, t2, x2, 1.0);
    const double scale = std::sqrt(0.25 * t1 * t1 * 0.25 * t2 * t2);
    CHECK(std::abs(q.value - exact) < 1e-6 * scale);
    CHECK(q.tail_bound < 1e-8 * scale);
  }
}

TEST_CASE("colored wave variance matches the Mellin closed form") {
  for (double beta : {0.25, 0.5, 0.8}) {
    for (double t : {0.5, 1.0, 2.0}) {
      const std::vector<double> p{t, 0.3};
      CHECK(rel(swe_covariance(p, p, beta), wave_variance_closed(t, beta)) < 1e-6);
    }
  }
  CHECK(wave_variance_closed(1.0, 0.5) == Approx(0.754247233265651).epsilon(1e-12));
}

TEST_CASE("unit-constant spectral integral is continuous as beta -> 1") {
  const std::vector<double> p{1, 0};
  const double unit = swe_covariance(p, p, 0.999) / riesz_constant(0.999);
  CHECK(std::abs(unit - 0.25) < 0.01 * 0.25);
}

TEST_CASE("quadrature cutoff beyond the limit is reported") {
  QuadratureSpec q;
  q.max_cutoff = 10.0;
  CHECK_THROWS_AS(swe_covariance(std::vector<double>{1, 0}, std::vector<double>{1, 0.2}, 0.5, q), QuadratureError);
}

TEST_CASE("model dispatch") {
  const auto bs = FieldModel::brownian_sheet(2, 1, Box::cube(2, 0.5, 2));
  CHECK(bs.family() == Family::BrownianSheet);
  CHECK(model_covariance(bs, std::vector<double>{1, 1}, std::vector<double>{1, 1}) == 1.0);
  CHECK(FieldModel::fractional_sheet(2, 1, 0.5, Box::cube(2, 1, 2)).family() == Family::BrownianSheet);
  const auto fbs = FieldModel::fractional_sheet(2, 1, 0.7, Box::cube(2, 0.5, 2));
  CHECK(model_covariance(fbs, std::vector<double>{1, 1}, std::vector<double>{2, 2}) == Approx(1.7411).epsilon(1e-4));
  const auto ww = FieldModel::wave_white(1, Box::cube(2, 0.1, 1.5));
  CHECK(ww.alpha() == 0.5);
  const std::vector<double> r{1 / std::numbers::sqrt2, 1 / std::numbers::sqrt2};
  CHECK(model_covariance(ww, r, r) == Approx(0.25));
  const auto wc = FieldModel::wave_colored(1, 0.5, Box::cube(2, 0.1, 1.5));
  CHECK(wc.alpha() == 0.75);
  CHECK_THROWS_AS(model_covariance(bs, std::vector<double>{3, 1}, std::vector<double>{1, 1}), DomainError);
  CHECK_THROWS_AS(FieldModel::fractional_sheet(2, 1, 1.5, Box::cube(2, 1, 2)), DomainError);
  CHECK_THROWS_AS(FieldModel::brownian_sheet(2, 1, Box::cube(2, 0, 2)), DomainError);
  CHECK_THROWS_AS(FieldModel::wave_white(1, Box{{-1, -1}, {1, 1}}), DomainError);
  CHECK_THROWS_AS(FieldModel::wave_colored(1, 1.0, Box::cube(2, 0.1, 1)), DomainError);
}

TEST_CASE("covariance matrices are numerically PSD") {
  util::RandomStream rng(4, 0);
  const std::vector<FieldModel> models{
      FieldModel::fractional_sheet(2, 1, 0.3, Box::cube(2, 0.5, 2)),
      FieldModel::brownian_sheet(2, 1, Box::cube(2, 0.5, 2)),
      FieldModel::wave_white(1, Box::cube(2, 0.1, 1.5)),
      FieldModel::wave_colored(1, 0.5, Box::cube(2, 0.1, 1.5)),
  };
  for (const auto& m : models) {
    const int n = m.family() == Family::WaveColored ? 12 : 40;
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i)
      pts.push_back({rng.uniform(m.domain().lo[0], m.domain().hi[0]), rng.uniform(m.domain().lo[1], m.domain().hi[1])});
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) c(i, j) = c(j, i) = model_covariance(m, pts[i], pts[j]);
    const double floor = -1e-8 * c.trace() / n;
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff() >= floor);
  }
}

TEST_CASE("two-sided increment band") {
  // Band edges estimated once on these domains and frozen as regression guards.
  util::RandomStream rng(5, 0);
  const auto fbs = FieldModel::fractional_sheet(2, 1, 0.7, Box::cube(2, 1, 2));
  const auto ww = FieldModel::wave_white(1, Box::cube(2, 0.5, 1.5));
  double lo_s = 1e9, hi_s = 0, lo_w = 1e9, hi_w = 0;
  for (int i = 0; i < 400; ++i) {
    const Point x{rng.uniform(1, 2), rng.uniform(1, 2)}, y{rng.uniform(1, 2), rng.uniform(1, 2)};
    const double inc = model_covariance(fbs, x, x) + model_covariance(fbs, y, y) - 2 * model_covariance(fbs, x, y);
    const double ref = std::pow(std::abs(x[0] - y[0]), 1.4) + std::pow(std::abs(x[1] - y[1]), 1.4);
    lo_s = std::min(lo_s, inc / ref);
    hi_s = std::max(hi_s, inc / ref);
    const Point p{rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)}, q{rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
    const double incw = model_covariance(ww, p, p) + model_covariance(ww, q, q) - 2 * model_covariance(ww, p, q);
    const auto tp = to_time_space(p[0], p[1]), tq = to_time_space(q[0], q[1]);
    const double refw = std::abs(tp[0] - tq[0]) + std::abs(tp[1] - tq[1]);
    lo_w = std::min(lo_w, incw / refw);
    hi_w = std::max(hi_w, incw / refw);
  }
  MESSAGE("sheet band [" << lo_s << ", " << hi_s << "], wave band [" << lo_w << ", " << hi_w << "]");
  CHECK(lo_s > 0.5);
  CHECK(hi_s < 4.0);
  CHECK(lo_w > 0.15);
  CHECK(hi_w < 1.5);
}

TEST_CASE("rectangle increments of the white-noise wave") {
  const auto ww = FieldModel::wave_white(1, Box::cube(2, 0.2, 1.5));
  util::RandomStream rng(6, 0);
  const double r = 0.2;
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const double e = rng.uniform(0.2, 1.2), th = rng.uniform(0.2, 1.2);
    const double de = rng.uniform(0, r), dth = rng.uniform(0, r);
    const std::vector<Point> pts{{e + de, th + dth}, {e, th + dth}, {e + de, th}, {e, th}};
    const double coef[] = {1, -1, -1, 1};
    double var = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) var += coef[a] * coef[b] * model_covariance(ww, pts[a], pts[b]);
    CHECK(var == Approx(0.25 * de * dth).epsilon(1e-9));
    worst = std::max(worst, var / (r * std::min(de, dth)));
  }
  CHECK(worst <= 0.25 + 1e-12);
}

TEST_CASE("gauge functions") {
  const auto phi = GaugeFunction::level(2, 1, 0.5);
  CHECK(phi.s_exp() == 1.5);
  CHECK(phi.k_exp() == 0.5);
  double prev = 0;
  for (double r = 1e-6; r < 2; r *= 1.1) {
    const double v = phi(r);
    CHECK(v >= prev);
    CHECK(phi(2 * r) <= 4 * v);
    if (r < phi.r_freeze()) CHECK(v == Approx(phi.raw(r)));
    prev = v;
  }
  const auto range = GaugeFunction::range(2, 0.5);
  CHECK(range.s_exp() == 4.0);
  CHECK(range.k_exp() == 2.0);
  CHECK(range.r_freeze() < std::exp(-1.0));
  CHECK_THROWS_AS(GaugeFunction(0, 1), DomainError);
  CHECK_THROWS_AS(phi.raw(0.5), DomainError);
}
