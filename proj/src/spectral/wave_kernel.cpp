#include "sectorial/spectral/wave_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sectorial/models/quadrature.hpp"
#include "sectorial/util/errors.hpp"

namespace sectorial::spectral {

using cplx = std::complex<double>;

namespace {

// (e^{-i th} - 1)/th, entire with value -i at 0.
cplx e_ratio(double th) {
  if (std::abs(th) < 1e-4) {
    const double th2 = th * th;
    return {-0.5 * th * (1.0 - th2 / 12.0), -(1.0 - th2 / 6.0)};
  }
  const double h = std::sin(0.5 * th);
  return {-2.0 * h * h / th, -std::sin(th) / th};
}

// (1 - i th - e^{-i th}) / th^2, value 1/2 at 0.
cplx h_ratio(double th) {
  if (std::abs(th) < 1e-3) {
    const double th2 = th * th;
    return {0.5 - th2 / 24.0, -th / 6.0 + th * th2 / 120.0};
  }
  const double h = std::sin(0.5 * th);
  return {2.0 * h * h / (th * th), (std::sin(th) - th) / (th * th)};
}

}  // namespace

cplx wave_b(double t, double tau, double k) {
  const cplx up = std::polar(1.0, t * k), down = std::conj(up);
  return t * (up * e_ratio(t * (tau + k)) - down * e_ratio(t * (tau - k)));
}

cplx wave_b_slope(double t, double tau) { return 2.0 * t * t * h_ratio(t * tau); }

cplx wave_f(double t, double x, double tau, double xi) {
  const double k = std::abs(xi);
  return std::polar(1.0, -x * xi) * wave_b(t, tau, k) / (2.0 * k);
}

namespace {

constexpr double kWavePanel = 0.5;
constexpr int kWaveGl = 10;
constexpr double kWaveHead = 1e-6;

std::vector<double> edges_with(std::vector<double> edges, const std::vector<double>& breaks, double top) {
  for (double b : breaks)
    if (b > 0.0 && b < top) edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double u, double v) { return std::abs(u - v) <= 1e-12 * std::max(1.0, std::abs(v)); }),
              edges.end());
  return edges;
}

struct Nodes {
  std::vector<double> x, w;
};

Nodes nodes_on(const std::vector<double>& edges, int gl_n) {
  const auto& gl = models::gauss_legendre(gl_n);
  Nodes out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double half = 0.5 * (edges[i + 1] - edges[i]), mid = 0.5 * (edges[i + 1] + edges[i]);
    for (int j = 0; j < gl.size(); ++j) {
      out.x.push_back(mid + half * gl.nodes()[static_cast<std::size_t>(j)]);
      out.w.push_back(half * gl.weights()[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

}  // namespace

std::vector<Eigen::MatrixXd> wave_box_moments(const std::vector<Point>& points, std::vector<double> cutoffs,
                                              double beta, const SpectralDiscretization& disc) {
  (void)disc;
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  const auto m = static_cast<Eigen::Index>(points.size());
  std::vector<Eigen::MatrixXd> result(cutoffs.size(), Eigen::MatrixXd::Zero(m, m));
  if (cutoffs.empty() || m == 0) return result;
  for (double c : cutoffs)
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("box cutoffs must be finite and positive");
  std::vector<double> sorted = cutoffs;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const double top = sorted.back();

  std::vector<double> t(points.size()), x(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    t[i] = (points[i][0] + points[i][1]) / std::numbers::sqrt2;
    x[i] = (points[i][1] - points[i][0]) / std::numbers::sqrt2;
  }

  // k edges: the head [0, kWaveHead] is done from the slope of B, then
  // doubling panels up to kWavePanel, then uniform panels.
  std::vector<double> kedges{kWaveHead};
  for (double e = 2.0 * kWaveHead; e < kWavePanel; e *= 2.0) kedges.push_back(e);
  for (double e = kWavePanel; e < top; e += kWavePanel) kedges.push_back(e);
  kedges.push_back(top);
  kedges = edges_with(kedges, sorted, top);
  std::vector<double> tedges;
  for (double e = 0.0; e < top; e += kWavePanel) tedges.push_back(e);
  tedges.push_back(top);
  tedges = edges_with(tedges, sorted, top);
  Nodes kn = nodes_on(kedges, kWaveGl), tn_half = nodes_on(tedges, kWaveGl);
  Nodes tn;
  for (std::size_t i = tn_half.x.size(); i-- > 0;) {
    tn.x.push_back(-tn_half.x[i]);
    tn.w.push_back(tn_half.w[i]);
  }
  tn.x.insert(tn.x.end(), tn_half.x.begin(), tn_half.x.end());
  tn.w.insert(tn.w.end(), tn_half.w.begin(), tn_half.w.end());

  auto shell_of = [&](double v) {
    return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
  };
  const double c0sq = std::pow(wave_representation_constant(beta), 2);
  const std::size_t ns = sorted.size();
  std::vector<Eigen::MatrixXd> shells(ns, Eigen::MatrixXd::Zero(m, m));
  std::vector<Eigen::MatrixXd> row(ns, Eigen::MatrixXd::Zero(m, m));
  std::vector<cplx> bvals(points.size());

  // Accumulates sum_tau w Re(B_i conj B_j) per shell for one k row.
  auto accumulate_row = [&](double k, bool slope) {
    for (auto& r : row) r.setZero();
    for (std::size_t it = 0; it < tn.x.size(); ++it) {
      const double tau = tn.x[it];
      const std::size_t sh = shell_of(std::max(std::abs(tau), k));
      if (sh >= ns) continue;
      for (std::size_t i = 0; i < points.size(); ++i) bvals[i] = slope ? wave_b_slope(t[i], tau) : wave_b(t[i], tau, k);
      auto& r = row[sh];
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
          r(i, j) += tn.w[it] * (bvals[static_cast<std::size_t>(i)] * std::conj(bvals[static_cast<std::size_t>(j)])).real();
    }
  };

  // Head: B ~ k B'(0), so the k integral over [0, h] of k^{beta-1}/2 is h^beta/(2 beta).
  accumulate_row(0.0, true);
  for (std::size_t sh = 0; sh < ns; ++sh) shells[sh] += c0sq * std::pow(kWaveHead, beta) / (2.0 * beta) * row[sh];
  for (std::size_t ik = 0; ik < kn.x.size(); ++ik) {
    const double k = kn.x[ik];
    accumulate_row(k, false);
    // Both signs of xi: 2 cos(dx k) Re(B_i conj B_j) / (4 k^2) times k^{beta-1}.
    const double wk = kn.w[ik] * c0sq * std::pow(k, beta - 3.0) / 2.0;
    for (std::size_t sh = 0; sh < ns; ++sh)
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
          shells[sh](i, j) += wk * std::cos((x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]) * k) * row[sh](i, j);
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  std::vector<Eigen::MatrixXd> by_cut(ns);
  for (std::size_t sh = 0; sh < ns; ++sh) {
    acc += shells[sh];
    by_cut[sh] = acc.selfadjointView<Eigen::Lower>();
  }
  for (std::size_t i = 0; i < cutoffs.size(); ++i)
    result[i] = by_cut[static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), cutoffs[i]) - sorted.begin())];
  return result;
}

}  // namespace sectorial::spectral
