#include "sectorial/spectral/band_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sectorial/models/quadrature.hpp"
#include "sectorial/spectral/wave_kernel.hpp"
#include "sectorial/util/errors.hpp"
#include "sectorial/util/rng.hpp"

namespace sectorial::spectral {

AxisLattice::AxisLattice(const SpectralDiscretization& disc) {
  if (!(disc.node_panel > 0.0) || disc.grading_levels < 0 || !(disc.node_cutoff > disc.node_panel))
    throw DomainError("invalid node lattice parameters");
  edges.push_back(0.0);
  for (int g = disc.grading_levels; g >= 1; --g) edges.push_back(disc.node_panel * std::ldexp(1.0, -g));
  const auto panels = static_cast<std::size_t>(std::llround(disc.node_cutoff / disc.node_panel));
  for (std::size_t k = 1; k <= panels; ++k) edges.push_back(disc.node_panel * static_cast<double>(k));
  const auto& gl = models::gauss_legendre(disc.node_gl);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double half = 0.5 * (edges[i + 1] - edges[i]), mid = 0.5 * (edges[i + 1] + edges[i]);
    for (int j = 0; j < gl.size(); ++j) {
      nodes.push_back(mid + half * gl.nodes()[static_cast<std::size_t>(j)]);
      weights.push_back(half * gl.weights()[static_cast<std::size_t>(j)]);
    }
  }
}

std::size_t AxisLattice::count_below(double c) const {
  const bool aligned = std::any_of(edges.begin(), edges.end(),
                                   [c](double e) { return std::abs(e - c) <= 1e-12 * std::max(1.0, c); });
  if (!aligned)
    throw DomainError("band edge " + std::to_string(c) + " is not a node lattice edge (beyond node_cutoff or off the panel grid)");
  return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), c) - nodes.begin());
}

namespace {

constexpr std::uint32_t kBandSubstream = 0xB000;

double fp(int p, double x) {
  if (p == 1) return std::sin(x);
  const double h = std::sin(0.5 * x);
  return 2.0 * h * h;
}

}  // namespace

BandSampler::BandSampler(const FieldModel& model, double a, double b, std::vector<Point> points,
                         const SpectralDiscretization& disc)
    : model_(model), a_(a), b_(b), points_(std::move(points)), lattice_(disc) {
  if (!(a >= 0.0) || !(b > a)) throw DomainError("band needs 0 <= a < b");
  if (!std::isfinite(b)) throw DomainError("band sampling needs a finite upper edge; use b <= node_cutoff");
  ma_ = lattice_.count_below(a);
  mb_ = lattice_.count_below(b);
  for (const auto& p : points_) {
    if (static_cast<int>(p.size()) != model.n()) throw DomainError("point dimension does not match the model");
    model.require_admissible(p, "band sample point");
  }
  const auto& xi = lattice_.nodes;
  const auto& w = lattice_.weights;
  if (model.is_sheet()) {
    if (model.n() > 2) throw DomainError("band sampling is limited to N <= 2");
    const double alpha = model.alpha();
    sheet_scale_ = std::pow(fbs_alpha_constant(alpha, disc), 0.5 * model.n());
    const auto n = static_cast<std::size_t>(model.n());
    coords_.resize(n);
    coord_index_.assign(n, std::vector<std::size_t>(points_.size()));
    sheet_features_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      auto& c = coords_[j];
      for (const auto& p : points_) c.push_back(p[j]);
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
      for (std::size_t i = 0; i < points_.size(); ++i)
        coord_index_[j][i] = static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), points_[i][j]) - c.begin());
      for (int p = 0; p < 2; ++p) {
        Eigen::MatrixXd phi(static_cast<Eigen::Index>(c.size()), static_cast<Eigen::Index>(mb_));
        for (std::size_t u = 0; u < c.size(); ++u)
          for (std::size_t m = 0; m < mb_; ++m)
            // factor 2 folds the two signs of xi_j: each product is even per axis
            phi(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(m)) =
                std::sqrt(2.0 * w[m]) * fp(p, c[u] * xi[m]) * std::pow(xi[m], -alpha - 0.5);
        sheet_features_[j][static_cast<std::size_t>(p)] = std::move(phi);
      }
    }
    return;
  }

  // Waves: nodes (tau, xi) over both signs, kept when max(|tau|, |xi|) lies in [a, b).
  const double beta = model.beta();
  const double c0 = wave_representation_constant(beta);
  const std::uint64_t M = lattice_.nodes.size();
  std::vector<std::array<double, 3>> kept;  // tau, xi, weight factor
  for (std::size_t mx = 0; mx < mb_; ++mx)
    for (int sx = 0; sx < 2; ++sx)
      for (std::size_t mt = 0; mt < mb_; ++mt)
        for (int st = 0; st < 2; ++st) {
          if (mx < ma_ && mt < ma_) continue;
          const double k = xi[mx];
          kept.push_back({st ? -xi[mt] : xi[mt], sx ? -k : k, std::sqrt(w[mx] * w[mt]) * std::pow(k, 0.5 * (beta - 1.0))});
          const std::uint64_t base = (((sx * M + mx) * 2 + static_cast<std::uint64_t>(st)) * M + mt) * 2;
          wave_normal_index_.push_back(base);
        }
  wave_features_.resize(static_cast<Eigen::Index>(points_.size()), static_cast<Eigen::Index>(2 * kept.size()));
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double t = (points_[i][0] + points_[i][1]) / std::numbers::sqrt2;
    const double x = (points_[i][1] - points_[i][0]) / std::numbers::sqrt2;
    for (std::size_t q = 0; q < kept.size(); ++q) {
      const auto [tau, xv, fac] = kept[q];
      const auto F = wave_f(t, x, tau, xv);
      // Re(F (Z1 + i Z2)) = Re F Z1 - Im F Z2
      wave_features_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * q)) = c0 * fac * F.real();
      wave_features_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * q + 1)) = -c0 * fac * F.imag();
    }
  }
}

std::size_t BandSampler::node_count() const {
  if (model_.is_wave()) return wave_normal_index_.size();
  const std::size_t n = coords_.size();
  const std::size_t box_b = n == 1 ? mb_ : mb_ * mb_, box_a = n == 1 ? ma_ : ma_ * ma_;
  return (std::size_t{1} << n) * (box_b - box_a);
}

void BandSampler::draw(std::uint64_t seed, std::uint64_t replicate, std::uint32_t component,
                       std::span<double> out) const {
  if (out.size() != points_.size()) throw DomainError("output span has the wrong size");
  const util::RandomStream rng(seed, replicate, kBandSubstream + component);
  if (model_.is_wave()) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(2 * wave_normal_index_.size()));
    for (std::size_t q = 0; q < wave_normal_index_.size(); ++q) {
      z(static_cast<Eigen::Index>(2 * q)) = rng.normal_at(wave_normal_index_[q]);
      z(static_cast<Eigen::Index>(2 * q + 1)) = rng.normal_at(wave_normal_index_[q] + 1);
    }
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) = wave_features_ * z;
    return;
  }
  const std::uint64_t M = lattice_.nodes.size();
  std::fill(out.begin(), out.end(), 0.0);
  const auto mb = static_cast<Eigen::Index>(mb_);
  if (coords_.size() == 1) {
    for (int p = 0; p < 2; ++p) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(mb);
      rng.normals_at(p * M + ma_, std::span<double>(z.data() + ma_, mb_ - ma_));
      const Eigen::VectorXd v = sheet_features_[0][static_cast<std::size_t>(p)] * z;
      for (std::size_t i = 0; i < points_.size(); ++i) out[i] += sheet_scale_ * v(static_cast<Eigen::Index>(coord_index_[0][i]));
    }
    return;
  }
  for (unsigned p = 0; p < 4; ++p) {
    // row m1 holds normals (p*M + m1)*M + m2, contiguous in m2
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Z =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(mb, mb);
    for (std::size_t m1 = 0; m1 < mb_; ++m1) {
      const std::size_t from = m1 < ma_ ? ma_ : 0;
      rng.normals_at((p * M + m1) * M + from,
                     std::span<double>(Z.data() + m1 * mb_ + from, mb_ - from));
    }
    const Eigen::MatrixXd V =
        sheet_features_[0][p & 1u] * Z * sheet_features_[1][(p >> 1) & 1u].transpose();
    for (std::size_t i = 0; i < points_.size(); ++i)
      out[i] += sheet_scale_ * V(static_cast<Eigen::Index>(coord_index_[0][i]), static_cast<Eigen::Index>(coord_index_[1][i]));
  }
}

Eigen::MatrixXd BandSampler::lattice_covariance() const {
  const auto P = static_cast<Eigen::Index>(points_.size());
  if (model_.is_wave()) return wave_features_ * wave_features_.transpose();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(P, P);
  const std::size_t n = coords_.size();
  const auto ma = static_cast<Eigen::Index>(ma_);
  for (unsigned p = 0; p < (1u << n); ++p) {
    // Gram of each axis over the b box and over the a box
    std::vector<Eigen::MatrixXd> gb(n), ga(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& phi = sheet_features_[j][(p >> j) & 1u];
      gb[j] = phi * phi.transpose();
      ga[j] = phi.leftCols(ma) * phi.leftCols(ma).transpose();
    }
    for (Eigen::Index i = 0; i < P; ++i)
      for (Eigen::Index k = 0; k < P; ++k) {
        double pb = 1.0, pa = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          const auto u = static_cast<Eigen::Index>(coord_index_[j][static_cast<std::size_t>(i)]);
          const auto v = static_cast<Eigen::Index>(coord_index_[j][static_cast<std::size_t>(k)]);
          pb *= gb[j](u, v);
          pa *= ga[j](u, v);
        }
        K(i, k) += pb - pa;
      }
  }
  return sheet_scale_ * sheet_scale_ * K;
}

std::vector<core::SamplePath> band_field_sample(const FieldModel& model, const BandSpec& band, const core::Grid& grid,
                                                const SpectralDiscretization& disc, std::uint64_t master_seed,
                                                std::size_t count) {
  if (count < 1) throw DomainError("count must be >= 1");
  band.validate(model);
  std::vector<Point> pts(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) pts[i] = grid.point(i);
  const BandSampler sampler(model, band.a, band.b, std::move(pts), disc);
  std::vector<core::SamplePath> paths;
  const auto d = static_cast<std::size_t>(model.d());
  std::vector<double> comp(grid.size());
  for (std::size_t rep = 0; rep < count; ++rep) {
    std::vector<double> values(grid.size() * d);
    for (std::size_t c = 0; c < d; ++c) {
      sampler.draw(master_seed, rep, static_cast<std::uint32_t>(c), comp);
      for (std::size_t i = 0; i < grid.size(); ++i) values[i * d + c] = comp[i];
    }
    paths.emplace_back(grid, model.d(), std::move(values), core::SeedLineage{master_seed, rep});
  }
  return paths;
}

}  // namespace sectorial::spectral
