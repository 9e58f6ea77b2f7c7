#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sectorial/core/grid.hpp"
#include "sectorial/core/sample_path.hpp"
#include "sectorial/models/field_model.hpp"
#include "sectorial/util/rng.hpp"

namespace sectorial::core {

// Dense: Cholesky of the full covariance. Kronecker: sheet covariances are
// products over axes, so on a tensor grid cov = K_0 (x) ... (x) K_{N-1} and
// the Cholesky factor is the Kronecker product of per-axis factors.
// WaveQuadrant: white-noise wave on a grid in {eta, theta >= 0}. The cone
// splits into the quadrant [0, eta] x [0, theta] and two triangles on the
// axes, so U = (W(eta, theta) + A(eta) + B(theta)) / 2 with W a Brownian
// sheet and A, B independent, Var A(u) = u^2 / 2. Opt-in only.
enum class FactorLayout { Auto, Dense, Kronecker, WaveQuadrant };

struct EnsembleOptions {
  FactorLayout layout = FactorLayout::Auto;  // Auto: Kronecker for sheets
  double jitter_start = 1e-14;               // relative to trace / size
  int max_escalations = 6;
  double residual_tol = 1e-10;
  int threads = 1;  // covariance assembly
};

class GaussianEnsemble {
 public:
  const models::FieldModel& model() const { return model_; }
  const Grid& grid() const { return grid_; }
  FactorLayout layout() const { return layout_; }
  std::size_t size() const { return grid_.size(); }
  double jitter_used() const { return jitter_; }
  double residual() const { return residual_; }

  // Single-component covariance and a factor L with L L^T = covariance,
  // materialised on demand outside the dense layout. L is lower triangular
  // except for WaveQuadrant, where it is n x (n + c_0 + c_1).
  Eigen::MatrixXd covariance() const;
  Eigen::MatrixXd factor() const;

  // One component of one replicate: out = L z with z drawn from rng.
  void draw(util::RandomStream& rng, double* out) const;

 private:
  friend GaussianEnsemble build_ensemble(const models::FieldModel&, const Grid&,
                                         const EnsembleOptions&);
  GaussianEnsemble(models::FieldModel m, Grid g) : model_(std::move(m)), grid_(std::move(g)) {}

  models::FieldModel model_;
  Grid grid_;
  FactorLayout layout_ = FactorLayout::Dense;
  double jitter_ = 0.0;
  double residual_ = 0.0;
  Eigen::MatrixXd cov_;                  // dense layout
  Eigen::MatrixXd chol_;                 // dense layout, lower triangle
  std::vector<Eigen::MatrixXd> axis_cov_;
  std::vector<Eigen::MatrixXd> axis_chol_;
};

GaussianEnsemble build_ensemble(const models::FieldModel& model, const Grid& grid,
                                const EnsembleOptions& opts = {});

// Replicate k of component c uses RandomStream(master_seed, k, c), so the
// k-th path does not depend on how many are generated or in which order.
SamplePath sample_path(const GaussianEnsemble& ens, std::uint64_t master_seed, std::uint64_t replicate);
std::vector<SamplePath> sample_paths(const GaussianEnsemble& ens, std::uint64_t master_seed,
                                     std::size_t count, std::size_t first = 0, int threads = 1);

// Var(v_1(x) | v_1(y) for y in cond) via a pseudo-inverse with relative
// eigenvalue cutoff; clamped at zero.
double conditional_variance(const models::FieldModel& model, std::span<const double> x,
                            const std::vector<Point>& cond, double cutoff = 1e-12);

}  // namespace sectorial::core
