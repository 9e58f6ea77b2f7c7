#include "sectorial/core/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "sectorial/models/covariance.hpp"
#include "sectorial/util/errors.hpp"
#include "sectorial/util/parallel.hpp"

namespace sectorial::core {

namespace {

struct Factorization {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
  double residual = 0.0;
};

// Relative Frobenius error of L L^T against a + jitter I. Exact for modest
// sizes; above that a Hutchinson estimate with fixed probes (E|Ez|^2 = |E|_F^2).
double reconstruction_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& l, double jitter) {
  const Eigen::Index n = a.rows();
  if (n <= 1500) {
    Eigen::MatrixXd e = l.triangularView<Eigen::Lower>() * l.transpose();
    e -= a;
    e.diagonal().array() -= jitter;
    Eigen::MatrixXd aj = a;
    aj.diagonal().array() += jitter;
    return e.norm() / aj.norm();
  }
  util::RandomStream rng(0x7E57, static_cast<std::uint64_t>(n));
  double num = 0.0, den = 0.0;
  for (int probe = 0; probe < 8; ++probe) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
    Eigen::VectorXd az = a * z + jitter * z;
    Eigen::VectorXd lz = l.triangularView<Eigen::Lower>().transpose() * z;
    Eigen::VectorXd llz = l.triangularView<Eigen::Lower>() * lz;
    num += (llz - az).squaredNorm();
    den += az.squaredNorm();
  }
  return std::sqrt(num / den);
}

Factorization factorize(const Eigen::MatrixXd& a, const EnsembleOptions& opts) {
  const Eigen::Index n = a.rows();
  const double level = a.trace() / static_cast<double>(n);
  double jitter = 0.0;
  for (int attempt = 0; attempt <= opts.max_escalations; ++attempt) {
    if (attempt > 0) jitter = opts.jitter_start * level * std::pow(10.0, attempt - 1);
    Eigen::MatrixXd work = a;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(work);
    if (llt.info() != Eigen::Success) continue;
    work.triangularView<Eigen::StrictlyUpper>().setZero();
    const double res = reconstruction_error(a, work, jitter);
    if (res <= opts.residual_tol) return {std::move(work), jitter, res};
  }
  const double min_eig = n <= 4000 ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly)
                                         .eigenvalues()
                                         .minCoeff()
                                   : std::nan("");
  std::ostringstream os;
  os << "Cholesky failed after " << opts.max_escalations << " jitter escalations (last jitter " << jitter
     << ", minimum eigenvalue " << min_eig << ")";
  throw FactorizationError(os.str(), min_eig);
}

// cov of a sheet along one axis: (u^{2a} + w^{2a} - |u - w|^{2a}) / 2.
Eigen::MatrixXd axis_covariance(const std::vector<double>& x, double alpha) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double u[1] = {x[static_cast<std::size_t>(i)]}, w[1] = {x[static_cast<std::size_t>(j)]};
      k(i, j) = k(j, i) = models::fbs_covariance(u, w, alpha);
    }
  return k;
}

// min(u, w)^2 / 2: variance of the white noise over a triangle on one axis.
Eigen::MatrixXd triangle_covariance(const std::vector<double>& x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double m = std::min(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
      k(i, j) = k(j, i) = 0.5 * m * m;
    }
  return k;
}

Eigen::MatrixXd kron(const std::vector<Eigen::MatrixXd>& parts) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
  for (const auto& p : parts) {
    Eigen::MatrixXd next(out.rows() * p.rows(), out.cols() * p.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(i * p.rows(), j * p.cols(), p.rows(), p.cols()) = out(i, j) * p;
    out = std::move(next);
  }
  return out;
}

}  // namespace

GaussianEnsemble build_ensemble(const models::FieldModel& model, const Grid& grid, const EnsembleOptions& opts) {
  if (static_cast<int>(grid.dim()) != model.n()) throw DomainError("grid dimension differs from the model's N");
  const models::Box b = grid.bounds();
  if (!model.domain().contains(b.lo, 1e-12) || !model.domain().contains(b.hi, 1e-12) || !model.admissible(b.lo))
    throw DomainError("grid extends outside the model domain");

  GaussianEnsemble ens(model, grid);
  FactorLayout layout = opts.layout;
  if (layout == FactorLayout::Auto) layout = model.is_sheet() ? FactorLayout::Kronecker : FactorLayout::Dense;
  if (layout == FactorLayout::Kronecker && !model.is_sheet())
    throw DomainError("the Kronecker layout needs a product covariance (sheet families)");
  if (layout == FactorLayout::WaveQuadrant &&
      (model.family() != models::Family::WaveWhite || b.lo[0] < 0.0 || b.lo[1] < 0.0))
    throw DomainError("the quadrant layout needs the white-noise wave on a grid with eta, theta >= 0");
  ens.layout_ = layout;

  if (layout == FactorLayout::WaveQuadrant) {
    for (int part = 0; part < 4; ++part) {
      const auto axis = grid.axis(static_cast<std::size_t>(part % 2));
      ens.axis_cov_.push_back(part < 2 ? axis_covariance(axis, 0.5) : triangle_covariance(axis));
      auto f = factorize(ens.axis_cov_.back(), opts);
      ens.jitter_ = std::max(ens.jitter_, f.jitter);
      ens.residual_ = std::max(ens.residual_, f.residual);
      ens.axis_chol_.push_back(std::move(f.lower));
    }
    return ens;
  }

  if (layout == FactorLayout::Kronecker) {
    for (std::size_t j = 0; j < grid.dim(); ++j) {
      ens.axis_cov_.push_back(axis_covariance(grid.axis(j), model.alpha()));
      auto f = factorize(ens.axis_cov_.back(), opts);
      ens.jitter_ = std::max(ens.jitter_, f.jitter);
      ens.residual_ = std::max(ens.residual_, f.residual);
      ens.axis_chol_.push_back(std::move(f.lower));
    }
    return ens;
  }

  const auto n = static_cast<Eigen::Index>(grid.size());
  std::vector<Point> pts(grid.size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = grid.point(i);
  ens.cov_.resize(n, n);
  util::parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double c = models::model_covariance(model, pts[i], pts[j]);
      ens.cov_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
    }
  });
  ens.cov_.triangularView<Eigen::StrictlyUpper>() = ens.cov_.transpose();
  auto f = factorize(ens.cov_, opts);
  ens.chol_ = std::move(f.lower);
  ens.jitter_ = f.jitter;
  ens.residual_ = f.residual;
  return ens;
}

Eigen::MatrixXd GaussianEnsemble::covariance() const {
  if (layout_ == FactorLayout::Dense) return cov_;
  if (layout_ == FactorLayout::Kronecker) return kron(axis_cov_);
  const auto c0 = axis_cov_[0].rows(), c1 = axis_cov_[1].rows();
  return 0.25 * (kron({axis_cov_[0], axis_cov_[1]}) + kron({axis_cov_[2], Eigen::MatrixXd::Ones(c1, c1)}) +
                 kron({Eigen::MatrixXd::Ones(c0, c0), axis_cov_[3]}));
}

Eigen::MatrixXd GaussianEnsemble::factor() const {
  if (layout_ == FactorLayout::Dense) return chol_;
  if (layout_ == FactorLayout::Kronecker) return kron(axis_chol_);
  const auto c0 = axis_chol_[0].rows(), c1 = axis_chol_[1].rows();
  Eigen::MatrixXd out(c0 * c1, c0 * c1 + c0 + c1);
  out << kron({axis_chol_[0], axis_chol_[1]}), kron({axis_chol_[2], Eigen::MatrixXd::Ones(c1, 1)}),
      kron({Eigen::MatrixXd::Ones(c0, 1), axis_chol_[3]});
  return 0.5 * out;
}

void GaussianEnsemble::draw(util::RandomStream& rng, double* out) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.normal();
  if (layout_ == FactorLayout::Dense) {
    Eigen::Map<Eigen::VectorXd> v(out, static_cast<Eigen::Index>(n));
    v = chol_.triangularView<Eigen::Lower>() * v;
    return;
  }
  // Mode products: view the row-major tensor as (pre, c_j, post) and apply
  // the axis factor along the middle index.
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto& counts = grid_.counts();
  if (layout_ == FactorLayout::WaveQuadrant) {
    // sheet part first, from the leading n normals, then the axis triangles
    Eigen::Map<RowMat> sheet(out, static_cast<Eigen::Index>(counts[0]), static_cast<Eigen::Index>(counts[1]));
    sheet = (axis_chol_[0].triangularView<Eigen::Lower>() * sheet).eval();
    sheet = (sheet * axis_chol_[1].transpose()).eval();
    Eigen::VectorXd a(static_cast<Eigen::Index>(counts[0])), b(static_cast<Eigen::Index>(counts[1]));
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = rng.normal();
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.normal();
    a = axis_chol_[2].triangularView<Eigen::Lower>() * a;
    b = axis_chol_[3].triangularView<Eigen::Lower>() * b;
    sheet.colwise() += a;
    sheet.rowwise() += b.transpose();
    sheet *= 0.5;
    return;
  }
  std::size_t pre = 1;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const std::size_t cj = counts[j];
    const std::size_t post = n / (pre * cj);
    for (std::size_t p = 0; p < pre; ++p) {
      Eigen::Map<RowMat> block(out + p * cj * post, static_cast<Eigen::Index>(cj), static_cast<Eigen::Index>(post));
      block = axis_chol_[j].triangularView<Eigen::Lower>() * block;
    }
    pre *= cj;
  }
}

SamplePath sample_path(const GaussianEnsemble& ens, std::uint64_t master_seed, std::uint64_t replicate) {
  const int d = ens.model().d();
  const std::size_t n = ens.size();
  std::vector<double> values(n * static_cast<std::size_t>(d));
  std::vector<double> comp(n);
  for (int c = 0; c < d; ++c) {
    util::RandomStream rng(master_seed, replicate, static_cast<std::uint32_t>(c));
    ens.draw(rng, comp.data());
    for (std::size_t i = 0; i < n; ++i) values[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)] = comp[i];
  }
  return SamplePath(ens.grid(), d, std::move(values), {master_seed, replicate});
}

std::vector<SamplePath> sample_paths(const GaussianEnsemble& ens, std::uint64_t master_seed, std::size_t count,
                                     std::size_t first, int threads) {
  if (count < 1) throw DomainError("sample_paths needs count >= 1");
  std::vector<std::optional<SamplePath>> slots(count);
  util::parallel_for(count, threads, [&](std::size_t k) { slots[k] = sample_path(ens, master_seed, first + k); });
  std::vector<SamplePath> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

double conditional_variance(const models::FieldModel& model, std::span<const double> x, const std::vector<Point>& cond,
                            double cutoff) {
  if (cond.empty()) throw DomainError("conditional_variance needs a nonempty conditioning set");
  for (const auto& y : cond)
    if (std::equal(y.begin(), y.end(), x.begin(), x.end())) return 0.0;
  const auto n = static_cast<Eigen::Index>(cond.size());
  Eigen::MatrixXd s(n, n);
  Eigen::VectorXd c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c[i] = models::model_covariance(model, x, cond[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j <= i; ++j)
      s(i, j) = s(j, i) = models::model_covariance(model, cond[static_cast<std::size_t>(i)], cond[static_cast<std::size_t>(j)]);
  }
  const double var = models::model_covariance(model, x, x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const double top = eig.eigenvalues().maxCoeff();
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * c;
  double explained = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = eig.eigenvalues()[i];
    if (lam > cutoff * top) explained += proj[i] * proj[i] / lam;
  }
  return std::max(0.0, var - explained);
}

}  // namespace sectorial::core
