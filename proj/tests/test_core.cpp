#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sectorial/core/ensemble.hpp"
#include "sectorial/models/covariance.hpp"
#include "sectorial/util/errors.hpp"
#include "sectorial/util/rng.hpp"

using namespace sectorial;
using namespace sectorial::core;
using models::Box;
using models::FieldModel;
using doctest::Approx;

TEST_CASE("grid enumeration is row-major") {
  Grid g({1.0, 2.0}, {0.5, 0.25}, {3, 4});
  CHECK(g.size() == 12);
  CHECK(g.point(1) == Point{1.0, 2.25});
  CHECK(g.point(4) == Point{1.5, 2.0});
  CHECK(g.ravel(g.unravel(7)) == 7);
  CHECK(g.locate(std::vector<double>{1.5, 2.5}) == 6);
  CHECK_THROWS_AS(g.locate(std::vector<double>{1.2, 2.5}), DomainError);
  CHECK(g.cell_volume() == Approx(0.125));
  CHECK(g.bounds().hi == std::vector<double>{2.0, 2.75});
  CHECK_THROWS_AS(Grid({0.0}, {0.0}, {2}), DomainError);  // coincident points
  CHECK_THROWS_AS(Grid::spanning(Box::cube(2, 1, 2), {200, 200}), BudgetError);
  CHECK_NOTHROW(Grid::spanning(Box::cube(2, 1, 2), {200, 200}, 40000));
}

TEST_CASE("single-point ensemble") {
  const auto bs = FieldModel::brownian_sheet(2, 1, Box::cube(2, 0.5, 2));
  for (auto layout : {FactorLayout::Dense, FactorLayout::Kronecker}) {
    EnsembleOptions o;
    o.layout = layout;
    const auto ens = build_ensemble(bs, Grid({1.0, 1.0}, {1.0, 1.0}, {1, 1}), o);
    CHECK(ens.covariance()(0, 0) == 1.0);
    CHECK(ens.factor()(0, 0) == 1.0);
  }
}

TEST_CASE("factorization residual on a 16x16 sheet grid") {
  const auto bs = FieldModel::brownian_sheet(2, 1, Box::cube(2, 1, 2));
  const Grid g = Grid::spanning(Box::cube(2, 1, 2), {16, 16});
  EnsembleOptions dense;
  dense.layout = FactorLayout::Dense;
  const auto a = build_ensemble(bs, g, dense);
  const auto b = build_ensemble(bs, g);
  CHECK(b.layout() == FactorLayout::Kronecker);
  for (const auto* e : {&a, &b}) {
    const Eigen::MatrixXd c = e->covariance(), l = e->factor();
    Eigen::MatrixXd target = c;
    target.diagonal().array() += e->jitter_used();
    CHECK((l * l.transpose() - target).norm() / target.norm() <= 1e-10);
    CHECK(e->jitter_used() <= 1e-8 * c.trace() / c.rows());
    CHECK(e->residual() <= 1e-10);
  }
  CHECK((a.covariance() - b.covariance()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((a.factor() - b.factor()).cwiseAbs().maxCoeff() < 1e-10);
  // Same factor and same normals: both layouts give the same paths.
  const auto pa = sample_path(a, 5, 2), pb = sample_path(b, 5, 2);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(pa.value(i) == Approx(pb.value(i)).epsilon(1e-9));
}

TEST_CASE("dense factorization of white-noise wave covariance") {
  const auto ww = FieldModel::wave_white(1, Box::cube(2, 0.3, 1.3));
  const auto ens = build_ensemble(ww, Grid::spanning(Box::cube(2, 0.3, 1.3), {10, 10}));
  CHECK(ens.layout() == FactorLayout::Dense);
  CHECK(ens.residual() <= 1e-10);
  CHECK_THROWS_AS(build_ensemble(ww, Grid::spanning(Box::cube(2, 0.2, 1.3), {4, 4})), DomainError);
  EnsembleOptions k;
  k.layout = FactorLayout::Kronecker;
  CHECK_THROWS_AS(build_ensemble(ww, Grid::spanning(Box::cube(2, 0.3, 1.3), {4, 4}), k), DomainError);
}

TEST_CASE("quadrant layout of the white-noise wave") {
  const Box box = Box::cube(2, 0.3, 1.3);
  const auto ww = FieldModel::wave_white(1, box);
  const Grid g = Grid::spanning(box, {9, 7});
  EnsembleOptions q;
  q.layout = FactorLayout::WaveQuadrant;
  const auto a = build_ensemble(ww, g);
  const auto b = build_ensemble(ww, g, q);
  CHECK(b.layout() == FactorLayout::WaveQuadrant);
  CHECK((a.covariance() - b.covariance()).cwiseAbs().maxCoeff() < 1e-13);
  const Eigen::MatrixXd l = b.factor();
  CHECK(l.cols() == static_cast<Eigen::Index>(g.size() + 16));
  CHECK((l * l.transpose() - b.covariance()).norm() / b.covariance().norm() <= 1e-10);
  // draw agrees with the rectangular factor applied to the same normals
  const auto path = sample_path(b, 3, 1);
  util::RandomStream rng(3, 1, 0);
  Eigen::VectorXd z(l.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const Eigen::VectorXd v = l * z;
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(path.value(i) == Approx(v[static_cast<Eigen::Index>(i)]).epsilon(1e-10));
  const auto bs = FieldModel::brownian_sheet(2, 1, box);
  CHECK_THROWS_AS(build_ensemble(bs, g, q), DomainError);
}

TEST_CASE("Monte Carlo moments of sampled paths") {
  const auto fbs = FieldModel::fractional_sheet(2, 2, 0.7, Box::cube(2, 1, 2));
  const Grid g = Grid::spanning(Box::cube(2, 1, 2), {4, 4});
  const auto ens = build_ensemble(fbs, g);
  const int m = 10000;
  const auto paths = sample_paths(ens, 99, m);
  const Eigen::MatrixXd cov = ens.covariance();
  for (std::size_t i : {0ul, 5ul, 15ul}) {
    for (int c = 0; c < 2; ++c) {
      double s = 0;
      for (const auto& p : paths) s += p.value(i, c);
      CHECK(std::abs(s / m) <= 4 * std::sqrt(cov(i, i) / m));
    }
  }
  // Covariance of one pair and the variance of a linear functional.
  const std::size_t i = 3, j = 12;
  std::vector<double> prod(m), lin(m);
  const Eigen::VectorXd ell = Eigen::VectorXd::LinSpaced(16, -1.0, 2.0);
  for (int k = 0; k < m; ++k) {
    prod[k] = paths[k].value(i) * paths[k].value(j);
    double l = 0;
    for (std::size_t q = 0; q < 16; ++q) l += ell[q] * paths[k].value(q);
    lin[k] = l * l;
  }
  auto mean_se = [](const std::vector<double>& v) {
    double s = 0, s2 = 0;
    for (double x : v) s += x, s2 += x * x;
    const double mu = s / v.size();
    return std::pair{mu, std::sqrt((s2 / v.size() - mu * mu) / v.size())};
  };
  auto [c_hat, c_se] = mean_se(prod);
  CHECK(std::abs(c_hat - cov(i, j)) <= 4 * c_se);
  auto [v_hat, v_se] = mean_se(lin);
  CHECK(std::abs(v_hat - ell.dot(cov * ell)) <= 5 * v_se);
  // Components are independent.
  double cross = 0;
  for (const auto& p : paths) cross += p.value(5, 0) * p.value(5, 1);
  CHECK(std::abs(cross / m) <= 4 * cov(5, 5) / std::sqrt(m));
}

TEST_CASE("replicates do not depend on the batch") {
  const auto bs = FieldModel::brownian_sheet(2, 2, Box::cube(2, 1, 2));
  const auto ens = build_ensemble(bs, Grid::spanning(Box::cube(2, 1, 2), {5, 5}));
  const auto ten = sample_paths(ens, 42, 10, 0, 3);
  const auto three = sample_paths(ens, 42, 3);
  CHECK(ten[2].values() == three[2].values());
  CHECK(ten[2].lineage().replicate == 2);
  CHECK(sample_paths(ens, 42, 1, 7)[0].values() == ten[7].values());
  CHECK(sample_path(ens, 42, 1).values() == sample_path(ens, 42, 1).values());
  CHECK(sample_path(ens, 42, 1).values() != sample_path(ens, 43, 1).values());
}

TEST_CASE("conditional variance") {
  const auto bm = FieldModel::brownian_sheet(1, 1, Box::cube(1, 0.5, 3));
  CHECK(conditional_variance(bm, std::vector<double>{2.0}, {{1.0}}) == Approx(1.0));
  const auto bs = FieldModel::brownian_sheet(2, 1, Box::cube(2, 0.5, 3));
  CHECK(conditional_variance(bs, std::vector<double>{2, 2}, {{1, 1}}) == Approx(3.0));
  CHECK(conditional_variance(bs, std::vector<double>{2, 2}, {{1, 1}, {2, 2}}) == 0.0);
  // Nested conditioning sets never increase the variance.
  util::RandomStream rng(8, 0);
  const auto fbs = FieldModel::fractional_sheet(2, 1, 0.3, Box::cube(2, 0.5, 3));
  for (int trial = 0; trial < 30; ++trial) {
    const Point x{rng.uniform(0.5, 3), rng.uniform(0.5, 3)};
    std::vector<Point> cond;
    double prev = models::model_covariance(fbs, x, x);
    for (int k = 0; k < 6; ++k) {
      cond.push_back({rng.uniform(0.5, 3), rng.uniform(0.5, 3)});
      const double v = conditional_variance(fbs, x, cond);
      CHECK(v >= 0.0);
      CHECK(v <= prev * (1 + 1e-9) + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("sample path dumps round-trip") {
  const auto bs = FieldModel::brownian_sheet(2, 3, Box::cube(2, 1, 2));
  const auto p = sample_path(build_ensemble(bs, Grid::spanning(Box::cube(2, 1, 2), {6, 5})), 3, 4);
  std::stringstream csv, bin;
  write_csv(p, csv);
  write_binary(p, bin);
  const auto a = read_csv(csv);
  const auto b = read_binary(bin);
  for (const auto* q : {&a, &b}) {
    CHECK(q->grid() == p.grid());
    CHECK(q->d() == 3);
    CHECK(q->values() == p.values());
    CHECK(q->lineage().master_seed == 3);
    CHECK(q->lineage().replicate == 4);
  }
  CHECK_THROWS(SamplePath(p.grid(), 2, p.values()));
}
