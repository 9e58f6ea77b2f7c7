#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sectorial/core/sample_path.hpp"
#include "sectorial/models/field_model.hpp"
#include "sectorial/models/gauge.hpp"

namespace sectorial::fractal {

using core::Grid;
using core::SamplePath;
using models::Box;
using models::GaugeFunction;
using models::Point;

// Cells anchor + idx * cell + [0, cell)^dim, indices stored as sorted unique
// dim-tuples.
struct CellSet {
  std::size_t dim = 0;
  double cell = 0.0;
  std::vector<double> anchor;
  std::vector<std::int64_t> indices;  // size() * dim entries

  std::size_t size() const { return dim == 0 ? 0 : indices.size() / dim; }
  bool empty() const { return indices.empty(); }
  std::span<const std::int64_t> at(std::size_t k) const { return {indices.data() + k * dim, dim}; }
  bool contains(std::span<const std::int64_t> idx) const;

  // Sorts and deduplicates raw tuples.
  static CellSet make(std::size_t dim, double cell, std::vector<double> anchor, std::vector<std::int64_t> raw);
};

// tol(h) = c h^alpha sqrt(log 1/h), or a fixed value. With path_scaled the
// constant is c_hat times increment_scale(path, alpha), so fields whose
// increments differ by a constant factor get the same relative tolerance.
struct LevelSetTolerance {
  double alpha = 0.5;
  double c_hat = 1.0;
  std::optional<double> fixed;
  bool path_scaled = false;

  double value(double h) const;
  static LevelSetTolerance modulus(double alpha, double c_hat = 1.0) { return {alpha, c_hat, std::nullopt, false}; }
  static LevelSetTolerance scaled(double alpha, double c_hat = 1.0) { return {alpha, c_hat, std::nullopt, true}; }
  static LevelSetTolerance absolute(double tol) { return {0.5, 1.0, tol, false}; }
};

// RMS of nearest-neighbour increments over all axes and components, divided
// by h^alpha (isotropic grid).
double increment_scale(const SamplePath& path, double alpha);

// Grid points with |v(x) - z| <= tol, as cells of the grid (isotropic
// spacing required), anchored at the grid origin.
CellSet extract_level_set(const SamplePath& path, std::span<const double> z, const LevelSetTolerance& tol);

struct BoxDimension {
  std::vector<double> scales;  // ascending
  std::vector<double> counts;
  double slope = 0.0;
  double stderr_ = 0.0;
};

// Occupied boxes floor((x - anchor) / eps) on nested lattices anchored at the
// set's anchor, with the smallest and largest scale left out of the fit.
BoxDimension box_dimension(const CellSet& cells, std::vector<double> scales);
BoxDimension box_dimension(std::span<const double> points, std::size_t dim, std::span<const double> anchor,
                           std::vector<double> scales);

// Image of the grid points in J, binned at `cell` with anchor 0.
CellSet range_cells(const SamplePath& path, const Box& J, double cell);
std::vector<double> range_points(const SamplePath& path, const Box& J);

struct CoverOptions {
  std::optional<std::vector<double>> z;  // level set target; no level sums without it
  std::vector<GaugeFunction> level_gauges;  // default: the level gauge of (N, d, alpha)
};

struct CoverReport {
  int p = 0;
  double K1 = 0.0, K2 = 0.0;
  std::vector<int> orders;          // p .. 2p
  std::vector<long> good_counts;    // per order
  long bad_count = 0;
  double range_sum = 0.0;           // sum phi(2 r_C), phi the range gauge
  GaugeFunction range_gauge{1.0, 0.0};
  std::vector<GaugeFunction> level_gauges;
  std::vector<double> level_sums;   // sum over cubes with |v(s_C) - z| <= 2 r_C of gauge(diam C)
  long level_cubes = 0;
  double covered_volume = 0.0;      // must equal the volume of J
};

// Dyadic cubes of J of order p .. 2p: each point of J lies in the good cube of
// smallest order that contains it, the rest is covered by bad order-2p cubes.
// Oscillation is the diagonal of the image's bounding box, which is exact for
// d = 1 and never below the true diameter.
CoverReport adaptive_cover(const SamplePath& path, const Box& J, int p, double K1_hat, double K2_hat, double alpha,
                           const CoverOptions& opts = {});

double good_radius(int q, double K1, double alpha);  // 4 K1 2^{-q alpha} (loglog 2^q)^{-alpha}
double bad_radius(int p, double K2, double alpha);   // K2 2^{-2 p alpha} sqrt(p)

// lambda{x in J : |v(x) - z| <= eps} / (volume of the d-ball of radius eps).
double local_time_estimate(const SamplePath& path, std::span<const double> z, const Box& J, double eps);

}  // namespace sectorial::fractal
