#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sectorial/core/grid.hpp"
#include "sectorial/core/sample_path.hpp"
#include "sectorial/spectral/spectral.hpp"

namespace sectorial::spectral {

// Positive half-axis of the frequency lattice shared by every band: panels of
// width disc.node_panel, halved disc.grading_levels times towards 0, with
// disc.node_gl Gauss-Legendre nodes each, up to disc.node_cutoff.
struct AxisLattice {
  std::vector<double> edges;
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit AxisLattice(const SpectralDiscretization& disc);
  // Number of nodes below c; c must be a lattice edge.
  std::size_t count_below(double c) const;
};

// White-noise discretisation of v([a, b), .) at a fixed point set. Each
// lattice node carries its own counter-indexed normal, so disjoint bands use
// disjoint normals and the draws for a band are the restriction of the draw
// for any band containing it.
class BandSampler {
 public:
  BandSampler(const FieldModel& model, double a, double b, std::vector<Point> points,
              const SpectralDiscretization& disc = {});

  std::size_t size() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }
  std::size_t node_count() const;

  // One component from stream (seed, replicate, component).
  void draw(std::uint64_t seed, std::uint64_t replicate, std::uint32_t component, std::span<double> out) const;

  // Exact covariance of draw().
  Eigen::MatrixXd lattice_covariance() const;

 private:
  FieldModel model_;
  double a_, b_;
  std::vector<Point> points_;
  AxisLattice lattice_;
  std::size_t ma_ = 0, mb_ = 0;
  // sheets: unique coordinates per axis, the point -> coordinate map, and
  // features [axis][p] of size (unique coords) x mb
  std::vector<std::vector<double>> coords_;
  std::vector<std::vector<std::size_t>> coord_index_;
  std::vector<std::array<Eigen::MatrixXd, 2>> sheet_features_;
  double sheet_scale_ = 1.0;
  // waves: dense features (points x kept nodes) and global normal indices
  Eigen::MatrixXd wave_features_;
  std::vector<std::uint64_t> wave_normal_index_;
};

// Sample paths of v([a, b), .) on the grid, d components each.
std::vector<core::SamplePath> band_field_sample(const FieldModel& model, const BandSpec& band, const core::Grid& grid,
                                                const SpectralDiscretization& disc, std::uint64_t master_seed,
                                                std::size_t count);

}  // namespace sectorial::spectral
