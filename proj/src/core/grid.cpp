#include "sectorial/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sectorial/util/errors.hpp"

namespace sectorial::core {

Grid::Grid(std::vector<double> origin, std::vector<double> spacing, std::vector<std::size_t> counts,
           std::size_t budget)
    : origin_(std::move(origin)), spacing_(std::move(spacing)), counts_(std::move(counts)), budget_(budget) {
  const std::size_t n = origin_.size();
  if (n == 0 || spacing_.size() != n || counts_.size() != n)
    throw DomainError("grid origin, spacing and counts must have the same positive length");
  strides_.assign(n, 1);
  size_ = 1;
  for (std::size_t j = n; j-- > 0;) {
    if (!(spacing_[j] > 0.0) || !std::isfinite(spacing_[j]))
      throw DomainError("grid spacing must be positive (coincident points make the covariance singular)");
    if (counts_[j] == 0) throw DomainError("grid counts must be at least 1");
    strides_[j] = size_;
    size_ *= counts_[j];
  }
  if (size_ > budget_)
    throw BudgetError("grid has " + std::to_string(size_) + " points, above the budget of " +
                      std::to_string(budget_) + "; coarsen the grid or raise grid.budget");
}

Grid Grid::spanning(const models::Box& box, std::vector<std::size_t> counts, std::size_t budget) {
  if (counts.size() != box.dim()) throw DomainError("grid counts do not match the box dimension");
  std::vector<double> spacing(box.dim());
  for (std::size_t j = 0; j < box.dim(); ++j) {
    if (counts[j] < 2) throw DomainError("a spanning grid needs at least 2 points per axis");
    spacing[j] = (box.hi[j] - box.lo[j]) / static_cast<double>(counts[j] - 1);
  }
  return Grid(box.lo, std::move(spacing), std::move(counts), budget);
}

std::vector<double> Grid::axis(std::size_t j) const {
  std::vector<double> a(counts_[j]);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = coord(j, i);
  return a;
}

Point Grid::point(std::size_t flat) const {
  Point p(dim());
  point(flat, p);
  return p;
}

void Grid::point(std::size_t flat, std::span<double> out) const {
  for (std::size_t j = 0; j < dim(); ++j) {
    out[j] = coord(j, flat / strides_[j]);
    flat %= strides_[j];
  }
}

std::vector<std::size_t> Grid::unravel(std::size_t flat) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t j = 0; j < dim(); ++j) {
    idx[j] = flat / strides_[j];
    flat %= strides_[j];
  }
  return idx;
}

std::size_t Grid::ravel(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t j = 0; j < dim(); ++j) flat += idx[j] * strides_[j];
  return flat;
}

std::size_t Grid::locate(std::span<const double> x) const {
  if (x.size() != dim()) throw DomainError("point dimension does not match the grid");
  std::size_t flat = 0;
  for (std::size_t j = 0; j < dim(); ++j) {
    const double u = (x[j] - origin_[j]) / spacing_[j];
    const double r = std::round(u);
    if (std::abs(u - r) > 1e-9 || r < 0 || r >= static_cast<double>(counts_[j]))
      throw DomainError("point is not a grid point");
    flat += static_cast<std::size_t>(r) * strides_[j];
  }
  return flat;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (double h : spacing_) v *= h;
  return v;
}

double Grid::max_spacing() const { return *std::max_element(spacing_.begin(), spacing_.end()); }

models::Box Grid::bounds() const {
  models::Box b{origin_, origin_};
  for (std::size_t j = 0; j < dim(); ++j) b.hi[j] = coord(j, counts_[j] - 1);
  return b;
}

}  // namespace sectorial::core
