#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sectorial/models/field_model.hpp"

namespace sectorial::core {

using models::Point;

// Regular lattice origin + i * spacing. Points are enumerated row-major:
// the last axis varies fastest, axis 0 slowest.
class Grid {
 public:
  static constexpr std::size_t kDefaultBudget = 20000;

  Grid(std::vector<double> origin, std::vector<double> spacing, std::vector<std::size_t> counts,
       std::size_t budget = kDefaultBudget);
  // counts[j] points from box.lo[j] to box.hi[j] inclusive.
  static Grid spanning(const models::Box& box, std::vector<std::size_t> counts,
                       std::size_t budget = kDefaultBudget);

  std::size_t dim() const { return origin_.size(); }
  std::size_t size() const { return size_; }
  const std::vector<double>& origin() const { return origin_; }
  const std::vector<double>& spacing() const { return spacing_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t budget() const { return budget_; }

  double coord(std::size_t axis, std::size_t i) const {
    return origin_[axis] + static_cast<double>(i) * spacing_[axis];
  }
  std::vector<double> axis(std::size_t j) const;
  Point point(std::size_t flat) const;
  void point(std::size_t flat, std::span<double> out) const;
  std::vector<std::size_t> unravel(std::size_t flat) const;
  std::size_t ravel(std::span<const std::size_t> idx) const;

  // Flat index of the grid point at x; throws DomainError if x is not on
  // the lattice (to within 1e-9 of a spacing).
  std::size_t locate(std::span<const double> x) const;

  double cell_volume() const;
  double max_spacing() const;
  models::Box bounds() const;

  bool operator==(const Grid& o) const {
    return origin_ == o.origin_ && spacing_ == o.spacing_ && counts_ == o.counts_;
  }

 private:
  std::vector<double> origin_;
  std::vector<double> spacing_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
  std::size_t budget_;
};

}  // namespace sectorial::core
