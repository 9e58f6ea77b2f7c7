#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sectorial/core/grid.hpp"

namespace sectorial::core {

struct SeedLineage {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate = 0;
};

// d-vector field values on a grid, stored point-major: values[i*d + c].
class SamplePath {
 public:
  SamplePath(Grid grid, int d, std::vector<double> values, SeedLineage lineage = {});

  const Grid& grid() const { return grid_; }
  int d() const { return d_; }
  std::size_t size() const { return grid_.size(); }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> at(std::size_t point) const {
    return {values_.data() + point * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }
  double value(std::size_t point, int comp = 0) const {
    return values_[point * static_cast<std::size_t>(d_) + static_cast<std::size_t>(comp)];
  }
  const SeedLineage& lineage() const { return lineage_; }

 private:
  Grid grid_;
  int d_;
  std::vector<double> values_;
  SeedLineage lineage_;
};

// Text dump: '#' header lines with the grid and lineage, then one row per
// point: index, coordinates, components.
void write_csv(const SamplePath& path, std::ostream& out);
SamplePath read_csv(std::istream& in);

// Binary dump (little-endian): "SPTH", u32 version, u32 N, u32 d,
// u64 seed, u64 replicate, N f64 origin, N f64 spacing, N u64 counts,
// then size*d f64 values.
void write_binary(const SamplePath& path, std::ostream& out);
SamplePath read_binary(std::istream& in);

// Reads either format, deciding by the leading bytes.
SamplePath load_sample_path(const std::string& file);
void save_sample_path(const SamplePath& path, const std::string& file, bool binary);

}  // namespace sectorial::core
