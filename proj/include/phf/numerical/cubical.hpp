#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phf/numerical/bitmap.hpp"
#include "phf/numerical/distance.hpp"

namespace phf::numerical {

/// Cubical complex on a vertex grid, stored on the doubled (Khalimsky) grid:
/// a cell's coordinate is odd along the axes it spans. Every cell carries a
/// filtration value.
class FilteredCubicalComplex {
public:
  /// `values` indexed on the doubled grid of extent 2*L-1 per axis.
  FilteredCubicalComplex(std::vector<int> vertex_shape, std::vector<double> values,
                         double spacing = 1.0);

  int dim() const { return static_cast<int>(vertex_shape_.size()); }
  std::span<const int> vertex_shape() const { return vertex_shape_; }
  std::span<const int> extent() const { return extent_; }
  double spacing() const { return spacing_; }
  std::size_t cell_count() const { return values_.size(); }
  std::size_t cell_count(int d) const;
  double value(std::size_t cell) const { return values_[cell]; }
  std::span<const double> values() const { return values_; }
  int cell_dim(std::size_t cell) const { return cell_dims_[cell]; }
  std::vector<int> cell_coords(std::size_t cell) const;
  /// Faces of codimension one, appended to `out` (cleared first).
  void boundary(std::size_t cell, std::vector<std::size_t>& out) const;
  /// True iff every cell's value is >= the values of its faces.
  bool is_monotone() const;

private:
  std::vector<int> vertex_shape_;
  std::vector<int> extent_;
  std::vector<std::size_t> stride_;
  double spacing_;
  std::vector<double> values_;
  std::vector<std::uint8_t> cell_dims_;
};

/// Rough peak memory of building and reducing a complex on this vertex grid.
std::size_t estimated_complex_bytes(std::span<const int> vertex_shape);

/// V-construction: vertices take the field values, higher cells the max over
/// their vertices. Throws ResourceError if the estimate exceeds the budget.
FilteredCubicalComplex cubical_filtration(const DistanceField& field,
                                          std::size_t memory_budget = kDefaultMemoryBudget);

/// V-construction from raw vertex values (axis 0 fastest).
FilteredCubicalComplex cubical_filtration(std::vector<int> vertex_shape,
                                          std::span<const double> vertex_values,
                                          double spacing = 1.0,
                                          std::size_t memory_budget = kDefaultMemoryBudget);

}  // namespace phf::numerical
