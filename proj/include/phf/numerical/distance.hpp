#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "phf/numerical/bitmap.hpp"

namespace phf::numerical {

/// Euclidean distance, in grid units, from each cell center to the nearest
/// occupied cell center.
class DistanceField {
public:
  DistanceField(std::vector<int> shape, double spacing, std::vector<double> origin,
                std::vector<double> values);

  int dim() const { return static_cast<int>(shape_.size()); }
  std::span<const int> shape() const { return shape_; }
  double spacing() const { return spacing_; }
  std::span<const double> origin() const { return origin_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t linear) const { return values_[linear]; }

private:
  std::vector<int> shape_;
  double spacing_;
  std::vector<double> origin_;
  std::vector<double> values_;
};

/// Exact Euclidean distance transform: separable lower envelope of parabolas
/// on squared distances, one pass per axis. Lines of a pass are split across
/// `workers` threads; the result does not depend on the worker count.
DistanceField edt(const Bitmap& bitmap, int workers = 1);

/// Writes one 2-D slice (fixed last coordinate for 3-D fields, the whole
/// field otherwise) as CSV: one row per line of axis 1, columns along axis 0.
void write_distance_slice_csv(std::ostream& out, const DistanceField& field, int slice = 0);

}  // namespace phf::numerical
