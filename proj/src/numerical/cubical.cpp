#include "phf/numerical/cubical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "phf/error.hpp"

namespace phf::numerical {

namespace {

// Bytes per cell: value, dimension tag, filtration order and rank, pivot
// bookkeeping and a share of the reduction workspace.
constexpr std::size_t kBytesPerCell = 32;

std::vector<int> extent_of(std::span<const int> vertex_shape) {
  std::vector<int> e;
  for (int l : vertex_shape) e.push_back(2 * l - 1);
  return e;
}

std::size_t cells_of(std::span<const int> vertex_shape) {
  std::size_t total = 1;
  for (int l : vertex_shape) {
    const auto e = static_cast<std::size_t>(2 * static_cast<long long>(l) - 1);
    if (total > std::numeric_limits<std::size_t>::max() / (e * kBytesPerCell))
      return std::numeric_limits<std::size_t>::max() / kBytesPerCell;
    total *= e;
  }
  return total;
}

}  // namespace

FilteredCubicalComplex::FilteredCubicalComplex(std::vector<int> vertex_shape,
                                               std::vector<double> values, double spacing)
    : vertex_shape_(std::move(vertex_shape)), spacing_(spacing), values_(std::move(values)) {
  if (vertex_shape_.empty() || vertex_shape_.size() > 3)
    throw ArgumentError("cubical complex dimension must be 1, 2 or 3");
  for (int l : vertex_shape_)
    if (l < 2) throw ArgumentError("cubical complex needs at least 2 vertices per axis");
  if (!(spacing_ > 0.0)) throw ArgumentError("cubical complex spacing must be positive");
  extent_ = extent_of(vertex_shape_);
  std::size_t total = 1;
  for (int e : extent_) {
    stride_.push_back(total);
    total *= static_cast<std::size_t>(e);
  }
  if (total >= std::numeric_limits<std::uint32_t>::max())
    throw ResourceError("cubical complex has too many cells");
  if (values_.size() != total) throw ArgumentError("cell values do not match the doubled grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw ArgumentError("cell values must be finite");
  cell_dims_.resize(total);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rest = c;
    int k = 0;
    for (int e : extent_) {
      k += static_cast<int>((rest % static_cast<std::size_t>(e)) & 1U);
      rest /= static_cast<std::size_t>(e);
    }
    cell_dims_[c] = static_cast<std::uint8_t>(k);
  }
}

std::size_t FilteredCubicalComplex::cell_count(int d) const {
  return static_cast<std::size_t>(
      std::count(cell_dims_.begin(), cell_dims_.end(), static_cast<std::uint8_t>(d)));
}

std::vector<int> FilteredCubicalComplex::cell_coords(std::size_t cell) const {
  std::vector<int> c;
  for (int e : extent_) {
    c.push_back(static_cast<int>(cell % static_cast<std::size_t>(e)));
    cell /= static_cast<std::size_t>(e);
  }
  return c;
}

void FilteredCubicalComplex::boundary(std::size_t cell, std::vector<std::size_t>& out) const {
  out.clear();
  std::size_t rest = cell;
  for (std::size_t a = 0; a < extent_.size(); ++a) {
    const auto e = static_cast<std::size_t>(extent_[a]);
    if ((rest % e) & 1U) {
      out.push_back(cell - stride_[a]);
      out.push_back(cell + stride_[a]);
    }
    rest /= e;
  }
}

bool FilteredCubicalComplex::is_monotone() const {
  std::vector<std::size_t> faces;
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (cell_dims_[c] == 0) continue;
    boundary(c, faces);
    for (auto f : faces)
      if (values_[f] > values_[c]) return false;
  }
  return true;
}

std::size_t estimated_complex_bytes(std::span<const int> vertex_shape) {
  return cells_of(vertex_shape) * kBytesPerCell;
}

FilteredCubicalComplex cubical_filtration(const DistanceField& field, std::size_t memory_budget) {
  return cubical_filtration(std::vector<int>(field.shape().begin(), field.shape().end()),
                            field.values(), field.spacing(), memory_budget);
}

FilteredCubicalComplex cubical_filtration(std::vector<int> vertex_shape,
                                          std::span<const double> vertex_values, double spacing,
                                          std::size_t memory_budget) {
  if (vertex_shape.empty() || vertex_shape.size() > 3)
    throw ArgumentError("cubical complex dimension must be 1, 2 or 3");
  std::size_t nverts = 1;
  for (int l : vertex_shape) {
    if (l < 2) throw ArgumentError("cubical complex needs at least 2 vertices per axis");
    nverts *= static_cast<std::size_t>(l);
  }
  if (vertex_values.size() != nverts) throw ArgumentError("vertex values do not match shape");
  const std::size_t need = estimated_complex_bytes(vertex_shape);
  if (need > memory_budget)
    throw ResourceError("cubical complex needs about " + std::to_string(need) +
                        " bytes, over the memory budget of " + std::to_string(memory_budget));

  const auto ext = extent_of(vertex_shape);
  const int d = static_cast<int>(vertex_shape.size());
  const std::size_t ex = static_cast<std::size_t>(ext[0]);
  const std::size_t ey = d > 1 ? static_cast<std::size_t>(ext[1]) : 1;
  const std::size_t ez = d > 2 ? static_cast<std::size_t>(ext[2]) : 1;
  const std::size_t vx = static_cast<std::size_t>(vertex_shape[0]);
  const std::size_t vy = d > 1 ? static_cast<std::size_t>(vertex_shape[1]) : 1;
  std::vector<double> vals(ex * ey * ez, 0.0);
  auto at = [&](std::size_t x, std::size_t y, std::size_t z) -> double& {
    return vals[(z * ey + y) * ex + x];
  };
  for (std::size_t z = 0; z < ez; z += 2)
    for (std::size_t y = 0; y < ey; y += 2)
      for (std::size_t x = 0; x < ex; x += 2)
        at(x, y, z) = vertex_values[((z / 2) * vy + y / 2) * vx + x / 2];
  // Separable max: after the pass along axis a every cell that is odd only in
  // axes <= a holds the max over its vertices.
  for (std::size_t z = 0; z < ez; z += 2)
    for (std::size_t y = 0; y < ey; y += 2)
      for (std::size_t x = 1; x < ex; x += 2) at(x, y, z) = std::max(at(x - 1, y, z), at(x + 1, y, z));
  if (d > 1)
    for (std::size_t z = 0; z < ez; z += 2)
      for (std::size_t y = 1; y < ey; y += 2)
        for (std::size_t x = 0; x < ex; ++x) at(x, y, z) = std::max(at(x, y - 1, z), at(x, y + 1, z));
  if (d > 2)
    for (std::size_t z = 1; z < ez; z += 2)
      for (std::size_t y = 0; y < ey; ++y)
        for (std::size_t x = 0; x < ex; ++x) at(x, y, z) = std::max(at(x, y, z - 1), at(x, y, z + 1));
  return FilteredCubicalComplex(std::move(vertex_shape), std::move(vals), spacing);
}

}  // namespace phf::numerical
