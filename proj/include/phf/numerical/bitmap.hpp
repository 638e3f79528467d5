#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "phf/families.hpp"

namespace phf::numerical {

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{8} << 30;  // 8 GiB

/// Occupancy grid of cubical cells of side `spacing`, axis 0 varying fastest.
class Bitmap {
public:
  Bitmap(std::vector<int> shape, double spacing, std::vector<double> origin,
         std::vector<std::uint8_t> occupancy);

  int dim() const { return static_cast<int>(shape_.size()); }
  std::span<const int> shape() const { return shape_; }
  double spacing() const { return spacing_; }
  std::span<const double> origin() const { return origin_; }
  std::size_t size() const { return occupancy_.size(); }
  std::size_t occupied_count() const;
  bool occupied(std::size_t linear) const { return occupancy_[linear] != 0; }
  std::span<const std::uint8_t> occupancy() const { return occupancy_; }
  std::size_t index(std::span<const int> coords) const;
  std::vector<int> coords(std::size_t linear) const;

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

private:
  std::vector<int> shape_;
  double spacing_;
  std::vector<double> origin_;
  std::vector<std::uint8_t> occupancy_;
};

/// Depth-k pre-fractal of the spec's IFS on the unit cube at `resolution`
/// cells per unit. A cell is occupied iff its center lies in the union of the
/// images of [0,1]^d under all length-k compositions of the maps.
Bitmap prefractal_bitmap(const FractalSpec& spec, int depth, int resolution,
                         std::size_t memory_budget = kDefaultMemoryBudget);

/// NRRD-style text header (dimension, sizes, spacing, origin) followed by a
/// raw LSB-first bitset payload.
void write_bitmap(std::ostream& out, const Bitmap& bitmap);
Bitmap read_bitmap(std::istream& in);

}  // namespace phf::numerical
