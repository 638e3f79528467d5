#include "phf/numerical/bitmap.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "phf/error.hpp"

namespace phf::numerical {

namespace {

std::size_t checked_product(std::span<const int> shape) {
  std::size_t total = 1;
  for (int s : shape) {
    if (s < 1) throw ArgumentError("bitmap axis length must be positive");
    if (total > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(s))
      throw ResourceError("bitmap size overflows");
    total *= static_cast<std::size_t>(s);
  }
  return total;
}

struct Box {
  std::vector<long long> lo;  // in cells
  long long side;
};

}  // namespace

Bitmap::Bitmap(std::vector<int> shape, double spacing, std::vector<double> origin,
               std::vector<std::uint8_t> occupancy)
    : shape_(std::move(shape)),
      spacing_(spacing),
      origin_(std::move(origin)),
      occupancy_(std::move(occupancy)) {
  if (shape_.empty() || shape_.size() > 3) throw ArgumentError("bitmap dimension must be 1, 2 or 3");
  for (int s : shape_)
    if (s < 2) throw ArgumentError("bitmap needs at least 2 cells per axis");
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
    throw ArgumentError("bitmap spacing must be positive and finite");
  if (origin_.size() != shape_.size()) throw ArgumentError("bitmap origin has wrong dimension");
  if (occupancy_.size() != checked_product(shape_))
    throw ArgumentError("bitmap occupancy size does not match shape");
  if (std::none_of(occupancy_.begin(), occupancy_.end(), [](auto v) { return v != 0; }))
    throw ArgumentError("bitmap has no occupied cell");
  for (auto& v : occupancy_) v = v != 0 ? 1 : 0;
}

std::size_t Bitmap::occupied_count() const {
  return static_cast<std::size_t>(std::count(occupancy_.begin(), occupancy_.end(), 1));
}

std::size_t Bitmap::index(std::span<const int> coords) const {
  if (coords.size() != shape_.size()) throw ArgumentError("coordinate dimension mismatch");
  std::size_t idx = 0;
  for (std::size_t a = shape_.size(); a-- > 0;) {
    if (coords[a] < 0 || coords[a] >= shape_[a]) throw ArgumentError("coordinate out of range");
    idx = idx * static_cast<std::size_t>(shape_[a]) + static_cast<std::size_t>(coords[a]);
  }
  return idx;
}

std::vector<int> Bitmap::coords(std::size_t linear) const {
  std::vector<int> c(shape_.size());
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    c[a] = static_cast<int>(linear % static_cast<std::size_t>(shape_[a]));
    linear /= static_cast<std::size_t>(shape_[a]);
  }
  return c;
}

Bitmap prefractal_bitmap(const FractalSpec& spec, int depth, int resolution,
                         std::size_t memory_budget) {
  if (depth < 1) throw ArgumentError("depth must be >= 1");
  if (resolution < 2) throw ArgumentError("resolution must be >= 2");
  if (spec.ifs.empty()) throw ArgumentError("spec '" + spec.name + "' has no IFS maps");
  const int d = spec.ambient_dim;
  const double r = spec.ifs.front().ratio;
  for (const auto& m : spec.ifs) {
    if (m.ratio != r) throw UnsupportedStructureError("rasterization needs a uniform IFS ratio");
    if (static_cast<int>(m.translation.size()) != d)
      throw ArgumentError("IFS translation has wrong dimension");
  }
  const double inv = 1.0 / r;
  const long long base = std::llround(inv);
  if (base < 2 || std::abs(inv - static_cast<double>(base)) > 1e-9)
    throw UnsupportedStructureError("rasterization needs a ratio of the form 1/m");

  // The depth-k boxes have side n / base^k cells; they must be whole cells.
  long long unit = 1;
  for (int k = 0; k < depth; ++k) {
    if (unit > std::numeric_limits<int>::max() / base)
      throw ResourceError("depth too large for an aligned grid");
    unit *= base;
  }
  if (resolution % unit != 0) {
    const long long next = (resolution / unit + 1) * unit;
    throw ArgumentError("resolution " + std::to_string(resolution) + " is not a multiple of " +
                        std::to_string(unit) + " at depth " + std::to_string(depth) +
                        "; smallest valid resolution above it is " + std::to_string(next));
  }

  std::vector<int> shape(static_cast<std::size_t>(d), resolution);
  const std::size_t total = checked_product(shape);
  if (total > memory_budget)
    throw ResourceError("bitmap of " + std::to_string(total) + " cells exceeds memory budget of " +
                        std::to_string(memory_budget) + " bytes");

  // Map offsets in cells: translation t at scale s contributes s * t * n.
  std::vector<std::vector<long long>> offsets;
  for (const auto& m : spec.ifs) {
    std::vector<long long> o(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      const double t = m.translation[static_cast<std::size_t>(a)] * static_cast<double>(base);
      const long long ti = std::llround(t);
      if (std::abs(t - static_cast<double>(ti)) > 1e-9 || ti < 0 || ti > base - 1)
        throw UnsupportedStructureError("IFS translations must lie on the 1/m lattice inside the unit cube");
      o[static_cast<std::size_t>(a)] = ti;
    }
    offsets.push_back(std::move(o));
  }

  std::vector<Box> boxes{{std::vector<long long>(static_cast<std::size_t>(d), 0), resolution}};
  for (int k = 0; k < depth; ++k) {
    std::vector<Box> next;
    next.reserve(boxes.size() * offsets.size());
    for (const auto& b : boxes) {
      const long long side = b.side / base;
      for (const auto& o : offsets) {
        Box c{b.lo, side};
        for (int a = 0; a < d; ++a) c.lo[static_cast<std::size_t>(a)] += o[static_cast<std::size_t>(a)] * side;
        next.push_back(std::move(c));
      }
    }
    boxes = std::move(next);
  }

  std::vector<std::uint8_t> occ(total, 0);
  const auto n = static_cast<std::size_t>(resolution);
  for (const auto& b : boxes) {
    const auto s = static_cast<std::size_t>(b.side);
    const auto x0 = static_cast<std::size_t>(b.lo[0]);
    const std::size_t y0 = d > 1 ? static_cast<std::size_t>(b.lo[1]) : 0;
    const std::size_t z0 = d > 2 ? static_cast<std::size_t>(b.lo[2]) : 0;
    const std::size_t ys = d > 1 ? s : 1;
    const std::size_t zs = d > 2 ? s : 1;
    for (std::size_t z = z0; z < z0 + zs; ++z)
      for (std::size_t y = y0; y < y0 + ys; ++y) {
        auto* row = occ.data() + (z * n + y) * n;
        std::fill(row + x0, row + x0 + s, std::uint8_t{1});
      }
  }
  return Bitmap(std::move(shape), 1.0 / static_cast<double>(resolution),
                std::vector<double>(static_cast<std::size_t>(d), 0.0), std::move(occ));
}

void write_bitmap(std::ostream& out, const Bitmap& bitmap) {
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << "NRRD0004\n";
  hdr << "type: bitset\n";
  hdr << "dimension: " << bitmap.dim() << "\n";
  hdr << "sizes:";
  for (int s : bitmap.shape()) hdr << ' ' << s;
  hdr << "\nspacing: " << bitmap.spacing() << "\n";
  hdr << "origin:";
  for (double o : bitmap.origin()) hdr << ' ' << o;
  hdr << "\nencoding: raw\n\n";
  out << hdr.str();
  std::vector<char> bytes((bitmap.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bitmap.size(); ++i)
    if (bitmap.occupied(i)) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (1 << (i % 8)));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed to write bitmap");
}

Bitmap read_bitmap(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "NRRD0004") throw ArgumentError("not a bitmap file");
  int dim = 0;
  std::vector<int> sizes;
  double spacing = 0.0;
  std::vector<double> origin;
  bool raw = false;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ArgumentError("malformed bitmap header line: " + line);
    const std::string key = line.substr(0, colon);
    std::istringstream val(line.substr(colon + 1));
    if (key == "type") {
      std::string t;
      val >> t;
      if (t != "bitset") throw ArgumentError("unsupported bitmap type: " + t);
    } else if (key == "dimension") {
      val >> dim;
    } else if (key == "sizes") {
      for (int s; val >> s;) sizes.push_back(s);
    } else if (key == "spacing") {
      val >> spacing;
    } else if (key == "origin") {
      for (double o; val >> o;) origin.push_back(o);
    } else if (key == "encoding") {
      std::string e;
      val >> e;
      raw = e == "raw";
    }
  }
  if (!raw) throw ArgumentError("bitmap encoding must be raw");
  if (dim < 1 || static_cast<int>(sizes.size()) != dim)
    throw ArgumentError("bitmap header sizes do not match dimension");
  const std::size_t total = checked_product(sizes);
  std::vector<char> bytes((total + 7) / 8);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw ArgumentError("bitmap payload truncated");
  std::vector<std::uint8_t> occ(total);
  for (std::size_t i = 0; i < total; ++i)
    occ[i] = static_cast<std::uint8_t>((static_cast<unsigned char>(bytes[i / 8]) >> (i % 8)) & 1U);
  return Bitmap(std::move(sizes), spacing, std::move(origin), std::move(occ));
}

}  // namespace phf::numerical
