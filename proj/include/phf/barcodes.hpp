#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace phf {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A persistence interval [birth, death) of homology degree `dim`, repeated
/// `multiplicity` times. `death` may be +inf for raw essential classes.
struct Barcode {
  int dim = 0;
  double birth = 0.0;
  double death = 0.0;
  std::uint64_t multiplicity = 1;

  Barcode() = default;
  /// Throws ArgumentError unless 0 <= birth < death and multiplicity >= 1.
  Barcode(int dim, double birth, double death, std::uint64_t multiplicity = 1);

  double lifetime() const { return death - birth; }
  bool essential() const { return death == kInfinity; }
  bool alive_at(double eps) const { return birth <= eps && eps < death; }

  friend bool operator==(const Barcode&, const Barcode&) = default;
};

/// Immutable finite persistence diagram. Bars are kept in canonical order,
/// sorted by (dim, birth, death) with equal keys merged into one multiplicity.
class PersistenceDiagram {
public:
  PersistenceDiagram(int ambient_dim, double diameter, std::vector<Barcode> bars,
                     double resolution_floor = 0.0);

  int ambient_dim() const { return ambient_dim_; }
  double diameter() const { return diameter_; }
  double resolution_floor() const { return resolution_floor_; }
  std::span<const Barcode> bars() const { return bars_; }
  /// Contiguous range of bars in degree `dim` (empty when absent).
  std::span<const Barcode> bars(int dim) const;
  /// Total number of bars counted with multiplicity.
  std::uint64_t size() const;
  std::uint64_t size(int dim) const;

  friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;

private:
  int ambient_dim_;
  double diameter_;
  double resolution_floor_;
  std::vector<Barcode> bars_;
};

/// Sorts by (dim, birth, death) and merges identical keys.
std::vector<Barcode> canonicalize(std::vector<Barcode> bars);

/// Number of degree-i bars alive at eps under the half-open convention.
std::uint64_t betti_at(const PersistenceDiagram& diagram, int i, double eps);

/// I_{i,eps}: number of degree-i bars with lifetime strictly above eps.
std::uint64_t lifetime_count(const PersistenceDiagram& diagram, int i, double eps);

/// Betti numbers sampled on a strictly ascending grid of eps >= 0.
std::vector<std::pair<double, std::uint64_t>> betti_curve(const PersistenceDiagram& diagram,
                                                          int i,
                                                          std::span<const double> eps_grid);

/// Multiplies every length (births, deaths, diameter, floor) by `factor`.
PersistenceDiagram scale_diagram(const PersistenceDiagram& diagram, double factor);

/// Approximate equality: same metadata, same bar keys within `tol`.
bool approx_equal(const PersistenceDiagram& a, const PersistenceDiagram& b, double tol = 1e-12);

// CSV: header `dim,birth,death,multiplicity`, lengths with 17 significant
// digits, `inf` for an uncapped essential death, LF line endings.
void write_barcode_csv(std::ostream& out, std::span<const Barcode> bars);
std::string to_barcode_csv(std::span<const Barcode> bars);
std::vector<Barcode> read_barcode_csv(std::istream& in);

/// Formats a length with 17 significant digits (`inf` for infinity).
std::string format_length(double value);

}  // namespace phf
