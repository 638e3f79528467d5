#include "phf/barcodes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "phf/error.hpp"

namespace phf {

Barcode::Barcode(int dim_, double birth_, double death_, std::uint64_t multiplicity_)
    : dim(dim_), birth(birth_), death(death_), multiplicity(multiplicity_) {
  if (dim < 0) throw ArgumentError("barcode: negative homology degree");
  if (!(birth >= 0.0) || std::isinf(birth))
    throw ArgumentError("barcode: birth must be finite and >= 0");
  if (std::isnan(death)) throw ArgumentError("barcode: death is NaN");
  if (!(birth < death))
    throw ArgumentError("barcode: birth must be strictly below death (zero-lifetime bar)");
  if (multiplicity < 1) throw ArgumentError("barcode: multiplicity must be >= 1");
}

std::vector<Barcode> canonicalize(std::vector<Barcode> bars) {
  std::sort(bars.begin(), bars.end(), [](const Barcode& a, const Barcode& b) {
    return std::tie(a.dim, a.birth, a.death) < std::tie(b.dim, b.birth, b.death);
  });
  std::vector<Barcode> merged;
  merged.reserve(bars.size());
  for (const auto& bar : bars) {
    if (!merged.empty() && merged.back().dim == bar.dim && merged.back().birth == bar.birth &&
        merged.back().death == bar.death) {
      merged.back().multiplicity += bar.multiplicity;
    } else {
      merged.push_back(bar);
    }
  }
  return merged;
}

PersistenceDiagram::PersistenceDiagram(int ambient_dim, double diameter, std::vector<Barcode> bars,
                                       double resolution_floor)
    : ambient_dim_(ambient_dim),
      diameter_(diameter),
      resolution_floor_(resolution_floor),
      bars_(canonicalize(std::move(bars))) {
  if (ambient_dim_ < 1 || ambient_dim_ > 3)
    throw ArgumentError("diagram: ambient dimension must be 1, 2 or 3");
  if (!(diameter_ > 0.0) || std::isinf(diameter_))
    throw ArgumentError("diagram: diameter must be finite and > 0");
  if (!(resolution_floor_ >= 0.0)) throw ArgumentError("diagram: resolution floor must be >= 0");
  for (const auto& bar : bars_) {
    if (bar.dim > ambient_dim_)
      throw ArgumentError("diagram: bar degree exceeds ambient dimension");
  }
}

std::span<const Barcode> PersistenceDiagram::bars(int dim) const {
  auto lo = std::lower_bound(bars_.begin(), bars_.end(), dim,
                             [](const Barcode& b, int d) { return b.dim < d; });
  auto hi = std::upper_bound(lo, bars_.end(), dim,
                             [](int d, const Barcode& b) { return d < b.dim; });
  return {lo, hi};
}

std::uint64_t PersistenceDiagram::size() const {
  std::uint64_t n = 0;
  for (const auto& b : bars_) n += b.multiplicity;
  return n;
}

std::uint64_t PersistenceDiagram::size(int dim) const {
  std::uint64_t n = 0;
  for (const auto& b : bars(dim)) n += b.multiplicity;
  return n;
}

std::uint64_t betti_at(const PersistenceDiagram& diagram, int i, double eps) {
  if (i < 0) throw ArgumentError("betti_at: negative degree");
  if (!(eps >= 0.0)) throw ArgumentError("betti_at: eps must be >= 0");
  std::uint64_t count = 0;
  for (const auto& bar : diagram.bars(i)) {
    if (bar.birth > eps) break;  // bars are sorted by birth within a degree
    if (eps < bar.death) count += bar.multiplicity;
  }
  return count;
}

std::uint64_t lifetime_count(const PersistenceDiagram& diagram, int i, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("lifetime_count: eps must be > 0");
  if (i < 0) throw ArgumentError("lifetime_count: negative degree");
  std::uint64_t count = 0;
  for (const auto& bar : diagram.bars(i)) {
    if (bar.lifetime() > eps) count += bar.multiplicity;
  }
  return count;
}

std::vector<std::pair<double, std::uint64_t>> betti_curve(const PersistenceDiagram& diagram,
                                                          int i,
                                                          std::span<const double> eps_grid) {
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    if (!(eps_grid[k] >= 0.0)) throw ArgumentError("betti_curve: grid values must be >= 0");
    if (k > 0 && !(eps_grid[k] > eps_grid[k - 1]))
      throw ArgumentError("betti_curve: grid must be strictly ascending");
  }
  std::vector<std::pair<double, std::uint64_t>> curve;
  curve.reserve(eps_grid.size());
  for (double eps : eps_grid) curve.emplace_back(eps, betti_at(diagram, i, eps));
  return curve;
}

PersistenceDiagram scale_diagram(const PersistenceDiagram& diagram, double factor) {
  if (!(factor > 0.0) || std::isinf(factor))
    throw ArgumentError("scale_diagram: factor must be finite and > 0");
  std::vector<Barcode> bars;
  bars.reserve(diagram.bars().size());
  for (const auto& b : diagram.bars()) {
    bars.emplace_back(b.dim, b.birth * factor, b.death * factor, b.multiplicity);
  }
  return PersistenceDiagram(diagram.ambient_dim(), diagram.diameter() * factor, std::move(bars),
                            diagram.resolution_floor() * factor);
}

bool approx_equal(const PersistenceDiagram& a, const PersistenceDiagram& b, double tol) {
  if (a.ambient_dim() != b.ambient_dim()) return false;
  if (std::abs(a.diameter() - b.diameter()) > tol) return false;
  if (std::abs(a.resolution_floor() - b.resolution_floor()) > tol) return false;
  auto xs = a.bars();
  auto ys = b.bars();
  if (xs.size() != ys.size()) return false;
  auto close = [tol](double x, double y) {
    if (std::isinf(x) || std::isinf(y)) return x == y;
    return std::abs(x - y) <= tol;
  };
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (xs[k].dim != ys[k].dim || xs[k].multiplicity != ys[k].multiplicity) return false;
    if (!close(xs[k].birth, ys[k].birth) || !close(xs[k].death, ys[k].death)) return false;
  }
  return true;
}

std::string format_length(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_barcode_csv(std::ostream& out, std::span<const Barcode> bars) {
  out << "dim,birth,death,multiplicity\n";
  for (const auto& b : bars) {
    out << b.dim << ',' << format_length(b.birth) << ',' << format_length(b.death) << ','
        << b.multiplicity << '\n';
  }
}

std::string to_barcode_csv(std::span<const Barcode> bars) {
  std::ostringstream out;
  write_barcode_csv(out, bars);
  return out.str();
}

namespace {

double parse_length(const std::string& field, std::size_t line_no) {
  if (field == "inf" || field == "+inf") return kInfinity;
  try {
    std::size_t used = 0;
    double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("barcode csv line " + std::to_string(line_no) + ": bad length '" +
                        field + "'");
  }
}

template <typename Int>
Int parse_int(const std::string& field, std::size_t line_no) {
  Int v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ArgumentError("barcode csv line " + std::to_string(line_no) + ": bad integer '" +
                        field + "'");
  return v;
}

}  // namespace

std::vector<Barcode> read_barcode_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("barcode csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "dim,birth,death,multiplicity")
    throw ArgumentError("barcode csv: unexpected header '" + line + "'");
  std::vector<Barcode> bars;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 4)
      throw ArgumentError("barcode csv line " + std::to_string(line_no) + ": expected 4 fields");
    bars.emplace_back(parse_int<int>(fields[0], line_no), parse_length(fields[1], line_no),
                      parse_length(fields[2], line_no),
                      parse_int<std::uint64_t>(fields[3], line_no));
  }
  return bars;
}

}  // namespace phf
