#include "phf/numerical/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "phf/error.hpp"

namespace phf::numerical {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

std::uint32_t find_root(std::vector<std::uint32_t>& parent, std::uint32_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

// Symmetric difference of two ascending rank lists.
void add_column(std::vector<std::uint32_t>& col, const std::vector<std::uint32_t>& other,
                std::vector<std::uint32_t>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                std::back_inserter(scratch));
  col.swap(scratch);
}

class Reducer {
public:
  explicit Reducer(const FilteredCubicalComplex& cx) : cx_(cx) {
    const auto n = cx.cell_count();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    const auto vals = cx.values();
    std::sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (vals[a] != vals[b]) return vals[a] < vals[b];
      const int da = cx.cell_dim(a);
      const int db = cx.cell_dim(b);
      if (da != db) return da < db;
      return a < b;
    });
    rank_.resize(n);
    for (std::uint32_t r = 0; r < n; ++r) rank_[order_[r]] = r;
    pivot_owner_.assign(n, kNone);
    positive_.assign(n, 0);
    paired_.assign(n, 0);
    for (std::uint32_t c = 0; c < n; ++c)
      if (cx.cell_dim(c) == 0) positive_[c] = 1;  // vertex columns are zero
  }

  void union_find_h0() {
    const auto n = cx_.cell_count();
    std::vector<std::uint32_t> parent(n, kNone);
    std::vector<std::size_t> faces;
    for (std::uint32_t r = 0; r < n; ++r) {
      const std::uint32_t c = order_[r];
      const int d = cx_.cell_dim(c);
      if (d == 0) {
        parent[c] = c;
        positive_[c] = 1;
        continue;
      }
      if (d != 1) continue;
      cx_.boundary(c, faces);
      std::uint32_t a = find_root(parent, static_cast<std::uint32_t>(faces[0]));
      std::uint32_t b = find_root(parent, static_cast<std::uint32_t>(faces[1]));
      if (a == b) {
        positive_[c] = 1;
        continue;
      }
      // Elder rule: the root entered later dies.
      if (rank_[a] > rank_[b]) std::swap(a, b);
      parent[b] = a;
      paired_[b] = 1;
      emit(0, b, c);
    }
  }

  // Reduces the columns of all (p+1)-cells, recording degree-p pairs.
  void reduce(int p) {
    const auto n = cx_.cell_count();
    std::vector<std::size_t> faces;
    std::vector<std::uint32_t> col;
    std::vector<std::uint32_t> scratch;
    for (std::uint32_t r = 0; r < n; ++r) {
      const std::uint32_t c = order_[r];
      if (cx_.cell_dim(c) != p + 1) continue;
      if (paired_[c] && positive_[c]) continue;  // cleared
      cx_.boundary(c, faces);
      col.clear();
      for (auto f : faces) col.push_back(rank_[f]);
      std::sort(col.begin(), col.end());
      while (!col.empty()) {
        const std::uint32_t owner = pivot_owner_[col.back()];
        if (owner == kNone) break;
        add_column(col, store_[owner], scratch);
      }
      if (col.empty()) {
        positive_[c] = 1;
        continue;
      }
      const std::uint32_t low = col.back();
      pivot_owner_[low] = static_cast<std::uint32_t>(store_.size());
      store_.push_back(col);
      const std::uint32_t birth_cell = order_[low];
      positive_[birth_cell] = 1;
      paired_[birth_cell] = 1;
      paired_[c] = 1;
      emit(p, birth_cell, c);
    }
  }

  void essentials(int top) {
    for (std::uint32_t c = 0; c < cx_.cell_count(); ++c) {
      const int d = cx_.cell_dim(c);
      if (d <= top && positive_[c] && !paired_[c]) bars_.emplace_back(d, cx_.value(c), kInfinity);
    }
  }

  std::vector<Barcode> take_bars() { return std::move(bars_); }

private:
  void emit(int p, std::uint32_t birth_cell, std::uint32_t death_cell) {
    const double b = cx_.value(birth_cell);
    const double d = cx_.value(death_cell);
    if (b < d) bars_.emplace_back(p, b, d);
  }

  const FilteredCubicalComplex& cx_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> rank_;
  std::vector<std::uint32_t> pivot_owner_;  // by rank of pivot
  std::vector<std::vector<std::uint32_t>> store_;
  std::vector<std::uint8_t> positive_;
  std::vector<std::uint8_t> paired_;
  std::vector<Barcode> bars_;
};

double max_norm(const Barcode& a, const Barcode& b) {
  const double db = std::abs(a.birth - b.birth);
  double dd;
  if (a.essential() && b.essential()) dd = 0.0;
  else if (a.essential() || b.essential()) dd = kInfinity;
  else dd = std::abs(a.death - b.death);
  return std::max(db, dd);
}

}  // namespace

PersistenceDiagram persistence(const FilteredCubicalComplex& complex, PersistenceOptions opts) {
  if (!complex.is_monotone())
    throw ContractViolation("filtration is not monotone: some cell precedes one of its faces");
  const int d = complex.dim();
  Reducer red(complex);
  if (!opts.h0_by_reduction) red.union_find_h0();
  const int lowest = opts.h0_by_reduction ? 0 : 1;
  for (int p = d - 1; p >= lowest; --p) red.reduce(p);
  red.essentials(d);
  double diag = 0.0;
  for (int l : complex.vertex_shape()) diag += double(l - 1) * (l - 1);
  return PersistenceDiagram(d, std::sqrt(diag), red.take_bars());
}

PersistenceDiagram calibrate(const PersistenceDiagram& diagram, double spacing, double diameter,
                             double floor_factor) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ArgumentError("spacing h must be > 0");
  if (!(diameter > 0.0) || !std::isfinite(diameter)) throw ArgumentError("diameter must be > 0");
  if (!(floor_factor >= 0.0) || !std::isfinite(floor_factor))
    throw ArgumentError("floor factor must be >= 0");
  std::vector<Barcode> out;
  for (const auto& bar : diagram.bars()) {
    const double b = bar.birth * spacing;
    if (bar.essential()) {
      if (b < diameter) out.emplace_back(bar.dim, b, diameter, bar.multiplicity);
      continue;
    }
    if (bar.lifetime() < floor_factor) continue;
    out.emplace_back(bar.dim, b, bar.death * spacing, bar.multiplicity);
  }
  return PersistenceDiagram(diagram.ambient_dim(), diameter, std::move(out), floor_factor * spacing);
}

MatchStats match_report(const PersistenceDiagram& numeric, std::span<const Barcode> symbolic,
                        double tol) {
  if (!(tol >= 0.0)) throw ArgumentError("match tolerance must be >= 0");
  const auto sym = canonicalize(std::vector<Barcode>(symbolic.begin(), symbolic.end()));
  const auto num = numeric.bars();
  MatchStats st;
  for (const auto& b : sym) st.symbolic_total += b.multiplicity;
  for (const auto& b : num) st.numeric_total += b.multiplicity;

  std::vector<std::uint64_t> rem_s;
  std::vector<std::uint64_t> rem_n;
  for (const auto& b : sym) rem_s.push_back(b.multiplicity);
  for (const auto& b : num) rem_n.push_back(b.multiplicity);
  std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
  for (std::size_t i = 0; i < sym.size(); ++i)
    for (std::size_t j = 0; j < num.size(); ++j) {
      if (sym[i].dim != num[j].dim) continue;
      const double dist = max_norm(sym[i], num[j]);
      if (dist <= tol) cand.emplace_back(dist, i, j);
    }
  std::sort(cand.begin(), cand.end());
  for (const auto& [dist, i, j] : cand) {
    const std::uint64_t m = std::min(rem_s[i], rem_n[j]);
    if (m == 0) continue;
    rem_s[i] -= m;
    rem_n[j] -= m;
    st.matched += m;
    st.max_displacement = std::max(st.max_displacement, dist);
  }
  for (std::size_t i = 0; i < sym.size(); ++i)
    if (rem_s[i] > 0) {
      st.unmatched_symbolic += rem_s[i];
      Barcode miss = sym[i];
      miss.multiplicity = rem_s[i];
      st.missing.push_back(miss);
    }
  for (auto r : rem_n) st.unmatched_numeric += r;
  return st;
}

}  // namespace phf::numerical
