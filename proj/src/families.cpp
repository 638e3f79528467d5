#include "phf/families.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "phf/error.hpp"

namespace phf {

namespace {

constexpr double kThird = 1.0 / 3.0;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::vector<ContractionMap> grid_ifs(int dim, const std::vector<std::vector<int>>& cells) {
  std::vector<ContractionMap> maps;
  for (const auto& cell : cells) {
    ContractionMap m;
    m.ratio = kThird;
    for (int axis = 0; axis < dim; ++axis) m.translation.push_back(cell[axis] * kThird);
    maps.push_back(std::move(m));
  }
  return maps;
}

// Offsets {0,1,2}^dim filtered by a predicate on the digit tuple.
template <typename Keep>
std::vector<std::vector<int>> ternary_cells(int dim, Keep keep) {
  std::vector<std::vector<int>> out;
  int total = 1;
  for (int k = 0; k < dim; ++k) total *= 3;
  for (int code = 0; code < total; ++code) {
    std::vector<int> digits(dim);
    int c = code;
    for (int axis = 0; axis < dim; ++axis) {
      digits[axis] = c % 3;
      c /= 3;
    }
    if (keep(digits)) out.push_back(digits);
  }
  return out;
}

int count_ones(const std::vector<int>& digits) {
  return static_cast<int>(std::count(digits.begin(), digits.end(), 1));
}

constexpr double kMaxExactCount = 9007199254740992.0;  // 2^53

std::uint64_t integral_count(double value) {
  if (!(value <= kMaxExactCount)) throw RangeError("enumeration: bar count exceeds 2^53");
  double rounded = std::round(value);
  if (std::abs(value - rounded) > 1e-9 * std::max(1.0, value))
    throw ArgumentError("enumeration: non-integral bar count " + std::to_string(value));
  return static_cast<std::uint64_t>(rounded);
}

void check_ratio(double r, const char* what) {
  if (!(r > 0.0 && r < 1.0)) throw ArgumentError(std::string(what) + ": ratio must lie in (0,1)");
}

}  // namespace

std::span<const Family> FractalSpec::families(int degree) const {
  if (degree < 0 || degree >= static_cast<int>(degrees.size())) return {};
  return degrees[degree];
}

double FractalSpec::scale_ratio() const {
  if (!ifs.empty()) {
    double r = ifs.front().ratio;
    for (const auto& m : ifs) {
      if (std::abs(m.ratio - r) > 1e-15)
        throw UnsupportedStructureError("spec '" + name + "': IFS ratios are not uniform");
    }
    return r;
  }
  double r = 0.0;
  for (const auto& deg : degrees) {
    for (const auto& fam : deg) {
      double fr = std::visit(overloaded{[](const GeometricFamily& g) { return g.ratio; },
                                        [](const DustFamily& d) { return d.ratio; },
                                        [](const EssentialBar&) { return 0.0; }},
                             fam);
      if (fr == 0.0) continue;
      if (r != 0.0 && std::abs(fr - r) > 1e-15)
        throw UnsupportedStructureError("spec '" + name + "': family ratios are not uniform");
      r = fr;
    }
  }
  if (r == 0.0) throw UnsupportedStructureError("spec '" + name + "': no scale ratio available");
  return r;
}

void FractalSpec::validate() const {
  if (ambient_dim < 1 || ambient_dim > 3) throw ArgumentError("spec: ambient_dim must be 1..3");
  if (!(diameter > 0.0) || std::isinf(diameter)) throw ArgumentError("spec: diameter must be > 0");
  if (static_cast<int>(degrees.size()) != ambient_dim + 1)
    throw ArgumentError("spec: expected one family list per degree 0..ambient_dim");
  const double max_death = diameter * (1.0 + 1e-12);
  for (const auto& deg : degrees) {
    for (const auto& fam : deg) {
      std::visit(overloaded{
                     [&](const GeometricFamily& g) {
                       if (!(g.birth0 >= 0.0 && g.death0 > g.birth0))
                         throw ArgumentError("geometric family: need 0 <= birth0 < death0");
                       check_ratio(g.ratio, "geometric family");
                       if (!(g.count_ratio >= 1.0) || g.count0 < 1)
                         throw ArgumentError("geometric family: counts must be >= 1");
                       if (g.death0 > max_death)
                         throw ArgumentError("geometric family: death exceeds diameter");
                     },
                     [&](const DustFamily& d) {
                       if (!(d.birth0 > 0.0)) throw ArgumentError("dust family: birth0 must be > 0");
                       check_ratio(d.ratio, "dust family");
                       if (!(d.count_ratio >= 1.0) || d.count0 < 1)
                         throw ArgumentError("dust family: counts must be >= 1");
                       if (!(d.inner_growth > 1.0))
                         throw ArgumentError("dust family: inner_growth must be > 1");
                       if (!(d.inner_decay > 0.0 && d.inner_decay < 1.0))
                         throw ArgumentError("dust family: inner_decay must lie in (0,1)");
                       if (!(d.inner_growth * d.inner_decay < 1.0))
                         throw ArgumentError("dust family: inner_growth * inner_decay must be < 1");
                       if (d.birth0 * std::sqrt(1.0 + d.inner_decay) > max_death)
                         throw ArgumentError("dust family: death exceeds diameter");
                     },
                     [&](const EssentialBar& e) {
                       if (!(e.death > 0.0)) throw ArgumentError("essential bar: death must be > 0");
                       if (e.death > max_death)
                         throw ArgumentError("essential bar: death exceeds diameter");
                     }},
                 fam);
    }
  }
  for (const auto& m : ifs) {
    check_ratio(m.ratio, "IFS map");
    if (static_cast<int>(m.translation.size()) != ambient_dim)
      throw ArgumentError("IFS map: translation length must equal ambient_dim");
  }
}

FractalSpec builtin_spec(Builtin which) {
  FractalSpec s;
  const double sqrt2 = std::sqrt(2.0);
  const double sqrt3 = std::sqrt(3.0);
  const double r = kThird;
  const double ninth = 1.0 / 9.0;
  switch (which) {
    case Builtin::cantor:
      s.name = "cantor";
      s.ambient_dim = 1;
      s.diameter = 1.0;
      s.degrees = {{EssentialBar{1.0}, GeometricFamily{0.0, 1.0 / 6.0, r, 1, 2.0}}, {}};
      s.ifs = grid_ifs(1, ternary_cells(1, [](const auto& d) { return d[0] != 1; }));
      break;
    case Builtin::sierpinski_carpet:
      s.name = "sierpinski_carpet";
      s.ambient_dim = 2;
      s.diameter = sqrt2;
      s.degrees = {{EssentialBar{sqrt2}}, {GeometricFamily{0.0, 1.0 / 6.0, r, 1, 8.0}}, {}};
      s.ifs = grid_ifs(2, ternary_cells(2, [](const auto& d) { return count_ones(d) < 2; }));
      break;
    case Builtin::cantor_dust:
      s.name = "cantor_dust";
      s.ambient_dim = 2;
      s.diameter = sqrt2;
      s.degrees = {{EssentialBar{sqrt2}, GeometricFamily{0.0, 1.0 / 6.0, r, 3, 4.0}},
                   {GeometricFamily{1.0 / 6.0, sqrt2 / 6.0, r, 1, 4.0},
                    DustFamily{1.0 / 6.0, r, 4, 4.0, 2.0, ninth}},
                   {}};
      s.ifs = grid_ifs(2, ternary_cells(2, [](const auto& d) { return count_ones(d) == 0; }));
      break;
    case Builtin::menger:
      s.name = "menger";
      s.ambient_dim = 3;
      s.diameter = sqrt3;
      // A_j = 3 * 20^(j-1) + 2^(3j-2) = 3 * 20^(j-1) + 2 * 8^(j-1)
      s.degrees = {{EssentialBar{sqrt3}},
                   {GeometricFamily{0.0, 1.0 / 6.0, r, 3, 20.0},
                    GeometricFamily{0.0, 1.0 / 6.0, r, 2, 8.0}},
                   {GeometricFamily{1.0 / 6.0, sqrt2 / 6.0, r, 1, 20.0},
                    DustFamily{1.0 / 6.0, r, 6, 20.0, 2.0, ninth}},
                   {}};
      s.ifs = grid_ifs(3, ternary_cells(3, [](const auto& d) { return count_ones(d) < 2; }));
      break;
  }
  return s;
}

std::vector<std::string> builtin_names() {
  return {"cantor", "sierpinski_carpet", "cantor_dust", "menger"};
}

FractalSpec builtin_spec(std::string_view name) {
  if (name == "cantor") return builtin_spec(Builtin::cantor);
  if (name == "sierpinski_carpet") return builtin_spec(Builtin::sierpinski_carpet);
  if (name == "cantor_dust") return builtin_spec(Builtin::cantor_dust);
  if (name == "menger") return builtin_spec(Builtin::menger);
  throw ArgumentError("unknown fractal '" + std::string(name) +
                      "' (expected cantor, sierpinski_carpet, cantor_dust or menger)");
}

bool lifetime_exceeds(double lifetime, double delta) {
  return lifetime > delta * (1.0 + kLifetimeGuard);
}

double dust_lifetime(const DustFamily& fam, int i) {
  // birth0 * (sqrt(1 + v^i) - 1) without cancellation
  return fam.birth0 * std::expm1(0.5 * std::log1p(std::pow(fam.inner_decay, i)));
}

double leading_lifetime(const Family& fam) {
  return std::visit(overloaded{[](const GeometricFamily& g) { return g.death0 - g.birth0; },
                               [](const DustFamily& d) { return dust_lifetime(d, 1); },
                               [](const EssentialBar& e) { return e.death; }},
                    fam);
}

int levels_above(double lifetime0, double ratio, double delta) {
  if (!lifetime_exceeds(lifetime0, delta)) return 0;
  int levels = 1 + static_cast<int>(std::floor(std::log(lifetime0 / delta) / -std::log(ratio)));
  levels = std::max(levels, 1);
  while (lifetime_exceeds(lifetime0 * std::pow(ratio, levels), delta)) ++levels;
  while (levels > 0 && !lifetime_exceeds(lifetime0 * std::pow(ratio, levels - 1), delta)) --levels;
  return levels;
}

std::vector<Barcode> enumerate_family(const Family& fam, int dim, double delta) {
  if (!(delta > 0.0)) throw ArgumentError("enumerate_family: delta must be > 0");
  std::vector<Barcode> bars;
  std::visit(overloaded{
                 [&](const GeometricFamily& g) {
                   const int levels = levels_above(g.death0 - g.birth0, g.ratio, delta);
                   double count = static_cast<double>(g.count0);
                   for (int j = 1; j <= levels; ++j) {
                     const double scale = std::pow(g.ratio, j - 1);
                     bars.emplace_back(dim, g.birth0 * scale, g.death0 * scale,
                                       integral_count(count));
                     count *= g.count_ratio;
                   }
                 },
                 [&](const DustFamily& d) {
                   double inner_count = static_cast<double>(d.count0);
                   for (int i = 1;; ++i) {
                     const double li = dust_lifetime(d, i);
                     if (!lifetime_exceeds(li, delta)) break;
                     const double stretch = std::sqrt(1.0 + std::pow(d.inner_decay, i));
                     const int levels = levels_above(li, d.ratio, delta);
                     double count = inner_count;
                     for (int j = 1; j <= levels; ++j) {
                       const double birth = d.birth0 * std::pow(d.ratio, j - 1);
                       const double death = birth * stretch;
                       if (!(death > birth))
                         throw RangeError("enumerate_family: delta below double resolution");
                       bars.emplace_back(dim, birth, death, integral_count(count));
                       count *= d.count_ratio;
                     }
                     inner_count *= d.inner_growth;
                   }
                 },
                 [&](const EssentialBar& e) {
                   if (e.death > delta) bars.emplace_back(dim, 0.0, e.death, 1);
                 }},
             fam);
  return bars;
}

PersistenceDiagram enumerate_degree(const FractalSpec& spec, int degree, double delta) {
  std::vector<Barcode> bars;
  for (const auto& fam : spec.families(degree)) {
    auto part = enumerate_family(fam, degree, delta);
    bars.insert(bars.end(), part.begin(), part.end());
  }
  return PersistenceDiagram(spec.ambient_dim, spec.diameter, std::move(bars));
}

PersistenceDiagram enumerate_spec(const FractalSpec& spec, double delta) {
  std::vector<Barcode> bars;
  for (int degree = 0; degree < static_cast<int>(spec.degrees.size()); ++degree) {
    for (const auto& fam : spec.families(degree)) {
      auto part = enumerate_family(fam, degree, delta);
      bars.insert(bars.end(), part.begin(), part.end());
    }
  }
  return PersistenceDiagram(spec.ambient_dim, spec.diameter, std::move(bars));
}

double family_complexity(const Family& fam) {
  return std::visit(
      overloaded{[](const GeometricFamily& g) { return std::log(g.count_ratio) / -std::log(g.ratio); },
                 [](const DustFamily& d) {
                   return std::max(std::log(d.count_ratio) / -std::log(d.ratio),
                                   std::log(d.inner_growth) / -std::log(d.inner_decay));
                 },
                 [](const EssentialBar&) { return 0.0; }},
      fam);
}

double exact_complexity(const FractalSpec& spec, int degree) {
  double sigma = 0.0;
  for (const auto& fam : spec.families(degree)) sigma = std::max(sigma, family_complexity(fam));
  return sigma;
}

MengerCounts menger_h1_counts(int j) {
  if (j < 1) throw ArgumentError("menger_h1_counts: j must be >= 1");
  try {
    using boost::multiprecision::pow;
    WideInt b = 0;
    for (int k = 2; k <= j; ++k) b = 24 * pow(WideInt(20), k - 2) + 8 * b;
    const WideInt level = pow(WideInt(20), j - 1);
    const WideInt a = 5 * level - b;
    const WideInt two_pow = pow(WideInt(2), 3 * j - 2);
    const WideInt b_closed = 2 * level - two_pow;
    const WideInt a_closed = 3 * level + two_pow;
    if (a != a_closed || b != b_closed)
      throw InternalError("menger_h1_counts: recurrence disagrees with closed form at j = " +
                          std::to_string(j));
    return {a, b};
  } catch (const std::overflow_error&) {
    throw RangeError("menger_h1_counts: j = " + std::to_string(j) +
                     " overflows 512-bit arithmetic");
  } catch (const std::range_error&) {
    throw RangeError("menger_h1_counts: j = " + std::to_string(j) +
                     " overflows 512-bit arithmetic");
  }
}

FractalSpec scale_spec(const FractalSpec& spec, double factor) {
  if (!(factor > 0.0)) throw ArgumentError("scale_spec: factor must be > 0");
  FractalSpec out = spec;
  out.diameter *= factor;
  for (auto& deg : out.degrees) {
    for (auto& fam : deg) {
      std::visit(overloaded{[&](GeometricFamily& g) {
                              g.birth0 *= factor;
                              g.death0 *= factor;
                            },
                            [&](DustFamily& d) { d.birth0 *= factor; },
                            [&](EssentialBar& e) { e.death *= factor; }},
                 fam);
    }
  }
  for (auto& m : out.ifs) {
    for (auto& t : m.translation) t *= factor;
  }
  return out;
}

nlohmann::json to_json(const FractalSpec& spec) {
  using nlohmann::json;
  json families = json::array();
  for (int degree = 0; degree < static_cast<int>(spec.degrees.size()); ++degree) {
    for (const auto& fam : spec.degrees[degree]) {
      json f = std::visit(
          overloaded{[](const GeometricFamily& g) {
                       return json{{"kind", "geometric"}, {"birth0", g.birth0},
                                   {"death0", g.death0},  {"ratio", g.ratio},
                                   {"count0", g.count0},  {"count_ratio", g.count_ratio}};
                     },
                     [](const DustFamily& d) {
                       return json{{"kind", "dust"},
                                   {"birth0", d.birth0},
                                   {"ratio", d.ratio},
                                   {"count0", d.count0},
                                   {"count_ratio", d.count_ratio},
                                   {"inner_growth", d.inner_growth},
                                   {"inner_decay", d.inner_decay}};
                     },
                     [](const EssentialBar& e) {
                       return json{{"kind", "essential"}, {"death", e.death}};
                     }},
          fam);
      f["degree"] = degree;
      families.push_back(std::move(f));
    }
  }
  json ifs = json::array();
  for (const auto& m : spec.ifs) ifs.push_back({{"ratio", m.ratio}, {"translation", m.translation}});
  return json{{"name", spec.name},           {"ambient_dim", spec.ambient_dim},
              {"diameter", spec.diameter},   {"families", families},
              {"ifs", ifs}};
}

FractalSpec spec_from_json(const nlohmann::json& doc) {
  try {
    FractalSpec spec;
    spec.name = doc.at("name").get<std::string>();
    spec.ambient_dim = doc.at("ambient_dim").get<int>();
    spec.diameter = doc.at("diameter").get<double>();
    if (spec.ambient_dim < 1 || spec.ambient_dim > 3)
      throw ArgumentError("spec: ambient_dim must be 1..3");
    spec.degrees.assign(spec.ambient_dim + 1, {});
    for (const auto& f : doc.at("families")) {
      const int degree = f.at("degree").get<int>();
      if (degree < 0 || degree > spec.ambient_dim)
        throw ArgumentError("spec: family degree out of range");
      const auto kind = f.at("kind").get<std::string>();
      if (kind == "geometric") {
        spec.degrees[degree].push_back(GeometricFamily{
            f.at("birth0").get<double>(), f.at("death0").get<double>(), f.at("ratio").get<double>(),
            f.at("count0").get<std::uint64_t>(), f.at("count_ratio").get<double>()});
      } else if (kind == "dust") {
        spec.degrees[degree].push_back(DustFamily{
            f.at("birth0").get<double>(), f.at("ratio").get<double>(),
            f.at("count0").get<std::uint64_t>(), f.at("count_ratio").get<double>(),
            f.at("inner_growth").get<double>(), f.at("inner_decay").get<double>()});
      } else if (kind == "essential") {
        spec.degrees[degree].push_back(EssentialBar{f.at("death").get<double>()});
      } else {
        throw ArgumentError("spec: unknown family kind '" + kind + "'");
      }
    }
    if (doc.contains("ifs")) {
      for (const auto& m : doc.at("ifs")) {
        spec.ifs.push_back(ContractionMap{m.at("ratio").get<double>(),
                                          m.at("translation").get<std::vector<double>>()});
      }
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("spec json: ") + e.what());
  }
}

FractalSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open spec file '" + path + "'");
  try {
    return spec_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError("spec file '" + path + "': " + e.what());
  }
}

}  // namespace phf
