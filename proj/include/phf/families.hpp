#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"
#include "phf/barcodes.hpp"

namespace phf {

/// Bars j = 1, 2, ...: count0 * count_ratio^(j-1) copies of
/// (birth0 * ratio^(j-1), death0 * ratio^(j-1)).
struct GeometricFamily {
  double birth0 = 0.0;
  double death0 = 0.0;
  double ratio = 0.0;
  std::uint64_t count0 = 1;
  double count_ratio = 1.0;

  friend bool operator==(const GeometricFamily&, const GeometricFamily&) = default;
};

/// Double-indexed "little barcode dust": for i, j = 1, 2, ... there are
/// count0 * count_ratio^(j-1) * inner_growth^(i-1) copies of
/// (birth0 * ratio^(j-1), birth0 * sqrt(1 + inner_decay^i) * ratio^(j-1)).
struct DustFamily {
  double birth0 = 0.0;
  double ratio = 0.0;
  std::uint64_t count0 = 1;
  double count_ratio = 1.0;
  double inner_growth = 1.0;
  double inner_decay = 0.0;

  friend bool operator==(const DustFamily&, const DustFamily&) = default;
};

/// The single essential degree-0 class, born at 0 and capped at the diameter.
struct EssentialBar {
  double death = 0.0;

  friend bool operator==(const EssentialBar&, const EssentialBar&) = default;
};

using Family = std::variant<GeometricFamily, DustFamily, EssentialBar>;

/// x -> ratio * x + translation.
struct ContractionMap {
  double ratio = 0.0;
  std::vector<double> translation;

  friend bool operator==(const ContractionMap&, const ContractionMap&) = default;
};

struct FractalSpec {
  std::string name;
  int ambient_dim = 1;
  double diameter = 1.0;
  /// degrees[i] holds the symbolic families of PH_i; size ambient_dim + 1.
  std::vector<std::vector<Family>> degrees;
  std::vector<ContractionMap> ifs;

  std::span<const Family> families(int degree) const;
  /// Common contraction ratio of the IFS (or of the families if no IFS).
  double scale_ratio() const;
  /// Throws ArgumentError on any violated invariant.
  void validate() const;

  friend bool operator==(const FractalSpec&, const FractalSpec&) = default;
};

enum class Builtin { cantor, sierpinski_carpet, cantor_dust, menger };

FractalSpec builtin_spec(Builtin which);
/// Accepts "cantor", "sierpinski_carpet", "cantor_dust", "menger".
FractalSpec builtin_spec(std::string_view name);
std::vector<std::string> builtin_names();

// Symbolic lifetimes are compared against a threshold with a relative guard:
// a lifetime within kLifetimeGuard of delta counts as equal, not greater.
inline constexpr double kLifetimeGuard = 1e-12;
bool lifetime_exceeds(double lifetime, double delta);

/// Lifetime of the j = 1 (and i = 1 for dust) member of a family.
double leading_lifetime(const Family& fam);
/// Lifetime of dust member (i, j = 1), computed without cancellation.
double dust_lifetime(const DustFamily& fam, int i);
/// Number of outer steps j with lifetime0 * ratio^(j-1) > delta.
int levels_above(double lifetime0, double ratio, double delta);

/// Materializes every bar of `fam` with lifetime > delta, tagged with `dim`.
std::vector<Barcode> enumerate_family(const Family& fam, int dim, double delta);
/// All degrees of the spec, merged into one canonical diagram.
PersistenceDiagram enumerate_spec(const FractalSpec& spec, double delta);
/// One degree only.
PersistenceDiagram enumerate_degree(const FractalSpec& spec, int degree, double delta);

/// PH-complexity of a single family (0 for the essential bar).
double family_complexity(const Family& fam);
/// sigma_i = max over the degree's families.
double exact_complexity(const FractalSpec& spec, int degree);

using WideInt = boost::multiprecision::checked_int512_t;

struct MengerCounts {
  WideInt a;  // surviving H1 bars at step j
  WideInt b;  // bars removed as mutually homologous
};

/// A_j and B_j of the Menger sponge; recurrence cross-checked against the
/// closed forms. Throws RangeError when 512-bit integers overflow.
MengerCounts menger_h1_counts(int j);

/// Multiplies every length of the spec (bars, diameter, translations) by factor.
FractalSpec scale_spec(const FractalSpec& spec, double factor);

nlohmann::json to_json(const FractalSpec& spec);
FractalSpec spec_from_json(const nlohmann::json& doc);
FractalSpec load_spec_file(const std::string& path);

}  // namespace phf
