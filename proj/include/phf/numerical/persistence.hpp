#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "phf/barcodes.hpp"
#include "phf/numerical/cubical.hpp"

namespace phf::numerical {

struct PersistenceOptions {
  /// Compute degree 0 by reducing the edge columns instead of union-find.
  bool h0_by_reduction = false;
};

/// Interval decomposition over Z/2 of the sublevel filtration, in grid units.
/// Degree 0 by union-find with the elder rule; higher degrees by column
/// reduction, top degree first, with clearing. Exactly one degree-0 bar is
/// infinite. Throws ContractViolation on a non-monotone filtration.
PersistenceDiagram persistence(const FilteredCubicalComplex& complex,
                               PersistenceOptions opts = {});

/// Converts a grid-unit diagram to physical units: scales by `spacing`,
/// drops bars with lifetime < floor_factor * spacing, caps the essential bar
/// at `diameter`, records floor_factor * spacing as the resolution floor.
PersistenceDiagram calibrate(const PersistenceDiagram& diagram, double spacing, double diameter,
                             double floor_factor = 2.0);

struct MatchStats {
  std::uint64_t symbolic_total = 0;
  std::uint64_t numeric_total = 0;
  std::uint64_t matched = 0;
  std::uint64_t unmatched_symbolic = 0;
  std::uint64_t unmatched_numeric = 0;
  double max_displacement = 0.0;
  std::vector<Barcode> missing;  // symbolic bars left unmatched
};

/// Greedy nearest matching per degree in the max-norm on (birth, death):
/// closest pairs first, only pairs within `tol`.
MatchStats match_report(const PersistenceDiagram& numeric, std::span<const Barcode> symbolic,
                        double tol);

}  // namespace phf::numerical
