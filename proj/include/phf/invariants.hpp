#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "phf/barcodes.hpp"
#include "phf/error.hpp"
#include "phf/families.hpp"

namespace phf {

/// One step of the a_j sequence: S evaluated at delta = a_{j+1}.
struct SDeltaPoint {
  int j = 0;
  double delta = 0.0;
  double s_value = 0.0;
  /// S_{a_{j+1}} / |log a_j| (NaN when a_j >= 1).
  double ratio = 0.0;
  /// (S_{a_{j+1}} - S_{a_j}) / log(1/r).
  double increment_beta = 0.0;
};

struct SDeltaTrace {
  int degree = 0;
  double sigma = 0.0;
  std::vector<SDeltaPoint> points;
};

/// Non-convergence of the a_j sequence; carries the trace for diagnostics.
class SequenceConvergenceError : public ConvergenceError {
public:
  SequenceConvergenceError(const std::string& what, SDeltaTrace trace)
      : ConvergenceError(what), trace_(std::move(trace)) {}
  const SDeltaTrace& trace() const { return trace_; }

private:
  SDeltaTrace trace_;
};

/// (1/sigma) * sum over bars with lifetime > delta of
/// (death/diameter)^sigma - (birth/diameter)^sigma, from symbolic families.
/// Returns exactly 0 when sigma == 0.
double s_delta(std::span<const Family> families, double sigma, double delta, double diameter);
/// Same sum over the degree-i bars of a finite diagram.
double s_delta(const PersistenceDiagram& diagram, int i, double sigma, double delta,
               double diameter);
/// Convenience: sigma_i and diameter taken from the spec.
double s_delta(const FractalSpec& spec, int i, double delta);

struct SequenceResult {
  double beta = 0.0;
  double raw_ratio = 0.0;  // S/|log a_j| at the last step
  int steps = 0;
  SDeltaTrace trace;
};

struct SequenceOptions {
  int j_max = 60;
  double tol = 1e-9;
};

/// beta_i from the sequence a_j = L r^(j-1) (L the largest non-essential
/// lifetime, r the spec's ratio). Converges on the per-step increment of S.
SequenceResult avg_betti_sequence(const FractalSpec& spec, int i, SequenceOptions opts = {});

/// beta_i = (per-step increment of S) / log(1/r) for families sharing one ratio.
double avg_betti_closed(const FractalSpec& spec, int i);

/// Inner-series contribution I_1 of a dust family at outer step j = 1.
double dust_step_contribution(const DustFamily& fam, double sigma, double diameter);

struct LwEstimate {
  double sigma = 0.0;
  double delta_min = 0.0;
  double chi_estimate = 0.0;
  /// A_{i,delta} per degree 0..ambient_dim (0 for degrees with sigma_i = 0).
  std::vector<double> integrals;
};

/// Finite-delta Llorente-Winter average fractal Euler number. Requires every
/// non-essential bar to be born at 0; throws InapplicableError otherwise.
LwEstimate lw_average_euler(const FractalSpec& spec, double delta_min);

/// Magnitude form: sum of exp(-h(death)) - exp(-h(birth)) with
/// h(eps) = sigma log(diameter/eps) + log sigma and exp(-h(0)) = 0.
double magnitude_sum(std::span<const Barcode> bars, double sigma, double diameter);

struct ComplexityFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int samples = 0;
  int distinct_counts = 0;
  bool low_confidence = false;
};

/// Least-squares slope of log I_{i,eps} against log(1/eps), eps sampled
/// log-uniformly in [eps_lo, eps_hi].
ComplexityFit estimate_complexity(const PersistenceDiagram& diagram, int i, double eps_lo,
                                  double eps_hi, int samples = 64);

struct DegreeReport {
  int degree = 0;
  double sigma = 0.0;
  std::optional<double> beta_closed;
  std::optional<double> beta_sequence;
  bool converged = true;
  std::string note;
  SDeltaTrace trace;
};

struct InvariantReport {
  std::string fractal;
  double diameter = 0.0;
  int ambient_dim = 0;
  std::string provenance = "symbolic";
  std::vector<DegreeReport> degrees;
  double euler_phf = 0.0;
  std::optional<LwEstimate> lw_comparison;
  SequenceOptions sequence_options;
  bool converged = true;

  /// beta used in the alternating sum (closed form when available).
  double beta(int degree) const;
};

struct EulerOptions {
  SequenceOptions sequence;
  double lw_delta = 1e-6;
};

/// Per-degree sigma and beta (closed form and sequence) plus chi_a^phf.
/// Never throws on non-convergence; check InvariantReport::converged.
InvariantReport euler(const FractalSpec& spec, EulerOptions opts = {});

nlohmann::json to_json(const InvariantReport& report, bool include_trace = true);
nlohmann::json to_json(const LwEstimate& lw);

}  // namespace phf
