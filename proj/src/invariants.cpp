#include "phf/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace phf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// m * r^sigma within this of 1 marks a family as critical (constant per-step increment).
constexpr double kCriticalTol = 1e-9;
constexpr double kSeriesTol = 1e-15;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_s_args(double sigma, double delta, double diameter) {
  if (!(delta > 0.0)) throw ArgumentError("s_delta: delta must be > 0");
  if (!(diameter > 0.0)) throw ArgumentError("s_delta: diameter must be > 0");
  if (!(sigma >= 0.0)) throw ArgumentError("s_delta: sigma must be >= 0");
}

// 1 + q + ... + q^(n-1)
double geometric_partial(double q, int n) {
  if (n <= 0) return 0.0;
  if (q == 1.0) return n;
  return std::expm1(n * std::log(q)) / (q - 1.0);
}

// (1 + v^i)^(sigma/2) - 1
double dust_weight(const DustFamily& d, double sigma, int i) {
  return std::expm1(0.5 * sigma * std::log1p(std::pow(d.inner_decay, i)));
}

double family_ratio(const Family& fam) {
  return std::visit(overloaded{[](const GeometricFamily& g) { return g.ratio; },
                               [](const DustFamily& d) { return d.ratio; },
                               [](const EssentialBar&) { return 0.0; }},
                    fam);
}

bool is_critical(double count_ratio, double ratio, double sigma) {
  return std::abs(count_ratio * std::pow(ratio, sigma) - 1.0) < kCriticalTol;
}

}  // namespace

double s_delta(std::span<const Family> families, double sigma, double delta, double diameter) {
  check_s_args(sigma, delta, diameter);
  if (sigma == 0.0) return 0.0;
  double total = 0.0;
  for (const auto& fam : families) {
    total += std::visit(
        overloaded{
            [&](const GeometricFamily& g) {
              const int levels = levels_above(g.death0 - g.birth0, g.ratio, delta);
              const double step = std::pow(g.death0 / diameter, sigma) -
                                  std::pow(g.birth0 / diameter, sigma);
              const double q = g.count_ratio * std::pow(g.ratio, sigma);
              return static_cast<double>(g.count0) * step * geometric_partial(q, levels);
            },
            [&](const DustFamily& d) {
              const double q = d.count_ratio * std::pow(d.ratio, sigma);
              double sum = 0.0;
              double inner_count = static_cast<double>(d.count0);
              for (int i = 1; lifetime_exceeds(dust_lifetime(d, i), delta); ++i) {
                const int levels = levels_above(dust_lifetime(d, i), d.ratio, delta);
                sum += inner_count * dust_weight(d, sigma, i) * geometric_partial(q, levels);
                inner_count *= d.inner_growth;
              }
              return std::pow(d.birth0 / diameter, sigma) * sum;
            },
            [&](const EssentialBar& e) {
              return lifetime_exceeds(e.death, delta) ? std::pow(e.death / diameter, sigma) : 0.0;
            }},
        fam);
  }
  return total / sigma;
}

double s_delta(const PersistenceDiagram& diagram, int i, double sigma, double delta,
               double diameter) {
  check_s_args(sigma, delta, diameter);
  if (sigma == 0.0) return 0.0;
  double total = 0.0;
  for (const auto& bar : diagram.bars(i)) {
    if (!(bar.lifetime() > delta)) continue;
    if (bar.essential()) throw ArgumentError("s_delta: uncapped essential bar in diagram");
    total += static_cast<double>(bar.multiplicity) *
             (std::pow(bar.death / diameter, sigma) - std::pow(bar.birth / diameter, sigma));
  }
  return total / sigma;
}

double s_delta(const FractalSpec& spec, int i, double delta) {
  return s_delta(spec.families(i), exact_complexity(spec, i), delta, spec.diameter);
}

SequenceResult avg_betti_sequence(const FractalSpec& spec, int i, SequenceOptions opts) {
  if (opts.j_max < 3) throw ArgumentError("avg_betti_sequence: j_max must be >= 3");
  if (!(opts.tol > 0.0)) throw ArgumentError("avg_betti_sequence: tol must be > 0");
  const double sigma = exact_complexity(spec, i);
  SequenceResult result;
  result.trace.degree = i;
  result.trace.sigma = sigma;
  if (sigma == 0.0) return result;

  const double r = spec.scale_ratio();
  const double log_step = -std::log(r);
  double largest = 0.0;
  // Dust families add a new inner level only every ~log(1/v)/log(1/r) steps,
  // so the increment can stall between entries; the window must span that.
  int window = 3;
  for (const auto& fam : spec.families(i)) {
    if (std::holds_alternative<EssentialBar>(fam)) continue;
    largest = std::max(largest, leading_lifetime(fam));
    if (const auto* d = std::get_if<DustFamily>(&fam)) {
      const int period = static_cast<int>(std::ceil(std::log(d->inner_decay) / std::log(r) - 1e-9));
      window = std::max(window, 2 * period + 1);
    }
  }
  if (largest == 0.0)
    throw UnsupportedStructureError("avg_betti_sequence: degree has no non-essential family");

  const auto families = spec.families(i);
  double prev_s = s_delta(families, sigma, largest, spec.diameter);  // S_{a_1}
  std::vector<double> increments;
  for (int j = 1; j <= opts.j_max; ++j) {
    const double a_j = largest * std::pow(r, j - 1);
    const double a_next = a_j * r;
    const double s = s_delta(families, sigma, a_next, spec.diameter);
    SDeltaPoint pt;
    pt.j = j;
    pt.delta = a_next;
    pt.s_value = s;
    pt.ratio = a_j < 1.0 ? s / std::abs(std::log(a_j)) : kNaN;
    pt.increment_beta = (s - prev_s) / log_step;
    result.trace.points.push_back(pt);
    prev_s = s;
    result.steps = j;
    result.raw_ratio = pt.ratio;
    increments.push_back(pt.increment_beta);
    result.beta = pt.increment_beta;
    if (static_cast<int>(increments.size()) >= window) {
      auto first = increments.end() - window;
      auto [lo, hi] = std::minmax_element(first, increments.end());
      if (*hi - *lo < opts.tol) return result;
    }
  }
  throw SequenceConvergenceError("avg_betti_sequence: degree " + std::to_string(i) + " of '" +
                                     spec.name + "' did not converge within j_max = " +
                                     std::to_string(opts.j_max),
                                 std::move(result.trace));
}

double dust_step_contribution(const DustFamily& d, double sigma, double diameter) {
  if (!(sigma > 0.0)) throw ArgumentError("dust_step_contribution: sigma must be > 0");
  // term_i <= (count0/g) * max(a, 2^a - 1) * (g v)^i with a = sigma/2
  const double a = 0.5 * sigma;
  const double rho = d.inner_growth * d.inner_decay;
  const double bound_coeff =
      static_cast<double>(d.count0) / d.inner_growth * std::max(a, std::exp2(a) - 1.0);
  double sum = 0.0;
  double inner_count = static_cast<double>(d.count0);
  for (int i = 1; i < 100000; ++i) {
    sum += inner_count * dust_weight(d, sigma, i);
    inner_count *= d.inner_growth;
    const double tail = bound_coeff * std::pow(rho, i + 1) / (1.0 - rho);
    if (tail < kSeriesTol * sum) break;
  }
  return std::pow(d.birth0 / diameter, sigma) * sum / sigma;
}

double avg_betti_closed(const FractalSpec& spec, int i) {
  const double sigma = exact_complexity(spec, i);
  if (sigma == 0.0) return 0.0;
  double r = 0.0;
  for (const auto& fam : spec.families(i)) {
    const double fr = family_ratio(fam);
    if (fr == 0.0) continue;
    if (r != 0.0 && std::abs(fr - r) > 1e-15)
      throw UnsupportedStructureError("avg_betti_closed: families of degree " + std::to_string(i) +
                                      " have mixed ratios");
    r = fr;
  }
  double increment = 0.0;
  for (const auto& fam : spec.families(i)) {
    if (const auto* g = std::get_if<GeometricFamily>(&fam)) {
      if (!is_critical(g->count_ratio, g->ratio, sigma)) continue;
      increment += static_cast<double>(g->count0) *
                   (std::pow(g->death0 / spec.diameter, sigma) -
                    std::pow(g->birth0 / spec.diameter, sigma)) /
                   sigma;
    } else if (const auto* d = std::get_if<DustFamily>(&fam)) {
      const double inner = std::log(d->inner_growth) / -std::log(d->inner_decay);
      if (inner > sigma - 1e-12 && !is_critical(d->count_ratio, d->ratio, sigma))
        throw UnsupportedStructureError(
            "avg_betti_closed: dust family dominated by its inner index");
      if (!is_critical(d->count_ratio, d->ratio, sigma)) continue;
      increment += dust_step_contribution(*d, sigma, spec.diameter);
    }
  }
  return increment / -std::log(r);
}

LwEstimate lw_average_euler(const FractalSpec& spec, double delta_min) {
  if (!(delta_min > 0.0 && delta_min < 1.0))
    throw ArgumentError("lw_average_euler: delta_min must lie in (0,1)");
  for (int i = 0; i <= spec.ambient_dim; ++i) {
    for (const auto& fam : spec.families(i)) {
      if (std::holds_alternative<DustFamily>(fam))
        throw InapplicableError("'" + spec.name + "' has barcode dust (bad radii present); the "
                                "average fractal Euler number is not defined for it");
      if (const auto* g = std::get_if<GeometricFamily>(&fam); g && g->birth0 != 0.0)
        throw InapplicableError("'" + spec.name + "' has bars born at positive radii (bad radii "
                                "present); the average fractal Euler number is not defined for it");
    }
  }
  LwEstimate out;
  out.delta_min = delta_min;
  for (int i = 0; i <= spec.ambient_dim; ++i) out.sigma = std::max(out.sigma, exact_complexity(spec, i));
  if (out.sigma == 0.0) throw InapplicableError("'" + spec.name + "' has Euler exponent 0");
  const double sigma = out.sigma;
  const double floor_term = std::pow(delta_min / spec.diameter, sigma);
  for (int i = 0; i <= spec.ambient_dim; ++i) {
    const double sigma_i = exact_complexity(spec, i);
    double integral = 0.0;
    if (sigma_i != 0.0) {
      if (std::abs(sigma_i - sigma) > 1e-12)
        throw InapplicableError("'" + spec.name + "': PH-complexity of degree " +
                                std::to_string(i) + " is neither 0 nor the Euler exponent");
      // all births are 0, so death > delta is the same as lifetime > delta
      const auto bars = enumerate_degree(spec, i, delta_min);
      for (const auto& bar : bars.bars()) {
        integral += static_cast<double>(bar.multiplicity) *
                    (std::pow(bar.death / spec.diameter, sigma) - floor_term);
      }
      integral /= sigma;
    }
    out.integrals.push_back(integral);
    out.chi_estimate += (i % 2 == 0 ? 1.0 : -1.0) * integral / std::abs(std::log(delta_min));
  }
  return out;
}

double magnitude_sum(std::span<const Barcode> bars, double sigma, double diameter) {
  if (!(sigma > 0.0)) throw ArgumentError("magnitude_sum: sigma must be > 0");
  if (!(diameter > 0.0)) throw ArgumentError("magnitude_sum: diameter must be > 0");
  const double log_sigma = std::log(sigma);
  auto weight = [&](double eps) {
    if (eps == 0.0) return 0.0;  // h(0) = +inf
    const double h = sigma * std::log(diameter / eps) + log_sigma;
    return std::exp(-h);
  };
  double total = 0.0;
  for (const auto& bar : bars) {
    if (!(bar.death <= diameter * (1.0 + 1e-12)))
      throw ArgumentError("magnitude_sum: bar dies beyond the diameter");
    total += static_cast<double>(bar.multiplicity) * (weight(bar.death) - weight(bar.birth));
  }
  return total;
}

ComplexityFit estimate_complexity(const PersistenceDiagram& diagram, int i, double eps_lo,
                                  double eps_hi, int samples) {
  if (!(eps_lo > 0.0 && eps_lo < eps_hi))
    throw EstimationError("estimate_complexity: need 0 < eps_lo < eps_hi");
  if (samples < 2) throw EstimationError("estimate_complexity: need at least 2 samples");
  if (diagram.bars(i).empty())
    throw EstimationError("estimate_complexity: degree " + std::to_string(i) + " has no bars");
  std::vector<double> xs, ys;
  std::set<std::uint64_t> distinct;
  const double log_lo = std::log(eps_lo);
  const double log_hi = std::log(eps_hi);
  for (int k = 0; k < samples; ++k) {
    const double eps = std::exp(log_lo + (log_hi - log_lo) * k / (samples - 1));
    const auto count = lifetime_count(diagram, i, eps);
    if (count == 0) continue;
    distinct.insert(count);
    xs.push_back(-std::log(eps));
    ys.push_back(std::log(static_cast<double>(count)));
  }
  ComplexityFit fit;
  fit.samples = static_cast<int>(xs.size());
  fit.distinct_counts = static_cast<int>(distinct.size());
  if (fit.distinct_counts < 2)
    throw EstimationError("estimate_complexity: lifetime counts are constant over the window");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  fit.low_confidence = fit.r_squared < 0.98 || fit.distinct_counts < 5;
  return fit;
}

double InvariantReport::beta(int degree) const {
  for (const auto& d : degrees) {
    if (d.degree != degree) continue;
    if (d.beta_closed) return *d.beta_closed;
    if (d.beta_sequence) return *d.beta_sequence;
    return 0.0;
  }
  return 0.0;
}

InvariantReport euler(const FractalSpec& spec, EulerOptions opts) {
  InvariantReport report;
  report.fractal = spec.name;
  report.diameter = spec.diameter;
  report.ambient_dim = spec.ambient_dim;
  report.sequence_options = opts.sequence;
  for (int i = 0; i <= spec.ambient_dim; ++i) {
    DegreeReport deg;
    deg.degree = i;
    deg.sigma = exact_complexity(spec, i);
    try {
      deg.beta_closed = avg_betti_closed(spec, i);
    } catch (const UnsupportedStructureError& e) {
      deg.note = e.what();
    }
    try {
      auto seq = avg_betti_sequence(spec, i, opts.sequence);
      deg.beta_sequence = seq.beta;
      deg.trace = std::move(seq.trace);
    } catch (const SequenceConvergenceError& e) {
      deg.converged = false;
      deg.trace = e.trace();
      if (!deg.trace.points.empty()) deg.beta_sequence = deg.trace.points.back().increment_beta;
      deg.note = e.what();
      report.converged = false;
    }
    report.degrees.push_back(std::move(deg));
  }
  for (const auto& d : report.degrees) {
    report.euler_phf += (d.degree % 2 == 0 ? 1.0 : -1.0) * report.beta(d.degree);
  }
  try {
    report.lw_comparison = lw_average_euler(spec, opts.lw_delta);
  } catch (const InapplicableError&) {
  }
  return report;
}

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const LwEstimate& lw) {
  return {{"sigma", lw.sigma},
          {"chi_estimate", lw.chi_estimate},
          {"delta_min", lw.delta_min},
          {"integrals", lw.integrals}};
}

nlohmann::json to_json(const InvariantReport& report, bool include_trace) {
  using nlohmann::json;
  json degrees = json::array();
  for (const auto& d : report.degrees) {
    json trace = json::array();
    if (include_trace) {
      for (const auto& p : d.trace.points) {
        trace.push_back({{"j", p.j},
                         {"delta", p.delta},
                         {"s_value", p.s_value},
                         {"ratio", number_or_null(p.ratio)},
                         {"increment_beta", number_or_null(p.increment_beta)}});
      }
    }
    json entry = {{"i", d.degree},
                  {"sigma", d.sigma},
                  {"beta_closed", optional_number(d.beta_closed)},
                  {"beta_sequence", optional_number(d.beta_sequence)},
                  {"converged", d.converged},
                  {"trace", trace}};
    if (d.beta_closed && d.beta_sequence)
      entry["discrepancy"] = std::abs(*d.beta_closed - *d.beta_sequence);
    if (!d.note.empty()) entry["note"] = d.note;
    degrees.push_back(std::move(entry));
  }
  json out = {{"fractal", report.fractal},
              {"diameter", report.diameter},
              {"ambient_dim", report.ambient_dim},
              {"provenance", report.provenance},
              {"degrees", degrees},
              {"euler_phf", report.euler_phf},
              {"converged", report.converged},
              {"parameters",
               {{"j_max", report.sequence_options.j_max}, {"tol", report.sequence_options.tol}}}};
  if (report.lw_comparison) {
    out["lw_comparison"] = to_json(*report.lw_comparison);
    out["lw_comparison"]["discrepancy"] =
        std::abs(report.lw_comparison->chi_estimate - report.euler_phf);
  }
  return out;
}

}  // namespace phf
