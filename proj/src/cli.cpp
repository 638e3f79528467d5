#include "phf/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <new>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "phf/barcodes.hpp"
#include "phf/error.hpp"
#include "phf/families.hpp"
#include "phf/invariants.hpp"
#include "phf/numerical/bitmap.hpp"
#include "phf/numerical/distance.hpp"
#include "phf/numerical/persistence.hpp"

namespace phf::cli {

namespace {

namespace fs = std::filesystem;
namespace num = phf::numerical;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "0.1.0";
constexpr int kCurvePoints = 200;

struct RunConfig {
  std::string subcommand;
  std::string fractal;
  int depth = 0;
  int resolution = 0;
  std::vector<double> curve_eps;
  std::optional<double> tol;
  double delta = 1e-6;
  std::string out_dir;
  int workers = 1;
  std::string memory_budget;
  double floor_factor = 2.0;
  int j_max = 60;
  double seq_tol = 1e-9;
  int dump_distance = -1;
  bool json = false;
  bool no_meta = false;
  bool no_trace = false;
  bool dump_bitmap = false;
};

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

FractalSpec resolve_spec(const std::string& name) {
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), name) != names.end()) return builtin_spec(name);
  if (fs::is_regular_file(name)) return load_spec_file(name);
  std::string list;
  for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
  throw ArgumentError("unknown fractal '" + name + "': expected one of " + list +
                      " or the path of a spec file");
}

std::size_t memory_budget(const RunConfig& cfg) {
  if (!cfg.memory_budget.empty()) return parse_bytes(cfg.memory_budget);
  if (auto env = env_memory_budget()) return *env;
  return num::kDefaultMemoryBudget;
}

// Files written by one command; removed again if the command fails.
class Outputs {
public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
  ~Outputs() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }
  bool enabled() const { return !dir_.empty(); }
  fs::path write(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    const fs::path p = fs::path(dir_) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ArgumentError("cannot write " + p.string());
    written_.push_back(p);
    f << content;
    if (!f) throw Error("failed writing " + p.string());
    return p;
  }
  void commit() { committed_ = true; }

private:
  std::string dir_;
  std::vector<fs::path> written_;
  bool committed_ = false;
};

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

void add_meta(json& doc, const RunConfig& cfg, double runtime) {
  if (cfg.no_meta) return;
  doc["meta"] = {{"version", kVersion}, {"generated_at", utc_timestamp()}, {"runtime_seconds", runtime}};
}

// ---------------------------------------------------------------- exact

int cmd_exact(const RunConfig& cfg, std::ostream& out) {
  const auto t0 = Clock::now();
  if (cfg.j_max < 3) throw ArgumentError("--j-max must be >= 3");
  if (!(cfg.seq_tol > 0.0)) throw ArgumentError("--tol must be > 0");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ArgumentError("--delta must lie in (0, 1)");
  const auto spec = resolve_spec(cfg.fractal);
  EulerOptions opts;
  opts.sequence.j_max = cfg.j_max;
  opts.sequence.tol = cfg.seq_tol;
  opts.lw_delta = cfg.delta;
  const auto report = euler(spec, opts);
  json doc = to_json(report, !cfg.no_trace);
  add_meta(doc, cfg, seconds_since(t0));

  Outputs files(cfg.out_dir);
  if (files.enabled()) files.write(spec.name + "_report.json", dump(doc));
  files.commit();

  if (cfg.json) {
    out << dump(doc);
  } else {
    out << "fractal " << spec.name << "  diameter " << fmt6(spec.diameter) << "\n";
    out << "i  sigma      beta_closed  beta_sequence\n";
    for (const auto& d : report.degrees) {
      char line[128];
      std::snprintf(line, sizeof line, "%-2d %-10s %-12s %-12s", d.degree, fmt6(d.sigma).c_str(),
                    d.beta_closed ? fmt6(*d.beta_closed).c_str() : "-",
                    d.beta_sequence ? fmt6(*d.beta_sequence).c_str() : "-");
      out << line;
      if (!d.note.empty()) out << "  " << d.note;
      out << "\n";
    }
    out << "euler_phf " << fmt6(report.euler_phf) << "\n";
    if (report.lw_comparison)
      out << "lw estimate (delta " << fmt6(cfg.delta) << ") "
          << fmt6(report.lw_comparison->chi_estimate) << "\n";
  }
  return report.converged ? kOk : kConvergence;
}

// ---------------------------------------------------------------- numeric

struct NumericRun {
  FractalSpec spec;
  double spacing = 0.0;
  std::optional<num::Bitmap> bitmap;
  std::optional<num::DistanceField> field;
  std::optional<PersistenceDiagram> raw;
  std::optional<PersistenceDiagram> calibrated;
  std::size_t cells = 0;
  std::size_t estimated_bytes = 0;
  json timings = json::object();
};

void validate_numeric(const RunConfig& cfg) {
  if (cfg.depth < 1) throw ArgumentError("--depth is required and must be >= 1");
  if (cfg.resolution < 2) throw ArgumentError("--res is required and must be >= 2");
  if (cfg.workers < 1) throw ArgumentError("--workers must be >= 1");
  if (!(cfg.floor_factor >= 0.0)) throw ArgumentError("--floor-factor must be >= 0");
}

NumericRun run_pipeline(const RunConfig& cfg) {
  validate_numeric(cfg);
  NumericRun run;
  run.spec = resolve_spec(cfg.fractal);
  const std::size_t budget = memory_budget(cfg);
  const std::vector<int> shape(static_cast<std::size_t>(run.spec.ambient_dim), cfg.resolution);
  run.estimated_bytes = num::estimated_complex_bytes(shape);
  if (run.estimated_bytes > budget)
    throw ResourceError("depth " + std::to_string(cfg.depth) + " at resolution " +
                        std::to_string(cfg.resolution) + " needs about " +
                        std::to_string(run.estimated_bytes) + " bytes, over the memory budget of " +
                        std::to_string(budget) + " (raise --memory-budget or PHF_MEMORY_BUDGET)");
  auto t = Clock::now();
  run.bitmap = num::prefractal_bitmap(run.spec, cfg.depth, cfg.resolution, budget);
  run.spacing = run.bitmap->spacing();
  run.timings["bitmap"] = seconds_since(t);
  t = Clock::now();
  run.field = num::edt(*run.bitmap, cfg.workers);
  run.timings["distance"] = seconds_since(t);
  t = Clock::now();
  const auto cx = num::cubical_filtration(*run.field, budget);
  run.cells = cx.cell_count();
  run.timings["complex"] = seconds_since(t);
  t = Clock::now();
  run.raw = num::persistence(cx);
  run.timings["persistence"] = seconds_since(t);
  run.calibrated = num::calibrate(*run.raw, run.spacing, run.spec.diameter, cfg.floor_factor);
  return run;
}

std::string stem(const RunConfig& cfg, const FractalSpec& spec) {
  return spec.name + "_k" + std::to_string(cfg.depth) + "_n" + std::to_string(cfg.resolution);
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> grid;
  const double ratio = std::log(hi / lo);
  for (int k = 0; k < points; ++k) {
    const double e = k + 1 == points ? hi : lo * std::exp(ratio * k / (points - 1));
    if (grid.empty() || e > grid.back()) grid.push_back(e);
  }
  return grid;
}

json bar_counts(const PersistenceDiagram& d) {
  json counts = json::object();
  for (int i = 0; i <= d.ambient_dim(); ++i) counts[std::to_string(i)] = d.size(i);
  return counts;
}

int cmd_numeric(const RunConfig& cfg, std::ostream& out) {
  const auto t0 = Clock::now();
  for (double e : cfg.curve_eps)
    if (!(e >= 0.0)) throw ArgumentError("--curve-eps values must be >= 0");
  const auto run = run_pipeline(cfg);
  const auto& diag = *run.calibrated;
  const int d = diag.ambient_dim();

  std::ostringstream curve;
  curve << "eps";
  for (int i = 0; i <= d; ++i) curve << ",b" << i;
  curve << "\n";
  const auto grid = log_grid(run.spacing, run.spec.diameter, kCurvePoints);
  std::vector<std::vector<std::pair<double, std::uint64_t>>> curves;
  for (int i = 0; i <= d; ++i) curves.push_back(betti_curve(diag, i, grid));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    curve << format_length(grid[k]);
    for (int i = 0; i <= d; ++i) curve << ',' << curves[static_cast<std::size_t>(i)][k].second;
    curve << "\n";
  }

  json probes = json::array();
  for (double e : cfg.curve_eps) {
    json b = json::array();
    for (int i = 0; i <= d; ++i) b.push_back(betti_at(diag, i, e));
    probes.push_back({{"eps", e}, {"betti", b}});
  }

  json summary = {{"fractal", run.spec.name},
                  {"depth", cfg.depth},
                  {"resolution", cfg.resolution},
                  {"spacing", run.spacing},
                  {"diameter", run.spec.diameter},
                  {"floor_factor", cfg.floor_factor},
                  {"resolution_floor", diag.resolution_floor()},
                  {"occupied_cells", run.bitmap->occupied_count()},
                  {"complex_cells", run.cells},
                  {"estimated_bytes", run.estimated_bytes},
                  {"bars_raw", bar_counts(*run.raw)},
                  {"bars", bar_counts(diag)},
                  {"curve_eps", probes}};
  if (!cfg.no_meta) {
    add_meta(summary, cfg, seconds_since(t0));
    summary["meta"]["timings"] = run.timings;
    summary["meta"]["workers"] = cfg.workers;
  }

  Outputs files(cfg.out_dir);
  if (files.enabled()) {
    const auto base = stem(cfg, run.spec);
    files.write(base + "_diagram.csv", to_barcode_csv(diag.bars()));
    files.write(base + "_betti.csv", curve.str());
    if (cfg.dump_bitmap) {
      std::ostringstream bm;
      num::write_bitmap(bm, *run.bitmap);
      files.write(base + "_bitmap.nrrd", bm.str());
    }
    if (cfg.dump_distance >= 0) {
      std::ostringstream df;
      num::write_distance_slice_csv(df, *run.field, cfg.dump_distance);
      files.write(base + "_distance.csv", df.str());
    }
    files.write(base + "_summary.json", dump(summary));
  }
  files.commit();

  if (cfg.json) {
    out << dump(summary);
  } else {
    out << "fractal " << run.spec.name << "  depth " << cfg.depth << "  resolution "
        << cfg.resolution << "  h " << fmt6(run.spacing) << "\n";
    for (int i = 0; i <= d; ++i)
      out << "H" << i << " bars " << diag.size(i) << " (raw " << run.raw->size(i) << ")\n";
    for (const auto& p : probes) {
      out << "eps " << fmt6(p["eps"].get<double>()) << ":";
      for (int i = 0; i <= d; ++i) out << " b" << i << "=" << p["betti"][static_cast<std::size_t>(i)].get<std::uint64_t>();
      out << "\n";
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const auto t0 = Clock::now();
  if (cfg.tol && !(*cfg.tol >= 0.0)) throw ArgumentError("--tol must be >= 0");
  const auto run = run_pipeline(cfg);
  const double h = run.spacing;
  const double tol = cfg.tol.value_or(2.0 * h);
  const double threshold = 4.0 * h;
  const auto symbolic = enumerate_spec(run.spec, threshold);
  const auto& diag = *run.calibrated;

  json degrees = json::array();
  bool all_matched = true;
  for (int i = 0; i <= diag.ambient_dim(); ++i) {
    const auto sym = symbolic.bars(i);
    const PersistenceDiagram num_i(diag.ambient_dim(), diag.diameter(),
                                   std::vector<Barcode>(diag.bars(i).begin(), diag.bars(i).end()),
                                   diag.resolution_floor());
    const auto st = num::match_report(num_i, sym, tol);
    all_matched = all_matched && st.unmatched_symbolic == 0;
    json missing = json::array();
    for (const auto& b : st.missing)
      missing.push_back({{"birth", b.birth}, {"death", b.death}, {"multiplicity", b.multiplicity}});
    degrees.push_back({{"i", i},
                       {"symbolic", st.symbolic_total},
                       {"numeric", st.numeric_total},
                       {"matched", st.matched},
                       {"unmatched_symbolic", st.unmatched_symbolic},
                       {"unmatched_numeric", st.unmatched_numeric},
                       {"max_displacement", st.max_displacement},
                       {"missing", missing}});
  }
  json doc = {{"fractal", run.spec.name},
              {"depth", cfg.depth},
              {"resolution", cfg.resolution},
              {"spacing", h},
              {"tol", tol},
              {"lifetime_threshold", threshold},
              {"all_matched", all_matched},
              {"degrees", degrees}};
  add_meta(doc, cfg, seconds_since(t0));

  Outputs files(cfg.out_dir);
  if (files.enabled()) files.write(stem(cfg, run.spec) + "_compare.json", dump(doc));
  files.commit();

  if (cfg.json) {
    out << dump(doc);
  } else {
    out << "fractal " << run.spec.name << "  tol " << fmt6(tol) << "  lifetime > "
        << fmt6(threshold) << "\n";
    for (const auto& e : degrees)
      out << "H" << e["i"].get<int>() << " matched " << e["matched"].get<std::uint64_t>() << "/"
          << e["symbolic"].get<std::uint64_t>() << "  max displacement "
          << fmt6(e["max_displacement"].get<double>()) << "\n";
    out << (all_matched ? "all symbolic bars matched" : "MISMATCH") << "\n";
  }
  return all_matched ? kOk : kMismatch;
}

// ---------------------------------------------------------------- lw

int cmd_lw(const RunConfig& cfg, std::ostream& out) {
  const auto t0 = Clock::now();
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ArgumentError("--delta must lie in (0, 1)");
  const auto spec = resolve_spec(cfg.fractal);
  const auto lw = lw_average_euler(spec, cfg.delta);
  const auto report = euler(spec);
  json doc = {{"fractal", spec.name},
              {"delta", cfg.delta},
              {"chi_estimate", lw.chi_estimate},
              {"euler_phf", report.euler_phf},
              {"discrepancy", std::abs(lw.chi_estimate - report.euler_phf)},
              {"lw", to_json(lw)}};
  add_meta(doc, cfg, seconds_since(t0));

  Outputs files(cfg.out_dir);
  if (files.enabled()) files.write(spec.name + "_lw.json", dump(doc));
  files.commit();

  if (cfg.json) {
    out << dump(doc);
  } else {
    out << "fractal " << spec.name << "  delta " << fmt6(cfg.delta) << "\n";
    out << "chi estimate " << fmt6(lw.chi_estimate) << "  euler_phf " << fmt6(report.euler_phf)
        << "  discrepancy " << fmt6(doc["discrepancy"].get<double>()) << "\n";
  }
  return report.converged ? kOk : kConvergence;
}

}  // namespace

std::size_t parse_bytes(const std::string& text) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ArgumentError("invalid byte count '" + text + "'");
  }
  double scale = 1.0;
  const std::string suffix = text.substr(pos);
  if (suffix.empty() || suffix == "B") scale = 1.0;
  else if (suffix == "K" || suffix == "KiB") scale = 1024.0;
  else if (suffix == "M" || suffix == "MiB") scale = 1024.0 * 1024.0;
  else if (suffix == "G" || suffix == "GiB") scale = 1024.0 * 1024.0 * 1024.0;
  else if (suffix == "T" || suffix == "TiB") scale = 1024.0 * 1024.0 * 1024.0 * 1024.0;
  else throw ArgumentError("invalid byte count suffix in '" + text + "'");
  const double bytes = value * scale;
  if (!(bytes >= 1.0) || bytes > 1.8e19) throw ArgumentError("byte count out of range: '" + text + "'");
  return static_cast<std::size_t>(bytes);
}

std::optional<std::size_t> env_memory_budget() {
  const char* v = std::getenv("PHF_MEMORY_BUDGET");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return parse_bytes(v);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Persistent homology invariants of self-similar fractals", "phfractal"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto common = [&](CLI::App* sub) {
    sub->add_option("fractal", cfg.fractal, "built-in fractal name or spec file path")->required();
    sub->add_flag("--json", cfg.json, "print the report as JSON");
    sub->add_option("--out", cfg.out_dir, "directory for output files");
    sub->add_flag("--no-meta", cfg.no_meta, "omit timestamps and timings from JSON");
  };
  auto numeric_flags = [&](CLI::App* sub) {
    sub->add_option("--depth", cfg.depth, "pre-fractal depth k")->required();
    sub->add_option("--res", cfg.resolution, "cells per unit length n")->required();
    sub->add_option("--workers", cfg.workers, "threads for the distance transform");
    sub->add_option("--memory-budget", cfg.memory_budget, "byte budget, K/M/G suffixes allowed");
    sub->add_option("--floor-factor", cfg.floor_factor, "drop bars shorter than this many cells");
  };

  auto* exact = app.add_subcommand("exact", "symbolic sigma, beta and euler_phf");
  common(exact);
  exact->add_option("--j-max", cfg.j_max, "sequence length budget");
  exact->add_option("--tol", cfg.seq_tol, "sequence convergence tolerance");
  exact->add_option("--delta", cfg.delta, "delta for the Llorente-Winter comparison");
  exact->add_flag("--no-trace", cfg.no_trace, "omit per-step sequence traces");

  auto* numeric = app.add_subcommand("numeric", "pre-fractal persistence pipeline");
  common(numeric);
  numeric_flags(numeric);
  numeric->add_option("--curve-eps", cfg.curve_eps, "report Betti numbers at these eps");
  numeric->add_flag("--dump-bitmap", cfg.dump_bitmap, "also write the bitmap");
  numeric->add_option("--dump-distance", cfg.dump_distance, "also write this distance slice");

  auto* compare = app.add_subcommand("compare", "match numeric bars against symbolic ones");
  common(compare);
  numeric_flags(compare);
  compare->add_option("--tol", cfg.tol, "matching tolerance (default 2h)");

  auto* lw = app.add_subcommand("lw", "Llorente-Winter average Euler number at finite delta");
  common(lw);
  lw->add_option("--delta", cfg.delta, "smallest radius");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kArgumentError;
  }

  try {
    if (exact->parsed()) return cmd_exact(cfg, out);
    if (numeric->parsed()) return cmd_numeric(cfg, out);
    if (compare->parsed()) return cmd_compare(cfg, out);
    if (lw->parsed()) return cmd_lw(cfg, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kArgumentError;
  } catch (const UnsupportedStructureError& e) {
    err << "error: " << e.what() << "\n";
    return kArgumentError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kConvergence;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << "\n";
    return kResources;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kResources;
  } catch (const InapplicableError& e) {
    err << "error: " << e.what() << "\n";
    return kInapplicable;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kArgumentError;
}

}  // namespace phf::cli
