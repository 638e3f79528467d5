// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// line fails. Tolerances and runtime limits are the published targets.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "phf/error.hpp"
#include "phf/families.hpp"
#include "phf/invariants.hpp"
#include "phf/numerical/bitmap.hpp"
#include "phf/numerical/cubical.hpp"
#include "phf/numerical/distance.hpp"
#include "phf/numerical/persistence.hpp"

using namespace phf;
namespace num = phf::numerical;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

struct Outcome {
  bool ok;
  std::string detail;
};

// Runs `body`, checks its verdict and its wall time against `limit_s`.
void criterion(const std::string& id, const std::string& what, double limit_s,
               const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool in_time = secs <= limit_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s %-5s %s | %s | %.3fs (limit %gs)%s\n", pass ? "PASS" : "FAIL", id.c_str(),
              what.c_str(), o.detail.c_str(), secs, limit_s, in_time ? "" : " TIMEOUT");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

PersistenceDiagram pipeline(const char* name, int depth, int n, double floor_factor) {
  const auto spec = builtin_spec(name);
  const auto bm = num::prefractal_bitmap(spec, depth, n);
  const auto raw = num::persistence(num::cubical_filtration(num::edt(bm, 4)));
  return num::calibrate(raw, bm.spacing(), spec.diameter, floor_factor);
}

PersistenceDiagram only_degree(const PersistenceDiagram& d, int i) {
  return PersistenceDiagram(d.ambient_dim(), d.diameter(),
                            std::vector<Barcode>(d.bars(i).begin(), d.bars(i).end()),
                            d.resolution_floor());
}

// ----------------------------------------------------------------- 1

void symbolic() {
  const double l3 = std::log(3.0);
  criterion("1.1", "PH-complexities exact to 1e-12", 1.0, [&] {
    struct Row { const char* name; int i; double want; };
    const Row rows[] = {{"cantor", 0, std::log(2.0) / l3},
                        {"sierpinski_carpet", 1, std::log(8.0) / l3},
                        {"cantor_dust", 0, std::log(4.0) / l3},
                        {"cantor_dust", 1, std::log(4.0) / l3},
                        {"menger", 1, std::log(20.0) / l3},
                        {"menger", 2, std::log(20.0) / l3}};
    double worst = 0.0;
    for (const auto& r : rows)
      worst = std::max(worst, std::abs(exact_complexity(builtin_spec(r.name), r.i) - r.want));
    return Outcome{worst <= 1e-12, fmt("max error %.3g", worst)};
  });

  criterion("1.2", "beta closed forms within 1e-3 of published, sequence within 1e-6", 1.0, [&] {
    struct Row { const char* name; int i; double published; };
    const Row rows[] = {{"cantor", 0, 0.466},       {"sierpinski_carpet", 1, 0.0084},
                        {"cantor_dust", 0, 0.1456}, {"cantor_dust", 1, 0.0438},
                        {"menger", 1, 0.001691},    {"menger", 2, 0.001555}};
    double worst_pub = 0.0;
    double worst_seq = 0.0;
    std::ostringstream vals;
    for (const auto& r : rows) {
      const auto spec = builtin_spec(r.name);
      const double closed = avg_betti_closed(spec, r.i);
      const double seq = avg_betti_sequence(spec, r.i).beta;
      worst_pub = std::max(worst_pub, std::abs(closed - r.published));
      worst_seq = std::max(worst_seq, std::abs(seq - closed));
      vals << r.name << "[" << r.i << "]=" << fmt("%.6g", closed) << " ";
    }
    return Outcome{worst_pub < 1e-3 && worst_seq < 1e-6,
                   vals.str() + fmt("max |closed-published| %.3g, max |seq-closed| %.3g", worst_pub, worst_seq)};
  });

  criterion("1.3", "euler numbers: dust 0.1018 +- 2e-3, menger -0.0001353 +- 5e-5", 1.0, [&] {
    const double dust = euler(builtin_spec(Builtin::cantor_dust)).euler_phf;
    const double menger = euler(builtin_spec(Builtin::menger)).euler_phf;
    const bool ok = std::abs(dust - 0.1018) <= 2e-3 && std::abs(menger + 0.0001353) <= 5e-5;
    return Outcome{ok, fmt("dust %.6g, menger %.6g", dust, menger)};
  });

  criterion("1.4", "menger counts A1..A4 = 5, 76, 1328, 25024; recurrence = closed form j<=12", 1.0, [&] {
    const long want[] = {5, 76, 1328, 25024};
    bool ok = true;
    std::ostringstream s;
    for (int j = 1; j <= 4; ++j) {
      const auto c = menger_h1_counts(j);
      ok = ok && c.a == want[j - 1];
      s << c.a << (j < 4 ? "," : "");
    }
    // menger_h1_counts cross-checks recurrence and closed forms internally
    // and throws on any mismatch; here we recheck the closed form directly.
    for (int j = 1; j <= 12; ++j) {
      const auto c = menger_h1_counts(j);
      WideInt p20 = 1;
      for (int k = 1; k < j; ++k) p20 *= 20;
      const WideInt p2 = WideInt(1) << (3 * j - 2);
      ok = ok && c.a == 3 * p20 + p2 && c.b == 2 * p20 - p2;
    }
    return Outcome{ok, "A = " + s.str()};
  });
}

// ----------------------------------------------------------------- 2

void properties() {
  const auto t_all = Clock::now();

  criterion("2.1", "magnitude_sum = s_delta (rel 1e-12) on 500 random bar lists", 30.0, [&] {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> us(0.1, 3.0);
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
      const double diameter = 0.5 + 2 * u(rng);
      const double sigma = us(rng);
      std::vector<Barcode> bars;
      const int n = 1 + static_cast<int>(u(rng) * 40);
      for (int k = 0; k < n; ++k) {
        double a = u(rng) * diameter, b = u(rng) * diameter;
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (u(rng) < 0.2) a = 0.0;
        bars.emplace_back(0, a, b, 1 + k % 3);
      }
      if (bars.empty()) continue;
      const PersistenceDiagram d(1, diameter, bars);
      double min_life = diameter;
      for (const auto& b : d.bars()) min_life = std::min(min_life, b.lifetime());
      const double s = s_delta(d, 0, sigma, 0.5 * min_life, diameter);
      const double m = magnitude_sum(d.bars(), sigma, diameter);
      worst = std::max(worst, std::abs(m - s) / std::abs(s));
    }
    return Outcome{worst <= 1e-12, fmt("max rel diff %.3g", worst)};
  });

  criterion("2.2", "s_delta scale invariance on all built-ins, lambda in {0.5, 2, 7}", 30.0, [&] {
    double worst = 0.0;
    for (const auto& name : builtin_names()) {
      const auto spec = builtin_spec(name);
      for (double lambda : {0.5, 2.0, 7.0}) {
        const auto scaled = scale_spec(spec, lambda);
        for (int i = 0; i <= spec.ambient_dim; ++i) {
          const double sigma = exact_complexity(spec, i);
          for (double delta : {0.05, 3e-3, 1e-4, 1e-6}) {
            const double a = s_delta(spec.families(i), sigma, delta, spec.diameter);
            const double b = s_delta(scaled.families(i), sigma, lambda * delta, scaled.diameter);
            if (a != 0.0) worst = std::max(worst, std::abs(a - b) / std::abs(a));
            else worst = std::max(worst, std::abs(b));
          }
        }
      }
    }
    // Identical up to the rounding of lambda * length in double precision.
    return Outcome{worst <= 1e-12, fmt("max rel diff %.3g", worst)};
  });

  criterion("2.3", "cantor dust sandwich sum J_i <= S <= j I_1 for j <= 20", 30.0, [&] {
    const auto spec = builtin_spec(Builtin::cantor_dust);
    const double sigma = exact_complexity(spec, 1);
    Family fam;
    for (const auto& f : spec.families(1))
      if (std::holds_alternative<DustFamily>(f)) fam = f;
    const auto& dust = std::get<DustFamily>(fam);
    const double l1 = (1.0 / 6) * (std::sqrt(1 + 1.0 / 9) - 1);
    const double i1 = dust_step_contribution(dust, sigma, spec.diameter);
    const double c = std::pow(1.0 / (6 * std::sqrt(2.0)), sigma);
    bool ok = true;
    for (int j = 1; j <= 20; ++j) {
      const double s = s_delta(std::span<const Family>(&fam, 1), sigma, l1 * std::pow(3.0, -j), spec.diameter);
      double lower = 0.0;
      for (int i = 1; i <= j / 2; ++i)
        lower += (j - 2 * i) / sigma * c * (std::pow(1 + std::pow(3.0, -2 * i), sigma / 2) - 1) * 4 *
                 std::pow(2.0, i - 1);
      ok = ok && lower <= s * (1 + 1e-12) && s <= j * i1 * (1 + 1e-12);
    }
    return Outcome{ok, fmt("I_1 = %.6g", i1)};
  });

  criterion("2.4", "estimate_complexity within 0.08 of sigma for every built-in family", 30.0, [&] {
    // sigma is an eps -> 0 limit, so fit over the deepest window (eps_lo, 1e-2)
    // whose enumeration stays under the exact-count cap.
    double worst = 0.0;
    std::string where;
    for (const auto& name : builtin_names()) {
      const auto spec = builtin_spec(name);
      for (int i = 0; i <= spec.ambient_dim; ++i)
        for (const auto& fam : spec.families(i)) {
          if (std::holds_alternative<EssentialBar>(fam)) continue;
          for (double eps_lo : {1e-6, 1e-5, 1e-4}) {
            std::vector<Barcode> bars;
            try {
              bars = enumerate_family(fam, i, 0.5 * eps_lo);
            } catch (const RangeError&) {
              continue;
            }
            const PersistenceDiagram d(spec.ambient_dim, spec.diameter, std::move(bars));
            const double err = std::abs(estimate_complexity(d, i, eps_lo, 1e-2).slope - family_complexity(fam));
            if (err > worst) {
              worst = err;
              where = name + "[" + std::to_string(i) + "]" + fmt(" window %.0e", eps_lo);
            }
            break;
          }
        }
    }
    return Outcome{worst <= 0.08, fmt("max |slope - sigma| %.4f", worst) + " at " + where};
  });

  const double total = std::chrono::duration<double>(Clock::now() - t_all).count();
  const bool ok = total < 30.0;
  if (!ok) ++failures;
  std::printf("%s 2.*   property suites total runtime | %.3fs (limit 30s)\n", ok ? "PASS" : "FAIL", total);
}

// ----------------------------------------------------------------- 3

void llorente_winter() {
  for (const char* name : {"cantor", "sierpinski_carpet"}) {
    criterion(std::string("3.") + (name[0] == 'c' ? "1" : "2"),
              std::string("LW agreement for ") + name + ": gap(1e-6) < 5e-3, decreasing over 1e-2..1e-8",
              10.0, [&] {
                const auto spec = builtin_spec(name);
                const double chi = euler(spec).euler_phf;
                std::ostringstream s;
                double prev = 1e300;
                bool monotone = true;
                double gap6 = 0.0;
                for (double delta : {1e-2, 1e-4, 1e-6, 1e-8}) {
                  const double gap = std::abs(lw_average_euler(spec, delta).chi_estimate - chi);
                  monotone = monotone && gap < prev;
                  prev = gap;
                  if (delta == 1e-6) gap6 = gap;
                  s << fmt("%.2g:", delta) << fmt("%.4g ", gap);
                }
                return Outcome{monotone && gap6 < 5e-3, "gaps " + s.str() + (monotone ? "(monotone)" : "(not monotone)")};
              });
  }
}

// ----------------------------------------------------------------- 4

void numeric_pipeline() {
  criterion("4.1", "EDT equals brute force on 100 random bitmaps <= 20^3", 60.0, [&] {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> side(2, 20);
    std::uniform_real_distribution<double> dens(0.002, 0.3);
    int bad = 0;
    for (int t = 0; t < 100; ++t) {
      const int dim = 1 + t % 3;
      std::vector<int> shape;
      std::size_t n = 1;
      for (int a = 0; a < dim; ++a) {
        shape.push_back(side(rng));
        n *= static_cast<std::size_t>(shape.back());
      }
      const auto occ = oracle::random_occupancy(rng, n, dens(rng));
      const num::Bitmap bm(shape, 1.0, std::vector<double>(shape.size(), 0.0), occ);
      const auto f = num::edt(bm, 1 + t % 3);
      const auto ref = oracle::brute_edt(shape, occ);
      for (std::size_t i = 0; i < n; ++i)
        if (f[i] != ref[i]) {
          ++bad;
          break;
        }
    }
    return Outcome{bad == 0, std::to_string(bad) + " mismatching bitmaps"};
  });

  criterion("4.2", "cantor k=4 n=243: degree-0 deaths 1/6 3^-(i-1) x 1,2,4 within h", 60.0, [&] {
    const int n = 243;
    const double h = 1.0 / n;
    const auto cal = pipeline("cantor", 4, n, 2.0);
    bool ok = true;
    std::ostringstream s;
    for (int i = 1; i <= 3; ++i) {
      const double death = (1.0 / 6) * std::pow(3.0, -(i - 1));
      std::uint64_t near = 0;
      for (const auto& b : cal.bars(0))
        if (!b.essential() && std::abs(b.death - death) <= h) near += b.multiplicity;
      ok = ok && near == (std::uint64_t{1} << (i - 1));
      s << near << (i < 3 ? "," : "");
    }
    return Outcome{ok, "multiplicities " + s.str()};
  });

  criterion("4.3", "sierpinski carpet k=3 n=108: symbolic degree-1 bars with lifetime > 4h matched within 2h", 60.0, [&] {
    const int n = 108;
    const double h = 1.0 / n;
    const auto cal = pipeline("sierpinski_carpet", 3, n, 2.0);
    const auto sym = enumerate_degree(builtin_spec(Builtin::sierpinski_carpet), 1, 4 * h);
    const auto st = num::match_report(only_degree(cal, 1), sym.bars(1), 2 * h);
    return Outcome{st.unmatched_symbolic == 0 && st.symbolic_total > 0,
                   std::to_string(st.matched) + "/" + std::to_string(st.symbolic_total) +
                       fmt(" matched, max displacement %.3g", st.max_displacement)};
  });

  criterion("4.4", "cantor dust k=3 n=108: principal bars j<=2 and i=1 dust bars matched within 2h", 60.0, [&] {
    const int n = 108;
    const double h = 1.0 / n;
    // Dust bars live about 0.97h, so nothing may be floored away here.
    const auto cal = pipeline("cantor_dust", 3, n, 0.0);
    const double r2 = std::sqrt(2.0);
    const std::vector<Barcode> want{Barcode(1, 1.0 / 6, r2 / 6, 1), Barcode(1, 1.0 / 18, r2 / 18, 4),
                                    Barcode(1, 1.0 / 6, (1.0 / 6) * std::sqrt(1 + 1.0 / 9), 4)};
    const auto st = num::match_report(only_degree(cal, 1), want, 2 * h);
    return Outcome{st.unmatched_symbolic == 0,
                   std::to_string(st.matched) + "/" + std::to_string(st.symbolic_total) +
                       fmt(" matched, max displacement %.3g", st.max_displacement)};
  });

  criterion("4.5", "cantor dust: degree-1 bars born within 2h of 1/6 strictly increase over k = 2, 3, 4", 60.0, [&] {
    std::ostringstream s;
    std::uint64_t prev = 0;
    bool ok = true;
    for (int k : {2, 3, 4}) {
      const int n = 4 * static_cast<int>(std::lround(std::pow(3, k)));
      const double h = 1.0 / n;
      const auto cal = pipeline("cantor_dust", k, n, 0.0);
      std::uint64_t count = 0;
      for (const auto& b : cal.bars(1))
        if (std::abs(b.birth - 1.0 / 6) <= 2 * h) count += b.multiplicity;
      ok = ok && count > prev;
      prev = count;
      s << "k=" << k << ",n=" << n << ":" << count << " ";
    }
    return Outcome{ok, s.str()};
  });

  criterion("4.6", "menger k=2 n=27: b1 = 5 at eps = sqrt2/18", 600.0, [&] {
    const auto cal = pipeline("menger", 2, 27, 2.0);
    const auto b1 = betti_at(cal, 1, std::sqrt(2.0) / 18);
    return Outcome{b1 == 5, "b1 = " + std::to_string(b1)};
  });

  const char* ext = std::getenv("PHF_ACCEPTANCE_EXTENDED");
  if (ext != nullptr && std::string(ext) == "1") {
    criterion("4.7", "extended: menger k=4 n=243: b1 = 76 at eps = sqrt2/54", 1800.0, [&] {
      const auto cal = pipeline("menger", 4, 243, 2.0);
      const auto b1 = betti_at(cal, 1, std::sqrt(2.0) / 54);
      return Outcome{b1 == 76, "b1 = " + std::to_string(b1)};
    });
  } else {
    std::printf("SKIP 4.7   extended: menger k=4 n=243 (optional; set PHF_ACCEPTANCE_EXTENDED=1)\n");
  }
}

}  // namespace

int main() {
  symbolic();
  properties();
  llorente_winter();
  numeric_pipeline();
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
