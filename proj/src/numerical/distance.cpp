#include "phf/numerical/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "phf/barcodes.hpp"
#include "phf/error.hpp"

namespace phf::numerical {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (q - p)^2 + f(p) over the finite sites p.
struct Envelope {
  std::vector<int> site;
  std::vector<double> bound;
  std::vector<double> in;
  std::vector<double> out;

  void run(int n) {
    site.resize(static_cast<std::size_t>(n));
    bound.resize(static_cast<std::size_t>(n) + 1);
    int k = -1;
    for (int q = 0; q < n; ++q) {
      const double fq = in[static_cast<std::size_t>(q)];
      if (fq == kInf) continue;
      double s = -kInf;
      while (k >= 0) {
        const int p = site[static_cast<std::size_t>(k)];
        const double fp = in[static_cast<std::size_t>(p)];
        s = ((fq + double(q) * q) - (fp + double(p) * p)) / (2.0 * (q - p));
        if (s > bound[static_cast<std::size_t>(k)]) break;
        --k;
      }
      if (k < 0) s = -kInf;
      ++k;
      site[static_cast<std::size_t>(k)] = q;
      bound[static_cast<std::size_t>(k)] = s;
    }
    if (k < 0) {
      std::fill(out.begin(), out.begin() + n, kInf);
      return;
    }
    bound[static_cast<std::size_t>(k) + 1] = kInf;
    int j = 0;
    for (int q = 0; q < n; ++q) {
      while (bound[static_cast<std::size_t>(j) + 1] < q) ++j;
      const int p = site[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(q)] = double(q - p) * (q - p) + in[static_cast<std::size_t>(p)];
    }
  }
};

}  // namespace

DistanceField::DistanceField(std::vector<int> shape, double spacing, std::vector<double> origin,
                             std::vector<double> values)
    : shape_(std::move(shape)),
      spacing_(spacing),
      origin_(std::move(origin)),
      values_(std::move(values)) {
  std::size_t total = 1;
  for (int s : shape_) {
    if (s < 1) throw ArgumentError("distance field axis length must be positive");
    total *= static_cast<std::size_t>(s);
  }
  if (shape_.empty() || total != values_.size())
    throw ArgumentError("distance field values do not match shape");
  if (!(spacing_ > 0.0)) throw ArgumentError("distance field spacing must be positive");
}

DistanceField edt(const Bitmap& bitmap, int workers) {
  if (workers < 1) throw ArgumentError("workers must be >= 1");
  const int d = bitmap.dim();
  const auto shape = bitmap.shape();
  std::vector<double> sq(bitmap.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = bitmap.occupied(i) ? 0.0 : kInf;

  std::size_t stride = 1;
  for (int a = 0; a < d; ++a) {
    const int n = shape[static_cast<std::size_t>(a)];
    const std::size_t lines = sq.size() / static_cast<std::size_t>(n);
    const std::size_t step = stride;
    // Line l starts at (l / step) * step * n + l % step.
    auto pass = [&](std::size_t first, std::size_t last) {
      Envelope env;
      env.in.resize(static_cast<std::size_t>(n));
      env.out.resize(static_cast<std::size_t>(n));
      for (std::size_t l = first; l < last; ++l) {
        const std::size_t start = (l / step) * step * static_cast<std::size_t>(n) + l % step;
        for (int q = 0; q < n; ++q) env.in[static_cast<std::size_t>(q)] = sq[start + static_cast<std::size_t>(q) * step];
        env.run(n);
        for (int q = 0; q < n; ++q) sq[start + static_cast<std::size_t>(q) * step] = env.out[static_cast<std::size_t>(q)];
      }
    };
    const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), lines);
    if (nthreads <= 1) {
      pass(0, lines);
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (lines + nthreads - 1) / nthreads;
      for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(lines, lo + chunk);
        if (lo < hi) pool.emplace_back(pass, lo, hi);
      }
    }
    stride *= static_cast<std::size_t>(n);
  }
  for (auto& v : sq) v = std::sqrt(v);
  return DistanceField(std::vector<int>(shape.begin(), shape.end()), bitmap.spacing(),
                       std::vector<double>(bitmap.origin().begin(), bitmap.origin().end()),
                       std::move(sq));
}

void write_distance_slice_csv(std::ostream& out, const DistanceField& field, int slice) {
  const auto shape = field.shape();
  const int nx = shape[0];
  const int ny = field.dim() >= 2 ? shape[1] : 1;
  const int nz = field.dim() >= 3 ? shape[2] : 1;
  if (slice < 0 || slice >= nz) throw ArgumentError("slice index out of range");
  const std::size_t base = static_cast<std::size_t>(slice) * static_cast<std::size_t>(nx) * ny;
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      if (x > 0) out << ',';
      out << format_length(field[base + static_cast<std::size_t>(y) * nx + static_cast<std::size_t>(x)]);
    }
    out << '\n';
  }
}

}  // namespace phf::numerical
