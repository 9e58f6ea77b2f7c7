#include "sectorial/fractal/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "sectorial/util/errors.hpp"
#include "sectorial/util/stats.hpp"

namespace sectorial::fractal {

namespace {

constexpr double kSlack = 1e-9;

double isotropic_spacing(const Grid& g) {
  const double h = g.spacing()[0];
  for (double s : g.spacing())
    if (std::abs(s - h) > 1e-12 * h) throw DomainError("level sets and covers need an isotropic grid");
  return h;
}

bool in_box(const Box& J, std::span<const double> x, double slack) {
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] < J.lo[j] - slack || x[j] > J.hi[j] + slack) return false;
  return true;
}

std::vector<std::size_t> points_in(const Grid& g, const Box& J) {
  if (J.dim() != g.dim()) throw DomainError("J has the wrong dimension");
  std::vector<std::size_t> out;
  Point x(g.dim());
  const double slack = kSlack * g.max_spacing();
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    if (in_box(J, x, slack)) out.push_back(i);
  }
  return out;
}

double nearest_integer_or_throw(double v, const char* what) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-6) throw ResolutionError(what);
  return r;
}

std::size_t count_boxes(std::span<const double> coords, std::size_t dim, double eps) {
  const std::size_t n = coords.size() / dim;
  std::vector<std::int64_t> keys(n * dim);
  for (std::size_t k = 0; k < n * dim; ++k)
    keys[k] = static_cast<std::int64_t>(std::floor(coords[k] / eps + kSlack));
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(keys.begin() + static_cast<std::ptrdiff_t>(a * dim),
                                        keys.begin() + static_cast<std::ptrdiff_t>((a + 1) * dim),
                                        keys.begin() + static_cast<std::ptrdiff_t>(b * dim),
                                        keys.begin() + static_cast<std::ptrdiff_t>((b + 1) * dim));
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t count = n > 0;
  for (std::size_t k = 1; k < n; ++k)
    if (less(order[k - 1], order[k])) ++count;
  return count;
}

BoxDimension fit_dimension(std::span<const double> coords, std::size_t dim, std::vector<double> scales) {
  if (scales.size() < 4) throw DomainError("box counting needs at least 4 scales");
  std::sort(scales.begin(), scales.end());
  if (!(scales.front() > 0.0)) throw DomainError("box scales must be positive");
  if (std::log10(scales.back() / scales.front()) < 1.5 - 1e-12)
    throw DomainError("box scales must span at least 1.5 decades");
  if (coords.empty()) throw DomainError("box counting of an empty set");
  BoxDimension out;
  out.scales = scales;
  for (double e : scales) out.counts.push_back(static_cast<double>(count_boxes(coords, dim, e)));
  if (std::all_of(out.counts.begin(), out.counts.end(), [](double c) { return c == 1.0; }))
    throw DomainError("degenerate box count: a single box at every scale");
  std::vector<double> x, y;
  for (std::size_t k = 1; k + 1 < scales.size(); ++k) {
    x.push_back(std::log(1.0 / scales[k]));
    y.push_back(std::log(out.counts[k]));
  }
  const auto fit = util::fit_line(x, y);
  out.slope = fit.slope;
  out.stderr_ = fit.slope_stderr;
  return out;
}

}  // namespace

bool CellSet::contains(std::span<const std::int64_t> idx) const {
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const auto c = at(mid);
    if (std::lexicographical_compare(c.begin(), c.end(), idx.begin(), idx.end()))
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo < size() && std::equal(idx.begin(), idx.end(), at(lo).begin());
}

CellSet CellSet::make(std::size_t dim, double cell, std::vector<double> anchor, std::vector<std::int64_t> raw) {
  if (dim == 0 || !(cell > 0.0)) throw DomainError("cell sets need dim >= 1 and a positive cell size");
  if (anchor.size() != dim || raw.size() % dim != 0) throw DomainError("cell set shape mismatch");
  const std::size_t n = raw.size() / dim;
  std::vector<std::vector<std::int64_t>> tuples(n);
  for (std::size_t k = 0; k < n; ++k)
    tuples[k].assign(raw.begin() + static_cast<std::ptrdiff_t>(k * dim),
                     raw.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim));
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  CellSet out;
  out.dim = dim;
  out.cell = cell;
  out.anchor = std::move(anchor);
  for (const auto& t : tuples) out.indices.insert(out.indices.end(), t.begin(), t.end());
  return out;
}

double LevelSetTolerance::value(double h) const {
  if (fixed) {
    if (!(*fixed >= 0.0)) throw DomainError("level-set tolerance must be >= 0");
    return *fixed;
  }
  if (!(h > 0.0 && h < 1.0)) throw DomainError("modulus tolerance needs a spacing in (0, 1)");
  return c_hat * std::pow(h, alpha) * std::sqrt(std::log(1.0 / h));
}

double increment_scale(const SamplePath& path, double alpha) {
  const Grid& g = path.grid();
  const double h = isotropic_spacing(g);
  const auto& counts = g.counts();
  const auto d = static_cast<std::size_t>(path.d());
  double sum = 0.0;
  std::size_t pairs = 0;
  std::size_t stride = path.size();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    stride /= counts[j];
    for (std::size_t i = 0; i < path.size(); ++i) {
      if ((i / stride) % counts[j] + 1 == counts[j]) continue;
      const auto a = path.at(i), b = path.at(i + stride);
      for (std::size_t c = 0; c < d; ++c) sum += (b[c] - a[c]) * (b[c] - a[c]);
      ++pairs;
    }
  }
  if (pairs == 0) throw DomainError("increment scale needs at least two points along some axis");
  return std::sqrt(sum / static_cast<double>(pairs * d)) / std::pow(h, alpha);
}

CellSet extract_level_set(const SamplePath& path, std::span<const double> z, const LevelSetTolerance& tol) {
  if (z.size() != static_cast<std::size_t>(path.d())) throw DomainError("level z has the wrong dimension");
  const Grid& g = path.grid();
  const double h = isotropic_spacing(g);
  double t = tol.value(h);
  if (tol.path_scaled && !tol.fixed) t *= increment_scale(path, tol.alpha);
  std::vector<std::int64_t> raw;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto v = path.at(i);
    double s = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) s += (v[c] - z[c]) * (v[c] - z[c]);
    if (std::sqrt(s) <= t) {
      const auto idx = g.unravel(i);
      raw.insert(raw.end(), idx.begin(), idx.end());
    }
  }
  return CellSet::make(g.dim(), h, g.origin(), std::move(raw));
}

BoxDimension box_dimension(const CellSet& cells, std::vector<double> scales) {
  std::vector<double> coords(cells.indices.size());
  for (std::size_t k = 0; k < coords.size(); ++k) coords[k] = static_cast<double>(cells.indices[k]) * cells.cell;
  return fit_dimension(coords, cells.dim, std::move(scales));
}

BoxDimension box_dimension(std::span<const double> points, std::size_t dim, std::span<const double> anchor,
                           std::vector<double> scales) {
  if (dim == 0 || points.size() % dim != 0 || anchor.size() != dim) throw DomainError("point cloud shape mismatch");
  std::vector<double> coords(points.begin(), points.end());
  for (std::size_t k = 0; k < coords.size(); ++k) coords[k] -= anchor[k % dim];
  return fit_dimension(coords, dim, std::move(scales));
}

std::vector<double> range_points(const SamplePath& path, const Box& J) {
  std::vector<double> out;
  for (auto i : points_in(path.grid(), J)) {
    const auto v = path.at(i);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

CellSet range_cells(const SamplePath& path, const Box& J, double cell) {
  if (!(cell > 0.0)) throw DomainError("range cell must be positive");
  const auto pts = range_points(path, J);
  std::vector<std::int64_t> raw(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) raw[k] = static_cast<std::int64_t>(std::floor(pts[k] / cell));
  const auto d = static_cast<std::size_t>(path.d());
  return CellSet::make(d, cell, std::vector<double>(d, 0.0), std::move(raw));
}

double good_radius(int q, double K1, double alpha) {
  if (q < 2) throw DomainError("good cubes need order >= 2");
  return 4.0 * K1 * std::pow(2.0, -q * alpha) * std::pow(std::log(q * std::numbers::ln2), -alpha);
}

double bad_radius(int p, double K2, double alpha) {
  return K2 * std::pow(2.0, -2.0 * p * alpha) * std::sqrt(static_cast<double>(p));
}

CoverReport adaptive_cover(const SamplePath& path, const Box& J, int p, double K1_hat, double K2_hat, double alpha,
                           const CoverOptions& opts) {
  if (p < 2 || p > 15) throw DomainError("cover order p must lie in [2, 15]");
  if (!(K1_hat > 0.0 && K2_hat > 0.0)) throw DomainError("cover constants must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const Grid& g = path.grid();
  const std::size_t N = g.dim(), d = static_cast<std::size_t>(path.d());
  if (J.dim() != N) throw DomainError("J has the wrong dimension");
  if (opts.z && opts.z->size() != d) throw DomainError("cover z has the wrong dimension");
  const double h = isotropic_spacing(g);
  const int top = 2 * p;
  const double side_top = std::ldexp(1.0, -top);
  const double m = nearest_integer_or_throw(
      side_top / h, "grid does not resolve order-2p cubes: spacing must divide 2^{-2p}; refine the grid or lower p");
  if (m < 1) throw ResolutionError("grid coarser than the order-2p cubes; refine the grid or lower p");
  const auto step = static_cast<std::size_t>(m);

  std::vector<std::size_t> offset(N), n_top(N);
  for (std::size_t j = 0; j < N; ++j) {
    nearest_integer_or_throw(std::ldexp(J.lo[j], p), "J corners must lie on the order-p dyadic lattice");
    nearest_integer_or_throw(std::ldexp(J.hi[j], p), "J corners must lie on the order-p dyadic lattice");
    if (!(J.hi[j] > J.lo[j])) throw DomainError("J must have positive volume");
    const double off = nearest_integer_or_throw((J.lo[j] - g.origin()[j]) / h, "grid is not aligned with J");
    if (off < 0) throw ResolutionError("J extends below the grid");
    offset[j] = static_cast<std::size_t>(off);
    n_top[j] = static_cast<std::size_t>(std::llround((J.hi[j] - J.lo[j]) / side_top));
    if (offset[j] + n_top[j] * step > g.counts()[j] - 1) throw ResolutionError("J extends beyond the grid");
  }

  // min/max per component for each cube, finest order first
  const int levels = top - p + 1;
  std::vector<std::vector<std::size_t>> sizes(static_cast<std::size_t>(levels));
  std::vector<std::vector<double>> lo(static_cast<std::size_t>(levels)), hi(static_cast<std::size_t>(levels));
  auto count_of = [](const std::vector<std::size_t>& n) {
    std::size_t c = 1;
    for (auto v : n) c *= v;
    return c;
  };
  auto unravel = [](std::size_t flat, const std::vector<std::size_t>& n) {
    std::vector<std::size_t> idx(n.size());
    for (std::size_t j = n.size(); j-- > 0;) {
      idx[j] = flat % n[j];
      flat /= n[j];
    }
    return idx;
  };
  auto ravel = [](const std::vector<std::size_t>& idx, const std::vector<std::size_t>& n) {
    std::size_t f = 0;
    for (std::size_t j = 0; j < n.size(); ++j) f = f * n[j] + idx[j];
    return f;
  };
  {
    const std::size_t L = static_cast<std::size_t>(levels - 1);
    sizes[L] = n_top;
    const std::size_t C = count_of(n_top);
    lo[L].assign(C * d, INFINITY);
    hi[L].assign(C * d, -INFINITY);
    // closed cubes: each grid point updates every cube whose closure holds it
    std::vector<std::size_t> gi(N);
    std::vector<std::size_t> span_lo(N), span_hi(N), cube(N);
    std::vector<std::size_t> local(N), local_n(N);
    std::size_t total = 1;
    for (std::size_t j = 0; j < N; ++j) {
      local_n[j] = n_top[j] * step + 1;
      total *= local_n[j];
    }
    for (std::size_t flat = 0; flat < total; ++flat) {
      local = unravel(flat, local_n);
      for (std::size_t j = 0; j < N; ++j) {
        gi[j] = offset[j] + local[j];
        const std::size_t c = local[j] / step;
        span_hi[j] = std::min(c, n_top[j] - 1);
        span_lo[j] = (local[j] % step == 0 && c > 0) ? c - 1 : span_hi[j];
      }
      const auto v = path.at(g.ravel(gi));
      cube = span_lo;
      for (;;) {
        const std::size_t k = ravel(cube, n_top);
        for (std::size_t c = 0; c < d; ++c) {
          lo[L][k * d + c] = std::min(lo[L][k * d + c], v[c]);
          hi[L][k * d + c] = std::max(hi[L][k * d + c], v[c]);
        }
        std::size_t j = N;
        bool done = true;
        while (j-- > 0) {
          if (++cube[j] <= span_hi[j]) {
            done = false;
            break;
          }
          cube[j] = span_lo[j];
        }
        if (done) break;
      }
    }
  }
  for (int L = levels - 2; L >= 0; --L) {
    const auto& child_n = sizes[static_cast<std::size_t>(L + 1)];
    auto& n = sizes[static_cast<std::size_t>(L)];
    n.resize(N);
    for (std::size_t j = 0; j < N; ++j) n[j] = child_n[j] / 2;
    const std::size_t C = count_of(n);
    lo[static_cast<std::size_t>(L)].assign(C * d, INFINITY);
    hi[static_cast<std::size_t>(L)].assign(C * d, -INFINITY);
    const std::size_t Cc = count_of(child_n);
    for (std::size_t k = 0; k < Cc; ++k) {
      auto idx = unravel(k, child_n);
      for (auto& v : idx) v /= 2;
      const std::size_t parent = ravel(idx, n);
      for (std::size_t c = 0; c < d; ++c) {
        auto& pl = lo[static_cast<std::size_t>(L)][parent * d + c];
        auto& ph = hi[static_cast<std::size_t>(L)][parent * d + c];
        pl = std::min(pl, lo[static_cast<std::size_t>(L + 1)][k * d + c]);
        ph = std::max(ph, hi[static_cast<std::size_t>(L + 1)][k * d + c]);
      }
    }
  }

  CoverReport rep;
  rep.p = p;
  rep.K1 = K1_hat;
  rep.K2 = K2_hat;
  for (int q = p; q <= top; ++q) rep.orders.push_back(q);
  rep.good_counts.assign(rep.orders.size(), 0);
  rep.range_gauge = GaugeFunction::range(static_cast<int>(N), alpha);
  rep.level_gauges = opts.level_gauges;
  if (opts.z && rep.level_gauges.empty())
    rep.level_gauges.push_back(GaugeFunction::level(static_cast<int>(N), static_cast<int>(d), alpha));
  rep.level_sums.assign(rep.level_gauges.size(), 0.0);

  const double r_bad = bad_radius(p, K2_hat, alpha);
  std::vector<std::size_t> vertex(N);
  auto select = [&](int q, const std::vector<std::size_t>& idx, double radius) {
    const double side = std::ldexp(1.0, -q);
    rep.covered_volume += std::pow(side, static_cast<double>(N));
    rep.range_sum += rep.range_gauge(2.0 * radius);
    if (!opts.z) return;
    // lower-left vertex s_C
    const std::size_t stride = step << static_cast<unsigned>(top - q);
    for (std::size_t j = 0; j < N; ++j) vertex[j] = offset[j] + idx[j] * stride;
    const auto v = path.at(g.ravel(vertex));
    double dist = 0.0;
    for (std::size_t c = 0; c < d; ++c) dist += (v[c] - (*opts.z)[c]) * (v[c] - (*opts.z)[c]);
    if (std::sqrt(dist) <= 2.0 * radius) {
      ++rep.level_cubes;
      const double diam = std::sqrt(static_cast<double>(N)) * side;
      for (std::size_t k = 0; k < rep.level_gauges.size(); ++k) rep.level_sums[k] += rep.level_gauges[k](diam);
    }
  };
  std::function<void(int, const std::vector<std::size_t>&)> visit = [&](int q, const std::vector<std::size_t>& idx) {
    const std::size_t L = static_cast<std::size_t>(q - p);
    const std::size_t k = ravel(idx, sizes[L]);
    double osc2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double w = hi[L][k * d + c] - lo[L][k * d + c];
      osc2 += w * w;
    }
    const double rg = good_radius(q, K1_hat, alpha);
    if (std::sqrt(osc2) <= rg) {
      ++rep.good_counts[L];
      select(q, idx, rg);
      return;
    }
    if (q == top) {
      ++rep.bad_count;
      select(q, idx, r_bad);
      return;
    }
    std::vector<std::size_t> child(N);
    for (std::size_t corner = 0; corner < (std::size_t{1} << N); ++corner) {
      for (std::size_t j = 0; j < N; ++j) child[j] = 2 * idx[j] + ((corner >> (N - 1 - j)) & 1u);
      visit(q + 1, child);
    }
  };
  const std::size_t roots = count_of(sizes[0]);
  for (std::size_t k = 0; k < roots; ++k) visit(p, unravel(k, sizes[0]));
  return rep;
}

double local_time_estimate(const SamplePath& path, std::span<const double> z, const Box& J, double eps) {
  if (!(eps > 0.0)) throw DomainError("local time bandwidth must be positive");
  if (z.size() != static_cast<std::size_t>(path.d())) throw DomainError("level z has the wrong dimension");
  std::size_t hits = 0;
  for (auto i : points_in(path.grid(), J)) {
    const auto v = path.at(i);
    double s = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) s += (v[c] - z[c]) * (v[c] - z[c]);
    if (std::sqrt(s) <= eps) ++hits;
  }
  const double d = static_cast<double>(z.size());
  const double ball = std::pow(std::numbers::pi, d / 2) / std::tgamma(d / 2 + 1) * std::pow(eps, d);
  return static_cast<double>(hits) * path.grid().cell_volume() / ball;
}

}  // namespace sectorial::fractal
