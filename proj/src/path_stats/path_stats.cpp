#include "sectorial/path_stats/path_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sectorial/spectral/band_sampler.hpp"
#include "sectorial/util/errors.hpp"
#include "sectorial/util/parallel.hpp"
#include "sectorial/util/stats.hpp"

namespace sectorial::path_stats {

namespace {

constexpr double kSlack = 1e-9;  // in units of the grid spacing

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(s);
}

double image_diameter(const SamplePath& path, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  if (path.d() == 1) {
    double lo = path.value(idx[0]), hi = lo;
    for (auto i : idx) {
      lo = std::min(lo, path.value(i));
      hi = std::max(hi, path.value(i));
    }
    return hi - lo;
  }
  double best = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) best = std::max(best, distance(path.at(idx[a]), path.at(idx[b])));
  return best;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

std::size_t Window::size() const {
  std::size_t n = 1;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (hi[j] < lo[j]) return 0;
    n *= hi[j] - lo[j] + 1;
  }
  return n;
}

std::vector<std::size_t> Window::indices(const Grid& grid) const {
  std::vector<std::size_t> out;
  const std::size_t n = size();
  if (n == 0) return out;
  out.reserve(n);
  std::vector<std::size_t> idx(lo);
  for (;;) {
    out.push_back(grid.ravel(idx));
    std::size_t j = lo.size();
    while (j > 0) {
      --j;
      if (++idx[j] <= hi[j]) break;
      idx[j] = lo[j];
      if (j == 0) return out;
    }
  }
}

Window window(const Grid& grid, std::span<const double> s, double r) {
  if (s.size() != grid.dim()) throw DomainError("window centre has the wrong dimension");
  if (!(r >= 0.0)) throw DomainError("window radius must be >= 0");
  Window w;
  for (std::size_t j = 0; j < grid.dim(); ++j) {
    const double h = grid.spacing()[j], o = grid.origin()[j];
    const double last = static_cast<double>(grid.counts()[j] - 1);
    const double a = std::max(0.0, std::ceil((s[j] - r - o) / h - kSlack));
    const double b = std::min(last, std::floor((s[j] + r - o) / h + kSlack));
    if (b < a) {
      w.lo.push_back(1);
      w.hi.push_back(0);
    } else {
      w.lo.push_back(static_cast<std::size_t>(a));
      w.hi.push_back(static_cast<std::size_t>(b));
    }
  }
  return w;
}

SojournResult sojourn_time(const SamplePath& path, std::span<const double> s, double r) {
  const Grid& g = path.grid();
  const std::size_t is = g.locate(s);
  const auto vs = path.at(is);
  std::size_t count = 0;
  for (std::size_t i = 0; i < path.size(); ++i)
    if (distance(path.at(i), vs) <= r) ++count;
  return {Point(s.begin(), s.end()), r, static_cast<double>(count) * g.cell_volume(), g.cell_volume()};
}

bool SojournSurvey::r_stable() const { return !k_hat.empty() && k_spread <= k_tolerance; }

SojournSurvey sojourn_moment_survey(const core::GaussianEnsemble& ens, std::span<const double> s,
                                    const SojournSurveySpec& spec, std::uint64_t seed, int threads) {
  if (spec.n_max < 1 || spec.n_max > 4) throw DomainError("sojourn n_max must lie in [1, 4]");
  if (spec.reps < 1000) throw DomainError("sojourn survey needs reps >= 1000");
  if (spec.r_list.empty()) throw DomainError("sojourn survey needs radii");
  const Grid& g = ens.grid();
  const std::size_t is = g.locate(s);
  const auto& model = ens.model();
  const double alpha = model.alpha(), N = model.n();

  SojournSurvey out;
  out.k_tolerance = spec.k_tolerance;
  out.spacing = g.max_spacing();
  for (double r : spec.r_list) {
    if (!(r > 0.0)) throw DomainError("sojourn radii must be positive");
    const double cells = std::pow(r, 1.0 / alpha) / out.spacing;
    if (cells < 8.0 * (1.0 - 1e-9)) {
      out.resolution_ok = false;
      out.resolution_note += "r=" + std::to_string(r) + ": r^(1/alpha)/h=" + std::to_string(cells) + " < 8; ";
    }
  }

  const std::size_t R = spec.r_list.size(), reps = static_cast<std::size_t>(spec.reps);
  std::vector<double> tau(reps * R);
  const double cell = g.cell_volume();
  util::parallel_for(reps, threads, [&](std::size_t k) {
    const SamplePath path = core::sample_path(ens, seed, k);
    const auto vs = path.at(is);
    std::vector<std::size_t> counts(R, 0);
    for (std::size_t i = 0; i < path.size(); ++i) {
      const double dist = distance(path.at(i), vs);
      for (std::size_t q = 0; q < R; ++q)
        if (dist <= spec.r_list[q]) ++counts[q];
    }
    for (std::size_t q = 0; q < R; ++q) tau[k * R + q] = static_cast<double>(counts[q]) * cell;
  });

  out.k_hat.assign(R, 0.0);
  std::vector<double> vals(reps);
  for (std::size_t q = 0; q < R; ++q) {
    const double r = spec.r_list[q];
    for (int n = 1; n <= spec.n_max; ++n) {
      for (std::size_t k = 0; k < reps; ++k) vals[k] = std::pow(tau[k * R + q], n);
      SojournMomentRow row;
      row.n = n;
      row.r = r;
      row.moment = util::mean(vals);
      const auto ci = util::bootstrap_mean_ci(vals, spec.bootstrap, seed, 0xB0 + 16 * q + static_cast<std::size_t>(n));
      row.ci_lo = ci.lo;
      row.ci_hi = ci.hi;
      row.ratio = row.moment / (std::pow(factorial(n), N) * std::pow(r, n * N / alpha));
      out.k_hat[q] = std::max(out.k_hat[q], std::pow(row.ratio, 1.0 / n));
      out.rows.push_back(row);
    }
  }
  const auto [mn, mx] = std::minmax_element(out.k_hat.begin(), out.k_hat.end());
  out.k_spread = *mn > 0.0 ? *mx / *mn - 1.0 : INFINITY;
  return out;
}

double sup_increment(const SamplePath& path, std::span<const double> s, double r) {
  const Grid& g = path.grid();
  const std::size_t is = g.locate(s);
  const auto idx = window(g, s, r).indices(g);
  if (idx.empty()) throw DomainError("empty window");
  double best = 0.0;
  for (auto i : idx) best = std::max(best, distance(path.at(i), path.at(is)));
  return best;
}

double window_diameter(const SamplePath& path, std::span<const double> s, double r) {
  const auto idx = window(path.grid(), s, r).indices(path.grid());
  if (idx.empty()) throw DomainError("empty window");
  return image_diameter(path, idx);
}

ModulusReport modulus_tail_check(const core::GaussianEnsemble& ens, std::span<const double> s, double r,
                                 const std::vector<double>& L_list, int reps, std::uint64_t seed, int threads) {
  if (!(r > 0.0 && r < 0.25)) throw DomainError("modulus window radius must lie in (0, 0.25)");
  if (reps < 1) throw DomainError("modulus check needs reps >= 1");
  if (L_list.empty()) throw DomainError("modulus check needs L values");
  const Grid& g = ens.grid();
  const auto idx = window(g, s, r).indices(g);
  if (idx.size() < 2) throw DomainError("modulus window holds fewer than two grid points");
  std::vector<double> diam(static_cast<std::size_t>(reps));
  util::parallel_for(diam.size(), threads, [&](std::size_t k) {
    diam[k] = image_diameter(core::sample_path(ens, seed, k), idx);
  });

  ModulusReport out;
  out.r = r;
  out.reps = reps;
  std::vector<double> L(L_list);
  std::sort(L.begin(), L.end());
  const double scale = std::pow(r, ens.model().alpha()) * std::sqrt(std::log(1.0 / r));
  std::vector<double> xs, ys;
  for (double l : L) {
    ModulusRow row;
    row.L = l;
    row.hits = static_cast<int>(std::count_if(diam.begin(), diam.end(), [&](double v) { return v >= l * scale; }));
    row.frequency = static_cast<double>(row.hits) / reps;
    row.censored = row.hits == 0;
    if (!row.censored) row.exponent = -std::log(row.frequency) / std::log(1.0 / r);
    if (!out.rows.empty() && row.frequency > out.rows.back().frequency) out.monotone = false;
    if (row.hits >= 10) {
      xs.push_back(l * l);
      ys.push_back(row.exponent);
    }
    out.rows.push_back(row);
  }
  out.estimable = static_cast<int>(xs.size());
  if (xs.size() >= 2) out.quadratic_slope = util::fit_line(xs, ys).slope;
  return out;
}

double SmallBallReport::drift() const {
  if (!(k0_hat_half > 0.0)) return INFINITY;
  return std::abs(k0_hat / k0_hat_half - 1.0);
}

namespace {

void fill_small_ball_rows(const std::vector<double>& sups, std::size_t used, const std::vector<double>& eps_list,
                          double r, double alpha, std::vector<SmallBallRow>* rows, double* k0) {
  *k0 = 0.0;
  for (double eps : eps_list) {
    SmallBallRow row;
    row.eps = eps;
    row.successes = static_cast<int>(std::count_if(sups.begin(), sups.begin() + static_cast<std::ptrdiff_t>(used),
                                                   [&](double v) { return v <= eps; }));
    const double n = static_cast<double>(used);
    row.p_hat = row.successes / n;
    row.censored = row.successes == 0;
    // exact one-sided 95% upper bound on p for zero successes
    row.neg_log_p = row.censored ? -std::log1p(-std::pow(0.05, 1.0 / n)) : -std::log(row.p_hat);
    row.k0 = row.neg_log_p * std::pow(eps, 1.0 / alpha) / r;
    if (!row.censored) *k0 = std::max(*k0, row.k0);
    if (rows) rows->push_back(row);
  }
}

}  // namespace

SmallBallReport band_small_ball(const FieldModel& model, const spectral::BandSpec& band, const Point& s, double r,
                                const SmallBallSpec& spec, std::uint64_t seed,
                                const spectral::SpectralDiscretization& disc, int threads) {
  band.validate(model);
  const int N = model.n();
  if (N > 2) throw DomainError("band_small_ball supports N <= 2");
  if (s.size() != static_cast<std::size_t>(N)) throw DomainError("centre has the wrong dimension");
  model.require_admissible(s, "small-ball centre");
  if (!(r > 0.0)) throw DomainError("small-ball radius must be positive");
  if (spec.reps < 2) throw DomainError("small-ball needs reps >= 2");
  if (spec.points_per_axis < 2) throw DomainError("small-ball needs >= 2 points per axis");
  if (spec.eps_list.empty()) throw DomainError("small-ball needs eps values");
  const double alpha = model.alpha();
  for (double e : spec.eps_list)
    if (!(e > 0.0 && e < std::pow(r, alpha))) throw DomainError("small-ball eps must lie in (0, r^alpha)");

  // point 0 is s; then G points on each axis line through s
  const std::size_t G = spec.points_per_axis;
  std::vector<Point> pts{s};
  for (int j = 0; j < N; ++j) {
    const double lo = std::max(model.domain().lo[static_cast<std::size_t>(j)], s[static_cast<std::size_t>(j)] - r);
    const double hi = std::min(model.domain().hi[static_cast<std::size_t>(j)], s[static_cast<std::size_t>(j)] + r);
    for (std::size_t i = 0; i < G; ++i) {
      Point p = s;
      p[static_cast<std::size_t>(j)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(G - 1);
      model.require_admissible(p, "small-ball window");
      pts.push_back(std::move(p));
    }
  }
  const spectral::BandSampler sampler(model, band.a, band.b, pts, disc);
  const std::size_t d = static_cast<std::size_t>(model.d()), P = pts.size();
  std::vector<double> sups(static_cast<std::size_t>(spec.reps));
  util::parallel_for(sups.size(), threads, [&](std::size_t k) {
    // axis[j][i*d + c] = vt^j(x_j) component c
    std::vector<std::vector<double>> axis(static_cast<std::size_t>(N), std::vector<double>(G * d));
    std::vector<double> out(P);
    for (std::size_t c = 0; c < d; ++c) {
      sampler.draw(seed, k, static_cast<std::uint32_t>(c), out);
      for (int j = 0; j < N; ++j)
        for (std::size_t i = 0; i < G; ++i)
          axis[static_cast<std::size_t>(j)][i * d + c] = out[1 + static_cast<std::size_t>(j) * G + i] - out[0];
    }
    double best = 0.0;
    if (N == 1) {
      for (std::size_t i = 0; i < G; ++i) {
        double q = 0.0;
        for (std::size_t c = 0; c < d; ++c) q += axis[0][i * d + c] * axis[0][i * d + c];
        best = std::max(best, q);
      }
    } else {
      for (std::size_t i = 0; i < G; ++i)
        for (std::size_t m = 0; m < G; ++m) {
          double q = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            const double v = axis[0][i * d + c] + axis[1][m * d + c];
            q += v * v;
          }
          best = std::max(best, q);
        }
    }
    sups[k] = std::sqrt(best);
  });

  SmallBallReport rep;
  rep.r = r;
  rep.reps = spec.reps;
  fill_small_ball_rows(sups, sups.size(), spec.eps_list, r, alpha, &rep.rows, &rep.k0_hat);
  fill_small_ball_rows(sups, sups.size() / 2, spec.eps_list, r, alpha, nullptr, &rep.k0_hat_half);
  return rep;
}

std::vector<double> dyadic_radii(double r_min, double r_max) {
  if (!(r_min > 0.0 && r_min <= r_max)) throw DomainError("need 0 < r_min <= r_max");
  std::vector<double> out;
  for (double r = r_max; r >= r_min * (1.0 - 1e-12); r *= 0.5) out.push_back(r);
  return out;
}

double chung_normalizer(double r, double alpha) {
  if (!(r > 0.0 && r < std::exp(-1.0))) throw DomainError("Chung normalizer needs 0 < r < 1/e");
  return std::pow(r, alpha) * std::pow(std::log(std::log(1.0 / r)), -alpha);
}

namespace {

ChungStatistic finish_chung(Point s, std::vector<double> radii, std::vector<double> sups, double alpha) {
  ChungStatistic st;
  st.s = std::move(s);
  st.r_values = std::move(radii);
  st.min_over_r = INFINITY;
  for (std::size_t k = 0; k < st.r_values.size(); ++k) {
    const double v = sups[k] / chung_normalizer(st.r_values[k], alpha);
    st.normalized_sups.push_back(v);
    st.min_over_r = std::min(st.min_over_r, v);
  }
  return st;
}

}  // namespace

ChungStatistic chung_statistic(const SamplePath& path, std::span<const double> s, double r_min, double r_max,
                               double alpha) {
  if (!(r_max < std::exp(-1.0))) throw DomainError("Chung statistic needs r_max < 1/e");
  if (r_min < 4.0 * path.grid().max_spacing() * (1.0 - 1e-12))
    throw ResolutionError("Chung statistic needs r_min >= 4 grid spacings; refine the grid or raise r_min");
  auto radii = dyadic_radii(r_min, r_max);
  std::vector<double> sups;
  for (double r : radii) sups.push_back(sup_increment(path, s, r));
  return finish_chung(Point(s.begin(), s.end()), std::move(radii), std::move(sups), alpha);
}

ChungStatistic chung_statistic_tx(const std::vector<Point>& tx_points, std::span<const double> values, int d,
                                  const Point& s_tx, double r_min, double r_max, double alpha) {
  if (d < 1 || values.size() != tx_points.size() * static_cast<std::size_t>(d))
    throw DomainError("values do not match the point list");
  if (!(r_max < std::exp(-1.0))) throw DomainError("Chung statistic needs r_max < 1/e");
  const auto it = std::find(tx_points.begin(), tx_points.end(), s_tx);
  if (it == tx_points.end()) throw DomainError("centre is not one of the points");
  const auto du = static_cast<std::size_t>(d);
  const std::size_t is = static_cast<std::size_t>(it - tx_points.begin());
  const std::span<const double> vs = values.subspan(is * du, du);
  const Point rs = models::to_rotated(s_tx[0], s_tx[1]);
  auto radii = dyadic_radii(r_min, r_max);
  std::vector<double> sups;
  for (double r : radii) {
    const double slack = 1e-10 * r;
    double best = 0.0;
    for (std::size_t i = 0; i < tx_points.size(); ++i) {
      const Point p = models::to_rotated(tx_points[i][0], tx_points[i][1]);
      if (std::abs(p[0] - rs[0]) <= r + slack && std::abs(p[1] - rs[1]) <= r + slack)
        best = std::max(best, distance(values.subspan(i * du, du), vs));
    }
    sups.push_back(best);
  }
  return finish_chung(s_tx, std::move(radii), std::move(sups), alpha);
}

ChungEnsemble chung_ensemble(const core::GaussianEnsemble& ens, std::span<const double> s, double r_min,
                             double r_max, std::size_t count, std::uint64_t seed, int threads) {
  if (count < 1) throw DomainError("Chung ensemble needs count >= 1");
  ChungEnsemble out;
  out.stats.resize(count);
  const double alpha = ens.model().alpha();
  util::parallel_for(count, threads, [&](std::size_t k) {
    out.stats[k] = chung_statistic(core::sample_path(ens, seed, k), s, r_min, r_max, alpha);
  });
  for (const auto& st : out.stats) out.minima.push_back(st.min_over_r);
  out.q05 = util::quantile(out.minima, 0.05);
  out.q10 = util::quantile(out.minima, 0.10);
  out.q95 = util::quantile(out.minima, 0.95);
  return out;
}

double chung_event_frequency(const std::vector<ChungStatistic>& stats, double r0, double K) {
  if (stats.empty()) throw DomainError("no Chung statistics");
  if (!(r0 > 0.0 && r0 < 1.0)) throw DomainError("r0 must lie in (0, 1)");
  std::size_t hits = 0;
  for (const auto& st : stats) {
    bool good = false;
    for (std::size_t k = 0; k < st.r_values.size(); ++k) {
      const double r = st.r_values[k];
      if (r <= r0 * (1 + 1e-12) && r >= r0 * r0 * (1 - 1e-12) && st.normalized_sups[k] <= K) good = true;
    }
    hits += good;
  }
  return static_cast<double>(hits) / static_cast<double>(stats.size());
}

}  // namespace sectorial::path_stats
