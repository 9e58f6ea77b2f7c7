#include "sectorial/spectral/remainder.hpp"

#include <algorithm>
#include <cmath>

#include "sectorial/models/covariance.hpp"
#include "sectorial/spectral/wave_kernel.hpp"
#include "sectorial/util/errors.hpp"
#include "sectorial/util/parallel.hpp"
#include "sectorial/util/rng.hpp"

namespace sectorial::spectral {

double TildeParts::l2() const { return std::sqrt(std::max(0.0, outside) + std::max(0.0, inside)); }

namespace {

// Evaluation points and the two coefficient vectors: d for v(x) - v(y), e for
// vt(x) - vt(y) (the v(s) terms cancel).
struct Setup {
  std::vector<Point> pts;
  Eigen::VectorXd d, e;
};

Setup make_setup(const Point& s, const Point& x, const Point& y) {
  const std::size_t n = s.size();
  Setup st;
  st.pts = {x, y};
  for (std::size_t j = 0; j < n; ++j) {
    Point px = s, py = s;
    px[j] = x[j];
    py[j] = y[j];
    st.pts.push_back(px);
    st.pts.push_back(py);
  }
  const auto m = static_cast<Eigen::Index>(st.pts.size());
  st.d = Eigen::VectorXd::Zero(m);
  st.e = Eigen::VectorXd::Zero(m);
  st.d(0) = 1.0;
  st.d(1) = -1.0;
  for (std::size_t j = 0; j < n; ++j) {
    st.e(static_cast<Eigen::Index>(2 + 2 * j)) = 1.0;
    st.e(static_cast<Eigen::Index>(3 + 2 * j)) = -1.0;
  }
  return st;
}

Eigen::MatrixXd full_covariance(const FieldModel& model, const std::vector<Point>& pts) {
  const auto m = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd K(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      K(i, j) = K(j, i) = models::model_covariance(model, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
  return K;
}

TildeParts parts_from(const Setup& st, const Eigen::MatrixXd& full, const Eigen::MatrixXd& band) {
  TildeParts p;
  const double var_d = st.d.dot(full * st.d);
  p.outside = std::max(0.0, var_d - st.d.dot(band * st.d));
  const Eigen::VectorXd diff = st.d - st.e;
  p.inside = std::max(0.0, diff.dot(band * diff));
  return p;
}

void check_window(const FieldModel& model, const BandSpec& band, const Point& x, const Point& y, double r) {
  band.validate(model);
  if (model.is_sheet() && model.n() > 2) throw DomainError("the tilde decomposition is limited to N <= 2");
  if (static_cast<int>(band.s.size()) != model.n()) throw DomainError("band base point s is required");
  if (!(r > 0.0 && r <= band.r0)) throw DomainError("r must lie in (0, r0]");
  if (band.a < band.a0) throw DomainError("band.a must be at least a0");
  const double slack = 1e-12 * std::max(1.0, r);
  for (std::size_t j = 0; j < band.s.size(); ++j)
    for (const Point* p : {&x, &y})
      if ((*p)[j] < band.s[j] - slack || (*p)[j] > band.s[j] + r + slack)
        throw DomainError("points must lie in prod_j [s_j, s_j + r]");
}

double pair_distance(const FieldModel& model, const Point& x, const Point& y) {
  double l1 = 0.0, l2 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    l1 += std::abs(x[j] - y[j]);
    l2 += (x[j] - y[j]) * (x[j] - y[j]);
  }
  return model.is_sheet() ? std::sqrt(l2) : l1;
}

}  // namespace

TildeParts tilde_decomposition_parts(const FieldModel& model, const BandSpec& band, const Point& x, const Point& y,
                                     double r, const SpectralDiscretization& disc) {
  check_window(model, band, x, y, r);
  if (x == y) return {};
  const Setup st = make_setup(band.s, x, y);
  return parts_from(st, full_covariance(model, st.pts), band_covariance(model, st.pts, band.a, band.b, disc));
}

double tilde_decomposition_l2(const FieldModel& model, const BandSpec& band, const Point& x, const Point& y, double r,
                              const SpectralDiscretization& disc) {
  return tilde_decomposition_parts(model, band, x, y, r, disc).l2();
}

Envelope remainder_envelope(const FieldModel& model, const BandSpec& band, double r, const Point& x, const Point& y) {
  const double alpha = model.alpha();
  const double dist = pair_distance(model, x, y);
  Envelope e;
  e.low = band.a > 0.0 ? std::pow(band.a, 1.0 - alpha) * dist : 0.0;
  e.high = std::isfinite(band.b) ? std::pow(r, band.gamma1) * std::pow(band.b, band.gamma1 - alpha) : 0.0;
  e.local = std::pow(r, band.gamma2) * std::pow(dist, alpha);
  return e;
}

SweepReport remainder_bound_sweep(const FieldModel& model, const Point& s, const SweepSpec& sweep, std::uint64_t seed,
                                  const SpectralDiscretization& disc, int threads) {
  if (sweep.pairs < 2) throw DomainError("sweep needs at least 2 pairs per cell");
  if (sweep.r_values.empty() || sweep.a_values.empty() || sweep.b_values.empty())
    throw DomainError("sweep lists must be nonempty");
  for (double a : sweep.a_values)
    for (double b : sweep.b_values) BandSpec::for_model(model, s, a, b);  // validates every cell up front

  struct Task {
    std::size_t ri;
    int pair;
  };
  std::vector<Task> tasks;
  for (std::size_t ri = 0; ri < sweep.r_values.size(); ++ri)
    for (int k = 0; k < sweep.pairs; ++k) tasks.push_back({ri, k});
  const std::size_t cells = sweep.a_values.size() * sweep.b_values.size();
  std::vector<std::vector<SweepRow>> out(tasks.size());

  util::parallel_for(tasks.size(), threads, [&](std::size_t ti) {
    const Task& task = tasks[ti];
    const double r = sweep.r_values[task.ri];
    util::RandomStream rng(seed, static_cast<std::uint64_t>(task.pair), static_cast<std::uint32_t>(0xA2000 + task.ri));
    Point x(s.size()), y(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
      x[j] = rng.uniform(s[j], s[j] + r);
      y[j] = rng.uniform(s[j], s[j] + r);
    }
    auto& rows = out[ti];
    rows.reserve(cells);
    const Setup st = make_setup(s, x, y);
    const Eigen::MatrixXd full = full_covariance(model, st.pts);

    // Waves: one pass over the frequency boxes serves every (a, b) of this pair.
    std::vector<double> cuts;
    std::vector<Eigen::MatrixXd> boxes;
    if (model.is_wave()) {
      for (double a : sweep.a_values)
        if (a > 0.0) cuts.push_back(a);
      for (double b : sweep.b_values)
        if (std::isfinite(b)) cuts.push_back(b);
      boxes = wave_box_moments(st.pts, cuts, model.beta(), disc);
    }
    auto box = [&](double c) -> Eigen::MatrixXd {
      if (c == 0.0) return Eigen::MatrixXd::Zero(full.rows(), full.cols());
      if (!std::isfinite(c)) return full;
      return boxes[static_cast<std::size_t>(std::find(cuts.begin(), cuts.end(), c) - cuts.begin())];
    };

    for (double a : sweep.a_values)
      for (double b : sweep.b_values) {
        const BandSpec band = BandSpec::for_model(model, s, a, b);
        check_window(model, band, x, y, r);
        SweepRow row;
        row.r = r;
        row.a = a;
        row.b = b;
        row.pair = task.pair;
        row.x = x;
        row.y = y;
        row.envelope = remainder_envelope(model, band, r, x, y);
        row.degenerate = x == y || row.envelope.total() == 0.0;
        if (!row.degenerate) {
          const Eigen::MatrixXd K = model.is_wave() ? Eigen::MatrixXd(box(b) - box(a))
                                                    : band_covariance(model, st.pts, a, b, disc);
          row.remainder = parts_from(st, full, K).l2();
          row.ratio = row.remainder / row.envelope.total();
        }
        rows.push_back(std::move(row));
      }
  });

  SweepReport rep;
  for (auto& rows : out)
    for (auto& row : rows) {
      if (!row.degenerate) {
        rep.c2_hat = std::max(rep.c2_hat, row.ratio);
        if (row.pair < sweep.pairs / 2) rep.c2_hat_half = std::max(rep.c2_hat_half, row.ratio);
      }
      rep.rows.push_back(std::move(row));
    }
  rep.drift = rep.c2_hat_half > 0.0 ? (rep.c2_hat - rep.c2_hat_half) / rep.c2_hat_half : 0.0;
  return rep;
}

}  // namespace sectorial::spectral
