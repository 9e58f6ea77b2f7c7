#include "sectorial/models/field_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sectorial/util/errors.hpp"

namespace sectorial::models {

double Box::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
  return v;
}

bool Box::contains(std::span<const double> x, double slack) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    const double tol = slack * (1.0 + std::abs(hi[j] - lo[j]));
    if (x[j] < lo[j] - tol || x[j] > hi[j] + tol) return false;
  }
  return true;
}

Box Box::cube(std::size_t n, double lo, double hi) {
  return Box{std::vector<double>(n, lo), std::vector<double>(n, hi)};
}

std::string family_name(Family f) {
  switch (f) {
    case Family::FractionalBrownianSheet: return "fractional_brownian_sheet";
    case Family::BrownianSheet: return "brownian_sheet";
    case Family::WaveWhite: return "wave_white";
    case Family::WaveColored: return "wave_colored";
  }
  return "unknown";
}

namespace {

void check_box(const Box& b, int n) {
  if (static_cast<int>(b.lo.size()) != n || static_cast<int>(b.hi.size()) != n)
    throw DomainError("domain dimension does not match the parameter dimension");
  for (int j = 0; j < n; ++j)
    if (!(b.lo[j] < b.hi[j]) || !std::isfinite(b.lo[j]) || !std::isfinite(b.hi[j]))
      throw DomainError("domain must be a nondegenerate compact interval");
}

}  // namespace

FieldModel::FieldModel(Family f, int n, int d, double alpha, double beta, Box domain,
                       QuadratureSpec quad)
    : family_(f), n_(n), d_(d), alpha_(alpha), beta_(beta), domain_(std::move(domain)), quad_(quad) {
  if (n < 1) throw DomainError("N must be a positive integer");
  if (d < 1) throw DomainError("d must be a positive integer");
  check_box(domain_, n);
  if (is_sheet()) {
    for (int j = 0; j < n; ++j)
      if (!(domain_.lo[j] > 0.0)) throw DomainError("sheet domain must lie in (0, inf)^N");
  } else {
    if (!(domain_.lo[0] + domain_.lo[1] > 0.0))
      throw DomainError("wave domain must lie in {eta + theta > 0}");
  }
}

FieldModel FieldModel::fractional_sheet(int n, int d, double alpha, Box domain) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  const Family f = alpha == 0.5 ? Family::BrownianSheet : Family::FractionalBrownianSheet;
  return FieldModel(f, n, d, alpha, 0.0, std::move(domain), {});
}

FieldModel FieldModel::brownian_sheet(int n, int d, Box domain) {
  return FieldModel(Family::BrownianSheet, n, d, 0.5, 0.0, std::move(domain), {});
}

FieldModel FieldModel::wave_white(int d, Box domain) {
  return FieldModel(Family::WaveWhite, 2, d, 0.5, 1.0, std::move(domain), {});
}

FieldModel FieldModel::wave_colored(int d, double beta, Box domain, QuadratureSpec quad) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("colored-noise beta must lie in (0,1)");
  return FieldModel(Family::WaveColored, 2, d, (2.0 - beta) / 2.0, beta, std::move(domain), quad);
}

bool FieldModel::admissible(std::span<const double> x) const {
  if (!domain_.contains(x, 1e-12)) return false;
  if (is_wave()) return x[0] + x[1] >= 0.0;
  for (double c : x)
    if (c < 0.0) return false;
  return true;
}

void FieldModel::require_admissible(std::span<const double> x, const char* what) const {
  if (!admissible(x)) throw DomainError(std::string(what) + " lies outside the model domain");
}

std::string FieldModel::tag() const {
  std::ostringstream os;
  os.precision(6);
  switch (family_) {
    case Family::BrownianSheet: os << "bs_N" << n_ << "_d" << d_; break;
    case Family::FractionalBrownianSheet: os << "fbs_N" << n_ << "_d" << d_ << "_a" << alpha_; break;
    case Family::WaveWhite: os << "wave_white_d" << d_; break;
    case Family::WaveColored: os << "wave_colored_d" << d_ << "_b" << beta_; break;
  }
  return os.str();
}

Point to_rotated(double t, double x) {
  return {(t - x) / std::numbers::sqrt2, (t + x) / std::numbers::sqrt2};
}

Point to_time_space(double eta, double theta) {
  return {(eta + theta) / std::numbers::sqrt2, (theta - eta) / std::numbers::sqrt2};
}

}  // namespace sectorial::models
