#pragma once

namespace sectorial::models {

// phi(r) = r^s (log log(1/r))^k.
//
// The raw formula has no meaning for r >= 1/e and is not monotone just below
// it. Above r_freeze (the point where the raw log-derivative vanishes) the
// loglog factor is frozen at its value there, which keeps phi continuous,
// nondecreasing and doubling everywhere while leaving small-r behaviour,
// the only part a Hausdorff gauge cares about, unchanged.
class GaugeFunction {
 public:
  GaugeFunction(double s_exp, double k_exp);

  double operator()(double r) const;
  double raw(double r) const;  // requires 0 < r < 1/e

  double s_exp() const { return s_; }
  double k_exp() const { return k_; }
  double r_freeze() const { return r_freeze_; }

  // Range gauge r^{N/alpha} (loglog 1/r)^N.
  static GaugeFunction range(int n, double alpha);
  // Level-set gauge r^{N - alpha d} (loglog 1/r)^{alpha d}.
  static GaugeFunction level(int n, int d, double alpha);

 private:
  double s_;
  double k_;
  double r_freeze_;
};

}  // namespace sectorial::models
