// Acceptance criteria, one per invocation: `acceptance <id>` or `acceptance all`.
// Every criterion goes through the same subcommands a user would run, with
// seed 1, and re-checks the numbers it needs from the run summaries against
// tolerances pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sectorial/cli/commands.hpp"

using namespace sectorial::cli;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "" : "!! ") + what);
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

fs::path out_root() {
  const char* env = std::getenv("SECTORIAL_ACCEPTANCE_OUT");
  return env ? fs::path(env) : fs::path(ACCEPTANCE_OUT);
}

RunOutcome run(const std::string& sub, const std::string& tag, const json& doc, Verdict& v) {
  const auto dir = out_root() / tag;
  fs::remove_all(dir);
  auto res = run_subcommand(sub, doc, RunOptions{kSeed, 1, dir.string()});
  if (!res.error.empty()) v.expect(false, tag + ": " + res.error);
  return res;
}

json box(std::vector<double> lo, std::vector<double> hi) { return {{"lo", lo}, {"hi", hi}}; }

json sheet(int n, int d, double alpha, json domain) {
  json m = {{"family", alpha == 0.5 ? "brownian_sheet" : "fractional_sheet"}, {"d", d}, {"domain", domain}};
  if (alpha != 0.5) m["alpha"] = alpha;
  (void)n;
  return m;
}

json wave_white(json domain) { return {{"family", "wave_white"}, {"d", 1}, {"domain", domain}}; }

double value(const RunOutcome& r, const json::json_pointer& p) {
  if (!r.summary.contains(p) || !r.summary[p].is_number()) return NAN;
  return r.summary[p].get<double>();
}

// ---------------------------------------------------------------- 1..4

Verdict cone_oracle() {
  Verdict v;
  const json doc = {{"model", wave_white(box({0.3, 0.3}, {1.3, 1.3}))},
                    {"experiment",
                     {{"cone", {{"pairs", 50}, {"t_range", {0.5, 2.0}}, {"x_range", {-1.0, 1.0}}}},
                      {"variance_scaling", {{"enabled", false}}}}}};
  const auto r = run("verify-cov", "c01_cone", doc, v);
  const double err = value(r, "/cone/max_rel_error"_json_pointer);
  v.expect(value(r, "/cone/pairs"_json_pointer) == 50, "50 pairs in [0.5,2]x[-1,1]");
  v.expect(err <= 1e-3, "max relative error " + num(err) + " <= 1e-3");
  return v;
}

Verdict variance_scaling() {
  Verdict v;
  for (double beta : {1.0, 0.5}) {
    json model = beta == 1.0 ? wave_white(box({0.3, 0.3}, {1.3, 1.3}))
                             : json{{"family", "wave_colored"}, {"beta", beta}, {"d", 1},
                                    {"domain", box({0.3, 0.3}, {1.3, 1.3})}};
    const json doc = {{"model", model}, {"experiment", {{"cone", {{"enabled", false}}}}}};
    const auto r = run("verify-cov", "c02_beta" + num(beta), doc, v);
    const double slope = value(r, "/variance_scaling/slope"_json_pointer);
    v.expect(std::abs(slope - (3.0 - beta)) <= 0.02,
             "beta " + num(beta) + ": slope " + num(slope) + " vs " + num(3.0 - beta) + " +- 0.02");
  }
  return v;
}

Verdict sampling() {
  Verdict v;
  for (double alpha : {0.3, 0.5, 0.7}) {
    const json doc = {{"model", sheet(2, 1, alpha, box({1, 1}, {2, 2}))},
                      {"grid", {{"counts", {12, 12}}, {"layout", "dense"}}},
                      {"experiment",
                       {{"spectral", {{"enabled", false}}}, {"monte_carlo", {{"reps", 10000}, {"se_limit", 5.0}}}}}};
    const auto r = run("verify-cov", "c03_alpha" + num(alpha), doc, v);
    const double worst = value(r, "/monte_carlo/max_standard_errors"_json_pointer);
    const double outside = value(r, "/monte_carlo/pairs_outside"_json_pointer);
    v.expect(outside == 0 && value(r, "/monte_carlo/reps"_json_pointer) == 10000,
             "alpha " + num(alpha) + ": worst pair " + num(worst) + " SE over 10440 pairs, limit 5");
  }
  return v;
}

Verdict spectral_representation() {
  Verdict v;
  struct Case {
    int n;
    double alpha, tol;
  };
  for (const auto& c : {Case{1, 0.3, 1e-3}, Case{1, 0.7, 1e-3}, Case{2, 0.3, 1e-2}, Case{2, 0.7, 1e-2}}) {
    const json dom = c.n == 1 ? box({0.5}, {2.0}) : box({0.5, 0.5}, {2.0, 2.0});
    const json doc = {{"model", sheet(c.n, 1, c.alpha, dom)},
                      {"experiment", {{"spectral", {{"pairs", 20}, {"tolerance", c.tol}}}}}};
    const auto r = run("verify-cov", "c04_N" + std::to_string(c.n) + "_alpha" + num(c.alpha), doc, v);
    const double err = value(r, "/spectral/max_rel_error"_json_pointer);
    v.expect(err <= c.tol, "N=" + std::to_string(c.n) + " alpha " + num(c.alpha) + ": max rel err " + num(err) +
                               " <= " + num(c.tol));
  }
  return v;
}

// ---------------------------------------------------------------- 5..8

Verdict lnd_positivity() {
  Verdict v;
  const std::vector<std::pair<std::string, json>> models = {
      {"bs", sheet(2, 1, 0.5, box({0.5, 0.5}, {2, 2}))},
      {"fbs07", sheet(2, 1, 0.7, box({0.5, 0.5}, {2, 2}))},
      {"wave", wave_white(box({0.3, 0.3}, {1.5, 1.5}))}};
  for (const auto& [tag, model] : models) {
    const json doc = {{"model", model}, {"experiment", {{"trials", 200}, {"n_points", 4}, {"stability", 0.25}}}};
    const auto r = run("verify-lnd", "c05_" + tag, doc, v);
    const double mn = value(r, "/min_ratio"_json_pointer), drift = value(r, "/drift"_json_pointer);
    v.expect(mn > 0.0 && drift <= 0.25, tag + ": min ratio " + num(mn) + ", doubled trials drift " + num(drift));
  }
  return v;
}

Verdict remainder_envelope() {
  Verdict v;
  const json fbs = {{"model", sheet(2, 1, 0.5, box({0.5, 0.5}, {2.5, 2.5}))},
                    {"experiment",
                     {{"s", {1.0, 1.0}}, {"r_values", {0.1, 0.05}}, {"a_values", {2, 8}}, {"b_values", {32, 128}},
                      {"pairs", 40}, {"drift_limit", 0.2}}}};
  const json wave = {{"model", wave_white(box({0.3, 0.3}, {1.5, 1.5}))},
                     {"experiment",
                      {{"s", {0.7, 0.7}}, {"r_values", {0.1, 0.05}}, {"a_values", {4, 8}}, {"b_values", {16, 32}},
                       {"pairs", 40}, {"drift_limit", 0.2}}}};
  for (const auto& [tag, doc] : {std::pair{"fbs", fbs}, std::pair{"wave", wave}}) {
    const auto r = run("verify-a2", std::string("c06_") + tag, doc, v);
    const double c2 = value(r, "/c2_hat"_json_pointer), drift = value(r, "/drift"_json_pointer);
    v.expect(std::isfinite(c2) && c2 > 0.0 && drift <= 0.2,
             std::string(tag) + ": c2_hat " + num(c2) + ", drift under doubling " + num(drift));
  }
  return v;
}

Verdict sojourn_moments() {
  Verdict v;
  // r^{1/alpha} = 0.0025 at r = 0.05 needs a fine grid; the window stays small.
  const json doc = {{"model", sheet(2, 3, 0.5, box({1.45, 1.45}, {1.55, 1.55}))},
                    {"grid", {{"counts", {321, 321}}, {"budget", 200000}}},
                    {"experiment",
                     {{"s", {1.5, 1.5}}, {"r_list", {0.1, 0.05}}, {"n_max", 3}, {"reps", 1000},
                      {"k_tolerance", 0.3}}}};
  const auto r = run("sojourn", "c07_sojourn", doc, v);
  const double spread = value(r, "/k_spread"_json_pointer);
  v.expect(r.summary.value("resolution_ok", false), "grid resolves r^(1/alpha)");
  v.expect(spread <= 0.3, "K-hat across r: max/min - 1 = " + num(spread) + " <= 0.3");
  return v;
}

Verdict small_ball() {
  Verdict v;
  const json doc = {{"model", sheet(2, 1, 0.5, box({1, 1}, {2, 2}))},
                    {"experiment",
                     {{"s", {1.5, 1.5}}, {"band", {{"a", 2}, {"b", 32}}}, {"r", 0.2}, {"reps", 4000},
                      {"drift_limit", 0.2}}}};
  const auto r = run("small-ball", "c08_small_ball", doc, v);
  const double k0 = value(r, "/k0_hat"_json_pointer), drift = value(r, "/drift"_json_pointer);
  v.expect(std::isfinite(k0) && k0 > 0.0, "K0-hat " + num(k0) + " finite");
  v.expect(drift <= 0.2, "K0-hat moves " + num(drift) + " between 2000 and 4000 replicates");
  return v;
}

// ---------------------------------------------------------------- 9..12

Verdict dimensions() {
  Verdict v;
  const json grid1025 = {{"counts", {1025, 1025}}, {"budget", 1100000}};
  const json bs = {{"model", sheet(2, 1, 0.5, box({1, 1}, {2, 2}))},
                   {"grid", grid1025},
                   {"experiment",
                    {{"target", "level_set"}, {"z", {0.0}}, {"min_paths", 200},
                     {"tolerance", {{"policy", "scaled"}, {"c", 1.0}}}, {"dyadic_scales", {{"from", 3}, {"to", 9}}},
                     {"expect", {{"tolerance", 0.15}}}}}};
  const json fbm = {{"model", sheet(1, 2, 0.7, box({1}, {2}))},
                    {"grid", {{"counts", {8193}}}},
                    {"experiment",
                     {{"target", "range"}, {"min_paths", 200}, {"anchor", {0.0, 0.0}},
                      {"dyadic_scales", {{"from", 3}, {"to", 8}}}, {"expect", {{"tolerance", 0.15}}}}}};
  json wgrid = grid1025;
  wgrid["layout"] = "wave_quadrant";
  const json wave = {{"model", wave_white(box({0.3, 0.3}, {1.3, 1.3}))},
                     {"grid", wgrid},
                     {"experiment",
                      {{"target", "level_set"}, {"z", {0.0}}, {"min_paths", 200},
                       {"tolerance", {{"policy", "scaled"}, {"c", 1.0}}}, {"dyadic_scales", {{"from", 3}, {"to", 9}}},
                       {"expect", {{"tolerance", 0.15}}}}}};
  const std::vector<std::tuple<std::string, json, double>> cases = {
      {"bs_level_set", bs, 1.5}, {"fbm_range", fbm, 1.0 / 0.7}, {"wave_level_set", wave, 1.5}};
  for (const auto& [tag, doc, want] : cases) {
    const auto r = run("dimension", "c09_" + tag, doc, v);
    const double med = value(r, "/median_slope"_json_pointer);
    const double valid = value(r, "/valid"_json_pointer);
    v.expect(valid >= 200 && std::abs(med - want) <= 0.15,
             tag + ": median " + num(med) + " over " + num(valid) + " paths, formula " + num(want) + " +- 0.15");
  }
  return v;
}

Verdict occupation() {
  Verdict v;
  const json doc = {{"model", sheet(2, 1, 0.5, box({1, 1}, {2, 2}))},
                    {"grid", {{"counts", {513, 513}}, {"budget", 300000}}},
                    {"experiment",
                     {{"count", 5}, {"eps", 0.05}, {"occupation", {{"step", 0.1}, {"tolerance", 0.05}}}}}};
  const auto r = run("local-time", "c10_occupation", doc, v);
  const double dev = value(r, "/occupation/max_abs_deviation"_json_pointer);
  v.expect(dev <= 0.05, "worst |integral / lambda(J) - 1| over 5 paths " + num(dev) + " <= 0.05");
  return v;
}

Verdict gauge_discrimination() {
  Verdict v;
  const json doc = {{"model", sheet(2, 1, 0.5, box({1, 1}, {2, 2}))},
                    {"grid", {{"counts", {1025, 1025}}, {"budget", 1100000}}},
                    {"experiment",
                     {{"count", 200}, {"p_list", {3, 4, 5}}, {"z", {0.0}}, {"level_k", {0.5, 0.25}},
                      {"calibration", {{"count", 20}, {"K1_quantile", 0.10}, {"K2_quantile", 0.95}}},
                      {"ordering_fraction", 0.7}}}};
  const auto r = run("cover", "c11_cover", doc, v);
  const double frac = value(r, "/gauge_ordering/fraction"_json_pointer);
  const double comparable = value(r, "/gauge_ordering/comparable"_json_pointer);
  v.expect(comparable >= 200, num(comparable) + " replicates with nonzero level sums");
  v.expect(frac >= 0.7, "fraction with |drift(k=1/2)| < |drift(k=1/4)|: " + num(frac) + " >= 0.7");
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Verdict determinism() {
  Verdict v;
  const json bs = sheet(2, 1, 0.5, box({1, 1}, {2, 2}));
  const std::vector<std::pair<std::string, json>> runs = {
      {"simulate", {{"model", bs}, {"grid", {{"counts", {33, 33}}}}, {"experiment", {{"count", 3}, {"format", "csv"}}}}},
      {"verify-cov", {{"model", bs}, {"grid", {{"counts", {6, 6}}}}, {"experiment", {{"monte_carlo", {{"reps", 500}}}}}}},
      {"chung", {{"model", bs}, {"grid", {{"counts", {65, 65}}}}, {"experiment", {{"count", 30}}}}},
      {"dimension",
       {{"model", bs}, {"grid", {{"counts", {129, 129}}}},
        {"experiment", {{"min_paths", 5}, {"dyadic_scales", {{"from", 2}, {"to", 7}}}}}}},
      {"cover",
       {{"model", bs}, {"grid", {{"counts", {129, 129}}}},
        {"experiment", {{"count", 3}, {"p_list", {2, 3}}, {"calibration", {{"count", 5}}}}}}},
      {"local-time", {{"model", bs}, {"grid", {{"counts", {65, 65}}}}, {"experiment", {{"count", 2}}}}},
      {"level-set", {{"model", bs}, {"grid", {{"counts", {65, 65}}}}, {"experiment", {{"count", 2}}}}},
      {"verify-lnd", {{"model", bs}, {"experiment", {{"trials", 50}}}}},
      {"verify-a2", {{"model", bs}, {"experiment", {{"pairs", 4}}}}},
      {"verify-a3",
       {{"model", wave_white(box({0.3, 0.3}, {1.3, 1.3}))}, {"experiment", {{"trials", 20}, {"grid_probe", 5}}}}},
      {"sojourn",
       {{"model", bs}, {"grid", {{"counts", {33, 33}}}}, {"experiment", {{"reps", 1000}, {"bootstrap", 50}}}}},
      {"small-ball", {{"model", bs}, {"experiment", {{"reps", 100}, {"points_per_axis", 11}}}}},
      {"modulus", {{"model", bs}, {"grid", {{"counts", {33, 33}}}}, {"experiment", {{"reps", 200}}}}}};
  for (const auto& [sub, doc] : runs) {
    const auto a = run(sub, "c12_" + sub + "_a", doc, v);
    const auto b = run(sub, "c12_" + sub + "_b", doc, v);
    if (!a.error.empty() || !b.error.empty()) continue;
    bool same = a.files == b.files && a.config_hash == b.config_hash;
    std::size_t compared = 0;
    for (const auto& f : a.files) {
      if (f == "manifest.json") continue;  // holds the wall time
      same = same && slurp(fs::path(a.out_dir) / f) == slurp(fs::path(b.out_dir) / f);
      ++compared;
    }
    v.expect(same && compared > 0, sub + ": " + std::to_string(compared) + " report files byte-identical");
  }
  return v;
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;
  std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "wave covariance quadrature vs light-cone area", 60, cone_oracle},
      {2, "wave variance scaling t^(3-beta)", 60, variance_scaling},
      {3, "sampling covariance within 5 SE", 300, sampling},
      {4, "full-band spectral representation", 120, spectral_representation},
      {5, "sectorial LND positivity and stability", 300, lnd_positivity},
      {6, "band remainder envelope", 600, remainder_envelope},
      {7, "sojourn moment envelope", 600, sojourn_moments},
      {8, "band small-ball constant", 600, small_ball},
      {9, "dimension formulas", 1200, dimensions},
      {10, "occupation identity", 120, occupation},
      {11, "gauge discrimination", 1200, gauge_discrimination},
      {12, "determinism", 600, determinism},
  };
  return list;
}

bool run_one(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v = c.run();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.expect(secs <= c.limit_seconds, "runtime " + num(secs) + " s <= " + num(c.limit_seconds) + " s");
  for (const auto& n : v.notes) std::printf("    %s\n", n.c_str());
  std::printf("criterion %d (%s): %s\n", c.id, c.title, v.pass ? "PASS" : "FAIL");
  std::fflush(stdout);
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <1..12 | all>\n");
    return 2;
  }
  const std::string which = argv[1];
  bool ok = true, found = false;
  for (const auto& c : criteria()) {
    if (which != "all" && which != std::to_string(c.id)) continue;
    found = true;
    ok = run_one(c) && ok;
  }
  if (!found) {
    std::fprintf(stderr, "no criterion %s\n", which.c_str());
    return 2;
  }
  return ok ? 0 : 1;
}
