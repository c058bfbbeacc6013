// Acceptance run: one PASS/FAIL line per criterion with the measured numbers.
// Usage: acceptance [criterion ...]   (no arguments runs all nine)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "sdplocal/dual.hpp"
#include "sdplocal/experiments.hpp"
#include "sdplocal/gw.hpp"
#include "sdplocal/local.hpp"
#include "sdplocal/nonbacktracking.hpp"
#include "sdplocal/sdp.hpp"

using namespace sdplocal;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double upper_formula(double d) { return 2 * std::sqrt(d) * (1 - 1 / (2 * d)); }
double lower_formula(double d) { return 2 * std::sqrt(d) * (1 - 1 / (d + 1)); }

Verdict sandwich() {
  bool pass = true;
  std::string detail;
  for (double d : {4.0, 2.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const SparseGraph g = gen_er(100000, d, 1);
    const SolveReport rep = solve(g, SolveOptions{}).second;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double lo = lower_formula(d) - 0.05, hi = upper_formula(d) + 0.05;
    const bool ok = rep.normalized >= lo && rep.normalized <= hi && secs <= 300;
    pass = pass && ok;
    detail += fmt("d=%g value %.4f in [%.4f, %.4f] %.0fs%s; ", d, rep.normalized, lo, hi, secs,
                  ok ? "" : " (out)");
  }
  const double ratio = lower_formula(2) / upper_formula(2);
  const bool ratio_ok = std::abs(ratio - 8.0 / 9.0) <= 1e-12;
  pass = pass && ratio_ok;
  detail += fmt("lower/upper at d=2 = %.15f (8/9 off by %.1e)", ratio, std::abs(ratio - 8.0 / 9.0));
  return {pass, detail};
}

Verdict dual_witness() {
  int psd = 0, in_range = 0;
  double lo = 1e300, hi = -1e300, slowest = 0;
  const double target = upper_formula(4);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const SparseGraph g = gen_er(10000, 4, seed);
    const DualCertificate c = build_certificate(g, 0.05);
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    psd += c.psd_ok;
    in_range += c.psd_ok && std::abs(c.dual_value - target) <= 0.15;
    lo = std::min(lo, c.dual_value);
    hi = std::max(hi, c.dual_value);
  }
  const bool pass = psd >= 18 && in_range >= 18 && slowest <= 120;
  return {pass, fmt("psd_ok %d/20; dual_value in [%.4f, %.4f], %d/20 within %.2f +- 0.15; slowest seed %.1fs",
                    psd, lo, hi, in_range, target, slowest)};
}

Verdict ihara_bass() {
  const auto t0 = std::chrono::steady_clock::now();
  const IharaSuite s = ihara_bass_suite(100, 12, 3, 2024);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {s.max_rel_err <= 1e-8 && s.checks == 300 && secs <= 10,
          fmt("%zu checks, max relative error %.2e, %.2fs", s.checks, s.max_rel_err, secs)};
}

Verdict nb_spectrum() {
  const auto t0 = std::chrono::steady_clock::now();
  int centered_ok = 0, uncentered_ok = 0;
  double c_max = 0, u_min = 1e300;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SparseGraph g = gen_er(2000, 4, seed);
    const double c = spectral_radius_estimate(NbOperator::centered(g), 60, 2, seed).estimate;
    const double u = spectral_radius_estimate(NbOperator::uncentered(g), 60, 1, seed).estimate;
    centered_ok += c <= 2.3;
    uncentered_ok += u >= 3.2;
    c_max = std::max(c_max, c);
    u_min = std::min(u_min, u);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {centered_ok >= 18 && uncentered_ok >= 18 && secs <= 180,
          fmt("centered <= 2.3 in %d/20 (max %.3f); uncentered >= 3.2 in %d/20 (min %.3f); %.0fs",
              centered_ok, c_max, uncentered_ok, u_min, secs)};
}

Verdict moments() {
  const auto t0 = std::chrono::steady_clock::now();
  // d = 9, mu = 5
  const MomentSuite s = martingale_moment_suite(14, 4, 12, 100000, 7);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {s.max_z <= 5 && secs <= 60,
          fmt("mean X %.4f, mean Y %.4f, var X %.4f (target %.4f), var Y %.4f (target %.4f), max z %.2f, %.1fs",
              s.mean_x, s.mean_y, s.var_x, s.target_var_x, s.var_y, s.target_var_y, s.max_z, secs)};
}

Verdict harmonic() {
  const auto t0 = std::chrono::steady_clock::now();
  const double d = 10;
  const Estimate e = harmonic_bound(d, 50, 1000000, 11);
  const double expansion = 2 * std::sqrt(d) * (1 - 5 / (8 * d));
  const double lo = lower_formula(d), hi = upper_formula(d);
  const ConductancePool fixed = conductance_population(3, 50, 1000, 1, Offspring::kFixed);
  double fixed_err = 0;
  for (double c : fixed.c) fixed_err = std::max(fixed_err, std::abs(c - 2.0));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = std::abs(e.estimate - expansion) <= 0.05 && e.estimate > lo && e.estimate < hi &&
                    fixed_err <= 1e-3 && secs <= 120;
  return {pass, fmt("d*E[psi] = %.4f +- %.4f vs expansion %.4f, bounds (%.4f, %.4f); fixed b=3 |c-2| %.1e; %.0fs",
                    e.estimate, e.std_error, expansion, lo, hi, fixed_err, secs)};
}

Verdict cross_estimators() {
  const auto t0 = std::chrono::steady_clock::now();
  const Estimate tree = simple_value_tree(4, 5, 1000000, 5);
  bool pass = true;
  std::string detail = fmt("tree %.4f +- %.4f; ", tree.estimate, tree.std_error);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const SparseGraph g = gen_er(100000, 4, seed);
    const LocalValueReport r = value_closed_form(SimpleRule(g, 5));
    const double se = std::hypot(r.vertex_std_error.value_or(0.0), tree.std_error);
    const double z = std::abs(r.value - tree.estimate) / se;
    pass = pass && z <= 4;
    detail += fmt("graph %llu %.4f (z %.2f); ", static_cast<unsigned long long>(seed), r.value, z);
  }
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const SparseGraph g = gen_er(2000, 4, 100 + seed);
    const SimpleRule rule(g, 3);
    const double closed = value_closed_form(rule).value;
    const LocalValueReport mc = value_monte_carlo(rule, 2000, seed);
    const double z = std::abs(mc.value - closed) / mc.mc_std_error.value_or(0.0);
    pass = pass && z <= 4;
    detail += fmt("n=2000 closed %.4f mc %.4f (z %.2f); ", closed, mc.value, z);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail += fmt("%.0fs", secs);
  return {pass, detail};
}

Verdict sbm_detection() {
  const auto t0 = std::chrono::steady_clock::now();
  const Json cfg = {{"d", 9}, {"lambda", 2}, {"n", 20000}, {"eps", 0.1}, {"seeds", 20}, {"restarts", 1}};
  const CommandResult r = run_command("sbm-test", cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.exit_code == kExitBadConfig) return {false, "sbm-test rejected its config: " + r.output};
  const Json& doc = r.document;
  const double miss = doc["miss_rate"].get<double>(), fdr = doc["false_discovery_rate"].get<double>();
  double alt_min = 1e300, null_max = -1e300;
  for (const auto& row : doc["rows"]) {
    alt_min = std::min(alt_min, row["alt_value"].get<double>());
    null_max = std::max(null_max, row["null_value"].get<double>());
  }
  const bool pass = miss <= 0.1 && fdr <= 0.1 && alt_min >= 5.9 && secs <= 600;
  return {pass, fmt("threshold %.4f; miss %.2f, false discovery %.2f; null max %.4f, planted min %.4f (>= 5.9); %.0fs",
                    doc["threshold"].get<double>(), miss, fdr, null_max, alt_min, secs)};
}

Verdict gaussian_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  const IdentitySuite s = gaussian_identity_suite(10, 1000000, 3);
  double sums = 0;
  for (double d : {1.5, 3.0, 6.0}) sums = std::max(sums, harmonic_sum_error(d, 8, 30, 4));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {s.max_z <= 4 && sums <= 1e-12,
          fmt("%zu identity checks, max z %.2f; harmonic per-depth sums off by at most %.1e; %.0fs", s.checks,
              s.max_z, sums, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"solver value between the local lower bound and the upper bound", sandwich},
      {"dual witness PSD and its value", dual_witness},
      {"weighted determinant identity", ihara_bass},
      {"centered non-backtracking spectral radius", nb_spectrum},
      {"generation martingale moments", moments},
      {"harmonic bound from conductance population", harmonic},
      {"graph and tree estimators of the simple rule agree", cross_estimators},
      {"two-community detection by thresholding the solver", sbm_detection},
      {"Gaussian sign identities and harmonic sums", gaussian_identities},
  };
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!chosen.empty() && !chosen.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("criterion %d %s: %s | %s\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
