#include "sdplocal/sdp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <istream>
#include <numeric>
#include <ostream>

namespace sdplocal {

std::size_t default_rank(std::size_t n) {
  const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * static_cast<double>(n))));
  return std::clamp<std::size_t>(k, 2, 64);
}

double objective(const SparseGraph& g, const GramFactor& V) {
  if (V.n != g.num_vertices()) throw InvalidInput("factor and graph sizes differ");
  const std::size_t k = V.k;
  std::vector<long double> sum(k, 0.0);
  long double edges = 0;
  for (std::size_t i = 0; i < V.n; ++i) {
    const auto vi = V.row(i);
    double norm2 = 0;
    for (std::size_t t = 0; t < k; ++t) {
      norm2 += vi[t] * vi[t];
      sum[t] += vi[t];
    }
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-8) throw InvalidInput("factor row is not unit length");
    for (Vertex j : g.neighbors(static_cast<Vertex>(i))) {
      if (j <= i) continue;
      const auto vj = V.row(j);
      double dot = 0;
      for (std::size_t t = 0; t < k; ++t) dot += vi[t] * vj[t];
      edges += dot;
    }
  }
  long double s2 = 0;
  for (long double s : sum) s2 += s * s;
  const double c = V.n == 0 ? 0.0 : g.degree_param() / static_cast<double>(V.n);
  return static_cast<double>(2 * edges - c * s2);
}

namespace {

void random_unit_rows(GramFactor& V, Rng& rng) {
  for (std::size_t i = 0; i < V.n; ++i) {
    auto r = V.row(i);
    double s = 0;
    do {
      s = 0;
      for (double& x : r) {
        x = gaussian(rng);
        s += x * x;
      }
    } while (s == 0.0);
    const double inv = 1.0 / std::sqrt(s);
    for (double& x : r) x *= inv;
  }
}

struct RunResult {
  double objective;
  int sweeps;
  bool converged;
};

RunResult ascend(const SparseGraph& g, GramFactor& V, const SolveOptions& opt, std::uint64_t run) {
  const std::size_t n = V.n, k = V.k;
  const double c = n == 0 ? 0.0 : g.degree_param() / static_cast<double>(n);
  std::vector<double> S(k), grad(k);
  auto recompute_sum = [&] {
    std::fill(S.begin(), S.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = V.row(i);
      for (std::size_t t = 0; t < k; ++t) S[t] += r[t];
    }
  };
  std::vector<Vertex> order(n);
  std::iota(order.begin(), order.end(), 0);
  double current = objective(g, V);
  RunResult res{current, 0, false};
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    recompute_sum();
    Rng rng = make_rng(opt.seed, 0x5357 + run, static_cast<std::uint64_t>(sweep));
    std::shuffle(order.begin(), order.end(), rng);
    long double gain = 0;
    for (Vertex i : order) {
      auto vi = V.row(i);
      for (std::size_t t = 0; t < k; ++t) grad[t] = -c * (S[t] - vi[t]);
      for (Vertex j : g.neighbors(i)) {
        const auto vj = V.row(j);
        for (std::size_t t = 0; t < k; ++t) grad[t] += vj[t];
      }
      double norm2 = 0, along = 0;
      for (std::size_t t = 0; t < k; ++t) {
        norm2 += grad[t] * grad[t];
        along += grad[t] * vi[t];
      }
      if (norm2 <= 0.0) continue;
      const double norm = std::sqrt(norm2);
      gain += 2.0 * (norm - along);
      const double inv = 1.0 / norm;
      for (std::size_t t = 0; t < k; ++t) {
        const double next = grad[t] * inv;
        S[t] += next - vi[t];
        vi[t] = next;
      }
    }
    res.sweeps = sweep;
    if (opt.check_monotone) {
      const double exact = objective(g, V);
      if (exact < current - 1e-9 * std::max(1.0, std::abs(current)))
        throw std::logic_error("coordinate ascent decreased the objective");
      current = exact;
    } else {
      current += static_cast<double>(gain);
    }
    if (static_cast<double>(gain) < opt.tol * std::max(1.0, std::abs(current))) {
      res.converged = true;
      break;
    }
  }
  res.objective = objective(g, V);
  return res;
}

}  // namespace

std::pair<GramFactor, SolveReport> solve(const SparseGraph& g, const SolveOptions& opt) {
  if (!(opt.tol > 0.0)) throw InvalidParameter("tol must be positive");
  if (opt.max_sweeps < 0) throw InvalidParameter("max_sweeps must be non-negative");
  const std::size_t n = g.num_vertices();
  SolveReport report;
  report.seed = opt.seed;
  GramFactor best;
  if (opt.init) {
    if (opt.init->n != n) throw InvalidParameter("initial factor has the wrong size");
    if (opt.init->k < 2) throw InvalidParameter("rank must be at least 2");
    best = *opt.init;
    objective(g, best);  // validates unit rows
    const RunResult r = ascend(g, best, opt, 0);
    report.objective = r.objective;
    report.sweeps = r.sweeps;
    report.converged = r.converged;
    report.restart_objectives = {r.objective};
  } else {
    const std::size_t k = opt.rank == 0 ? default_rank(n) : opt.rank;
    if (k < 2) throw InvalidParameter("rank must be at least 2");
    if (opt.restarts < 1) throw InvalidParameter("need at least one restart");
    for (int run = 0; run < opt.restarts; ++run) {
      GramFactor V(n, k);
      Rng rng = make_rng(opt.seed, 0x494e4954, static_cast<std::uint64_t>(run));
      random_unit_rows(V, rng);
      const RunResult r = ascend(g, V, opt, static_cast<std::uint64_t>(run));
      report.restart_objectives.push_back(r.objective);
      if (run == 0 || r.objective > report.objective) {
        report.objective = r.objective;
        report.sweeps = r.sweeps;
        report.converged = r.converged;
        best = std::move(V);
      }
    }
  }
  report.rank_used = best.k;
  report.normalized = n == 0 ? 0.0 : report.objective / static_cast<double>(n);
  return {std::move(best), report};
}

GramFactor warm_start_from_fields(const LocalRule& rule, std::size_t n_samples,
                                  std::uint64_t seed) {
  return gram_factor_from_fields(rule, n_samples, seed);
}

namespace {

void put_u64(std::ostream& out, std::uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw InvalidInput("truncated factor file");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return x;
}

}  // namespace

void write_factor(std::ostream& out, const GramFactor& V) {
  put_u64(out, V.n);
  put_u64(out, V.k);
  for (double x : V.v) put_u64(out, std::bit_cast<std::uint64_t>(x));
}

GramFactor read_factor(std::istream& in) {
  const std::uint64_t n = get_u64(in), k = get_u64(in);
  if (k != 0 && n > (std::uint64_t{1} << 40) / k) throw InvalidInput("factor dimensions too large");
  GramFactor V(n, k);
  for (double& x : V.v) x = std::bit_cast<double>(get_u64(in));
  return V;
}

}  // namespace sdplocal
