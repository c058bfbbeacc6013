#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "sdplocal/gram.hpp"
#include "sdplocal/graph.hpp"
#include "sdplocal/local.hpp"

namespace sdplocal {

struct SolveOptions {
  std::size_t rank = 0;  // 0 selects ceil(sqrt(2n)) capped at 64
  int max_sweeps = 2000;
  double tol = 1e-7;
  std::uint64_t seed = 0;
  int restarts = 3;
  // Starting point; when set, a single run starts from it and `restarts` is ignored.
  const GramFactor* init = nullptr;
  // Recompute the exact objective after every sweep and throw if it decreases.
  bool check_monotone = false;
};

struct SolveReport {
  double objective = 0.0;
  double normalized = 0.0;
  int sweeps = 0;
  bool converged = false;
  std::size_t rank_used = 0;
  std::uint64_t seed = 0;
  std::vector<double> restart_objectives;
};

std::size_t default_rank(std::size_t n);

// Row-wise coordinate ascent on <A - (d/n) 11^T, V V^T> over unit rows.
std::pair<GramFactor, SolveReport> solve(const SparseGraph& g, const SolveOptions& options = {});

// sum_edges 2<v_i, v_j> - (d/n) ||sum_i v_i||^2. Throws if a row norm is off by more than 1e-8.
double objective(const SparseGraph& g, const GramFactor& V);

GramFactor warm_start_from_fields(const LocalRule& rule, std::size_t n_samples,
                                  std::uint64_t seed);

// Little-endian u64 n, u64 k, then n*k f64 row-major.
void write_factor(std::ostream& out, const GramFactor& V);
GramFactor read_factor(std::istream& in);

}  // namespace sdplocal
