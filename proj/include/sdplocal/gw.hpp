#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sdplocal/common.hpp"
#include "sdplocal/graph.hpp"

namespace sdplocal {

// Offspring law. One-type: Pois(d). Two-type: Pois(a/2) same-label and
// Pois(b/2) opposite-label children, labels revealed with probability delta.
struct GwParams {
  double a = 0.0;
  double b = 0.0;
  double delta = 1.0;
  bool two_type = false;

  static GwParams one_type(double d) { return {d, d, 1.0, false}; }
  static GwParams labelled(double a, double b, double delta) { return {a, b, delta, true}; }
  double d() const { return (a + b) / 2; }
  double mu() const { return (a - b) / 2; }
};

// Rooted tree in BFS order: children of each node occupy a contiguous range.
struct RootedTree {
  std::vector<std::int32_t> parent;  // -1 at the root
  std::vector<int> depth;
  std::vector<std::int32_t> child_begin;
  std::vector<std::int32_t> child_count;

  std::size_t size() const { return parent.size(); }
  int height() const { return depth.empty() ? -1 : depth.back(); }
  // Builds the BFS spanning tree of a ball.
  static RootedTree from_ball(const BallView& ball);
};

struct GwTree {
  RootedTree tree;
  std::vector<std::int8_t> truth;  // +1/-1 per node; empty for one-type trees
  std::vector<Label> revealed;     // empty for one-type trees
  int depth_cut = 0;
  GwParams params;
};

// Throws InvalidParameter if the tree would exceed `max_nodes`.
GwTree sample_tree(const GwParams& params, int depth_cut, std::uint64_t seed,
                   std::size_t max_nodes = 50'000'000);

struct MartingaleState {
  int ell = 0;
  double x = 0.0;
  std::optional<double> d_signed;  // revealed imbalance, two-type only
  std::optional<double> y;         // sigma_true(root) * d_signed
};

MartingaleState martingales(const GwTree& t, int ell);

// Generation sizes of a GW tree sampled without materializing nodes.
// Two-type counts are relative to the root's true label.
struct GenerationProfile {
  std::vector<double> total;
  std::vector<double> same_revealed;
  std::vector<double> opposite_revealed;
};

GenerationProfile sample_profile(const GwParams& params, int depth, Rng& rng);

struct Estimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

// Streaming mean and standard error.
class MeanAccumulator {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const;
  Estimate estimate(double scale = 1.0) const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

enum class Offspring { kPoisson, kFixed };

struct ConductancePool {
  int depth = 0;
  std::vector<double> c;  // +inf when depth is 0
};

// Population dynamics for c <- sum_{i<=L} c_i/(1+c_i). With kFixed, L = d exactly.
ConductancePool conductance_population(double d, int depth, std::size_t pool_size,
                                       std::uint64_t seed, Offspring law = Offspring::kPoisson);

// Effective conductance from the root to the depth-`depth` vertices, which are
// held at infinite conductance. Zero when that shell is empty.
double tree_conductance(const RootedTree& t, int depth);

// Last-exit probabilities by current splitting with the depth-L shell grounded.
// Returns nullopt when the tree has no vertex at depth L; nodes deeper than L get 0.
std::optional<std::vector<double>> harmonic_measure(const RootedTree& t, int depth_l);

double psi(double c1, double c2);
double s_bar_er(double x1, double x2, double d);
double s_bar_sbm(double x1, double y1, double x2, double y2, double a, double b, double alpha);
double default_alpha(double a, double b);

// Smallest root of q = exp(d(q-1)).
double extinction_probability(double d);

// d * E[psi(c1, c2)] over disjoint pool pairs.
Estimate harmonic_bound(double d, int depth, std::size_t pool_size, std::uint64_t seed);

// E[s_bar_er(X, X')] with X approximated by X_depth.
Estimate simple_bound_tree(double d, int depth, std::size_t samples, std::uint64_t seed);

// Exact expected value of the depth-ell simple rule on a pair of GW trees
// joined at the root edge, times d.
Estimate simple_value_tree(double d, int ell, std::size_t samples, std::uint64_t seed);

Estimate sbm_bound_tree(double a, double b, double delta, double alpha, int depth,
                        std::size_t samples, std::uint64_t seed);

// Finite-ell counterpart of sbm_bound_tree for the depth-ell labelled rule.
Estimate sbm_value_tree(double a, double b, double delta, double alpha, int ell,
                        std::size_t samples, std::uint64_t seed);

int default_depth(double d);

}  // namespace sdplocal
