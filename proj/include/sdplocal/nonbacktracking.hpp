#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdplocal/graph.hpp"

namespace sdplocal {

// Weighted non-backtracking operator on the complete graph with weights A_ij - c.
// Vectors are n x n row-major; entry (i, j) holds the directed pair i -> j and the
// diagonal is ignored on input and zero on output.
class NbOperator {
 public:
  static constexpr std::size_t kDefaultCap = 4000;

  NbOperator(const SparseGraph& g, double centering, std::size_t cap = kDefaultCap);
  static NbOperator centered(const SparseGraph& g, std::size_t cap = kDefaultCap);
  static NbOperator uncentered(const SparseGraph& g, std::size_t cap = kDefaultCap);

  std::size_t n() const { return n_; }
  std::size_t storage_size() const { return n_ * n_; }
  double centering() const { return c_; }
  const SparseGraph& graph() const { return *g_; }

  void apply(std::span<const double> x, std::span<double> y) const;

 private:
  const SparseGraph* g_;
  std::size_t n_;
  double c_;
};

struct SpectralEstimate {
  double estimate = 0.0;  // max over trials
  std::vector<double> trials;
  double spread = 0.0;  // max - min over trials
};

// ||B^m x||^{1/m} for unit x, accumulated in log scale with renormalization each step.
double gelfand_estimate(const NbOperator& op, std::span<const double> start, int m);
SpectralEstimate spectral_radius_estimate(const NbOperator& op, int m, int trials,
                                          std::uint64_t seed);

struct WeightedEdge {
  Vertex i;
  Vertex j;
  double c;
};

// Undirected edges with symmetric nonzero weights. Edge e has directed copies
// 2e = (i, j) and 2e + 1 = (j, i).
class WeightedEdgeGraph {
 public:
  WeightedEdgeGraph(std::size_t n, std::vector<WeightedEdge> edges);
  std::size_t num_vertices() const { return n_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }

 private:
  std::size_t n_;
  std::vector<WeightedEdge> edges_;
};

Eigen::MatrixXd build_bc(const WeightedEdgeGraph& g, std::size_t cap = 4000);

// I + D_{c,u} - A_{c,u}; throws at poles |u| = 1/|c| (tolerance 1e-9).
Eigen::MatrixXd deformed_laplacian(const WeightedEdgeGraph& g, double u);

struct LogDet {
  double log_abs = 0.0;
  int sign = 1;  // 0 when singular
  double value() const;
};

LogDet log_determinant(const Eigen::MatrixXd& M);

struct IharaBassReport {
  std::size_t n = 0;
  std::size_t edges = 0;
  double u = 0.0;
  LogDet lhs;  // det(I - u B_c)
  LogDet rhs;  // det(I + D - A) * prod(1 - u^2 c^2)
  double rel_err = 0.0;
};

IharaBassReport ihara_bass_check(const WeightedEdgeGraph& g, double u);

}  // namespace sdplocal
