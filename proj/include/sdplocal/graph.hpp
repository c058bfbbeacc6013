#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "sdplocal/common.hpp"

namespace sdplocal {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

// Immutable undirected simple graph in CSR form. `degree_param` is the
// generative average degree d used for centering.
class SparseGraph {
 public:
  SparseGraph() = default;
  // Rejects self-loops, duplicate edges and out-of-range endpoints.
  SparseGraph(std::size_t n, const std::vector<Edge>& edges, double degree_param);

  std::size_t num_vertices() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return targets_.size() / 2; }
  double degree_param() const { return degree_param_; }

  std::span<const Vertex> neighbors(Vertex v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(Vertex i, Vertex j) const;

  // Edges with i < j in lexicographic order.
  std::vector<Edge> edges() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> targets_;
  double degree_param_ = 0.0;
};

enum class Label : std::int8_t { kMinus = -1, kHidden = 0, kPlus = 1 };

struct PlantedLabels {
  std::vector<std::int8_t> truth;  // +1 / -1; empty when unknown
  std::vector<Label> revealed;
  double delta = 1.0;
};

SparseGraph gen_er(std::size_t n, double d, std::uint64_t seed);
std::pair<SparseGraph, PlantedLabels> gen_sbm(std::size_t n, double a, double b, double delta,
                                              std::uint64_t seed);

struct BallVertex {
  Vertex vertex;
  int depth;
  std::int32_t parent;  // index into BallView::vertices of the BFS parent, -1 at the root
};

struct BallView {
  Vertex root = 0;
  int radius = 0;
  std::vector<BallVertex> vertices;  // BFS order: depths non-decreasing, children contiguous
  std::size_t induced_edges = 0;
  bool is_tree = true;

  std::size_t shell_size(int depth) const;
};

// Reusable scratch for repeated BFS on one graph.
class BallWorkspace {
 public:
  explicit BallWorkspace(std::size_t n) : stamp_(n, 0), index_(n, -1) {}
  BallView ball(const SparseGraph& g, Vertex root, int radius);
  // Index of `v` in the most recent ball, or -1.
  std::int32_t index_of(Vertex v) const { return stamp_[v] == current_ ? index_[v] : -1; }

 private:
  std::vector<std::uint32_t> stamp_;
  std::vector<std::int32_t> index_;
  std::uint32_t current_ = 0;
};

BallView ball(const SparseGraph& g, Vertex root, int radius);

// e + k - v over the vertices touched by the edge list.
long long cycle_number(const std::vector<std::pair<long long, long long>>& edges);

// Every radius-ell ball contains at most one cycle.
bool is_tangle_free(const SparseGraph& g, int ell);

void write_edge_list(std::ostream& out, const SparseGraph& g);
// When `d` is negative the empirical average degree 2m/n is stored.
SparseGraph read_edge_list(std::istream& in, double d = -1.0);

// First line: revealed labels over {+,-,u}. Second line: true labels over {+,-}.
void write_labels(std::ostream& out, const PlantedLabels& labels);
PlantedLabels read_labels(std::istream& in, double delta);

}  // namespace sdplocal
