#include "sdplocal/graph.hpp"

#include <algorithm>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

namespace sdplocal {

SparseGraph::SparseGraph(std::size_t n, const std::vector<Edge>& edges, double degree_param)
    : offsets_(n + 1, 0), degree_param_(degree_param) {
  if (n > std::numeric_limits<Vertex>::max()) throw InvalidParameter("too many vertices");
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) throw InvalidInput("edge endpoint out of range");
    if (i == j) throw InvalidInput("self-loop");
    ++offsets_[i + 1];
    ++offsets_[j + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  targets_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [i, j] : edges) {
    targets_[fill[i]++] = j;
    targets_[fill[j]++] = i;
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto first = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]);
    auto last = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]);
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) throw InvalidInput("duplicate edge");
  }
}

bool SparseGraph::has_edge(Vertex i, Vertex j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> SparseGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (Vertex i = 0; i < num_vertices(); ++i)
    for (Vertex j : neighbors(i))
      if (i < j) out.emplace_back(i, j);
  return out;
}

namespace {

// Gap to the next success in a Bernoulli(p) sequence.
long long geometric_skip(Rng& rng, double log_q) {
  const double r = uniform01(rng);
  if (std::isinf(log_q)) return 0;
  return static_cast<long long>(std::floor(std::log1p(-r) / log_q));
}

// Successful pairs {i < j} among m items, each with probability p.
template <typename Emit>
void sample_pairs(std::size_t m, double p, Rng& rng, Emit emit) {
  if (p <= 0.0 || m < 2) return;
  const double log_q = std::log1p(-p);
  long long v = 1, w = -1;
  const auto mm = static_cast<long long>(m);
  while (v < mm) {
    w += 1 + geometric_skip(rng, log_q);
    while (w >= v && v < mm) {
      w -= v;
      ++v;
    }
    if (v < mm) emit(static_cast<std::size_t>(w), static_cast<std::size_t>(v));
  }
}

// Successful cells of an r x c grid, each with probability p.
template <typename Emit>
void sample_grid(std::size_t r, std::size_t c, double p, Rng& rng, Emit emit) {
  if (p <= 0.0 || r == 0 || c == 0) return;
  const double log_q = std::log1p(-p);
  const auto total = static_cast<long long>(r * c);
  long long t = -1;
  while (true) {
    t += 1 + geometric_skip(rng, log_q);
    if (t >= total) break;
    emit(static_cast<std::size_t>(t) / c, static_cast<std::size_t>(t) % c);
  }
}

void check_probability(double x, std::size_t n, const char* what) {
  if (!(x >= 0.0)) throw InvalidParameter(std::string(what) + " must be non-negative");
  if (x / static_cast<double>(n) > 1.0)
    throw InvalidParameter(std::string(what) + "/n exceeds 1");
}

}  // namespace

SparseGraph gen_er(std::size_t n, double d, std::uint64_t seed) {
  if (n < 1) throw InvalidParameter("n must be at least 1");
  check_probability(d, n, "d");
  Rng rng = make_rng(seed, 0x45);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(d * static_cast<double>(n) / 2 * 1.05) + 16);
  sample_pairs(n, d / static_cast<double>(n), rng, [&](std::size_t i, std::size_t j) {
    edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
  });
  return SparseGraph(n, edges, d);
}

std::pair<SparseGraph, PlantedLabels> gen_sbm(std::size_t n, double a, double b, double delta,
                                              std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw InvalidParameter("n must be even and positive");
  check_probability(a, n, "a");
  check_probability(b, n, "b");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidParameter("delta must lie in (0, 1]");
  Rng rng = make_rng(seed, 0x53);

  PlantedLabels labels;
  labels.delta = delta;
  labels.truth.assign(n, 1);
  std::fill(labels.truth.begin() + static_cast<std::ptrdiff_t>(n / 2), labels.truth.end(), -1);
  std::shuffle(labels.truth.begin(), labels.truth.end(), rng);

  std::vector<Vertex> plus, minus;
  for (Vertex v = 0; v < n; ++v) (labels.truth[v] > 0 ? plus : minus).push_back(v);

  const double nn = static_cast<double>(n);
  std::vector<Edge> edges;
  auto within = [&](const std::vector<Vertex>& side) {
    sample_pairs(side.size(), a / nn, rng, [&](std::size_t i, std::size_t j) {
      edges.emplace_back(side[i], side[j]);
    });
  };
  within(plus);
  within(minus);
  sample_grid(plus.size(), minus.size(), b / nn, rng, [&](std::size_t i, std::size_t j) {
    edges.emplace_back(plus[i], minus[j]);
  });

  labels.revealed.resize(n);
  for (Vertex v = 0; v < n; ++v)
    labels.revealed[v] = (delta >= 1.0 || uniform01(rng) < delta)
                             ? static_cast<Label>(labels.truth[v])
                             : Label::kHidden;
  return {SparseGraph(n, edges, (a + b) / 2), std::move(labels)};
}

std::size_t BallView::shell_size(int depth) const {
  return static_cast<std::size_t>(std::count_if(
      vertices.begin(), vertices.end(), [depth](const BallVertex& v) { return v.depth == depth; }));
}

BallView BallWorkspace::ball(const SparseGraph& g, Vertex root, int radius) {
  if (root >= g.num_vertices()) throw OutOfRange("root out of range");
  if (radius < 0) throw InvalidParameter("radius must be non-negative");
  if (++current_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    current_ = 1;
  }
  BallView view;
  view.root = root;
  view.radius = radius;
  view.vertices.push_back({root, 0, -1});
  stamp_[root] = current_;
  index_[root] = 0;
  std::size_t degree_sum = 0;
  for (std::size_t head = 0; head < view.vertices.size(); ++head) {
    const BallVertex cur = view.vertices[head];
    for (Vertex w : g.neighbors(cur.vertex)) {
      if (stamp_[w] == current_) {
        ++degree_sum;
        continue;
      }
      if (cur.depth == radius) continue;
      stamp_[w] = current_;
      index_[w] = static_cast<std::int32_t>(view.vertices.size());
      view.vertices.push_back({w, cur.depth + 1, static_cast<std::int32_t>(head)});
      ++degree_sum;
    }
  }
  // Every induced edge is seen once from each endpoint.
  view.induced_edges = degree_sum / 2;
  view.is_tree = view.induced_edges + 1 == view.vertices.size();
  return view;
}

BallView ball(const SparseGraph& g, Vertex root, int radius) {
  BallWorkspace ws(g.num_vertices());
  return ws.ball(g, root, radius);
}

long long cycle_number(const std::vector<std::pair<long long, long long>>& edges) {
  std::unordered_map<long long, long long> parent;
  std::function<long long(long long)> find = [&](long long x) {
    long long r = x;
    while (parent[r] != r) r = parent[r];
    while (parent[x] != r) {
      long long next = parent[x];
      parent[x] = r;
      x = next;
    }
    return r;
  };
  long long components = 0;
  for (const auto& [i, j] : edges) {
    for (long long x : {i, j})
      if (parent.emplace(x, x).second) ++components;
    const long long ri = find(i), rj = find(j);
    if (ri != rj) {
      parent[ri] = rj;
      --components;
    }
  }
  return static_cast<long long>(edges.size()) + components - static_cast<long long>(parent.size());
}

bool is_tangle_free(const SparseGraph& g, int ell) {
  if (ell < 1) throw InvalidParameter("ell must be at least 1");
  BallWorkspace ws(g.num_vertices());
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    const BallView b = ws.ball(g, v, ell);
    // The induced ball is connected, so its cycle number is e - v + 1.
    if (b.induced_edges > b.vertices.size()) return false;
  }
  return true;
}

void write_edge_list(std::ostream& out, const SparseGraph& g) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
}

namespace {

// Leading lines starting with '#' carry provenance and are ignored.
void skip_comments(std::istream& in) {
  while (in >> std::ws && in.peek() == '#') in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
}

}  // namespace

SparseGraph read_edge_list(std::istream& in, double d) {
  skip_comments(in);
  long long n = -1, m = -1;
  if (!(in >> n >> m) || n < 1 || m < 0) throw InvalidInput("bad edge-list header");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long e = 0; e < m; ++e) {
    long long i = -1, j = -1;
    if (!(in >> i >> j)) throw InvalidInput("truncated edge list");
    if (i < 0 || j < 0 || i >= n || j >= n) throw InvalidInput("edge endpoint out of range");
    edges.emplace_back(static_cast<Vertex>(std::min(i, j)), static_cast<Vertex>(std::max(i, j)));
  }
  const double dd = d >= 0.0 ? d : 2.0 * static_cast<double>(m) / static_cast<double>(n);
  return SparseGraph(static_cast<std::size_t>(n), edges, dd);
}

void write_labels(std::ostream& out, const PlantedLabels& labels) {
  std::string line;
  line.reserve(labels.revealed.size());
  for (Label l : labels.revealed) line += l == Label::kPlus ? '+' : l == Label::kMinus ? '-' : 'u';
  out << line << '\n';
  if (!labels.truth.empty()) {
    line.clear();
    for (auto t : labels.truth) line += t > 0 ? '+' : '-';
    out << line << '\n';
  }
}

PlantedLabels read_labels(std::istream& in, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidParameter("delta must lie in (0, 1]");
  PlantedLabels labels;
  labels.delta = delta;
  skip_comments(in);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("missing label line");
  for (char c : line) {
    if (c == '+') labels.revealed.push_back(Label::kPlus);
    else if (c == '-') labels.revealed.push_back(Label::kMinus);
    else if (c == 'u') labels.revealed.push_back(Label::kHidden);
    else if (c != '\r') throw InvalidInput("bad label character");
  }
  if (std::getline(in, line) && !line.empty()) {
    for (char c : line) {
      if (c == '+') labels.truth.push_back(1);
      else if (c == '-') labels.truth.push_back(-1);
      else if (c != '\r') throw InvalidInput("bad truth character");
    }
    if (labels.truth.size() != labels.revealed.size())
      throw InvalidInput("label lines differ in length");
    for (std::size_t i = 0; i < labels.truth.size(); ++i)
      if (labels.revealed[i] != Label::kHidden &&
          static_cast<int>(labels.revealed[i]) != labels.truth[i])
        throw InvalidInput("revealed label contradicts truth");
  }
  return labels;
}

}  // namespace sdplocal
