#include "sdplocal/nonbacktracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace sdplocal {

NbOperator::NbOperator(const SparseGraph& g, double centering, std::size_t cap)
    : g_(&g), n_(g.num_vertices()), c_(centering) {
  if (n_ > cap) throw InvalidParameter("graph exceeds the dense non-backtracking size cap");
  if (n_ < 2) throw InvalidParameter("need at least two vertices");
}

NbOperator NbOperator::centered(const SparseGraph& g, std::size_t cap) {
  return NbOperator(g, g.degree_param() / static_cast<double>(g.num_vertices()), cap);
}

NbOperator NbOperator::uncentered(const SparseGraph& g, std::size_t cap) {
  return NbOperator(g, 0.0, cap);
}

void NbOperator::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = n_;
  if (x.size() != n * n || y.size() != n * n) throw InvalidParameter("vector size must be n*n");
  // R_j = sum_{j' != j} (A_{jj'} - c) x(j, j')
  std::vector<double> R(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* row = x.data() + j * n;
    double total = 0;
    for (std::size_t t = 0; t < n; ++t) total += row[t];
    total -= row[j];
    double adj = 0;
    for (Vertex t : g_->neighbors(static_cast<Vertex>(j))) adj += row[t];
    R[j] = adj - c_ * total;
  }
  // y(i, j) = R_j - (A_ji - c) x(j, i); the transpose read is tiled.
  constexpr std::size_t kTile = 64;
  for (std::size_t i0 = 0; i0 < n; i0 += kTile) {
    const std::size_t i1 = std::min(n, i0 + kTile);
    for (std::size_t j0 = 0; j0 < n; j0 += kTile) {
      const std::size_t j1 = std::min(n, j0 + kTile);
      for (std::size_t i = i0; i < i1; ++i) {
        double* out = y.data() + i * n;
        for (std::size_t j = j0; j < j1; ++j) out[j] = R[j] + c_ * x[j * n + i];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (Vertex j : g_->neighbors(static_cast<Vertex>(i))) y[i * n + j] -= x[static_cast<std::size_t>(j) * n + i];
    y[i * n + i] = 0.0;
  }
}

namespace {

double masked_norm(std::span<const double> x, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) s += x[i * n + j] * x[i * n + j];
  return std::sqrt(s);
}

}  // namespace

double gelfand_estimate(const NbOperator& op, std::span<const double> start, int m) {
  if (m < 10) throw InvalidParameter("need at least 10 iterations");
  const std::size_t n = op.n();
  if (start.size() != op.storage_size()) throw InvalidParameter("start vector size must be n*n");
  std::vector<double> x(start.begin(), start.end()), y(x.size());
  for (std::size_t i = 0; i < n; ++i) x[i * n + i] = 0.0;
  const double s0 = masked_norm(x, n);
  if (s0 == 0.0) throw InvalidParameter("start vector is zero");
  for (double& v : x) v /= s0;
  double log_growth = 0;
  for (int step = 0; step < m; ++step) {
    op.apply(x, y);
    const double s = masked_norm(y, n);
    if (s == 0.0) return 0.0;
    log_growth += std::log(s);
    for (std::size_t t = 0; t < y.size(); ++t) x[t] = y[t] / s;
  }
  return std::exp(log_growth / m);
}

SpectralEstimate spectral_radius_estimate(const NbOperator& op, int m, int trials,
                                          std::uint64_t seed) {
  if (trials < 1) throw InvalidParameter("need at least one trial");
  SpectralEstimate est;
  std::vector<double> start(op.storage_size());
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, 0x4e42, static_cast<std::uint64_t>(t));
    for (double& v : start) v = gaussian(rng);
    est.trials.push_back(gelfand_estimate(op, start, m));
  }
  const auto [lo, hi] = std::minmax_element(est.trials.begin(), est.trials.end());
  est.estimate = *hi;
  est.spread = *hi - *lo;
  return est;
}

WeightedEdgeGraph::WeightedEdgeGraph(std::size_t n, std::vector<WeightedEdge> edges)
    : n_(n), edges_(std::move(edges)) {
  std::set<std::pair<Vertex, Vertex>> seen;
  for (const auto& e : edges_) {
    if (e.i >= n || e.j >= n) throw InvalidInput("edge endpoint out of range");
    if (e.i == e.j) throw InvalidInput("self-loop");
    if (e.c == 0.0 || !std::isfinite(e.c)) throw InvalidInput("edge weights must be finite and nonzero");
    if (!seen.insert(std::minmax(e.i, e.j)).second) throw InvalidInput("duplicate edge");
  }
}

Eigen::MatrixXd build_bc(const WeightedEdgeGraph& g, std::size_t cap) {
  const auto& E = g.edges();
  const std::size_t m = 2 * E.size();
  if (m > cap) throw InvalidParameter("too many directed edges for a dense matrix");
  struct Directed {
    Vertex from, to;
    double c;
  };
  std::vector<Directed> dir(m);
  for (std::size_t e = 0; e < E.size(); ++e) {
    dir[2 * e] = {E[e].i, E[e].j, E[e].c};
    dir[2 * e + 1] = {E[e].j, E[e].i, E[e].c};
  }
  std::vector<std::vector<std::size_t>> out(g.num_vertices());
  for (std::size_t a = 0; a < m; ++a) out[dir[a].from].push_back(a);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b : out[dir[a].to])
      if (dir[b].to != dir[a].from) B(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = dir[b].c;
  return B;
}

namespace {

void check_admissible(const WeightedEdgeGraph& g, double u) {
  for (const auto& e : g.edges())
    if (std::abs(std::abs(u * e.c) - 1.0) <= 1e-9) throw InvalidParameter("u sits at a pole 1/|c|");
}

}  // namespace

Eigen::MatrixXd deformed_laplacian(const WeightedEdgeGraph& g, double u) {
  check_admissible(g, u);
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  for (const auto& e : g.edges()) {
    const double q = 1.0 - u * u * e.c * e.c;
    const double off = u * e.c / q, diag = u * u * e.c * e.c / q;
    M(e.i, e.j) -= off;
    M(e.j, e.i) -= off;
    M(e.i, e.i) += diag;
    M(e.j, e.j) += diag;
  }
  return M;
}

double LogDet::value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

LogDet log_determinant(const Eigen::MatrixXd& M) {
  LogDet r;
  if (M.rows() == 0) return r;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const Eigen::MatrixXd& LU = lu.matrixLU();
  r.sign = static_cast<int>(lu.permutationP().determinant());
  for (Eigen::Index k = 0; k < LU.rows(); ++k) {
    const double p = LU(k, k);
    if (p == 0.0) {
      r.sign = 0;
      r.log_abs = -std::numeric_limits<double>::infinity();
      return r;
    }
    if (p < 0) r.sign = -r.sign;
    r.log_abs += std::log(std::abs(p));
  }
  return r;
}

IharaBassReport ihara_bass_check(const WeightedEdgeGraph& g, double u) {
  check_admissible(g, u);
  IharaBassReport rep;
  rep.n = g.num_vertices();
  rep.edges = g.edges().size();
  rep.u = u;
  const Eigen::MatrixXd B = build_bc(g);
  rep.lhs = log_determinant(Eigen::MatrixXd::Identity(B.rows(), B.cols()) - u * B);
  rep.rhs = log_determinant(deformed_laplacian(g, u));
  for (const auto& e : g.edges()) {
    const double f = 1.0 - u * u * e.c * e.c;
    if (f < 0) rep.rhs.sign = -rep.rhs.sign;
    rep.rhs.log_abs += std::log(std::abs(f));
  }
  if (rep.lhs.sign == 0 || rep.rhs.sign == 0) {
    rep.rel_err = rep.lhs.sign == rep.rhs.sign ? 0.0 : 1.0;
  } else if (rep.lhs.sign != rep.rhs.sign) {
    rep.rel_err = 1.0 + std::exp(-std::abs(rep.lhs.log_abs - rep.rhs.log_abs));
  } else {
    rep.rel_err = -std::expm1(-std::abs(rep.lhs.log_abs - rep.rhs.log_abs));
  }
  return rep;
}

}  // namespace sdplocal
