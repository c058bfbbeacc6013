#include "sdplocal/dual.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdplocal {

GraphOperator::GraphOperator(const SparseGraph& g, std::vector<double> diagonal,
                             double adjacency_coef, double rank_one_coef)
    : g_(&g),
      diagonal_(std::move(diagonal)),
      adjacency_coef_(adjacency_coef),
      rank_one_coef_(rank_one_coef) {
  if (diagonal_.size() != g.num_vertices()) throw InvalidParameter("diagonal length differs from n");
}

void GraphOperator::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = dim();
  if (x.size() != n || y.size() != n) throw InvalidParameter("operator dimension mismatch");
  const double shift = rank_one_coef_ * std::accumulate(x.begin(), x.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double adj = 0;
    for (Vertex j : g_->neighbors(static_cast<Vertex>(i))) adj += x[j];
    y[i] = diagonal_[i] * x[i] + adjacency_coef_ * adj + shift;
  }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void random_unit(std::vector<double>& q, Rng& rng) {
  for (double& x : q) x = gaussian(rng);
  const double s = std::sqrt(dot(q, q));
  for (double& x : q) x /= s;
}

// Two passes of classical Gram-Schmidt; returns the remaining norm.
double orthogonalize(const std::vector<std::vector<double>>& basis, std::vector<double>& w) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) axpy(-dot(q, w), q, w);
  return std::sqrt(dot(w, w));
}

}  // namespace

PsdResult psd_check(const LinearOperator& op, const PsdOptions& o) {
  const std::size_t n = op.dim();
  PsdResult res;
  if (n == 0) {
    res.psd = res.converged = true;
    return res;
  }
  Rng rng = make_rng(o.seed, 0x4c414e43, 0);
  std::vector<double> start(n);
  random_unit(start, rng);
  const std::size_t max_basis = std::max<std::size_t>(2, std::min(o.max_basis, n));
  double norm_est = 0.0;

  for (int restart = 0; restart <= o.max_restarts; ++restart) {
    std::vector<std::vector<double>> Q;
    std::vector<double> alpha, beta;  // beta[j] couples Q[j] and Q[j+1]
    std::vector<double> q = start, w(n);
    int breakdowns = 0;
    Eigen::VectorXd ritz_vec;
    double theta = 0.0, resid = 0.0;
    bool exhausted = false;

    while (true) {
      op.apply(q, w);
      ++res.matvecs;
      Q.push_back(q);
      const double a = dot(w, q);
      alpha.push_back(a);
      const double b = orthogonalize(Q, w);
      const std::size_t m = Q.size();

      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd off = Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
      eig.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
      theta = eig.eigenvalues()(0);
      ritz_vec = eig.eigenvectors().col(0);
      norm_est = std::max({norm_est, std::abs(theta), std::abs(eig.eigenvalues()(m - 1))});
      const double scale = std::max(norm_est, 1e-300);
      resid = b * std::abs(ritz_vec(m - 1));

      const bool breakdown = b <= 1e-12 * scale;
      if (m == n) {
        exhausted = true;
        resid = 0.0;
        break;
      }
      if (breakdown) {
        // Krylov space is invariant; probe a fresh direction a few times before trusting it.
        if (++breakdowns >= 3) {
          exhausted = true;
          resid = 0.0;
          break;
        }
        random_unit(q, rng);
        const double r = orthogonalize(Q, q);
        for (double& x : q) x /= r;
        beta.push_back(0.0);
        continue;
      }
      if (breakdowns == 0 && resid <= o.residual_tol * scale) break;
      if (m >= max_basis) break;
      beta.push_back(b);
      for (std::size_t i = 0; i < n; ++i) q[i] = w[i] / b;
    }

    res.min_eig = theta;
    res.residual = resid;
    res.norm_estimate = norm_est;
    if (exhausted || resid <= o.residual_tol * std::max(norm_est, 1e-300)) {
      res.converged = true;
      break;
    }
    std::fill(start.begin(), start.end(), 0.0);
    for (std::size_t j = 0; j < Q.size(); ++j) axpy(ritz_vec(static_cast<Eigen::Index>(j)), Q[j], start);
    const double s = std::sqrt(dot(start, start));
    for (double& x : start) x /= s;
  }
  res.psd = res.converged && res.min_eig - res.residual >= -o.psd_tol * res.norm_estimate;
  return res;
}

GraphOperator bethe_hessian(const SparseGraph& g, double u) {
  std::vector<double> diag(g.num_vertices());
  for (std::size_t i = 0; i < diag.size(); ++i)
    diag[i] = 1.0 - u * u + u * u * static_cast<double>(g.degree(static_cast<Vertex>(i)));
  return GraphOperator(g, std::move(diag), -u, 0.0);
}

double default_dual_delta(double d) {
  if (!(d > 0)) throw InvalidParameter("d must be positive");
  return std::min(0.05, 0.5 / std::sqrt(d));
}

DualCertificate build_certificate(const SparseGraph& g, double delta, bool strict,
                                  const PsdOptions& options) {
  const double d = g.degree_param();
  if (!(d > 1.0)) throw InvalidParameter("dual certificate needs d > 1");
  if (!(delta > 0.0 && delta < 1.0 / std::sqrt(d)))
    throw InvalidParameter("delta must lie in (0, 1/sqrt(d))");
  const std::size_t n = g.num_vertices();
  if (n == 0) throw InvalidParameter("empty graph");

  DualCertificate cert;
  cert.delta = delta;
  cert.u = 1.0 / std::sqrt(d) - delta;
  const double u = cert.u;
  const double base = (1.0 + delta - u * u) / u;
  std::vector<double> shifted(n);
  for (std::size_t i = 0; i < n; ++i)
    shifted[i] = base + u * static_cast<double>(g.degree(static_cast<Vertex>(i)));
  const double rank_one = d / static_cast<double>(n);

  const GraphOperator M(g, shifted, -1.0, rank_one);
  cert.check = psd_check(M, options);
  cert.min_eig_estimate = cert.check.min_eig;
  cert.psd_ok = cert.check.psd;
  if (strict)
    cert.strict_check = psd_check(GraphOperator(g, shifted, -1.0, (1.0 - u * u) * rank_one), options);

  if (cert.psd_ok) {
    cert.branch = DualBranch::kShifted;
    cert.nu = std::move(shifted);
  } else {
    // diag(D) - A is the Laplacian, so this branch is always feasible.
    cert.branch = DualBranch::kDegree;
    cert.nu.resize(n);
    for (std::size_t i = 0; i < n; ++i) cert.nu[i] = static_cast<double>(g.degree(static_cast<Vertex>(i)));
  }
  cert.dual_value = std::accumulate(cert.nu.begin(), cert.nu.end(), 0.0) / static_cast<double>(n);
  return cert;
}

}  // namespace sdplocal
