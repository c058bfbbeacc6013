#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "sdplocal/dual.hpp"
#include "sdplocal/sdp.hpp"

using namespace sdplocal;

namespace {

Eigen::MatrixXd dense(const GraphOperator& op, const SparseGraph& g) {
  const auto n = static_cast<Eigen::Index>(op.dim());
  Eigen::MatrixXd M = Eigen::MatrixXd::Constant(n, n, op.rank_one_coef());
  for (Eigen::Index i = 0; i < n; ++i) M(i, i) += op.diagonal()[i];
  for (auto [i, j] : g.edges()) {
    M(i, j) += op.adjacency_coef();
    M(j, i) += op.adjacency_coef();
  }
  return M;
}

double dense_min_eig(const Eigen::MatrixXd& M) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST_CASE("identity and an indefinite diagonal") {
  SparseGraph empty(50, {}, 0.0);
  const auto id = psd_check(GraphOperator(empty, std::vector<double>(50, 1.0), 0.0, 0.0));
  CHECK(id.psd);
  CHECK(id.converged);
  CHECK(id.min_eig == doctest::Approx(1.0).epsilon(1e-12));

  SparseGraph two(2, {}, 0.0);
  const auto indef = psd_check(GraphOperator(two, {1.0, -1.0}, 0.0, 0.0));
  CHECK_FALSE(indef.psd);
  CHECK(indef.min_eig == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("Lanczos matches a dense eigensolver") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const std::size_t n = 20 + 25 * seed;
    const SparseGraph g = gen_er(n, 3.0, seed);
    Rng rng = make_rng(seed, 99, 0);
    std::vector<double> diag(n);
    for (double& x : diag) x = 4.0 * uniform01(rng) - 1.0;
    const GraphOperator op(g, diag, -1.0 + 2.0 * uniform01(rng), 3.0 / static_cast<double>(n));
    const auto res = psd_check(op, {.seed = seed});
    const double truth = dense_min_eig(dense(op, g));
    CHECK(res.converged);
    CHECK(std::abs(res.min_eig - truth) <= 1e-6);
    CHECK(res.psd == (truth >= 0));
  }
}

TEST_CASE("operator applies the rank-one term implicitly") {
  const SparseGraph g = gen_er(30, 2.0, 5);
  const GraphOperator op(g, std::vector<double>(30, 0.5), -2.0, 0.25);
  Rng rng = make_rng(3, 0, 0);
  std::vector<double> x(30), y(30);
  for (double& v : x) v = gaussian(rng);
  op.apply(x, y);
  const Eigen::VectorXd expect = dense(op, g) * Eigen::Map<Eigen::VectorXd>(x.data(), 30);
  for (int i = 0; i < 30; ++i) CHECK(y[i] == doctest::Approx(expect(i)).epsilon(1e-12));
  std::vector<double> wrong(29);
  CHECK_THROWS_AS(op.apply(wrong, y), InvalidParameter);
}

TEST_CASE("Bethe Hessian small cases") {
  const SparseGraph g = gen_er(100, 3.0, 2);
  const auto h0 = psd_check(bethe_hessian(g, 0.0));
  CHECK(h0.min_eig == doctest::Approx(1.0).epsilon(1e-12));

  SparseGraph edge(2, {{0, 1}}, 1.0);
  for (double u : {0.3, -0.7, 1.5}) {
    const auto H = bethe_hessian(edge, u);
    const Eigen::MatrixXd M = dense(H, edge);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    CHECK(eig.eigenvalues()(0) == doctest::Approx(1.0 - std::abs(u)));
    CHECK(eig.eigenvalues()(1) == doctest::Approx(1.0 + std::abs(u)));
    CHECK(psd_check(H).min_eig == doctest::Approx(1.0 - std::abs(u)).epsilon(1e-10));
  }
}

TEST_CASE("Bethe Hessian plus centering is positive below 1/sqrt(d)") {
  int positive = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SparseGraph g = gen_er(5000, 4.0, seed);
    const double u = 0.5 - 0.05;
    const auto H = bethe_hessian(g, u);
    const GraphOperator shifted(g, H.diagonal(), H.adjacency_coef(), 4.0 / 5000 * (1 - u * u));
    if (psd_check(shifted).min_eig > 0) ++positive;
  }
  CHECK(positive >= 4);
}

TEST_CASE("degree branch is always feasible") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SparseGraph g = gen_er(150, 3.0, seed);
    std::vector<double> deg(150);
    for (Vertex i = 0; i < 150; ++i) deg[i] = g.degree(i);
    const GraphOperator lap(g, deg, -1.0, 3.0 / 150);
    const auto res = psd_check(lap);
    CHECK(res.psd);
    CHECK(dense_min_eig(dense(lap, g)) >= -1e-10);
  }
}

TEST_CASE("certificate branches and parameters") {
  const SparseGraph g = gen_er(3000, 4.0, 7);
  const auto cert = build_certificate(g, 0.05, true);
  CHECK(cert.u == doctest::Approx(0.45));
  REQUIRE(cert.psd_ok);
  CHECK(cert.branch == DualBranch::kShifted);
  CHECK(cert.strict_check.has_value());
  const double base = (1.05 - 0.45 * 0.45) / 0.45;
  CHECK(cert.nu[0] == doctest::Approx(base + 0.45 * g.degree(0)));
  // diag(nu) - A + (d/n) 11^T is exactly the checked operator.
  CHECK(psd_check(GraphOperator(g, cert.nu, -1.0, 4.0 / 3000)).psd);
  CHECK(cert.dual_value == doctest::Approx(base + 0.45 * 2.0 * g.num_edges() / 3000.0));

  CHECK_THROWS_AS(build_certificate(g, 0.0), InvalidParameter);
  CHECK_THROWS_AS(build_certificate(g, 0.5), InvalidParameter);
  CHECK_THROWS_AS(build_certificate(gen_er(100, 0.9, 1), 0.05), InvalidParameter);
  CHECK(default_dual_delta(4.0) == 0.05);
  CHECK(default_dual_delta(400.0) == doctest::Approx(0.025));
}

TEST_CASE("indefinite operator falls back to degrees") {
  // A dense clique has lambda_min(M) < 0 at this u.
  std::vector<Edge> edges;
  for (Vertex i = 0; i < 12; ++i)
    for (Vertex j = i + 1; j < 12; ++j) edges.emplace_back(i, j);
  const SparseGraph g(12, edges, 2.0);
  const auto cert = build_certificate(g, 0.05);
  CHECK_FALSE(cert.psd_ok);
  CHECK(cert.branch == DualBranch::kDegree);
  CHECK(cert.dual_value == doctest::Approx(11.0));
}

TEST_CASE("weak duality against the solver") {
  for (double d : {2.0, 4.0, 8.0}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SparseGraph g = gen_er(10000, d, 100 + seed);
      const auto cert = build_certificate(g, default_dual_delta(d));
      auto [V, rep] = solve(g, {.rank = 8, .tol = 1e-5, .seed = seed, .restarts = 1});
      CHECK(cert.dual_value * 10000 >= rep.objective);
    }
  }
}

TEST_CASE("dual value concentrates across seeds") {
  std::vector<double> values;
  for (std::uint64_t seed = 0; seed < 8; ++seed)
    values.push_back(build_certificate(gen_er(10000, 4.0, seed), 0.05).dual_value);
  double mean = 0, var = 0;
  for (double v : values) mean += v / values.size();
  for (double v : values) var += (v - mean) * (v - mean) / (values.size() - 1);
  CHECK(std::sqrt(var) < 0.05);
}
