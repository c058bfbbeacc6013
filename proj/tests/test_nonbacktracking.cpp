#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "sdplocal/dual.hpp"
#include "sdplocal/nonbacktracking.hpp"

using namespace sdplocal;

namespace {

// Dense operator over ordered pairs, rows/cols indexed by i*n+j (diagonal rows zero).
Eigen::MatrixXd dense_nb(const SparseGraph& g, double c) {
  const std::size_t n = g.num_vertices();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n * n, n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (std::size_t jp = 0; jp < n; ++jp) {
        if (jp == i || jp == j) continue;
        const double a = g.has_edge(static_cast<Vertex>(j), static_cast<Vertex>(jp)) ? 1.0 : 0.0;
        B(i * n + j, j * n + jp) = a - c;
      }
    }
  return B;
}

std::vector<double> random_vec(std::size_t size, std::uint64_t seed) {
  Rng rng = make_rng(seed, 1, 2);
  std::vector<double> x(size);
  for (double& v : x) v = gaussian(rng);
  return x;
}

WeightedEdgeGraph random_weighted(std::size_t n, double p, Rng& rng) {
  std::vector<WeightedEdge> edges;
  for (Vertex i = 0; i < n; ++i)
    for (Vertex j = i + 1; j < n; ++j)
      if (uniform01(rng) < p) {
        double c = 0;
        while (c == 0.0) c = 4.0 * uniform01(rng) - 2.0;
        edges.push_back({i, j, c});
      }
  return WeightedEdgeGraph(n, edges);
}

double random_admissible_u(const WeightedEdgeGraph& g, Rng& rng) {
  while (true) {
    const double u = 1.6 * uniform01(rng) - 0.8;
    bool ok = true;
    for (const auto& e : g.edges()) ok = ok && std::abs(std::abs(u * e.c) - 1.0) > 1e-3;
    if (ok) return u;
  }
}

WeightedEdgeGraph unit_weights(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<WeightedEdge> w;
  for (auto [i, j] : edges) w.push_back({i, j, 1.0});
  return WeightedEdgeGraph(n, w);
}

}  // namespace

TEST_CASE("indicator on the empty graph") {
  const std::size_t n = 6;
  SparseGraph g(n, {}, 3.0);
  const auto op = NbOperator::centered(g);
  std::vector<double> x(n * n, 0.0), y(n * n);
  x[1 * n + 2] = 1.0;
  op.apply(x, y);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double expect = 0.0;
      if (j == 1 && i != 1 && i != 2) expect = -3.0 / n;
      CHECK(y[i * n + j] == doctest::Approx(expect).epsilon(1e-15));
    }
  }
}

TEST_CASE("matvec matches the dense operator and is linear") {
  for (std::uint64_t seed : {1u, 2u}) {
    const SparseGraph g = gen_er(12, 3.0, seed);
    for (bool centered : {true, false}) {
      const auto op = centered ? NbOperator::centered(g) : NbOperator::uncentered(g);
      const Eigen::MatrixXd B = dense_nb(g, op.centering());
      auto x = random_vec(144, seed), y = random_vec(144, seed + 7);
      for (std::size_t i = 0; i < 12; ++i) x[i * 12 + i] = y[i * 12 + i] = 0.0;
      std::vector<double> bx(144), by(144), bxy(144), sum(144);
      op.apply(x, bx);
      op.apply(y, by);
      for (std::size_t t = 0; t < 144; ++t) sum[t] = x[t] + y[t];
      op.apply(sum, bxy);
      const Eigen::VectorXd expect = B * Eigen::Map<Eigen::VectorXd>(x.data(), 144);
      for (std::size_t t = 0; t < 144; ++t) {
        CHECK(std::abs(bx[t] - expect(t)) <= 1e-12);
        CHECK(std::abs(bxy[t] - bx[t] - by[t]) <= 1e-12);
      }
    }
  }
  SparseGraph g(5, {}, 1.0);
  std::vector<double> small(20), out(25);
  CHECK_THROWS_AS(NbOperator::centered(g).apply(small, out), InvalidParameter);
  CHECK_THROWS_AS(NbOperator::centered(gen_er(50, 2.0, 1), 40), InvalidParameter);
}

TEST_CASE("Gelfand estimate on small cases") {
  // Spectral radius of the dense operator at n = 12.
  const SparseGraph g = gen_er(12, 3.0, 4);
  const auto op = NbOperator::centered(g);
  const Eigen::MatrixXd B = dense_nb(g, op.centering());
  const double rho = Eigen::EigenSolver<Eigen::MatrixXd>(B, false).eigenvalues().cwiseAbs().maxCoeff();
  const auto est = spectral_radius_estimate(op, 400, 3, 1);
  CHECK(est.estimate == doctest::Approx(rho).epsilon(0.02));
  CHECK(est.trials.size() == 3);
  CHECK(est.spread >= 0.0);
  CHECK_THROWS_AS(spectral_radius_estimate(op, 5, 1, 1), InvalidParameter);
}

TEST_CASE("pure centering stays below the row-sum bound") {
  SparseGraph g(500, {}, 4.0);
  const auto est = spectral_radius_estimate(NbOperator::centered(g), 30, 2, 3);
  CHECK(est.estimate <= 4.0 + 0.1);
}

TEST_CASE("estimate is invariant under relabeling") {
  const std::size_t n = 300;
  const SparseGraph g = gen_er(n, 4.0, 8);
  std::vector<Vertex> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = make_rng(5, 5, 5);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Edge> edges;
  for (auto [i, j] : g.edges()) edges.emplace_back(perm[i], perm[j]);
  const SparseGraph h(n, edges, 4.0);
  const auto x = random_vec(n * n, 11);
  std::vector<double> xp(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) xp[perm[i] * n + perm[j]] = x[i * n + j];
  const double a = gelfand_estimate(NbOperator::centered(g), x, 40);
  const double b = gelfand_estimate(NbOperator::centered(h), xp, 40);
  CHECK(std::abs(a - b) <= 1e-6);
}

TEST_CASE("explicit weighted operator on small graphs") {
  const auto edge = unit_weights(2, {{0, 1}});
  CHECK(build_bc(edge).isZero());
  CHECK(ihara_bass_check(edge, 0.3).lhs.value() == doctest::Approx(1.0));
  CHECK(ihara_bass_check(edge, 0.3).rhs.value() == doctest::Approx(1.0));

  const auto path = unit_weights(3, {{0, 1}, {1, 2}});
  const Eigen::MatrixXd P = build_bc(path);
  CHECK((P * P).isZero());
  CHECK(log_determinant(Eigen::MatrixXd::Identity(4, 4) - 0.7 * P).value() == doctest::Approx(1.0));

  const auto tri = unit_weights(3, {{0, 1}, {1, 2}, {0, 2}});
  const Eigen::MatrixXd T = build_bc(tri);
  CHECK(T.rows() == 6);
  CHECK((T * T * T - Eigen::MatrixXd::Identity(6, 6)).isZero());
  const auto rep = ihara_bass_check(tri, 0.5);
  CHECK(rep.lhs.value() == doctest::Approx(49.0 / 64.0).epsilon(1e-12));
  CHECK(std::abs(rep.rhs.value() - 49.0 / 64.0) <= 1e-10);
  CHECK(rep.rel_err <= 1e-10);
  CHECK_THROWS_AS(ihara_bass_check(tri, 1.0), InvalidParameter);

  CHECK_THROWS_AS(WeightedEdgeGraph(3, {{0, 1, 0.0}}), InvalidInput);
  CHECK_THROWS_AS(WeightedEdgeGraph(3, {{0, 1, 1.0}, {1, 0, 2.0}}), InvalidInput);
  CHECK_THROWS_AS(WeightedEdgeGraph(3, {{0, 0, 1.0}}), InvalidInput);
}

TEST_CASE("weighted identity on random graphs") {
  Rng rng = make_rng(2024, 0, 0);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * 11);
    const auto g = random_weighted(n, 0.5, rng);
    const double u = random_admissible_u(g, rng);
    worst = std::max(worst, ihara_bass_check(g, u).rel_err);
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("unit weights reduce to the Bethe Hessian") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const SparseGraph g = gen_er(50, 3.0, seed);
    const std::vector<Edge> edges = g.edges();
    const auto w = unit_weights(50, edges);
    for (double u : {0.2, 0.45, -0.6}) {
      const Eigen::MatrixXd L = deformed_laplacian(w, u);
      const auto H = bethe_hessian(g, u);
      std::vector<double> e(50), he(50);
      for (Eigen::Index k = 0; k < 50; ++k) {
        std::fill(e.begin(), e.end(), 0.0);
        e[k] = 1.0;
        H.apply(e, he);
        for (Eigen::Index r = 0; r < 50; ++r) CHECK(std::abs(L(r, k) - he[r] / (1 - u * u)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("zeros of the surrogate determinant sit at reciprocal eigenvalues") {
  Rng rng = make_rng(77, 0, 0);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_weighted(7, 0.6, rng);
    if (g.edges().empty()) continue;
    const Eigen::MatrixXd B = build_bc(g);
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(B, false).eigenvalues();
    for (const std::complex<double>& lam : ev) {
      if (std::abs(lam.imag()) > 1e-9 || std::abs(lam.real()) < 1e-3) continue;
      const double u = 1.0 / lam.real();
      bool pole = false;
      for (const auto& e : g.edges()) pole = pole || std::abs(std::abs(u * e.c) - 1.0) < 1e-6;
      if (pole) continue;
      const Eigen::MatrixXd L = deformed_laplacian(g, u);
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(L).singularValues();
      CHECK(sv(sv.size() - 1) <= 1e-6 * std::max(1.0, sv(0)));
      ++checked;
    }
  }
  CHECK(checked > 5);
}
