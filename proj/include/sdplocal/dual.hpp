#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sdplocal/graph.hpp"

namespace sdplocal {

class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t dim() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
};

// diag(diagonal) + adjacency_coef * A + rank_one_coef * 11^T, never materialized.
class GraphOperator final : public LinearOperator {
 public:
  GraphOperator(const SparseGraph& g, std::vector<double> diagonal, double adjacency_coef,
                double rank_one_coef);
  std::size_t dim() const override { return diagonal_.size(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  const std::vector<double>& diagonal() const { return diagonal_; }
  double adjacency_coef() const { return adjacency_coef_; }
  double rank_one_coef() const { return rank_one_coef_; }

 private:
  const SparseGraph* g_;
  std::vector<double> diagonal_;
  double adjacency_coef_;
  double rank_one_coef_;
};

struct PsdOptions {
  double residual_tol = 1e-8;  // relative to the norm estimate
  double psd_tol = 1e-8;       // PSD when lambda_min >= -psd_tol * norm
  std::size_t max_basis = 300;
  int max_restarts = 60;
  std::uint64_t seed = 0;
};

struct PsdResult {
  bool psd = false;
  bool converged = false;  // false means indeterminate, reported as not PSD
  double min_eig = 0.0;
  double residual = 0.0;
  double norm_estimate = 0.0;
  int matvecs = 0;
};

// Lanczos with full reorthogonalization, restarted from the lowest Ritz vector.
PsdResult psd_check(const LinearOperator& op, const PsdOptions& options = {});

// H(u) = (1 - u^2) I + u^2 D - u A.
GraphOperator bethe_hessian(const SparseGraph& g, double u);

enum class DualBranch { kShifted, kDegree };

struct DualCertificate {
  double u = 0.0;
  double delta = 0.0;
  std::vector<double> nu;
  bool psd_ok = false;
  double min_eig_estimate = 0.0;
  double dual_value = 0.0;
  DualBranch branch = DualBranch::kDegree;
  PsdResult check;
  // Same operator with (1 - u^2) d/n on 11^T; only computed on request.
  std::optional<PsdResult> strict_check;
};

double default_dual_delta(double d);

DualCertificate build_certificate(const SparseGraph& g, double delta, bool strict = false,
                                  const PsdOptions& options = {});

}  // namespace sdplocal
