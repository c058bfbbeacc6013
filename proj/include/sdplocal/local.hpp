#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "sdplocal/gram.hpp"
#include "sdplocal/graph.hpp"

namespace sdplocal {

enum class FieldKind { kLinear, kSign };

// Output rule at one root. Linear: xi = <w, z> + offset. Sign: xi = sign(<a, z>).
struct WeightField {
  Vertex root = 0;
  FieldKind kind = FieldKind::kLinear;
  std::vector<std::pair<Vertex, double>> support;
  double offset = 0.0;
  double norm_check = 0.0;  // second moment of xi
};

// What to do when the ball around a root contains a cycle.
//  kBfsTree:  apply the tree rule with BFS depths (and the BFS spanning tree).
//  kRootMark: output the root's own mark, xi = z(root).
enum class CyclePolicy { kBfsTree, kRootMark };

class LocalRule {
 public:
  explicit LocalRule(const SparseGraph& g, int ell, CyclePolicy policy);
  virtual ~LocalRule() = default;
  virtual WeightField field(Vertex root, BallWorkspace& ws) const = 0;

  const SparseGraph& graph() const { return g_; }
  int ell() const { return ell_; }
  CyclePolicy policy() const { return policy_; }

 protected:
  WeightField root_mark(Vertex root) const;
  // Sign rule over all ball vertices with depth <= max_depth.
  static WeightField sign_field(const BallView& ball, int max_depth);

  const SparseGraph& g_;
  int ell_;
  CyclePolicy policy_;
};

// Weights d^{-k/2} by depth, normalized.
class SimpleRule final : public LocalRule {
 public:
  SimpleRule(const SparseGraph& g, int ell, CyclePolicy policy = CyclePolicy::kBfsTree);
  WeightField field(Vertex root, BallWorkspace& ws) const override;
};

// Weights sqrt(h(v)) / sqrt(ell+1), h the depth-L harmonic measure.
class HarmonicRule final : public LocalRule {
 public:
  HarmonicRule(const SparseGraph& g, int ell, int depth_l,
               CyclePolicy policy = CyclePolicy::kBfsTree);
  WeightField field(Vertex root, BallWorkspace& ws) const override;
  int depth_l() const { return depth_l_; }

 private:
  int depth_l_;
};

// Simple weights plus the revealed-label offset D_ell * sqrt(alpha * ell), normalized.
class SbmRule final : public LocalRule {
 public:
  SbmRule(const SparseGraph& g, const PlantedLabels& labels, int ell, double alpha, double mu,
          CyclePolicy policy = CyclePolicy::kBfsTree);
  WeightField field(Vertex root, BallWorkspace& ws) const override;

 private:
  const PlantedLabels& labels_;
  double alpha_;
  double mu_;
};

std::vector<WeightField> materialize(const LocalRule& rule);

// E_z[xi_i xi_j] by the Gaussian identities.
double pair_expectation(const WeightField& a, const WeightField& b);

enum class ValueMethod { kClosedForm, kMonteCarlo };

struct LocalValueReport {
  double edge_term = 0.0;
  double centering_term = 0.0;
  double value = 0.0;
  ValueMethod method = ValueMethod::kClosedForm;
  std::optional<double> mc_std_error;
  // Closed form only: standard error of the edge term treating per-vertex
  // contributions sum_{j ~ i} E[xi_i xi_j] as independent.
  std::optional<double> vertex_std_error;
  std::size_t n_samples = 0;
};

LocalValueReport value_closed_form(const LocalRule& rule);
LocalValueReport value_monte_carlo(const LocalRule& rule, std::size_t n_samples,
                                   std::uint64_t seed);

// Columns are independent realizations of xi; rows normalized to unit length.
GramFactor gram_factor_from_fields(const LocalRule& rule, std::size_t n_samples,
                                   std::uint64_t seed);

// CSV rows root,vertex,weight,offset.
void write_fields_csv(std::ostream& out, const std::vector<WeightField>& fields);

}  // namespace sdplocal
