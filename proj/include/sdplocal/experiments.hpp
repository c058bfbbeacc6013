#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sdplocal {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitBadConfig = 2;

struct CommandResult {
  int exit_code = kExitOk;
  std::string output;  // rendered JSON, CSV, JSON lines or an edge list
  Json document;       // structured result (empty for gen)
};

std::string version_string();
const std::vector<std::string>& command_names();

// Runs one experiment. Bad configs yield kExitBadConfig, failed invariants kExitInvariant.
CommandResult run_command(std::string_view command, const Json& config);

// (d, lambda) -> (a, b) with a = d + lambda sqrt(d), b = d - lambda sqrt(d).
struct BlockModel {
  double a = 0.0;
  double b = 0.0;
  double d() const { return (a + b) / 2; }
  double lambda() const;
  double mu() const { return (a - b) / 2; }
  static BlockModel from_lambda(double d, double lambda);
};

// Reusable check suites; each reports the worst discrepancy it saw.

struct IdentitySuite {
  std::size_t checks = 0;
  double max_z = 0.0;  // |closed form - Monte Carlo| / standard error
};
IdentitySuite gaussian_identity_suite(int trials, std::size_t samples, std::uint64_t seed);

struct IharaSuite {
  std::size_t checks = 0;
  double max_rel_err = 0.0;
  Json rows = Json::array();
};
IharaSuite ihara_bass_suite(int graphs, int max_n, int u_per_graph, std::uint64_t seed);

struct MomentSuite {
  double mean_x = 0, se_mean_x = 0, var_x = 0, se_var_x = 0, target_var_x = 0;
  double mean_y = 0, se_mean_y = 0, var_y = 0, se_var_y = 0, target_var_y = 0;
  double max_z = 0.0;
};
// Fully revealed labels; X and Y are the normalized generation martingales at depth ell.
MomentSuite martingale_moment_suite(double a, double b, int ell, std::size_t samples,
                                    std::uint64_t seed);

// Largest |sum of harmonic weights at depth k - 1| over sampled trees and depths.
double harmonic_sum_error(double d, int depth_l, int trees, std::uint64_t seed);

// psi recomputed from walk probabilities on the two joined trees.
double psi_from_walks(double c1, double c2);

}  // namespace sdplocal
