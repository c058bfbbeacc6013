#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdplocal {

// Row-major n x k factor V of a Gram matrix X = V V^T.
struct GramFactor {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> v;

  GramFactor() = default;
  GramFactor(std::size_t rows, std::size_t cols) : n(rows), k(cols), v(rows * cols, 0.0) {}
  std::span<double> row(std::size_t i) { return {v.data() + i * k, k}; }
  std::span<const double> row(std::size_t i) const { return {v.data() + i * k, k}; }
};

}  // namespace sdplocal
