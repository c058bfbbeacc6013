#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sdplocal {

// Error categories. The C API maps each one to a distinct status code.
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for task (a, b) under a base seed. Results do not
// depend on how tasks are scheduled.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) + 0x632be59bd9b4e019ULL * (b + 1));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(stream_seed(seed, a, b));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// Poisson variate returned as double so that very large generations do not
// overflow. Means above 1e12 use the moment-matched Gaussian.
inline double poisson(Rng& rng, double mean) {
  if (!(mean >= 0.0)) throw InvalidParameter("poisson mean must be non-negative");
  if (mean == 0.0) return 0.0;
  if (mean < 1e12) return static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
  return std::max(0.0, std::round(mean + std::sqrt(mean) * gaussian(rng)));
}

inline double binomial(Rng& rng, double trials, double p) {
  if (trials <= 0.0 || p <= 0.0) return 0.0;
  if (p >= 1.0) return trials;
  if (trials < 1e12)
    return static_cast<double>(
        std::binomial_distribution<long long>(static_cast<long long>(trials), p)(rng));
  const double m = trials * p;
  return std::clamp(std::round(m + std::sqrt(m * (1.0 - p)) * gaussian(rng)), 0.0, trials);
}

// Runs f(task) for task in [0, count) on up to hardware_concurrency threads.
// Callers derive any randomness from the task index, so output does not
// depend on the thread count.
template <typename F>
void parallel_for(std::size_t count, F&& f) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t t = 0; t < count; ++t) f(t);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t = w; t < count; t += workers) f(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace sdplocal
