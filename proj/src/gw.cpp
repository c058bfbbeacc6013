#include "sdplocal/gw.hpp"

#include <algorithm>
#include <numbers>

namespace sdplocal {

RootedTree RootedTree::from_ball(const BallView& ball) {
  RootedTree t;
  const std::size_t m = ball.vertices.size();
  t.parent.resize(m);
  t.depth.resize(m);
  t.child_begin.assign(m, 0);
  t.child_count.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    t.parent[i] = ball.vertices[i].parent;
    t.depth[i] = ball.vertices[i].depth;
    const auto p = t.parent[i];
    if (p >= 0) {
      if (t.child_count[p] == 0) t.child_begin[p] = static_cast<std::int32_t>(i);
      ++t.child_count[p];
    }
  }
  return t;
}

namespace {

void push_node(RootedTree& t, std::int32_t parent, int depth) {
  t.parent.push_back(parent);
  t.depth.push_back(depth);
  t.child_begin.push_back(0);
  t.child_count.push_back(0);
}

void check_params(const GwParams& p) {
  if (!(p.a >= 0.0 && p.b >= 0.0)) throw InvalidParameter("offspring means must be non-negative");
  if (!(p.delta > 0.0 && p.delta <= 1.0)) throw InvalidParameter("delta must lie in (0, 1]");
}

}  // namespace

GwTree sample_tree(const GwParams& params, int depth_cut, std::uint64_t seed,
                   std::size_t max_nodes) {
  check_params(params);
  if (depth_cut < 0) throw InvalidParameter("depth cut must be non-negative");
  Rng rng = make_rng(seed, 0x7472);
  GwTree out;
  out.depth_cut = depth_cut;
  out.params = params;
  RootedTree& t = out.tree;
  push_node(t, -1, 0);
  if (params.two_type) {
    out.truth.push_back(uniform01(rng) < 0.5 ? 1 : -1);
    out.revealed.push_back(uniform01(rng) < params.delta ? static_cast<Label>(out.truth[0])
                                                         : Label::kHidden);
  }
  for (std::size_t v = 0; v < t.size(); ++v) {
    if (t.depth[v] == depth_cut) continue;
    const auto first = static_cast<std::int32_t>(t.size());
    auto add_children = [&](double count, std::int8_t label) {
      if (t.size() + static_cast<std::size_t>(count) > max_nodes)
        throw InvalidParameter("tree exceeds node budget");
      for (double c = 0; c < count; ++c) {
        push_node(t, static_cast<std::int32_t>(v), t.depth[v] + 1);
        if (label != 0) {
          out.truth.push_back(label);
          out.revealed.push_back(uniform01(rng) < params.delta ? static_cast<Label>(label)
                                                               : Label::kHidden);
        }
      }
    };
    if (params.two_type) {
      const std::int8_t own = out.truth[v];
      add_children(poisson(rng, params.a / 2), own);
      add_children(poisson(rng, params.b / 2), static_cast<std::int8_t>(-own));
    } else {
      add_children(poisson(rng, params.d()), 0);
    }
    t.child_begin[v] = first;
    t.child_count[v] = static_cast<std::int32_t>(t.size()) - first;
  }
  return out;
}

MartingaleState martingales(const GwTree& t, int ell) {
  if (ell < 0) throw InvalidParameter("ell must be non-negative");
  if (ell > t.depth_cut) throw OutOfRange("ell exceeds the depth cut");
  double count = 0, plus = 0, minus = 0;
  for (std::size_t v = 0; v < t.tree.size(); ++v) {
    if (t.tree.depth[v] != ell) continue;
    ++count;
    if (t.params.two_type) {
      if (t.revealed[v] == Label::kPlus) ++plus;
      if (t.revealed[v] == Label::kMinus) ++minus;
    }
  }
  MartingaleState s;
  s.ell = ell;
  s.x = count == 0 ? 0.0 : count / std::pow(t.params.d(), ell);
  if (t.params.two_type) {
    const double scale = t.params.delta * std::pow(t.params.mu(), ell);
    if (scale != 0.0) {
      s.d_signed = (plus - minus) / scale;
      s.y = t.truth[0] * *s.d_signed;
    }
  }
  return s;
}

GenerationProfile sample_profile(const GwParams& params, int depth, Rng& rng) {
  check_params(params);
  GenerationProfile p;
  p.total.assign(depth + 1, 0.0);
  if (!params.two_type) {
    p.total[0] = 1;
    for (int k = 1; k <= depth && p.total[k - 1] > 0; ++k)
      p.total[k] = poisson(rng, params.d() * p.total[k - 1]);
    return p;
  }
  p.same_revealed.assign(depth + 1, 0.0);
  p.opposite_revealed.assign(depth + 1, 0.0);
  double same = 1, opposite = 0;
  for (int k = 0; k <= depth; ++k) {
    if (k > 0) {
      if (same + opposite == 0) break;
      const double ss = poisson(rng, params.a / 2 * same);
      const double so = poisson(rng, params.b / 2 * same);
      const double os = poisson(rng, params.b / 2 * opposite);
      const double oo = poisson(rng, params.a / 2 * opposite);
      same = ss + os;
      opposite = so + oo;
    }
    p.total[k] = same + opposite;
    p.same_revealed[k] = binomial(rng, same, params.delta);
    p.opposite_revealed[k] = binomial(rng, opposite, params.delta);
  }
  return p;
}

void MeanAccumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double MeanAccumulator::std_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

Estimate MeanAccumulator::estimate(double scale) const {
  return {scale * mean_, std::abs(scale) * std_error(), n_};
}

namespace {

constexpr std::size_t kChunk = 4096;

// Evaluates draw(rng) `samples` times with per-chunk streams and averages in order.
template <typename Draw>
MeanAccumulator chunked_samples(std::size_t samples, std::uint64_t seed, std::uint64_t tag,
                                Draw draw) {
  std::vector<double> values(samples);
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, tag, c);
    const std::size_t end = std::min(samples, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) values[i] = draw(rng);
  });
  MeanAccumulator acc;
  for (double v : values) acc.add(v);
  return acc;
}

}  // namespace

ConductancePool conductance_population(double d, int depth, std::size_t pool_size,
                                       std::uint64_t seed, Offspring law) {
  if (!(d >= 0.0)) throw InvalidParameter("d must be non-negative");
  if (depth < 0) throw InvalidParameter("depth must be non-negative");
  if (pool_size == 0) throw InvalidParameter("pool must be non-empty");
  if (law == Offspring::kFixed && d != std::floor(d))
    throw InvalidParameter("fixed offspring count must be an integer");
  ConductancePool out;
  out.depth = depth;
  // r = c/(1+c); the boundary c = +inf is r = 1.
  std::vector<double> r(pool_size, 1.0), next_r(pool_size);
  out.c.assign(pool_size, std::numeric_limits<double>::infinity());
  const std::size_t chunks = (pool_size + kChunk - 1) / kChunk;
  for (int gen = 1; gen <= depth; ++gen) {
    parallel_for(chunks, [&](std::size_t chunk) {
      Rng rng = make_rng(seed, static_cast<std::uint64_t>(gen), chunk);
      std::uniform_int_distribution<std::size_t> pick(0, pool_size - 1);
      const std::size_t end = std::min(pool_size, (chunk + 1) * kChunk);
      for (std::size_t i = chunk * kChunk; i < end; ++i) {
        const double children = law == Offspring::kFixed ? d : poisson(rng, d);
        double c = 0.0;
        for (double k = 0; k < children; ++k) c += r[pick(rng)];
        out.c[i] = c;
        next_r[i] = c / (1.0 + c);
      }
    });
    r.swap(next_r);
  }
  return out;
}

namespace {

// Effective conductance below each node with depth < cut, depth-`cut` nodes grounded.
std::vector<double> subtree_conductance(const RootedTree& t, int cut) {
  std::vector<double> ceff(t.size(), 0.0);
  for (std::size_t v = t.size(); v-- > 0;) {
    if (t.depth[v] >= cut) continue;
    double c = 0.0;
    for (std::int32_t k = 0; k < t.child_count[v]; ++k) {
      const auto w = static_cast<std::size_t>(t.child_begin[v] + k);
      c += t.depth[w] == cut ? 1.0 : ceff[w] / (1.0 + ceff[w]);
    }
    ceff[v] = c;
  }
  return ceff;
}

}  // namespace

double tree_conductance(const RootedTree& t, int depth) {
  if (depth < 0) throw InvalidParameter("depth must be non-negative");
  if (t.size() == 0) throw InvalidInput("empty tree");
  if (depth == 0) return std::numeric_limits<double>::infinity();
  return subtree_conductance(t, depth)[0];
}

std::optional<std::vector<double>> harmonic_measure(const RootedTree& t, int depth_l) {
  if (depth_l < 0) throw InvalidParameter("depth must be non-negative");
  if (t.size() == 0) throw InvalidInput("empty tree");
  const bool reaches =
      std::any_of(t.depth.begin(), t.depth.end(), [&](int k) { return k == depth_l; });
  if (!reaches) return std::nullopt;
  const std::vector<double> ceff = subtree_conductance(t, depth_l);
  std::vector<double> h(t.size(), 0.0);
  h[0] = 1.0;
  for (std::size_t v = 0; v < t.size(); ++v) {
    if (t.depth[v] >= depth_l || h[v] == 0.0) continue;
    for (std::int32_t k = 0; k < t.child_count[v]; ++k) {
      const auto w = static_cast<std::size_t>(t.child_begin[v] + k);
      const double branch = t.depth[w] == depth_l ? 1.0 : ceff[w] / (1.0 + ceff[w]);
      h[w] = h[v] * branch / ceff[v];
    }
  }
  return h;
}

double psi(double c1, double c2) {
  if (!(c1 >= 0.0 && c2 >= 0.0)) throw InvalidParameter("conductances must be non-negative");
  if (c1 == 0.0 && c2 == 0.0) return 1.0;
  const bool inf1 = std::isinf(c1), inf2 = std::isinf(c2);
  if (inf1 && inf2) return 0.0;
  if (inf1) return 1.0 / std::sqrt(1.0 + c2);
  if (inf2) return 1.0 / std::sqrt(1.0 + c1);
  return (c1 * std::sqrt(1.0 + c2) + c2 * std::sqrt(1.0 + c1)) / (c1 + c2 + c1 * c2);
}

double s_bar_er(double x1, double x2, double d) {
  if (!(x1 >= 0.0 && x2 >= 0.0)) throw InvalidParameter("X must be non-negative");
  if (!(d > 0.0)) throw InvalidParameter("d must be positive");
  if (x1 == 0.0 && x2 == 0.0) return d;
  return std::sqrt(d) * (x1 + x2) / (std::sqrt(x1 + x2 / d) * std::sqrt(x2 + x1 / d));
}

double s_bar_sbm(double x1, double y1, double x2, double y2, double a, double b, double alpha) {
  if (!(x1 >= 0.0 && x2 >= 0.0)) throw InvalidParameter("X must be non-negative");
  const double d = (a + b) / 2, mu = (a - b) / 2;
  if (!(d > 0.0) || mu == 0.0) throw InvalidParameter("need d > 0 and a != b");
  if (x1 == 0.0 && x2 == 0.0) return d;
  const double sd = std::sqrt(d);
  auto branch = [&](double sign) {
    const double u1 = y1 + sign * y2 / mu, u2 = y2 + sign * y1 / mu;
    const double num = (x1 + x2) / sd + sign * alpha * u1 * u2;
    return num / (std::sqrt(x1 + x2 / d + alpha * u1 * u1) * std::sqrt(x2 + x1 / d + alpha * u2 * u2));
  };
  return a / 2 * branch(1.0) + b / 2 * branch(-1.0);
}

double default_alpha(double a, double b) {
  const double d = (a + b) / 2, mu = (a - b) / 2;
  return (mu * mu - d) / (mu * mu * std::sqrt(d));
}

double extinction_probability(double d) {
  if (!(d >= 0.0)) throw InvalidParameter("d must be non-negative");
  double q = 0.0;
  for (int it = 0; it < 10'000'000; ++it) {
    const double next = std::exp(d * (q - 1.0));
    if (std::abs(next - q) < 1e-16) return next;
    q = next;
  }
  return q;
}

int default_depth(double d) { return d >= 2.0 ? 30 : 60; }

Estimate harmonic_bound(double d, int depth, std::size_t pool_size, std::uint64_t seed) {
  if (pool_size < 2) throw InvalidParameter("pool must hold at least two samples");
  const ConductancePool pool = conductance_population(d, depth, pool_size, seed);
  const std::size_t half = pool_size / 2;
  MeanAccumulator acc;
  for (std::size_t i = 0; i < half; ++i) acc.add(psi(pool.c[i], pool.c[i + half]));
  return acc.estimate(d);
}

Estimate simple_bound_tree(double d, int depth, std::size_t samples, std::uint64_t seed) {
  if (!(d > 0.0)) throw InvalidParameter("d must be positive");
  if (depth < 0) throw InvalidParameter("depth must be non-negative");
  const GwParams params = GwParams::one_type(d);
  const double scale = std::pow(d, depth);
  return chunked_samples(samples, seed, 0x5b, [&](Rng& rng) {
           const double x1 = sample_profile(params, depth, rng).total[depth] / scale;
           const double x2 = sample_profile(params, depth, rng).total[depth] / scale;
           return s_bar_er(x1, x2, d);
         })
      .estimate();
}

namespace {

// Prefix sums of a profile: C = counts, S = sum N_k d^-k, H = sum N_k d^-k/2.
struct ProfileSums {
  std::vector<double> count, x_sum, half_sum;
  double at(const std::vector<double>& v, int k) const { return k < 0 ? 0.0 : v[k]; }
};

ProfileSums prefix_sums(const std::vector<double>& total, double d) {
  ProfileSums s;
  double c = 0, x = 0, h = 0;
  for (std::size_t k = 0; k < total.size(); ++k) {
    const double w = std::pow(d, -static_cast<double>(k));
    c += total[k];
    x += total[k] * w;
    h += total[k] * std::sqrt(w);
    s.count.push_back(c);
    s.x_sum.push_back(x);
    s.half_sum.push_back(h);
  }
  return s;
}

// E[F_o F_o'] for the depth-ell rule on two trees joined by the root edge.
// `lab1`/`lab2` are the signed revealed shell terms (sigma * D) at each root's
// ball and `same` is sigma_o * sigma_o'. Pass alpha = 0 for the unlabelled rule.
double joined_pair_expectation(const std::vector<double>& t1, const std::vector<double>& t2,
                               double lab1, double lab2, double same, double d, double alpha,
                               int ell) {
  const ProfileSums p = prefix_sums(t1, d), q = prefix_sums(t2, d);
  const double shell1 = t1[ell] + (ell >= 1 ? t2[ell - 1] : 0.0);
  const double shell2 = t2[ell] + (ell >= 1 ? t1[ell - 1] : 0.0);
  const double sd = std::sqrt(d);
  const double offset = alpha * ell;
  const double norm1 = p.x_sum[ell] + q.at(q.x_sum, ell - 1) / d + offset * lab1 * lab1;
  const double norm2 = q.x_sum[ell] + p.at(p.x_sum, ell - 1) / d + offset * lab2 * lab2;
  const double size1 = p.count[ell] + q.at(q.count, ell - 1);
  const double size2 = q.count[ell] + p.at(p.count, ell - 1);
  const double overlap = p.at(p.count, ell - 1) + q.at(q.count, ell - 1);
  constexpr double kSignLinear = 0.7978845608028654;  // sqrt(2/pi)
  if (shell1 > 0 && shell2 > 0) {
    const double shared = (p.at(p.x_sum, ell - 1) + q.at(q.x_sum, ell - 1)) / sd;
    return (shared + same * offset * lab1 * lab2) / std::sqrt(norm1 * norm2);
  }
  if (shell1 == 0 && shell2 == 0)
    return 2.0 / std::numbers::pi * std::asin(std::min(1.0, overlap / std::sqrt(size1 * size2)));
  if (shell1 == 0) {
    const double dot = p.at(p.half_sum, ell - 1) / sd + q.at(q.half_sum, ell - 1);
    return kSignLinear * dot / std::sqrt(norm2 * size1);
  }
  const double dot = q.at(q.half_sum, ell - 1) / sd + p.at(p.half_sum, ell - 1);
  return kSignLinear * dot / std::sqrt(norm1 * size2);
}

void check_sbm(double a, double b, double delta) {
  const double d = (a + b) / 2, mu = (a - b) / 2;
  if (!(b >= 0.0 && a >= 0.0)) throw InvalidParameter("a, b must be non-negative");
  if (!(d > 1.0)) throw InvalidParameter("need d > 1");
  if (!(mu > std::sqrt(d))) throw InvalidParameter("need mu > sqrt(d), i.e. lambda > 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidParameter("delta must lie in (0, 1]");
}

}  // namespace

Estimate simple_value_tree(double d, int ell, std::size_t samples, std::uint64_t seed) {
  if (!(d > 0.0)) throw InvalidParameter("d must be positive");
  if (ell < 0) throw InvalidParameter("ell must be non-negative");
  const GwParams params = GwParams::one_type(d);
  return chunked_samples(samples, seed, 0x5f, [&](Rng& rng) {
           const auto t1 = sample_profile(params, ell, rng).total;
           const auto t2 = sample_profile(params, ell, rng).total;
           return joined_pair_expectation(t1, t2, 0.0, 0.0, 1.0, d, 0.0, ell);
         })
      .estimate(d);
}

Estimate sbm_bound_tree(double a, double b, double delta, double alpha, int depth,
                        std::size_t samples, std::uint64_t seed) {
  check_sbm(a, b, delta);
  if (!(alpha > 0.0)) throw InvalidParameter("alpha must be positive");
  const GwParams params = GwParams::labelled(a, b, delta);
  const double xs = std::pow(params.d(), depth), ys = delta * std::pow(params.mu(), depth);
  return chunked_samples(samples, seed, 0x5c, [&](Rng& rng) {
           const auto p1 = sample_profile(params, depth, rng);
           const auto p2 = sample_profile(params, depth, rng);
           const double y1 = (p1.same_revealed[depth] - p1.opposite_revealed[depth]) / ys;
           const double y2 = (p2.same_revealed[depth] - p2.opposite_revealed[depth]) / ys;
           return s_bar_sbm(p1.total[depth] / xs, y1, p2.total[depth] / xs, y2, a, b, alpha);
         })
      .estimate();
}

Estimate sbm_value_tree(double a, double b, double delta, double alpha, int ell,
                        std::size_t samples, std::uint64_t seed) {
  check_sbm(a, b, delta);
  if (!(alpha >= 0.0)) throw InvalidParameter("alpha must be non-negative");
  if (ell < 0) throw InvalidParameter("ell must be non-negative");
  const GwParams params = GwParams::labelled(a, b, delta);
  const double d = params.d(), scale = delta * std::pow(params.mu(), ell);
  return chunked_samples(samples, seed, 0x5d, [&](Rng& rng) {
           const double same = uniform01(rng) < a / (a + b) ? 1.0 : -1.0;
           const auto p1 = sample_profile(params, ell, rng);
           const auto p2 = sample_profile(params, ell, rng);
           auto imbalance = [&](const GenerationProfile& p, int k) {
             return k < 0 ? 0.0 : p.same_revealed[k] - p.opposite_revealed[k];
           };
           const double lab1 = (imbalance(p1, ell) + same * imbalance(p2, ell - 1)) / scale;
           const double lab2 = (imbalance(p2, ell) + same * imbalance(p1, ell - 1)) / scale;
           return joined_pair_expectation(p1.total, p2.total, lab1, lab2, same, d, alpha, ell);
         })
      .estimate(d);
}

}  // namespace sdplocal
