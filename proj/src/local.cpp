#include "sdplocal/local.hpp"

#include <algorithm>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "sdplocal/gw.hpp"

namespace sdplocal {

namespace {

constexpr double kSqrt2OverPi = 0.7978845608028654;

std::vector<double> half_powers(double d, int ell) {
  std::vector<double> w(static_cast<std::size_t>(ell) + 1);
  for (int k = 0; k <= ell; ++k) w[k] = std::pow(d, -0.5 * k);
  return w;
}

void normalize(WeightField& f) {
  double s = f.offset * f.offset;
  for (const auto& [v, w] : f.support) s += w * w;
  const double norm = std::sqrt(s);
  for (auto& [v, w] : f.support) w /= norm;
  f.offset /= norm;
  s = f.offset * f.offset;
  for (const auto& [v, w] : f.support) s += w * w;
  f.norm_check = s;
}

}  // namespace

LocalRule::LocalRule(const SparseGraph& g, int ell, CyclePolicy policy)
    : g_(g), ell_(ell), policy_(policy) {
  if (ell < 1) throw InvalidParameter("ell must be at least 1");
  if (g.num_edges() > 0 && !(g.degree_param() > 0.0))
    throw InvalidParameter("degree parameter must be positive");
}

WeightField LocalRule::root_mark(Vertex root) const {
  WeightField f;
  f.root = root;
  f.support = {{root, 1.0}};
  f.norm_check = 1.0;
  return f;
}

WeightField LocalRule::sign_field(const BallView& ball, int max_depth) {
  WeightField f;
  f.root = ball.root;
  f.kind = FieldKind::kSign;
  for (const auto& v : ball.vertices)
    if (v.depth <= max_depth) f.support.emplace_back(v.vertex, 1.0);
  f.norm_check = 1.0;
  return f;
}

SimpleRule::SimpleRule(const SparseGraph& g, int ell, CyclePolicy policy)
    : LocalRule(g, ell, policy) {}

WeightField SimpleRule::field(Vertex root, BallWorkspace& ws) const {
  const BallView ball = ws.ball(g_, root, ell_);
  if (!ball.is_tree && policy_ == CyclePolicy::kRootMark) return root_mark(root);
  if (ball.vertices.back().depth < ell_) return sign_field(ball, ell_);
  const auto scale = half_powers(g_.degree_param(), ell_);
  WeightField f;
  f.root = root;
  f.support.reserve(ball.vertices.size());
  for (const auto& v : ball.vertices) f.support.emplace_back(v.vertex, scale[v.depth]);
  normalize(f);
  return f;
}

HarmonicRule::HarmonicRule(const SparseGraph& g, int ell, int depth_l, CyclePolicy policy)
    : LocalRule(g, ell, policy), depth_l_(depth_l) {
  if (depth_l < ell) throw InvalidParameter("L must be at least ell");
}

WeightField HarmonicRule::field(Vertex root, BallWorkspace& ws) const {
  const BallView ball = ws.ball(g_, root, depth_l_);
  if (!ball.is_tree && policy_ == CyclePolicy::kRootMark) return root_mark(root);
  const auto h = harmonic_measure(RootedTree::from_ball(ball), depth_l_);
  if (!h) return sign_field(ball, ell_);
  WeightField f;
  f.root = root;
  const double scale = 1.0 / std::sqrt(ell_ + 1.0);
  for (std::size_t i = 0; i < ball.vertices.size() && ball.vertices[i].depth <= ell_; ++i)
    if ((*h)[i] > 0.0) f.support.emplace_back(ball.vertices[i].vertex, std::sqrt((*h)[i]) * scale);
  double s = 0;
  for (const auto& [v, w] : f.support) s += w * w;
  f.norm_check = s;
  return f;
}

SbmRule::SbmRule(const SparseGraph& g, const PlantedLabels& labels, int ell, double alpha,
                 double mu, CyclePolicy policy)
    : LocalRule(g, ell, policy), labels_(labels), alpha_(alpha), mu_(mu) {
  if (labels.revealed.size() != g.num_vertices())
    throw InvalidParameter("labels missing or of wrong length");
  if (!(alpha > 0.0)) throw InvalidParameter("alpha must be positive");
  if (mu == 0.0) throw InvalidParameter("mu must be non-zero");
}

WeightField SbmRule::field(Vertex root, BallWorkspace& ws) const {
  const BallView ball = ws.ball(g_, root, ell_);
  if (!ball.is_tree && policy_ == CyclePolicy::kRootMark) return root_mark(root);
  if (ball.vertices.back().depth < ell_) return sign_field(ball, ell_);
  const auto scale = half_powers(g_.degree_param(), ell_);
  WeightField f;
  f.root = root;
  double imbalance = 0;
  for (const auto& v : ball.vertices) {
    f.support.emplace_back(v.vertex, scale[v.depth]);
    if (v.depth == ell_) imbalance += static_cast<int>(labels_.revealed[v.vertex]);
  }
  const double shell = imbalance / (labels_.delta * std::pow(mu_, ell_));
  f.offset = shell * std::sqrt(alpha_ * ell_);
  normalize(f);
  return f;
}

std::vector<WeightField> materialize(const LocalRule& rule) {
  const std::size_t n = rule.graph().num_vertices();
  std::vector<WeightField> out;
  out.reserve(n);
  BallWorkspace ws(n);
  for (Vertex v = 0; v < n; ++v) out.push_back(rule.field(v, ws));
  return out;
}

namespace {

// Weight of each support entry after normalizing sign fields to unit length.
double unit_scale(const WeightField& f) {
  return f.kind == FieldKind::kSign ? 1.0 / std::sqrt(static_cast<double>(f.support.size())) : 1.0;
}

double combine(const WeightField& a, const WeightField& b, double dot) {
  const bool sa = a.kind == FieldKind::kSign, sb = b.kind == FieldKind::kSign;
  if (!sa && !sb) return dot + a.offset * b.offset;
  if (sa && sb) return 2.0 / std::numbers::pi * std::asin(std::clamp(dot, -1.0, 1.0));
  return kSqrt2OverPi * dot;
}

// Dense scratch holding one field's unit-scaled weights.
class Scatter {
 public:
  explicit Scatter(std::size_t n) : dense_(n, 0.0) {}
  void load(const WeightField& f) {
    const double s = unit_scale(f);
    for (const auto& [v, w] : f.support) dense_[v] += w * s;
    loaded_ = &f;
  }
  void clear() {
    for (const auto& [v, w] : loaded_->support) dense_[v] = 0.0;
  }
  double dot(const WeightField& f) const {
    double s = 0;
    for (const auto& [v, w] : f.support) s += w * dense_[v];
    return s * unit_scale(f);
  }

 private:
  std::vector<double> dense_;
  const WeightField* loaded_ = nullptr;
};

}  // namespace

double pair_expectation(const WeightField& a, const WeightField& b) {
  std::unordered_map<Vertex, double> wa;
  const double sa = unit_scale(a);
  for (const auto& [v, w] : a.support) wa[v] += w * sa;
  double dot = 0;
  for (const auto& [v, w] : b.support) {
    const auto it = wa.find(v);
    if (it != wa.end()) dot += it->second * w;
  }
  return combine(a, b, dot * unit_scale(b));
}

LocalValueReport value_closed_form(const LocalRule& rule) {
  const SparseGraph& g = rule.graph();
  const std::size_t n = g.num_vertices();
  const double d = g.degree_param();
  BallWorkspace ws(n);
  Scatter scatter(n);
  std::vector<double> linear_sum(n, 0.0), sign_sum(n, 0.0), per_vertex(n, 0.0);
  std::unordered_map<Vertex, WeightField> sign_fields;
  long double offset_sum = 0, edge_sum = 0;

  for (Vertex i = 0; i < n; ++i) {
    WeightField fi = rule.field(i, ws);
    const double s = unit_scale(fi);
    auto& target = fi.kind == FieldKind::kSign ? sign_sum : linear_sum;
    for (const auto& [v, w] : fi.support) target[v] += w * s;
    offset_sum += fi.offset;
    scatter.load(fi);
    for (Vertex j : g.neighbors(i)) {
      if (j < i) continue;
      const WeightField fj = rule.field(j, ws);
      const double e = combine(fi, fj, scatter.dot(fj));
      edge_sum += e;
      per_vertex[i] += e;
      per_vertex[j] += e;
    }
    scatter.clear();
    if (fi.kind == FieldKind::kSign) sign_fields.emplace(i, std::move(fi));
  }

  long double total = offset_sum * offset_sum;
  long double linear_sign = 0;
  for (std::size_t v = 0; v < n; ++v) {
    total += static_cast<long double>(linear_sum[v]) * linear_sum[v];
    linear_sign += static_cast<long double>(linear_sum[v]) * sign_sum[v];
  }
  total += 2 * kSqrt2OverPi * linear_sign;
  // Sign fields with overlapping supports lie within twice the support radius.
  std::vector<Vertex> sign_roots;
  for (const auto& [v, f] : sign_fields) sign_roots.push_back(v);
  std::sort(sign_roots.begin(), sign_roots.end());
  const int reach = 2 * rule.ell();
  for (Vertex i : sign_roots) {
    const WeightField& fi = sign_fields.at(i);
    scatter.load(fi);
    const BallView near = ws.ball(g, i, reach);
    for (const auto& bv : near.vertices) {
      const auto it = sign_fields.find(bv.vertex);
      if (it != sign_fields.end()) total += combine(fi, it->second, scatter.dot(it->second));
    }
    scatter.clear();
  }

  LocalValueReport r;
  const double nn = static_cast<double>(n);
  r.edge_term = static_cast<double>(2 * edge_sum / nn);
  r.centering_term = static_cast<double>(d / (nn * nn) * total);
  r.value = r.edge_term - r.centering_term;
  r.method = ValueMethod::kClosedForm;
  MeanAccumulator acc;
  for (double c : per_vertex) acc.add(c);
  r.vertex_std_error = acc.std_error();
  return r;
}

namespace {

constexpr std::size_t kBlock = 64;

// Fills xi (n x width, row-major) with realizations of the rule under marks
// drawn from the block's own stream.
void sample_block(const LocalRule& rule, std::uint64_t seed, std::size_t block,
                  std::size_t width, std::vector<double>& z, std::vector<double>& xi) {
  const std::size_t n = rule.graph().num_vertices();
  z.assign(n * width, 0.0);
  xi.assign(n * width, 0.0);
  Rng rng = make_rng(seed, 0x4d43, block);
  for (double& x : z) x = gaussian(rng);
  BallWorkspace ws(n);
  for (Vertex i = 0; i < n; ++i) {
    const WeightField f = rule.field(i, ws);
    double* out = xi.data() + static_cast<std::size_t>(i) * width;
    for (const auto& [v, w] : f.support) {
      const double* zv = z.data() + static_cast<std::size_t>(v) * width;
      for (std::size_t s = 0; s < width; ++s) out[s] += w * zv[s];
    }
    if (f.kind == FieldKind::kSign) {
      for (std::size_t s = 0; s < width; ++s) out[s] = out[s] >= 0.0 ? 1.0 : -1.0;
    } else {
      for (std::size_t s = 0; s < width; ++s) out[s] += f.offset;
    }
  }
}

}  // namespace

LocalValueReport value_monte_carlo(const LocalRule& rule, std::size_t n_samples,
                                   std::uint64_t seed) {
  if (n_samples < 1) throw InvalidParameter("need at least one sample");
  const SparseGraph& g = rule.graph();
  const std::size_t n = g.num_vertices();
  const double nn = static_cast<double>(n), d = g.degree_param();
  const auto edges = g.edges();
  MeanAccumulator value, edge, centering;
  std::vector<double> z, xi;
  for (std::size_t block = 0; block * kBlock < n_samples; ++block) {
    const std::size_t width = std::min(kBlock, n_samples - block * kBlock);
    sample_block(rule, seed, block, width, z, xi);
    std::vector<long double> edge_sum(width, 0.0), total(width, 0.0);
    for (const auto& [i, j] : edges) {
      const double* a = xi.data() + static_cast<std::size_t>(i) * width;
      const double* b = xi.data() + static_cast<std::size_t>(j) * width;
      for (std::size_t s = 0; s < width; ++s) edge_sum[s] += a[s] * b[s];
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t s = 0; s < width; ++s) total[s] += xi[i * width + s];
    for (std::size_t s = 0; s < width; ++s) {
      const double e = static_cast<double>(2 * edge_sum[s] / nn);
      const double c = static_cast<double>(d / (nn * nn) * total[s] * total[s]);
      edge.add(e);
      centering.add(c);
      value.add(e - c);
    }
  }
  LocalValueReport r;
  r.edge_term = edge.mean();
  r.centering_term = centering.mean();
  r.value = value.mean();
  r.method = ValueMethod::kMonteCarlo;
  r.mc_std_error = value.std_error();
  r.n_samples = n_samples;
  return r;
}

GramFactor gram_factor_from_fields(const LocalRule& rule, std::size_t n_samples,
                                   std::uint64_t seed) {
  if (n_samples < 1) throw InvalidParameter("need at least one sample");
  const std::size_t n = rule.graph().num_vertices();
  GramFactor V(n, n_samples);
  std::vector<double> z, xi;
  for (std::size_t block = 0; block * kBlock < n_samples; ++block) {
    const std::size_t width = std::min(kBlock, n_samples - block * kBlock);
    sample_block(rule, seed, block, width, z, xi);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t s = 0; s < width; ++s) V.v[i * n_samples + block * kBlock + s] = xi[i * width + s];
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto row = V.row(i);
    double s = 0;
    for (double x : row) s += x * x;
    if (s == 0.0) {
      row[0] = 1.0;
      continue;
    }
    const double inv = 1.0 / std::sqrt(s);
    for (double& x : row) x *= inv;
  }
  return V;
}

void write_fields_csv(std::ostream& out, const std::vector<WeightField>& fields) {
  out << "root,vertex,weight,offset\n";
  out.precision(17);
  for (const auto& f : fields) {
    const double s = unit_scale(f);
    for (const auto& [v, w] : f.support) out << f.root << ',' << v << ',' << w * s << ',' << f.offset << '\n';
  }
}

}  // namespace sdplocal
