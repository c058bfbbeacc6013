#include "sdplocal/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <numbers>
#include <set>
#include <sstream>

#include "sdplocal/dual.hpp"
#include "sdplocal/gw.hpp"
#include "sdplocal/local.hpp"
#include "sdplocal/nonbacktracking.hpp"
#include "sdplocal/sdp.hpp"

namespace sdplocal {

std::string version_string() { return SDPLOCAL_VERSION; }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"gen",         "fig1",       "sbm-test",
                                              "bounds",      "gw-bound",   "local-value",
                                              "sdp-solve",   "dual-bound", "nb-spectrum",
                                              "ihara-bass",  "selftest"};
  return names;
}

double BlockModel::lambda() const { return (a - b) / std::sqrt(2 * (a + b)); }

BlockModel BlockModel::from_lambda(double d, double lambda) {
  return {d + lambda * std::sqrt(d), d - lambda * std::sqrt(d)};
}

namespace {

// ---------------------------------------------------------------- config

// Reads keys with defaults and records the effective value of each one.
class Config {
 public:
  explicit Config(const Json& raw) : raw_(raw.is_null() ? Json::object() : raw) {
    if (!raw_.is_object()) throw InvalidParameter("config must be a JSON object");
  }

  bool has(const std::string& key) const { return raw_.contains(key) && !raw_.at(key).is_null(); }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    T value = has(key) ? raw_.at(key).get<T>() : fallback;
    effective_[key] = value;
    return value;
  }

  template <class T>
  T need(const std::string& key) {
    if (!has(key)) throw InvalidParameter("missing config key '" + key + "'");
    return get<T>(key, T{});
  }

  // "seeds" is either a count (seeds seed..seed+count-1) or an explicit list.
  std::vector<std::uint64_t> seeds(std::size_t default_count) {
    const auto base = get<std::uint64_t>("seed", 0);
    used_.insert("seeds");
    std::vector<std::uint64_t> out;
    if (has("seeds") && raw_.at("seeds").is_array()) {
      out = raw_.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
      const auto count = has("seeds") ? raw_.at("seeds").get<std::size_t>() : default_count;
      for (std::size_t s = 0; s < count; ++s) out.push_back(base + s);
    }
    if (out.empty()) throw InvalidParameter("no seeds");
    effective_["seeds"] = out;
    return out;
  }

  void mark(const std::string& key) { used_.insert(key); }

  void finish() const {
    for (const auto& [key, value] : raw_.items())
      if (!used_.count(key)) throw InvalidParameter("unknown config key '" + key + "'");
  }

  const Json& effective() const { return effective_; }

 private:
  Json raw_;
  Json effective_ = Json::object();
  std::set<std::string> used_;
};

double positive(double x, const char* what) {
  if (!(x > 0)) throw InvalidParameter(std::string(what) + " must be positive");
  return x;
}

std::size_t count_at_least(std::size_t x, std::size_t lo, const char* what) {
  if (x < lo) throw InvalidParameter(std::string(what) + " is too small");
  return x;
}

// (a, b) directly, or (d, lambda); both forms must agree when both are given.
BlockModel block_model(Config& cfg) {
  const bool ab = cfg.has("a") || cfg.has("b");
  const bool dl = cfg.has("lambda");
  BlockModel m;
  if (ab) {
    m = {cfg.need<double>("a"), cfg.need<double>("b")};
    if (dl) {
      const double lam = cfg.get<double>("lambda", 0.0);
      if (std::abs(lam - m.lambda()) > 1e-9) throw InvalidParameter("lambda disagrees with (a, b)");
    }
    if (cfg.has("d") && std::abs(cfg.get<double>("d", 0.0) - m.d()) > 1e-9)
      throw InvalidParameter("d disagrees with (a, b)");
  } else if (dl) {
    m = BlockModel::from_lambda(cfg.need<double>("d"), cfg.get<double>("lambda", 0.0));
  } else {
    throw InvalidParameter("give either (a, b) or (d, lambda)");
  }
  if (!(m.a >= 0 && m.b >= 0 && m.a + m.b > 0)) throw InvalidParameter("need a, b >= 0 and a + b > 0");
  return m;
}

// ---------------------------------------------------------------- graphs

struct GraphSource {
  SparseGraph graph;
  std::optional<PlantedLabels> labels;
  std::string model;
};

// Either reads "input" (plus optional "labels") or samples from "model".
GraphSource graph_source(Config& cfg, std::uint64_t seed) {
  if (cfg.has("input")) {
    const auto path = cfg.get<std::string>("input", "");
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open input '" + path + "'");
    const double d = cfg.get<double>("d", -1.0);
    GraphSource src{read_edge_list(in, d), std::nullopt, "file"};
    if (cfg.has("labels")) {
      const auto lpath = cfg.get<std::string>("labels", "");
      std::ifstream lin(lpath);
      if (!lin) throw InvalidParameter("cannot open labels '" + lpath + "'");
      src.labels = read_labels(lin, cfg.get<double>("delta", 1.0));
      if (src.labels->revealed.size() != src.graph.num_vertices())
        throw InvalidInput("label count differs from n");
    }
    return src;
  }
  const auto model = cfg.get<std::string>("model", "er");
  const auto n = count_at_least(cfg.get<std::size_t>("n", 10000), 1, "n");
  if (model == "er") return {gen_er(n, positive(cfg.get<double>("d", 4.0), "d"), seed), std::nullopt, model};
  if (model == "sbm") {
    const BlockModel m = block_model(cfg);
    auto [g, labels] = gen_sbm(n, m.a, m.b, cfg.get<double>("delta", 1.0), seed);
    return {std::move(g), std::move(labels), model};
  }
  throw InvalidParameter("model must be 'er' or 'sbm'");
}

CyclePolicy cycle_policy(Config& cfg) {
  const auto p = cfg.get<std::string>("policy", "bfs");
  if (p == "bfs") return CyclePolicy::kBfsTree;
  if (p == "root-mark") return CyclePolicy::kRootMark;
  throw InvalidParameter("policy must be 'bfs' or 'root-mark'");
}

SolveOptions solve_options(Config& cfg, int default_restarts) {
  SolveOptions o;
  o.rank = cfg.get<std::size_t>("rank", 0);
  o.tol = cfg.get<double>("tol", 1e-7);
  o.max_sweeps = cfg.get<int>("max_sweeps", 2000);
  o.restarts = cfg.get<int>("restarts", default_restarts);
  return o;
}

Json to_json(const SolveReport& r) {
  return {{"objective", r.objective},   {"normalized", r.normalized}, {"sweeps", r.sweeps},
          {"converged", r.converged},   {"rank", r.rank_used},        {"seed", r.seed},
          {"restart_objectives", r.restart_objectives}};
}

Json to_json(const Estimate& e) {
  return {{"estimate", e.estimate}, {"std_error", e.std_error}, {"n_samples", e.n_samples}};
}

Json to_json(const LocalValueReport& r) {
  Json j{{"method", r.method == ValueMethod::kClosedForm ? "closed" : "mc"},
         {"value", r.value},
         {"edge_term", r.edge_term},
         {"centering_term", r.centering_term}};
  if (r.mc_std_error) j["mc_std_error"] = *r.mc_std_error;
  if (r.vertex_std_error) j["vertex_std_error"] = *r.vertex_std_error;
  if (r.method == ValueMethod::kMonteCarlo) j["n_samples"] = r.n_samples;
  return j;
}

Json to_json(const DualCertificate& c) {
  Json j{{"u", c.u},
         {"delta", c.delta},
         {"psd_ok", c.psd_ok},
         {"min_eig_estimate", c.min_eig_estimate},
         {"dual_value", c.dual_value},
         {"branch", c.branch == DualBranch::kShifted ? "shifted" : "degree"},
         {"converged", c.check.converged},
         {"residual", c.check.residual},
         {"norm_estimate", c.check.norm_estimate}};
  if (c.strict_check) {
    j["strict_psd"] = c.strict_check->psd;
    j["strict_min_eig"] = c.strict_check->min_eig;
  }
  return j;
}

double upper_formula(double d) { return 2 * std::sqrt(d) * (1 - 1 / (2 * d)); }
double simple_formula(double d) { return 2 * std::sqrt(d) * (1 - 1 / (d + 1)); }

// ---------------------------------------------------------------- commands

struct Outcome {
  Json body = Json::object();
  bool passed = true;
  std::string format = "json";
  std::string raw;  // preformatted output (gen)
};

Outcome cmd_gen(Config& cfg) {
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  GraphSource src = graph_source(cfg, seed);
  const auto labels_out = cfg.get<std::string>("labels_out", "");
  Outcome out;
  out.format = "edges";
  std::ostringstream text;
  text << "# sdplocal " << version_string() << " gen " << cfg.effective().dump() << '\n';
  write_edge_list(text, src.graph);
  out.raw = text.str();
  if (!labels_out.empty()) {
    if (!src.labels) throw InvalidParameter("labels_out needs model 'sbm'");
    std::ofstream lf(labels_out);
    if (!lf) throw InvalidParameter("cannot write '" + labels_out + "'");
    lf << "# sdplocal " << version_string() << " gen " << cfg.effective().dump() << '\n';
    write_labels(lf, *src.labels);
  }
  out.body = {{"n", src.graph.num_vertices()}, {"edges", src.graph.num_edges()}};
  return out;
}

Outcome cmd_fig1(Config& cfg) {
  const auto ds = cfg.get<std::vector<double>>(
      "ds", {1.2, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 20.0});
  const auto n = count_at_least(cfg.get<std::size_t>("n", 10000), 2, "n");
  const auto seeds = cfg.seeds(5);
  const auto pool = cfg.get<std::size_t>("pool", 100000);
  const auto samples = cfg.get<std::size_t>("samples", 100000);
  const int harmonic_depth = cfg.get<int>("depth_L", 50);
  const int depth = cfg.get<int>("depth", 0);
  SolveOptions opt = solve_options(cfg, 3);
  Outcome out;
  out.format = "csv";
  Json rows = Json::array();
  for (double d : ds) {
    if (!(d >= 1.0 && d <= 20.0)) throw InvalidParameter("fig1 degrees must lie in [1, 20]");
    const double scale = 2 * std::sqrt(d);
    std::string tree_status;
    double simple_tree = std::nan(""), harmonic = std::nan("");
    try {
      simple_tree = simple_bound_tree(d, depth > 0 ? depth : default_depth(d), samples, seeds[0]).estimate / scale;
    } catch (const std::exception& e) {
      tree_status += std::string("simple_tree: ") + e.what() + "; ";
    }
    try {
      harmonic = harmonic_bound(d, harmonic_depth, pool, seeds[0]).estimate / scale;
    } catch (const std::exception& e) {
      tree_status += std::string("harmonic: ") + e.what() + "; ";
    }
    for (auto seed : seeds) {
      std::string status = tree_status;
      double sdp = std::nan(""), dual = std::nan("");
      const SparseGraph g = gen_er(n, d, seed);
      try {
        opt.seed = seed;
        sdp = solve(g, opt).second.normalized / scale;
      } catch (const std::exception& e) {
        status += std::string("sdp: ") + e.what() + "; ";
      }
      try {
        dual = build_certificate(g, default_dual_delta(d)).dual_value / scale;
      } catch (const std::exception& e) {
        status += std::string("dual: ") + e.what() + "; ";
      }
      auto num = [](double x) { return std::isnan(x) ? Json(nullptr) : Json(x); };
      rows.push_back({{"d", d},
                      {"n", n},
                      {"seed", seed},
                      {"sdp_over_2nsqrtd", num(sdp)},
                      {"upper", 1 - 1 / (2 * d)},
                      {"simple_lower", 1 - 1 / (d + 1)},
                      {"simple_tree", num(simple_tree)},
                      {"harmonic_lower", num(harmonic)},
                      {"dual", num(dual)},
                      {"status", status.empty() ? "ok" : status}});
    }
  }
  out.body["rows"] = std::move(rows);
  return out;
}

Outcome cmd_sbm_test(Config& cfg) {
  if (!cfg.has("a") && !cfg.has("lambda")) throw InvalidParameter("give (a, b) or (d, lambda)");
  const BlockModel m = block_model(cfg);
  const auto n = count_at_least(cfg.get<std::size_t>("n", 20000), 2, "n");
  const double eps = positive(cfg.get<double>("eps", 0.1), "eps");
  const auto seeds = cfg.seeds(20);
  SolveOptions opt = solve_options(cfg, 1);
  const double d = m.d();
  const double threshold = upper_formula(d) + eps;
  Json rows = Json::array();
  int false_alarms = 0, misses = 0;
  for (auto seed : seeds) {
    opt.seed = seed;
    const double null_value = solve(gen_er(n, d, seed), opt).second.normalized;
    const double alt_value = solve(gen_sbm(n, m.a, m.b, 1.0, seed ^ 0x5b5b).first, opt).second.normalized;
    const bool null_reject = null_value >= threshold, alt_reject = alt_value >= threshold;
    false_alarms += null_reject;
    misses += !alt_reject;
    rows.push_back({{"seed", seed},
                    {"null_value", null_value},
                    {"alt_value", alt_value},
                    {"null_reject", null_reject},
                    {"alt_reject", alt_reject}});
  }
  Outcome out;
  const double count = static_cast<double>(seeds.size());
  out.body = {{"a", m.a},
              {"b", m.b},
              {"d", d},
              {"lambda", m.lambda()},
              {"threshold", threshold},
              {"false_discovery_rate", false_alarms / count},
              {"miss_rate", misses / count},
              {"rows", std::move(rows)}};
  return out;
}

Outcome cmd_bounds(Config& cfg) {
  const BlockModel m = block_model(cfg);
  if (!(m.lambda() > 1)) throw InvalidParameter("bounds need lambda > 1");
  if (!(m.d() >= 2)) throw InvalidParameter("bounds need d >= 2");
  const auto n = count_at_least(cfg.get<std::size_t>("n", 20000), 2, "n");
  const double delta = cfg.get<double>("delta", 1.0);
  const int ell = cfg.get<int>("ell", 2);
  const double alpha = cfg.get<double>("alpha", default_alpha(m.a, m.b));
  const int depth = cfg.get<int>("depth", default_depth(m.d()));
  const auto samples = cfg.get<std::size_t>("samples", 100000);
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  const double slack = cfg.get<double>("slack", 0.1);
  SolveOptions opt = solve_options(cfg, 1);
  opt.seed = seed;

  const double planted = m.lambda() * std::sqrt(m.d());
  const Estimate tree = sbm_bound_tree(m.a, m.b, delta, alpha, depth, samples, seed);
  const Estimate tree_value = sbm_value_tree(m.a, m.b, delta, alpha, ell, samples, seed);
  auto [g, labels] = gen_sbm(n, m.a, m.b, delta, seed);
  const LocalValueReport local = value_closed_form(SbmRule(g, labels, ell, alpha, m.mu()));
  const double solver = solve(g, opt).second.normalized;

  const double se = std::hypot(tree_value.std_error, local.vertex_std_error.value_or(0.0));
  Outcome out;
  Json checks = {{"solver_ge_planted", solver >= planted - slack},
                 {"solver_ge_local", solver >= local.value - slack},
                 {"solver_ge_tree", solver >= tree.estimate - slack}};
  for (const auto& [k, v] : checks.items()) out.passed = out.passed && v.get<bool>();
  out.body = {{"a", m.a},
              {"b", m.b},
              {"d", m.d()},
              {"lambda", m.lambda()},
              {"planted", planted},
              {"tree_bound", to_json(tree)},
              {"tree_value", to_json(tree_value)},
              {"local_value", to_json(local)},
              {"local_vs_tree_z", se > 0 ? (local.value - tree_value.estimate) / se : 0.0},
              {"solver", solver},
              {"checks", checks}};
  return out;
}

Outcome cmd_gw_bound(Config& cfg) {
  const auto kind = cfg.get<std::string>("kind", "harmonic");
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  Outcome out;
  Estimate est;
  double d = 0;
  if (kind == "harmonic" || kind == "simple" || kind == "simple-value") {
    d = positive(cfg.get<double>("d", 4.0), "d");
    if (kind == "harmonic") {
      est = harmonic_bound(d, cfg.get<int>("depth", default_depth(d)), cfg.get<std::size_t>("pool", 1000000), seed);
    } else if (kind == "simple") {
      est = simple_bound_tree(d, cfg.get<int>("depth", default_depth(d)), cfg.get<std::size_t>("samples", 1000000), seed);
    } else {
      est = simple_value_tree(d, cfg.get<int>("ell", 5), cfg.get<std::size_t>("samples", 1000000), seed);
    }
  } else if (kind == "sbm" || kind == "sbm-value") {
    const BlockModel m = block_model(cfg);
    d = m.d();
    const double delta = cfg.get<double>("delta", 1.0);
    const double alpha = cfg.get<double>("alpha", default_alpha(m.a, m.b));
    const auto samples = cfg.get<std::size_t>("samples", 100000);
    est = kind == "sbm" ? sbm_bound_tree(m.a, m.b, delta, alpha, cfg.get<int>("depth", default_depth(d)), samples, seed)
                        : sbm_value_tree(m.a, m.b, delta, alpha, cfg.get<int>("ell", 5), samples, seed);
    out.body["planted"] = m.lambda() * std::sqrt(d);
  } else {
    throw InvalidParameter("kind must be harmonic, simple, simple-value, sbm or sbm-value");
  }
  out.body["kind"] = kind;
  out.body["d"] = d;
  out.body["result"] = to_json(est);
  out.body["normalized"] = est.estimate / (2 * std::sqrt(d));
  out.body["simple_formula"] = simple_formula(d);
  out.body["upper_formula"] = upper_formula(d);
  return out;
}

Outcome cmd_local_value(Config& cfg) {
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  GraphSource src = graph_source(cfg, seed);
  const auto rule_name = cfg.get<std::string>("rule", "simple");
  const int ell = cfg.get<int>("ell", 3);
  const CyclePolicy policy = cycle_policy(cfg);
  std::unique_ptr<LocalRule> rule;
  if (rule_name == "simple") {
    rule = std::make_unique<SimpleRule>(src.graph, ell, policy);
  } else if (rule_name == "harmonic") {
    rule = std::make_unique<HarmonicRule>(src.graph, ell, cfg.get<int>("depth_L", 2 * ell), policy);
  } else if (rule_name == "sbm") {
    if (!src.labels) throw InvalidParameter("rule 'sbm' needs labels (model 'sbm' or 'labels')");
    const BlockModel m = block_model(cfg);
    rule = std::make_unique<SbmRule>(src.graph, *src.labels, ell,
                                     cfg.get<double>("alpha", default_alpha(m.a, m.b)), m.mu(), policy);
  } else {
    throw InvalidParameter("rule must be simple, harmonic or sbm");
  }
  const auto method = cfg.get<std::string>("method", "closed");
  Outcome out;
  out.body["n"] = src.graph.num_vertices();
  out.body["rule"] = rule_name;
  if (method == "closed" || method == "both") out.body["closed"] = to_json(value_closed_form(*rule));
  if (method == "mc" || method == "both")
    out.body["mc"] = to_json(value_monte_carlo(*rule, cfg.get<std::size_t>("samples", 1000), seed));
  if (!out.body.contains("closed") && !out.body.contains("mc"))
    throw InvalidParameter("method must be closed, mc or both");
  const auto fields_out = cfg.get<std::string>("fields_out", "");
  if (!fields_out.empty()) {
    std::ofstream f(fields_out);
    if (!f) throw InvalidParameter("cannot write '" + fields_out + "'");
    f << "# sdplocal " << version_string() << " local-value " << cfg.effective().dump() << '\n';
    write_fields_csv(f, materialize(*rule));
  }
  return out;
}

Outcome cmd_sdp_solve(Config& cfg) {
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  GraphSource src = graph_source(cfg, seed);
  SolveOptions opt = solve_options(cfg, 3);
  opt.seed = seed;
  const int warm_ell = cfg.get<int>("warm_start_ell", 0);
  GramFactor init;
  if (warm_ell > 0) {
    const std::size_t k = opt.rank == 0 ? default_rank(src.graph.num_vertices()) : opt.rank;
    init = warm_start_from_fields(SimpleRule(src.graph, warm_ell), k, seed);
    opt.init = &init;
  }
  auto [V, rep] = solve(src.graph, opt);
  const auto factor_out = cfg.get<std::string>("factor_out", "");
  if (!factor_out.empty()) {
    std::ofstream f(factor_out, std::ios::binary);
    if (!f) throw InvalidParameter("cannot write '" + factor_out + "'");
    write_factor(f, V);
  }
  Outcome out;
  out.body = to_json(rep);
  out.body["n"] = src.graph.num_vertices();
  out.body["d"] = src.graph.degree_param();
  return out;
}

Outcome cmd_dual_bound(Config& cfg) {
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  GraphSource src = graph_source(cfg, seed);
  const double d = src.graph.degree_param();
  const double delta = cfg.get<double>("delta", default_dual_delta(d));
  const bool strict = cfg.get<bool>("strict", false);
  Outcome out;
  out.body = to_json(build_certificate(src.graph, delta, strict, {.seed = seed}));
  out.body["upper_formula"] = upper_formula(d);
  return out;
}

Outcome cmd_nb_spectrum(Config& cfg) {
  const auto n = count_at_least(cfg.get<std::size_t>("n", 2000), 2, "n");
  const double d = positive(cfg.get<double>("d", 4.0), "d");
  const auto seeds = cfg.seeds(3);
  const int m = cfg.get<int>("iterations", 60);
  const int trials = cfg.get<int>("trials", 2);
  Json rows = Json::array();
  int below = 0, outlier = 0;
  for (auto seed : seeds) {
    const SparseGraph g = gen_er(n, d, seed);
    const auto c = spectral_radius_estimate(NbOperator::centered(g), m, trials, seed);
    const auto u = spectral_radius_estimate(NbOperator::uncentered(g), m, trials, seed);
    below += c.estimate <= std::sqrt(d) * 1.15;
    outlier += u.estimate >= 0.8 * d;
    rows.push_back({{"seed", seed},
                    {"centered", c.estimate},
                    {"centered_spread", c.spread},
                    {"uncentered", u.estimate},
                    {"uncentered_spread", u.spread}});
  }
  Outcome out;
  const double count = static_cast<double>(seeds.size());
  out.body = {{"n", n},
              {"d", d},
              {"sqrt_d", std::sqrt(d)},
              {"centered_below_fraction", below / count},
              {"uncentered_outlier_fraction", outlier / count},
              {"rows", std::move(rows)}};
  return out;
}

Outcome cmd_ihara_bass(Config& cfg) {
  const int graphs = cfg.get<int>("graphs", 100);
  const int max_n = cfg.get<int>("max_n", 12);
  const int per = cfg.get<int>("u_per_graph", 3);
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  const double tol = cfg.get<double>("tol", 1e-8);
  if (graphs < 1 || max_n < 2 || per < 1) throw InvalidParameter("graphs, max_n and u_per_graph must be positive");
  IharaSuite suite = ihara_bass_suite(graphs, max_n, per, seed);
  Outcome out;
  out.passed = suite.max_rel_err <= tol;
  out.body = {{"checks", suite.checks}, {"max_rel_err", suite.max_rel_err}, {"rows", std::move(suite.rows)}};
  return out;
}

// psi with the square roots removed; used to confirm the consistency suite bites.
double psi_without_sqrt(double c1, double c2) {
  if (c1 == 0.0 && c2 == 0.0) return 1.0;
  return (c1 * (1.0 + c2) + c2 * (1.0 + c1)) / (c1 + c2 + c1 * c2);
}

Outcome cmd_selftest(Config& cfg) {
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  const auto mutation = cfg.get<std::string>("mutation", "none");
  std::function<double(double, double)> psi_under_test = psi;
  if (mutation == "psi-drop-sqrt") psi_under_test = psi_without_sqrt;
  else if (mutation != "none") throw InvalidParameter("unknown mutation '" + mutation + "'");

  Json suites = Json::array();
  bool all = true;
  auto record = [&](const std::string& name, bool ok, Json detail) {
    suites.push_back({{"suite", name}, {"passed", ok}, {"detail", std::move(detail)}});
    all = all && ok;
  };
  auto guarded = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      record(name, false, {{"error", e.what()}});
    }
  };

  guarded("gaussian-identities", [&] {
    const IdentitySuite s = gaussian_identity_suite(10, 200000, seed);
    record("gaussian-identities", s.max_z <= 4.5, {{"checks", s.checks}, {"max_z", s.max_z}});
  });
  guarded("ihara-bass", [&] {
    const IharaSuite s = ihara_bass_suite(100, 12, 3, seed);
    record("ihara-bass", s.max_rel_err <= 1e-8, {{"checks", s.checks}, {"max_rel_err", s.max_rel_err}});
  });
  guarded("martingale-moments", [&] {
    const MomentSuite s = martingale_moment_suite(14, 4, 6, 40000, seed);
    record("martingale-moments", s.max_z <= 5, {{"max_z", s.max_z}, {"mean_x", s.mean_x}, {"mean_y", s.mean_y}});
  });
  guarded("harmonic-sums", [&] {
    const double err = harmonic_sum_error(3.0, 6, 200, seed);
    record("harmonic-sums", err <= 1e-12, {{"max_error", err}});
  });
  guarded("psi-consistency", [&] {
    Rng rng = make_rng(seed, 0x505349, 0);
    double worst = 0;
    for (int t = 0; t < 2000; ++t) {
      const double c1 = t % 10 == 0 ? 0.0 : -std::log(uniform01(rng)) * 3;
      const double c2 = -std::log(uniform01(rng)) * 3;
      worst = std::max(worst, std::abs(psi_under_test(c1, c2) - psi_from_walks(c1, c2)));
    }
    record("psi-consistency", worst <= 1e-12, {{"max_abs_err", worst}, {"mutation", mutation}});
  });
  guarded("duality-sandwich", [&] {
    const SparseGraph g = gen_er(3000, 4.0, seed);
    const double local = value_closed_form(SimpleRule(g, 2)).value;
    const double solver = solve(g, {.rank = 16, .tol = 1e-6, .seed = seed, .restarts = 1}).second.normalized;
    const DualCertificate cert = build_certificate(g, 0.05);
    const bool ok = local <= solver + 1e-9 && solver <= cert.dual_value + 1e-9;
    record("duality-sandwich", ok,
           {{"local", local}, {"solver", solver}, {"dual", cert.dual_value}, {"psd_ok", cert.psd_ok}});
  });

  Outcome out;
  out.passed = all;
  out.body = {{"passed", all}, {"suites", std::move(suites)}};
  return out;
}

// ---------------------------------------------------------------- rendering

std::string csv_cell(const Json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_null()) return "";
  return v.dump();
}

std::string render(const Json& doc, const std::string& format) {
  if (format == "json") return doc.dump(2) + "\n";
  Json meta = doc;
  Json rows = Json::array();
  if (meta.contains("rows")) {
    rows = meta["rows"];
    meta.erase("rows");
  }
  std::ostringstream out;
  if (format == "jsonl") {
    out << meta.dump() << '\n';
    for (const auto& r : rows) out << r.dump() << '\n';
    return out.str();
  }
  // csv: provenance as comment lines, then either the rows or key,value pairs.
  out << "# version: " << doc["version"].get<std::string>() << '\n';
  out << "# command: " << doc["command"].get<std::string>() << '\n';
  out << "# config: " << doc["config"].dump() << '\n';
  meta.erase("version");
  meta.erase("command");
  meta.erase("config");
  if (!rows.empty()) {
    if (!meta.empty()) out << "# summary: " << meta.dump() << '\n';
    bool first = true;
    for (const auto& [k, v] : rows[0].items()) {
      out << (first ? "" : ",") << k;
      first = false;
    }
    out << '\n';
    for (const auto& r : rows) {
      first = true;
      for (const auto& [k, v] : r.items()) {
        out << (first ? "" : ",") << csv_cell(v);
        first = false;
      }
      out << '\n';
    }
  } else {
    out << "key,value\n";
    for (const auto& [k, v] : meta.items()) out << k << ',' << csv_cell(v.is_structured() ? Json(v.dump()) : v) << '\n';
  }
  return out.str();
}

using Handler = Outcome (*)(Config&);

const std::map<std::string, Handler, std::less<>>& handlers() {
  static const std::map<std::string, Handler, std::less<>> table{
      {"gen", cmd_gen},           {"fig1", cmd_fig1},
      {"sbm-test", cmd_sbm_test}, {"bounds", cmd_bounds},
      {"gw-bound", cmd_gw_bound}, {"local-value", cmd_local_value},
      {"sdp-solve", cmd_sdp_solve}, {"dual-bound", cmd_dual_bound},
      {"nb-spectrum", cmd_nb_spectrum}, {"ihara-bass", cmd_ihara_bass},
      {"selftest", cmd_selftest}};
  return table;
}

Json error_document(std::string_view command, const std::string& message) {
  return {{"version", version_string()}, {"command", command}, {"error", message}};
}

}  // namespace

CommandResult run_command(std::string_view command, const Json& config) {
  CommandResult result;
  const auto it = handlers().find(command);
  if (it == handlers().end()) {
    result.exit_code = kExitBadConfig;
    result.document = error_document(command, "unknown command");
    result.output = result.document.dump(2) + "\n";
    return result;
  }
  try {
    Config cfg(config);
    cfg.mark("format");
    const std::string format = cfg.has("format") ? config.at("format").get<std::string>() : "";
    Outcome out = it->second(cfg);
    cfg.finish();
    const std::string chosen = format.empty() ? out.format : format;
    if (out.format == "edges") {
      if (!format.empty() && format != "edges") throw InvalidParameter("gen writes edge lists only");
      result.output = out.raw;
    } else if (chosen != "json" && chosen != "csv" && chosen != "jsonl") {
      throw InvalidParameter("format must be json, csv or jsonl");
    }
    Json doc = {{"version", version_string()}, {"command", command}, {"config", cfg.effective()}};
    if (cfg.effective().contains("seed")) doc["seed"] = cfg.effective()["seed"];
    for (auto& [k, v] : out.body.items()) doc[k] = v;
    if (out.format != "edges") result.output = render(doc, chosen);
    result.document = std::move(doc);
    result.exit_code = out.passed ? kExitOk : kExitInvariant;
  } catch (const InvalidParameter& e) {
    result.exit_code = kExitBadConfig;
    result.document = error_document(command, e.what());
  } catch (const nlohmann::json::exception& e) {
    result.exit_code = kExitBadConfig;
    result.document = error_document(command, std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    result.exit_code = kExitInvariant;
    result.document = error_document(command, e.what());
  }
  if (result.exit_code != kExitOk && result.output.empty()) result.output = result.document.dump(2) + "\n";
  return result;
}

// ---------------------------------------------------------------- suites

namespace {

struct Mc {
  double mean = 0, se = 0;
};

Mc product_mean(const std::function<double(const std::vector<double>&)>& fa,
                const std::function<double(const std::vector<double>&)>& fb, std::size_t dim,
                std::size_t samples, Rng& rng) {
  MeanAccumulator acc;
  std::vector<double> z(dim);
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& x : z) x = gaussian(rng);
    acc.add(fa(z) * fb(z));
  }
  return {acc.mean(), acc.std_error()};
}

}  // namespace

IdentitySuite gaussian_identity_suite(int trials, std::size_t samples, std::uint64_t seed) {
  constexpr std::size_t kDim = 8;
  IdentitySuite suite;
  Rng rng = make_rng(seed, 0x4744, 0);
  auto random_sign = [&] {
    WeightField f;
    f.kind = FieldKind::kSign;
    for (Vertex v = 0; v < kDim; ++v)
      if (uniform01(rng) < 0.6 || f.support.empty()) f.support.emplace_back(v, uniform01(rng) < 0.5 ? -1.0 : 1.0);
    return f;
  };
  auto random_linear = [&] {
    WeightField f;
    double s = 0;
    for (Vertex v = 0; v < kDim; ++v) {
      if (uniform01(rng) < 0.6) {
        f.support.emplace_back(v, gaussian(rng));
        s += f.support.back().second * f.support.back().second;
      }
    }
    if (f.support.empty()) {
      f.support.emplace_back(0, 1.0);
      s = 1.0;
    }
    for (auto& [v, w] : f.support) w /= std::sqrt(s);
    return f;
  };
  auto eval = [](const WeightField& f) {
    return [f](const std::vector<double>& z) {
      double dot = 0;
      for (const auto& [v, w] : f.support) dot += w * z[v];
      if (f.kind == FieldKind::kSign) return dot > 0 ? 1.0 : dot < 0 ? -1.0 : 0.0;
      return dot + f.offset;
    };
  };
  for (int t = 0; t < trials; ++t) {
    for (int kind = 0; kind < 2; ++kind) {
      const WeightField a = random_sign();
      const WeightField b = kind == 0 ? random_linear() : random_sign();
      const double exact = pair_expectation(a, b);
      const Mc mc = product_mean(eval(a), eval(b), kDim, samples, rng);
      suite.max_z = std::max(suite.max_z, std::abs(exact - mc.mean) / mc.se);
      ++suite.checks;
    }
  }
  return suite;
}

IharaSuite ihara_bass_suite(int graphs, int max_n, int u_per_graph, std::uint64_t seed) {
  IharaSuite suite;
  Rng rng = make_rng(seed, 0x4942, 0);
  for (int gi = 0; gi < graphs; ++gi) {
    const auto n = static_cast<std::size_t>(2 + std::floor(uniform01(rng) * (max_n - 1)));
    const double p = 0.2 + 0.6 * uniform01(rng);
    std::vector<WeightedEdge> edges;
    for (Vertex i = 0; i < n; ++i)
      for (Vertex j = i + 1; j < n; ++j)
        if (uniform01(rng) < p) {
          double c = 0;
          while (c == 0.0) c = 4 * uniform01(rng) - 2;
          edges.push_back({i, j, c});
        }
    const WeightedEdgeGraph g(n, edges);
    for (int k = 0; k < u_per_graph; ++k) {
      double u = 0;
      for (bool ok = false; !ok;) {
        u = 1.6 * uniform01(rng) - 0.8;
        ok = true;
        for (const auto& e : edges) ok = ok && std::abs(std::abs(u * e.c) - 1) > 1e-3;
      }
      const IharaBassReport r = ihara_bass_check(g, u);
      suite.max_rel_err = std::max(suite.max_rel_err, r.rel_err);
      ++suite.checks;
      suite.rows.push_back({{"n", r.n},
                            {"edges", r.edges},
                            {"u", r.u},
                            {"lhs_log_abs", r.lhs.log_abs},
                            {"lhs_sign", r.lhs.sign},
                            {"rhs_log_abs", r.rhs.log_abs},
                            {"rhs_sign", r.rhs.sign},
                            {"rel_err", r.rel_err}});
    }
  }
  return suite;
}

MomentSuite martingale_moment_suite(double a, double b, int ell, std::size_t samples,
                                    std::uint64_t seed) {
  if (samples < 2) throw InvalidParameter("need at least two samples");
  const GwParams params = GwParams::labelled(a, b, 1.0);
  const double d = params.d(), mu = params.mu();
  if (!(mu > 0)) throw InvalidParameter("need a > b");
  Rng rng = make_rng(seed, 0x4d4f, static_cast<std::uint64_t>(ell));
  std::vector<double> xs(samples), ys(samples);
  const double dl = std::pow(d, ell), ml = std::pow(mu, ell);
  for (std::size_t s = 0; s < samples; ++s) {
    const GenerationProfile p = sample_profile(params, ell, rng);
    xs[s] = p.total[ell] / dl;
    ys[s] = (p.same_revealed[ell] - p.opposite_revealed[ell]) / ml;
  }
  struct M {
    double mean, se_mean, var, se_var;
  };
  auto moments = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0;
    for (double x : v) mean += x / n;
    double m2 = 0, m4 = 0;
    for (double x : v) {
      const double c = (x - mean) * (x - mean);
      m2 += c;
      m4 += c * c;
    }
    const double var = m2 / (n - 1);
    return M{mean, std::sqrt(var / n), var, std::sqrt(std::max(0.0, m4 / n - var * var) / n)};
  };
  const M mx = moments(xs), my = moments(ys);
  MomentSuite r{mx.mean, mx.se_mean, mx.var, mx.se_var, 0, my.mean, my.se_mean, my.var, my.se_var, 0, 0};
  for (int k = 1; k <= ell; ++k) {
    r.target_var_x += std::pow(d, -k);
    r.target_var_y += std::pow(d / (mu * mu), k);
  }
  auto z = [](double diff, double se) { return se > 0 ? std::abs(diff) / se : (diff == 0 ? 0.0 : INFINITY); };
  r.max_z = std::max({z(mx.mean - 1, mx.se_mean), z(my.mean - 1, my.se_mean),
                      z(mx.var - r.target_var_x, mx.se_var), z(my.var - r.target_var_y, my.se_var)});
  return r;
}

double harmonic_sum_error(double d, int depth_l, int trees, std::uint64_t seed) {
  double worst = 0;
  for (int t = 0; t < trees; ++t) {
    const GwTree tree = sample_tree(GwParams::one_type(d), depth_l, stream_seed(seed, 0x4853, t));
    const auto h = harmonic_measure(tree.tree, depth_l);
    if (!h) continue;
    std::vector<double> sums(depth_l + 1, 0.0);
    for (std::size_t v = 0; v < tree.tree.size(); ++v)
      if (tree.tree.depth[v] <= depth_l) sums[tree.tree.depth[v]] += (*h)[v];
    for (double s : sums) worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

double psi_from_walks(double c1, double c2) {
  if (c1 == 0 && c2 == 0) return 1.0;
  // A walk started on either side of the root edge ends in tree 1 or tree 2.
  const double z = c1 + c2 + c1 * c2;
  const double from1_stay = c1 * (1 + c2) / z, from2_cross = c1 / z;
  const double from2_stay = c2 * (1 + c1) / z, from1_cross = c2 / z;
  return std::sqrt(from1_stay * from2_cross) + std::sqrt(from2_stay * from1_cross);
}

}  // namespace sdplocal
