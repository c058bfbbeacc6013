#include "sdplocal/sdplocal.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdplocal/dual.hpp"
#include "sdplocal/experiments.hpp"
#include "sdplocal/gw.hpp"
#include "sdplocal/local.hpp"
#include "sdplocal/nonbacktracking.hpp"
#include "sdplocal/sdp.hpp"

struct sdpl_graph {
  sdplocal::SparseGraph g;
};

struct sdpl_factor {
  sdplocal::GramFactor v;
};

namespace {

thread_local std::string last_error;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
sdpl_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return SDPL_OK;
  } catch (const sdplocal::InvalidParameter& e) {
    last_error = e.what();
    return SDPL_INVALID_PARAMETER;
  } catch (const sdplocal::InvalidInput& e) {
    last_error = e.what();
    return SDPL_INVALID_INPUT;
  } catch (const sdplocal::OutOfRange& e) {
    last_error = e.what();
    return SDPL_OUT_OF_RANGE;
  } catch (const IoError& e) {
    last_error = e.what();
    return SDPL_IO_ERROR;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SDPL_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SDPL_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return SDPL_INTERNAL_ERROR;
  }
}

sdpl_status null_argument(const char* what) {
  last_error = std::string("null argument: ") + what;
  return SDPL_NULL_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<sdplocal::Edge> edge_pairs(const uint32_t* endpoints, size_t m) {
  std::vector<sdplocal::Edge> edges(m);
  for (size_t e = 0; e < m; ++e) edges[e] = {endpoints[2 * e], endpoints[2 * e + 1]};
  return edges;
}

}  // namespace

extern "C" {

const char* sdpl_version(void) { return SDPLOCAL_VERSION; }

const char* sdpl_last_error(void) { return last_error.c_str(); }

const char* sdpl_status_name(sdpl_status status) {
  switch (status) {
    case SDPL_OK: return "ok";
    case SDPL_INVALID_PARAMETER: return "invalid parameter";
    case SDPL_INVALID_INPUT: return "invalid input";
    case SDPL_OUT_OF_RANGE: return "out of range";
    case SDPL_IO_ERROR: return "i/o error";
    case SDPL_NULL_ARGUMENT: return "null argument";
    case SDPL_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

sdpl_status sdpl_graph_er(size_t n, double d, uint64_t seed, sdpl_graph** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new sdpl_graph{sdplocal::gen_er(n, d, seed)}; });
}

sdpl_status sdpl_graph_sbm(size_t n, double a, double b, double delta, uint64_t seed,
                           sdpl_graph** out, int8_t* revealed) {
  if (!out) return null_argument("out");
  return guarded([&] {
    auto [g, labels] = sdplocal::gen_sbm(n, a, b, delta, seed);
    if (revealed)
      for (size_t i = 0; i < n; ++i) revealed[i] = static_cast<int8_t>(labels.revealed[i]);
    *out = new sdpl_graph{std::move(g)};
  });
}

sdpl_status sdpl_graph_from_edges(size_t n, const uint32_t* endpoints, size_t m, double d,
                                  sdpl_graph** out) {
  if (!out) return null_argument("out");
  if (!endpoints && m > 0) return null_argument("endpoints");
  return guarded([&] {
    const double dd = d >= 0 ? d : (n ? 2.0 * static_cast<double>(m) / static_cast<double>(n) : 0.0);
    *out = new sdpl_graph{sdplocal::SparseGraph(n, edge_pairs(endpoints, m), dd)};
  });
}

sdpl_status sdpl_graph_read(const char* path, double d, sdpl_graph** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw IoError(std::string("cannot open ") + path);
    *out = new sdpl_graph{sdplocal::read_edge_list(in, d)};
  });
}

sdpl_status sdpl_graph_write(const sdpl_graph* g, const char* path) {
  if (!g) return null_argument("graph");
  if (!path) return null_argument("path");
  return guarded([&] {
    std::ofstream f(path);
    if (!f) throw IoError(std::string("cannot write ") + path);
    sdplocal::write_edge_list(f, g->g);
  });
}

size_t sdpl_graph_num_vertices(const sdpl_graph* g) { return g ? g->g.num_vertices() : 0; }
size_t sdpl_graph_num_edges(const sdpl_graph* g) { return g ? g->g.num_edges() : 0; }
double sdpl_graph_degree_param(const sdpl_graph* g) { return g ? g->g.degree_param() : 0.0; }
void sdpl_graph_free(sdpl_graph* g) { delete g; }

void sdpl_solve_options_init(sdpl_solve_options* options) {
  if (!options) return;
  const sdplocal::SolveOptions defaults;
  options->rank = defaults.rank;
  options->max_sweeps = defaults.max_sweeps;
  options->tol = defaults.tol;
  options->seed = defaults.seed;
  options->restarts = defaults.restarts;
}

sdpl_status sdpl_solve(const sdpl_graph* g, const sdpl_solve_options* options, sdpl_factor** factor,
                       sdpl_solve_report* report) {
  if (!g) return null_argument("graph");
  if (!report) return null_argument("report");
  return guarded([&] {
    sdplocal::SolveOptions o;
    if (options) {
      o.rank = options->rank;
      o.max_sweeps = options->max_sweeps;
      o.tol = options->tol;
      o.seed = options->seed;
      o.restarts = options->restarts;
    }
    auto [V, rep] = sdplocal::solve(g->g, o);
    *report = {rep.objective, rep.normalized, rep.sweeps, rep.converged ? 1 : 0, rep.rank_used};
    if (factor) *factor = new sdpl_factor{std::move(V)};
  });
}

sdpl_status sdpl_objective(const sdpl_graph* g, const sdpl_factor* factor, double* out) {
  if (!g) return null_argument("graph");
  if (!factor) return null_argument("factor");
  if (!out) return null_argument("out");
  return guarded([&] { *out = sdplocal::objective(g->g, factor->v); });
}

sdpl_status sdpl_factor_dims(const sdpl_factor* factor, size_t* n, size_t* k) {
  if (!factor) return null_argument("factor");
  if (n) *n = factor->v.n;
  if (k) *k = factor->v.k;
  return SDPL_OK;
}

sdpl_status sdpl_factor_row(const sdpl_factor* factor, size_t i, double* out) {
  if (!factor) return null_argument("factor");
  if (!out) return null_argument("out");
  return guarded([&] {
    if (i >= factor->v.n) throw sdplocal::OutOfRange("row index out of range");
    const auto r = factor->v.row(i);
    std::copy(r.begin(), r.end(), out);
  });
}

sdpl_status sdpl_factor_write(const sdpl_factor* factor, const char* path) {
  if (!factor) return null_argument("factor");
  if (!path) return null_argument("path");
  return guarded([&] {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(std::string("cannot write ") + path);
    sdplocal::write_factor(f, factor->v);
  });
}

sdpl_status sdpl_factor_read(const char* path, sdpl_factor** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(std::string("cannot open ") + path);
    *out = new sdpl_factor{sdplocal::read_factor(f)};
  });
}

void sdpl_factor_free(sdpl_factor* factor) { delete factor; }

sdpl_status sdpl_dual_certificate(const sdpl_graph* g, double delta, sdpl_dual_report* out) {
  if (!g) return null_argument("graph");
  if (!out) return null_argument("out");
  return guarded([&] {
    const double dd = delta > 0 ? delta : sdplocal::default_dual_delta(g->g.degree_param());
    const auto c = sdplocal::build_certificate(g->g, dd);
    *out = {c.u, c.delta, c.min_eig_estimate, c.dual_value, c.psd_ok ? 1 : 0,
            c.branch == sdplocal::DualBranch::kShifted ? 1 : 0};
  });
}

sdpl_status sdpl_local_value(const sdpl_graph* g, int rule, int ell, int depth_l, double* value) {
  if (!g) return null_argument("graph");
  if (!value) return null_argument("value");
  return guarded([&] {
    if (rule == 0) {
      *value = sdplocal::value_closed_form(sdplocal::SimpleRule(g->g, ell)).value;
    } else if (rule == 1) {
      *value = sdplocal::value_closed_form(sdplocal::HarmonicRule(g->g, ell, depth_l)).value;
    } else {
      throw sdplocal::InvalidParameter("rule must be 0 (simple) or 1 (harmonic)");
    }
  });
}

sdpl_status sdpl_harmonic_bound(double d, int depth, size_t pool, uint64_t seed, double* estimate,
                                double* std_error) {
  if (!estimate) return null_argument("estimate");
  return guarded([&] {
    const auto e = sdplocal::harmonic_bound(d, depth, pool, seed);
    *estimate = e.estimate;
    if (std_error) *std_error = e.std_error;
  });
}

sdpl_status sdpl_ihara_bass(size_t n, const uint32_t* endpoints, const double* weights, size_t m,
                            double u, double* rel_err) {
  if (m > 0 && (!endpoints || !weights)) return null_argument("endpoints/weights");
  if (!rel_err) return null_argument("rel_err");
  return guarded([&] {
    std::vector<sdplocal::WeightedEdge> edges(m);
    for (size_t e = 0; e < m; ++e) edges[e] = {endpoints[2 * e], endpoints[2 * e + 1], weights[e]};
    *rel_err = sdplocal::ihara_bass_check(sdplocal::WeightedEdgeGraph(n, std::move(edges)), u).rel_err;
  });
}

sdpl_status sdpl_run_command(const char* command, const char* config_json, char** output,
                             int* exit_code) {
  if (!command) return null_argument("command");
  if (!output) return null_argument("output");
  if (!exit_code) return null_argument("exit_code");
  *output = nullptr;
  return guarded([&] {
    sdplocal::Json config = sdplocal::Json::object();
    if (config_json && *config_json) {
      try {
        config = sdplocal::Json::parse(config_json);
      } catch (const nlohmann::json::parse_error& e) {
        *exit_code = sdplocal::kExitBadConfig;
        *output = copy_string(std::string("{\"error\": \"config is not valid JSON\"}\n"));
        throw sdplocal::InvalidParameter(e.what());
      }
    }
    const sdplocal::CommandResult r = sdplocal::run_command(command, config);
    *exit_code = r.exit_code;
    *output = copy_string(r.output);
  });
}

void sdpl_string_free(char* s) { std::free(s); }

}  // extern "C"
