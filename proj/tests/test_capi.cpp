#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "sdplocal/sdplocal.h"

TEST_CASE("version and status names") {
  CHECK(std::strlen(sdpl_version()) > 0);
  CHECK(std::string(sdpl_status_name(SDPL_OK)) == "ok");
  CHECK(std::string(sdpl_status_name(SDPL_INVALID_PARAMETER)) == "invalid parameter");
}

TEST_CASE("graph handles") {
  sdpl_graph* g = nullptr;
  REQUIRE(sdpl_graph_er(1000, 4.0, 1, &g) == SDPL_OK);
  CHECK(sdpl_graph_num_vertices(g) == 1000);
  CHECK(sdpl_graph_degree_param(g) == 4.0);
  CHECK(sdpl_graph_num_edges(g) > 1500);
  sdpl_graph_free(g);

  const uint32_t tri[] = {0, 1, 1, 2, 0, 2};
  REQUIRE(sdpl_graph_from_edges(3, tri, 3, -1.0, &g) == SDPL_OK);
  CHECK(sdpl_graph_degree_param(g) == 2.0);
  sdpl_graph_free(g);

  const uint32_t loop[] = {1, 1};
  CHECK(sdpl_graph_from_edges(3, loop, 1, -1.0, &g) == SDPL_INVALID_INPUT);
  CHECK(std::strlen(sdpl_last_error()) > 0);
  CHECK(sdpl_graph_er(10, -1.0, 1, &g) == SDPL_INVALID_PARAMETER);
  CHECK(sdpl_graph_er(10, 1.0, 1, nullptr) == SDPL_NULL_ARGUMENT);
  CHECK(sdpl_graph_read("/nonexistent/graph.txt", -1.0, &g) == SDPL_IO_ERROR);

  std::vector<int8_t> revealed(400);
  REQUIRE(sdpl_graph_sbm(400, 6.0, 2.0, 0.3, 2, &g, revealed.data()) == SDPL_OK);
  int shown = 0;
  for (int8_t r : revealed) shown += r != 0;
  CHECK(shown > 60);
  CHECK(shown < 180);
  sdpl_graph_free(g);
  sdpl_graph_free(nullptr);
}

TEST_CASE("graph and factor files") {
  sdpl_graph* g = nullptr;
  REQUIRE(sdpl_graph_er(200, 3.0, 5, &g) == SDPL_OK);
  const std::string gpath = "capi_graph.txt", fpath = "capi_factor.bin";
  REQUIRE(sdpl_graph_write(g, gpath.c_str()) == SDPL_OK);
  sdpl_graph* back = nullptr;
  REQUIRE(sdpl_graph_read(gpath.c_str(), 3.0, &back) == SDPL_OK);
  CHECK(sdpl_graph_num_edges(back) == sdpl_graph_num_edges(g));

  sdpl_solve_options opt;
  sdpl_solve_options_init(&opt);
  CHECK(opt.restarts == 3);
  CHECK(opt.tol == 1e-7);
  opt.rank = 5;
  opt.restarts = 1;
  sdpl_factor* V = nullptr;
  sdpl_solve_report rep;
  REQUIRE(sdpl_solve(g, &opt, &V, &rep) == SDPL_OK);
  CHECK(rep.rank == 5);
  size_t n = 0, k = 0;
  sdpl_factor_dims(V, &n, &k);
  CHECK(n == 200);
  CHECK(k == 5);
  std::vector<double> row(k);
  REQUIRE(sdpl_factor_row(V, 7, row.data()) == SDPL_OK);
  double norm = 0;
  for (double x : row) norm += x * x;
  CHECK(norm == doctest::Approx(1.0));
  CHECK(sdpl_factor_row(V, 200, row.data()) == SDPL_OUT_OF_RANGE);

  REQUIRE(sdpl_factor_write(V, fpath.c_str()) == SDPL_OK);
  sdpl_factor* W = nullptr;
  REQUIRE(sdpl_factor_read(fpath.c_str(), &W) == SDPL_OK);
  double obj = 0;
  REQUIRE(sdpl_objective(back, W, &obj) == SDPL_OK);
  CHECK(obj == doctest::Approx(rep.objective));

  sdpl_factor_free(V);
  sdpl_factor_free(W);
  sdpl_graph_free(g);
  sdpl_graph_free(back);
  std::remove(gpath.c_str());
  std::remove(fpath.c_str());
}

TEST_CASE("dual witness, local values and bounds") {
  sdpl_graph* g = nullptr;
  REQUIRE(sdpl_graph_er(3000, 4.0, 9, &g) == SDPL_OK);
  sdpl_dual_report dual;
  REQUIRE(sdpl_dual_certificate(g, 0.0, &dual) == SDPL_OK);
  CHECK(dual.delta == 0.05);
  CHECK(dual.psd_ok == 1);
  CHECK(dual.shifted_branch == 1);
  CHECK(sdpl_dual_certificate(g, 0.6, &dual) == SDPL_INVALID_PARAMETER);

  double simple = 0, harmonic = 0;
  REQUIRE(sdpl_local_value(g, 0, 2, 0, &simple) == SDPL_OK);
  REQUIRE(sdpl_local_value(g, 1, 2, 4, &harmonic) == SDPL_OK);
  CHECK(simple > 2.0);
  CHECK(simple < dual.dual_value);
  CHECK(harmonic > 2.0);
  CHECK(sdpl_local_value(g, 7, 2, 4, &simple) == SDPL_INVALID_PARAMETER);
  sdpl_graph_free(g);

  double est = 0, se = 0;
  REQUIRE(sdpl_harmonic_bound(4.0, 20, 20000, 1, &est, &se) == SDPL_OK);
  CHECK(est > 3.2);
  CHECK(est < 3.5);
  CHECK(se > 0);

  const uint32_t tri[] = {0, 1, 1, 2, 0, 2};
  const double w[] = {1, 1, 1};
  double err = 1;
  REQUIRE(sdpl_ihara_bass(3, tri, w, 3, 0.5, &err) == SDPL_OK);
  CHECK(err <= 1e-10);
  CHECK(sdpl_ihara_bass(3, tri, w, 3, 1.0, &err) == SDPL_INVALID_PARAMETER);
}

TEST_CASE("commands through the C boundary") {
  char* out = nullptr;
  int code = -1;
  REQUIRE(sdpl_run_command("ihara-bass", "{\"graphs\": 5}", &out, &code) == SDPL_OK);
  CHECK(code == 0);
  CHECK(std::string(out).find("max_rel_err") != std::string::npos);
  sdpl_string_free(out);

  REQUIRE(sdpl_run_command("ihara-bass", "{\"graphs\": -5}", &out, &code) == SDPL_OK);
  CHECK(code == 2);
  sdpl_string_free(out);

  CHECK(sdpl_run_command("ihara-bass", "{not json", &out, &code) == SDPL_INVALID_PARAMETER);
  CHECK(code == 2);
  sdpl_string_free(out);

  REQUIRE(sdpl_run_command("nope", nullptr, &out, &code) == SDPL_OK);
  CHECK(code == 2);
  sdpl_string_free(out);
  CHECK(sdpl_run_command(nullptr, nullptr, &out, &code) == SDPL_NULL_ARGUMENT);
}
