#ifndef SDPLOCAL_SDPLOCAL_H
#define SDPLOCAL_SDPLOCAL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define SDPL_API __attribute__((visibility("default")))
#else
#define SDPL_API
#endif

typedef enum sdpl_status {
  SDPL_OK = 0,
  SDPL_INVALID_PARAMETER = 1,
  SDPL_INVALID_INPUT = 2,
  SDPL_OUT_OF_RANGE = 3,
  SDPL_IO_ERROR = 4,
  SDPL_NULL_ARGUMENT = 5,
  SDPL_INTERNAL_ERROR = 6
} sdpl_status;

typedef struct sdpl_graph sdpl_graph;
typedef struct sdpl_factor sdpl_factor;

SDPL_API const char* sdpl_version(void);
/* Message for the most recent failure on the calling thread ("" if none). */
SDPL_API const char* sdpl_last_error(void);
SDPL_API const char* sdpl_status_name(sdpl_status status);

/* Graphs. */
SDPL_API sdpl_status sdpl_graph_er(size_t n, double d, uint64_t seed, sdpl_graph** out);
/* revealed (optional, length n) receives +1, -1 or 0 for hidden labels. */
SDPL_API sdpl_status sdpl_graph_sbm(size_t n, double a, double b, double delta, uint64_t seed,
                                    sdpl_graph** out, int8_t* revealed);
/* endpoints holds 2*m vertex ids; d < 0 uses the average degree. */
SDPL_API sdpl_status sdpl_graph_from_edges(size_t n, const uint32_t* endpoints, size_t m, double d,
                                           sdpl_graph** out);
SDPL_API sdpl_status sdpl_graph_read(const char* path, double d, sdpl_graph** out);
SDPL_API sdpl_status sdpl_graph_write(const sdpl_graph* g, const char* path);
SDPL_API size_t sdpl_graph_num_vertices(const sdpl_graph* g);
SDPL_API size_t sdpl_graph_num_edges(const sdpl_graph* g);
SDPL_API double sdpl_graph_degree_param(const sdpl_graph* g);
SDPL_API void sdpl_graph_free(sdpl_graph* g);

/* Low-rank solver. */
typedef struct sdpl_solve_options {
  size_t rank; /* 0 selects the default */
  int max_sweeps;
  double tol;
  uint64_t seed;
  int restarts;
} sdpl_solve_options;

typedef struct sdpl_solve_report {
  double objective;
  double normalized;
  int sweeps;
  int converged;
  size_t rank;
} sdpl_solve_report;

SDPL_API void sdpl_solve_options_init(sdpl_solve_options* options);
/* factor may be NULL when only the report is wanted. */
SDPL_API sdpl_status sdpl_solve(const sdpl_graph* g, const sdpl_solve_options* options,
                                sdpl_factor** factor, sdpl_solve_report* report);
SDPL_API sdpl_status sdpl_objective(const sdpl_graph* g, const sdpl_factor* factor, double* out);
SDPL_API sdpl_status sdpl_factor_dims(const sdpl_factor* factor, size_t* n, size_t* k);
SDPL_API sdpl_status sdpl_factor_row(const sdpl_factor* factor, size_t i, double* out);
SDPL_API sdpl_status sdpl_factor_write(const sdpl_factor* factor, const char* path);
SDPL_API sdpl_status sdpl_factor_read(const char* path, sdpl_factor** out);
SDPL_API void sdpl_factor_free(sdpl_factor* factor);

/* Dual witness. */
typedef struct sdpl_dual_report {
  double u;
  double delta;
  double min_eig_estimate;
  double dual_value;
  int psd_ok;
  int shifted_branch; /* 1: shifted diagonal, 0: degree fallback */
} sdpl_dual_report;

/* delta <= 0 selects the default. */
SDPL_API sdpl_status sdpl_dual_certificate(const sdpl_graph* g, double delta, sdpl_dual_report* out);

/* Local rules: 0 simple, 1 harmonic (depth_l used), closed-form value. */
SDPL_API sdpl_status sdpl_local_value(const sdpl_graph* g, int rule, int ell, int depth_l,
                                      double* value);
SDPL_API sdpl_status sdpl_harmonic_bound(double d, int depth, size_t pool, uint64_t seed,
                                         double* estimate, double* std_error);
/* Weighted graph given as 2*m endpoints and m weights. */
SDPL_API sdpl_status sdpl_ihara_bass(size_t n, const uint32_t* endpoints, const double* weights,
                                     size_t m, double u, double* rel_err);

/* Runs a CLI command with a JSON config. *output is owned by the caller and
   released with sdpl_string_free. exit_code follows the CLI: 0 ok,
   1 invariant failure, 2 bad config. */
SDPL_API sdpl_status sdpl_run_command(const char* command, const char* config_json, char** output,
                                      int* exit_code);
SDPL_API void sdpl_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
