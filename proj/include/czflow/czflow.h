/* czflow: Calderon-Zygmund machinery on semidirect-product flow groups.
 *
 * C surface over the C++ core: opaque handles, integer status codes, and
 * JSON/CSV payloads.  Every function returns CZF_OK on success; on failure
 * czf_last_error() describes the problem for the calling thread.
 */
#ifndef CZFLOW_CZFLOW_H
#define CZFLOW_CZFLOW_H

#include <stddef.h>

#if defined(_WIN32)
#define CZF_API __declspec(dllexport)
#else
#define CZF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum czf_status {
  CZF_OK = 0,
  CZF_ERR_CONFIG = 2,      /* malformed or inconsistent configuration */
  CZF_ERR_RESOURCE = 3,    /* window or generation range exhausted */
  CZF_ERR_CERTIFICATE = 4, /* a certified bound failed */
  CZF_ERR_INTERNAL = 5
} czf_status;

typedef struct czf_context czf_context; /* group + measure + cube system */
typedef struct czf_family czf_family;   /* a built dyadic family */

/* Message for the last failing call on this thread. */
CZF_API const char* czf_last_error(void);

/* Context lifecycle.  config_json follows the documented schema; NULL or ""
 * selects the defaults (abelian m=1, haar, delta=1/2, gamma=5,
 * lambda=2.1e^3). */
CZF_API czf_status czf_context_create(const char* config_json, czf_context** out);
CZF_API void czf_context_destroy(czf_context* ctx);

/* Config echo with resolved constants (C1, C2, C4, ...), as JSON.  Free the
 * returned string with czf_string_free. */
CZF_API czf_status czf_context_resolved_config(czf_context* ctx, char** json_out);
CZF_API void czf_string_free(char* s);

/* Distance between two points given as coordinate arrays (n..., a) of length
 * base_dim + 1.  metric is "dN", "dG" or "dZ"; "dN" ignores the a entries. */
CZF_API czf_status czf_distance(czf_context* ctx, const char* metric, const double* x,
                                size_t x_len, const double* y, size_t y_len, double* out);

/* Dyadic family of admissible cylinders, neg_depth generations of ascent and
 * pos_depth generations of sons, restricted to the configured window. */
CZF_API czf_status czf_family_build(czf_context* ctx, int neg_depth, int pos_depth,
                                    czf_family** out);
CZF_API void czf_family_destroy(czf_family* fam);

/* JSON-lines dump (one cylinder per line) plus a JSON summary. */
CZF_API czf_status czf_family_dump(czf_family* fam, const char* path, char** summary_json_out);

/* JSON-lines dump of the underlying cube system over the generations the
 * family touches: {generation, id, center, parent_id, flags}. */
CZF_API czf_status czf_family_dump_cubes(czf_family* fam, const char* path);

/* Stopping-time decomposition report for a function at level alpha.
 * function_spec: "random:<nterms>" | "indicator:<level>:<index>" |
 * "converse:<level>:<index>" (the single-cylinder construction; alpha is
 * derived, the argument is ignored).  *certificate_ok reports whether every
 * certified bound held; the report file is written either way. */
CZF_API czf_status czf_cz_decompose(czf_family* fam, const char* function_spec, double alpha,
                                    const char* out_path, int* certificate_ok);

/* Weak (1,1) campaign over random functions and geometric alpha grids;
 * CSV columns: function_id, alpha, level_measure, bound, margin. */
CZF_API czf_status czf_weak11(czf_family* fam, int n_functions, int terms_per_function,
                              const char* out_csv_path, int* certificate_ok);

/* Divergence table for the extended-Heisenberg sequence; CSV columns:
 * l, log_r0_r, a_low, a_high, log_diam_lb, log_ratio_lb_at_K1. */
CZF_API czf_status czf_counterexample(czf_context* ctx, int l_max, double K,
                                      const char* out_csv_path, int* certificate_ok);

#ifdef __cplusplus
}
#endif

#endif /* CZFLOW_CZFLOW_H */
