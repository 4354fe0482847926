/* C API for the potentia shared library.
 *
 * All functions return a status code (POTENTIA_OK on success); on failure
 * potentia_last_error() describes the problem for the calling thread.
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with potentia_string_free().  Scene handles are opaque and
 * must be released with potentia_scene_free().
 */
#ifndef POTENTIA_H
#define POTENTIA_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct potentia_scene potentia_scene;

enum potentia_status {
  POTENTIA_OK = 0,
  POTENTIA_E_COMPUTE = 1,   /* computation or parameter contract failure */
  POTENTIA_E_USAGE = 2,     /* malformed call (null arguments, bad enum) */
  POTENTIA_E_JSON = 3,      /* scene bytes are not valid JSON */
  POTENTIA_E_SCHEMA = 4,    /* scene JSON violates the schema */
  POTENTIA_E_OVERLAP = 5,   /* scene balls overlap */
  POTENTIA_E_DIMENSION = 6, /* dimension mismatch in the scene */
  POTENTIA_E_IO = 7         /* file read/write failure */
};

enum potentia_format { POTENTIA_FORMAT_CSV = 0, POTENTIA_FORMAT_JSON = 1 };

const char* potentia_version(void);

/* Thread-local message for the most recent failure in this thread. */
const char* potentia_last_error(void);

void potentia_string_free(char* s);

/* ---- scenes -------------------------------------------------------------- */

int potentia_scene_parse(const char* bytes, potentia_scene** out);
int potentia_scene_load(const char* path, potentia_scene** out);
void potentia_scene_free(potentia_scene* scene);

/* SHA-256 hex digest of the canonicalized scene bytes; owned by the scene. */
const char* potentia_scene_digest(const potentia_scene* scene);
int potentia_scene_dimension(const potentia_scene* scene);
double potentia_scene_alpha(const potentia_scene* scene);
int potentia_scene_has_generator(const potentia_scene* scene);
unsigned long long potentia_scene_ball_count(const potentia_scene* scene);

/* ---- operations ---------------------------------------------------------- */

/* Kernel constants plus a triangle-property scan over sampled points.
 * JSON keys: d, alpha, amplitude, c, c0, r0, doubling_constant,
 * triangle_constant, triangle_bound, sample_points, seed. */
int potentia_kernel_check(const potentia_scene* scene, unsigned long long sample_points,
                          unsigned long long seed, char** out_json);

/* Inner-capacity linear program over the scene's balls.  Overrides <= 0 keep
 * the scene defaults.  JSON keys: value, lower, upper, support_points,
 * constraint_points, audit_max_potential. */
int potentia_capacity(const potentia_scene* scene, long long grid_boundary,
                      long long grid_layers, char** out_json);

/* Shell decomposition of the series sum_n g(gamma^n R) cap(A in shell_n).
 * Emits the per-shell table (CSV columns: n, inner_radius, outer_radius,
 * ball_count, method, cap_value, cap_lower, cap_upper, term, partial_sum)
 * and a verdict JSON.  R/gamma/n_shells <= 0 pick defaults (1, 2, 8). */
int potentia_wiener(const potentia_scene* scene, double R, double gamma, int n_shells,
                    long long grid_boundary, long long grid_layers, int format,
                    char** out_table, char** out_verdict_json);

/* Avoidability verdict: closed-form rule for power-law generator scenes,
 * series heuristic otherwise.  JSON keys: kind, rationale, closed_form, and
 * exponent for the closed-form path. */
int potentia_classify(const potentia_scene* scene, double R, double gamma, int n_shells,
                      long long grid_boundary, long long grid_layers, char** out_json);

/* Hitting-probability estimate from a start point: walk-on-spheres for
 * alpha = 2, isotropic stable walk for alpha < 2.  paths/r_esc/seed <= 0 keep
 * scene defaults.  JSON keys: p_hat, stderr, escape_bias_bound, paths, hits,
 * unresolved, seed, r_esc, warnings. */
int potentia_simulate(const potentia_scene* scene, const double* start, int start_len,
                      long long paths, double r_esc, long long seed, char** out_json);

/* Zero-one-law probe: hitting estimates from x0 + (L, 0, ..., 0) for each
 * distance L (strictly increasing).  Table columns: distance, p_hat, stderr,
 * bias. */
int potentia_probe(const potentia_scene* scene, const double* distances, int n_distances,
                   long long paths, double r_esc, long long seed, int format,
                   char** out_table);

/* Metrize the kernel quasimetric on n points (flat row-major n*d array) by
 * chaining; gamma_exponent <= 0 selects d - alpha.  JSON keys: points, gamma,
 * distortion, triangle_constant, matrix (when include_matrix). */
int potentia_metrize(const potentia_scene* scene, const double* points, int n, int d,
                     double gamma_exponent, int include_matrix, char** out_json);

/* Run manifest: command, scene digest, seed, tool version, output paths. */
int potentia_manifest(const char* command, const potentia_scene* scene,
                      unsigned long long seed, const char* const* outputs, int n_outputs,
                      char** out_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* POTENTIA_H */
