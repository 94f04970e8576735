#ifndef HAAR_H
#define HAAR_H

#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum HaarStatus {
  HAAR_STATUS_OK = 0,
  HAAR_STATUS_NULL_POINTER = 1,
  HAAR_STATUS_INVALID_ARGUMENT = 2,
  HAAR_STATUS_PARSE = 3,
  HAAR_STATUS_DOMAIN = 4,
  HAAR_STATUS_NUMERICAL = 5,
  HAAR_STATUS_IO = 6,
  HAAR_STATUS_BUFFER_TOO_SMALL = 7,
  HAAR_STATUS_OVERFLOW = 8,
  HAAR_STATUS_PANIC = 9,
} HaarStatus;

// A parsed chart.
typedef struct HaarChart HaarChart;

// A chart with its normalized Haar density.
typedef struct HaarDensity HaarDensity;

// A seeded Haar-uniform sampler.
typedef struct HaarSampler HaarSampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into the library from the same thread.
const char *haar_last_error(void);

// Static description of a status code; unknown codes get a generic text.
const char *haar_status_string(int32_t status);

// Loads `builtin:<tag>` or a chart file.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum HaarStatus haar_chart_load(const char *spec, struct HaarChart **out);

// Parses chart source text.
//
// # Safety
// `source` must be a NUL-terminated string; `out` must be writable.
enum HaarStatus haar_chart_parse(const char *source, struct HaarChart **out);

// # Safety
// `chart` must come from this library or be NULL.
void haar_chart_free(struct HaarChart *chart);

// Number of chart parameters, 0 for NULL.
//
// # Safety
// `chart` must be a live handle or NULL.
size_t haar_chart_param_count(const struct HaarChart *chart);

// Size `D` of the chart's `D×D` matrices, 0 for NULL.
//
// # Safety
// `chart` must be a live handle or NULL.
size_t haar_chart_matrix_dim(const struct HaarChart *chart);

// Writes `p(u)` row-major into `out`.
//
// # Safety
// `u` must hold `n` doubles and `out` `out_len` doubles.
enum HaarStatus haar_chart_evaluate(const struct HaarChart *chart,
                                    const double *u,
                                    size_t n,
                                    double *out,
                                    size_t out_len);

// Numeric Maurer–Cartan density normalized with `nodes` Gauss–Legendre
// points per axis. The chart handle stays owned by the caller.
//
// # Safety
// `chart` must be a live handle; `out` must be writable.
enum HaarStatus haar_density_new(const struct HaarChart *chart,
                                 size_t nodes,
                                 struct HaarDensity **out);

// Closed-form density of a built-in chart tag such as `so3-euler`.
//
// # Safety
// `tag` must be a NUL-terminated string; `out` must be writable.
enum HaarStatus haar_density_closed_form(const char *tag, struct HaarDensity **out);

// # Safety
// `density` must come from this library or be NULL.
void haar_density_free(struct HaarDensity *density);

// Normalized density `k(u)`.
//
// # Safety
// `u` must hold `n` doubles; `out` must be writable.
enum HaarStatus haar_density_value(const struct HaarDensity *density,
                                   const double *u,
                                   size_t n,
                                   double *out);

// The normalization constant `C`.
//
// # Safety
// `density` must be a live handle; `out` must be writable.
enum HaarStatus haar_density_normalization(const struct HaarDensity *density, double *out);

// Sampler for `group` (`so2`, `o2`, `so3`, `o3`) in a built-in chart.
//
// # Safety
// `group` and `chart` must be NUL-terminated strings; `out` must be writable.
enum HaarStatus haar_sampler_new(const char *group,
                                 const char *chart,
                                 uint64_t seed,
                                 struct HaarSampler **out);

// # Safety
// `sampler` must come from this library or be NULL.
void haar_sampler_free(struct HaarSampler *sampler);

// Writes the next sample row-major (`D·D` doubles).
//
// # Safety
// `sampler` must be a live handle not used concurrently; `out` must hold
// `out_len` doubles.
enum HaarStatus haar_sampler_next(struct HaarSampler *sampler, double *out, size_t out_len);

// Exact dimension of the invariants of the `n`-th tensor power.
//
// # Safety
// `group` must be a NUL-terminated string; `out` must be writable.
enum HaarStatus haar_dim_invariants(const char *group, uint32_t n, uint64_t *out);

// The same dimension by the one-dimensional trace integral.
//
// # Safety
// `group` must be a NUL-terminated string; `out` must be writable.
enum HaarStatus haar_dim_invariants_quadrature(const char *group, uint32_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAAR_H */
