#ifndef VINSYS_H
#define VINSYS_H

/*
 * C interface to the shifted power-sum counting library.
 *
 * Exact counts travel as decimal strings (they outgrow every fixed-width
 * integer); structured results travel as JSON in caller-supplied buffers.
 * Every function returns a status code; on any nonzero status the
 * thread-local message from vinsys_last_error() describes the problem.
 * Buffers that are too small yield VINSYS_BUFFER and an error message
 * stating the required size, so callers can retry with a larger buffer.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define VINSYS_OK 0
#define VINSYS_BUDGET 2    /* refused: predicted cost exceeds the budget */
#define VINSYS_INVALID 3   /* invalid parameters */
#define VINSYS_TOLERANCE 4 /* numeric result failed its own sanity gates */
#define VINSYS_BUFFER 5    /* output buffer too small */
#define VINSYS_IO 6        /* cache or file I/O failure */
#define VINSYS_INTERNAL 7  /* unexpected failure */

typedef struct vinsys_config {
  uint64_t max_entries;     /* sparse-map entry budget */
  uint64_t max_enumeration; /* enumeration step budget */
  int threads;              /* <= 0 selects all hardware threads */
  uint64_t seed;            /* Monte Carlo seed */
  double tol;               /* quadrature tolerance */
  uint64_t mc_samples;      /* Monte Carlo sample count */
  const char* cache_dir;    /* NULL or empty disables the count-map cache */
} vinsys_config;

/* Fills cfg with the library defaults. */
void vinsys_config_init(vinsys_config* cfg);

const char* vinsys_version(void);

/* Copies the calling thread's last error message; returns its full length
 * (excluding the terminator) regardless of how much fit. */
size_t vinsys_last_error(char* buf, size_t len);

/* ------------------------------------------------------------------ */
/* Exact counting                                                      */
/* ------------------------------------------------------------------ */

/* Solutions of sum(x_i^j - y_i^j) = h_j, 1 <= j <= k, x,y in [1,X]^s.
 * h has k entries. method: "auto", "brute", "mitm", or "dft".
 * method_out receives the method actually used; seconds the wall time. */
int vinsys_count_system(const vinsys_config* cfg, int s, int k, long long X,
                        const long long* h, const char* method,
                        char* count_out, size_t count_len, char* method_out,
                        size_t method_len, double* seconds);

/* Solutions with s = k where no x_i equals any y_m. */
int vinsys_count_distinct(const vinsys_config* cfg, int k, long long X,
                          const long long* h, char* count_out,
                          size_t count_len);

/* Mixed system: u pairs over [1,2X] against r shift-profile pairs over
 * [1,X]; u + r >= 1. */
int vinsys_count_mixed(const vinsys_config* cfg, int u, int r, int k,
                       long long X, const long long* h, char* count_out,
                       size_t count_len);

/* Near-diagonal inequality counts; which is 1 or 2. */
int vinsys_count_omega(const vinsys_config* cfg, int which, int s, int k,
                       long long X, char* count_out, size_t count_len);

/* Full-torus moment by exact DFT on integer grids: u factors |f|^2 over
 * [1,f_hi], r factors |g|^2 over [1,g_hi], optional twist e(-alpha.h).
 * JSON: {"count","imag_residual","round_residual","grid_points"}. */
int vinsys_dft_moment(const vinsys_config* cfg, int u, int r, int k,
                      long long f_hi, long long g_hi, const long long* h,
                      int twist, char* json_out, size_t json_len);

/* ------------------------------------------------------------------ */
/* Ladders, fits, and the bound catalog                                */
/* ------------------------------------------------------------------ */

/* Runs the count at each of xs[0..n_xs); budget refusals mark the point and
 * the ladder continues. JSON: {"s","k","h",
 * "points":[{"X","count","method","seconds","ok","error"}...]}. */
int vinsys_run_ladder(const vinsys_config* cfg, int s, int k,
                      const long long* h, const long long* xs, size_t n_xs,
                      const char* method, char* json_out, size_t json_len);

/* Least-squares slope on (log X, log count); counts are decimal strings.
 * JSON: {"slope","intercept","max_abs_residual","points_used",
 * "zeros_dropped","error_points","identically_zero"}. */
int vinsys_fit_points(const long long* xs, const char* const* counts,
                      size_t n, char* json_out, size_t json_len);

/* Catalog of proved exponent records at (s, k, h). JSON:
 * {"records":[{"name","exponent","exponent_value","direction",
 * "conditional","vanishes","note"}...]}. */
int vinsys_bound_catalog(int s, int k, const long long* h, char* json_out,
                         size_t json_len);

/* One-shot fit plus catalog comparison; slack <= 0 selects the default
 * 0.4. JSON: {"fit":{...},"records":[...],"comparison":[{"name","verdict",
 * "flagged","detail"}...]}. */
int vinsys_fit_report(int s, int k, const long long* h, const long long* xs,
                      const char* const* counts, size_t n, double slack,
                      char* json_out, size_t json_len);

/* Conjectured ceiling for a restricted 2s-th moment over a region of the
 * given measure at height X: C * X^eps * (X^s * measure + X^{2s-k(k+1)/2}).
 * The conjecture behind it is expected for s >= k(k+1)/4 + 1, or for any s
 * when measure >= X^{1-k(k+1)/4}; the formula itself is computed for any
 * valid (s >= 1, k >= 1, X >= 2, measure >= 0, C > 0). */
int vinsys_conjectured_bound(int s, int k, double measure, double X,
                             double eps, double C, double* out);

/* ------------------------------------------------------------------ */
/* Exponential sums and oscillatory integrals                          */
/* ------------------------------------------------------------------ */

/* f_k(alpha; X) = sum_{x<=X} e(alpha_1 x + ... + alpha_k x^k). */
int vinsys_weyl_sum(const vinsys_config* cfg, const double* alpha, int k,
                    long long X, double out_re_im[2]);

/* Shifted companion sum with profile nu_j(y; h). */
int vinsys_shifted_sum(const vinsys_config* cfg, const double* alpha, int k,
                       long long X, const long long* h, double out_re_im[2]);

/* Linear kernel sum_{z<=X} e(-gamma z), closed form, plus its proven
 * envelope min(X, 1/(2||gamma||)). bound may be NULL. */
int vinsys_kernel_sum(double gamma, long long X, double out_re_im[2],
                      double* bound);

/* Complete rational sum S(q, a) = sum_{r=1}^{q} e_q(a_1 r + ... + a_k r^k). */
int vinsys_complete_sum(long long q, const long long* a, int k,
                        double out_re_im[2]);

/* Oscillatory integral I(beta) = int_0^1 e(beta_1 g + ... + beta_k g^k) dg.
 * evals may be NULL. */
int vinsys_oscillatory_integral(const double* beta, int k, double tol,
                                long long max_evals, double out_re_im[2],
                                long long* evals);

/* ------------------------------------------------------------------ */
/* Arc geometry                                                        */
/* ------------------------------------------------------------------ */

/* Exact dissection class of a torus point: 1 minor, 2 major-outside,
 * 3 annulus, 4 core. name_out (optional) receives the class name. */
int vinsys_classify_point(const double* alpha, int k, long long X, int* cls,
                          char* name_out, size_t name_len);

/* One-dimensional major arc test |q alpha - a| <= Q X^{-k}, q <= Q. */
int vinsys_major_arc_1d(double alpha, double Q, int k, long long X,
                        int* in_arc, long long* q, long long* a);

/* Joint box test |alpha_j - a_j/q| <= Z X^{-j} for all j, q <= Z,
 * gcd(q, a_1..a_k) = 1. a receives k numerators when inside. */
int vinsys_arc_box(const double* alpha, int k, double Z, long long X,
                   int* in_box, long long* q, long long* a);

/* ------------------------------------------------------------------ */
/* Densities and predictions                                           */
/* ------------------------------------------------------------------ */

/* Truncated singular series through q <= q_max.
 * JSON: {"value","imag_residual","per_q":[...]}. */
int vinsys_singular_series(const vinsys_config* cfg, int s, int k,
                           const long long* h, long long q_max,
                           char* json_out, size_t json_len);

/* Truncated singular integral over [-B,B]^k at scaled shift n (k entries).
 * JSON: {"value","imag_residual","quad_err","tail_correction","tail_bound",
 * "tail_bound_valid","converged","evals"}. */
int vinsys_singular_integral(const vinsys_config* cfg, int s, int k,
                             const double* n, double B, double tol,
                             long long max_evals, char* json_out,
                             size_t json_len);

/* Product prediction (series) * (integral) * X^{2s - k(k+1)/2}.
 * JSON: {"series":{...},"integral":{...},"scale","value"}. */
int vinsys_prediction(const vinsys_config* cfg, int s, int k,
                      const long long* h, long long X, long long q_max,
                      double B, double tol, long long max_evals,
                      char* json_out, size_t json_len);

/* Monte Carlo restricted moment of |f|^{2u} |g|^{2r} (times the twist) over
 * a region: region_kind 0 full cube, 1 box (box holds k lo,hi pairs),
 * 2 dissection class cls built at scale dissect_X.
 * JSON: {"value_re","value_im","std_error","hit_fraction","samples"}. */
int vinsys_restricted_moment(const vinsys_config* cfg, int u, int r, int k,
                             long long f_hi, long long g_hi,
                             const long long* h, int twist, int region_kind,
                             const double* box, int cls, long long dissect_X,
                             char* json_out, size_t json_len);

/* ------------------------------------------------------------------ */
/* Property suites                                                     */
/* ------------------------------------------------------------------ */

/* JSON array of suite names. */
int vinsys_verify_suites(char* json_out, size_t json_len);

/* Runs one suite, or every suite when name is "all".
 * JSON: {"reports":[{"suite","trials","failures","passed","detail"}...]}. */
int vinsys_verify_run(const vinsys_config* cfg, const char* suite,
                      long long trials, char* json_out, size_t json_len);

#ifdef __cplusplus
}
#endif

#endif /* VINSYS_H */
