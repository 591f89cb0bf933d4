#pragma once

// Circle-method experimentation layer.
//
//  * Exact rational membership tests for the standard arc families on the
//    unit torus:
//      - one-dimensional major arcs around rationals a/q for the leading
//        coordinate:   M(Q) = union of { alpha : |q alpha - a| <= Q X^{-k} }
//        over q <= Q, gcd(a, q) = 1;
//      - k-dimensional boxes around rational points (a_1/q, ..., a_k/q):
//        K(Z) = union over q <= Z, gcd(q, a_1, ..., a_k) = 1 of
//        { alpha : |alpha_j - a_j/q| <= Z X^{-j} for all j }.
//    Doubles are treated as the exact dyadic rationals they are, so the
//    verdicts carry no rounding slack.  Thresholds can be given either as
//    explicit numbers or as exact roots X^{1/m} (compared by powering).
//
//  * A four-class dissection of the torus driven by the two exact-root
//    cutoffs L = X^{1/(8k^2)} and Q = X^{1/(8k)}:
//      class 4 "core"           alpha in K(L)
//      class 1 "minor"          leading coordinate outside M(Q)
//      class 2 "major-outside"  leading coordinate in M(Q) but alpha
//                               outside K(Q^2)
//      class 3 "annulus"        the remainder
//
//  * Exact moment counts on a finite unitary grid: the mean value
//    \int |f|^{2u} |g|^{2r} e(-alpha.h) d alpha  equals a finite average
//    over a product grid once each grid size exceeds the range of the
//    corresponding integer linear form, so the count is recovered exactly
//    (up to floating round-off that is measured and reported).
//
//  * Stratified Monte Carlo estimates of the same moments restricted to a
//    region (full torus, explicit box, or one dissection class).
//
//  * Truncated singular series and singular integral, and the product
//    prediction  series * integral * X^{2s - k(k+1)/2}.

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "vinsys/core.hpp"
#include "vinsys/expsums.hpp"

namespace vinsys::circle {

using Cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Arc membership (exact)
// ---------------------------------------------------------------------------

struct Arc1DResult {
  bool in = false;
  long q = 0;  // witness denominator (smallest), 0 when not a member
  long a = 0;  // witness numerator: |q alpha - a| <= Q X^{-k}
};

struct ArcKResult {
  bool in = false;
  long q = 0;               // witness denominator (smallest)
  std::vector<long> a;      // witness numerators, |alpha_j - a_j/q| <= Z X^{-j}
};

// alpha_k in M(Q): exists q <= Q and integer a with |q alpha - a| <= Q X^{-k}.
// Exact over the dyadic value of alpha; scans q = 1..floor(Q).
Arc1DResult major_arc_1d(double alpha, double Q, int k, long X);

// Same test with Q = X^{1/m} (exact root comparison).
Arc1DResult major_arc_1d_root(double alpha, long m, int k, long X);

// alpha in K(Z): exists q <= Z and a in Z^k with gcd(q, a_1, ..., a_k) = 1
// and |alpha_j - a_j/q| <= Z X^{-j} for every j.
ArcKResult arc_box_k(const std::vector<double>& alpha, double Z, long X);

// Same test with Z = X^{1/m} (exact root comparison).
ArcKResult arc_box_k_root(const std::vector<double>& alpha, long m, long X);

// ---------------------------------------------------------------------------
// Dissection
// ---------------------------------------------------------------------------

struct DissectionConfig {
  int k = 2;
  long X = 2;
  long core_m = 32;     // core boxes use Z = X^{1/core_m},   core_m   = 8k^2
  long major_m = 16;    // leading major arcs use Q = X^{1/major_m},  = 8k
  long annulus_m = 8;   // enclosing boxes use Z = X^{1/annulus_m},   = 4k
                        //   (that is Q^2 for the major-arc cutoff above)

  // Standard parameters for a degree-k system at height X (requires k >= 2).
  static DissectionConfig make(int k, long X);
};

// Returns the class index 1..4 described above.
int dissection_classify(const std::vector<double>& alpha,
                        const DissectionConfig& cfg);

// "minor", "major-outside", "annulus", "core"
const char* dissection_class_name(int cls);

// ---------------------------------------------------------------------------
// Exact moments on a unitary grid
// ---------------------------------------------------------------------------

// Counts solutions of
//   sum_{i<=u} (x_i^j - y_i^j) + sum_{m<=r} (nu_j(w_m; h) - nu_j(z_m; h)) = t_j
// for j = 1..k, with x, y in [1, f_hi]^u and w, z in [1, g_hi]^r, where the
// target is t = h when twist is set and t = 0 otherwise (the pure even
// moment; with r > 0 that is the mixed system).  The count is obtained by
// averaging the corresponding product of exponential sums over a finite grid
// whose size per coordinate exceeds the full range of the linear form, which
// makes the orthogonality relation exact.
struct DftSpec {
  int u = 1;
  int r = 0;
  int k = 1;
  long f_hi = 1;
  long g_hi = 1;
  HTuple h;           // degree-k shift tuple: nu profiles, and the target
  bool twist = true;  // target h (with the e(-alpha.h) twist) vs target 0
};

struct DftResult {
  Int count;                     // rounded exact count
  double imag_residual = 0;      // |imaginary part| of the grid average
  double round_residual = 0;     // |real part - count|
  Int grid_points;               // product of the grid sizes
  std::vector<long> grid_sizes;  // M_1, ..., M_k
};

DftResult dft_moment(const DftSpec& spec, const Budget& budget, int threads);

// ---------------------------------------------------------------------------
// Monte Carlo restricted moments
// ---------------------------------------------------------------------------

struct MomentSpec {
  int u = 0;        // number of |f|^2 factors
  int r = 0;        // number of |g|^2 factors
  int k = 1;
  long f_hi = 1;    // summation range of f
  long g_hi = 1;    // summation range of g
  HTuple h;         // shift tuple for g and for the twist
  bool twist = true;  // multiply by e(-alpha . h)
};

struct Region {
  enum class Kind { FullCube, Box, DissectionClass };
  Kind kind = Kind::FullCube;
  std::vector<std::pair<double, double>> box;  // Kind::Box: per-coordinate
  int cls = 0;                                 // Kind::DissectionClass: 1..4
};

// Lebesgue measure of a FullCube (1) or Box region; throws invalid_error for
// a dissection class (estimate it via hit_fraction instead).
double box_measure(const Region& region, int k);

struct SamplerConfig {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 12345;
  int strata = 256;  // stratified along the first coordinate
};

struct MomentEstimate {
  Cplx value{0.0, 0.0};   // estimate of the restricted integral
  double std_error = 0;   // combined standard error of the estimate
  double hit_fraction = 0;  // fraction of proposals inside the region
  std::uint64_t samples = 0;
};

// Estimates int_R |f|^{2u} |g|^{2r} e(-alpha.h) d alpha.  Box regions are
// sampled directly (mean times measure); dissection classes are sampled on
// the full torus with an exact membership indicator.  `dissection` must be
// non-null when region.kind == DissectionClass.  Deterministic for a fixed
// (seed, strata, samples) regardless of thread count.
MomentEstimate restricted_moment_estimate(const MomentSpec& spec,
                                          const Region& region,
                                          const DissectionConfig* dissection,
                                          const SamplerConfig& sampler,
                                          int threads);

// ---------------------------------------------------------------------------
// Singular series / singular integral / prediction
// ---------------------------------------------------------------------------

struct SeriesResult {
  double value = 0;          // real part of the truncated series
  double imag_residual = 0;  // |imaginary part| (should vanish)
  std::vector<double> per_q;  // contribution of each q = 1..q_max
};

// sum_{q <= q_max} sum_{a mod q, gcd(q, a_1..a_k) = 1}
//     |q^{-1} S(q, a)|^{2s} e(-(a.h)/q)
// with S the complete degree-k sum of expsums.  Work is Theta(sum q^{k+1})
// and is checked against budget.max_enumeration.
SeriesResult singular_series_partial(int s, int k, const HTuple& h, long q_max,
                                     const Budget& budget, int threads);

struct IntegralResult {
  double value = 0;            // truncated integral plus tail_correction
  double imag_residual = 0;    // |imaginary part| of the quadrature value
  double quad_err = 0;         // quadrature error estimate
  double tail_correction = 0;  // analytic tail added (k = 1, n = 0 only)
  double tail_bound = 0;       // rigorous bound on the remaining tail
  bool tail_bound_valid = false;  // tail_bound only available for k = 1
  bool converged = false;
  long evals = 0;  // innermost integrand evaluations
};

// int_{[-B,B]^k} |I(beta)|^{2s} e(-beta . n) d beta, where I is the unit
// oscillatory integral of expsums.  k = 1 uses the closed form
// |I(beta)|^2 = (sin(pi beta) / (pi beta))^2 with adaptive quadrature; for
// k = 1 and n = 0 the analytic tail term 2 c_s / ((2s-1) pi^{2s} B^{2s-1})
// is added, after which the remaining tail is provably at most
// 2 / (pi B)^{2s}.  k >= 2 integrates beta analytically against the expansion
// of |I|^{2s} over [0,1]^{2s}, leaving a product of sin(2 pi B x)/(pi x)
// kernels that is estimated by fixed-seed stratified Monte Carlo (unbiased;
// quad_err is the standard error; refuses when meeting tol would need more
// samples than max_evals).
IntegralResult singular_integral_truncated(int s, const std::vector<double>& n,
                                           double B, double tol,
                                           long max_evals, int threads = 1);

struct Prediction {
  SeriesResult series;
  IntegralResult integral;
  double scale = 0;  // X^{2s - k(k+1)/2}
  double value = 0;  // series.value * integral.value * scale
};

// Product prediction for the count at height X with shifts h: the singular
// series truncated at q_max, the singular integral truncated at B with
// n_j = h_j X^{-j}, and the power scale.  Throws tolerance_error when either
// factor comes out non-positive (no meaningful prediction).
Prediction asymptotic_prediction(int s, int k, const HTuple& h, long X,
                                 long q_max, double B, double tol,
                                 long max_evals, const Budget& budget,
                                 int threads);

}  // namespace vinsys::circle
