#pragma once

// Exponential sums and oscillatory integrals.
//
//   f(alpha; X)  = sum_{x<=X} e(alpha_1 x + ... + alpha_k x^k)
//   g(alpha; X)  = sum_{y<=X} e(alpha_1 nu_1(y;h) + ... + alpha_k nu_k(y;h))
//   K(gamma; X)  = sum_{z<=X} e(-gamma z)
//   S(q, a)      = sum_{r=1}^{q} e((a_1 r + ... + a_k r^k)/q)
//   I(beta)      = int_0^1 e(beta_1 t + ... + beta_k t^k) dt
//
// Phase arguments are reduced exactly: alpha * p mod 1 is computed from the
// dyadic representation of the double alpha and the integer p, so the only
// rounding is the final conversion of the reduced fraction to double. All
// sums use compensated accumulation and fixed work groups, making results
// bit-identical for any thread count.

#include <complex>
#include <functional>
#include <vector>

#include "vinsys/core.hpp"

namespace vinsys::expsums {

using Cplx = std::complex<double>;

// Compensated (Neumaier) summation.
struct Neumaier {
  double s = 0, c = 0;
  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double get() const { return s + c; }
};

struct NeumaierC {
  Neumaier re, im;
  void add(const Cplx& z) {
    re.add(z.real());
    im.add(z.imag());
  }
  Cplx get() const { return {re.get(), im.get()}; }
};

// frac(alpha * p) in [0, 1): exact dyadic reduction, one rounding at the end.
double frac_mul(double alpha, const Int& p);
double frac_mul(double alpha, long p);
// (alpha * p) mod 2 in [0, 2), for arguments of sin(pi t).
double frac_mul_mod2(double alpha, const Int& p);

// e(t) = exp(2 pi i t)
Cplx unit_phase(double t);

Cplx weyl_sum_f(const std::vector<double>& alpha, long X, int threads);
Cplx shifted_sum_g(const std::vector<double>& alpha, long X, const HTuple& h,
                   int threads);

// Closed form e(-gamma (X+1)/2) sin(pi gamma X)/sin(pi gamma), with a direct
// summation fallback when gamma is too close to an integer for the quotient.
Cplx kernel_K(double gamma, long X);
Cplx kernel_K_direct(double gamma, long X);
// Proven envelope min(X, 1/(2 ||gamma||)); ||.|| is distance to the nearest
// integer. Infinite (returns X) at integer gamma.
double kernel_bound(double gamma, long X);

Cplx complete_sum_S(long q, const std::vector<long>& a);

struct QuadResult {
  Cplx value{0, 0};
  double abs_err = 0;   // accumulated error estimate
  bool converged = false;
  long evals = 0;       // integrand evaluations
};

// Adaptive Gauss-Kronrod 7/15 over [a,b]; deterministic splitting order.
// Segments are accepted when their error estimate is within their
// length-proportional share of tol.
QuadResult adaptive_complex(const std::function<Cplx(double)>& f, double a,
                            double b, double tol, long max_evals,
                            int initial_panels);

// int_a^b e(beta_1 t + ... + beta_k t^k) dt; the initial panel count keeps
// the phase variation per panel near one radian.
QuadResult oscillatory_on(const std::vector<double>& beta, double a, double b,
                          double tol, long max_evals);
QuadResult oscillatory_I(const std::vector<double>& beta, double tol,
                         long max_evals);

// X * I(beta_1 X, beta_2 X^2, ..., beta_k X^k): the rescaled unit-interval
// profile that approximates f near rational points.
QuadResult scaled_I(const std::vector<double>& beta, long X, double tol,
                    long max_evals);

}  // namespace vinsys::expsums
