#include "vinsys/expsums.hpp"

#include <cmath>
#include <vector>

#include "vinsys/shiftpoly.hpp"

namespace vinsys::expsums {

namespace {

using i128 = __int128;

constexpr double kTwoPi = 6.283185307179586476925286766559;

double i128_to_double(i128 v) {
  // v >= 0; at most two roundings
  auto hi = static_cast<std::uint64_t>(v >> 64);
  auto lo = static_cast<std::uint64_t>(v);
  return std::ldexp(static_cast<double>(hi), 64) + static_cast<double>(lo);
}

// (alpha * p) mod m for m = 1 or 2, in [0, m). Writing alpha = M * 2^(-S)
// with integer M (53 bits) makes alpha*p = M*p * 2^(-S); reducing M*p modulo
// 2^(S + log2 m) is exact, and only the final division rounds.
double frac_reduce(double alpha, const Int& p, int extra) {
  if (!std::isfinite(alpha)) throw invalid_error("phase factor must be finite");
  if (alpha == 0 || p == 0) return 0;
  int exp;
  double mant = std::frexp(alpha, &exp);
  long M = static_cast<long>(std::ldexp(mant, 53));  // exact: 53-bit integer
  long S = 53 - exp;
  long R = S + extra;  // reduce M*p mod 2^R
  const double mod = extra ? 2.0 : 1.0;
  if (R <= 0) return 0;  // alpha*p is an integer multiple of the modulus

  if (mpz_fits_slong_p(p.get_mpz_t())) {
    long pl = mpz_get_si(p.get_mpz_t());
    if (pl > -(1L << 62) && pl < (1L << 62)) {
      i128 mp = static_cast<i128>(M) * static_cast<i128>(pl);  // |mp| < 2^116
      if (R <= 116) {
        i128 mask = (static_cast<i128>(1) << R) - 1;
        i128 t = mp & mask;  // two's complement AND == floor mod 2^R
        return std::ldexp(i128_to_double(t), static_cast<int>(extra - R));
      }
      // |mp| * 2^-S already below the modulus; wrap the sign only
      double r = std::ldexp(i128_to_double(mp < 0 ? -mp : mp),
                            static_cast<int>(extra - R));
      if (mp < 0 && r != 0) r = mod - r;
      return r < mod ? r : 0;
    }
  }

  Int mp = Int(M) * p;
  Int t;
  mpz_fdiv_r_2exp(t.get_mpz_t(), mp.get_mpz_t(), static_cast<mp_bitcnt_t>(R));
  if (t == 0) return 0;
  long e2;
  double d = mpz_get_d_2exp(&e2, t.get_mpz_t());  // t = d * 2^e2, d in [0.5,1)
  double r = std::ldexp(d, static_cast<int>(e2 - R + extra));
  return r < mod ? r : 0;  // t/2^R < mod; r == mod only by rounding up
}

}  // namespace

double frac_mul(double alpha, const Int& p) { return frac_reduce(alpha, p, 0); }
double frac_mul(double alpha, long p) { return frac_reduce(alpha, Int(p), 0); }
double frac_mul_mod2(double alpha, const Int& p) {
  return frac_reduce(alpha, p, 1);
}

Cplx unit_phase(double t) {
  double a = kTwoPi * t;
  return {std::cos(a), std::sin(a)};
}

Cplx weyl_sum_f(const std::vector<double>& alpha, long X, int threads) {
  int k = static_cast<int>(alpha.size());
  if (k < 1) throw invalid_error("weyl_sum_f: need k >= 1");
  if (X < 1) throw invalid_error("weyl_sum_f: need X >= 1");

  std::uint64_t groups = std::min<std::uint64_t>(static_cast<std::uint64_t>(X), 256);
  std::vector<Cplx> partial = parallel_groups<Cplx>(
      groups, threads, [&](std::uint64_t g) -> Cplx {
        long lo = 1 + static_cast<long>(static_cast<std::uint64_t>(X) * g / groups);
        long hi = static_cast<long>(static_cast<std::uint64_t>(X) * (g + 1) / groups);
        NeumaierC acc;
        Int p;
        for (long x = lo; x <= hi; ++x) {
          double t = 0;
          p = 1;
          for (int j = 0; j < k; ++j) {
            p *= x;
            if (alpha[static_cast<std::size_t>(j)] != 0) {
              t += frac_mul(alpha[static_cast<std::size_t>(j)], p);
              if (t >= 1) t -= 1;
            }
          }
          acc.add(unit_phase(t));
        }
        return acc.get();
      });
  NeumaierC total;
  for (const Cplx& z : partial) total.add(z);
  return total.get();
}

Cplx shifted_sum_g(const std::vector<double>& alpha, long X, const HTuple& h,
                   int threads) {
  int k = static_cast<int>(alpha.size());
  if (k < 1 || h.k() != k)
    throw invalid_error("shifted_sum_g: need k >= 1 and |h| == k");
  if (X < 1) throw invalid_error("shifted_sum_g: need X >= 1");

  std::vector<std::vector<Int>> coeffs;
  coeffs.reserve(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j) coeffs.push_back(shiftpoly::nu_coeffs(j, h));

  std::uint64_t groups = std::min<std::uint64_t>(static_cast<std::uint64_t>(X), 256);
  std::vector<Cplx> partial = parallel_groups<Cplx>(
      groups, threads, [&](std::uint64_t g) -> Cplx {
        long lo = 1 + static_cast<long>(static_cast<std::uint64_t>(X) * g / groups);
        long hi = static_cast<long>(static_cast<std::uint64_t>(X) * (g + 1) / groups);
        NeumaierC acc;
        Int nu;
        for (long y = lo; y <= hi; ++y) {
          double t = 0;
          for (int j = 0; j < k; ++j) {
            if (alpha[static_cast<std::size_t>(j)] == 0) continue;
            const std::vector<Int>& c = coeffs[static_cast<std::size_t>(j)];
            nu = 0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) nu = nu * y + *it;
            t += frac_mul(alpha[static_cast<std::size_t>(j)], nu);
            if (t >= 1) t -= 1;
          }
          acc.add(unit_phase(t));
        }
        return acc.get();
      });
  NeumaierC total;
  for (const Cplx& z : partial) total.add(z);
  return total.get();
}

double kernel_bound(double gamma, long X) {
  double d = std::abs(gamma - std::nearbyint(gamma));
  if (d == 0) return static_cast<double>(X);
  return std::min(static_cast<double>(X), 1.0 / (2.0 * d));
}

Cplx kernel_K_direct(double gamma, long X) {
  if (X < 1) throw invalid_error("kernel: need X >= 1");
  NeumaierC acc;
  for (long z = 1; z <= X; ++z) acc.add(unit_phase(frac_mul(-gamma, z)));
  return acc.get();
}

Cplx kernel_K(double gamma, long X) {
  if (X < 1) throw invalid_error("kernel: need X >= 1");
  double theta = -gamma;
  double dist = std::abs(theta - std::nearbyint(theta));
  // sin(pi theta) loses all precision near integers; the sum is ~X there
  if (dist * static_cast<double>(X) < 1e-6) return kernel_K_direct(gamma, X);

  double s_num = std::sin((kTwoPi / 2) * frac_mul_mod2(theta, Int(X)));
  double s_den = std::sin((kTwoPi / 2) * frac_mul_mod2(theta, Int(1)));
  Cplx ph = unit_phase(frac_mul_mod2(theta, Int(X + 1)) / 2);
  return ph * (s_num / s_den);
}

Cplx complete_sum_S(long q, const std::vector<long>& a) {
  if (q < 1 || q > 2'000'000'000)
    throw invalid_error("complete_sum_S: need 1 <= q <= 2e9");
  int k = static_cast<int>(a.size());
  if (k < 1) throw invalid_error("complete_sum_S: need k >= 1");

  std::vector<long> am(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) am[j] = ((a[j] % q) + q) % q;

  NeumaierC acc;
  for (long r = 1; r <= q; ++r) {
    long v = 0;  // Horner: (((a_k r + a_{k-1}) r + ...) r + a_1) r
    for (int j = k; j >= 1; --j)
      v = (v * r + am[static_cast<std::size_t>(j) - 1]) % q;
    v = (v * r) % q;
    acc.add(unit_phase(static_cast<double>(v) / static_cast<double>(q)));
  }
  return acc.get();
}

namespace {

// Gauss-Kronrod 7/15 constants (positive abscissae; node 7 is the center).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEval {
  Cplx value;
  double err;
};

PanelEval gk15(const std::function<Cplx(double)>& f, double a, double b) {
  double c = 0.5 * (a + b), hl = 0.5 * (b - a);
  Cplx fc = f(c);
  Cplx resg = fc * kWg[3];
  Cplx resk = fc * kWgk[7];
  for (int j = 0; j < 3; ++j) {
    int jtw = 2 * j + 1;  // xgk indices 1,3,5: shared Gauss/Kronrod nodes
    double absc = hl * kXgk[jtw];
    Cplx pair = f(c - absc) + f(c + absc);
    resg += kWg[j] * pair;
    resk += kWgk[jtw] * pair;
  }
  for (int j = 0; j < 4; ++j) {
    int jtwm1 = 2 * j;  // xgk indices 0,2,4,6: Kronrod-only nodes
    double absc = hl * kXgk[jtwm1];
    Cplx pair = f(c - absc) + f(c + absc);
    resk += kWgk[jtwm1] * pair;
  }
  return {resk * hl, std::abs((resk - resg) * hl)};
}

}  // namespace

QuadResult adaptive_complex(const std::function<Cplx(double)>& f, double a,
                            double b, double tol, long max_evals,
                            int initial_panels) {
  QuadResult out;
  if (!(a < b)) {
    out.converged = true;
    return out;
  }
  if (tol <= 0) throw invalid_error("adaptive_complex: tol must be positive");
  int n0 = std::max(1, initial_panels);

  struct Seg {
    double a, b;
  };
  std::vector<Seg> stack;
  stack.reserve(static_cast<std::size_t>(n0) + 64);
  // push right-to-left so the leftmost panel is processed first
  for (int i = n0; i-- > 0;) {
    double sa = a + (b - a) * i / n0;
    double sb = a + (b - a) * (i + 1) / n0;
    stack.push_back({sa, sb});
  }

  NeumaierC total;
  Neumaier err_acc;
  const double span = b - a;
  const double min_width = span * 1e-14;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    PanelEval e = gk15(f, s.a, s.b);
    out.evals += 15;
    double share = tol * (s.b - s.a) / span;
    // committed cost = evaluations done + 15 per pending panel; splitting
    // adds 30, so gating on it keeps the final total within max_evals
    long committed = out.evals + 15 * static_cast<long>(stack.size());
    bool can_split = (s.b - s.a) > min_width && committed + 30 <= max_evals;
    if (e.err > share && can_split) {
      double m = 0.5 * (s.a + s.b);
      stack.push_back({m, s.b});
      stack.push_back({s.a, m});
      continue;
    }
    total.add(e.value);
    err_acc.add(e.err);
  }
  out.value = total.get();
  out.abs_err = err_acc.get();
  out.converged = out.abs_err <= tol;
  return out;
}

namespace {

Cplx phase_poly(const std::vector<double>& beta, double t) {
  double v = 0;  // Horner, then one wrap into [0,1) for the phase
  for (auto it = beta.rbegin(); it != beta.rend(); ++it) v = v * t + *it;
  v *= t;
  return unit_phase(v - std::floor(v));
}

}  // namespace

QuadResult oscillatory_on(const std::vector<double>& beta, double a, double b,
                          double tol, long max_evals) {
  if (beta.empty()) throw invalid_error("oscillatory integral: need k >= 1");
  double g = std::max(std::abs(a), std::abs(b));
  double deriv = 0;  // max |phi'| with phi = 2 pi sum beta_j t^j
  double gp = 1;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    deriv += static_cast<double>(j + 1) * std::abs(beta[j]) * gp;
    gp *= g;
  }
  double radians = kTwoPi * deriv * (b - a);
  int panels = 1;
  if (radians > 1 && radians < 2e5) panels = static_cast<int>(radians) + 1;
  else if (radians >= 2e5) panels = 200000;
  return adaptive_complex([&](double t) { return phase_poly(beta, t); }, a, b,
                          tol, max_evals, panels);
}

QuadResult oscillatory_I(const std::vector<double>& beta, double tol,
                         long max_evals) {
  return oscillatory_on(beta, 0.0, 1.0, tol, max_evals);
}

QuadResult scaled_I(const std::vector<double>& beta, long X, double tol,
                    long max_evals) {
  if (X < 1) throw invalid_error("scaled_I: need X >= 1");
  std::vector<double> scaled(beta.size());
  double p = 1;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    p *= static_cast<double>(X);
    scaled[j] = beta[j] * p;
  }
  QuadResult r = oscillatory_I(scaled, tol, max_evals);
  r.value *= static_cast<double>(X);
  r.abs_err *= static_cast<double>(X);
  return r;
}

}  // namespace vinsys::expsums
