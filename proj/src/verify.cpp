#include "vinsys/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "vinsys/circle.hpp"
#include "vinsys/counting.hpp"
#include "vinsys/expsums.hpp"
#include "vinsys/exponents.hpp"
#include "vinsys/rng.hpp"
#include "vinsys/shiftpoly.hpp"

namespace vinsys::verify {

namespace {

long rand_in(SplitMix64& rng, long lo, long hi) {  // inclusive ends
  return lo + static_cast<long>(rng.next() % static_cast<std::uint64_t>(
                                    hi - lo + 1));
}

// Translating all 2s variables by b turns shift h_j into nu_j(b;h); the two
// system checks must answer identically, and on constructively satisfied
// instances both must answer yes.
SuiteReport suite_shift_identity(long trials, std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "shift-identity";
  SplitMix64 rng(seed, 1);
  long constructive_hits = 0;
  for (long t = 0; t < trials; ++t) {
    const int k = static_cast<int>(rand_in(rng, 2, 4));
    const int s = static_cast<int>(rand_in(rng, 1, 3));
    const bool constructive = (t % 2 == 0);
    std::vector<Int> x2s(2 * s);
    for (auto& v : x2s) v = rand_in(rng, -8, 8);
    std::vector<long> hv(k);
    if (constructive) {
      // Choose the shifts the tuple actually produces for j <= k-1; the
      // degree-k component is irrelevant to the identity and stays random.
      for (int j = 1; j < k; ++j) {
        Int acc = 0;
        for (int i = 0; i < s; ++i) {
          Int xj, yj;
          mpz_pow_ui(xj.get_mpz_t(), x2s[i].get_mpz_t(), j);
          mpz_pow_ui(yj.get_mpz_t(), x2s[s + i].get_mpz_t(), j);
          acc += xj - yj;
        }
        hv[j - 1] = acc.get_si();
      }
      hv[k - 1] = rand_in(rng, -5, 5);
    } else {
      for (auto& v : hv) v = rand_in(rng, -6, 6);
    }
    const HTuple h = HTuple::of(hv);
    const Int b = rand_in(rng, -5, 5);
    auto check = shiftpoly::verify_shift_identity(x2s, b, h);
    ++rep.trials;
    if (check.shifted_system != check.nu_relation) ++rep.failures;
    if (constructive) {
      ++constructive_hits;
      if (!check.shifted_system || !check.nu_relation) ++rep.failures;
    }
  }
  std::ostringstream d;
  d << constructive_hits << " constructive instances, "
    << (rep.trials - constructive_hits) << " random instances";
  rep.detail = d.str();
  return rep;
}

// sigma_n from Newton's identities, from the partition/multinomial formula,
// and from direct expansion of prod(1 + t z_i) must agree exactly.
SuiteReport suite_newton_multinomial(long trials, std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "newton-multinomial";
  SplitMix64 rng(seed, 2);
  for (long t = 0; t < trials; ++t) {
    const int n = static_cast<int>(rand_in(rng, 1, 6));
    const int m = static_cast<int>(rand_in(rng, n, n + 2));
    std::vector<Int> roots(m);
    for (auto& z : roots) z = rand_in(rng, -9, 9);

    std::vector<Rat> power(n);
    for (int j = 1; j <= n; ++j) {
      Int acc = 0;
      for (const auto& z : roots) {
        Int zj;
        mpz_pow_ui(zj.get_mpz_t(), z.get_mpz_t(), j);
        acc += zj;
      }
      power[j - 1] = Rat(acc);
    }

    // Direct elementary symmetric function: expand prod(1 + t z_i) and take
    // the coefficient of t^n.
    std::vector<Int> coeff(m + 1, 0);
    coeff[0] = 1;
    for (int i = 0; i < m; ++i)
      for (int d = i + 1; d >= 1; --d) coeff[d] += roots[i] * coeff[d - 1];
    const Rat direct = Rat(coeff[n]);

    const Rat newton = shiftpoly::elementary_from_power(power, n);
    const Rat multinomial =
        shiftpoly::elementary_from_power_multinomial(power, n);
    ++rep.trials;
    if (newton != direct || multinomial != direct) ++rep.failures;
  }
  rep.detail = "three-way sigma_n agreement, n <= 6, integer roots in [-9,9]";
  return rep;
}

// prod(z - x_i) - prod(z - y_i) evaluated termwise must match the
// sigma-difference expansion and the explicit coefficient vector.
SuiteReport suite_poly_difference(long trials, std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "poly-difference";
  SplitMix64 rng(seed, 3);
  for (long t = 0; t < trials; ++t) {
    const int k = static_cast<int>(rand_in(rng, 1, 5));
    std::vector<Int> x(k), y(k);
    for (auto& v : x) v = rand_in(rng, -9, 9);
    for (auto& v : y) v = rand_in(rng, -9, 9);
    Rat z(rand_in(rng, -30, 30), rand_in(rng, 1, 7));
    z.canonicalize();

    auto dual = shiftpoly::poly_difference_eval(x, y, z);
    auto coeffs = shiftpoly::poly_difference_coeffs(x, y);
    Rat horner = 0;
    for (int d = static_cast<int>(coeffs.size()) - 1; d >= 0; --d)
      horner = horner * z + Rat(coeffs[d]);

    ++rep.trials;
    if (dual.direct != dual.via_sigma || horner != dual.direct)
      ++rep.failures;
  }
  rep.detail = "dual evaluation and Horner re-expansion, k <= 5";
  return rep;
}

// Solutions of the k=3 system with shift (0,0,36): power sums of degree 1,2
// agree, so sigma_1, sigma_2 agree and 3(sigma_3(x) - sigma_3(y)) = h_3;
// the polynomial difference has degree <= k - l = 0.
SuiteReport suite_sigma_solutions(const Budget& budget) {
  SuiteReport rep;
  rep.suite = "sigma-solutions";
  counting::SystemParams p;
  p.s = 3;
  p.k = 3;
  p.X = 7;
  p.h = HTuple::of({0, 0, 36});
  long found = 0;
  counting::for_each_solution(
      p, budget,
      [&](const std::vector<long>& xs, const std::vector<long>& ys) {
        std::vector<Int> x(xs.begin(), xs.end()), y(ys.begin(), ys.end());
        ++found;
        ++rep.trials;
        bool ok = shiftpoly::check_sigma_equalities(x, y, 3);
        std::vector<Rat> px(3), py(3);
        for (int j = 1; j <= 3; ++j) {
          Int ax = 0, ay = 0;
          for (int i = 0; i < 3; ++i) {
            Int t1, t2;
            mpz_pow_ui(t1.get_mpz_t(), x[i].get_mpz_t(), j);
            mpz_pow_ui(t2.get_mpz_t(), y[i].get_mpz_t(), j);
            ax += t1;
            ay += t2;
          }
          px[j - 1] = Rat(ax);
          py[j - 1] = Rat(ay);
        }
        const Rat s3x = shiftpoly::elementary_from_power(px, 3);
        const Rat s3y = shiftpoly::elementary_from_power(py, 3);
        if (Rat(3) * (s3x - s3y) != Rat(36)) ok = false;
        if (!shiftpoly::single_h_degree_bound(x, y, 3)) ok = false;
        if (!ok) ++rep.failures;
      });
  std::ostringstream d;
  d << found << " solutions of the (0,0,36) system at X = 7";
  rep.detail = d.str();
  if (found == 0) ++rep.failures;  // the panel must be non-empty
  return rep;
}

// The four dissection classes, rebuilt from the raw membership predicates,
// must partition the torus and match the classifier.
SuiteReport suite_dissection_partition(long trials, std::uint64_t seed,
                                       int threads) {
  (void)threads;
  SuiteReport rep;
  rep.suite = "dissection-partition";
  const int k = 3;
  for (long X : {1000L, 1000000L}) {
    auto cfg = circle::DissectionConfig::make(k, X);
    SplitMix64 rng(seed, 4 + static_cast<std::uint64_t>(X));
    for (long t = 0; t < trials / 2; ++t) {
      std::vector<double> alpha(k);
      if (t % 4 == 3) {
        // Adversarial: a rational point a/q with small q, nudged.
        const long q = rand_in(rng, 1, 6);
        for (auto& a : alpha) {
          a = static_cast<double>(rand_in(rng, 0, q - 1)) / q +
              1e-9 * static_cast<double>(rand_in(rng, -5, 5));
          a -= std::floor(a);
        }
      } else {
        for (auto& a : alpha) a = rng.uniform();
      }

      const bool core = circle::arc_box_k_root(alpha, cfg.core_m, X).in;
      const bool major1d =
          circle::major_arc_1d_root(alpha[k - 1], cfg.major_m, k, X).in;
      const bool neigh = circle::arc_box_k_root(alpha, cfg.annulus_m, X).in;
      const int expect = core ? 4 : (!major1d ? 1 : (!neigh ? 2 : 3));
      const int got = circle::dissection_classify(alpha, cfg);

      ++rep.trials;
      if (got != expect) ++rep.failures;
      if (core && !neigh) ++rep.failures;  // K(L) must sit inside K(Q^2)
      // Exactly one synthesized class holds by construction; re-derive and
      // confirm to guard the predicate plumbing itself.
      const bool c1 = !core && !major1d;
      const bool c2 = !core && major1d && !neigh;
      const bool c3 = !core && major1d && neigh;
      if ((core ? 1 : 0) + (c1 ? 1 : 0) + (c2 ? 1 : 0) + (c3 ? 1 : 0) != 1)
        ++rep.failures;
    }
  }
  rep.detail = "classifier vs raw membership at X in {1e3, 1e6}, k = 3";
  return rep;
}

// Closed-form geometric kernel sum against direct summation, plus the
// min(X, 1/(2||gamma||)) envelope.
SuiteReport suite_kernel_dual(long trials, std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "kernel-dual";
  SplitMix64 rng(seed, 5);
  for (long t = 0; t < trials; ++t) {
    const long X = rand_in(rng, 1, 2000);
    double gamma;
    if (t % 3 == 0) {
      gamma = static_cast<double>(rand_in(rng, 0, 6)) / 7.0 +
              1e-7 * static_cast<double>(rand_in(rng, -3, 3));
      gamma -= std::floor(gamma);
    } else {
      gamma = rng.uniform();
    }
    const auto closed = expsums::kernel_K(gamma, X);
    const auto direct = expsums::kernel_K_direct(gamma, X);
    ++rep.trials;
    // The sine-ratio form loses about eps/||gamma|| near the pole; the
    // adversarial generator keeps offsets >= 1e-7, so 1e-8 relative is the
    // honest double-precision agreement there (1e-10 holds away from it).
    if (std::abs(closed - direct) > 1e-8 * std::max(1.0, std::abs(direct)))
      ++rep.failures;
    if (std::abs(closed) >
        expsums::kernel_bound(gamma, X) * (1 + 1e-9) + 1e-9)
      ++rep.failures;
  }
  rep.detail = "closed vs direct sums and the sup-norm envelope";
  return rep;
}

// Restricted moments vs the conjectured bound C X^eps (X^s mes + X^{2s-...}).
// Recorded only: a conjecture plus Monte Carlo noise is not a failure
// criterion, so failures stay 0 and exceedances go into the detail line.
SuiteReport suite_conjecture_scan(long trials, std::uint64_t seed,
                                  const Budget& budget, int threads) {
  (void)budget;
  SuiteReport rep;
  rep.suite = "conjecture-scan";
  SplitMix64 rng(seed, 6);
  const double eps = 0.25, C = 4.0;
  long exceed = 0;
  const long combos = std::max(1L, std::min(trials, 12L));
  for (long t = 0; t < combos; ++t) {
    const int k = static_cast<int>(rand_in(rng, 1, 2));
    const int s = static_cast<int>(rand_in(rng, 1, 2));
    const long X = rand_in(rng, 3, 9);
    circle::MomentSpec spec;
    spec.u = s;
    spec.k = k;
    spec.f_hi = X;
    spec.h = HTuple::zeros(k);
    spec.twist = false;
    circle::Region region;
    region.kind = circle::Region::Kind::Box;
    double measure = 1;
    for (int j = 0; j < k; ++j) {
      double lo = 0.6 * rng.uniform();
      double len = 0.1 + 0.3 * rng.uniform();
      region.box.emplace_back(lo, lo + len);
      measure *= len;
    }
    circle::SamplerConfig sampler;
    sampler.samples = 4000;
    sampler.seed = seed ^ (0xabcdULL + static_cast<std::uint64_t>(t));
    sampler.strata = 16;
    auto est = circle::restricted_moment_estimate(spec, region, nullptr,
                                                  sampler, threads);
    const double bound = exponents::conjectured_restricted_bound(
        s, k, measure, static_cast<double>(X), eps, C);
    ++rep.trials;
    if (est.value.real() - 3 * est.std_error > bound) ++exceed;
  }
  std::ostringstream d;
  d << exceed << " of " << rep.trials
    << " desk-scale estimates exceeded the conjectured bound (eps = " << eps
    << ", C = " << C << "); recorded only, never a failure";
  rep.detail = d.str();
  rep.failures = 0;
  return rep;
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"shift-identity",       "newton-multinomial", "poly-difference",
          "sigma-solutions",      "dissection-partition", "kernel-dual",
          "conjecture-scan"};
}

SuiteReport run_suite(const std::string& name, long trials,
                      std::uint64_t seed, const Budget& budget, int threads) {
  if (trials < 1) throw invalid_error("run_suite: need trials >= 1");
  if (name == "shift-identity") return suite_shift_identity(trials, seed);
  if (name == "newton-multinomial")
    return suite_newton_multinomial(trials, seed);
  if (name == "poly-difference") return suite_poly_difference(trials, seed);
  if (name == "sigma-solutions") return suite_sigma_solutions(budget);
  if (name == "dissection-partition")
    return suite_dissection_partition(trials, seed, threads);
  if (name == "kernel-dual") return suite_kernel_dual(trials, seed);
  if (name == "conjecture-scan")
    return suite_conjecture_scan(trials, seed, budget, threads);
  throw invalid_error("run_suite: unknown suite '" + name + "'");
}

std::vector<SuiteReport> run_all_suites(long trials, std::uint64_t seed,
                                        const Budget& budget, int threads) {
  std::vector<SuiteReport> out;
  for (const auto& name : suite_names())
    out.push_back(run_suite(name, trials, seed, budget, threads));
  return out;
}

}  // namespace vinsys::verify
