#include "vinsys/circle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <utility>

#include "vinsys/rng.hpp"
#include "vinsys/shiftpoly.hpp"

namespace vinsys::circle {

namespace {

using expsums::NeumaierC;
using expsums::Neumaier;

constexpr double kPi = 3.14159265358979323846;

// Exact scans walk q = 1, 2, ... one multiprecision step at a time; cap the
// walk so a huge threshold is refused instead of running for hours.
constexpr long kMaxDenominatorScan = 10'000'000;

double powi(double x, int e) {
  double out = 1;
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

Rat rat_of(double x, const char* what) {
  if (!std::isfinite(x))
    throw invalid_error(std::string(what) + " must be finite");
  return Rat(x);  // exact: every finite double is a dyadic rational
}

// r^m for r >= 0.  num/den are coprime, so their powers are too: the result
// is already canonical.
Rat rat_pow(const Rat& r, long m) {
  Rat out;
  mpz_pow_ui(out.get_num_mpz_t(), r.get_num_mpz_t(),
             static_cast<unsigned long>(m));
  mpz_pow_ui(out.get_den_mpz_t(), r.get_den_mpz_t(),
             static_cast<unsigned long>(m));
  return out;
}

// A <= B * X^{1/m} for A, B >= 0, exactly: equivalent to A^m <= B^m * X.
bool leq_times_root(const Rat& A, const Rat& B, long X, long m) {
  return rat_pow(A, m) <= rat_pow(B, m) * X;
}

// floor(r + 1/2): the nearest integer, ties rounded up.
Int nearest_int(const Rat& r) {
  Rat t = r + Rat(1, 2);
  Int out;
  mpz_fdiv_q(out.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
  return out;
}

long to_long_checked(const Int& v, const char* what) {
  if (!v.fits_slong_p())
    throw invalid_error(std::string(what) + " does not fit a machine integer");
  return v.get_si();
}

long root_floor(long X, long m) {  // floor(X^{1/m})
  Int r;
  Int x(X);
  mpz_root(r.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(m));
  return r.get_si();
}

void validate_arc_common(int k, long X, long m_or_zero) {
  if (k < 1 || k > 64) throw invalid_error("degree k out of range");
  if (X < 1) throw invalid_error("X must be at least 1");
  if (m_or_zero < 0 || m_or_zero > 8192)
    throw invalid_error("root exponent out of range");
}

long scan_limit(const Int& qmax) {
  if (qmax <= 0) return 0;
  if (qmax > kMaxDenominatorScan)
    throw invalid_error("arc threshold too large for an exact scan");
  return qmax.get_si();
}

Int floor_rat(const Rat& r) {
  Int out;
  mpz_fdiv_q(out.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return out;
}

// Shared 1-d scan.  `accept(diff, q)` decides |q alpha - a| <= Q X^{-k},
// given diff = |q alpha - a| * X^k exactly.
Arc1DResult scan_major_1d(double alpha, long qmax, int k, long X,
                          const std::function<bool(const Rat&, long)>& accept) {
  Arc1DResult out;
  Rat ar = rat_of(alpha, "alpha");
  Int Xk;
  {
    Int x(X);
    mpz_pow_ui(Xk.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(k));
  }
  for (long q = 1; q <= qmax; ++q) {
    Rat qa = ar * q;
    Int a = nearest_int(qa);
    Rat diff = abs(qa - Rat(a));
    if (accept(Rat(diff * Xk), q)) {
      // At the smallest admissible q the witness is automatically reduced:
      // a shared factor g would make (q/g, a/g) admissible earlier.
      Int g;
      Int qi(q);
      mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), qi.get_mpz_t());
      if (g == 1) {
        out.in = true;
        out.q = q;
        out.a = to_long_checked(a, "arc witness");
        return out;
      }
    }
  }
  return out;
}

// Shared k-d scan.  `accept(diff_xj, q)` decides |q alpha_j - a_j| <= q Z
// X^{-j}, given diff_xj = |q alpha_j - a_j| * X^j exactly.
ArcKResult scan_arc_box(const std::vector<double>& alpha, long qmax, long X,
                        const std::function<bool(const Rat&, long)>& accept) {
  ArcKResult out;
  const int k = static_cast<int>(alpha.size());
  std::vector<Rat> ar;
  ar.reserve(alpha.size());
  for (double c : alpha) ar.push_back(rat_of(c, "alpha component"));
  std::vector<Int> Xj(k);
  {
    Int acc = 1;
    for (int j = 0; j < k; ++j) {
      acc *= X;
      Xj[j] = acc;
    }
  }
  std::vector<Int> wit(k);
  for (long q = 1; q <= qmax; ++q) {
    bool ok = true;
    Int g(q);
    for (int j = 0; j < k && ok; ++j) {
      Rat qa = ar[j] * q;
      Int a = nearest_int(qa);
      Rat diff = abs(qa - Rat(a));
      if (!accept(Rat(diff * Xj[j]), q)) {
        ok = false;
        break;
      }
      wit[j] = a;
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), a.get_mpz_t());
    }
    // As in the 1-d scan, the first q passing every coordinate test has
    // joint gcd 1; a shared factor would yield an earlier witness.
    if (ok && g == 1) {
      out.in = true;
      out.q = q;
      out.a.resize(k);
      for (int j = 0; j < k; ++j)
        out.a[j] = to_long_checked(wit[j], "arc witness");
      return out;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Arc membership
// ---------------------------------------------------------------------------

Arc1DResult major_arc_1d(double alpha, double Q, int k, long X) {
  validate_arc_common(k, X, 0);
  Rat Qr = rat_of(Q, "Q");
  if (Qr < 1) return {};
  long qmax = scan_limit(floor_rat(Qr));
  return scan_major_1d(alpha, qmax, k, X,
                       [&](const Rat& diff_xk, long) { return diff_xk <= Qr; });
}

Arc1DResult major_arc_1d_root(double alpha, long m, int k, long X) {
  validate_arc_common(k, X, m);
  if (m < 1) throw invalid_error("root exponent must be positive");
  long qmax = scan_limit(Int(root_floor(X, m)));
  const Rat one(1);
  return scan_major_1d(alpha, qmax, k, X, [&](const Rat& diff_xk, long) {
    return leq_times_root(diff_xk, one, X, m);
  });
}

ArcKResult arc_box_k(const std::vector<double>& alpha, double Z, long X) {
  validate_arc_common(static_cast<int>(alpha.empty() ? 0 : alpha.size()), X, 0);
  Rat Zr = rat_of(Z, "Z");
  if (Zr < 1) return {};
  long qmax = scan_limit(floor_rat(Zr));
  return scan_arc_box(alpha, qmax, X, [&](const Rat& diff_xj, long q) {
    return diff_xj <= Zr * q;
  });
}

ArcKResult arc_box_k_root(const std::vector<double>& alpha, long m, long X) {
  validate_arc_common(static_cast<int>(alpha.empty() ? 0 : alpha.size()), X, m);
  if (m < 1) throw invalid_error("root exponent must be positive");
  long qmax = scan_limit(Int(root_floor(X, m)));
  return scan_arc_box(alpha, qmax, X, [&](const Rat& diff_xj, long q) {
    return leq_times_root(diff_xj, Rat(q), X, m);
  });
}

// ---------------------------------------------------------------------------
// Dissection
// ---------------------------------------------------------------------------

DissectionConfig DissectionConfig::make(int k, long X) {
  if (k < 2 || k > 16)
    throw invalid_error("dissection requires 2 <= k <= 16");
  if (X < 2) throw invalid_error("dissection requires X >= 2");
  DissectionConfig cfg;
  cfg.k = k;
  cfg.X = X;
  cfg.core_m = 8L * k * k;
  cfg.major_m = 8L * k;
  cfg.annulus_m = 4L * k;  // (X^{1/(8k)})^2 = X^{1/(4k)}
  return cfg;
}

int dissection_classify(const std::vector<double>& alpha,
                        const DissectionConfig& cfg) {
  if (static_cast<int>(alpha.size()) != cfg.k)
    throw invalid_error("alpha dimension does not match the dissection");
  if (arc_box_k_root(alpha, cfg.core_m, cfg.X).in) return 4;
  if (!major_arc_1d_root(alpha.back(), cfg.major_m, cfg.k, cfg.X).in) return 1;
  if (!arc_box_k_root(alpha, cfg.annulus_m, cfg.X).in) return 2;
  return 3;
}

const char* dissection_class_name(int cls) {
  switch (cls) {
    case 1: return "minor";
    case 2: return "major-outside";
    case 3: return "annulus";
    case 4: return "core";
    default: throw invalid_error("dissection class must be 1..4");
  }
}

// ---------------------------------------------------------------------------
// Exact moments on a unitary grid
// ---------------------------------------------------------------------------

namespace {

Int int_pow(long base, int e) {
  Int p;
  Int b(base);
  mpz_pow_ui(p.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(e));
  return p;
}

void validate_moment_shape(int u, int r, int k, long f_hi, long g_hi,
                           const HTuple& h) {
  if (k < 1 || k > 16) throw invalid_error("degree k out of range");
  if (h.k() != k) throw invalid_error("shift tuple dimension mismatch");
  if (u < 0 || r < 0 || u + r < 1)
    throw invalid_error("need at least one |f|^2 or |g|^2 factor");
  if (u > 0 && f_hi < 1) throw invalid_error("f range must be at least 1");
  if (r > 0 && g_hi < 1) throw invalid_error("g range must be at least 1");
}

}  // namespace

DftResult dft_moment(const DftSpec& spec, const Budget& budget, int threads) {
  validate_moment_shape(spec.u, spec.r, spec.k, spec.f_hi, spec.g_hi, spec.h);
  const int k = spec.k;
  const long F = spec.u > 0 ? spec.f_hi : 0;
  const long G = spec.r > 0 ? spec.g_hi : 0;

  // The shift-profile scan below costs G*k big-integer operations; refuse it
  // up front rather than after the fact.
  check_enum_budget(Int(G) * k + Int(F), budget, "grid profile scan");

  // Per-coordinate grid size: one more than the largest possible |value| of
  // the degree-j form, so the orthogonality average is exact.
  std::vector<long> M(k);
  std::vector<std::vector<Int>> nu_values(k);  // per j, nu_j(w; h), w = 1..G
  Int points = 1;
  for (int j = 1; j <= k; ++j) {
    Int bound = 0;
    if (spec.u > 0) bound += Int(spec.u) * (int_pow(F, j) - 1);
    if (spec.r > 0) {
      auto coeffs = shiftpoly::nu_coeffs(j, spec.h);
      auto& vals = nu_values[j - 1];
      vals.reserve(G);
      Int numax, numin;
      for (long w = 1; w <= G; ++w) {
        Int v = 0;
        for (int i = j - 1; i >= 0; --i) v = v * w + coeffs[i];
        if (w == 1 || v > numax) numax = v;
        if (w == 1 || v < numin) numin = v;
        vals.push_back(std::move(v));
      }
      bound += Int(spec.r) * (numax - numin);
    }
    if (spec.twist) bound += abs(spec.h.at(j));
    Int Mj = bound + 1;
    // Grid arithmetic below multiplies two residues < M_j in 64 bits.
    if (Mj > (Int(1) << 31))
      throw budget_error("per-coordinate grid size too large", Mj,
                         Int(1) << 31);
    M[j - 1] = Mj.get_si();
    points *= Mj;
  }
  check_enum_budget(points * (F + G + 1), budget, "grid moment enumeration");
  {
    Int table_entries = Int(F) * k + Int(G) * k;
    for (int j = 0; j < k; ++j) table_entries += M[j];
    check_entry_budget(table_entries, budget, "grid moment tables");
  }

  // Phase tables E[j][t] = e(t / M_j) and residue tables for x^j, nu_j, h_j.
  std::vector<std::vector<Cplx>> E(k);
  for (int j = 0; j < k; ++j) {
    E[j].resize(M[j]);
    for (long t = 0; t < M[j]; ++t)
      E[j][t] = expsums::unit_phase(static_cast<double>(t) / M[j]);
  }
  std::vector<std::vector<std::uint64_t>> TF(k);
  if (spec.u > 0) {
    for (int j = 0; j < k; ++j) {
      TF[j].resize(F);
      const std::uint64_t Mj = M[j];
      for (long x = 1; x <= F; ++x) {
        std::uint64_t p = 1 % Mj;
        for (int e = 0; e < j + 1; ++e)
          p = (p * (static_cast<std::uint64_t>(x) % Mj)) % Mj;
        TF[j][x - 1] = p;
      }
    }
  }
  std::vector<std::vector<std::uint64_t>> TG(k);
  if (spec.r > 0) {
    for (int j = 0; j < k; ++j) {
      TG[j].resize(G);
      for (long w = 1; w <= G; ++w)
        TG[j][w - 1] = mpz_fdiv_ui(nu_values[j][w - 1].get_mpz_t(),
                                   static_cast<unsigned long>(M[j]));
    }
  }
  std::vector<std::uint64_t> TW(k, 0);
  if (spec.twist) {
    for (int j = 0; j < k; ++j) {
      Int neg = -spec.h.at(j + 1);
      TW[j] = mpz_fdiv_ui(neg.get_mpz_t(), static_cast<unsigned long>(M[j]));
    }
  }

  const long M1 = M[0];
  const std::uint64_t n_groups =
      std::min<std::uint64_t>(static_cast<std::uint64_t>(M1), 4096);
  auto partials = parallel_groups<Cplx>(
      n_groups, threads, [&](std::uint64_t gi) -> Cplx {
        const long lo = static_cast<long>(
            (static_cast<unsigned __int128>(M1) * gi) / n_groups);
        const long hi = static_cast<long>(
            (static_cast<unsigned __int128>(M1) * (gi + 1)) / n_groups);
        NeumaierC acc;
        std::vector<std::uint64_t> m(k, 0);
        for (long m1 = lo; m1 < hi; ++m1) {
          m[0] = static_cast<std::uint64_t>(m1);
          // odometer over m[1..k-1]
          for (int j = 1; j < k; ++j) m[j] = 0;
          while (true) {
            Cplx fv(0, 0), gv(0, 0);
            if (spec.u > 0) {
              for (long x = 0; x < F; ++x) {
                Cplx ph = E[0][(m[0] * TF[0][x]) % M[0]];
                for (int j = 1; j < k; ++j)
                  ph *= E[j][(m[j] * TF[j][x]) % M[j]];
                fv += ph;
              }
            }
            if (spec.r > 0) {
              for (long w = 0; w < G; ++w) {
                Cplx ph = E[0][(m[0] * TG[0][w]) % M[0]];
                for (int j = 1; j < k; ++j)
                  ph *= E[j][(m[j] * TG[j][w]) % M[j]];
                gv += ph;
              }
            }
            double amp = 1;
            if (spec.u > 0) amp *= powi(std::norm(fv), spec.u);
            if (spec.r > 0) amp *= powi(std::norm(gv), spec.r);
            Cplx tw = E[0][(m[0] * TW[0]) % M[0]];
            for (int j = 1; j < k; ++j) tw *= E[j][(m[j] * TW[j]) % M[j]];
            acc.add(amp * tw);
            int j = 1;
            while (j < k && ++m[j] == static_cast<std::uint64_t>(M[j])) {
              m[j] = 0;
              ++j;
            }
            if (j >= k) break;
          }
        }
        return acc.get();
      });

  NeumaierC total;
  for (const Cplx& p : partials) total.add(p);
  const double denom = points.get_d();
  const Cplx avg = total.get() / denom;

  DftResult out;
  out.grid_points = points;
  out.grid_sizes = M;
  out.imag_residual = std::abs(avg.imag());
  if (!(std::abs(avg.real()) < 4.4e15))
    throw tolerance_error("grid average too large to round exactly");
  const long long rounded = std::llround(avg.real());
  out.round_residual = std::abs(avg.real() - static_cast<double>(rounded));
  if (out.round_residual > 0.49 || out.imag_residual > 0.49)
    throw tolerance_error("grid average did not round cleanly to a count");
  out.count = Int(static_cast<long>(rounded));
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo restricted moments
// ---------------------------------------------------------------------------

double box_measure(const Region& region, int k) {
  switch (region.kind) {
    case Region::Kind::FullCube:
      return 1.0;
    case Region::Kind::Box: {
      if (static_cast<int>(region.box.size()) != k)
        throw invalid_error("box dimension mismatch");
      double m = 1;
      for (auto& [lo, hi] : region.box) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
          throw invalid_error("box bounds must be finite with hi >= lo");
        m *= hi - lo;
      }
      return m;
    }
    case Region::Kind::DissectionClass:
      throw invalid_error(
          "a dissection class has no closed-form measure; estimate it via "
          "hit_fraction");
  }
  throw invalid_error("unknown region kind");
}

namespace {

struct StratumAcc {
  double re = 0, im = 0, re2 = 0, im2 = 0;
  std::uint64_t hits = 0;
  std::uint64_t n = 0;
};

}  // namespace

MomentEstimate restricted_moment_estimate(const MomentSpec& spec,
                                          const Region& region,
                                          const DissectionConfig* dissection,
                                          const SamplerConfig& sampler,
                                          int threads) {
  validate_moment_shape(spec.u, spec.r, spec.k, spec.f_hi, spec.g_hi, spec.h);
  const int k = spec.k;
  if (sampler.samples < 1) throw invalid_error("need at least one sample");

  const bool indicator = region.kind == Region::Kind::DissectionClass;
  if (indicator) {
    if (dissection == nullptr)
      throw invalid_error("dissection config required for a class region");
    if (dissection->k != k)
      throw invalid_error("dissection degree does not match the moment");
    if (region.cls < 1 || region.cls > 4)
      throw invalid_error("dissection class must be 1..4");
  }
  const double measure = indicator ? 1.0 : box_measure(region, k);

  // Sampling bounds per coordinate (the torus unless an explicit box).
  std::vector<double> lo(k, 0.0), width(k, 1.0);
  if (region.kind == Region::Kind::Box) {
    for (int j = 0; j < k; ++j) {
      lo[j] = region.box[j].first;
      width[j] = region.box[j].second - region.box[j].first;
    }
  }

  const std::uint64_t S = std::max<std::uint64_t>(
      1, std::min<std::uint64_t>(static_cast<std::uint64_t>(
                                     std::max(1, sampler.strata)),
                                 sampler.samples));

  auto point_value = [&](const std::vector<double>& alpha) -> Cplx {
    double amp = 1;
    if (spec.u > 0)
      amp *= powi(std::norm(expsums::weyl_sum_f(alpha, spec.f_hi, 1)), spec.u);
    if (spec.r > 0)
      amp *= powi(
          std::norm(expsums::shifted_sum_g(alpha, spec.g_hi, spec.h, 1)),
          spec.r);
    if (!spec.twist || spec.h.is_zero()) return Cplx(amp, 0);
    double t = 0;
    for (int j = 0; j < k; ++j)
      t += expsums::frac_mul(-alpha[j], spec.h.at(j + 1));
    return amp * expsums::unit_phase(t);
  };

  auto partials = parallel_groups<StratumAcc>(
      S, threads, [&](std::uint64_t t) -> StratumAcc {
        SplitMix64 rng(sampler.seed, t);
        StratumAcc acc;
        acc.n = sampler.samples / S + (t < sampler.samples % S ? 1 : 0);
        const double a1 = lo[0] + width[0] * (static_cast<double>(t) / S);
        const double b1 = lo[0] + width[0] * (static_cast<double>(t + 1) / S);
        Neumaier sre, sim, sre2, sim2;
        std::vector<double> alpha(k);
        for (std::uint64_t i = 0; i < acc.n; ++i) {
          alpha[0] = a1 + rng.uniform() * (b1 - a1);
          for (int j = 1; j < k; ++j)
            alpha[j] = lo[j] + rng.uniform() * width[j];
          Cplx v(0, 0);
          bool inside = true;
          if (indicator)
            inside = dissection_classify(alpha, *dissection) == region.cls;
          if (inside) {
            ++acc.hits;
            v = point_value(alpha);
          }
          sre.add(v.real());
          sim.add(v.imag());
          sre2.add(v.real() * v.real());
          sim2.add(v.imag() * v.imag());
        }
        acc.re = sre.get();
        acc.im = sim.get();
        acc.re2 = sre2.get();
        acc.im2 = sim2.get();
        return acc;
      });

  // Strata are equal slabs of the first coordinate: weight measure / S each.
  Neumaier vre, vim, var;
  std::uint64_t hits = 0;
  const double w = measure / static_cast<double>(S);
  for (const StratumAcc& a : partials) {
    hits += a.hits;
    if (a.n == 0) continue;
    const double n = static_cast<double>(a.n);
    const double mre = a.re / n;
    const double mim = a.im / n;
    vre.add(w * mre);
    vim.add(w * mim);
    if (a.n >= 2) {
      const double sre2 = std::max(0.0, (a.re2 - n * mre * mre) / (n - 1));
      const double sim2 = std::max(0.0, (a.im2 - n * mim * mim) / (n - 1));
      var.add(w * w * (sre2 + sim2) / n);
    }
  }

  MomentEstimate out;
  out.value = Cplx(vre.get(), vim.get());
  out.std_error = std::sqrt(std::max(0.0, var.get()));
  out.hit_fraction =
      static_cast<double>(hits) / static_cast<double>(sampler.samples);
  out.samples = sampler.samples;
  return out;
}

// ---------------------------------------------------------------------------
// Singular series
// ---------------------------------------------------------------------------

SeriesResult singular_series_partial(int s, int k, const HTuple& h, long q_max,
                                     const Budget& budget, int threads) {
  if (s < 1 || s > 64) throw invalid_error("s out of range");
  if (k < 1 || k > 16) throw invalid_error("degree k out of range");
  if (h.k() != k) throw invalid_error("shift tuple dimension mismatch");
  if (q_max < 1) throw invalid_error("q_max must be at least 1");

  {
    Int cost = 0;
    for (long q = 1; q <= q_max; ++q) cost += int_pow(q, k + 1);
    check_enum_budget(cost, budget, "singular series enumeration");
  }

  auto partials = parallel_groups<Cplx>(
      static_cast<std::uint64_t>(q_max), threads,
      [&](std::uint64_t gi) -> Cplx {
        const long q = static_cast<long>(gi) + 1;
        const double qd = static_cast<double>(q);
        // h_j mod q, once per q
        std::vector<std::uint64_t> hr(k);
        for (int j = 0; j < k; ++j)
          hr[j] = mpz_fdiv_ui(h.at(j + 1).get_mpz_t(),
                              static_cast<unsigned long>(q));
        NeumaierC acc;
        std::vector<long> a(k, 1);
        while (true) {
          long g = q;
          for (long aj : a) g = std::gcd(g, aj);
          if (g == 1) {
            Cplx S = expsums::complete_sum_S(q, a);
            const double amp = powi(std::norm(S) / (qd * qd), s);
            std::uint64_t t = 0;
            for (int j = 0; j < k; ++j)
              t = (t + static_cast<std::uint64_t>(a[j]) % q * hr[j]) %
                  static_cast<std::uint64_t>(q);
            acc.add(amp *
                    expsums::unit_phase(-static_cast<double>(t) / qd));
          }
          int j = 0;
          while (j < k && ++a[j] > q) {
            a[j] = 1;
            ++j;
          }
          if (j >= k) break;
        }
        return acc.get();
      });

  SeriesResult out;
  out.per_q.reserve(partials.size());
  Neumaier re, im;
  for (const Cplx& p : partials) {
    out.per_q.push_back(p.real());
    re.add(p.real());
    im.add(p.imag());
  }
  out.value = re.get();
  out.imag_residual = std::abs(im.get());
  return out;
}

// ---------------------------------------------------------------------------
// Singular integral
// ---------------------------------------------------------------------------

namespace {

double sinc_pi(double b) {
  const double pb = kPi * b;
  if (std::abs(pb) < 1e-4) {
    const double p2 = pb * pb;
    return 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
  }
  return std::sin(pb) / pb;
}

// c_s = (2s-1)!! / (2s)!!: the mean of sin^{2s} over a period.
double sin_power_mean(int s) {
  double c = 1;
  for (int i = 1; i <= s; ++i) c *= (2.0 * i - 1) / (2.0 * i);
  return c;
}

long osc_panels(double B, double slope, long cap) {
  const double radians = 2.0 * B * slope;
  const double p = std::ceil(radians);
  return std::max<long>(4, std::min<long>(cap, static_cast<long>(p)));
}

IntegralResult integral_1d(int s, double n1, double B, double tol,
                           long max_evals) {
  auto F = [s, n1](double b) -> Cplx {
    const double sv = sinc_pi(b);
    return powi(sv * sv, s) * expsums::unit_phase(-b * n1);
  };
  const long panels =
      osc_panels(B, kPi + 2.0 * kPi * std::abs(n1), 200000);
  auto q = expsums::adaptive_complex(F, -B, B, tol / 2, max_evals,
                                     static_cast<int>(panels));
  IntegralResult out;
  out.value = q.value.real();
  out.imag_residual = std::abs(q.value.imag());
  out.quad_err = q.abs_err;
  out.evals = q.evals;
  const double pis = std::pow(kPi, 2 * s);
  out.tail_bound_valid = true;
  if (n1 == 0.0) {
    // Tail of int (sin(pi b)/(pi b))^{2s} db beyond B: replace sin^{2s} by its
    // period mean c_s (integrating the remainder by parts bounds the error by
    // 2 / (pi^{2s} B^{2s})).
    out.tail_correction = 2.0 * sin_power_mean(s) /
                          ((2.0 * s - 1) * pis * std::pow(B, 2 * s - 1));
    out.tail_bound = 2.0 / (pis * std::pow(B, 2 * s));
  } else {
    // Envelope bound only: |integrand| <= (pi b)^{-2s}.
    out.tail_correction = 0;
    out.tail_bound = 2.0 / ((2.0 * s - 1) * pis * std::pow(B, 2 * s - 1));
  }
  out.value += out.tail_correction;
  out.converged = q.converged && out.tail_bound <= tol / 2;
  return out;
}

// Exact kernel representation for k >= 2. Expanding |I(beta)|^{2s} as an
// integral over (t, u) in [0,1]^{2s} and integrating each beta_j over [-B,B]
// in closed form gives
//   int_{[-B,B]^k} |I(beta)|^{2s} e(-beta . n) d beta
//     = int_{[0,1]^{2s}} prod_{j<=k} kappa_B(S_j(t,u) - n_j) dt du,
// where S_j = sum_i (t_i^j - u_i^j) and
//   kappa_B(x) = int_{-B}^{B} e(beta x) d beta = sin(2 pi B x) / (pi x),
// with kappa_B(0) = 2B. The cube integral is estimated by stratified Monte
// Carlo with a fixed seed: unbiased for the truncated integral, no
// oscillatory quadrature involved, and quad_err reports the standard error.
// The sample count is chosen from a pilot variance estimate; the call is
// refused when meeting tol would need more samples than max_evals.
double kernel_kappa(double x, double B) {
  const double y = 2.0 * kPi * B * x;
  if (std::abs(y) < 1e-4) {
    const double y2 = y * y;
    return 2.0 * B * (1.0 - y2 / 6.0 + y2 * y2 / 120.0);
  }
  return std::sin(y) / (kPi * x);
}

struct KernelMcEstimate {
  double mean = 0;
  double se = 0;
  long samples = 0;
};

struct KernelStratSums {
  double sum = 0;
  double sum2 = 0;
  long done = 0;
};

KernelMcEstimate kernel_mc_pass(int s, const std::vector<double>& n, double B,
                                long total, std::uint64_t salt, int threads) {
  const int k = static_cast<int>(n.size());
  const std::uint64_t S = 256;
  auto parts = parallel_groups<KernelStratSums>(
      S, threads, [&](std::uint64_t g) -> KernelStratSums {
        SplitMix64 rng(0x5e6b'9d2f'11c3'7a40ULL + salt, g);
        const long n_g = total / static_cast<long>(S) +
                         (g < static_cast<std::uint64_t>(total % S) ? 1 : 0);
        const double a0 = static_cast<double>(g) / S;
        const double b0 = static_cast<double>(g + 1) / S;
        Neumaier sum, sum2;
        std::vector<double> t(s), u(s), Sj(k);
        for (long i = 0; i < n_g; ++i) {
          t[0] = a0 + rng.uniform() * (b0 - a0);
          for (int m = 1; m < s; ++m) t[m] = rng.uniform();
          for (int m = 0; m < s; ++m) u[m] = rng.uniform();
          std::fill(Sj.begin(), Sj.end(), 0.0);
          for (int m = 0; m < s; ++m) {
            double pt = 1.0, pu = 1.0;
            for (int j = 0; j < k; ++j) {
              pt *= t[m];
              pu *= u[m];
              Sj[j] += pt - pu;
            }
          }
          double w = 1.0;
          for (int j = 0; j < k; ++j) w *= kernel_kappa(Sj[j] - n[j], B);
          sum.add(w);
          sum2.add(w * w);
        }
        return KernelStratSums{sum.get(), sum2.get(), n_g};
      });
  Neumaier sum, sum2;
  long done = 0;
  for (const auto& p : parts) {
    sum.add(p.sum);
    sum2.add(p.sum2);
    done += p.done;
  }
  KernelMcEstimate out;
  const double nd = static_cast<double>(done);
  out.mean = sum.get() / nd;
  const double var =
      std::max(0.0, (sum2.get() - nd * out.mean * out.mean) / (nd - 1));
  out.se = std::sqrt(var / nd);
  out.samples = done;
  return out;
}

IntegralResult integral_kernel_mc(int s, const std::vector<double>& n,
                                  double B, double tol, long max_evals,
                                  int threads) {
  const long pilot = std::min<long>(max_evals, 1L << 16);
  auto p = kernel_mc_pass(s, n, B, pilot, 1, threads);

  // Target a standard error of tol / 2 so converged holds with margin.
  long need = pilot;
  if (p.se > 0) {
    const double want = 2.0 * p.se * std::sqrt(static_cast<double>(pilot)) /
                        tol;
    const double req = want * want;
    if (req > static_cast<double>(std::numeric_limits<long>::max() / 2))
      throw budget_error("singular integral evaluation budget",
                         Int("9223372036854775807"), Int(max_evals));
    need = std::max<long>(pilot, static_cast<long>(std::ceil(req)));
  }
  if (need > max_evals)
    throw budget_error("singular integral evaluation budget", Int(need),
                       Int(max_evals));

  auto e = (need > pilot) ? kernel_mc_pass(s, n, B, need, 2, threads) : p;
  IntegralResult out;
  out.value = e.mean;
  out.imag_residual = 0;  // the kernel representation is real
  out.quad_err = e.se;
  out.evals = p.samples + (need > pilot ? e.samples : 0);
  out.converged = e.se <= tol;
  return out;
}

}  // namespace

IntegralResult singular_integral_truncated(int s, const std::vector<double>& n,
                                           double B, double tol,
                                           long max_evals, int threads) {
  const int k = static_cast<int>(n.size());
  if (s < 1 || s > 64) throw invalid_error("s out of range");
  if (k < 1 || k > 16) throw invalid_error("degree k out of range");
  for (double c : n)
    if (!std::isfinite(c)) throw invalid_error("n must be finite");
  if (!std::isfinite(B) || B <= 0) throw invalid_error("B must be positive");
  if (!std::isfinite(tol) || tol <= 0)
    throw invalid_error("tolerance must be positive");
  if (max_evals < 30) throw invalid_error("max_evals too small");

  if (k == 1) return integral_1d(s, n[0], B, tol, max_evals);
  return integral_kernel_mc(s, n, B, tol, max_evals, resolve_threads(threads));
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

Prediction asymptotic_prediction(int s, int k, const HTuple& h, long X,
                                 long q_max, double B, double tol,
                                 long max_evals, const Budget& budget,
                                 int threads) {
  if (X < 2) throw invalid_error("X must be at least 2");
  Prediction out;
  out.series = singular_series_partial(s, k, h, q_max, budget, threads);
  if (!(out.series.value > 0))
    throw tolerance_error(
        "truncated singular series is not positive; refine q_max or treat "
        "the case as degenerate");
  std::vector<double> n(k);
  for (int j = 1; j <= k; ++j)
    n[j - 1] = h.at(j).get_d() / std::pow(static_cast<double>(X), j);
  out.integral = singular_integral_truncated(s, n, B, tol, max_evals, threads);
  if (!(out.integral.value > 0))
    throw tolerance_error(
        "truncated singular integral is not positive; refine B or treat the "
        "case as degenerate");
  out.scale = std::pow(static_cast<double>(X),
                       2.0 * s - 0.5 * k * (k + 1));
  out.value = out.series.value * out.integral.value * out.scale;
  return out;
}

}  // namespace vinsys::circle
