#pragma once

// Exact-rational catalog of proved growth exponents for the shifted
// power-sum count J_{s,k}(X;h), together with log-log slope fitting for
// empirical count ladders and a slack-based fit-vs-catalog comparison.
//
// Catalog exponents are stored as exact rationals with the X^eps factor
// dropped; the comparison absorbs eps into a slack parameter because a
// finite-X fit cannot resolve it. Comparisons only ever report agreement or
// a flag: an asymptotic statement cannot be refuted at finite X.

#include <string>
#include <utility>
#include <vector>

#include "vinsys/core.hpp"
#include "vinsys/counting.hpp"

namespace vinsys::exponents {

// Largest s (exact rational) for which the half-power saving
// J_{s,k}(X;h) << X^{s-1/2+eps} is available when the first nonzero shift
// component sits at index l:
//
//   k(k+1)/2 - (k(k+1) - l(l+1)) / (2 (k-l) (k-l+1)).
//
// Requires 1 <= l < k.
Rat subconvex_range_limit(int k, int l);

// Interpolated saving
//
//   delta(s,k,l) = (k-l)(k-l+1) (k(k+1) - 2s) / (2 (k(k+1) - l(l+1))),
//
// nonnegative and strictly decreasing in s, vanishing at s = k(k+1)/2.
// Requires 1 <= l < k and 1 <= s <= k(k+1)/2.
Rat interpolation_delta(int s, int k, int l);

// Older range limit on the index l from prior work on shifted systems:
// k - (sqrt(2k^2+2k+1) - 1)/2, roughly 0.293 k. Displayed for context only;
// nothing in the catalog or the comparisons asserts it.
double legacy_range_limit(int k);

// Exponent in the near-diagonal lower bound
// Omega_1(X) >> X^{2s(1-1/k) - (k-1)/2}.
Rat omega1_lower_exponent(int s, int k);

// Restricted-moment conjecture bookkeeping: the conjectured bound
//   integral over B of |f|^{2s}  <<  X^eps (X^s mes(B) + X^{2s-k(k+1)/2})
// is stated for s >= k(k+1)/4 + 1, and for every positive s once
// mes(B) >> X^{1 - k(k+1)/4}.
Rat conjecture_min_s(int k);             // k(k+1)/4 + 1
Rat conjecture_measure_exponent(int k);  // 1 - k(k+1)/4
// Numeric right-hand side C * X^eps * (X^s * measure + X^{2s - k(k+1)/2}).
double conjectured_restricted_bound(int s, int k, double measure, double X,
                                    double eps, double C);

enum class Direction { Upper, Lower, Asymptotic };

struct BoundRecord {
  std::string name;
  Rat exponent;              // claimed power of X, eps excluded
  Direction direction = Direction::Upper;
  bool conditional = false;  // assumes the restricted-moment conjecture
  bool vanishes = false;     // asserts the count is exactly zero
  std::string note;          // hypothesis used, witnesses, secondary terms
};

const char* direction_name(Direction d);

// Every catalog record whose hypothesis holds at (s, k, h). The zero shift
// yields only the homogeneous baseline and the diagonal lower bound; all
// shifted records require h != 0. Throws invalid_error on s < 1, k < 1, or
// a dimension mismatch between k and h.
std::vector<BoundRecord> bound_catalog(int s, int k, const HTuple& h);

struct FitResult {
  double slope = 0;
  double intercept = 0;         // fitted value of log c in count ~ c X^slope
  double max_abs_residual = 0;  // worst log-scale deviation from the line
  int points_used = 0;
  int zeros_dropped = 0;   // zero counts (log undefined) excluded from the fit
  int error_points = 0;    // budget-refused ladder points excluded
  bool identically_zero = false;  // every usable point had count zero
};

// Ordinary least squares on (log X, log count). Zero counts are dropped and
// reported; a ladder whose usable points are all zero yields the
// identically-zero verdict instead of a slope. Requires at least three
// positive points on at least two distinct X otherwise.
FitResult fit_exponent(const counting::LadderResult& ladder);

// Same fit on bare (X, count) pairs, for oracles and synthetic data.
FitResult fit_points(const std::vector<std::pair<long, Int>>& points);

struct ComparisonEntry {
  BoundRecord record;
  bool flagged = false;  // fit deviates beyond slack; never a disproof claim
  std::string verdict;   // "consistent" or "flagged"
  std::string detail;
};

// For an upper record, flag slope > exponent + slack; for a lower record,
// flag slope < exponent - slack; for an asymptotic record, flag
// |slope - exponent| > slack. An identically-zero ladder is consistent with
// every upper or vanishing record and flagged against lower and asymptotic
// ones. Flags report finite-X tension only.
std::vector<ComparisonEntry> compare_fit_to_catalog(
    const FitResult& fit, const std::vector<BoundRecord>& records,
    double slack = 0.4);

}  // namespace vinsys::exponents
