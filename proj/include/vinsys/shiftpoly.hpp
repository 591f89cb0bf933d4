#pragma once

// Shift profiles and symmetric-function identities.
//
// nu_j(y; h) = sum_{i=0}^{j-1} C(j,i) h_{j-i} y^i is the degree-(j-1)
// polynomial that absorbs a common translation of all variables: if
// sum_i (x_i^j - x_{s+i}^j) = h_j holds for 1 <= j <= k-1 after replacing
// every x by x - b, then the untranslated sums hit nu_j(b; h) instead of h_j,
// and conversely. Everything here is evaluated exactly at integer or rational
// points; no symbolic coefficient polynomials are ever constructed.

#include <utility>
#include <vector>

#include "vinsys/core.hpp"

namespace vinsys::shiftpoly {

Int binomial(int n, int r);

// Coefficient of y^i is C(j,i) h_{j-i}, for i = 0..j-1.
std::vector<Int> nu_coeffs(int j, const HTuple& h);
Int nu_eval(int j, const Int& y, const HTuple& h);

struct ShiftCheck {
  bool shifted_system;  // sum(x_i^j - x_{s+i}^j) == h_j,                 j <= k-1
  bool nu_relation;     // sum((x_i+b)^j - (x_{s+i}+b)^j) == nu_j(b; h),  j <= k-1
};

// x2s holds (x_1..x_s, x_{s+1}..x_{2s}); h supplies k and the shifts.
// Translating every variable by b replaces the shift h_j by nu_j(b;h), and
// the triangular structure makes this an equivalence: the two booleans always
// agree (the contract under test elsewhere).
ShiftCheck verify_shift_identity(const std::vector<Int>& x2s, const Int& b,
                                 const HTuple& h);

// Newton's identities, power sums -> elementary symmetric functions:
//   n*sigma_n = sum_{i=1}^{n} (-1)^{i-1} sigma_{n-i} s_i,   sigma_0 = 1.
// Input is (s_1, ..., s_m) with m >= n; output is exact.
Rat elementary_from_power(const std::vector<Rat>& power_sums, int n);
Rat elementary_from_power(const std::vector<Int>& power_sums, int n);

// Independent route for the same quantity, summing over partitions
// n = 1*m_1 + 2*m_2 + ... + n*m_n:
//   sigma_n = (-1)^n * sum over partitions of prod_i (-s_i)^{m_i} / (i^{m_i} m_i!).
Rat elementary_from_power_multinomial(const std::vector<Rat>& power_sums, int n);

// Requires s_j(x) = s_j(y) for j < l; returns whether sigma_n(x) = sigma_n(y)
// for all n < l (always true mathematically; the return value is the check).
bool check_sigma_equalities(const std::vector<Int>& x,
                            const std::vector<Int>& y, int l);

// Coefficients of prod(z - x_i) - prod(z - y_i), ascending in z.
std::vector<Int> poly_difference_coeffs(const std::vector<Int>& x,
                                        const std::vector<Int>& y);

struct PolyDifference {
  Rat direct;     // prod(z-x_i) - prod(z-y_i) evaluated termwise
  Rat via_sigma;  // (-1)^k sum_n (sigma_n(x)-sigma_n(y)) (-z)^{k-n}
};
PolyDifference poly_difference_eval(const std::vector<Int>& x,
                                    const std::vector<Int>& y, const Rat& z);

// For solutions of the degree-k system whose only nonzero shift sits at
// index l: deg(prod(z-x_i) - prod(z-y_i)) <= k - l. Verifies the premise
// (power sums agree below l and at every other index) and then the bound.
bool single_h_degree_bound(const std::vector<Int>& x,
                           const std::vector<Int>& y, int l);

}  // namespace vinsys::shiftpoly
