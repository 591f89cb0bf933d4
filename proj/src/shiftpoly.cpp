#include "vinsys/shiftpoly.hpp"

namespace vinsys::shiftpoly {

Int binomial(int n, int r) {
  if (n < 0 || r < 0 || r > n) return 0;
  Int out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n),
               static_cast<unsigned long>(r));
  return out;
}

std::vector<Int> nu_coeffs(int j, const HTuple& h) {
  if (j < 1 || j > h.k()) throw invalid_error("nu_coeffs: need 1 <= j <= k");
  std::vector<Int> c(static_cast<std::size_t>(j));
  for (int i = 0; i < j; ++i)
    c[static_cast<std::size_t>(i)] = binomial(j, i) * h.at(j - i);
  return c;
}

Int nu_eval(int j, const Int& y, const HTuple& h) {
  std::vector<Int> c = nu_coeffs(j, h);
  Int acc = 0;  // Horner, highest coefficient first
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * y + *it;
  return acc;
}

static std::vector<Int> power_sums_of(const std::vector<Int>& x, int upto) {
  std::vector<Int> s(static_cast<std::size_t>(upto));
  Int p;
  for (const Int& xi : x) {
    p = 1;
    for (int j = 0; j < upto; ++j) {
      p *= xi;
      s[static_cast<std::size_t>(j)] += p;
    }
  }
  return s;
}

ShiftCheck verify_shift_identity(const std::vector<Int>& x2s, const Int& b,
                                 const HTuple& h) {
  if (x2s.size() % 2 != 0 || x2s.empty())
    throw invalid_error("verify_shift_identity: need an even, nonempty tuple");
  int k = h.k();
  if (k < 1) throw invalid_error("verify_shift_identity: empty shift tuple");
  std::size_t s = x2s.size() / 2;

  std::vector<Int> left(x2s.begin(), x2s.begin() + static_cast<long>(s));
  std::vector<Int> right(x2s.begin() + static_cast<long>(s), x2s.end());
  std::vector<Int> left_sh = left, right_sh = right;
  for (Int& v : left_sh) v += b;
  for (Int& v : right_sh) v += b;

  int upto = k - 1;
  ShiftCheck out{true, true};
  if (upto == 0) return out;  // nothing to check below degree k

  std::vector<Int> sl = power_sums_of(left, upto);
  std::vector<Int> sr = power_sums_of(right, upto);
  std::vector<Int> tl = power_sums_of(left_sh, upto);
  std::vector<Int> tr = power_sums_of(right_sh, upto);
  for (int j = 1; j <= upto; ++j) {
    std::size_t i = static_cast<std::size_t>(j) - 1;
    if (sl[i] - sr[i] != h.at(j)) out.shifted_system = false;
    if (tl[i] - tr[i] != nu_eval(j, b, h)) out.nu_relation = false;
  }
  return out;
}

Rat elementary_from_power(const std::vector<Rat>& power_sums, int n) {
  if (n < 0) throw invalid_error("elementary_from_power: n must be >= 0");
  if (static_cast<int>(power_sums.size()) < n)
    throw invalid_error("elementary_from_power: need power sums up to n");
  std::vector<Rat> sigma(static_cast<std::size_t>(n) + 1);
  sigma[0] = 1;
  for (int m = 1; m <= n; ++m) {
    Rat acc = 0;
    for (int i = 1; i <= m; ++i) {
      Rat term = sigma[static_cast<std::size_t>(m - i)] *
                 power_sums[static_cast<std::size_t>(i) - 1];
      if (i % 2 == 0) acc -= term; else acc += term;
    }
    sigma[static_cast<std::size_t>(m)] = acc / m;
  }
  return sigma[static_cast<std::size_t>(n)];
}

Rat elementary_from_power(const std::vector<Int>& power_sums, int n) {
  std::vector<Rat> q;
  q.reserve(power_sums.size());
  for (const Int& s : power_sums) q.emplace_back(s);
  return elementary_from_power(q, n);
}

Rat elementary_from_power_multinomial(const std::vector<Rat>& power_sums, int n) {
  if (n < 0) throw invalid_error("elementary_from_power_multinomial: n >= 0");
  if (static_cast<int>(power_sums.size()) < n)
    throw invalid_error("elementary_from_power_multinomial: need power sums up to n");
  if (n == 0) return Rat(1);

  // Walk all (m_1..m_n) with sum i*m_i = n, keeping the partial product
  // prod (-s_i)^{m_i} / (i^{m_i} m_i!) as we descend.
  Rat total = 0;
  std::function<void(int, int, Rat)> rec = [&](int i, int remaining, Rat partial) {
    if (i > n || remaining == 0) {
      if (remaining == 0) total += partial;
      return;
    }
    Rat p = partial;
    for (int mi = 0; mi * i <= remaining; ++mi) {
      if (mi > 0) {
        // extend (-s_i)^{mi} / (i^{mi} mi!) one step: multiply by -s_i/(i*mi)
        p *= -power_sums[static_cast<std::size_t>(i) - 1];
        p /= Rat(i) * mi;
      }
      rec(i + 1, remaining - mi * i, p);
    }
  };
  rec(1, n, Rat(1));
  if (n % 2 != 0) total = -total;
  return total;
}

bool check_sigma_equalities(const std::vector<Int>& x,
                            const std::vector<Int>& y, int l) {
  if (l < 1) throw invalid_error("check_sigma_equalities: l must be >= 1");
  int upto = l - 1;
  std::vector<Int> sx = power_sums_of(x, upto);
  std::vector<Int> sy = power_sums_of(y, upto);
  for (int j = 0; j < upto; ++j)
    if (sx[static_cast<std::size_t>(j)] != sy[static_cast<std::size_t>(j)])
      throw invalid_error("check_sigma_equalities: power sums differ below l");
  for (int n = 1; n < l; ++n) {
    if (elementary_from_power(sx, n) != elementary_from_power(sy, n))
      return false;
  }
  return true;
}

// Ascending coefficients of prod (z - r); multiplying by (z - r) maps
// new[i] = old[i-1] - r*old[i].
static std::vector<Int> monic_from_roots(const std::vector<Int>& roots) {
  std::vector<Int> c{Int(1)};
  for (const Int& r : roots) {
    std::vector<Int> next(c.size() + 1);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  return c;
}

std::vector<Int> poly_difference_coeffs(const std::vector<Int>& x,
                                        const std::vector<Int>& y) {
  if (x.size() != y.size() || x.empty())
    throw invalid_error("poly_difference_coeffs: tuples must match and be nonempty");
  std::vector<Int> a = monic_from_roots(x);
  std::vector<Int> b = monic_from_roots(y);
  std::vector<Int> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;  // top coefficient is always 0 (both monic of the same degree)
}

PolyDifference poly_difference_eval(const std::vector<Int>& x,
                                    const std::vector<Int>& y, const Rat& z) {
  if (x.size() != y.size() || x.empty())
    throw invalid_error("poly_difference_eval: tuples must match and be nonempty");
  int k = static_cast<int>(x.size());

  PolyDifference out;
  Rat px = 1, py = 1;
  for (const Int& r : x) px *= z - Rat(r);
  for (const Int& r : y) py *= z - Rat(r);
  out.direct = px - py;

  std::vector<Int> sx = power_sums_of(x, k);
  std::vector<Int> sy = power_sums_of(y, k);
  Rat acc = 0;
  for (int n = 0; n <= k; ++n) {
    Rat diff = elementary_from_power(sx, n) - elementary_from_power(sy, n);
    if (diff == 0) continue;
    Rat zpow = 1;
    for (int i = 0; i < k - n; ++i) zpow *= -z;
    acc += diff * zpow;
  }
  if (k % 2 != 0) acc = -acc;
  out.via_sigma = acc;
  return out;
}

bool single_h_degree_bound(const std::vector<Int>& x,
                           const std::vector<Int>& y, int l) {
  if (x.size() != y.size() || x.empty())
    throw invalid_error("single_h_degree_bound: tuples must match and be nonempty");
  int k = static_cast<int>(x.size());
  if (l < 1 || l > k) throw invalid_error("single_h_degree_bound: need 1 <= l <= k");

  std::vector<Int> sx = power_sums_of(x, k);
  std::vector<Int> sy = power_sums_of(y, k);
  for (int j = 1; j <= k; ++j) {
    std::size_t i = static_cast<std::size_t>(j) - 1;
    if (j == l) {
      if (sx[i] == sy[i])
        throw invalid_error("single_h_degree_bound: shift at l vanishes");
    } else if (sx[i] != sy[i]) {
      throw invalid_error("single_h_degree_bound: nonzero shift away from l");
    }
  }

  std::vector<Int> d = poly_difference_coeffs(x, y);
  int deg = -1;
  for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) {
    if (d[static_cast<std::size_t>(i)] != 0) { deg = i; break; }
  }
  return deg <= k - l;
}

}  // namespace vinsys::shiftpoly
