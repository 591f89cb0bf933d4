#include "vinsys/counting.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>

#include "vinsys/shiftpoly.hpp"

namespace vinsys::counting {

namespace {

using i128 = __int128;

i128 to_i128(const Int& v) {
  // caller guarantees |v| < 2^126
  Int a = abs(v);
  i128 r = 0;
  std::size_t limbs = mpz_size(a.get_mpz_t());
  for (std::size_t i = limbs; i-- > 0;) {
    r = (r << 64) | static_cast<i128>(mpz_getlimbn(a.get_mpz_t(), i));
  }
  return sgn(v) < 0 ? -r : r;
}

Int pow_int(long base, int e) {
  Int b(base), r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(e));
  return r;
}

// Largest sum magnitude the odometer can see: s * X^k.
Int max_abs_sum(int s, int k, long X) { return Int(s) * pow_int(X, k); }

// One enumeration core for the direct count, the distinct-variable variant
// and the solution callback. T is __int128 on the fast path and Int when the
// power sums could overflow it.
template <class T>
class PairEnumerator {
 public:
  PairEnumerator(const SystemParams& p, bool distinct)
      : s_(p.s), k_(p.k), X_(p.X), distinct_(distinct) {
    target_.resize(static_cast<std::size_t>(k_));
    for (int j = 1; j <= k_; ++j)
      target_[static_cast<std::size_t>(j) - 1] = convert(p.h.at(j));
    pw_.resize(static_cast<std::size_t>(X_ + 1) * static_cast<std::size_t>(k_));
    for (long x = 1; x <= X_; ++x) {
      T acc = convert(Int(1));
      for (int j = 0; j < k_; ++j) {
        acc = acc * static_cast<long>(x);
        pw_[static_cast<std::size_t>(x) * static_cast<std::size_t>(k_) +
            static_cast<std::size_t>(j)] = acc;
      }
    }
  }

  Int count(int threads) {
    std::vector<Int> partial = parallel_groups<Int>(
        static_cast<std::uint64_t>(X_), threads, [&](std::uint64_t g) {
          State st(*this);
          st.apply(0, static_cast<long>(g + 1));
          st.rec(1);
          st.unapply(0, static_cast<long>(g + 1));
          return st.found;
        });
    Int total = 0;
    for (const Int& p : partial) total += p;
    return total;
  }

  void enumerate(const std::function<void(const std::vector<long>&,
                                          const std::vector<long>&)>& fn) {
    State st(*this);
    st.callback = &fn;
    st.rec(0);
  }

 private:
  static T convert(const Int& v) {
    if constexpr (std::is_same_v<T, Int>) return v;
    else return to_i128(v);
  }

  struct State {
    const PairEnumerator& e;
    std::vector<T> sums;
    std::vector<long> cur;
    Int found = 0;
    const std::function<void(const std::vector<long>&,
                             const std::vector<long>&)>* callback = nullptr;

    explicit State(const PairEnumerator& enc)
        : e(enc),
          sums(static_cast<std::size_t>(enc.k_)),
          cur(static_cast<std::size_t>(2 * enc.s_)) {}

    void apply(int slot, long v) {
      cur[static_cast<std::size_t>(slot)] = v;
      const T* row = &e.pw_[static_cast<std::size_t>(v) *
                            static_cast<std::size_t>(e.k_)];
      if (slot < e.s_)
        for (int j = 0; j < e.k_; ++j) sums[static_cast<std::size_t>(j)] += row[j];
      else
        for (int j = 0; j < e.k_; ++j) sums[static_cast<std::size_t>(j)] -= row[j];
    }

    void unapply(int slot, long v) {
      const T* row = &e.pw_[static_cast<std::size_t>(v) *
                            static_cast<std::size_t>(e.k_)];
      if (slot < e.s_)
        for (int j = 0; j < e.k_; ++j) sums[static_cast<std::size_t>(j)] -= row[j];
      else
        for (int j = 0; j < e.k_; ++j) sums[static_cast<std::size_t>(j)] += row[j];
    }

    bool clashes(long v) const {
      for (int i = 0; i < e.s_; ++i)
        if (cur[static_cast<std::size_t>(i)] == v) return true;
      return false;
    }

    void rec(int slot) {
      if (slot == 2 * e.s_) {
        for (int j = 0; j < e.k_; ++j)
          if (sums[static_cast<std::size_t>(j)] !=
              e.target_[static_cast<std::size_t>(j)])
            return;
        if (callback) {
          std::vector<long> x(cur.begin(), cur.begin() + e.s_);
          std::vector<long> y(cur.begin() + e.s_, cur.end());
          (*callback)(x, y);
        }
        ++found;
        return;
      }
      for (long v = 1; v <= e.X_; ++v) {
        if (e.distinct_ && slot >= e.s_ && clashes(v)) continue;
        apply(slot, v);
        rec(slot + 1);
        unapply(slot, v);
      }
    }
  };

  int s_, k_;
  long X_;
  bool distinct_;
  std::vector<T> target_;
  std::vector<T> pw_;
};

// The target is unreachable when some |h_j| exceeds the largest possible
// |sum(x^j - y^j)| = s(X^j - 1); every comparison would fail.
bool target_unreachable(const SystemParams& p) {
  for (int j = 1; j <= p.k; ++j) {
    Int bound = Int(p.s) * (pow_int(p.X, j) - 1);
    if (abs(p.h.at(j)) > bound) return true;
  }
  return false;
}

bool fits_i128(const SystemParams& p) {
  Int lim = Int(1) << 120;
  return max_abs_sum(p.s, p.k, p.X) < lim;
}

Int run_pair_count(const SystemParams& p, bool distinct, int threads) {
  if (target_unreachable(p)) return 0;
  if (fits_i128(p)) return PairEnumerator<i128>(p, distinct).count(threads);
  return PairEnumerator<Int>(p, distinct).count(threads);
}

}  // namespace

void validate(const SystemParams& p) {
  if (p.s < 1) throw invalid_error("s must be >= 1");
  if (p.k < 1) throw invalid_error("k must be >= 1");
  if (p.X < 1) throw invalid_error("X must be >= 1");
  if (p.h.k() != p.k)
    throw invalid_error("shift tuple length must equal k");
}

Int brute_force_count(const SystemParams& p, const Budget& budget, int threads) {
  validate(p);
  check_enum_budget(pow_int(p.X, 2 * p.s), budget, "brute_force_count");
  return run_pair_count(p, /*distinct=*/false, threads);
}

void for_each_solution(
    const SystemParams& p, const Budget& budget,
    const std::function<void(const std::vector<long>&, const std::vector<long>&)>& fn) {
  validate(p);
  check_enum_budget(pow_int(p.X, 2 * p.s), budget, "for_each_solution");
  if (target_unreachable(p)) return;
  if (fits_i128(p)) {
    PairEnumerator<i128>(p, false).enumerate(fn);
  } else {
    PairEnumerator<Int>(p, false).enumerate(fn);
  }
}

Int count_distinct(int k, const HTuple& h, long X, const Budget& budget,
                   int threads) {
  SystemParams p{k, k, X, h};
  validate(p);
  check_enum_budget(pow_int(X, 2 * k), budget, "count_distinct");
  return run_pair_count(p, /*distinct=*/true, threads);
}

namespace {

struct Extent {
  std::vector<Int> lo, hi;  // per-coordinate key range
};

Extent key_extent(const CountMap& m) {
  Extent e;
  int k = m.meta().k;
  e.lo.assign(static_cast<std::size_t>(k), 0);
  e.hi.assign(static_cast<std::size_t>(k), 0);
  bool first = true;
  for (const auto& [key, mult] : m) {
    for (int i = 0; i < k; ++i) {
      const Int& v = key.v[static_cast<std::size_t>(i)];
      if (first || v < e.lo[static_cast<std::size_t>(i)]) e.lo[static_cast<std::size_t>(i)] = v;
      if (first || v > e.hi[static_cast<std::size_t>(i)]) e.hi[static_cast<std::size_t>(i)] = v;
    }
    first = false;
  }
  return e;
}

// sign = +1 builds the sum map, -1 the difference map (cross-correlation).
CountMap combine_maps(const CountMap& a, const CountMap& b, int sign,
                      const Budget& budget, int threads) {
  if (a.meta().k != b.meta().k) throw invalid_error("map dimension mismatch");
  int k = a.meta().k;

  Int pair_cost = Int(static_cast<unsigned long>(a.size())) *
                  Int(static_cast<unsigned long>(b.size()));
  check_enum_budget(pair_cost, budget, "sparse combine");
  if (!a.empty() && !b.empty()) {
    Extent ea = key_extent(a), eb = key_extent(b);
    Int entry_est = 1;
    for (int i = 0; i < k; ++i) {
      std::size_t ii = static_cast<std::size_t>(i);
      Int width;
      if (sign > 0)
        width = (ea.hi[ii] + eb.hi[ii]) - (ea.lo[ii] + eb.lo[ii]) + 1;
      else
        width = (ea.hi[ii] - eb.lo[ii]) - (ea.lo[ii] - eb.hi[ii]) + 1;
      entry_est *= width;
    }
    if (entry_est > pair_cost) entry_est = pair_cost;
    check_entry_budget(entry_est, budget, "sparse combine");
  }

  std::vector<std::pair<const PowerSumVec*, const Int*>> snapshot;
  snapshot.reserve(a.size());
  for (const auto& [key, mult] : a) snapshot.emplace_back(&key, &mult);

  std::uint64_t groups = std::min<std::uint64_t>(snapshot.size(), 256);
  CountMapMeta meta;
  meta.k = k;
  meta.s = a.meta().s + b.meta().s;
  if (a.meta().lo == b.meta().lo && a.meta().hi == b.meta().hi) {
    meta.lo = a.meta().lo;
    meta.hi = a.meta().hi;
  }

  std::vector<CountMap> partial = parallel_groups<CountMap>(
      groups, threads, [&](std::uint64_t g) {
        CountMap part(meta);
        std::size_t begin = snapshot.size() * g / groups;
        std::size_t end = snapshot.size() * (g + 1) / groups;
        PowerSumVec key;
        for (std::size_t i = begin; i < end; ++i) {
          const PowerSumVec& u = *snapshot[i].first;
          const Int& mu = *snapshot[i].second;
          for (const auto& [v, mv] : b) {
            key = sign > 0 ? vec_add(u, v) : vec_sub(u, v);
            part.add(key, mu * mv);
          }
        }
        return part;
      });

  CountMap out(meta);
  for (const CountMap& part : partial) out.merge(part);
  return out;
}

CountMap base_rep_map(int k, long lo, long hi) {
  CountMap m(CountMapMeta{1, k, lo, hi});
  std::vector<Int> one(1);
  for (long x = lo; x <= hi; ++x) {
    one[0] = x;
    m.add(power_sum_vector(one, k), 1);
  }
  return m;
}

std::string cache_path(const std::string& dir, int s, int k, long lo, long hi) {
  return dir + "/repmap_s" + std::to_string(s) + "_k" + std::to_string(k) +
         "_lo" + std::to_string(lo) + "_hi" + std::to_string(hi) + ".v1.cmap";
}

}  // namespace

CountMap convolve(const CountMap& a, const CountMap& b, const Budget& budget,
                  int threads) {
  return combine_maps(a, b, +1, budget, threads);
}

CountMap rep_count_map(int s, int k, long lo, long hi, const Budget& budget,
                       int threads, const std::string& cache_dir) {
  if (s < 1 || k < 1 || lo > hi)
    throw invalid_error("rep_count_map: need s >= 1, k >= 1, lo <= hi");

  // Entry count is at most min(#tuples, product of power-sum ranges).
  Int by_tuples = pow_int(hi - lo + 1, s);
  Int est = 1;
  for (int j = 1; j <= k; ++j) {
    est *= Int(s) * (pow_int(hi, j) - pow_int(lo, j)) + 1;
    if (est > by_tuples) { est = by_tuples; break; }
  }
  check_entry_budget(est, budget, "rep_count_map");

  if (!cache_dir.empty()) {
    try {
      CountMap cached = CountMap::read_file(cache_path(cache_dir, s, k, lo, hi));
      const CountMapMeta& m = cached.meta();
      if (m.s == s && m.k == k && m.lo == lo && m.hi == hi) return cached;
    } catch (const io_error&) {
      // missing or stale; rebuild below
    }
  }

  std::map<int, CountMap> memo;
  std::function<const CountMap&(int)> build = [&](int ss) -> const CountMap& {
    auto it = memo.find(ss);
    if (it != memo.end()) return it->second;
    CountMap built = ss == 1
                         ? base_rep_map(k, lo, hi)
                         : convolve(build(ss - ss / 2), build(ss / 2), budget,
                                    threads);
    built.meta() = CountMapMeta{ss, k, lo, hi};
    return memo.emplace(ss, std::move(built)).first->second;
  };
  CountMap out = build(s);

  if (!cache_dir.empty()) {
    // best effort: a failed cache write must not fail the computation
    try {
      std::filesystem::create_directories(cache_dir);
      out.write_file(cache_path(cache_dir, s, k, lo, hi));
    } catch (...) {
    }
  }
  return out;
}

Int correlate(const CountMap& a, const CountMap& b, const HTuple& h,
              int threads) {
  if (a.meta().k != b.meta().k || h.k() != a.meta().k)
    throw invalid_error("correlate: dimension mismatch");

  // sum_w a(w+h) b(w); iterate the smaller side and probe the other.
  const bool iter_a = a.size() <= b.size();
  const CountMap& it_map = iter_a ? a : b;
  const CountMap& probe = iter_a ? b : a;

  std::vector<std::pair<const PowerSumVec*, const Int*>> snapshot;
  snapshot.reserve(it_map.size());
  for (const auto& [key, mult] : it_map) snapshot.emplace_back(&key, &mult);
  if (snapshot.empty()) return 0;

  std::uint64_t groups = std::min<std::uint64_t>(snapshot.size(), 256);
  std::vector<Int> partial = parallel_groups<Int>(
      groups, threads, [&](std::uint64_t g) {
        Int acc = 0;
        std::size_t begin = snapshot.size() * g / groups;
        std::size_t end = snapshot.size() * (g + 1) / groups;
        for (std::size_t i = begin; i < end; ++i) {
          const PowerSumVec& key = *snapshot[i].first;
          const Int& mult = *snapshot[i].second;
          PowerSumVec other = iter_a ? vec_sub(key, h) : vec_add(key, h);
          const Int& m2 = probe.get(other);
          if (m2 != 0) acc += mult * m2;
        }
        return acc;
      });
  Int total = 0;
  for (const Int& p : partial) total += p;
  return total;
}

Int mitm_count(const SystemParams& p, const Budget& budget, int threads,
               const std::string& cache_dir) {
  validate(p);
  CountMap r = rep_count_map(p.s, p.k, 1, p.X, budget, threads, cache_dir);
  return correlate(r, r, p.h, threads);
}

Int count_mixed_system(int u, int r, int k, const HTuple& h, long X,
                       const Budget& budget, int threads) {
  if (k < 1 || X < 1 || u < 0 || r < 0 || u + r < 1)
    throw invalid_error("count_mixed_system: bad parameters");
  if (h.k() != k) throw invalid_error("count_mixed_system: shift length != k");

  auto singleton_zero = [&] {
    CountMap m(CountMapMeta{0, k, 0, 0});
    m.add(PowerSumVec(std::vector<Int>(static_cast<std::size_t>(k))), 1);
    return m;
  };

  CountMap D = singleton_zero();
  if (u > 0) {
    CountMap a = rep_count_map(u, k, 1, 2 * X, budget, threads);
    D = combine_maps(a, a, -1, budget, threads);
  }

  CountMap E = singleton_zero();
  if (r > 0) {
    // base map of shift profiles (nu_1(w), ..., nu_k(w)) over w in [1,X]
    CountMap n1(CountMapMeta{1, k, 1, X});
    for (long w = 1; w <= X; ++w) {
      std::vector<Int> key(static_cast<std::size_t>(k));
      for (int j = 1; j <= k; ++j)
        key[static_cast<std::size_t>(j) - 1] = shiftpoly::nu_eval(j, Int(w), h);
      n1.add(PowerSumVec(std::move(key)), 1);
    }
    std::map<int, CountMap> memo;
    std::function<const CountMap&(int)> build = [&](int ss) -> const CountMap& {
      auto it = memo.find(ss);
      if (it != memo.end()) return it->second;
      CountMap built = ss == 1 ? n1
                               : convolve(build(ss - ss / 2), build(ss / 2),
                                          budget, threads);
      return memo.emplace(ss, std::move(built)).first->second;
    };
    const CountMap& nr = build(r);
    E = combine_maps(nr, nr, -1, budget, threads);
  }

  return correlate(D, E, HTuple::zeros(k), threads);
}

namespace {

// Shared engine for the near-diagonal counts: pairs of s-tuples over [lo,hi]
// whose first m power-sum coordinates differ by at most t_j.
Int count_box_window(int s, int m, long lo, long hi, const std::vector<Int>& t,
                     const Budget& budget, int threads) {
  if (m == 0) {
    Int out;
    mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(hi - lo + 1),
                  static_cast<unsigned long>(2 * s));
    return out;
  }
  CountMap r = rep_count_map(s, m, lo, hi, budget, threads);
  std::vector<const PowerSumVec*> keys = r.sorted_keys();
  const std::size_t n = keys.size();
  std::vector<const Int*> mult(n);
  for (std::size_t i = 0; i < n; ++i) mult[i] = &r.get(*keys[i]);

  const Int& t1 = t[0];
  // Exact scan cost: total size of the first-coordinate windows.
  {
    Int cost = 0;
    std::size_t wlo = 0, whi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Int& u1 = keys[i]->v[0];
      while (wlo < n && keys[wlo]->v[0] < u1 - t1) ++wlo;
      if (whi < wlo) whi = wlo;
      while (whi < n && keys[whi]->v[0] <= u1 + t1) ++whi;
      cost += static_cast<unsigned long>(whi - wlo);
    }
    check_enum_budget(cost, budget, "near-diagonal window scan");
  }

  std::uint64_t groups = std::min<std::uint64_t>(n, 256);
  std::vector<Int> partial = parallel_groups<Int>(
      groups, threads, [&](std::uint64_t g) {
        Int acc = 0;
        std::size_t begin = n * g / groups;
        std::size_t end = n * (g + 1) / groups;
        if (begin >= end) return acc;
        // initial window for the first u in this group, then slide
        auto first_ge = [&](const Int& bound) {
          std::size_t a = 0, b = n;
          while (a < b) {
            std::size_t mid = (a + b) / 2;
            if (keys[mid]->v[0] < bound) a = mid + 1; else b = mid;
          }
          return a;
        };
        std::size_t wlo = first_ge(keys[begin]->v[0] - t1);
        std::size_t whi = first_ge(keys[begin]->v[0] + t1 + 1);
        for (std::size_t i = begin; i < end; ++i) {
          const PowerSumVec& u = *keys[i];
          while (wlo < n && keys[wlo]->v[0] < u.v[0] - t1) ++wlo;
          if (whi < wlo) whi = wlo;
          while (whi < n && keys[whi]->v[0] <= u.v[0] + t1) ++whi;
          for (std::size_t v = wlo; v < whi; ++v) {
            const PowerSumVec& w = *keys[v];
            bool ok = true;
            for (std::size_t j = 1; j < t.size(); ++j) {
              Int d = u.v[j] - w.v[j];
              if (d > t[j] || d < -t[j]) { ok = false; break; }
            }
            if (ok) acc += *mult[i] * *mult[v];
          }
        }
        return acc;
      });
  Int total = 0;
  for (const Int& p : partial) total += p;
  return total;
}

}  // namespace

Int count_inequality_omega1(int s, int k, long X, const Budget& budget,
                            int threads) {
  if (s < 1 || k < 1 || X < 1)
    throw invalid_error("count_inequality_omega1: bad parameters");
  std::vector<Int> t(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j)
    t[static_cast<std::size_t>(j) - 1] = Int(s) * pow_int(X, j - 1);
  return count_box_window(s, k, 1, X, t, budget, threads);
}

Int count_inequality_omega2(int s, int k, long X, const Budget& budget,
                            int threads) {
  if (s < 1 || k < 1 || X < 1)
    throw invalid_error("count_inequality_omega2: bad parameters");
  // reduced box edge floor(X^{1-1/k}) = floor((X^{k-1})^{1/k}), exactly
  Int edge;
  {
    Int p = pow_int(X, k - 1);
    mpz_root(edge.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(k));
  }
  long Y = std::max(1L, static_cast<long>(edge.get_si()));
  std::vector<Int> t(static_cast<std::size_t>(k - 1));
  for (int j = 1; j <= k - 1; ++j)
    t[static_cast<std::size_t>(j) - 1] = Int(s) * pow_int(X, j - 1);
  return count_box_window(s, k - 1, 1, Y, t, budget, threads);
}

CountOutcome count_system(const SystemParams& p, Method method,
                          const Budget& budget, int threads,
                          const std::string& cache_dir) {
  validate(p);
  auto t0 = std::chrono::steady_clock::now();
  CountOutcome out;
  auto finish = [&](Int count, const char* used) {
    out.count = std::move(count);
    out.method_used = used;
    out.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
  };

  switch (method) {
    case Method::Brute:
      return finish(brute_force_count(p, budget, threads), "brute");
    case Method::Mitm:
      return finish(mitm_count(p, budget, threads, cache_dir), "mitm");
    case Method::Auto:
      try {
        return finish(mitm_count(p, budget, threads, cache_dir), "mitm");
      } catch (const budget_error&) {
        Int states = pow_int(p.X, 2 * p.s);
        if (states <= Int(static_cast<unsigned long>(budget.max_enumeration)))
          return finish(brute_force_count(p, budget, threads), "brute");
        throw;
      }
  }
  throw invalid_error("count_system: unknown method");
}

LadderResult run_ladder(int s, int k, const HTuple& h,
                        const std::vector<long>& xs, Method method,
                        const Budget& budget, int threads,
                        const std::string& cache_dir) {
  if (xs.empty()) throw invalid_error("run_ladder: empty X list");
  LadderResult out;
  out.s = s;
  out.k = k;
  out.h = h;
  for (long X : xs) {
    LadderPoint pt;
    pt.X = X;
    try {
      CountOutcome c = count_system(SystemParams{s, k, X, h}, method, budget,
                                    threads, cache_dir);
      pt.count = std::move(c.count);
      pt.method = c.method_used;
      pt.seconds = c.seconds;
      pt.ok = true;
    } catch (const budget_error& e) {
      pt.ok = false;
      pt.error = e.what();
    }
    out.points.push_back(std::move(pt));
  }
  return out;
}

}  // namespace vinsys::counting
