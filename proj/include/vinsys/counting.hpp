#pragma once

// Exact solution counting for the shifted power-sum system
//
//   sum_{i=1}^{s} (x_i^j - y_i^j) = h_j   (1 <= j <= k),   x, y in [1,X]^s.
//
// Counters: a direct odometer (the oracle everything else is checked
// against), a meet-in-the-middle path through sparse representation maps
// (count how many s-tuples hit each power-sum vector, then correlate), the
// distinct-variable variant, the mixed system whose right-hand side runs over
// shift profiles nu_j, and the two near-diagonal inequality counts.

#include <functional>
#include <string>
#include <vector>

#include "vinsys/core.hpp"

namespace vinsys::counting {

struct SystemParams {
  int s = 1;
  int k = 1;
  long X = 1;
  HTuple h;
};

void validate(const SystemParams& p);

Int brute_force_count(const SystemParams& p, const Budget& budget, int threads);

// Multiplicity map of s-tuples over [lo,hi] by power-sum vector, built by
// halving: rep(s) = convolve(rep(ceil(s/2)), rep(floor(s/2))). When cache_dir
// is nonempty, maps are persisted there and reloaded on later calls; stale or
// mismatched cache files are ignored and rebuilt.
CountMap rep_count_map(int s, int k, long lo, long hi, const Budget& budget,
                       int threads, const std::string& cache_dir = {});

// Pointwise sparse convolution: result(w) = sum_{u+v=w} a(u) b(v).
CountMap convolve(const CountMap& a, const CountMap& b, const Budget& budget,
                  int threads);

// sum_w a(w + h) * b(w). With a = b = rep(s) this is the system count.
Int correlate(const CountMap& a, const CountMap& b, const HTuple& h,
              int threads);

Int mitm_count(const SystemParams& p, const Budget& budget, int threads,
               const std::string& cache_dir = {});

// Solutions with s = k where no x_i equals any y_m.
Int count_distinct(int k, const HTuple& h, long X, const Budget& budget,
                   int threads);

// Solutions of
//   sum_{i<=u} (x_i^j - y_i^j) = sum_{m<=r} (nu_j(w_m;h) - nu_j(z_m;h)),
// 1 <= j <= k, with x,y in [1,2X]^u and w,z in [1,X]^r. One of u, r may be 0.
Int count_mixed_system(int u, int r, int k, const HTuple& h, long X,
                       const Budget& budget, int threads);

// Near-diagonal counts: pairs x,y in [1,X]^s with
//   |sum (x_i^j - y_i^j)| <= s X^{j-1}  for 1 <= j <= k.
Int count_inequality_omega1(int s, int k, long X, const Budget& budget,
                            int threads);
// Same thresholds for j <= k-1 only, over the reduced box [1, floor(X^{1-1/k})];
// the degree-k constraint is automatic there.
Int count_inequality_omega2(int s, int k, long X, const Budget& budget,
                            int threads);

// Enumerates solutions in lexicographic (x, y) order, single-threaded.
void for_each_solution(
    const SystemParams& p, const Budget& budget,
    const std::function<void(const std::vector<long>&, const std::vector<long>&)>& fn);

enum class Method { Auto, Brute, Mitm };

struct CountOutcome {
  Int count;
  std::string method_used;  // "brute" or "mitm"
  double seconds = 0;
};

// Auto prefers the correlation path and falls back to the odometer when the
// map budget refuses; explicit methods propagate their own refusals.
CountOutcome count_system(const SystemParams& p, Method method,
                          const Budget& budget, int threads,
                          const std::string& cache_dir = {});

struct LadderPoint {
  long X = 0;
  Int count;
  std::string method;
  double seconds = 0;
  bool ok = false;
  std::string error;
};

struct LadderResult {
  int s = 0;
  int k = 0;
  HTuple h;
  std::vector<LadderPoint> points;
};

// Runs the count at each X; budget refusals mark the point and the ladder
// continues.
LadderResult run_ladder(int s, int k, const HTuple& h,
                        const std::vector<long>& xs, Method method,
                        const Budget& budget, int threads,
                        const std::string& cache_dir = {});

}  // namespace vinsys::counting
