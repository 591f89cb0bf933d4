#pragma once

// Exact-arithmetic plumbing shared by every module: shift tuples, power-sum
// vectors, sparse multiplicity maps and their on-disk format, budget
// guardrails, and a deterministic work-group scheduler.

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

namespace vinsys {

using Int = mpz_class;
using Rat = mpq_class;

// Error taxonomy. These map 1:1 onto C API status codes and CLI exit codes,
// so keep the set small and the meanings stable.
struct invalid_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct budget_error : std::runtime_error {
  Int estimate;  // predicted cost (entries or visited states)
  Int limit;
  budget_error(const std::string& what, Int est, Int lim)
      : std::runtime_error(what + " (estimated " + est.get_str() +
                           ", budget " + lim.get_str() + ")"),
        estimate(std::move(est)),
        limit(std::move(lim)) {}
};

struct tolerance_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shift tuple h = (h_1, ..., h_k). Degree index j is 1-based throughout the
// codebase; h.at(j) is the shift attached to the degree-j equation.
struct HTuple {
  std::vector<Int> h;

  HTuple() = default;
  explicit HTuple(std::vector<Int> values) : h(std::move(values)) {}
  static HTuple zeros(int k) { return HTuple(std::vector<Int>(k)); }
  static HTuple of(std::vector<long> values);

  int k() const { return static_cast<int>(h.size()); }
  const Int& at(int j) const;  // 1-based, throws invalid_error out of range

  bool is_zero() const;
  // l(h): the smallest j with h_j != 0, or nullopt for the zero tuple.
  std::optional<int> smallest_nonzero_index() const;
  // t: how many components vanish (drives the vanishing criterion).
  int zero_count() const;
  bool operator==(const HTuple& o) const { return h == o.h; }
};

// v = (sum x_i, sum x_i^2, ..., sum x_i^k); v[j-1] holds the degree-j sum.
struct PowerSumVec {
  std::vector<Int> v;

  PowerSumVec() = default;
  explicit PowerSumVec(std::vector<Int> values) : v(std::move(values)) {}
  int k() const { return static_cast<int>(v.size()); }
  bool operator==(const PowerSumVec& o) const { return v == o.v; }
};

PowerSumVec power_sum_vector(const std::vector<Int>& x, int k);
PowerSumVec power_sum_vector(const std::vector<long>& x, int k);
PowerSumVec vec_add(const PowerSumVec& a, const PowerSumVec& b);
PowerSumVec vec_sub(const PowerSumVec& a, const PowerSumVec& b);
// Shift by a tuple: v + h and v - h, componentwise.
PowerSumVec vec_add(const PowerSumVec& a, const HTuple& h);
PowerSumVec vec_sub(const PowerSumVec& a, const HTuple& h);

bool lex_less(const PowerSumVec& a, const PowerSumVec& b);

struct PsvHash {
  std::size_t operator()(const PowerSumVec& v) const;
};

struct Budget {
  // Sparse-map guardrail: refuse builds whose predicted entry count exceeds
  // this. Default matches the documented desk-scale limit.
  std::uint64_t max_entries = 50'000'000;
  // Enumeration guardrail: odometers, grids and window scans refuse when the
  // predicted number of visited states exceeds this.
  std::uint64_t max_enumeration = 2'000'000'000;
};

void check_entry_budget(const Int& estimate, const Budget& b, const char* what);
void check_enum_budget(const Int& estimate, const Budget& b, const char* what);

struct CountMapMeta {
  int s = 0;       // how many variables were summed per tuple
  int k = 0;       // vector dimension
  long lo = 1;     // tuple entries range over [lo, hi]
  long hi = 0;
};

// Sparse multiplicity map: power-sum vector -> number of tuples realizing it.
// Multiplicities are exact and non-negative; absent keys mean zero.
class CountMap {
 public:
  using Table = std::unordered_map<PowerSumVec, Int, PsvHash>;

  CountMap() = default;
  explicit CountMap(CountMapMeta meta) : meta_(meta) {}

  const CountMapMeta& meta() const { return meta_; }
  CountMapMeta& meta() { return meta_; }
  std::size_t size() const { return table_.size(); }
  bool empty() const { return table_.empty(); }

  void add(const PowerSumVec& key, const Int& mult);
  // Zero for absent keys; never inserts.
  const Int& get(const PowerSumVec& key) const;

  Table::const_iterator begin() const { return table_.begin(); }
  Table::const_iterator end() const { return table_.end(); }

  // Total multiplicity. Equals (hi-lo+1)^s for any map built from full
  // enumeration of s-tuples; convolution multiplies masses.
  Int mass() const;

  // Pointwise addition of multiplicities; dimensions must match and the
  // receiver's meta is kept (partial builds of one map share its meta).
  void merge(const CountMap& other);

  std::vector<const PowerSumVec*> sorted_keys() const;

  // On-disk format: first line is a JSON meta object, then one line per key,
  // "v_1,...,v_k,count" in lexicographic key order. ASCII decimal throughout.
  void write_file(const std::string& path) const;
  static CountMap read_file(const std::string& path);

 private:
  CountMapMeta meta_;
  Table table_;
};

// --- deterministic parallel groups -----------------------------------------
//
// Work is split into `groups` units whose boundaries depend only on the input
// (never on the thread count). Each group is computed independently and the
// caller reduces results in group order, so both exact and floating-point
// reductions come out bit-identical no matter how many workers ran.

int resolve_threads(int requested);  // <= 0 means hardware concurrency

namespace detail {
void run_groups(std::uint64_t groups, int threads,
                const std::function<void(std::uint64_t)>& fn);
}

template <class R, class Fn>
std::vector<R> parallel_groups(std::uint64_t groups, int threads, Fn fn) {
  // Exact return type required: a GMP expression template would dangle here.
  static_assert(std::is_same_v<std::invoke_result_t<Fn, std::uint64_t>, R>,
                "group functor must return R exactly");
  std::vector<R> out(groups);
  detail::run_groups(groups, threads,
                     [&](std::uint64_t g) { out[g] = fn(g); });
  return out;
}

std::string version_string();

}  // namespace vinsys
