#include "vinsys/core.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace vinsys {

HTuple HTuple::of(std::vector<long> values) {
  std::vector<Int> h;
  h.reserve(values.size());
  for (long v : values) h.emplace_back(v);
  return HTuple(std::move(h));
}

const Int& HTuple::at(int j) const {
  if (j < 1 || j > k()) throw invalid_error("shift index out of range");
  return h[static_cast<std::size_t>(j) - 1];
}

bool HTuple::is_zero() const {
  for (const Int& v : h)
    if (v != 0) return false;
  return true;
}

std::optional<int> HTuple::smallest_nonzero_index() const {
  for (int j = 1; j <= k(); ++j)
    if (h[static_cast<std::size_t>(j) - 1] != 0) return j;
  return std::nullopt;
}

int HTuple::zero_count() const {
  int t = 0;
  for (const Int& v : h)
    if (v == 0) ++t;
  return t;
}

PowerSumVec power_sum_vector(const std::vector<Int>& x, int k) {
  if (k < 1) throw invalid_error("power_sum_vector: k must be >= 1");
  std::vector<Int> v(static_cast<std::size_t>(k));
  Int p;
  for (const Int& xi : x) {
    p = 1;
    for (int j = 0; j < k; ++j) {
      p *= xi;
      v[static_cast<std::size_t>(j)] += p;
    }
  }
  return PowerSumVec(std::move(v));
}

PowerSumVec power_sum_vector(const std::vector<long>& x, int k) {
  std::vector<Int> xi;
  xi.reserve(x.size());
  for (long e : x) xi.emplace_back(e);
  return power_sum_vector(xi, k);
}

static void check_same_k(int a, int b, const char* what) {
  if (a != b) throw invalid_error(std::string(what) + ": dimension mismatch");
}

PowerSumVec vec_add(const PowerSumVec& a, const PowerSumVec& b) {
  check_same_k(a.k(), b.k(), "vec_add");
  PowerSumVec r = a;
  for (int i = 0; i < a.k(); ++i) r.v[static_cast<std::size_t>(i)] += b.v[static_cast<std::size_t>(i)];
  return r;
}

PowerSumVec vec_sub(const PowerSumVec& a, const PowerSumVec& b) {
  check_same_k(a.k(), b.k(), "vec_sub");
  PowerSumVec r = a;
  for (int i = 0; i < a.k(); ++i) r.v[static_cast<std::size_t>(i)] -= b.v[static_cast<std::size_t>(i)];
  return r;
}

PowerSumVec vec_add(const PowerSumVec& a, const HTuple& h) {
  check_same_k(a.k(), h.k(), "vec_add");
  PowerSumVec r = a;
  for (int i = 0; i < a.k(); ++i) r.v[static_cast<std::size_t>(i)] += h.h[static_cast<std::size_t>(i)];
  return r;
}

PowerSumVec vec_sub(const PowerSumVec& a, const HTuple& h) {
  check_same_k(a.k(), h.k(), "vec_sub");
  PowerSumVec r = a;
  for (int i = 0; i < a.k(); ++i) r.v[static_cast<std::size_t>(i)] -= h.h[static_cast<std::size_t>(i)];
  return r;
}

bool lex_less(const PowerSumVec& a, const PowerSumVec& b) {
  check_same_k(a.k(), b.k(), "lex_less");
  for (int i = 0; i < a.k(); ++i) {
    int c = cmp(a.v[static_cast<std::size_t>(i)], b.v[static_cast<std::size_t>(i)]);
    if (c != 0) return c < 0;
  }
  return false;
}

std::size_t PsvHash::operator()(const PowerSumVec& v) const {
  // FNV-style mix over all limbs; components are usually 1-2 limbs so this
  // stays cheap while still separating nearby vectors.
  std::size_t h = 1469598103934665603ull;
  for (const Int& c : v.v) {
    const __mpz_struct* z = c.get_mpz_t();
    int sz = z->_mp_size;
    h = (h ^ static_cast<std::size_t>(sz)) * 1099511628211ull;
    int n = sz < 0 ? -sz : sz;
    for (int i = 0; i < n; ++i) {
      h = (h ^ static_cast<std::size_t>(z->_mp_d[i])) * 1099511628211ull;
    }
  }
  return h;
}

void check_entry_budget(const Int& estimate, const Budget& b, const char* what) {
  Int lim(static_cast<unsigned long>(b.max_entries));
  if (estimate > lim)
    throw budget_error(std::string(what) + ": entry budget exceeded", estimate, lim);
}

void check_enum_budget(const Int& estimate, const Budget& b, const char* what) {
  Int lim(static_cast<unsigned long>(b.max_enumeration));
  if (estimate > lim)
    throw budget_error(std::string(what) + ": enumeration budget exceeded", estimate, lim);
}

void CountMap::add(const PowerSumVec& key, const Int& mult) {
  if (mult == 0) return;
  Int& slot = table_[key];
  slot += mult;
  if (slot == 0) table_.erase(key);  // keeps "absent means zero" canonical
}

const Int& CountMap::get(const PowerSumVec& key) const {
  static const Int zero(0);
  auto it = table_.find(key);
  return it == table_.end() ? zero : it->second;
}

Int CountMap::mass() const {
  Int m = 0;
  for (const auto& [key, mult] : table_) m += mult;
  return m;
}

void CountMap::merge(const CountMap& other) {
  if (meta_.k != other.meta_.k)
    throw invalid_error("CountMap::merge: dimension mismatch");
  for (const auto& [key, mult] : other.table_) add(key, mult);
}

std::vector<const PowerSumVec*> CountMap::sorted_keys() const {
  std::vector<const PowerSumVec*> keys;
  keys.reserve(table_.size());
  for (const auto& [key, mult] : table_) keys.push_back(&key);
  std::sort(keys.begin(), keys.end(),
            [](const PowerSumVec* a, const PowerSumVec* b) { return lex_less(*a, *b); });
  return keys;
}

namespace {
constexpr int kCacheFormatVersion = 1;
}

void CountMap::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open for writing: " + path);
  nlohmann::json meta = {
      {"format_version", kCacheFormatVersion},
      {"s", meta_.s},
      {"k", meta_.k},
      {"X", meta_.hi},
      {"range", {meta_.lo, meta_.hi}},
  };
  out << meta.dump() << '\n';
  for (const PowerSumVec* key : sorted_keys()) {
    for (int i = 0; i < key->k(); ++i) {
      out << key->v[static_cast<std::size_t>(i)].get_str() << ',';
    }
    out << get(*key).get_str() << '\n';
  }
  if (!out) throw io_error("write failed: " + path);
}

CountMap CountMap::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty cache file: " + path);
  nlohmann::json meta = nlohmann::json::parse(line, nullptr, false);
  if (meta.is_discarded() || !meta.is_object())
    throw io_error("bad cache meta line: " + path);
  if (meta.value("format_version", -1) != kCacheFormatVersion)
    throw io_error("unsupported cache format_version: " + path);

  CountMapMeta m;
  m.s = meta.at("s").get<int>();
  m.k = meta.at("k").get<int>();
  auto range = meta.at("range");
  m.lo = range.at(0).get<long>();
  m.hi = range.at(1).get<long>();
  if (m.k < 1) throw io_error("bad cache meta (k): " + path);

  CountMap map(m);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<Int> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string tok = line.substr(start, comma == std::string::npos
                                               ? std::string::npos
                                               : comma - start);
      Int value;
      if (mpz_set_str(value.get_mpz_t(), tok.c_str(), 10) != 0)
        throw io_error("bad integer at " + path + ":" + std::to_string(lineno));
      fields.push_back(std::move(value));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<int>(fields.size()) != m.k + 1)
      throw io_error("bad field count at " + path + ":" + std::to_string(lineno));
    Int mult = std::move(fields.back());
    fields.pop_back();
    if (mult < 0) throw io_error("negative multiplicity at " + path + ":" + std::to_string(lineno));
    map.add(PowerSumVec(std::move(fields)), mult);
  }
  return map;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

void run_groups(std::uint64_t groups, int threads,
                const std::function<void(std::uint64_t)>& fn) {
  if (groups == 0) return;
  int t = resolve_threads(threads);
  if (t > static_cast<int>(groups)) t = static_cast<int>(groups);
  if (t <= 1) {
    for (std::uint64_t g = 0; g < groups; ++g) fn(g);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    while (true) {
      std::uint64_t g = next.fetch_add(1);
      if (g >= groups) return;
      try {
        fn(g);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

std::string version_string() { return "0.1.0"; }

}  // namespace vinsys
