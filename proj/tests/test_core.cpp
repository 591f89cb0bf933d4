#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "vinsys/core.hpp"

using namespace vinsys;

TEST_CASE("shift tuple basics") {
  HTuple h = HTuple::of({1, 0, -3});
  CHECK(h.k() == 3);
  CHECK(h.at(1) == 1);
  CHECK(h.at(3) == -3);
  CHECK_THROWS_AS(h.at(0), invalid_error);
  CHECK_THROWS_AS(h.at(4), invalid_error);
  CHECK(!h.is_zero());
  CHECK(h.smallest_nonzero_index().value() == 1);
  CHECK(h.zero_count() == 1);

  HTuple z = HTuple::zeros(2);
  CHECK(z.is_zero());
  CHECK(!z.smallest_nonzero_index().has_value());
  CHECK(z.zero_count() == 2);

  HTuple g = HTuple::of({0, 0, 5});
  CHECK(g.smallest_nonzero_index().value() == 3);
}

TEST_CASE("power-sum vectors") {
  std::vector<long> x{2, 3};
  PowerSumVec v = power_sum_vector(x, 3);
  CHECK(v.v == std::vector<Int>{5, 13, 35});

  PowerSumVec w = power_sum_vector(std::vector<Int>{Int(-1), Int(4)}, 2);
  CHECK(w.v == std::vector<Int>{3, 17});

  CHECK(vec_add(v, power_sum_vector(std::vector<long>{1}, 3)).v ==
        std::vector<Int>{6, 14, 36});
  CHECK(vec_sub(v, HTuple::of({1, 3, 5})).v == std::vector<Int>{4, 10, 30});
  CHECK(vec_add(vec_sub(v, HTuple::of({1, 3, 5})), HTuple::of({1, 3, 5})) == v);

  CHECK(lex_less(PowerSumVec({Int(1), Int(9)}), PowerSumVec({Int(2), Int(0)})));
  CHECK(lex_less(PowerSumVec({Int(1), Int(0)}), PowerSumVec({Int(1), Int(9)})));
  CHECK(!lex_less(v, v));
}

TEST_CASE("count map add/get/mass/merge") {
  CountMap m(CountMapMeta{1, 2, 1, 3});
  PowerSumVec a({Int(1), Int(1)}), b({Int(2), Int(4)});
  m.add(a, 2);
  m.add(b, 1);
  m.add(a, 3);
  CHECK(m.get(a) == 5);
  CHECK(m.get(b) == 1);
  CHECK(m.get(PowerSumVec({Int(9), Int(9)})) == 0);
  CHECK(m.size() == 2);
  CHECK(m.mass() == 6);

  // adding a negative multiplicity down to zero erases the slot
  m.add(b, -1);
  CHECK(m.size() == 1);
  CHECK(m.get(b) == 0);

  CountMap n(CountMapMeta{1, 2, 1, 3});
  n.add(a, 1);
  n.add(b, 7);
  m.merge(n);
  CHECK(m.get(a) == 6);
  CHECK(m.get(b) == 7);
  CHECK(m.mass() == 13);

  CountMap bad(CountMapMeta{1, 3, 1, 3});
  CHECK_THROWS_AS(m.merge(bad), invalid_error);
}

TEST_CASE("count map file roundtrip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "vinsys_core_test";
  fs::create_directories(dir);
  std::string path = (dir / "roundtrip.cmap").string();

  CountMap m(CountMapMeta{2, 2, 1, 5});
  m.add(PowerSumVec({Int(2), Int(2)}), 1);
  m.add(PowerSumVec({Int(3), Int(5)}), 2);
  m.add(PowerSumVec({Int("123456789012345678901234567890"), Int(-7)}), 4);
  m.write_file(path);

  CountMap r = CountMap::read_file(path);
  CHECK(r.meta().s == 2);
  CHECK(r.meta().k == 2);
  CHECK(r.meta().lo == 1);
  CHECK(r.meta().hi == 5);
  CHECK(r.size() == m.size());
  for (const auto& [key, mult] : m) CHECK(r.get(key) == mult);

  SUBCASE("unsupported version is rejected") {
    std::ofstream out(path);
    out << "{\"format_version\":99,\"s\":1,\"k\":1,\"range\":[1,1]}\n";
    out.close();
    CHECK_THROWS_AS(CountMap::read_file(path), io_error);
  }
  SUBCASE("missing file is an io error") {
    CHECK_THROWS_AS(CountMap::read_file((dir / "nope.cmap").string()), io_error);
  }
  SUBCASE("garbage is rejected") {
    std::ofstream out(path);
    out << "not a map\n";
    out.close();
    CHECK_THROWS_AS(CountMap::read_file(path), io_error);
  }
}

TEST_CASE("budget checks") {
  Budget b;
  b.max_entries = 100;
  b.max_enumeration = 1000;
  CHECK_NOTHROW(check_entry_budget(Int(100), b, "t"));
  CHECK_THROWS_AS(check_entry_budget(Int(101), b, "t"), budget_error);
  CHECK_NOTHROW(check_enum_budget(Int(1000), b, "t"));
  CHECK_THROWS_AS(check_enum_budget(Int(1001), b, "t"), budget_error);
  try {
    check_enum_budget(Int(5000), b, "window scan");
    CHECK(false);
  } catch (const budget_error& e) {
    CHECK(e.estimate == 5000);
    CHECK(e.limit == 1000);
    CHECK(std::string(e.what()).find("window scan") != std::string::npos);
  }
}

TEST_CASE("deterministic parallel groups") {
  // group results must land in index order regardless of thread count
  for (int threads : {1, 2, 4, 7}) {
    std::vector<Int> got = parallel_groups<Int>(
        64, threads, [](std::uint64_t g) -> Int { return Int(g) * Int(g) + 1; });
    REQUIRE(got.size() == 64);
    for (std::uint64_t g = 0; g < 64; ++g) CHECK(got[g] == Int(g) * Int(g) + 1);
  }

  // every group runs exactly once
  std::atomic<int> runs{0};
  detail::run_groups(37, 4, [&](std::uint64_t) { ++runs; });
  CHECK(runs.load() == 37);

  // zero groups is a no-op
  detail::run_groups(0, 4, [&](std::uint64_t) { CHECK(false); });

  // exceptions from workers surface to the caller
  CHECK_THROWS_AS(detail::run_groups(8, 3,
                                     [&](std::uint64_t g) {
                                       if (g == 5) throw invalid_error("boom");
                                     }),
                  invalid_error);
}

TEST_CASE("resolve_threads") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(1) == 1);
  CHECK(resolve_threads(0) >= 1);
  CHECK(resolve_threads(-2) >= 1);
}

TEST_CASE("version string") {
  CHECK(!version_string().empty());
}
