// Exercises the shared library strictly through the C interface: this file
// includes vinsys.h and nothing from include/vinsys/.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "vinsys.h"

using json = nlohmann::json;

namespace {

std::string last_error() {
  char buf[4096];
  vinsys_last_error(buf, sizeof buf);
  return std::string(buf);
}

// Count helper returning the decimal string; fails the test on error.
std::string count_str(const vinsys_config* cfg, int s, int k, long long X,
                      std::vector<long long> h, const char* method = "auto") {
  char out[256];
  char used[32];
  double secs = 0;
  const int rc = vinsys_count_system(cfg, s, k, X, h.data(), method, out,
                                     sizeof out, used, sizeof used, &secs);
  INFO("last error: " << last_error());
  REQUIRE(rc == VINSYS_OK);
  return std::string(out);
}

// Note: callers must compute rc in its own statement first; passing the
// library call inline would race the buffer read (evaluation order of
// function arguments is unspecified).
json call_json(int rc, const char* body) {
  INFO("last error: " << last_error());
  REQUIRE(rc == VINSYS_OK);
  return json::parse(body);
}

}  // namespace

TEST_CASE("config defaults and version") {
  vinsys_config cfg;
  vinsys_config_init(&cfg);
  CHECK(cfg.max_entries == 50000000u);
  CHECK(cfg.max_enumeration == 2000000000u);
  CHECK(cfg.threads == 0);
  CHECK(cfg.seed == 12345u);
  CHECK(cfg.tol == doctest::Approx(1e-6));
  CHECK(cfg.mc_samples == 100000u);
  CHECK(cfg.cache_dir == nullptr);

  const char* v = vinsys_version();
  REQUIRE(v != nullptr);
  CHECK(std::strlen(v) > 0);
  // Null config pointer is accepted everywhere and means "defaults".
  vinsys_config_init(nullptr);
}

TEST_CASE("count_system pinned values across methods") {
  vinsys_config cfg;
  vinsys_config_init(&cfg);

  CHECK(count_str(&cfg, 2, 2, 10, {0, 0}) == "190");
  CHECK(count_str(&cfg, 1, 2, 5, {1, 3}) == "1");
  CHECK(count_str(&cfg, 2, 3, 8, {0, 5, 0}) == "0");
  CHECK(count_str(nullptr, 2, 2, 10, {0, 0}) == "190");

  for (const char* m : {"brute", "mitm", "dft"}) {
    CHECK(count_str(&cfg, 2, 2, 10, {0, 0}, m) == "190");
    CHECK(count_str(&cfg, 1, 2, 5, {1, 3}, m) == "1");
  }

  char out[256];
  char used[32];
  double secs = -1;
  long long h[2] = {0, 0};
  REQUIRE(vinsys_count_system(&cfg, 2, 2, 10, h, "mitm", out, sizeof out,
                              used, sizeof used, &secs) == VINSYS_OK);
  CHECK(std::string(used) == "mitm");
  CHECK(secs >= 0);
  // method_out and seconds are optional.
  REQUIRE(vinsys_count_system(&cfg, 2, 2, 10, h, "auto", out, sizeof out,
                              nullptr, 0, nullptr) == VINSYS_OK);
  CHECK(std::string(out) == "190");
}

TEST_CASE("error paths: buffer, invalid, budget, unknown method") {
  vinsys_config cfg;
  vinsys_config_init(&cfg);
  long long h[2] = {0, 0};
  char tiny[2];

  SUBCASE("buffer too small reports needed size, retry succeeds") {
    const int rc = vinsys_count_system(&cfg, 2, 2, 10, h, "auto", tiny,
                                       sizeof tiny, nullptr, 0, nullptr);
    CHECK(rc == VINSYS_BUFFER);
    CHECK(last_error().find("4") != std::string::npos);  // "190" needs 4
    char out[16];
    CHECK(vinsys_count_system(&cfg, 2, 2, 10, h, "auto", out, sizeof out,
                              nullptr, 0, nullptr) == VINSYS_OK);
    CHECK(std::string(out) == "190");
  }

  SUBCASE("invalid parameters") {
    char out[64];
    CHECK(vinsys_count_system(&cfg, 0, 2, 10, h, "auto", out, sizeof out,
                              nullptr, 0, nullptr) == VINSYS_INVALID);
    CHECK(!last_error().empty());
    CHECK(vinsys_count_system(&cfg, 2, 2, 10, nullptr, "auto", out,
                              sizeof out, nullptr, 0,
                              nullptr) == VINSYS_INVALID);
    CHECK(vinsys_count_system(&cfg, 2, 2, 10, h, "nope", out, sizeof out,
                              nullptr, 0, nullptr) == VINSYS_INVALID);
    CHECK(vinsys_count_system(&cfg, 2, 2, 10, h, nullptr, out, sizeof out,
                              nullptr, 0, nullptr) == VINSYS_INVALID);
    CHECK(vinsys_count_system(&cfg, 2, 2, 10, h, "auto", nullptr, 0, nullptr,
                              0, nullptr) == VINSYS_INVALID);
  }

  SUBCASE("budget refusal") {
    vinsys_config small = cfg;
    small.max_entries = 1;
    small.max_enumeration = 1;
    char out[64];
    CHECK(vinsys_count_system(&small, 3, 3, 50, nullptr, "auto", out,
                              sizeof out, nullptr, 0,
                              nullptr) == VINSYS_INVALID);  // null h first
    long long h3[3] = {0, 0, 0};
    CHECK(vinsys_count_system(&small, 3, 3, 50, h3, "brute", out, sizeof out,
                              nullptr, 0, nullptr) == VINSYS_BUDGET);
    CHECK(!last_error().empty());
  }
}

TEST_CASE("distinct, mixed, and near-diagonal counters") {
  vinsys_config cfg;
  vinsys_config_init(&cfg);
  char out[128];

  // Distinct-coordinate variant stays below the full count.
  long long h2[2] = {0, 0};
  REQUIRE(vinsys_count_distinct(&cfg, 2, 4, h2, out, sizeof out) ==
          VINSYS_OK);
  const long distinct = std::stol(out);
  CHECK(distinct >= 0);

  // Mixed system with r = 0 is the plain system over [1, 2X].
  REQUIRE(vinsys_count_mixed(&cfg, 2, 0, 2, 5, h2, out, sizeof out) ==
          VINSYS_OK);
  char plain[128];
  char used[32];
  REQUIRE(vinsys_count_system(&cfg, 2, 2, 10, h2, "auto", plain, sizeof plain,
                              used, sizeof used, nullptr) == VINSYS_OK);
  CHECK(std::string(out) == std::string(plain));

  // Near-diagonal counts, pinned small values.
  REQUIRE(vinsys_count_omega(&cfg, 1, 1, 2, 3, out, sizeof out) == VINSYS_OK);
  CHECK(std::string(out) == "5");
  REQUIRE(vinsys_count_omega(&cfg, 2, 1, 2, 4, out, sizeof out) == VINSYS_OK);
  CHECK(std::string(out) == "4");
  CHECK(vinsys_count_omega(&cfg, 3, 1, 2, 3, out, sizeof out) ==
        VINSYS_INVALID);
}

TEST_CASE("dft moment JSON") {
  vinsys_config cfg;
  vinsys_config_init(&cfg);
  long long h[2] = {0, 0};
  char buf[4096];
  const int rc =
      vinsys_dft_moment(&cfg, 2, 0, 2, 10, 1, h, 1, buf, sizeof buf);
  json j = call_json(rc, buf);
  CHECK(j.at("count").get<std::string>() == "190");
  CHECK(j.at("round_residual").get<double>() < 1e-6);
  CHECK(j.at("grid_sizes").is_array());
}

TEST_CASE("ladder, fit, catalog, fit report") {
  vinsys_config cfg;
  vinsys_config_init(&cfg);
  long long h[2] = {0, 0};
  const long long xs[4] = {5, 10, 20, 40};
  std::vector<char> buf(1 << 16);

  int rc =
      vinsys_run_ladder(&cfg, 2, 2, h, xs, 4, "auto", buf.data(), buf.size());
  json ladder = call_json(rc, buf.data());
  REQUIRE(ladder.at("points").size() == 4);
  std::vector<std::string> counts;
  for (const auto& p : ladder.at("points")) {
    REQUIRE(p.at("ok").get<bool>());
    const long X = p.at("X").get<long>();
    CHECK(p.at("count").get<std::string>() ==
          std::to_string(2 * X * X - X));
    counts.push_back(p.at("count").get<std::string>());
  }

  std::vector<const char*> cptr;
  for (const auto& s : counts) cptr.push_back(s.c_str());
  rc = vinsys_fit_points(xs, cptr.data(), 4, buf.data(), buf.size());
  json fit = call_json(rc, buf.data());
  CHECK(fit.at("slope").get<double>() > 2.0);
  CHECK(fit.at("slope").get<double>() < 2.1);
  CHECK_FALSE(fit.at("identically_zero").get<bool>());

  rc = vinsys_bound_catalog(2, 2, h, buf.data(), buf.size());
  json cat = call_json(rc, buf.data());
  REQUIRE(cat.at("records").size() >= 2);
  bool found_lower = false;
  for (const auto& r : cat.at("records"))
    if (r.at("name") == "diagonal-lower") {
      found_lower = true;
      CHECK(r.at("direction") == "lower");
      CHECK(r.at("exponent") == "2");
    }
  CHECK(found_lower);

  rc = vinsys_fit_report(2, 2, h, xs, cptr.data(), 4, 0.0, buf.data(),
                         buf.size());
  json report = call_json(rc, buf.data());
  CHECK(report.at("slack").get<double>() == doctest::Approx(0.4));
  REQUIRE(!report.at("comparison").empty());
  for (const auto& e : report.at("comparison"))
    CHECK(e.at("verdict") == "consistent");
}

TEST_CASE("exponential sums and arcs") {
  vinsys_config cfg;
  vinsys_config_init(&cfg);
  double out[2];

  const double zero3[3] = {0, 0, 0};
  REQUIRE(vinsys_weyl_sum(&cfg, zero3, 3, 7, out) == VINSYS_OK);
  CHECK(out[0] == doctest::Approx(7.0));
  CHECK(out[1] == doctest::Approx(0.0));

  long long h3[3] = {1, 3, 7};
  REQUIRE(vinsys_shifted_sum(&cfg, zero3, 3, 7, h3, out) == VINSYS_OK);
  CHECK(out[0] == doctest::Approx(7.0));

  double bound = 0;
  REQUIRE(vinsys_kernel_sum(0.0, 9, out, &bound) == VINSYS_OK);
  CHECK(out[0] == doctest::Approx(9.0));
  CHECK(bound >= std::hypot(out[0], out[1]) - 1e-9);
  REQUIRE(vinsys_kernel_sum(0.25, 9, out, nullptr) == VINSYS_OK);

  // q = 1: empty-phase sum is 1. q = 2, k = 1, a = (1): 1 + e(1/2) = 0.
  long long a1[1] = {1};
  REQUIRE(vinsys_complete_sum(1, a1, 1, out) == VINSYS_OK);
  CHECK(out[0] == doctest::Approx(1.0));
  REQUIRE(vinsys_complete_sum(2, a1, 1, out) == VINSYS_OK);
  CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-12));

  const double beta0[1] = {0};
  long long evals = 0;
  REQUIRE(vinsys_oscillatory_integral(beta0, 1, 1e-10, 100000, out,
                                      &evals) == VINSYS_OK);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(evals > 0);

  int cls = 0;
  char name[32];
  REQUIRE(vinsys_classify_point(zero3, 3, 1000, &cls, name, sizeof name) ==
          VINSYS_OK);
  CHECK(cls == 4);
  CHECK(std::string(name) == "core");
  REQUIRE(vinsys_classify_point(zero3, 3, 1000, &cls, nullptr, 0) ==
          VINSYS_OK);

  int in = 0;
  long long q = 0, a = 0;
  REQUIRE(vinsys_major_arc_1d(0.0, 2.0, 3, 1000, &in, &q, &a) == VINSYS_OK);
  CHECK(in == 1);
  CHECK(q == 1);
  CHECK(a == 0);

  long long abox[3] = {-1, -1, -1};
  REQUIRE(vinsys_arc_box(zero3, 3, 2.0, 1000, &in, &q, abox) == VINSYS_OK);
  CHECK(in == 1);
  CHECK(q == 1);
  CHECK(abox[0] == 0);
}

TEST_CASE("singular series, integral, prediction") {
  vinsys_config cfg;
  vinsys_config_init(&cfg);
  std::vector<char> buf(1 << 16);

  long long h1[1] = {0};
  int rc = vinsys_singular_series(&cfg, 1, 1, h1, 20, buf.data(), buf.size());
  json series = call_json(rc, buf.data());
  CHECK(series.at("value").get<double>() == doctest::Approx(1.0));
  CHECK(series.at("per_q").size() == 20);

  const double n0[1] = {0};
  rc = vinsys_singular_integral(&cfg, 1, 1, n0, 100.0, 1e-3, 1000000,
                                buf.data(), buf.size());
  json integral = call_json(rc, buf.data());
  CHECK(integral.at("value").get<double>() ==
        doctest::Approx(1.0).epsilon(1e-3));
  CHECK(integral.at("converged").get<bool>());

  long long h2[2] = {1, 1};
  rc = vinsys_prediction(&cfg, 4, 2, h2, 20, 40, 50.0, 1e-1, 50000000,
                         buf.data(), buf.size());
  json pred = call_json(rc, buf.data());
  CHECK(pred.at("value").get<double>() > 0);
  CHECK(pred.at("scale").get<double>() ==
        doctest::Approx(std::pow(20.0, 5.0)));
  CHECK(pred.at("series").at("value").get<double>() > 0);
  CHECK(pred.at("integral").at("value").get<double>() > 0);
}

TEST_CASE("restricted moment determinism across thread counts") {
  vinsys_config cfg;
  vinsys_config_init(&cfg);
  cfg.mc_samples = 20000;
  std::vector<char> buf(1 << 14);

  long long h2[2] = {0, 0};
  const double box[4] = {0.0, 0.25, 0.0, 0.5};
  cfg.threads = 1;
  REQUIRE(vinsys_restricted_moment(&cfg, 1, 0, 2, 6, 1, h2, 0, 1, box, 0, 0,
                                   buf.data(), buf.size()) == VINSYS_OK);
  const std::string one(buf.data());
  cfg.threads = 4;
  REQUIRE(vinsys_restricted_moment(&cfg, 1, 0, 2, 6, 1, h2, 0, 1, box, 0, 0,
                                   buf.data(), buf.size()) == VINSYS_OK);
  CHECK(one == std::string(buf.data()));

  // Dissection-class region needs a valid class and height. Class 1 (minor)
  // covers nearly the whole torus, so uniform samples certainly land in it;
  // the core class has measure ~ X^{-3} and would legitimately see no hits.
  REQUIRE(vinsys_restricted_moment(&cfg, 1, 0, 2, 6, 1, h2, 0, 2, nullptr, 1,
                                   1000, buf.data(), buf.size()) ==
          VINSYS_OK);
  json j = json::parse(buf.data());
  CHECK(j.at("hit_fraction").get<double>() > 0.5);
  CHECK(vinsys_restricted_moment(&cfg, 1, 0, 2, 6, 1, h2, 0, 9, nullptr, 0, 0,
                                 buf.data(), buf.size()) == VINSYS_INVALID);
}

TEST_CASE("verify suites through the C surface") {
  std::vector<char> buf(1 << 14);
  int rc = vinsys_verify_suites(buf.data(), buf.size());
  json names = call_json(rc, buf.data());
  REQUIRE(names.is_array());
  CHECK(names.size() == 7);

  vinsys_config cfg;
  vinsys_config_init(&cfg);
  rc = vinsys_verify_run(&cfg, "shift-identity", 50, buf.data(), buf.size());
  json rep = call_json(rc, buf.data());
  REQUIRE(rep.at("reports").size() == 1);
  CHECK(rep.at("reports")[0].at("passed").get<bool>());
  CHECK(rep.at("reports")[0].at("failures").get<long>() == 0);

  CHECK(vinsys_verify_run(&cfg, "nope", 10, buf.data(), buf.size()) ==
        VINSYS_INVALID);
  CHECK(vinsys_verify_run(&cfg, nullptr, 10, buf.data(), buf.size()) ==
        VINSYS_INVALID);
}
