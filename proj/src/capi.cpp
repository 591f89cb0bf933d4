#include "vinsys.h"

#include <chrono>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "vinsys/circle.hpp"
#include "vinsys/core.hpp"
#include "vinsys/counting.hpp"
#include "vinsys/expsums.hpp"
#include "vinsys/exponents.hpp"
#include "vinsys/shiftpoly.hpp"
#include "vinsys/verify.hpp"

using json = nlohmann::json;
using namespace vinsys;

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

int fill_str(char* out, size_t len, const std::string& s) {
  if (out == nullptr) return fail(VINSYS_INVALID, "null output buffer");
  if (s.size() + 1 > len)
    return fail(VINSYS_BUFFER, "output buffer too small: need " +
                                   std::to_string(s.size() + 1) + " bytes");
  std::memcpy(out, s.c_str(), s.size() + 1);
  return VINSYS_OK;
}

vinsys_config defaults() {
  vinsys_config cfg;
  Budget b;
  cfg.max_entries = static_cast<uint64_t>(b.max_entries);
  cfg.max_enumeration = static_cast<uint64_t>(b.max_enumeration);
  cfg.threads = 0;
  cfg.seed = 12345;
  cfg.tol = 1e-6;
  cfg.mc_samples = 100000;
  cfg.cache_dir = nullptr;
  return cfg;
}

const vinsys_config& cfg_or_default(const vinsys_config* cfg) {
  static const vinsys_config def = defaults();
  return cfg ? *cfg : def;
}

Budget budget_of(const vinsys_config& cfg) {
  Budget b;
  b.max_entries = cfg.max_entries;
  b.max_enumeration = cfg.max_enumeration;
  return b;
}

std::string cache_of(const vinsys_config& cfg) {
  return cfg.cache_dir ? std::string(cfg.cache_dir) : std::string();
}

HTuple tuple_of(const long long* h, int k) {
  if (k < 1) throw invalid_error("tuple length must be >= 1");
  if (h == nullptr) throw invalid_error("null shift tuple");
  std::vector<Int> v(k);
  for (int j = 0; j < k; ++j) v[j] = Int(static_cast<long>(h[j]));
  return HTuple(std::move(v));
}

std::vector<double> doubles_of(const double* p, int k, const char* what) {
  if (k < 1) throw invalid_error(std::string(what) + ": length must be >= 1");
  if (p == nullptr) throw invalid_error(std::string(what) + ": null pointer");
  return std::vector<double>(p, p + k);
}

long checked_long(long long v, const char* what) {
  if (v < std::numeric_limits<long>::min() ||
      v > std::numeric_limits<long>::max())
    throw invalid_error(std::string(what) + " out of range");
  return static_cast<long>(v);
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const budget_error& e) {
    return fail(VINSYS_BUDGET, e.what());
  } catch (const invalid_error& e) {
    return fail(VINSYS_INVALID, e.what());
  } catch (const tolerance_error& e) {
    return fail(VINSYS_TOLERANCE, e.what());
  } catch (const io_error& e) {
    return fail(VINSYS_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(VINSYS_INVALID, e.what());
  } catch (const std::exception& e) {
    return fail(VINSYS_INTERNAL, e.what());
  } catch (...) {
    return fail(VINSYS_INTERNAL, "unknown failure");
  }
}

counting::Method method_of(const std::string& name) {
  if (name == "auto") return counting::Method::Auto;
  if (name == "brute") return counting::Method::Brute;
  if (name == "mitm") return counting::Method::Mitm;
  throw invalid_error("unknown method '" + name + "'");
}

json fit_to_json(const exponents::FitResult& fit) {
  return json{{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"max_abs_residual", fit.max_abs_residual},
              {"points_used", fit.points_used},
              {"zeros_dropped", fit.zeros_dropped},
              {"error_points", fit.error_points},
              {"identically_zero", fit.identically_zero}};
}

json record_to_json(const exponents::BoundRecord& r) {
  return json{{"name", r.name},
              {"exponent", r.exponent.get_str()},
              {"exponent_value", r.exponent.get_d()},
              {"direction", exponents::direction_name(r.direction)},
              {"conditional", r.conditional},
              {"vanishes", r.vanishes},
              {"note", r.note}};
}

json integral_to_json(const circle::IntegralResult& ir) {
  return json{{"value", ir.value},
              {"imag_residual", ir.imag_residual},
              {"quad_err", ir.quad_err},
              {"tail_correction", ir.tail_correction},
              {"tail_bound", ir.tail_bound},
              {"tail_bound_valid", ir.tail_bound_valid},
              {"converged", ir.converged},
              {"evals", ir.evals}};
}

json series_to_json(const circle::SeriesResult& sr) {
  return json{{"value", sr.value},
              {"imag_residual", sr.imag_residual},
              {"per_q", sr.per_q}};
}

std::vector<std::pair<long, Int>> points_of(const long long* xs,
                                            const char* const* counts,
                                            size_t n) {
  if (xs == nullptr || counts == nullptr)
    throw invalid_error("null ladder arrays");
  std::vector<std::pair<long, Int>> pts;
  pts.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (counts[i] == nullptr) throw invalid_error("null count string");
    pts.emplace_back(checked_long(xs[i], "ladder X"),
                     Int(std::string(counts[i])));
  }
  return pts;
}

}  // namespace

extern "C" {

void vinsys_config_init(vinsys_config* cfg) {
  if (cfg) *cfg = defaults();
}

const char* vinsys_version(void) {
  static const std::string v = version_string();
  return v.c_str();
}

size_t vinsys_last_error(char* buf, size_t len) {
  if (buf && len > 0) {
    const size_t n = std::min(len - 1, g_last_error.size());
    std::memcpy(buf, g_last_error.data(), n);
    buf[n] = '\0';
  }
  return g_last_error.size();
}

int vinsys_count_system(const vinsys_config* cfg, int s, int k, long long X,
                        const long long* h, const char* method,
                        char* count_out, size_t count_len, char* method_out,
                        size_t method_len, double* seconds) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    if (method == nullptr) throw invalid_error("null method");
    counting::SystemParams p;
    p.s = s;
    p.k = k;
    p.X = checked_long(X, "X");
    p.h = tuple_of(h, k);
    const std::string m(method);
    Int count;
    std::string used;
    double secs = 0;
    if (m == "dft") {
      const auto t0 = std::chrono::steady_clock::now();
      circle::DftSpec spec;
      spec.u = s;
      spec.r = 0;
      spec.k = k;
      spec.f_hi = p.X;
      spec.h = p.h;
      spec.twist = true;
      auto res = circle::dft_moment(spec, budget_of(c),
                                    resolve_threads(c.threads));
      count = res.count;
      used = "dft";
      secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           t0)
                 .count();
    } else {
      auto out = counting::count_system(p, method_of(m), budget_of(c),
                                        resolve_threads(c.threads),
                                        cache_of(c));
      count = out.count;
      used = out.method_used;
      secs = out.seconds;
    }
    if (method_out) {
      const int rc = fill_str(method_out, method_len, used);
      if (rc != VINSYS_OK) return rc;
    }
    if (seconds) *seconds = secs;
    return fill_str(count_out, count_len, count.get_str());
  });
}

int vinsys_count_distinct(const vinsys_config* cfg, int k, long long X,
                          const long long* h, char* count_out,
                          size_t count_len) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    Int count =
        counting::count_distinct(k, tuple_of(h, k), checked_long(X, "X"),
                                 budget_of(c), resolve_threads(c.threads));
    return fill_str(count_out, count_len, count.get_str());
  });
}

int vinsys_count_mixed(const vinsys_config* cfg, int u, int r, int k,
                       long long X, const long long* h, char* count_out,
                       size_t count_len) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    Int count = counting::count_mixed_system(u, r, k, tuple_of(h, k),
                                             checked_long(X, "X"),
                                             budget_of(c),
                                             resolve_threads(c.threads));
    return fill_str(count_out, count_len, count.get_str());
  });
}

int vinsys_count_omega(const vinsys_config* cfg, int which, int s, int k,
                       long long X, char* count_out, size_t count_len) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    Int count;
    if (which == 1)
      count = counting::count_inequality_omega1(
          s, k, checked_long(X, "X"), budget_of(c),
          resolve_threads(c.threads));
    else if (which == 2)
      count = counting::count_inequality_omega2(
          s, k, checked_long(X, "X"), budget_of(c),
          resolve_threads(c.threads));
    else
      throw invalid_error("omega selector must be 1 or 2");
    return fill_str(count_out, count_len, count.get_str());
  });
}

int vinsys_dft_moment(const vinsys_config* cfg, int u, int r, int k,
                      long long f_hi, long long g_hi, const long long* h,
                      int twist, char* json_out, size_t json_len) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    circle::DftSpec spec;
    spec.u = u;
    spec.r = r;
    spec.k = k;
    spec.f_hi = checked_long(f_hi, "f_hi");
    spec.g_hi = checked_long(g_hi, "g_hi");
    spec.h = tuple_of(h, k);
    spec.twist = twist != 0;
    auto res =
        circle::dft_moment(spec, budget_of(c), resolve_threads(c.threads));
    json j{{"count", res.count.get_str()},
           {"imag_residual", res.imag_residual},
           {"round_residual", res.round_residual},
           {"grid_points", res.grid_points.get_str()},
           {"grid_sizes", res.grid_sizes}};
    return fill_str(json_out, json_len, j.dump());
  });
}

int vinsys_run_ladder(const vinsys_config* cfg, int s, int k,
                      const long long* h, const long long* xs, size_t n_xs,
                      const char* method, char* json_out, size_t json_len) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    if (xs == nullptr || n_xs == 0) throw invalid_error("empty ladder");
    if (method == nullptr) throw invalid_error("null method");
    std::vector<long> xvals(n_xs);
    for (size_t i = 0; i < n_xs; ++i)
      xvals[i] = checked_long(xs[i], "ladder X");
    auto ladder = counting::run_ladder(
        s, k, tuple_of(h, k), xvals, method_of(method), budget_of(c),
        resolve_threads(c.threads), cache_of(c));
    json pts = json::array();
    for (const auto& p : ladder.points) {
      pts.push_back(json{{"X", p.X},
                         {"count", p.count.get_str()},
                         {"method", p.method},
                         {"seconds", p.seconds},
                         {"ok", p.ok},
                         {"error", p.error}});
    }
    json hj = json::array();
    for (int j = 1; j <= k; ++j) hj.push_back(ladder.h.at(j).get_str());
    json j{{"s", s}, {"k", k}, {"h", hj}, {"points", pts}};
    return fill_str(json_out, json_len, j.dump());
  });
}

int vinsys_fit_points(const long long* xs, const char* const* counts,
                      size_t n, char* json_out, size_t json_len) {
  return guarded([&] {
    auto fit = exponents::fit_points(points_of(xs, counts, n));
    return fill_str(json_out, json_len, fit_to_json(fit).dump());
  });
}

int vinsys_bound_catalog(int s, int k, const long long* h, char* json_out,
                         size_t json_len) {
  return guarded([&] {
    auto records = exponents::bound_catalog(s, k, tuple_of(h, k));
    json arr = json::array();
    for (const auto& r : records) arr.push_back(record_to_json(r));
    return fill_str(json_out, json_len, json{{"records", arr}}.dump());
  });
}

int vinsys_fit_report(int s, int k, const long long* h, const long long* xs,
                      const char* const* counts, size_t n, double slack,
                      char* json_out, size_t json_len) {
  return guarded([&] {
    const double sl = slack > 0 ? slack : 0.4;
    auto fit = exponents::fit_points(points_of(xs, counts, n));
    auto records = exponents::bound_catalog(s, k, tuple_of(h, k));
    auto comparison = exponents::compare_fit_to_catalog(fit, records, sl);
    json recs = json::array();
    for (const auto& r : records) recs.push_back(record_to_json(r));
    json comp = json::array();
    for (const auto& e : comparison) {
      comp.push_back(json{{"name", e.record.name},
                          {"verdict", e.verdict},
                          {"flagged", e.flagged},
                          {"detail", e.detail}});
    }
    json j{{"fit", fit_to_json(fit)},
           {"records", recs},
           {"comparison", comp},
           {"slack", sl}};
    return fill_str(json_out, json_len, j.dump());
  });
}

int vinsys_conjectured_bound(int s, int k, double measure, double X,
                             double eps, double C, double* out) {
  return guarded([&] {
    if (out == nullptr) throw invalid_error("null output");
    *out = exponents::conjectured_restricted_bound(s, k, measure, X, eps, C);
    return VINSYS_OK;
  });
}

int vinsys_weyl_sum(const vinsys_config* cfg, const double* alpha, int k,
                    long long X, double out_re_im[2]) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    if (out_re_im == nullptr) throw invalid_error("null output");
    auto v = expsums::weyl_sum_f(doubles_of(alpha, k, "alpha"),
                                 checked_long(X, "X"),
                                 resolve_threads(c.threads));
    out_re_im[0] = v.real();
    out_re_im[1] = v.imag();
    return VINSYS_OK;
  });
}

int vinsys_shifted_sum(const vinsys_config* cfg, const double* alpha, int k,
                       long long X, const long long* h, double out_re_im[2]) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    if (out_re_im == nullptr) throw invalid_error("null output");
    auto v = expsums::shifted_sum_g(doubles_of(alpha, k, "alpha"),
                                    checked_long(X, "X"), tuple_of(h, k),
                                    resolve_threads(c.threads));
    out_re_im[0] = v.real();
    out_re_im[1] = v.imag();
    return VINSYS_OK;
  });
}

int vinsys_kernel_sum(double gamma, long long X, double out_re_im[2],
                      double* bound) {
  return guarded([&] {
    if (out_re_im == nullptr) throw invalid_error("null output");
    auto v = expsums::kernel_K(gamma, checked_long(X, "X"));
    out_re_im[0] = v.real();
    out_re_im[1] = v.imag();
    if (bound) *bound = expsums::kernel_bound(gamma, checked_long(X, "X"));
    return VINSYS_OK;
  });
}

int vinsys_complete_sum(long long q, const long long* a, int k,
                        double out_re_im[2]) {
  return guarded([&] {
    if (out_re_im == nullptr) throw invalid_error("null output");
    if (a == nullptr || k < 1) throw invalid_error("bad coefficient array");
    std::vector<long> av(k);
    for (int j = 0; j < k; ++j) av[j] = checked_long(a[j], "a");
    auto v = expsums::complete_sum_S(checked_long(q, "q"), av);
    out_re_im[0] = v.real();
    out_re_im[1] = v.imag();
    return VINSYS_OK;
  });
}

int vinsys_oscillatory_integral(const double* beta, int k, double tol,
                                long long max_evals, double out_re_im[2],
                                long long* evals) {
  return guarded([&] {
    if (out_re_im == nullptr) throw invalid_error("null output");
    auto q = expsums::oscillatory_I(doubles_of(beta, k, "beta"), tol,
                                    checked_long(max_evals, "max_evals"));
    out_re_im[0] = q.value.real();
    out_re_im[1] = q.value.imag();
    if (evals) *evals = q.evals;
    return VINSYS_OK;
  });
}

int vinsys_classify_point(const double* alpha, int k, long long X, int* cls,
                          char* name_out, size_t name_len) {
  return guarded([&] {
    if (cls == nullptr) throw invalid_error("null class output");
    auto cfg = circle::DissectionConfig::make(k, checked_long(X, "X"));
    *cls = circle::dissection_classify(doubles_of(alpha, k, "alpha"), cfg);
    if (name_out)
      return fill_str(name_out, name_len, circle::dissection_class_name(*cls));
    return VINSYS_OK;
  });
}

int vinsys_major_arc_1d(double alpha, double Q, int k, long long X,
                        int* in_arc, long long* q, long long* a) {
  return guarded([&] {
    if (in_arc == nullptr) throw invalid_error("null membership output");
    auto res = circle::major_arc_1d(alpha, Q, k, checked_long(X, "X"));
    *in_arc = res.in ? 1 : 0;
    if (q) *q = res.q;
    if (a) *a = res.a;
    return VINSYS_OK;
  });
}

int vinsys_arc_box(const double* alpha, int k, double Z, long long X,
                   int* in_box, long long* q, long long* a) {
  return guarded([&] {
    if (in_box == nullptr) throw invalid_error("null membership output");
    auto res = circle::arc_box_k(doubles_of(alpha, k, "alpha"), Z,
                                 checked_long(X, "X"));
    *in_box = res.in ? 1 : 0;
    if (q) *q = res.q;
    if (a && res.in)
      for (int j = 0; j < k; ++j) a[j] = res.a[j];
    return VINSYS_OK;
  });
}

int vinsys_singular_series(const vinsys_config* cfg, int s, int k,
                           const long long* h, long long q_max,
                           char* json_out, size_t json_len) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    auto res = circle::singular_series_partial(
        s, k, tuple_of(h, k), checked_long(q_max, "q_max"), budget_of(c),
        resolve_threads(c.threads));
    return fill_str(json_out, json_len, series_to_json(res).dump());
  });
}

int vinsys_singular_integral(const vinsys_config* cfg, int s, int k,
                             const double* n, double B, double tol,
                             long long max_evals, char* json_out,
                             size_t json_len) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    auto res = circle::singular_integral_truncated(
        s, doubles_of(n, k, "n"), B, tol, checked_long(max_evals, "max_evals"),
        resolve_threads(c.threads));
    return fill_str(json_out, json_len, integral_to_json(res).dump());
  });
}

int vinsys_prediction(const vinsys_config* cfg, int s, int k,
                      const long long* h, long long X, long long q_max,
                      double B, double tol, long long max_evals,
                      char* json_out, size_t json_len) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    auto res = circle::asymptotic_prediction(
        s, k, tuple_of(h, k), checked_long(X, "X"),
        checked_long(q_max, "q_max"), B, tol,
        checked_long(max_evals, "max_evals"), budget_of(c),
        resolve_threads(c.threads));
    json j{{"series", series_to_json(res.series)},
           {"integral", integral_to_json(res.integral)},
           {"scale", res.scale},
           {"value", res.value}};
    return fill_str(json_out, json_len, j.dump());
  });
}

int vinsys_restricted_moment(const vinsys_config* cfg, int u, int r, int k,
                             long long f_hi, long long g_hi,
                             const long long* h, int twist, int region_kind,
                             const double* box, int cls, long long dissect_X,
                             char* json_out, size_t json_len) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    circle::MomentSpec spec;
    spec.u = u;
    spec.r = r;
    spec.k = k;
    spec.f_hi = checked_long(f_hi, "f_hi");
    spec.g_hi = checked_long(g_hi, "g_hi");
    spec.h = tuple_of(h, k);
    spec.twist = twist != 0;

    circle::Region region;
    circle::DissectionConfig dissect{};
    const circle::DissectionConfig* dptr = nullptr;
    if (region_kind == 0) {
      region.kind = circle::Region::Kind::FullCube;
    } else if (region_kind == 1) {
      region.kind = circle::Region::Kind::Box;
      if (box == nullptr) throw invalid_error("null box array");
      for (int j = 0; j < k; ++j)
        region.box.emplace_back(box[2 * j], box[2 * j + 1]);
    } else if (region_kind == 2) {
      region.kind = circle::Region::Kind::DissectionClass;
      region.cls = cls;
      dissect = circle::DissectionConfig::make(k, checked_long(dissect_X,
                                                               "dissect_X"));
      dptr = &dissect;
    } else {
      throw invalid_error("region_kind must be 0, 1, or 2");
    }

    circle::SamplerConfig sampler;
    sampler.samples = c.mc_samples;
    sampler.seed = c.seed;
    auto est = circle::restricted_moment_estimate(
        spec, region, dptr, sampler, resolve_threads(c.threads));
    json j{{"value_re", est.value.real()},
           {"value_im", est.value.imag()},
           {"std_error", est.std_error},
           {"hit_fraction", est.hit_fraction},
           {"samples", est.samples}};
    return fill_str(json_out, json_len, j.dump());
  });
}

int vinsys_verify_suites(char* json_out, size_t json_len) {
  return guarded([&] {
    json arr = verify::suite_names();
    return fill_str(json_out, json_len, arr.dump());
  });
}

int vinsys_verify_run(const vinsys_config* cfg, const char* suite,
                      long long trials, char* json_out, size_t json_len) {
  return guarded([&] {
    const auto& c = cfg_or_default(cfg);
    if (suite == nullptr) throw invalid_error("null suite name");
    const std::string name(suite);
    std::vector<verify::SuiteReport> reports;
    if (name == "all") {
      reports = verify::run_all_suites(checked_long(trials, "trials"), c.seed,
                                       budget_of(c),
                                       resolve_threads(c.threads));
    } else {
      reports.push_back(verify::run_suite(name, checked_long(trials, "trials"),
                                          c.seed, budget_of(c),
                                          resolve_threads(c.threads)));
    }
    json arr = json::array();
    for (const auto& rep : reports) {
      arr.push_back(json{{"suite", rep.suite},
                         {"trials", rep.trials},
                         {"failures", rep.failures},
                         {"passed", rep.passed()},
                         {"detail", rep.detail}});
    }
    return fill_str(json_out, json_len, json{{"reports", arr}}.dump());
  });
}

}  // extern "C"
