// Command-line front end for the Vinogradov-system library. Talks to the
// shared library exclusively through the C interface in vinsys.h; every
// subcommand appends a schema-versioned RunRecord line to the results file,
// and `replay` re-executes a stored record and checks that the result is
// reproduced.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vinsys.h"

using json = nlohmann::json;

namespace {

constexpr const char* kSchema = "vinsys-run/1";

// ---------------------------------------------------------------------------
// Effective configuration: defaults <- config file <- command-line flags.
// ---------------------------------------------------------------------------

struct Gconf {
  vinsys_config c{};
  std::string cache_dir;  // storage backing c.cache_dir
  double eps = 0.25;      // conjectured-bound epsilon
  double bigC = 4.0;      // conjectured-bound constant
  double slack = 0.4;     // fit-vs-catalog comparison slack
  std::string results = "results/runs.jsonl";
  std::string format = "json";

  void rebind() { c.cache_dir = cache_dir.empty() ? nullptr : cache_dir.c_str(); }
};

json gconf_to_json(const Gconf& g) {
  return json{{"budget_entries", g.c.max_entries},
              {"budget_enumeration", g.c.max_enumeration},
              {"threads", g.c.threads},
              {"seed", g.c.seed},
              {"tol", g.c.tol},
              {"mc_samples", g.c.mc_samples},
              {"cache_dir", g.cache_dir},
              {"eps", g.eps},
              {"C", g.bigC},
              {"slack", g.slack}};
}

struct CliError {
  int exit_code;
  std::string message;
};

void gconf_from_json(Gconf& g, const json& j, const std::string& where) {
  for (const auto& [key, val] : j.items()) {
    try {
      if (key == "budget_entries")
        g.c.max_entries = val.get<uint64_t>();
      else if (key == "budget_enumeration")
        g.c.max_enumeration = val.get<uint64_t>();
      else if (key == "threads")
        g.c.threads = val.get<int>();
      else if (key == "seed")
        g.c.seed = val.get<uint64_t>();
      else if (key == "tol")
        g.c.tol = val.get<double>();
      else if (key == "mc_samples")
        g.c.mc_samples = val.get<uint64_t>();
      else if (key == "cache_dir")
        g.cache_dir = val.get<std::string>();
      else if (key == "eps")
        g.eps = val.get<double>();
      else if (key == "C")
        g.bigC = val.get<double>();
      else if (key == "slack")
        g.slack = val.get<double>();
      else if (key == "results")
        g.results = val.get<std::string>();
      else if (key == "format")
        g.format = val.get<std::string>();
      else
        throw CliError{3, where + ": unknown key '" + key + "'"};
    } catch (const json::exception&) {
      throw CliError{3, where + ": bad value for '" + key + "'"};
    }
  }
  g.rebind();
}

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

std::string last_error() {
  std::string buf(4096, '\0');
  const size_t n = vinsys_last_error(buf.data(), buf.size());
  buf.resize(std::min(n, buf.size() - 1));
  return buf;
}

int exit_code_for(int rc) {
  switch (rc) {
    case VINSYS_OK:
      return 0;
    case VINSYS_BUDGET:
      return 2;
    case VINSYS_INVALID:
    case VINSYS_IO:
      return 3;
    case VINSYS_TOLERANCE:
      return 4;
    default:
      return 1;
  }
}

[[noreturn]] void bail(int rc) {
  throw CliError{exit_code_for(rc), last_error()};
}

[[noreturn]] void invalid(const std::string& msg) { throw CliError{3, msg}; }

// Calls a C function that fills a string buffer, growing the buffer once if
// the first size was too small.
std::string call_str(const std::function<int(char*, size_t)>& fn) {
  std::vector<char> buf(1 << 16);
  int rc = fn(buf.data(), buf.size());
  if (rc == VINSYS_BUFFER) {
    buf.resize(1 << 26);
    rc = fn(buf.data(), buf.size());
  }
  if (rc != VINSYS_OK) bail(rc);
  return std::string(buf.data());
}

std::vector<long long> parse_ll_list(const std::string& csv,
                                     const std::string& what) {
  std::vector<long long> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stoll(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      invalid(what + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) invalid(what + ": empty list");
  return out;
}

std::vector<double> parse_d_list(const std::string& csv,
                                 const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      invalid(what + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) invalid(what + ": empty list");
  return out;
}

// h comma-separated; its length defines k unless k was given, in which case
// the two must agree. An absent h with a given k means the zero tuple.
std::vector<long long> resolve_h(const std::string& h_csv, int& k) {
  std::vector<long long> h;
  if (!h_csv.empty()) {
    h = parse_ll_list(h_csv, "--h");
    if (k > 0 && static_cast<int>(h.size()) != k)
      invalid("--h has " + std::to_string(h.size()) +
              " components but --k is " + std::to_string(k));
    k = static_cast<int>(h.size());
  } else if (k > 0) {
    h.assign(k, 0);
  } else {
    invalid("need --h (or --k for the zero tuple)");
  }
  return h;
}

json get_or(const json& j, const char* key, json def) {
  return j.contains(key) ? j.at(key) : def;
}

// ---------------------------------------------------------------------------
// Command execution. Each command reads its parameters from a JSON object so
// that replay can re-dispatch a stored record through the identical path.
// The scalar string, when set, is what the default output prints; warnings
// surface on stderr.
// ---------------------------------------------------------------------------

struct RunOutput {
  json result;
  std::string scalar;  // empty means "print the result object"
  std::string method;  // provenance: counting method actually used
  std::vector<std::string> warnings;
  int exit_code = 0;  // verify sets 4 when a suite fails
};

RunOutput run_count(const Gconf& g, const json& p) {
  const int s = p.at("s").get<int>();
  const int k = p.at("k").get<int>();
  const long long X = p.at("X").get<long long>();
  const auto h = p.at("h").get<std::vector<long long>>();
  const std::string method = get_or(p, "method", "auto").get<std::string>();
  char count[8192];
  char used[32];
  double secs = 0;
  const int rc =
      vinsys_count_system(&g.c, s, k, X, h.data(), method.c_str(), count,
                          sizeof count, used, sizeof used, &secs);
  if (rc != VINSYS_OK) bail(rc);
  RunOutput out;
  out.result = json{{"count", std::string(count)},
                    {"method", std::string(used)},
                    {"seconds", secs}};
  out.scalar = count;
  out.method = used;
  return out;
}

RunOutput run_ladder(const Gconf& g, const json& p) {
  const int s = p.at("s").get<int>();
  const int k = p.at("k").get<int>();
  const auto h = p.at("h").get<std::vector<long long>>();
  const auto xs = p.at("xs").get<std::vector<long long>>();
  const std::string method = get_or(p, "method", "auto").get<std::string>();
  const std::string body = call_str([&](char* buf, size_t len) {
    return vinsys_run_ladder(&g.c, s, k, h.data(), xs.data(), xs.size(),
                             method.c_str(), buf, len);
  });
  RunOutput out;
  out.result = json::parse(body);
  for (const auto& pt : out.result.at("points")) {
    if (!pt.at("ok").get<bool>())
      out.warnings.push_back("X=" + std::to_string(pt.at("X").get<long>()) +
                             " refused: " +
                             pt.at("error").get<std::string>());
  }
  return out;
}

// Loads the record at `index` (default: last line) from a results file.
json load_record(const std::string& path, long long index) {
  std::ifstream in(path);
  if (!in) invalid("cannot open record file '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  if (lines.empty()) invalid("record file '" + path + "' is empty");
  const long long i = index < 0 ? static_cast<long long>(lines.size()) - 1
                                : index;
  if (i < 0 || i >= static_cast<long long>(lines.size()))
    invalid("--index " + std::to_string(index) + " out of range (file has " +
            std::to_string(lines.size()) + " records)");
  json rec;
  try {
    rec = json::parse(lines[static_cast<size_t>(i)]);
  } catch (const json::exception& e) {
    invalid("record " + std::to_string(i) + " is not valid JSON: " + e.what());
  }
  if (get_or(rec, "schema", "") != kSchema)
    invalid("record " + std::to_string(i) + " has unsupported schema");
  return rec;
}

RunOutput run_fit(const Gconf& g, const json& p) {
  std::vector<long long> xs;
  std::vector<std::string> counts;
  int s = get_or(p, "s", 0).get<int>();
  int k = get_or(p, "k", 0).get<int>();
  std::vector<long long> h = get_or(p, "h", json::array())
                                 .get<std::vector<long long>>();

  if (p.contains("record")) {
    const json rec = load_record(p.at("record").get<std::string>(),
                                 get_or(p, "index", -1).get<long long>());
    if (get_or(rec, "command", "") != "ladder")
      invalid("fit --record expects a ladder record, found '" +
              get_or(rec, "command", "?").get<std::string>() + "'");
    s = rec.at("params").at("s").get<int>();
    k = rec.at("params").at("k").get<int>();
    h = rec.at("params").at("h").get<std::vector<long long>>();
    for (const auto& pt : rec.at("result").at("points")) {
      if (!pt.at("ok").get<bool>()) continue;
      xs.push_back(pt.at("X").get<long long>());
      counts.push_back(pt.at("count").get<std::string>());
    }
    if (xs.empty()) invalid("ladder record has no usable points");
  } else {
    xs = p.at("xs").get<std::vector<long long>>();
    counts = p.at("counts").get<std::vector<std::string>>();
    if (xs.size() != counts.size())
      invalid("--xs and --counts must have the same length");
  }

  std::vector<const char*> cptr;
  cptr.reserve(counts.size());
  for (const auto& c : counts) cptr.push_back(c.c_str());

  RunOutput out;
  std::string body;
  if (k > 0 && !h.empty()) {
    body = call_str([&](char* buf, size_t len) {
      return vinsys_fit_report(s, k, h.data(), xs.data(), cptr.data(),
                               cptr.size(), g.slack, buf, len);
    });
    out.result = json::parse(body);
  } else {
    body = call_str([&](char* buf, size_t len) {
      return vinsys_fit_points(xs.data(), cptr.data(), cptr.size(), buf, len);
    });
    out.result = json{{"fit", json::parse(body)}};
  }
  const bool zero = out.result.at("fit").at("identically_zero").get<bool>();
  out.result["verdict"] =
      zero ? "identically zero" : "fitted";
  return out;
}

RunOutput run_catalog(const Gconf&, const json& p) {
  const int s = p.at("s").get<int>();
  const int k = p.at("k").get<int>();
  const auto h = p.at("h").get<std::vector<long long>>();
  const std::string body = call_str([&](char* buf, size_t len) {
    return vinsys_bound_catalog(s, k, h.data(), buf, len);
  });
  RunOutput out;
  out.result = json::parse(body);
  return out;
}

RunOutput run_sums(const Gconf& g, const json& p) {
  const std::string mode = p.at("mode").get<std::string>();
  RunOutput out;
  double v[2] = {0, 0};
  if (mode == "weyl" || mode == "shifted") {
    const auto alpha = p.at("alpha").get<std::vector<double>>();
    const long long X = p.at("X").get<long long>();
    int rc;
    if (mode == "weyl") {
      rc = vinsys_weyl_sum(&g.c, alpha.data(),
                           static_cast<int>(alpha.size()), X, v);
    } else {
      const auto h = p.at("h").get<std::vector<long long>>();
      if (h.size() != alpha.size())
        invalid("--h and --alpha must have the same length");
      rc = vinsys_shifted_sum(&g.c, alpha.data(),
                              static_cast<int>(alpha.size()), X, h.data(), v);
    }
    if (rc != VINSYS_OK) bail(rc);
    out.result = json{{"re", v[0]}, {"im", v[1]}, {"abs", std::hypot(v[0], v[1])}};
  } else if (mode == "kernel") {
    double bound = 0;
    const int rc = vinsys_kernel_sum(p.at("gamma").get<double>(),
                                     p.at("X").get<long long>(), v, &bound);
    if (rc != VINSYS_OK) bail(rc);
    out.result = json{{"re", v[0]},
                      {"im", v[1]},
                      {"abs", std::hypot(v[0], v[1])},
                      {"bound", bound}};
  } else if (mode == "complete") {
    const auto a = p.at("a").get<std::vector<long long>>();
    const int rc = vinsys_complete_sum(p.at("q").get<long long>(), a.data(),
                                       static_cast<int>(a.size()), v);
    if (rc != VINSYS_OK) bail(rc);
    out.result = json{{"re", v[0]}, {"im", v[1]}, {"abs", std::hypot(v[0], v[1])}};
  } else if (mode == "integral") {
    const auto beta = p.at("beta").get<std::vector<double>>();
    long long evals = 0;
    const int rc = vinsys_oscillatory_integral(
        beta.data(), static_cast<int>(beta.size()),
        get_or(p, "tol", 1e-9).get<double>(),
        get_or(p, "max_evals", 1000000).get<long long>(), v, &evals);
    if (rc != VINSYS_OK) bail(rc);
    out.result = json{{"re", v[0]},
                      {"im", v[1]},
                      {"abs", std::hypot(v[0], v[1])},
                      {"evals", evals}};
  } else if (mode == "moment") {
    const int u = p.at("u").get<int>();
    const int r = get_or(p, "r", 0).get<int>();
    const auto h = p.at("h").get<std::vector<long long>>();
    const int k = static_cast<int>(h.size());
    const long long f_hi = p.at("fhi").get<long long>();
    const long long g_hi = get_or(p, "ghi", 1).get<long long>();
    const int twist = get_or(p, "twist", 1).get<int>();
    int region_kind = 0;
    std::vector<double> box;
    int cls = 0;
    long long dissect_X = 0;
    if (p.contains("box")) {
      region_kind = 1;
      box = p.at("box").get<std::vector<double>>();
      if (static_cast<int>(box.size()) != 2 * k)
        invalid("--box needs 2k numbers (lo,hi per degree)");
    } else if (p.contains("cls")) {
      region_kind = 2;
      cls = p.at("cls").get<int>();
      dissect_X = p.at("dissect_X").get<long long>();
    }
    const std::string body = call_str([&](char* buf, size_t len) {
      return vinsys_restricted_moment(&g.c, u, r, k, f_hi, g_hi, h.data(),
                                      twist, region_kind,
                                      box.empty() ? nullptr : box.data(), cls,
                                      dissect_X, buf, len);
    });
    out.result = json::parse(body);
    // Conjectured ceiling for comparison when the region has a direct
    // Lebesgue measure (full cube or box).
    if (region_kind != 2 && p.contains("X")) {
      double measure = 1.0;
      for (int j = 0; j + 1 < static_cast<int>(box.size()); j += 2)
        measure *= (box[j + 1] - box[j]);
      double bound = 0;
      const int rc = vinsys_conjectured_bound(
          u + r, k, measure, p.at("X").get<double>(), g.eps, g.bigC, &bound);
      if (rc != VINSYS_OK) bail(rc);
      out.result["conjectured_bound"] = bound;
      out.result["measure"] = measure;
    }
  } else {
    invalid("unknown sums mode '" + mode + "'");
  }
  return out;
}

RunOutput run_arcs(const Gconf&, const json& p) {
  const std::string mode = p.at("mode").get<std::string>();
  RunOutput out;
  if (mode == "classify") {
    const auto alpha = p.at("alpha").get<std::vector<double>>();
    const long long X = p.at("X").get<long long>();
    int cls = 0;
    char name[64];
    const int rc =
        vinsys_classify_point(alpha.data(), static_cast<int>(alpha.size()), X,
                              &cls, name, sizeof name);
    if (rc != VINSYS_OK) bail(rc);
    out.result = json{{"class", cls},
                      {"tag", "W" + std::to_string(cls)},
                      {"name", std::string(name)}};
    out.scalar = "W" + std::to_string(cls);
  } else if (mode == "major1d") {
    int in = 0;
    long long q = 0, a = 0;
    const int rc = vinsys_major_arc_1d(p.at("alpha").get<double>(),
                                       p.at("Q").get<double>(),
                                       p.at("k").get<int>(),
                                       p.at("X").get<long long>(), &in, &q, &a);
    if (rc != VINSYS_OK) bail(rc);
    out.result = json{{"in", in != 0}, {"q", q}, {"a", a}};
  } else if (mode == "box") {
    const auto alpha = p.at("alpha").get<std::vector<double>>();
    int in = 0;
    long long q = 0;
    std::vector<long long> a(alpha.size(), 0);
    const int rc = vinsys_arc_box(alpha.data(),
                                  static_cast<int>(alpha.size()),
                                  p.at("Z").get<double>(),
                                  p.at("X").get<long long>(), &in, &q,
                                  a.data());
    if (rc != VINSYS_OK) bail(rc);
    out.result = json{{"in", in != 0}, {"q", q}};
    if (in) out.result["a"] = a;
  } else {
    invalid("unknown arcs mode '" + mode + "'");
  }
  return out;
}

RunOutput run_singular(const Gconf& g, const json& p) {
  const std::string mode = p.at("mode").get<std::string>();
  RunOutput out;
  if (mode == "series") {
    const int s = p.at("s").get<int>();
    const auto h = p.at("h").get<std::vector<long long>>();
    const std::string body = call_str([&](char* buf, size_t len) {
      return vinsys_singular_series(&g.c, s, static_cast<int>(h.size()),
                                    h.data(), p.at("qmax").get<long long>(),
                                    buf, len);
    });
    out.result = json::parse(body);
  } else if (mode == "integral") {
    const int s = p.at("s").get<int>();
    const auto n = p.at("n").get<std::vector<double>>();
    const std::string body = call_str([&](char* buf, size_t len) {
      return vinsys_singular_integral(
          &g.c, s, static_cast<int>(n.size()), n.data(),
          get_or(p, "B", 10.0).get<double>(),
          get_or(p, "tol", g.c.tol).get<double>(),
          get_or(p, "max_evals", 100000000).get<long long>(), buf, len);
    });
    out.result = json::parse(body);
  } else {
    invalid("unknown singular mode '" + mode + "'");
  }
  out.scalar = json(out.result.at("value").get<double>()).dump();
  return out;
}

RunOutput run_predict(const Gconf& g, const json& p) {
  const int s = p.at("s").get<int>();
  const int k = p.at("k").get<int>();
  const auto h = p.at("h").get<std::vector<long long>>();
  const long long X = p.at("X").get<long long>();
  const std::string body = call_str([&](char* buf, size_t len) {
    return vinsys_prediction(&g.c, s, k, h.data(), X,
                             get_or(p, "qmax", 40).get<long long>(),
                             get_or(p, "B", 20.0).get<double>(),
                             get_or(p, "tol", 0.05).get<double>(),
                             get_or(p, "max_evals", 2000000000)
                                 .get<long long>(),
                             buf, len);
  });
  RunOutput out;
  out.result = json::parse(body);
  if (get_or(p, "compare", "none").get<std::string>() != "none") {
    const std::string method = p.at("compare").get<std::string>();
    char count[8192];
    char used[32];
    double secs = 0;
    const int rc =
        vinsys_count_system(&g.c, s, k, X, h.data(), method.c_str(), count,
                            sizeof count, used, sizeof used, &secs);
    if (rc != VINSYS_OK) bail(rc);
    out.result["exact"] = std::string(count);
    out.result["exact_method"] = std::string(used);
    out.method = used;
    const double exact_d = std::strtod(count, nullptr);
    if (exact_d > 0)
      out.result["ratio"] = out.result.at("value").get<double>() / exact_d;
  }
  return out;
}

RunOutput run_verify(const Gconf& g, const json& p) {
  const std::string suite = get_or(p, "suite", "all").get<std::string>();
  const long long trials = get_or(p, "trials", 200).get<long long>();
  const std::string body = call_str([&](char* buf, size_t len) {
    return vinsys_verify_run(&g.c, suite.c_str(), trials, buf, len);
  });
  RunOutput out;
  out.result = json::parse(body);
  bool all_passed = true;
  std::string lines;
  for (const auto& rep : out.result.at("reports")) {
    const bool ok = rep.at("passed").get<bool>();
    all_passed = all_passed && ok;
    lines += rep.at("suite").get<std::string>();
    lines += ok ? ": pass" : ": FAIL";
    lines += " (trials=" + std::to_string(rep.at("trials").get<long>()) +
             ", failures=" + std::to_string(rep.at("failures").get<long>()) +
             ")\n";
  }
  if (!lines.empty()) lines.pop_back();
  out.result["passed"] = all_passed;
  out.scalar = lines;
  out.exit_code = all_passed ? 0 : 4;
  return out;
}

RunOutput dispatch(const std::string& cmd, const Gconf& g, const json& params) {
  if (cmd == "count") return run_count(g, params);
  if (cmd == "ladder") return run_ladder(g, params);
  if (cmd == "fit") return run_fit(g, params);
  if (cmd == "catalog") return run_catalog(g, params);
  if (cmd == "sums") return run_sums(g, params);
  if (cmd == "arcs") return run_arcs(g, params);
  if (cmd == "singular") return run_singular(g, params);
  if (cmd == "predict") return run_predict(g, params);
  if (cmd == "verify") return run_verify(g, params);
  invalid("unknown command '" + cmd + "'");
}

// ---------------------------------------------------------------------------
// Output, records, replay
// ---------------------------------------------------------------------------

void print_csv(const std::string& cmd, const json& result) {
  if (cmd == "ladder") {
    std::cout << "X,count,method,seconds\n";
    for (const auto& pt : result.at("points")) {
      if (pt.at("ok").get<bool>()) {
        std::cout << pt.at("X").get<long long>() << ','
                  << pt.at("count").get<std::string>() << ','
                  << pt.at("method").get<std::string>() << ','
                  << pt.at("seconds").get<double>() << '\n';
      } else {
        std::cout << pt.at("X").get<long long>() << ",,refused,\n";
      }
    }
    return;
  }
  std::cout << "key,value\n";
  for (const auto& [key, val] : result.items()) {
    if (val.is_string())
      std::cout << key << ',' << val.get<std::string>() << '\n';
    else
      std::cout << key << ',' << val.dump() << '\n';
  }
}

void emit(const Gconf& g, const std::string& cmd, const RunOutput& out) {
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
  if (g.format == "csv") {
    print_csv(cmd, out.result);
  } else if (!out.scalar.empty()) {
    std::cout << out.scalar << '\n';
  } else {
    std::cout << out.result.dump() << '\n';
  }
}

void write_record(const Gconf& g, const std::string& cmd, const json& params,
                  const RunOutput& out, double wall_seconds) {
  json rec{{"schema", kSchema},
           {"command", cmd},
           {"params", params},
           {"result", out.result},
           {"provenance",
            {{"version", vinsys_version()},
             {"seed", g.c.seed},
             {"budget_entries", g.c.max_entries},
             {"budget_enumeration", g.c.max_enumeration},
             {"threads", g.c.threads},
             {"wall_seconds", wall_seconds}}}};
  if (!out.method.empty()) rec["provenance"]["method"] = out.method;
  const std::filesystem::path path(g.results);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
      throw CliError{3, "cannot create results directory '" +
                            path.parent_path().string() + "'"};
  }
  std::ofstream outf(path, std::ios::app);
  if (!outf) throw CliError{3, "cannot open results file '" + g.results + "'"};
  outf << rec.dump() << '\n';
}

// Wall time and per-point timings vary between runs; everything else must
// reproduce exactly.
void strip_volatile(json& j) {
  if (j.is_object()) {
    j.erase("seconds");
    j.erase("wall_seconds");
    for (auto& [key, val] : j.items()) {
      (void)key;
      strip_volatile(val);
    }
  } else if (j.is_array()) {
    for (auto& v : j) strip_volatile(v);
  }
}

int run_replay(const json& p) {
  const json rec = load_record(p.at("record").get<std::string>(),
                               get_or(p, "index", -1).get<long long>());
  const std::string cmd = rec.at("command").get<std::string>();
  if (cmd == "replay") invalid("refusing to replay a replay record");
  Gconf g;
  vinsys_config_init(&g.c);
  gconf_from_json(g, get_or(rec.at("params"), "config", json::object()),
                  "stored config");
  const RunOutput out = dispatch(cmd, g, rec.at("params"));
  json want = rec.at("result");
  json got = out.result;
  strip_volatile(want);
  strip_volatile(got);
  if (want != got) {
    std::cerr << "replay mismatch for '" << cmd << "'\n  stored: "
              << want.dump() << "\n  replayed: " << got.dump() << '\n';
    return 4;
  }
  std::cout << "replay ok: " << cmd << " reproduced\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact counting, exponent fitting, and circle-method "
               "experiments for inhomogeneous Vinogradov systems"};
  app.require_subcommand(1);
  // --h is a real option (the shift tuple), so help is long-form only.
  app.set_help_flag("--help", "print help");
  auto sub = [&app](const char* name, const char* desc) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->fallthrough();
    s->set_help_flag("--help", "print help");
    return s;
  };

  Gconf g;
  vinsys_config_init(&g.c);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file with defaults");
  auto* o_threads = app.add_option("--threads", g.c.threads,
                                   "worker threads (0 = all cores)");
  auto* o_entries = app.add_option("--budget-entries", g.c.max_entries,
                                   "map-entry budget");
  auto* o_enum = app.add_option("--budget-enum", g.c.max_enumeration,
                                "enumeration budget");
  auto* o_seed = app.add_option("--seed", g.c.seed, "sampler seed");
  auto* o_tol = app.add_option("--tol", g.c.tol, "default tolerance");
  auto* o_samples = app.add_option("--mc-samples", g.c.mc_samples,
                                   "Monte Carlo sample count");
  auto* o_cache = app.add_option("--cache-dir", g.cache_dir,
                                 "persist count maps here");
  auto* o_results = app.add_option("--results", g.results,
                                   "results file (JSON lines)");
  auto* o_format = app.add_option("--format", g.format, "output format")
                       ->check(CLI::IsMember({"json", "csv"}));
  auto* o_slack = app.add_option("--slack", g.slack,
                                 "fit-vs-catalog comparison slack");
  auto* o_eps = app.add_option("--eps", g.eps, "conjectured-bound epsilon");
  auto* o_bigc = app.add_option("--C", g.bigC, "conjectured-bound constant");

  // count
  auto* c_count = sub("count", "exact system count");
  int ct_s = 1, ct_k = 0;
  long long ct_X = 0;
  std::string ct_h, ct_method = "auto";
  c_count->add_option("--s", ct_s, "number of variable pairs")->required();
  c_count->add_option("--k", ct_k, "degree (checked against --h)");
  c_count->add_option("--X", ct_X, "box height")->required();
  c_count->add_option("--h", ct_h, "shift tuple h1,h2,...");
  c_count->add_option("--method", ct_method, "auto|brute|mitm|dft")
      ->check(CLI::IsMember({"auto", "brute", "mitm", "dft"}));

  // ladder
  auto* c_ladder = sub("ladder", "counts over a height ladder");
  int ld_s = 1, ld_k = 0;
  std::string ld_h, ld_xs, ld_method = "auto";
  c_ladder->add_option("--s", ld_s)->required();
  c_ladder->add_option("--k", ld_k);
  c_ladder->add_option("--h", ld_h, "shift tuple h1,h2,...");
  c_ladder->add_option("--xs", ld_xs, "heights X1,X2,...")->required();
  c_ladder->add_option("--method", ld_method)
      ->check(CLI::IsMember({"auto", "brute", "mitm", "dft"}));

  // fit
  auto* c_fit = sub(
      "fit", "log-log exponent fit, with catalog comparison when (s,k,h) known");
  std::string ft_record, ft_xs, ft_counts, ft_h;
  long long ft_index = -1;
  int ft_s = 0, ft_k = 0;
  c_fit->add_option("--record", ft_record, "results file with a ladder record");
  c_fit->add_option("--index", ft_index, "record index (default: last)");
  c_fit->add_option("--xs", ft_xs, "heights X1,X2,...");
  c_fit->add_option("--counts", ft_counts, "counts c1,c2,... (decimal)");
  c_fit->add_option("--s", ft_s);
  c_fit->add_option("--k", ft_k);
  c_fit->add_option("--h", ft_h);

  // catalog
  auto* c_cat = sub("catalog", "proved exponent records");
  int cg_s = 1, cg_k = 0;
  std::string cg_h;
  c_cat->add_option("--s", cg_s)->required();
  c_cat->add_option("--k", cg_k);
  c_cat->add_option("--h", cg_h, "shift tuple h1,h2,...");

  // sums
  auto* c_sums = sub("sums",
                                    "exponential sums, kernels, integrals, "
                                    "restricted moments");
  bool sm_weyl = false, sm_shifted = false, sm_kernel = false,
       sm_complete = false, sm_integral = false, sm_moment = false;
  c_sums->add_flag("--weyl", sm_weyl, "degree-k unit sum at alpha");
  c_sums->add_flag("--shifted", sm_shifted, "shifted-profile sum at alpha");
  c_sums->add_flag("--kernel", sm_kernel, "linear kernel sum");
  c_sums->add_flag("--complete", sm_complete, "complete sum S(q,a)");
  c_sums->add_flag("--integral", sm_integral, "unit oscillatory integral");
  c_sums->add_flag("--moment", sm_moment, "Monte Carlo restricted moment");
  std::string sm_alpha, sm_h, sm_a, sm_beta, sm_box;
  long long sm_X = 0, sm_q = 0, sm_fhi = 0, sm_ghi = 1, sm_maxe = 1000000,
            sm_dX = 0;
  double sm_gamma = 0, sm_tol = 1e-9;
  int sm_u = 1, sm_r = 0, sm_cls = 0, sm_twist = 1;
  c_sums->add_option("--alpha", sm_alpha, "point a1,a2,...");
  c_sums->add_option("--h", sm_h, "shift tuple");
  c_sums->add_option("--X", sm_X, "height");
  c_sums->add_option("--gamma", sm_gamma, "kernel argument");
  c_sums->add_option("--q", sm_q, "modulus");
  c_sums->add_option("--a", sm_a, "numerators a1,...,ak");
  c_sums->add_option("--beta", sm_beta, "integral argument b1,...,bk");
  c_sums->add_option("--tol", sm_tol, "quadrature tolerance");
  c_sums->add_option("--max-evals", sm_maxe, "evaluation budget");
  c_sums->add_option("--u", sm_u, "number of |f|^2 factors");
  c_sums->add_option("--r", sm_r, "number of |g|^2 factors");
  c_sums->add_option("--fhi", sm_fhi, "f summation range");
  c_sums->add_option("--ghi", sm_ghi, "g summation range");
  c_sums->add_option("--twist", sm_twist, "1: multiply by e(-alpha.h)");
  c_sums->add_option("--box", sm_box, "region lo1,hi1,...,lok,hik");
  c_sums->add_option("--cls", sm_cls, "dissection class 1..4");
  c_sums->add_option("--dissect-X", sm_dX, "dissection height");

  // arcs
  auto* c_arcs = sub("arcs", "arc membership and dissection");
  bool ar_classify = false, ar_major = false, ar_box = false;
  c_arcs->add_flag("--classify", ar_classify, "dissection class of alpha");
  c_arcs->add_flag("--major1d", ar_major, "leading-coordinate major arc test");
  c_arcs->add_flag("--box", ar_box, "simultaneous-approximation box test");
  std::string ar_alpha;
  int ar_k = 0;
  long long ar_X = 0;
  double ar_alpha1 = 0, ar_Q = 0, ar_Z = 0;
  c_arcs->add_option("--alpha", ar_alpha, "point a1,...,ak (or scalar for --major1d)");
  c_arcs->add_option("--k", ar_k, "degree");
  c_arcs->add_option("--X", ar_X, "height")->required();
  c_arcs->add_option("--Q", ar_Q, "major-arc cutoff");
  c_arcs->add_option("--Z", ar_Z, "box cutoff");

  // singular
  auto* c_sing = sub("singular",
                                    "singular series / singular integral");
  bool sg_series = false, sg_integral = false;
  int sg_s = 1, sg_k = 0;
  std::string sg_h, sg_n;
  long long sg_qmax = 20, sg_maxe = 100000000;
  double sg_B = 10.0, sg_tol = 0;
  c_sing->add_flag("--series", sg_series, "truncated singular series");
  c_sing->add_flag("--integral", sg_integral, "truncated singular integral");
  c_sing->add_option("--s", sg_s)->required();
  c_sing->add_option("--k", sg_k);
  c_sing->add_option("--h", sg_h, "shift tuple (series)");
  c_sing->add_option("--n", sg_n, "real targets n1,...,nk (integral)");
  c_sing->add_option("--qmax", sg_qmax, "series truncation");
  c_sing->add_option("--B", sg_B, "integral truncation");
  c_sing->add_option("--tol", sg_tol, "integral tolerance");
  c_sing->add_option("--max-evals", sg_maxe, "integral evaluation budget");

  // predict
  auto* c_pred = sub("predict",
                                    "product prediction series*integral*X^power");
  int pd_s = 1, pd_k = 0;
  std::string pd_h, pd_compare = "none";
  long long pd_X = 0, pd_qmax = 40, pd_maxe = 2000000000;
  double pd_B = 20.0, pd_tol = 0.05;
  c_pred->add_option("--s", pd_s)->required();
  c_pred->add_option("--k", pd_k);
  c_pred->add_option("--h", pd_h, "shift tuple");
  c_pred->add_option("--X", pd_X, "height")->required();
  c_pred->add_option("--qmax", pd_qmax, "series truncation");
  c_pred->add_option("--B", pd_B, "integral truncation");
  c_pred->add_option("--tol", pd_tol, "integral tolerance");
  c_pred->add_option("--max-evals", pd_maxe, "integral evaluation budget");
  c_pred->add_option("--compare", pd_compare,
                     "also count exactly: none|auto|brute|mitm|dft")
      ->check(CLI::IsMember({"none", "auto", "brute", "mitm", "dft"}));

  // verify
  auto* c_ver = sub("verify", "randomized identity suites");
  std::string vf_suite = "all";
  long long vf_trials = 200;
  c_ver->add_option("--suite", vf_suite, "suite name or 'all'");
  c_ver->add_option("--trials", vf_trials, "trials per suite");

  // replay
  auto* c_rep = sub("replay", "re-run a stored record");
  std::string rp_record;
  long long rp_index = -1;
  c_rep->add_option("--record", rp_record, "results file")->required();
  c_rep->add_option("--index", rp_index, "record index (default: last)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    // Precedence: defaults, then config file, then explicit flags. The flag
    // values were already written into g by CLI11, so stash them, re-apply
    // the file, and restore any flag the user actually passed.
    if (!config_path.empty()) {
      const Gconf flags = g;
      std::ifstream in(config_path);
      if (!in) invalid("cannot open config file '" + config_path + "'");
      json fileconf;
      try {
        fileconf = json::parse(in);
      } catch (const json::exception& e) {
        invalid(std::string("config file is not valid JSON: ") + e.what());
      }
      gconf_from_json(g, fileconf, "config file");
      if (o_threads->count()) g.c.threads = flags.c.threads;
      if (o_entries->count()) g.c.max_entries = flags.c.max_entries;
      if (o_enum->count()) g.c.max_enumeration = flags.c.max_enumeration;
      if (o_seed->count()) g.c.seed = flags.c.seed;
      if (o_tol->count()) g.c.tol = flags.c.tol;
      if (o_samples->count()) g.c.mc_samples = flags.c.mc_samples;
      if (o_cache->count()) g.cache_dir = flags.cache_dir;
      if (o_results->count()) g.results = flags.results;
      if (o_format->count()) g.format = flags.format;
      if (o_slack->count()) g.slack = flags.slack;
      if (o_eps->count()) g.eps = flags.eps;
      if (o_bigc->count()) g.bigC = flags.bigC;
    }
    g.rebind();

    // Build the params object for the chosen subcommand.
    std::string cmd;
    json params;
    if (c_count->parsed()) {
      cmd = "count";
      int k = ct_k;
      const auto h = resolve_h(ct_h, k);
      if (ct_X < 1) invalid("--X must be at least 1");
      params = {{"s", ct_s}, {"k", k}, {"X", ct_X}, {"h", h},
                {"method", ct_method}};
    } else if (c_ladder->parsed()) {
      cmd = "ladder";
      int k = ld_k;
      const auto h = resolve_h(ld_h, k);
      params = {{"s", ld_s},
                {"k", k},
                {"h", h},
                {"xs", parse_ll_list(ld_xs, "--xs")},
                {"method", ld_method}};
    } else if (c_fit->parsed()) {
      cmd = "fit";
      params = json::object();
      if (!ft_record.empty()) {
        params["record"] = ft_record;
        // Resolve "last record" to a concrete index now: the results file is
        // append-only, so replaying this fit later re-reads the same line.
        if (ft_index < 0) {
          std::ifstream in(ft_record);
          if (!in) invalid("cannot open record file '" + ft_record + "'");
          long long count = 0;
          std::string line;
          while (std::getline(in, line))
            if (!line.empty()) ++count;
          if (count == 0) invalid("record file '" + ft_record + "' is empty");
          ft_index = count - 1;
        }
        params["index"] = ft_index;
      } else {
        if (ft_xs.empty() || ft_counts.empty())
          invalid("fit needs either --record or both --xs and --counts");
        params["xs"] = parse_ll_list(ft_xs, "--xs");
        json counts = json::array();
        std::stringstream ss(ft_counts);
        std::string item;
        while (std::getline(ss, item, ',')) counts.push_back(item);
        params["counts"] = counts;
        if (!ft_h.empty()) {
          int k = ft_k;
          params["h"] = resolve_h(ft_h, k);
          params["k"] = k;
          params["s"] = ft_s;
          if (ft_s < 1) invalid("catalog comparison needs --s");
        }
      }
    } else if (c_cat->parsed()) {
      cmd = "catalog";
      int k = cg_k;
      const auto h = resolve_h(cg_h, k);
      params = {{"s", cg_s}, {"k", k}, {"h", h}};
    } else if (c_sums->parsed()) {
      cmd = "sums";
      const int modes = sm_weyl + sm_shifted + sm_kernel + sm_complete +
                        sm_integral + sm_moment;
      if (modes != 1)
        invalid("sums needs exactly one of --weyl --shifted --kernel "
                "--complete --integral --moment");
      params = json::object();
      if (sm_weyl || sm_shifted) {
        params["mode"] = sm_weyl ? "weyl" : "shifted";
        if (sm_alpha.empty()) invalid("need --alpha");
        params["alpha"] = parse_d_list(sm_alpha, "--alpha");
        if (sm_X < 1) invalid("need --X >= 1");
        params["X"] = sm_X;
        if (sm_shifted) {
          if (sm_h.empty()) invalid("need --h");
          params["h"] = parse_ll_list(sm_h, "--h");
        }
      } else if (sm_kernel) {
        params["mode"] = "kernel";
        params["gamma"] = sm_gamma;
        if (sm_X < 1) invalid("need --X >= 1");
        params["X"] = sm_X;
      } else if (sm_complete) {
        params["mode"] = "complete";
        if (sm_q < 1) invalid("need --q >= 1");
        if (sm_a.empty()) invalid("need --a");
        params["q"] = sm_q;
        params["a"] = parse_ll_list(sm_a, "--a");
      } else if (sm_integral) {
        params["mode"] = "integral";
        if (sm_beta.empty()) invalid("need --beta");
        params["beta"] = parse_d_list(sm_beta, "--beta");
        params["tol"] = sm_tol;
        params["max_evals"] = sm_maxe;
      } else {
        params["mode"] = "moment";
        if (sm_h.empty()) invalid("need --h (defines the degree)");
        params["u"] = sm_u;
        params["r"] = sm_r;
        params["h"] = parse_ll_list(sm_h, "--h");
        if (sm_fhi < 1) invalid("need --fhi >= 1");
        params["fhi"] = sm_fhi;
        params["ghi"] = sm_ghi;
        params["twist"] = sm_twist;
        if (!sm_box.empty()) params["box"] = parse_d_list(sm_box, "--box");
        if (sm_cls > 0) {
          params["cls"] = sm_cls;
          if (sm_dX < 2) invalid("dissection region needs --dissect-X >= 2");
          params["dissect_X"] = sm_dX;
        }
        if (sm_X > 0) params["X"] = sm_X;
      }
    } else if (c_arcs->parsed()) {
      cmd = "arcs";
      const int modes = ar_classify + ar_major + ar_box;
      if (modes != 1)
        invalid("arcs needs exactly one of --classify --major1d --box");
      params = json::object();
      params["X"] = ar_X;
      if (ar_classify || ar_box) {
        if (ar_alpha.empty()) invalid("need --alpha");
        const auto alpha = parse_d_list(ar_alpha, "--alpha");
        if (ar_k > 0 && ar_k != static_cast<int>(alpha.size()))
          invalid("--alpha has " + std::to_string(alpha.size()) +
                  " components but --k is " + std::to_string(ar_k));
        params["alpha"] = alpha;
        params["mode"] = ar_classify ? "classify" : "box";
        if (ar_box) {
          if (!(ar_Z > 0)) invalid("need --Z > 0");
          params["Z"] = ar_Z;
        }
      } else {
        params["mode"] = "major1d";
        if (ar_alpha.empty()) invalid("need --alpha");
        const auto alpha = parse_d_list(ar_alpha, "--alpha");
        if (alpha.size() != 1) invalid("--major1d takes a scalar --alpha");
        ar_alpha1 = alpha[0];
        params["alpha"] = ar_alpha1;
        if (!(ar_Q > 0)) invalid("need --Q > 0");
        if (ar_k < 1) invalid("need --k");
        params["Q"] = ar_Q;
        params["k"] = ar_k;
      }
    } else if (c_sing->parsed()) {
      cmd = "singular";
      if (sg_series == sg_integral)
        invalid("singular needs exactly one of --series --integral");
      params = json::object();
      params["s"] = sg_s;
      if (sg_series) {
        params["mode"] = "series";
        int k = sg_k;
        params["h"] = resolve_h(sg_h, k);
        params["qmax"] = sg_qmax;
      } else {
        params["mode"] = "integral";
        if (sg_n.empty()) {
          if (sg_k < 1) invalid("need --n (or --k for the zero target)");
          params["n"] = std::vector<double>(sg_k, 0.0);
        } else {
          params["n"] = parse_d_list(sg_n, "--n");
        }
        params["B"] = sg_B;
        params["tol"] = sg_tol > 0 ? sg_tol : g.c.tol;
        params["max_evals"] = sg_maxe;
      }
    } else if (c_pred->parsed()) {
      cmd = "predict";
      int k = pd_k;
      const auto h = resolve_h(pd_h, k);
      if (pd_X < 2) invalid("--X must be at least 2");
      params = {{"s", pd_s},     {"k", k},
                {"h", h},        {"X", pd_X},
                {"qmax", pd_qmax}, {"B", pd_B},
                {"tol", pd_tol}, {"max_evals", pd_maxe},
                {"compare", pd_compare}};
    } else if (c_ver->parsed()) {
      cmd = "verify";
      if (vf_trials < 1) invalid("--trials must be at least 1");
      params = {{"suite", vf_suite}, {"trials", vf_trials}};
    } else if (c_rep->parsed()) {
      return run_replay(json{{"record", rp_record}, {"index", rp_index}});
    }

    params["config"] = gconf_to_json(g);

    const auto t0 = std::chrono::steady_clock::now();
    const RunOutput out = dispatch(cmd, g, params);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    emit(g, cmd, out);
    write_record(g, cmd, params, out, wall);
    return out.exit_code;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.exit_code;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
