// End-to-end tests of the command-line tool: each case spawns the built
// binary, captures stdout/stderr/exit code, and checks the documented
// contract (output, record file, exit codes, replay).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

using json = nlohmann::json;

namespace {

std::string g_dir;  // scratch directory for results/config files

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with the given arguments; unless the caller passes its own
// --results, results go to a per-call scratch file.
Run cli(const std::string& args, const std::string& results = "") {
  static int seq = 0;
  const std::string errfile = g_dir + "/err" + std::to_string(seq++) + ".txt";
  std::string results_arg;
  if (args.find("--results") == std::string::npos)
    results_arg = " --results " +
                  (results.empty() ? g_dir + "/scratch.jsonl" : results);
  const std::string cmd = std::string(VINSYS_CLI_PATH) + " " + args +
                          results_arg + " 2>" + errfile;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  Run r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(errfile);
  return r;
}

std::string chomp(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("scratch directory") {
  char tmpl[] = "/tmp/vinsys_cli_XXXXXX";
  REQUIRE(mkdtemp(tmpl) != nullptr);
  g_dir = tmpl;
}

TEST_CASE("count prints the exact value and exit 0") {
  auto r = cli("count --s 1 --k 2 --X 5 --h 1,3");
  CHECK(r.code == 0);
  CHECK(chomp(r.out) == "1");

  r = cli("count --s 2 --k 2 --X 10 --h 0,0");
  CHECK(r.code == 0);
  CHECK(chomp(r.out) == "190");

  r = cli("count --s 2 --k 3 --X 8 --h 0,5,0");
  CHECK(r.code == 0);
  CHECK(chomp(r.out) == "0");

  // length of h defines k when --k is absent
  r = cli("count --s 2 --X 10 --h 0,0 --method dft");
  CHECK(r.code == 0);
  CHECK(chomp(r.out) == "190");
}

TEST_CASE("invalid parameters exit 3 with a message") {
  auto r = cli("count --s 0 --X 5 --h 1");
  CHECK(r.code == 3);
  CHECK(r.err.find("error:") != std::string::npos);

  r = cli("count --s 1 --k 3 --X 5 --h 1,2");  // k mismatch
  CHECK(r.code == 3);
  CHECK(r.err.find("--k") != std::string::npos);

  r = cli("count --s 1 --X 5");  // no h, no k
  CHECK(r.code == 3);

  r = cli("count --s 1 --X 5 --h 1 --method nope");
  CHECK(r.code == 3);

  r = cli("nonsense --x 1");
  CHECK(r.code == 3);
}

TEST_CASE("budget refusal exits 2") {
  auto r = cli(
      "count --s 3 --k 3 --X 50 --h 0,0,0 --method brute --budget-enum 100");
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("ladder, fit from record, replay") {
  const std::string res = g_dir + "/ladder.jsonl";
  auto r = cli("ladder --s 2 --k 2 --h 0,0 --xs 5,10,20,40", res);
  CHECK(r.code == 0);
  json ladder = json::parse(chomp(r.out));
  REQUIRE(ladder.at("points").size() == 4);
  for (const auto& pt : ladder.at("points")) {
    const long X = pt.at("X").get<long>();
    CHECK(pt.at("count").get<std::string>() == std::to_string(2 * X * X - X));
  }

  r = cli("fit --record " + res, res);
  CHECK(r.code == 0);
  json fit = json::parse(chomp(r.out));
  const double slope = fit.at("fit").at("slope").get<double>();
  CHECK(slope > 2.0);
  CHECK(slope < 2.1);
  CHECK(fit.at("verdict") == "fitted");
  REQUIRE(fit.contains("comparison"));
  for (const auto& e : fit.at("comparison"))
    CHECK(e.at("verdict") == "consistent");

  // Both runs produced records with the documented schema.
  const auto recs = lines_of(slurp(res));
  REQUIRE(recs.size() == 2);
  for (const auto& line : recs) {
    json rec = json::parse(line);
    CHECK(rec.at("schema") == "vinsys-run/1");
    CHECK(rec.at("provenance").contains("version"));
  }
  CHECK(json::parse(recs[0]).at("command") == "ladder");
  CHECK(json::parse(recs[1]).at("command") == "fit");

  // Replaying each record reproduces it (exact counting is bit-identical,
  // and the fit consumed a stored index, so it re-reads the same line).
  r = cli("replay --record " + res + " --index 0", res);
  CHECK(r.code == 0);
  CHECK(r.out.find("replay ok") != std::string::npos);
  r = cli("replay --record " + res + " --index 1", res);
  CHECK(r.code == 0);

  // Doctoring a stored count must make replay fail with exit 4.
  auto doctored = lines_of(slurp(res));
  json bad = json::parse(doctored[0]);
  bad["result"]["points"][0]["count"] = "777";
  std::ofstream rewrite(res, std::ios::trunc);
  rewrite << bad.dump() << '\n' << doctored[1] << '\n';
  rewrite.close();
  r = cli("replay --record " + res + " --index 0", res);
  CHECK(r.code == 4);
  CHECK(r.err.find("mismatch") != std::string::npos);
}

TEST_CASE("ladder with a refused point warns and stays partial") {
  auto r = cli(
      "ladder --s 2 --k 2 --h 0,0 --xs 5,12 --method brute "
      "--budget-enum 20000");
  CHECK(r.code == 0);
  CHECK(r.err.find("warning:") != std::string::npos);
  CHECK(r.err.find("refused") != std::string::npos);
  json ladder = json::parse(chomp(r.out));
  CHECK(ladder.at("points")[0].at("ok").get<bool>());
  CHECK(ladder.at("points")[0].at("count") == "45");
  CHECK_FALSE(ladder.at("points")[1].at("ok").get<bool>());

  // CSV export marks the refused row.
  r = cli(
      "ladder --s 2 --k 2 --h 0,0 --xs 5,12 --method brute "
      "--budget-enum 20000 --format csv");
  CHECK(r.code == 0);
  auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "X,count,method,seconds");
  CHECK(rows[1].substr(0, 5) == "5,45,");
  CHECK(rows[2] == "12,,refused,");
}

TEST_CASE("fit on an all-zero ladder issues the identically-zero verdict") {
  auto r = cli("fit --xs 4,8,12 --counts 0,0,0");
  CHECK(r.code == 0);
  json fit = json::parse(chomp(r.out));
  CHECK(fit.at("verdict") == "identically zero");
  CHECK(fit.at("fit").at("identically_zero").get<bool>());
}

TEST_CASE("catalog lists records") {
  auto r = cli("catalog --s 3 --k 3 --h 0,5,0");
  CHECK(r.code == 0);
  json cat = json::parse(chomp(r.out));
  bool found = false;
  for (const auto& rec : cat.at("records"))
    if (rec.at("name") == "single-shift-degree") {
      found = true;
      CHECK(rec.at("exponent") == "2");
    }
  CHECK(found);
}

TEST_CASE("arcs classify prints the class tag") {
  auto r = cli("arcs --classify --k 3 --X 1000 --alpha 0,0,0");
  CHECK(r.code == 0);
  CHECK(chomp(r.out) == "W4");

  r = cli("arcs --major1d --alpha 0.5 --Q 2 --k 3 --X 1000");
  CHECK(r.code == 0);
  json m = json::parse(chomp(r.out));
  CHECK(m.at("in").get<bool>());  // 1/2 with q=2 <= Q
  CHECK(m.at("q").get<long>() == 2);

  r = cli("arcs --box --alpha 0,0,0 --Z 2 --X 1000");
  CHECK(r.code == 0);
  json b = json::parse(chomp(r.out));
  CHECK(b.at("in").get<bool>());
  CHECK(b.at("q").get<long>() == 1);
}

TEST_CASE("singular series and integral") {
  auto r = cli("singular --series --k 1 --s 1 --h 0 --qmax 20");
  CHECK(r.code == 0);
  CHECK(chomp(r.out) == "1.0");

  r = cli("singular --integral --s 1 --n 0 --B 100 --tol 1e-3");
  CHECK(r.code == 0);
  const double v = std::stod(chomp(r.out));
  CHECK(std::abs(v - 1.0) <= 1e-3);
}

TEST_CASE("sums modes") {
  auto r = cli("sums --weyl --alpha 0,0 --X 9");
  CHECK(r.code == 0);
  json w = json::parse(chomp(r.out));
  CHECK(w.at("re").get<double>() == doctest::Approx(9.0));

  r = cli("sums --complete --q 2 --a 1");
  CHECK(r.code == 0);
  json c = json::parse(chomp(r.out));
  CHECK(c.at("abs").get<double>() == doctest::Approx(0.0).epsilon(1e-12));

  r = cli("sums --kernel --gamma 0 --X 7");
  CHECK(r.code == 0);
  json kk = json::parse(chomp(r.out));
  CHECK(kk.at("re").get<double>() == doctest::Approx(7.0));
  CHECK(kk.at("bound").get<double>() >= 7.0);

  r = cli("sums --integral --beta 0");
  CHECK(r.code == 0);
  json i = json::parse(chomp(r.out));
  CHECK(i.at("re").get<double>() == doctest::Approx(1.0));

  r = cli(
      "sums --moment --u 1 --r 0 --h 0,0 --fhi 6 --X 6 "
      "--box 0,0.25,0,0.5 --mc-samples 20000");
  CHECK(r.code == 0);
  json m = json::parse(chomp(r.out));
  CHECK(m.at("measure").get<double>() == doctest::Approx(0.125));
  CHECK(m.at("conjectured_bound").get<double>() > 0);
  CHECK(m.at("samples").get<long>() == 20000);
}

TEST_CASE("predict with exact comparison") {
  auto r = cli(
      "predict --s 2 --k 1 --h 0 --X 50 --qmax 20 --B 100 --tol 1e-3 "
      "--compare auto");
  CHECK(r.code == 0);
  json p = json::parse(chomp(r.out));
  CHECK(p.at("exact") == "83350");
  const double ratio = p.at("ratio").get<double>();
  CHECK(ratio > 0.99);
  CHECK(ratio < 1.01);
}

TEST_CASE("verify prints per-suite status") {
  auto r = cli("verify --suite shift-identity --trials 100");
  CHECK(r.code == 0);
  CHECK(r.out.find("shift-identity: pass") != std::string::npos);
}

TEST_CASE("csv format for scalar results") {
  auto r = cli("count --s 2 --k 2 --X 10 --h 0,0 --format csv");
  CHECK(r.code == 0);
  CHECK(r.out.find("key,value") != std::string::npos);
  CHECK(r.out.find("count,190") != std::string::npos);
}

TEST_CASE("config file provides defaults, flags override") {
  const std::string conf = g_dir + "/conf.json";
  {
    std::ofstream out(conf);
    out << R"({"seed": 777, "budget_enumeration": 100})";
  }
  // The file's tiny enumeration budget applies...
  auto r = cli("count --s 3 --k 3 --X 50 --h 0,0,0 --method brute --config " +
               conf);
  CHECK(r.code == 2);
  // ...unless the flag overrides it.
  r = cli("count --s 2 --k 2 --X 10 --h 0,0 --method brute --config " + conf +
          " --budget-enum 2000000000");
  CHECK(r.code == 0);
  CHECK(chomp(r.out) == "190");

  // The effective seed lands in the stored record.
  const std::string res = g_dir + "/conf_res.jsonl";
  r = cli("count --s 1 --k 1 --X 3 --h 0 --config " + conf, res);
  CHECK(r.code == 0);
  json rec = json::parse(lines_of(slurp(res)).at(0));
  CHECK(rec.at("provenance").at("seed").get<uint64_t>() == 777);

  // Unknown config keys are rejected.
  const std::string bad = g_dir + "/bad.json";
  {
    std::ofstream out(bad);
    out << R"({"sed": 1})";
  }
  r = cli("count --s 1 --k 1 --X 3 --h 0 --config " + bad);
  CHECK(r.code == 3);
}
