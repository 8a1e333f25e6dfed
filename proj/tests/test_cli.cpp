#include "hypoco/cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

using real = double;

int run(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.emplace_back("hypoco");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& a : full) argv.push_back(a.c_str());
  return hypoco::cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("cli_tmp") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

real rate_from_certificate(const std::string& text) {
  const auto pos = text.find("\nrate = ");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + 8));
}

}  // namespace

TEST_CASE("usage: help succeeds, bad invocations fail cleanly") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"no-such-command"}) == 1);
  CHECK(run({"certify-kfp", "--no-such-flag"}) == 1);
  CHECK(run({"certify-telegraph"}) == 1);  // --config is required
}

TEST_CASE("certify-kfp: pinned beta = 1 certifies the boundary rate zero") {
  const auto dir = fresh_dir("kfp_pinned");
  const int code = run({"certify-kfp", "--A", "1", "--beta", "1", "--no-refine", "--out-dir",
                        dir.string()});
  CHECK(code == 2);
  const std::string cert = slurp(dir / "certificate.txt");
  CHECK(contains(cert, "model = kfp"));
  CHECK(contains(cert, "feasible = 1"));
  CHECK(contains(cert, "\nrate = 0\n"));
  const std::string evals = slurp(dir / "evals.csv");
  CHECK(evals.rfind("A,beta,k,tau,lambda,eta,nu_star,rate,feasible\n", 0) == 0);
  CHECK(count_lines(evals) == 2);  // header + the single pinned cell
}

TEST_CASE("certify-kfp: strong transport lands near the published rate, bit-stable") {
  const auto d1 = fresh_dir("kfp_v10_a");
  const auto d2 = fresh_dir("kfp_v10_b");
  const std::vector<std::string> args{"certify-kfp", "--v", "10", "--b", "1"};
  auto with_out = [&](const fs::path& d) {
    auto a = args;
    a.push_back("--out-dir");
    a.push_back(d.string());
    return a;
  };
  CHECK(run(with_out(d1)) == 0);
  CHECK(run(with_out(d2)) == 0);
  const std::string c1 = slurp(d1 / "certificate.txt");
  const real rate = rate_from_certificate(c1);
  CHECK(rate > 0.45);
  CHECK(rate < 0.65);
  CHECK(c1 == slurp(d2 / "certificate.txt"));
  CHECK(slurp(d1 / "evals.csv") == slurp(d2 / "evals.csv"));
}

TEST_CASE("table: all twenty cells certify and the output is bit-stable") {
  const auto d1 = fresh_dir("table_a");
  const auto d2 = fresh_dir("table_b");
  CHECK(run({"table", "--out-dir", d1.string()}) == 0);
  CHECK(run({"table", "--out-dir", d2.string()}) == 0);
  const std::string t1 = slurp(d1 / "table.csv");
  CHECK(t1.rfind("v,b,rate_certified,rate_theoretical\n", 0) == 0);
  CHECK(count_lines(t1) == 21);
  CHECK(t1 == slurp(d2 / "table.csv"));
}

TEST_CASE("validate: the oracle pipeline passes end to end") {
  const auto dir = fresh_dir("validate");
  CHECK(run({"validate", "--out-dir", dir.string()}) == 0);
  const std::string report = slurp(dir / "validation.txt");
  CHECK(contains(report, "ALL CHECKS PASSED"));
  CHECK(!contains(report, "FAIL "));
}

TEST_CASE("simulate: snapshot estimates with reproducible output") {
  const auto d1 = fresh_dir("simulate_a");
  const auto d2 = fresh_dir("simulate_b");
  const std::vector<std::string> args{"simulate",  "--t-end",    "0.2", "--n-outer", "20",
                                      "--n-inner", "4",          "--seed", "3",
                                      "--snapshots", "0.1,0.2"};
  auto with_out = [&](const fs::path& d) {
    auto a = args;
    a.push_back("--out-dir");
    a.push_back(d.string());
    return a;
  };
  CHECK(run(with_out(d1)) == 0);
  CHECK(run(with_out(d2)) == 0);
  const std::string est = slurp(d1 / "estimates.csv");
  CHECK(est.rfind("t,F_hat,stderr,bias_correction\n", 0) == 0);
  CHECK(count_lines(est) == 3);
  CHECK(est == slurp(d2 / "estimates.csv"));
}

TEST_CASE("simulate: invalid step size is a usage error") {
  const auto dir = fresh_dir("simulate_bad");
  CHECK(run({"simulate", "--dt", "0.02", "--out-dir", dir.string()}) == 1);
}

TEST_CASE("density: histogram snapshots") {
  const auto dir = fresh_dir("density");
  const int code = run({"density", "--t-end", "0.5", "--n-outer", "50", "--n-inner", "1",
                        "--snapshots", "0.5", "--x0", "1", "--out-dir", dir.string()});
  CHECK(code == 0);
  const std::string snap = slurp(dir / "snapshots.csv");
  CHECK(snap.rfind("t,bin_center,density\n", 0) == 0);
  CHECK(count_lines(snap) == 1 + 256);
}

TEST_CASE("envelope: clamped domination holds and the report is bit-stable") {
  const auto d1 = fresh_dir("envelope_a");
  const auto d2 = fresh_dir("envelope_b");
  CHECK(run({"envelope", "--clamp", "--out-dir", d1.string()}) == 0);
  CHECK(run({"envelope", "--clamp", "--out-dir", d2.string()}) == 0);
  const std::string dom = slurp(d1 / "domination.csv");
  CHECK(dom.rfind("t,F,phi,corrected_bound,violation\n", 0) == 0);
  CHECK(contains(dom, "# dominated = 1"));
  CHECK(dom == slurp(d2 / "domination.csv"));
}

TEST_CASE("certify-telegraph: constant rates from a config file") {
  const auto dir = fresh_dir("telegraph");
  const fs::path cfg = dir / "rates.cfg";
  {
    std::ofstream out(cfg);
    out << "potential = cosine_torus\n"
        << "ell = 6.283185307179586\n"
        << "amplitude = 0\n"
        << "rate_plus = 1\n"
        << "rate_minus = 1\n";
  }
  const int code = run({"certify-telegraph", "--config", cfg.string(), "--grid-a", "8",
                        "--grid-beta", "6", "--alpha", "0.5", "--out-dir", dir.string()});
  CHECK(code == 0);
  const std::string cert = slurp(dir / "certificate.txt");
  CHECK(contains(cert, "model = telegraph"));
  CHECK(contains(cert, "feasible = 1"));
  const std::string evals = slurp(dir / "evals.csv");
  CHECK(evals.rfind("A,beta,alpha,k,tau,lambda,eta,nu_star,h_k,lambda_k,sup_h,rate,feasible\n",
                    0) == 0);

  const fs::path bad = dir / "bad.cfg";
  {
    std::ofstream out(bad);
    out << slurp(cfg) << "bogus = 3\n";
  }
  CHECK(run({"certify-telegraph", "--config", bad.string(), "--out-dir", dir.string()}) == 1);
}
