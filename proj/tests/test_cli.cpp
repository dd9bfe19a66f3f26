#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "acomid/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "acomid");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream cap, err;
  auto* old = std::cout.rdbuf(cap.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = acomid::cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  std::cerr.rdbuf(old_err);
  return {code, cap.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> trailer(const std::string& out) {
  std::map<std::string, std::string> kv;
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::vector<std::string> csv_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

const fs::path kTmp = fs::temp_directory_path() / "acomid_cli_test";

}  // namespace

TEST_CASE("run: epochs 0 writes only the header") {
  fs::create_directories(kTmp);
  const auto out = kTmp / "empty.csv";
  const auto r = run_cli({"run", "--synthetic", "50,20,1,5", "--epochs", "0", "--out", out.string()});
  CHECK(r.code == 0);
  CHECK(slurp(out) == std::string(acomid::kCsvHeader) + "\n");
}

TEST_CASE("run: bad configuration exits nonzero") {
  CHECK(run_cli({"run", "--synthetic", "50,20,1,5", "--algo", "nope"}).code == 2);
  CHECK(run_cli({"run"}).code == 2);
  CHECK(run_cli({"run", "--synthetic", "50,20,1,5", "--eta", "10", "--lambda", "1"}).code == 2);
  CHECK(run_cli({"run", "--data", (kTmp / "does-not-exist.svm").string()}).code == 2);
}

TEST_CASE("run: the paper-style settings produce decreasing curves") {
  fs::create_directories(kTmp);
  const auto out = kTmp / "ftrl.csv";
  const auto r = run_cli({"run", "--algo", "aftrl", "--workers", "1", "--alpha", "0.1", "--beta", "1",
                          "--lambda1", "0.01", "--lambda2", "0.001", "--synthetic", "2000,300,5,15",
                          "--epochs", "3", "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto lines = csv_lines(slurp(out));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == acomid::kCsvHeader);
  const auto loss = [&](std::size_t i) {
    std::istringstream in(lines[i]);
    std::string step, epoch, sum;
    std::getline(in, step, ',');
    std::getline(in, epoch, ',');
    std::getline(in, sum, ',');
    return std::stod(sum);
  };
  CHECK(loss(3) < loss(1));

  const auto l2 = run_cli({"run", "--algo", "l2trick", "--eta", "0.0001", "--lambda", "0.001",
                           "--workers", "10", "--synthetic", "2000,300,5,15", "--out",
                           (kTmp / "l2.csv").string()});
  CHECK(l2.code == 0);
}

TEST_CASE("run: identical spec gives a byte-identical CSV") {
  fs::create_directories(kTmp);
  const std::vector<std::string> args{"run", "--algo", "comid", "--workers", "4", "--lambda", "0.01",
                                      "--synthetic", "500,200,3,9", "--epochs", "2", "--eval-every", "25"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", (kTmp / "a.csv").string()});
  b.insert(b.end(), {"--out", (kTmp / "b.csv").string()});
  REQUIRE(run_cli(a).code == 0);
  REQUIRE(run_cli(b).code == 0);
  CHECK(slurp(kTmp / "a.csv") == slurp(kTmp / "b.csv"));
  CHECK(csv_lines(slurp(kTmp / "a.csv")).size() == 17);
}

TEST_CASE("run: config file values apply and flags override them") {
  fs::create_directories(kTmp);
  const auto cfg = kTmp / "run.ini";
  std::ofstream(cfg) << "algo = dsgd\nsynthetic = 300,50,2,6\nepochs = 2\nlambda = 0.01\n";
  REQUIRE(run_cli({"run", "--config", cfg.string(), "--out", (kTmp / "c1.csv").string()}).code == 0);
  REQUIRE(run_cli({"run", "--algo", "dsgd", "--synthetic", "300,50,2,6", "--epochs", "2", "--lambda",
                   "0.01", "--out", (kTmp / "c2.csv").string()})
              .code == 0);
  CHECK(slurp(kTmp / "c1.csv") == slurp(kTmp / "c2.csv"));

  REQUIRE(run_cli({"run", "--config", cfg.string(), "--epochs", "1", "--out", (kTmp / "c3.csv").string()})
              .code == 0);
  CHECK(csv_lines(slurp(kTmp / "c3.csv")).size() == 2);
}

TEST_CASE("compare: identical specs have zero gaps") {
  const auto r = run_cli({"compare", "--synthetic", "200,60,2,6", "--epochs", "2", "--eval-every", "20"});
  REQUIRE(r.code == 0);
  const auto lines = csv_lines(r.out);
  REQUIRE(lines.size() > 2);
  CHECK(lines[0] == "step,logloss_a,logloss_b,gap");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].find('=') != std::string::npos) break;
    CHECK(lines[i].substr(lines[i].rfind(',') + 1) == "0");
  }
  CHECK(std::stod(trailer(r.out).at("final_linf")) == 0.0);
}

TEST_CASE("compare: mismatched data sources are rejected") {
  CHECK(run_cli({"compare", "--synthetic", "200,60,2,6", "--b", "seed=9"}).code == 2);
  CHECK(run_cli({"compare", "--synthetic", "200,60,2,6", "--b", "synthetic=200,61,2,6"}).code == 2);
  CHECK(run_cli({"compare", "--synthetic", "200,60,2,6", "--b", "nokey=1"}).code == 2);
}

TEST_CASE("compare: explicit COMID vs L2 trick at tiny eta*lambda") {
  const auto r = run_cli({"compare", "--synthetic", "300,200,3,9", "--epochs", "3", "--eta", "0.01",
                          "--lambda", "1e-5", "--a", "algo=comid-closed", "--b", "algo=l2trick"});
  REQUIRE(r.code == 0);
  CHECK(std::stod(trailer(r.out).at("final_linf")) < 1e-6);
}

TEST_CASE("compare: dense baseline transmits d / mean-nnz times more") {
  const auto r = run_cli({"compare", "--synthetic", "10000,100,30,60", "--lambda", "0.001",
                          "--workers", "4", "--a", "algo=dsgd", "--b", "algo=l2trick"});
  REQUIRE(r.code == 0);
  const auto kv = trailer(r.out);
  const double tx_b = std::stod(kv.at("tx_b"));
  CHECK(std::stod(kv.at("tx_a")) == 100.0 * 10000);
  const double ratio = std::stod(kv.at("tx_ratio_a_over_b"));
  CHECK(ratio == doctest::Approx(10000.0 / (tx_b / 100.0)).epsilon(1e-12));
  CHECK(ratio > 10000.0 / 60);
  CHECK(ratio < 10000.0 / 30);
}

TEST_CASE("verify: clean pass and mutation failure") {
  const auto ok = run_cli({"verify"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find(",fail,") == std::string::npos);

  const auto bad = run_cli({"verify", "--inject-ftrl-perturbation", "1e-6"});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("theorem4_equivalence,fail") != std::string::npos);
  fs::remove_all(kTmp);
}
