#include <doctest.h>

#include <unistd.h>
#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "acomid/data_io.hpp"

using namespace acomid;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("acomid_io_" + std::to_string(std::random_device{}()) + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& body) const {
    const auto p = path / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("read_libsvm examples") {
  TempDir tmp;
  const auto empty = read_libsvm(tmp.write("e.svm", ""));
  CHECK(empty.empty());
  CHECK(empty.dim == 0);
  CHECK(read_libsvm(tmp.write("e2.svm", ""), 9).dim == 9);

  const auto one = read_libsvm(tmp.write("a.svm", "+1 3:1.0\n"));
  REQUIRE(one.size() == 1);
  CHECK(one.samples[0].y == 1);
  CHECK(one.samples[0].x == SparseVec(3, {{2, 1.0}}));
  CHECK(one.dim == 3);

  const auto two = read_libsvm(tmp.write("b.svm", "0 1:0.5 7:2\n"));
  REQUIRE(two.size() == 1);
  CHECK(two.samples[0].y == -1);
  CHECK(two.samples[0].x == SparseVec(7, {{0, 0.5}, {6, 2.0}}));

  const auto labels = read_libsvm(tmp.write("c.svm", "1 1:1\n-1 1:1\n+1 2:1\n0 2:1\n"));
  REQUIRE(labels.size() == 4);
  CHECK(labels.samples[0].y == 1);
  CHECK(labels.samples[1].y == -1);
  CHECK(labels.samples[2].y == 1);
  CHECK(labels.samples[3].y == -1);
}

TEST_CASE("read_libsvm errors carry the line number") {
  TempDir tmp;
  const auto check_line = [&](const std::string& body, std::size_t line) {
    const auto p = tmp.write("bad.svm", body);
    try {
      read_libsvm(p);
      FAIL("expected ParseError for: " << body);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(std::string(e.what()).find(":" + std::to_string(line)) != std::string::npos);
    }
  };
  check_line("+1 1:1\n+1 3:1 2:1\n", 2);
  check_line("+1 1:1\n+1 1:1\n2 1:1\n", 3);
  check_line("+1 0:1\n", 1);
  check_line("+1 1:x\n", 1);
  check_line("+1 1\n", 1);
  check_line("+1 2:1 2:1\n", 1);
  CHECK_THROWS(read_libsvm(tmp.path / "missing.svm"));
  CHECK_THROWS_AS(read_libsvm(tmp.write("o.svm", "+1 5:1\n"), 3), std::invalid_argument);
}

TEST_CASE("gzip input is inflated transparently") {
  TempDir tmp;
  const std::string body = "+1 2:0.25 4:1\n0 1:3\n";
  const auto gz = tmp.path / "d.svm.gz";
  gzFile f = gzopen(gz.string().c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, body.data(), static_cast<unsigned>(body.size()));
  gzclose(f);
  const auto a = read_libsvm(gz);
  const auto b = read_libsvm(tmp.write("d.svm", body));
  REQUIRE(a.size() == 2);
  CHECK(a.dim == b.dim);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.samples[i].x == b.samples[i].x);
    CHECK(a.samples[i].y == b.samples[i].y);
  }
}

TEST_CASE("property: write(read(f)) is byte-identical for canonical files") {
  TempDir tmp;
  const std::string canonical = "+1 1:0.5 3:2 10:1e-07\n-1 2:-3.25\n+1 4:0.1\n";
  const auto in = tmp.write("in.svm", canonical);
  const auto out = tmp.path / "out.svm";
  write_libsvm(read_libsvm(in), out);
  CHECK(slurp(out) == canonical);

  // Index-normalized form of a non-canonical file is a fixed point too.
  write_libsvm(read_libsvm(tmp.write("nc.svm", "1 1:0.50 3:2.0\n0 2:1\n")), tmp.path / "n1.svm");
  write_libsvm(read_libsvm(tmp.path / "n1.svm"), tmp.path / "n2.svm");
  CHECK(slurp(tmp.path / "n1.svm") == "+1 1:0.5 3:2\n-1 2:1\n");
  CHECK(slurp(tmp.path / "n1.svm") == slurp(tmp.path / "n2.svm"));

  SyntheticProfile p{200, 50, 3, 9, 77, std::nullopt, 0.0};
  const auto syn = gen_synthetic(p);
  write_libsvm(syn, tmp.path / "s1.svm");
  const auto back = read_libsvm(tmp.path / "s1.svm", 200);
  write_libsvm(back, tmp.path / "s2.svm");
  CHECK(slurp(tmp.path / "s1.svm") == slurp(tmp.path / "s2.svm"));
  for (std::size_t i = 0; i < syn.size(); ++i) CHECK(back.samples[i].x == syn.samples[i].x);
}

TEST_CASE("gen_synthetic examples and invariants") {
  const auto ones = gen_synthetic(SyntheticProfile{50, 100, 1, 1, 3, std::nullopt, 0.0});
  for (const auto& s : ones.samples) CHECK(s.x.nnz() == 1);

  SyntheticProfile avazu{2'000'000, 200, 30, 60, 5, std::nullopt, 0.0};
  const auto a = gen_synthetic(avazu);
  const auto b = gen_synthetic(avazu);
  CHECK(a.dim == 2'000'000);
  std::set<std::size_t> seen_k;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto k = a.samples[i].x.nnz();
    CHECK(k >= 30);
    CHECK(k <= 60);
    seen_k.insert(k);
    for (double v : a.samples[i].x.values()) {
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(a.samples[i].x == b.samples[i].x);
    CHECK(a.samples[i].y == b.samples[i].y);
  }
  CHECK(seen_k.size() > 10);

  SyntheticProfile planted{20, 300, 2, 8, 9, make_planted_w(20, 10), 0.0};
  const auto pl = gen_synthetic(planted);
  for (const auto& s : pl.samples) {
    double m = 0;
    for (std::size_t k = 0; k < s.x.nnz(); ++k) m += s.x.values()[k] * (*planted.planted_w)[s.x.indices()[k]];
    CHECK(s.y == (m >= 0 ? 1 : -1));
  }

  CHECK_THROWS_AS(gen_synthetic(SyntheticProfile{10, 1, 0, 1, 1, std::nullopt, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(gen_synthetic(SyntheticProfile{10, 1, 5, 4, 1, std::nullopt, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(gen_synthetic(SyntheticProfile{10, 1, 5, 11, 1, std::nullopt, 0.0}), std::invalid_argument);
}
