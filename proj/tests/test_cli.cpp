#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cli.hpp"
#include "mmorder/space_io.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

using namespace mmorder;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mmorder_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// The CLI prints to stdout; capture it around run().
struct CoutCapture {
  std::ostringstream buffer;
  std::streambuf* old;
  CoutCapture() : old(std::cout.rdbuf(buffer.rdbuf())) {}
  ~CoutCapture() { std::cout.rdbuf(old); }
  std::string text() const { return buffer.str(); }
};

int run(std::initializer_list<std::string> args, std::string* out = nullptr) {
  CoutCapture cap;
  int code = cli::run(std::vector<std::string>(args));
  if (out) *out = cap.text();
  return code;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

}  // namespace

TEST_CASE("validate: good file exits 0, triangle violation exits 1 with indices") {
  TempDir dir;
  write_space(AnySpace(x1()), dir.file("x1.json"));
  CHECK(run({"validate", dir.file("x1.json")}) == 0);

  write_text(dir.file("bad.json"), R"({
    "mode": "exact",
    "points": [{"label":"1","mass":"1"},{"label":"2","mass":"1"},{"label":"3","mass":"1"}],
    "dist": [["0","1","5"],["1","0","1"],["5","1","0"]]
  })");
  std::string out;
  CHECK(run({"validate", dir.file("bad.json")}, &out) == 1);
  CHECK(out.find("triangle violation at (0,1,2)") != std::string::npos);

  CHECK(run({"validate", dir.file("missing.json")}) == 2);
}

TEST_CASE("round trip through write and read preserves the space") {
  TempDir dir;
  write_space(AnySpace(three_point_cde()), dir.file("y.json"));
  AnySpace back = read_space(dir.file("y.json"));
  REQUIRE(std::holds_alternative<MmSpaceQ>(back));
  CHECK(is_equivalent(std::get<MmSpaceQ>(back), three_point_cde()).equivalent);

  auto xf = to_float(x1());
  xf.dist(0, 1) = xf.dist(1, 0) = 0.1234567890123456789;  // full-precision float round trip
  write_space(AnySpace(xf), dir.file("xf.json"));
  AnySpace backf = read_space(dir.file("xf.json"));
  REQUIRE(std::holds_alternative<MmSpaceD>(backf));
  CHECK(std::get<MmSpaceD>(backf).dist(0, 1) == xf.dist(0, 1));
}

TEST_CASE("exact mode accepts rational strings and rejects decimals") {
  TempDir dir;
  write_text(dir.file("ok.json"), R"({
    "mode": "exact",
    "points": [{"label":"a","mass":"1/3"},{"label":"b","mass":2}],
    "dist": [["0","1"],["1","0"]]
  })");
  AnySpace s = read_space(dir.file("ok.json"));
  CHECK(std::get<MmSpaceQ>(s).mass(0) == Rational(1, 3));

  write_text(dir.file("mix.json"), R"({
    "mode": "exact",
    "points": [{"label":"a","mass":0.3333},{"label":"b","mass":"2/3"}],
    "dist": [["0","1"],["1","0"]]
  })");
  CHECK_THROWS_WITH_AS(read_space(dir.file("mix.json")), doctest::Contains("decimal literal"),
                       SpaceIoError);
}

TEST_CASE("unknown fields are schema errors") {
  TempDir dir;
  write_text(dir.file("extra.json"), R"({
    "mode": "exact",
    "points": [{"label":"a","mass":"1","color":"red"}],
    "dist": [["0"]]
  })");
  CHECK_THROWS_WITH_AS(read_space(dir.file("extra.json")), doctest::Contains("unknown field"),
                       SpaceIoError);
  CHECK(run({"validate", dir.file("extra.json")}) == 2);
}

TEST_CASE("canon merges duplicates and is byte-stable") {
  TempDir dir;
  write_text(dir.file("dup.json"), R"({
    "mode": "exact",
    "points": [{"label":"a","mass":"1/3"},{"label":"a2","mass":"2/3"}],
    "dist": [["0","0"],["0","0"]]
  })");
  CHECK(run({"canon", dir.file("dup.json"), "--out", dir.file("c1.json")}) == 0);
  CHECK(run({"canon", dir.file("c1.json"), "--out", dir.file("c2.json")}) == 0);
  std::ifstream f1(dir.file("c1.json")), f2(dir.file("c2.json"));
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  auto c = std::get<MmSpaceQ>(read_space(dir.file("c1.json")));
  CHECK(c.size() == 1);
  CHECK(c.mass(0) == Rational(1));
}

TEST_CASE("compare exit codes and witness output") {
  TempDir dir;
  write_space(AnySpace(x1()), dir.file("x1.json"));
  write_space(AnySpace(y1()), dir.file("y1.json"));
  write_space(AnySpace(x_135()), dir.file("x135.json"));
  write_space(AnySpace(y_1234()), dir.file("y1234.json"));

  CHECK(run({"compare", "--order", "metric", dir.file("x1.json"), dir.file("y1.json"),
             "--witness", dir.file("w.json")}) == 0);
  std::ifstream wf(dir.file("w.json"));
  nlohmann::json w;
  wf >> w;
  CHECK(w["order"] == "metric");
  CHECK(w["witness"]["type"] == "metric");
  CHECK(w["witness"]["tau"].size() == 2);

  CHECK(run({"compare", "--order", "metric", dir.file("y1.json"), dir.file("x1.json")}) == 1);
  CHECK(run({"compare", "--order", "gen", dir.file("x135.json"), dir.file("y1234.json")}) == 0);
  CHECK(run({"compare", "--order", "global", dir.file("x135.json"), dir.file("y1234.json")}) == 1);
  // metric order with unequal totals is an error, not a verdict
  write_space(AnySpace(x2()), dir.file("x2.json"));
  write_space(AnySpace(y2()), dir.file("y2.json"));
  CHECK(run({"compare", "--order", "metric", dir.file("x2.json"), dir.file("y2.json")}) == 2);
  CHECK(run({"compare", "--order", "measure", dir.file("x2.json"), dir.file("y2.json")}) == 0);
}

TEST_CASE("mixed modes require an explicit tolerance") {
  TempDir dir;
  write_space(AnySpace(x1()), dir.file("exact.json"));
  write_space(AnySpace(to_float(y1())), dir.file("float.json"));
  CHECK(run({"compare", "--order", "metric", dir.file("exact.json"), dir.file("float.json")}) == 2);
  CHECK(run({"compare", "--order", "metric", dir.file("exact.json"), dir.file("float.json"),
             "--tol", "1e-9"}) == 0);
}

TEST_CASE("dmm prints atoms and block orthant masses") {
  TempDir dir;
  write_space(AnySpace(x1()), dir.file("x1.json"));
  std::string out;
  CHECK(run({"dmm", dir.file("x1.json"), "-m", "2", "--json", dir.file("nu.json")}, &out) == 0);
  CHECK(out.find("1/2") != std::string::npos);
  std::ifstream nf(dir.file("nu.json"));
  nlohmann::json nu;
  nf >> nu;
  CHECK(nu["atoms"].size() == 2);
  CHECK(nu["total_weight"] == "1");

  CHECK(run({"dmm", dir.file("x1.json"), "--block-orthant", "10", "--cross", "1"}, &out) == 0);
  CHECK(out.find("1/524288") != std::string::npos);  // 2/2^20 reduced
}

TEST_CASE("dist prints certified values and writes couplings") {
  TempDir dir;
  write_space(AnySpace(x1()), dir.file("x1.json"));
  write_space(AnySpace(y1()), dir.file("y1.json"));
  std::string out;
  CHECK(run({"dist", "--lambda", "1", dir.file("x1.json"), dir.file("y1.json"), "--coupling",
             dir.file("pi.json")}, &out) == 0);
  CHECK(out.find("certified") != std::string::npos);
  std::ifstream pf(dir.file("pi.json"));
  nlohmann::json pi;
  pf >> pi;
  CHECK(pi["matrix"].size() == 2);
  CHECK(run({"dist", "--lambda", "1", "--generalized", dir.file("x1.json"),
             dir.file("y1.json")}, &out) == 0);
  CHECK(out.find("d_gEur") != std::string::npos);
}

TEST_CASE("lub writes the bound and its report") {
  TempDir dir;
  write_space(AnySpace(x1()), dir.file("x1.json"));
  write_space(AnySpace(y1()), dir.file("y1.json"));
  CHECK(run({"lub", "--lambda", "1", dir.file("x1.json"), dir.file("y1.json"), "--out",
             dir.file("z.json"), "--report", dir.file("r.json")}) == 0);
  std::ifstream rf(dir.file("r.json"));
  nlohmann::json r;
  rf >> r;
  CHECK(r["le_metric_x1"] == true);
  CHECK(r["le_metric_x2"] == true);
  CHECK(r["additivity_residual"].get<double>() <= 1e-6);
  auto z = std::get<MmSpaceD>(read_space(dir.file("z.json")));
  CHECK(is_equivalent(z, canonicalize(to_float(y1())), 1e-9).equivalent);
}

TEST_CASE("simulate writes spaces plus a meta echo and is seed-deterministic") {
  TempDir dir;
  CHECK(run({"simulate", "moran", "--seed", "42", "-N", "5", "--gamma", "1", "-t", "10", "--out",
             dir.file("m1")}) == 0);
  CHECK(run({"simulate", "moran", "--seed", "42", "-N", "5", "--gamma", "1", "-t", "10", "--out",
             dir.file("m2")}) == 0);
  std::ifstream a(dir.file("m1") + "/space.json"), b(dir.file("m2") + "/space.json");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  std::ifstream mf(dir.file("m1") + "/meta.json");
  nlohmann::json meta;
  mf >> meta;
  CHECK(meta["kind"] == "moran");
  CHECK(meta["seed"] == "42");

  CHECK(run({"simulate", "coalescent", "--seed", "7", "-N", "4", "--gamma", "1", "--gamma2", "1",
             "--out", dir.file("c")}) == 0);
  CHECK(fs::exists(dir.file("c") + "/fast.json"));
  CHECK(fs::exists(dir.file("c") + "/slow.json"));

  CHECK(run({"simulate", "er", "--seed", "3", "-n", "5", "-p", "0.7", "-p", "0.3", "--out",
             dir.file("er")}) == 0);
  CHECK(fs::exists(dir.file("er") + "/meta.json"));

  CHECK(run({"simulate", "gw", "--seed", "2", "--b1", "0", "--b2", "1", "--scale", "10", "-g",
             "4", "--out", dir.file("gw")}) == 0);
  CHECK(fs::exists(dir.file("gw") + "/b1.json"));

  // --seed is mandatory for stochastic subcommands
  CHECK(run({"simulate", "moran", "-N", "5"}) == 2);
}

TEST_CASE("estimate subcommands run and report") {
  TempDir dir;
  std::string out;
  CHECK(run({"estimate", "wasserstein", "--gamma", "1", "--gamma2", "2", "--lambda", "1",
             "--reps", "20000", "--seed", "5", "--json", dir.file("w.json")}, &out) == 0);
  CHECK(out.find("closed form") != std::string::npos);
  CHECK(run({"estimate", "r12", "--gamma", "1", "--reps", "2000", "--seed", "6",
             "--cross-validate"}, &out) == 0);
  CHECK(run({"estimate", "monomial", "--sim", "moran", "--lambda", "1", "--reps", "50", "--seed",
             "7"}, &out) == 0);
  CHECK(out.find("E[Phi]") != std::string::npos);
  CHECK(run({"estimate", "wasserstein", "--gamma", "1", "--gamma2", "2", "--lambda", "1"}) == 2);
}

TEST_CASE("reproduce dispatches and rejects unknown scenarios") {
  std::string out;
  CHECK(run({"reproduce", "pony-order"}, &out) == 0);
  CHECK(out.find("[ok]") != std::string::npos);
  CHECK(run({"reproduce", "no-such-thing"}) == 2);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"compare", "--order", "bogus", "a", "b"}) == 2);
}
