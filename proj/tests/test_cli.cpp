#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "nlmc/cli.hpp"
#include "nlmc/io.hpp"

using namespace nlmc;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "nlmc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nlmc_cli_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    write_text_file(path / name, text);
    return (path / name).string();
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

const char* kTriangle = R"({"vertices": 3,
 "edges": [{"u":0,"v":1,"w":1,"len":1}, {"u":1,"v":2,"w":1,"len":1}, {"u":0,"v":2,"w":1,"len":1}],
 "measure": [2, 2, 2]})";

const char* kPath = R"({"vertices": 3,
 "edges": [{"u":0,"v":1,"w":1,"len":1}, {"u":1,"v":2,"w":1,"len":1}],
 "measure": [1, 2, 1]})";

const char* kSkewed = R"({"vertices": 4,
 "edges": [{"u":0,"v":1,"w":1,"len":1}, {"u":1,"v":2,"w":1,"len":1.7},
           {"u":2,"v":3,"w":1,"len":0.6}, {"u":0,"v":3,"w":1,"len":1.3}, {"u":0,"v":2,"w":1,"len":1.1}],
 "measure": [3, 2, 3, 2]})";

}  // namespace

TEST_CASE("flow on the equilateral triangle") {
  TempDir dir;
  const auto g = dir.write("k3.json", kTriangle);
  const auto r = run({"flow", "--alpha", "0.5", "--tol", "1e-9", g, "--trace", dir.file("t.csv")});
  REQUIRE(r.code == 0);
  const Json doc = r.json();
  CHECK(doc["status"] == "converged");
  CHECK(doc["final_curvature_spread"].get<double>() <= 1e-9);
  CHECK(doc["components"][0]["growth_rate"].get<double>() == doctest::Approx(std::log(0.75)));
  CHECK(doc["config"]["alpha"] == 0.5);
  CHECK(doc["config"]["deletion_threshold"] == 2.0);
  CHECK(doc["config"]["seed"].is_number());
  const auto rows = trace_from_csv(read_text_file(dir.file("t.csv")));
  CHECK(rows.size() == doc["iterations"].get<std::size_t>());
}

TEST_CASE("counterexample trace alternates") {
  TempDir dir;
  const auto r = run({"counterexample", "--eps0", "0.01", "--trace", dir.file("c.json"), "--format", "json"});
  REQUIRE(r.code == 0);
  const Json doc = r.json();
  CHECK(doc["alternating"] == true);
  CHECK(doc["engine_status"] == "oscillating");
  const auto& orbit = doc["orbit"];
  REQUIRE(orbit.size() == 101);
  for (std::size_t n = 1; n <= 100; ++n)
    CHECK(orbit[n]["f_x3_minus_f_x4"].get<double>() == (n % 2 ? 0.02 : -0.02));
  const Json trace = Json::parse(read_text_file(dir.file("c.json")));
  CHECK(trace["config"]["eps0"] == 0.01);
  CHECK(trace["rows"].size() == 100);
}

TEST_CASE("curvature table on the two-vertex graph") {
  TempDir dir;
  const auto g = dir.write("two.json", R"({"vertices":2,"edges":[{"u":0,"v":1,"w":1.0,"len":1.0}]})");
  const auto r = run({"curvature", g});
  REQUIRE(r.code == 0);
  const Json doc = r.json();
  REQUIRE(doc["edges"].size() == 1);
  CHECK(doc["edges"][0]["edge"] == "0-1");
  CHECK(doc["edges"][0]["ollivier"].get<double>() == doctest::Approx(0.0).scale(1.0));
  CHECK(doc["edges"][0]["lazy"].get<double>() == doctest::Approx(1.0));
  CHECK(doc["config"]["alpha"] == 0.5);
}

TEST_CASE("resolvent, separation, ric, pf and verify commands") {
  TempDir dir;
  const auto path = dir.write("p3.json", kPath);
  const auto part = dir.write("part.json", R"({"X":[0],"K":[1],"Y":[2]})");
  const auto fam = dir.write("fam.json", R"({"matrices":[[[1,2],[3,1]],[[2,1],[1,2]]]})");

  auto r = run({"resolvent", path, "--f", "0,1,2", "--p", "1", "--eps", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.json()["residual"].get<double>() < 1e-9);

  r = run({"separation", path, "--partition", part});
  REQUIRE(r.code == 0);
  CHECK(r.json()["sg"] == Json::parse("[-1.0, 0.0, 1.0]"));
  CHECK(r.json()["pattern"]["sign_pattern"] == true);
  CHECK(r.json()["config"]["waive_curvature"] == false);

  for (const char* mode : {"p", "generic"}) {
    r = run({"separation", path, "--partition", part, "--mode", mode});
    REQUIRE(r.code == 0);
    CHECK(r.json()["pattern"]["sign_pattern"] == true);
  }

  r = run({"ric", path, "--samples", "8"});
  REQUIRE(r.code == 0);
  CHECK(r.json()["rigorous"] == true);
  CHECK(std::abs(r.json()["sampled"].get<double>() - r.json()["exact"].get<double>()) < 1e-6);

  r = run({"pf", fam});
  REQUIRE(r.code == 0);
  CHECK(r.json()["log_residual"].get<double>() < 1e-8);

  r = run({"verify", "--operator", "laplacian", "--graph", path, "--samples", "20"});
  REQUIRE(r.code == 0);
  CHECK(r.json()["conditions"].size() == 7);
  for (const auto& c : r.json()["conditions"]) CHECK(c["passed"] == true);

  r = run({"verify", "--operator", "counterexample", "--samples", "20"});
  REQUIRE(r.code == 0);
  CHECK(r.json()["dimension"] == 4);
}

TEST_CASE("exit codes") {
  TempDir dir;
  const auto dup = dir.write("dup.json", "{\"vertices\":2,\n\"edges\":[{\"u\":0,\"v\":1,\"w\":1},\n{\"u\":0,\"v\":1,\"w\":1}]}");
  auto r = run({"curvature", dup});
  CHECK(r.code == 2);
  CHECK(r.err.find("dup.json:3:") != std::string::npos);
  CHECK(run({"nonsense"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"flow", dir.file("missing.json")}).code == 2);
  CHECK(run({"--help"}).code == 0);

  const auto path = dir.write("p3.json", kPath);
  const auto part = dir.write("part.json", R"({"X":[0],"K":[1],"Y":[2]})");
  CHECK(run({"separation", path, "--partition", part, "--eps", "5"}).code == 4);
  CHECK(run({"resolvent", path, "--f", "0,1", "--p", "2"}).code == 2);
  CHECK(run({"resolvent", path, "--f", "0,1,2", "--eps", "-1"}).code == 2);

  // Non-convergence still flushes the partial trace.
  const auto skew = dir.write("skew.json", kSkewed);
  r = run({"flow", skew, "--max-iter", "2", "--trace", dir.file("partial.csv")});
  CHECK(r.code == 3);
  CHECK(r.json()["status"] == "max-iterations");
  CHECK(trace_from_csv(read_text_file(dir.file("partial.csv"))).size() == 2);

  // A failing run writes a header-only trace.
  r = run({"separation", path, "--partition", part, "--eps", "5", "--trace", dir.file("empty.csv")});
  CHECK(r.code == 4);
  CHECK(read_text_file(dir.file("empty.csv")) == std::string(kTraceHeader) + "\n");
}

TEST_CASE("outputs are reproducible and carry the seed") {
  TempDir dir;
  const auto g = dir.write("skew.json", kSkewed);
  const std::vector<std::string> args{"ric", g, "--chain", "resolvent", "--p", "3", "--samples", "4",
                                      "--seed", "11", "--out", dir.file("a.json")};
  REQUIRE(run(args).code == 0);
  const std::string ta = read_text_file(dir.file("a.json"));
  REQUIRE(run(args).code == 0);
  CHECK(ta == read_text_file(dir.file("a.json")));
  CHECK(Json::parse(ta)["config"]["seed"] == 11);

  ::setenv("NLMC_SEED", "1234", 1);
  CHECK(default_seed() == 1234);
  CHECK(run({"curvature", g}).json()["config"]["seed"] == 1234);
  ::setenv("NLMC_SEED", "junk", 1);
  CHECK(default_seed() == kDefaultSeed);
  ::unsetenv("NLMC_SEED");
  CHECK(run({"curvature", g}).json()["config"]["seed"] == kDefaultSeed);

  const auto f1 = run({"flow", g, "--trace", dir.file("f.json"), "--format", "json"});
  const std::string t1 = read_text_file(dir.file("f.json"));
  const auto f2 = run({"flow", g, "--trace", dir.file("f.json"), "--format", "json"});
  CHECK(f1.out == f2.out);
  CHECK(t1 == read_text_file(dir.file("f.json")));
}
