#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "ssdeconv/cli.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ssdeconv");
  std::ostringstream out, err;
  const int code = ssdeconv::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path tmp_dir() {
  const fs::path dir = SSDECONV_TEST_TMP;
  fs::create_directories(dir);
  return dir;
}

std::string write_tmp(const std::string& name, const std::string& text) {
  const fs::path p = tmp_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("simulate is byte-identical for a fixed seed") {
  const auto a = run({"simulate", "--model", "O2", "--n", "50", "--seed", "9"});
  const auto b = run({"simulate", "--model", "O2", "--n", "50", "--seed", "9"});
  const auto c = run({"simulate", "--model", "O2", "--n", "50", "--seed", "10"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  CHECK(a.out.find("y1,y2\n") != std::string::npos);
  const std::string path = (tmp_dir() / "sim.csv").string();
  REQUIRE(run({"simulate", "--model", "O2", "--n", "50", "--seed", "9", "--out", path}).code == 0);
  CHECK(slurp(path) == a.out);
}

TEST_CASE("estimate recovers A exactly from a noiseless autoregression") {
  std::ostringstream exact;
  exact.precision(17);
  exact << "y1\n";
  double y = 3.0;
  for (int k = 0; k < 40; ++k, y *= 0.8) exact << y << "\n";
  const auto input = write_tmp("ar.csv", exact.str());
  const auto r = run({"estimate", "--model", "S1", "--input", input});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(std::abs(j["A_hat"][0][0].get<double>() - 0.8) < 1e-10);
  CHECK(j["config"]["input"] == input);
}

TEST_CASE("estimate writes a density grid") {
  const auto sim = run({"simulate", "--model", "S1", "--n", "300", "--seed", "2"});
  const auto input = write_tmp("s1.csv", sim.out);
  const std::string grid = (tmp_dir() / "grid.csv").string();
  const auto r = run({"estimate", "--model", "S1", "--input", input, "--grid-out", grid, "--grid-points", "11",
                      "--nodes", "2000"});
  REQUIRE(r.code == 0);
  std::istringstream in(slurp(grid));
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.find("value") == std::string::npos) ++rows;
  CHECK(rows == 11);
}

TEST_CASE("exit codes follow the error kind") {
  const auto sim = run({"simulate", "--model", "S1", "--n", "100", "--seed", "3"});
  const auto input = write_tmp("s1b.csv", sim.out);

  const auto unknown = run({"simulate", "--model", "S1", "--bogus"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.rfind("ssdeconv: error kind=usage: ", 0) == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"simulate", "--model", "Q7"}).code == 2);

  const auto ragged = write_tmp("ragged.csv", "y1,y2\n1,2\n3\n4,5\n6,7\n");
  const auto rr = run({"estimate", "--model", "S2", "--input", ragged});
  CHECK(rr.code == 3);
  CHECK(rr.err.find("kind=data") != std::string::npos);
  CHECK(rr.err.find("line 3") != std::string::npos);

  const auto spec = write_tmp("partial.json", R"({"B": [[1.0]]})");
  const auto missing = run({"estimate", "--spec", spec, "--input", input});
  CHECK(missing.code == 3);
  CHECK(missing.err.find("eta") != std::string::npos);

  const auto zeros = write_tmp("zeros.csv", "y1\n0\n0\n0\n0\n0\n0\n");
  const auto z = run({"intervals", "--model", "S1", "--input", zeros, "--mc", "1000"});
  CHECK(z.code == 4);
  CHECK(z.err.find("kind=numeric") != std::string::npos);

  CHECK(run({"intervals", "--model", "S1", "--input", input, "--level", "1.5"}).code == 2);
  CHECK(run({"intervals", "--model", "S1", "--input", (tmp_dir() / "absent.csv").string()}).code == 3);
}

TEST_CASE("intervals accept a partial measurement spec") {
  const auto sim = run({"simulate", "--model", "O1", "--n", "300", "--seed", "4"});
  const auto input = write_tmp("o1.csv", sim.out);
  const auto spec = write_tmp("o1_partial.json",
                              R"({"B": [[1.0]], "eta": {"type": "gamma_difference", "shape": [0.5], "scale": [1.0]}})");
  const auto r =
      run({"intervals", "--spec", spec, "--input", input, "--mc", "5000", "--nodes", "2000", "--level", "0.9"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j["intervals"].size() == 3);
  CHECK(j["intervals"][0]["kind"] == "filter");
  CHECK(j["intervals"][2]["kind"] == "observation");
  CHECK(j["config"]["bandwidth"] == "ordinary");
  CHECK(j["config"]["level"] == 0.9);
  double prev = 0.0;
  for (const auto& it : j["intervals"]) {
    CHECK(it["radius"].get<double>() > 0.0);
    CHECK(it["level"] == 0.9);
    prev = std::max(prev, it["radius"].get<double>());
  }
  CHECK(prev < 20.0);
}

TEST_CASE("tiny experiment writes a provenance header") {
  const std::string out = (tmp_dir() / "t1.csv").string();
  const std::string js = (tmp_dir() / "t1.json").string();
  const auto r = run({"experiment", "table1", "--model", "S1", "--n", "100", "--replicates", "2", "--nodes", "500",
                      "--t2-samples", "500", "--conv-draws", "200", "--threads", "1", "--out", out, "--json", js});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("# config_hash=", 0) == 0);
  CHECK(csv.find("# config={") != std::string::npos);
  CHECK(csv.find("\nS1,100,2,") != std::string::npos);
  CHECK(json::parse(slurp(js)).is_array());

  const auto t2 = run({"experiment", "table2", "--model", "S1", "--n", "100", "--replicates", "2", "--nodes", "500",
                       "--mc", "2000", "--threads", "1"});
  REQUIRE(t2.code == 0);
  CHECK(t2.out.find("\nS1,100,2,algorithm1,") != std::string::npos);
  CHECK(t2.out.find("\nS1,100,2,kalman,") != std::string::npos);

  const auto fig = run({"experiment", "figure1", "--model", "S1", "--n", "100", "--replicates", "3", "--nodes", "500",
                        "--grid-points", "5", "--threads", "1"});
  REQUIRE(fig.code == 0);
  CHECK(fig.out.find("grid,truth,mean,q05,q95,q50\n") != std::string::npos);
  CHECK(run({"experiment", "figure1", "--model", "S2", "--n", "100", "--replicates", "2"}).code == 2);
  CHECK(run({"experiment", "table9", "--model", "S1"}).code == 2);
}
