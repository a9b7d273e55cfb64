#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hhemb/cli.hpp"
#include "hhemb/lattice.hpp"

using namespace hhemb;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "hhemb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    FAIL("missing column " << name);
    return -1;
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Csv read_csv(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  Csv c;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') c.comments.push_back(line);
    else if (c.header.empty()) c.header = split(line);
    else c.rows.push_back(split(line));
  }
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hhemb_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

const std::string kFixtures = std::string(HHEMB_FIXTURES) + "/h4";

}  // namespace

TEST_CASE("format_real prints 12 significant digits") {
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(-4.0 / M_PI) == "-1.27323954474");
  CHECK(format_real(1e-20) == "1e-20");
}

TEST_CASE("grid and range parsing") {
  const std::vector<double> g = parse_grid("-1:1:0.5");
  REQUIRE(g.size() == 5);
  CHECK(g[0] == -1.0);
  CHECK(g[4] == 1.0);
  CHECK(parse_grid("0:10:0.1").size() == 101);
  CHECK(parse_range("10:100") == std::pair<int, int>{10, 100});
  CHECK_THROWS(parse_grid("1:0"));
  CHECK_THROWS(parse_grid("0:1:-1"));
  CHECK_THROWS(parse_range("5"));
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}) == 1);
  CHECK(run({"hubbard", "--bogus"}) == 1);
  CHECK(run({"hubbard", "--U", "-1"}) == 1);
  CHECK(run({"molecule"}) == 1);
  CHECK(run({"hubbard", "--bath", "XB"}) == 1);
  CHECK(run({"--help"}) == 0);
}

TEST_CASE("hubbard: U = 0 energies equal the band energy") {
  const fs::path prefix = scratch("u0");
  std::string out;
  REQUIRE(run({"hubbard", "--L", "40", "--U", "0", "--frag", "1,2", "--bath", "NIB", "--out", prefix.string()}, &out) ==
          0);
  const Csv c = read_csv(prefix.string() + ".persite.csv");
  REQUIRE(c.comments.size() >= 2);
  CHECK(c.comments[0].rfind("# hhemb ", 0) == 0);
  CHECK(c.comments[1].rfind("# config {", 0) == 0);
  for (const char* name : {"n", "e", "frag_size", "mode", "scheme", "U", "t", "L"}) c.col(name);
  CHECK(c.rows.size() == 2 * 21);
  const int e = c.col("e"), emf = c.col("e_meanfield"), ok = c.col("converged");
  for (const auto& row : c.rows) {
    CHECK(row[ok] == "1");
    CHECK(std::abs(std::stod(row[e]) - std::stod(row[emf])) < 1e-8);
  }
}

TEST_CASE("hubbard output is byte-identical across runs and job counts") {
  const fs::path a = scratch("det");
  auto args = [&](const char* jobs) {
    return std::vector<std::string>{"hubbard", "--L", "24", "--U", "4", "--frag", "2", "--mu-scan", "-3:7:0.5",
                                    "--out", a.string(), "--jobs", jobs};
  };
  REQUIRE(run(args("1")) == 0);
  const std::string persite = slurp(a.string() + ".persite.csv"), muscan = slurp(a.string() + ".muscan.csv");
  REQUIRE(run(args("1")) == 0);
  CHECK(slurp(a.string() + ".persite.csv") == persite);
  CHECK(slurp(a.string() + ".muscan.csv") == muscan);
  const Csv p = read_csv(a.string() + ".muscan.csv");
  CHECK(p.rows.size() == 21);
  // The job count is part of the recorded config, so compare data rows only.
  REQUIRE(run(args("4")) == 0);
  const Csv q = read_csv(a.string() + ".muscan.csv");
  CHECK(p.rows == q.rows);
  CHECK(p.header == q.header);
}

TEST_CASE("JSON config values are overridden by explicit flags") {
  const fs::path cfg = scratch("cfg.json");
  {
    std::ofstream f(cfg);
    f << R"({"L": 20, "U": 2.0, "frag": [1], "fillings": "2,4", "bath": "NIB"})";
  }
  const fs::path prefix = scratch("jsoncfg");
  REQUIRE(run({"hubbard", "--config", cfg.string(), "--U", "3", "--out", prefix.string()}) == 0);
  const Csv c = read_csv(prefix.string() + ".persite.csv");
  REQUIRE(c.rows.size() == 2);
  CHECK(c.rows[0][c.col("L")] == "20");
  CHECK(c.rows[0][c.col("U")] == "3");
  CHECK(c.rows[0][c.col("mode")] == "NIB");
  CHECK(c.rows[1][c.col("n_per_spin")] == "4");

  const fs::path broken = scratch("broken.json");
  {
    std::ofstream f(broken);
    f << "{not json";
  }
  CHECK(run({"hubbard", "--config", broken.string()}) == 1);
}

TEST_CASE("numerical and invariant failures map to exit codes 2 and 3") {
  std::string err;
  // Per-filling failures are recorded in the row; the run itself succeeds.
  const fs::path deg = scratch("deg");
  CHECK(run({"hubbard", "--L", "8", "--boundary", "periodic", "--fillings", "2,3", "--out", deg.string()}) == 0);
  const Csv c = read_csv(deg.string() + ".persite.csv");
  REQUIRE(c.rows.size() == 2);
  CHECK(c.rows[0][c.col("converged")] == "0");
  CHECK(c.rows[0][c.col("error")].find("FermiDegeneracy") != std::string::npos);
  CHECK(c.rows[1][c.col("converged")] == "1");
  CHECK(run({"hubbard", "--L", "8", "--frag", "9", "--out", deg.string()}, nullptr, &err) == 3);
  CHECK(err.find("BadPartition") != std::string::npos);
  CHECK(run({"verify", "--trials", "3", "--inject", "asymmetric"}, nullptr, &err) == 3);
  CHECK(err.find("NotSymmetric") != std::string::npos);
  CHECK(run({"molecule", "--fcidump", kFixtures + "/h4_d1.500.fcidump", "--frag", "3", "--out",
             scratch("tile").string()},
            nullptr, &err) == 3);
  CHECK(run({"molecule", "--fcidump", "/nonexistent.fcidump", "--out", scratch("none").string()}) == 2);
}

TEST_CASE("verify passes with the default seed") {
  std::string out;
  CHECK(run({"verify", "--trials", "40"}, &out) == 0);
  for (const char* suite : {"block-diagonalization", "cluster-trace", "w-equation", "svd-equivalence"})
    CHECK(out.find(suite) != std::string::npos);
}

TEST_CASE("molecule: single geometry and the whole-molecule fragment") {
  const fs::path prefix = scratch("mol");
  REQUIRE(run({"molecule", "--fcidump", kFixtures + "/h4_d1.500.fcidump", "--frag", "all", "--out",
               prefix.string()}) == 0);
  const Csv c = read_csv(prefix.string() + ".pes.csv");
  REQUIRE(c.rows.size() == 1);
  CHECK(std::stod(c.rows[0][c.col("d_HH")]) == 1.5);
  const double e = std::stod(c.rows[0][c.col("E_htdmfet")]), f = std::stod(c.rows[0][c.col("E_FCI")]);
  CHECK(std::abs(e - f) < 1e-8);
  CHECK(std::stod(c.rows[0][c.col("pct_correlation")]) == doctest::Approx(100.0).epsilon(1e-6));

  const fs::path dir = scratch("pes");
  REQUIRE(run({"molecule", "--fcidump", kFixtures, "--out", dir.string()}) == 0);
  const Csv p = read_csv(dir.string() + ".pes.csv");
  REQUIRE(p.rows.size() == 6);
  for (std::size_t k = 1; k < p.rows.size(); ++k)
    CHECK(std::stod(p.rows[k][p.col("d_HH")]) > std::stod(p.rows[k - 1][p.col("d_HH")]));
  for (const auto& row : p.rows) CHECK(std::stod(row[p.col("E_HF")]) > std::stod(row[p.col("E_FCI")]));
}
