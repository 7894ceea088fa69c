#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "greenlab/io_cli.hpp"

using namespace greenlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct Csv {
  std::string schema;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    REQUIRE(it != header.end());
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(it - header.begin())]);
    return out;
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

Csv read_csv(const fs::path& p) {
  std::ifstream is(p);
  Csv csv;
  std::string line;
  std::getline(is, csv.schema);
  std::getline(is, line);
  csv.header = split(line);
  while (std::getline(is, line)) {
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(std::strtod(cell.c_str(), nullptr));
    csv.rows.push_back(row);
  }
  return csv;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "greenlab_test_io";
  fs::create_directories(dir);
  return dir / name;
}

RunConfig profile_config(const json& metric, const fs::path& out) {
  RunConfig c;
  c.mode = Mode::profile;
  c.metric = metric;
  c.out = out.string();
  c.serial = true;
  return c;
}

std::ostringstream sink;

}  // namespace

TEST_CASE("profile CSV for the model metrics") {
  const fs::path e = scratch("euclidean.csv");
  REQUIRE(run(profile_config({{"kind", "euclidean"}}, e), sink) == 0);
  const Csv ce = read_csv(e);
  CHECK(ce.schema == std::string("# schema=") + kFunctionalsSchema);
  const std::vector<std::string> contract = {"t", "r", "u", "b", "grad_b", "area", "A0", "A1", "B1", "B2", "S1", "a", "Vflux"};
  REQUIRE(ce.header.size() >= contract.size());
  CHECK(std::equal(contract.begin(), contract.end(), ce.header.begin()));
  for (double a1 : ce.column("A1")) CHECK(std::abs(a1 - 12.566371) < 1e-6);

  const fs::path c = scratch("cone.csv");
  REQUIRE(run(profile_config({{"kind", "cone"}, {"alpha", 0.8}}, c), sink) == 0);
  for (double a1 : read_csv(c).column("A1")) CHECK(std::abs(a1 - 8.042477) < 1e-5);

  const fs::path s = scratch("schwarzschild.csv");
  REQUIRE(run(profile_config({{"kind", "schwarzschild"}, {"mass", 1.0}}, s), sink) == 0);
  const Csv cs = read_csv(s);
  for (double x : cs.column("S")) CHECK(std::abs(x) < 1e-8);
  for (const auto& h : cs.header) CHECK(h.rfind("int_", 0) != 0);

  const json side = json::parse(slurp(scratch("cone.json")));
  CHECK(side["schema"] == kProfileSchema);
  CHECK(side["alpha_inf"].get<double>() == doctest::Approx(0.8));
  CHECK(side["flux_check"]["verdict"] == "pass");
}

TEST_CASE("CSV floats round-trip and use LF") {
  const fs::path p = scratch("soft.csv");
  REQUIRE(run(profile_config({{"kind", "softened_cone"}, {"alpha", 0.5}}, p), sink) == 0);
  const std::string text = slurp(p);
  CHECK(text.find('\r') == std::string::npos);
  const LevelSetFunctionals lf = functionals_of(build_profile(metric_of(profile_config({{"kind", "softened_cone"}, {"alpha", 0.5}}, p))));
  const Csv csv = read_csv(p);
  REQUIRE(csv.rows.size() == lf.size());
  const auto a1 = csv.column("A1"), a = csv.column("a");
  for (std::size_t i = 0; i < lf.size(); ++i) {
    CHECK(a1[i] == lf.A1[i]);
    CHECK(a[i] == lf.a[i]);
  }
}

TEST_CASE("golden euclidean profile") {
  for (const char* name : {"euclidean_ppd64", "cone_0.8_ppd64"}) {
    const fs::path golden = fs::path(GREENLAB_GOLDEN_DIR) / (std::string(name) + ".csv");
    const json metric = std::string(name).starts_with("cone") ? json{{"kind", "cone"}, {"alpha", 0.8}} : json{{"kind", "euclidean"}};
    RunConfig c = profile_config(metric, scratch(std::string(name) + ".csv"));
    c.points_per_decade = 64;
    c.t_min = 1e-2;
    c.t_max = 1e2;
    REQUIRE(run(c, sink) == 0);
    CHECK_MESSAGE(slurp(c.out) == slurp(golden), name);
  }
}

TEST_CASE("config precedence and validation") {
  RunConfig c;
  apply_config_json(c, json::parse(R"({"metric": {"kind": "cone", "alpha": 0.5}, "seed": 9, "grid": {"points_per_decade": 32}})"));
  CHECK(c.metric["alpha"] == 0.5);
  CHECK(c.seed == 9);
  CHECK(*c.points_per_decade == 32);
  // later layers overwrite earlier ones
  apply_config_json(c, json{{"seed", 11}});
  CHECK(c.seed == 11);

  const auto code = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidParam;
  };
  CHECK(code([&] { apply_config_json(c, json{{"sede", 1}}); }) == ErrorCode::ConfigError);
  CHECK(code([&] { apply_config_json(c, json{{"seed", "x"}}); }) == ErrorCode::ConfigError);
  RunConfig bad;
  bad.t_min = 1.0;
  bad.t_max = 50.0;
  CHECK(code([&] { metric_of(bad); }) == ErrorCode::ConfigError);

  RunConfig missing = profile_config({{"kind", "euclidean"}}, "/nonexistent/dir/x.csv");
  CHECK(run(missing, sink) == 2);
  CHECK(run(profile_config({{"kind", "cone"}, {"alpha", 2.0}}, scratch("x.csv")), sink) == 2);
}

TEST_CASE("verify exit codes") {
  RunConfig c;
  c.mode = Mode::verify;
  c.out = scratch("verify.json").string();
  c.metric = {{"kind", "euclidean"}};
  CHECK(run(c, sink) == 0);
  const json bundle = json::parse(slurp(c.out));
  CHECK(bundle["equality_case"] == true);
  CHECK(bundle["verdict"] == "pass");

  c.metric = {{"kind", "superlinear"}};
  CHECK(run(c, sink) == 3);
  c.allow_indefinite = true;
  CHECK(run(c, sink) == 1);
}

TEST_CASE("fuzz and family outputs do not depend on the thread count") {
  RunConfig f;
  f.mode = Mode::fuzz;
  f.count = 3000;
  f.seed = 4;
  f.serial = true;
  f.out = scratch("fuzz_serial.json").string();
  CHECK(run(f, sink) == 0);
  RunConfig g = f;
  g.serial = false;
  g.out = scratch("fuzz_parallel.json").string();
  setenv("GREENLAB_THREADS", "4", 1);
  CHECK(thread_count(false) == 4);
  CHECK(run(g, sink) == 0);
  CHECK(slurp(f.out) == slurp(g.out));

  RunConfig fam;
  fam.mode = Mode::family;
  fam.count = 6;
  fam.seed = 2;
  fam.out = scratch("family_parallel.csv").string();
  CHECK(run(fam, sink) == 0);
  RunConfig fam_serial = fam;
  fam_serial.serial = true;
  fam_serial.out = scratch("family_serial.csv").string();
  CHECK(run(fam_serial, sink) == 0);
  CHECK(slurp(fam.out) == slurp(fam_serial.out));
  unsetenv("GREENLAB_THREADS");
}

TEST_CASE("family edge cases") {
  RunConfig c;
  c.mode = Mode::family;
  c.count = 0;
  c.out = scratch("family0.csv").string();
  CHECK(run(c, sink) == 0);
  const Csv empty = read_csv(c.out);
  CHECK(empty.schema == std::string("# schema=") + kFamilySchema);
  CHECK(empty.header.front() == "seed");
  CHECK(empty.rows.empty());

  c.count = 1;
  c.include_flat = true;
  CHECK(run(c, sink) == 0);
  const Csv one = read_csv(c.out);
  REQUIRE(one.rows.size() == 1);
  CHECK(one.column("equality")[0] == 1);
  CHECK(one.column("pass")[0] == 1);
}

TEST_CASE("growth command") {
  RunConfig c;
  c.mode = Mode::growth;
  c.metric = {{"kind", "superlinear"}};
  c.out = scratch("growth.json").string();
  CHECK(run(c, sink) == 0);
  const json g = json::parse(slurp(c.out));
  CHECK(g["report"]["conditional"] == true);
  CHECK(g["report"]["A1_at_r0"].get<double>() > 4 * std::numbers::pi);

  c.metric = {{"kind", "euclidean"}};
  CHECK(run(c, sink) == 1);
  CHECK(json::parse(slurp(c.out))["verdict"] == "hypothesis_not_met");
}
