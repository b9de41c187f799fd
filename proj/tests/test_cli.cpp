#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "fraflow/mittag_leffler.hpp"
#include "fraflow/trajectory_io.hpp"

using namespace fraflow;
using namespace fraflow::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fraflow_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int fra(std::vector<std::string> args) {
  args.insert(args.begin(), "fraflow");
  return run(args);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::vector<std::string> cells(const std::string& row) {
  std::vector<std::string> out;
  std::stringstream ss(row);
  for (std::string c; std::getline(ss, c, ',');) out.push_back(c);
  if (!row.empty() && row.back() == ',') out.emplace_back();
  return out;
}

json small_sweep() {
  return {{"kernel", {{"alpha", 0.5}}},
          {"time", {{"steps", 128}}},
          {"problem", {{"type", "plaplace"}, {"p", 2}, {"q", 4}, {"points", 8}, {"initial", {{"profile", "sine"}}}}},
          {"sweep", {{"alpha", {0.3, 0.7}}, {"amplitude", {1.0, 20.0}}}}};
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(parse_config(json::object()));
  CHECK_THROWS_AS(parse_config(json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"solver", {{"viscosity", "high"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"solver", {{"yosida_lambda", 1e-3}, {"typo", 0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"kernel", {{"alpha", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"mode", "plot"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"time", {{"steps", 0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"u0", {1.0}}, {"forcing_vector", {1.0, 2.0}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"phi1", {{"kind", "power"}, {"q", 0.5}}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"phi1", {{"kind", "quadratic"}, {"extra", 1}}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"sweep", {{"points", {-3}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"sweep", {{"steps", {0}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);

  const RunConfig c = parse_config(json{{"problem", {{"type", "plaplace"}, {"p", 3}, {"q", 2}, {"dim", 2}, {"points", 6}}},
                                        {"kernel", {{"alpha", 0.7}}},
                                        {"solver", {{"viscosity", 0.5}, {"coupling", "coupled"}}}});
  CHECK(c.pde.p == 3.0);
  CHECK(c.pde.grid.dim == 2);
  CHECK(c.pde.grid.points == 6);
  CHECK(c.pde.alpha == 0.7);
  CHECK(c.solver.viscosity == 0.5);
  CHECK(c.solver.coupling == Coupling::coupled);
}

TEST_CASE("every shipped preset parses") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(preset_directory())) {
    if (e.path().extension() != ".json") continue;
    INFO(e.path().string());
    CHECK_NOTHROW(parse_config(read_json_file(e.path().string())));
    ++n;
  }
  CHECK(n >= 6);
}

TEST_CASE("usage errors exit 64") {
  const fs::path dir = scratch("usage");
  CHECK(fra({}) == exit_usage);
  CHECK(fra({"solve", "--nope"}) == exit_usage);
  CHECK(fra({"frobnicate"}) == exit_usage);
  CHECK(fra({"solve", "--config", (dir / "missing.json").string()}) == exit_usage);
  std::ofstream(dir / "broken.json") << "{ \"mode\": ";
  CHECK(fra({"solve", "--config", (dir / "broken.json").string()}) == exit_usage);
  CHECK(fra({"solve", "--preset", "no-such-preset"}) == exit_usage);
  CHECK(fra({"solve", "--preset", "../etc"}) == exit_usage);
  CHECK(fra({"sweep", "--preset", "blowup-1d"}) == exit_usage);  // mode mismatch
  CHECK(fra({"solve", "--preset", "blowup-1d", "--config", (dir / "broken.json").string()}) == exit_usage);
  CHECK(fra({"certify", "--out", dir.string()}) == exit_usage);  // nothing to certify
  CHECK(fra({"solve", "--config", write_config(dir, {{"unknown", true}}).string()}) == exit_usage);
  CHECK(fra({"--help"}) == exit_ok);
}

TEST_CASE("solve: scalar relaxation matches the Mittag-Leffler value") {
  const fs::path out = scratch("ml");
  REQUIRE(fra({"solve", "--preset", "mittag-leffler-scalar", "--out", out.string()}) == exit_ok);
  for (const char* f : {"trajectory.csv", "trajectory.bin", "diagnostics.json", "certificate.json"})
    CHECK(fs::exists(out / f));
  const auto rows = lines(slurp(out / "trajectory.csv"));
  REQUIRE(rows.size() == 2050);
  CHECK(rows.front() == "j,t,norm,phi1,phi2_envelope,residual");
  const double uN = std::stod(cells(rows.back())[2]);
  const double oracle = mittag_leffler(0.5, -1.0);
  CHECK(std::abs(uN - oracle) / oracle <= 2e-2);

  const json diag = json::parse(slurp(out / "diagnostics.json"));
  CHECK(diag.at("status") == "completed");
  CHECK(diag.at("t_star").is_null());
  const json cert = json::parse(slurp(out / "certificate.json"));
  CHECK(cert.at("summary").at("fail") == 0);
  CHECK(cert.at("certificates").at(0).at("lemma") == "chain_rule");
}

TEST_CASE("solve: zero data gives the zero trajectory") {
  const fs::path out = scratch("zero");
  REQUIRE(fra({"solve", "--preset", "zero-data", "--out", out.string()}) == exit_ok);
  const auto rows = lines(slurp(out / "trajectory.csv"));
  REQUIRE(rows.size() == 258);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = cells(rows[i]);
    CHECK(std::stod(c[2]) == 0.0);
    CHECK(std::stod(c[3]) == 0.0);
  }
}

TEST_CASE("solve: blow-up exits 2 and reports t*") {
  const fs::path out = scratch("blowup");
  CHECK(fra({"solve", "--preset", "blowup-1d", "--out", out.string()}) == exit_blowup);
  const json diag = json::parse(slurp(out / "diagnostics.json"));
  CHECK(diag.at("status") == "blew_up");
  CHECK(diag.at("t_star").get<double>() > 0.0);
  CHECK(diag.at("blow_up").at("uncertainty").get<double>() == doctest::Approx(1.0 / 512));
  CHECK(diag.at("regime").at("verdict") == "small_data_global");
}

TEST_CASE("solve: inner nonconvergence exits 1") {
  const fs::path dir = scratch("inner");
  const json cfg = {{"time", {{"steps", 16}}},
                    {"problem", {{"type", "plaplace"}, {"p", 1.5}, {"q", 2}, {"dim", 2}, {"points", 4}}},
                    {"solver", {{"inner_max_iterations", 1}, {"inner_tolerance", 1e-14}}}};
  CHECK(fra({"solve", "--config", write_config(dir, cfg).string(), "--out", dir.string()}) == exit_failure);
}

TEST_CASE("solve: reruns are byte-identical") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(fra({"solve", "--preset", "smalldata-1d", "--out", a.string()}) == exit_ok);
  REQUIRE(fra({"solve", "--preset", "smalldata-1d", "--out", b.string()}) == exit_ok);
  for (const char* f : {"trajectory.csv", "trajectory.bin", "diagnostics.json", "certificate.json"})
    CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("sweep: row count, ordering, determinism across worker counts") {
  const fs::path dir = scratch("sweep");
  const fs::path cfg = write_config(dir, small_sweep());
  const fs::path a = dir / "a", b = dir / "b";
  REQUIRE(fra({"sweep", "--config", cfg.string(), "--out", a.string(), "--jobs", "1"}) == exit_ok);
  REQUIRE(fra({"sweep", "--config", cfg.string(), "--out", b.string(), "--jobs", "4"}) == exit_ok);
  const std::string csv = slurp(a / "sweep.csv");
  CHECK(csv == slurp(b / "sweep.csv"));
  CHECK(slurp(a / "frontier.csv") == slurp(b / "frontier.csv"));
  const auto rows = lines(csv);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "p,q,alpha,m,N,amplitude,verdict,t_star,sup_phi1,E_T,C_emp,regime,error");
  const std::vector<std::pair<std::string, std::string>> order = {
      {"0.29999999999999999", "1"}, {"0.29999999999999999", "20"}, {"0.69999999999999996", "1"}, {"0.69999999999999996", "20"}};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto c = cells(rows[i + 1]);
    REQUIRE(c.size() == 13);
    CHECK(c[2] == order[i].first);
    CHECK(c[5] == order[i].second);
    CHECK(c[6] == (c[5] == "1" ? "completed" : "blew_up"));
  }
  const auto frontier = lines(slurp(a / "frontier.csv"));
  REQUIRE(frontier.size() == 3);
  CHECK(cells(frontier[1]).back() == "true");
}

TEST_CASE("sweep: the ledger makes reruns resume to the same CSV") {
  const fs::path dir = scratch("resume");
  const fs::path cfg = write_config(dir, small_sweep());
  const fs::path out = dir / "out";
  REQUIRE(fra({"sweep", "--config", cfg.string(), "--out", out.string()}) == exit_ok);
  const std::string full = slurp(out / "sweep.csv");
  const std::string ledger = slurp(out / "sweep.ledger");
  const auto ledger_lines = lines(ledger);
  REQUIRE(ledger_lines.size() == 5);

  // interrupted after two rows, the third half written
  std::ofstream(out / "sweep.ledger", std::ios::binary | std::ios::trunc)
      << ledger_lines[0] << '\n' << ledger_lines[1] << '\n' << ledger_lines[2] << '\n' << ledger_lines[3].substr(0, 10);
  fs::remove(out / "sweep.csv");
  REQUIRE(fra({"sweep", "--config", cfg.string(), "--out", out.string()}) == exit_ok);
  CHECK(slurp(out / "sweep.csv") == full);
  CHECK(lines(slurp(out / "sweep.ledger")).size() == 5);

  // a different sweep ignores the stale ledger
  json other = small_sweep();
  other["sweep"]["amplitude"] = {1.0};
  REQUIRE(fra({"sweep", "--config", write_config(dir, other).string(), "--out", out.string()}) == exit_ok);
  CHECK(lines(slurp(out / "sweep.csv")).size() == 3);
}

TEST_CASE("sweep: failures are recorded per row") {
  const fs::path dir = scratch("sweep_fail");
  json cfg = small_sweep();
  cfg["sweep"] = {{"amplitude", {1.0}}, {"points", {8, 4}}};
  cfg["solver"] = {{"inner_max_iterations", 1}, {"inner_tolerance", 1e-15}};
  cfg["problem"]["p"] = 1.5;
  cfg["problem"]["dim"] = 2;
  REQUIRE(fra({"sweep", "--config", write_config(dir, cfg).string(), "--out", dir.string()}) == exit_ok);
  const auto rows = lines(slurp(dir / "sweep.csv"));
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < 3; ++i) {
    const auto c = cells(rows[i]);
    REQUIRE(c.size() == 13);
    CHECK(c[6] == "inner_nonconvergence");
    CHECK_FALSE(c[12].empty());
  }
}

TEST_CASE("certify: stationary dump, corrupted dump, Gronwall suites") {
  const fs::path dir = scratch("certify");
  const json stationary = {{"time", {{"steps", 64}}},
                           {"problem", {{"u0", {0.4, -0.2}}, {"phi1", {{"kind", "quadratic"}, {"center", {0.4, -0.2}}}}}}};
  const fs::path run = dir / "run";
  REQUIRE(fra({"solve", "--config", write_config(dir, stationary).string(), "--out", run.string()}) == exit_ok);

  const fs::path dump = run / "trajectory.bin";
  REQUIRE(fra({"certify", "--config", write_config(dir, {{"certify", {{"dump", dump.string()}}}}).string(), "--out",
               (dir / "c1").string()}) == exit_ok);
  const json bundle = json::parse(slurp(dir / "c1" / "certificates.json"));
  CHECK(bundle.at("summary").at("pass") == 3);
  CHECK(bundle.at("summary").at("total") == 3);

  const std::string bytes = slurp(dump);
  std::ofstream(dir / "truncated.bin", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  CHECK(fra({"certify", "--config",
             write_config(dir, {{"certify", {{"dump", (dir / "truncated.bin").string()}}}}).string(), "--out",
             (dir / "c2").string()}) == exit_no_input);
  CHECK(fra({"certify", "--config", write_config(dir, {{"certify", {{"dump", (dir / "absent.bin").string()}}}}).string(),
             "--out", (dir / "c3").string()}) == exit_no_input);

  REQUIRE(fra({"certify", "--preset", "gronwall-suite", "--out", (dir / "g").string(), "--seed", "7"}) == exit_ok);
  const json g = json::parse(slurp(dir / "g" / "certificates.json"));
  CHECK(g.at("inputs").at("gronwall").at("total") == 300);
  CHECK(g.at("inputs").at("gronwall").at("linear_pass").get<int>() + g.at("inputs").at("gronwall").at("local_pass").get<int>() +
            g.at("inputs").at("gronwall").at("small_pass").get<int>() ==
        300);
  CHECK(g.at("summary").at("reject") == 10);
  CHECK(g.at("summary").at("fail") == 0);
}

TEST_CASE("kernels command") {
  const fs::path out = scratch("kernels");
  REQUIRE(fra({"kernels", "--preset", "sonine-check", "--out", out.string()}) == exit_ok);
  CHECK(lines(slurp(out / "kernels.csv")).size() == 5);
  CHECK(lines(slurp(out / "regularized.csv")).size() == 4);
  CHECK(json::parse(slurp(out / "kernels.json")).at("passed") == true);
  const fs::path bad = scratch("kernels_bad");
  // tolerance no discretization can meet
  CHECK(fra({"kernels", "--config", write_config(bad, {{"kernels", {{"tolerance", 1e-12}}}}).string(), "--out",
             bad.string()}) == exit_failure);
}

TEST_CASE("preset directory override") {
  const fs::path dir = scratch("presets");
  std::ofstream(dir / "tiny.json") << R"({"mode": "solve", "time": {"steps": 8}})";
  ::setenv("FRAFLOW_PRESET_DIR", dir.c_str(), 1);
  CHECK(preset_directory() == dir.string());
  CHECK(fra({"solve", "--preset", "tiny", "--out", (dir / "out").string()}) == exit_ok);
  CHECK(fra({"solve", "--preset", "blowup-1d", "--out", (dir / "out").string()}) == exit_usage);
  ::unsetenv("FRAFLOW_PRESET_DIR");
  CHECK(fra({"kernels", "--preset", "sonine-check", "--out", (dir / "k").string()}) == exit_ok);
}
