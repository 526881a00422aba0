#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("phasered_cli_" + std::to_string(std::hash<std::string>{}(
                                 doctest::getContextOptions()->currentTest->m_name)));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path config(const std::string& text) const {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = phasered::cli::run_cli(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("find-cycle writes the period and a manifest") {
  Scratch s;
  const auto cfg = s.config(R"({"model": {"name": "stuart_landau", "params": {"omega": 2, "c2": 1}}})");
  const auto out = s.dir / "out";
  REQUIRE(run({"find-cycle", "--config", cfg.string(), "--out", out.string()}) == 0);
  const auto summary = json::parse(slurp(out / "summary.json"));
  CHECK(std::abs(summary["T"].get<double>() - 2 * M_PI) < 1e-5);
  const auto manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["command"] == "find-cycle");
  CHECK(manifest["config"]["model"]["name"] == "stuart_landau");
  CHECK(manifest.contains("config_hash"));
  CHECK(fs::exists(out / "cycle.csv"));
}

TEST_CASE("malformed configs exit with code 2 and name the field") {
  Scratch s;
  std::string err;
  auto cfg = s.config(R"({"model": {"params": {}}})");
  CHECK(run({"find-cycle", "--config", cfg.string(), "--out", (s.dir / "o").string()}, &err) == 2);
  auto e = json::parse(err);
  CHECK(e["error"]["field"] == "model.name");
  CHECK(e["exit_code"] == 2);

  cfg = s.config(R"({"model": {"name": "radial"}, "tolerance": {"rell": 1e-9}})");
  CHECK(run({"find-cycle", "--config", cfg.string(), "--out", (s.dir / "o").string()}, &err) == 2);
  CHECK(json::parse(err)["error"]["field"] == "tolerance.rell");

  cfg = s.config("{not json");
  CHECK(run({"find-cycle", "--config", cfg.string(), "--out", (s.dir / "o").string()}) == 2);
  CHECK(run({"find-cycle", "--out", (s.dir / "o").string()}) == 2);
  CHECK(run({"find-cycle", "--config", (s.dir / "missing.json").string()}) == 2);
}

TEST_CASE("computation failures exit with code 1") {
  Scratch s;
  std::string err;
  // detuning far beyond the grid: no threshold to fit
  const auto cfg = s.config(R"({"sweep": {"detunings": [0.08], "eps_grid": [0.001, 0.002]}})");
  CHECK(run({"fit-scaling", "--config", cfg.string(), "--out", (s.dir / "o").string()}, &err) == 1);
  CHECK(json::parse(err)["error"]["kind"] == "convergence");
}

TEST_CASE("prc of the spiral model matches the gradient") {
  Scratch s;
  const auto cfg = s.config(R"({"model": {"name": "spiral"}})");
  const auto out = s.dir / "out";
  REQUIRE(run({"prc", "--config", cfg.string(), "--out", out.string()}) == 0);
  std::istringstream csv(slurp(out / "prc.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "theta,Z1,Z2");
  double worst = 0.0;
  int rows = 0;
  while (std::getline(csv, line)) {
    double th, z1, z2;
    char c;
    std::istringstream(line) >> th >> c >> z1 >> c >> z2;
    worst = std::max({worst, std::abs(z1 - (std::cos(th) - std::sin(th))),
                      std::abs(z2 - (std::cos(th) + std::sin(th)))});
    ++rows;
  }
  CHECK(rows == 256);
  CHECK(worst < 1e-5);
}

TEST_CASE("reduce of the forced radial model") {
  Scratch s;
  const auto cfg = s.config(R"({"model": {"name": "radial"},
      "forcing": {"component": 0, "amplitude": 0.05, "frequency": 1}})");
  const auto out = s.dir / "out";
  REQUIRE(run({"reduce", "--config", cfg.string(), "--out", out.string()}) == 0);
  std::istringstream csv(slurp(out / "coupling.csv"));
  std::string line;
  std::getline(csv, line);
  double worst = 0.0;
  while (std::getline(csv, line)) {
    double phi, q;
    char c;
    std::istringstream(line) >> phi >> c >> q;
    // averaged right-hand side 1 − Ω − ε·½cos ψ
    worst = std::max(worst, std::abs(q + 0.5 * std::cos(phi)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("identical configs give byte-identical outputs") {
  Scratch s;
  const auto cfg = s.config(R"({"network": {
      "nodes": [{"model": {"name": "radial"}}, {"model": {"name": "radial"}}],
      "epsilon": 0.05, "all_to_all": 1.0, "theta0": "random", "samples": 21},
      "seed": 11})");
  const auto a = s.dir / "a", b = s.dir / "b";
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", a.string()}) == 0);
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", b.string()}) == 0);
  for (const auto* f : {"phases_full.csv", "phases_reduced.csv", "coupling.csv"})
    CHECK(slurp(a / f) == slurp(b / f));
  const auto c = s.dir / "c";
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", c.string(), "--seed", "12"}) == 0);
  CHECK(slurp(a / "phases_full.csv") != slurp(c / "phases_full.csv"));
}

TEST_CASE("json format writes tables as json") {
  Scratch s;
  const auto cfg = s.config(R"({"model": {"name": "radial"}, "cycle": {"grid_size": 16}})");
  const auto out = s.dir / "out";
  REQUIRE(run({"find-cycle", "--config", cfg.string(), "--out", out.string(), "--format", "json"}) == 0);
  const auto t = json::parse(slurp(out / "cycle.json"));
  CHECK(t["rows"].size() == 16);
}

TEST_CASE("fit-scaling on synthetic points") {
  Scratch s;
  const auto cfg = s.config(R"({"fit_scaling": {"points": [[0.01, 0.05], [0.02, 0.1], [0.04, 0.2]]}})");
  const auto out = s.dir / "out";
  REQUIRE(run({"fit-scaling", "--config", cfg.string(), "--out", out.string()}) == 0);
  const auto fit = json::parse(slurp(out / "scaling.json"));
  CHECK(std::abs(fit["exponent"].get<double>() - 1.0) < 1e-9);
}

TEST_CASE("fnv1a reference values") {
  CHECK(phasered::cli::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(phasered::cli::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}
