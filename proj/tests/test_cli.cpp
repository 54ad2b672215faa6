#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(ATTSYNC_TEST_WORKDIR) / "cli";

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli(const std::string& args, const std::string& env = "") {
  fs::create_directories(kWork);
  const fs::path out = kWork / "stdout.txt";
  const fs::path err = kWork / "stderr.txt";
  const std::string cmd = env + " \"" + std::string(ATTSYNC_CLI) + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  std::ofstream(p) << text;
  return p;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("check reports guarantees for the builtins") {
  Outcome o = cli("check --builtin example2-ftc");
  CHECK(o.code == 0);
  auto j = nlohmann::json::parse(o.out);
  CHECK(j["finite_time"] == true);

  o = cli("check --builtin example1-sliding");
  CHECK(o.code == 1);
  j = nlohmann::json::parse(o.out);
  CHECK(j["sliding_risk"] == true);
  CHECK(j["finite_time"] == false);
}

TEST_CASE("check on a disconnected graph") {
  const auto p = write_config("disconnected.json", R"({
  "name": "split", "protocol": 1,
  "agents": [{"init": [0.1, 0, 0], "controller": {"kind": "sign"}},
             {"init": [0, 0.1, 0], "controller": {"kind": "sign"}},
             {"init": [0, 0, 0.1], "controller": {"kind": "sign"}},
             {"init": [0.2, 0, 0], "controller": {"kind": "lipschitz"}}],
  "edges": [[1, 2], [3, 4]],
  "integrator": {"h": 0.01, "t_max": 1}
})");
  const Outcome o = cli("check " + q(p));
  CHECK(o.code == 2);
  CHECK(o.out.find("Disconnected") != std::string::npos);
}

TEST_CASE("schema errors exit 2 with a line number") {
  const auto p = write_config("bad.json", "{\n  \"name\": \"bad\",\n  \"protocol\": 7\n}\n");
  const Outcome o = cli("check " + q(p));
  CHECK(o.code == 2);
  CHECK(o.err.find("line 3") != std::string::npos);
  CHECK(cli("check " + q(kWork / "missing.json")).code == 2);
  CHECK(cli("check").code == 2);
  CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("run example2-ftc") {
  const fs::path dir = kWork / "ftc";
  const Outcome o = cli("run --builtin example2-ftc --out " + q(dir));
  CHECK(o.code == 0);
  for (const char* f : {"trajectory.csv", "channels.csv", "diagnostics.json", "guarantees.json"}) {
    CHECK(fs::exists(dir / f));
    CHECK_FALSE(fs::exists(dir / (std::string(f) + ".tmp")));
  }
  const auto traj = csv_rows(dir / "trajectory.csv");
  CHECK(traj.front() == std::vector<std::string>{"t", "agent", "x1", "x2", "x3", "norm"});
  CHECK(traj[1][1] == "1");
  CHECK(traj[3][1] == "3");
  const auto ch = csv_rows(dir / "channels.csv");
  CHECK(ch.front() == std::vector<std::string>{"t", "V1", "V2", "V3", "disagreement", "max_norm"});
  CHECK(traj.size() - 1 == 3 * (ch.size() - 1));

  const auto d = nlohmann::json::parse(slurp(dir / "diagnostics.json"));
  CHECK(d["classification"]["label"] == "finite_time");
  const double tc = d["classification"]["settle_time"];
  const double bound = d["rate_constants"]["settling_bound"];
  CHECK(tc <= 1.1 * bound);
  CHECK(d["settling_bound_met"] == true);
  CHECK(d["lyapunov"]["V1_nonincreasing"] == true);
}

TEST_CASE("runs are byte-identical") {
  CHECK(cli("run --builtin example2-ftc --out " + q(kWork / "det_a")).code == 0);
  CHECK(cli("run --builtin example2-ftc --out " + q(kWork / "det_b")).code == 0);
  for (const char* f : {"trajectory.csv", "channels.csv", "diagnostics.json"}) {
    CHECK(slurp(kWork / "det_a" / f) == slurp(kWork / "det_b" / f));
  }
}

TEST_CASE("run example2-asymptotic tracks the closed form") {
  const fs::path dir = kWork / "asym";
  const Outcome o = cli("run --builtin example2-asymptotic --out " + q(dir));
  CHECK(o.code == 1);
  const auto d = nlohmann::json::parse(slurp(dir / "diagnostics.json"));
  CHECK(d["classification"]["label"] == "asymptotic");
  const auto rows = csv_rows(dir / "trajectory.csv");
  std::size_t checked = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][1] != "1") continue;
    const double t = std::stod(rows[k][0]);
    const double e = std::exp(-t);
    const double err = std::hypot(std::stod(rows[k][2]) - e, std::stod(rows[k][3]), std::stod(rows[k][4]));
    CHECK(err < 1e-4 * e + 1e-6);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("run example1-sliding-analytic records the pi crossing") {
  const fs::path dir = kWork / "sliding";
  const Outcome o = cli("run --builtin example1-sliding-analytic --out " + q(dir));
  CHECK(o.code == 1);
  const auto d = nlohmann::json::parse(slurp(dir / "diagnostics.json"));
  CHECK(d["membership"]["passed"] == true);
  const double tstar = d["crossing_time"]["observed"];
  CHECK(std::abs(tstar - 0.2831853071795865) < 1e-12);
  bool crossed = false;
  for (const auto& e : d["events"]) crossed = crossed || e["kind"] == "crossed_pi";
  CHECK(crossed);
}

TEST_CASE("run reports domain violations with exit 3") {
  const auto p = write_config("escape.json", R"({
  "name": "escape", "protocol": 1,
  "agents": [{"init": [6.28, 0, 0], "controller": {"kind": "sign"}},
             {"init": [6.2, 0.5, 0], "controller": {"kind": "sign"}}],
  "edges": [[1, 2]],
  "integrator": {"h": 0.01, "t_max": 1}
})");
  const fs::path dir = kWork / "escape";
  const Outcome o = cli("run " + q(p) + " --out " + q(dir));
  CHECK(o.code == 3);
  const auto d = nlohmann::json::parse(slurp(dir / "diagnostics.json"));
  CHECK(d["completed"] == false);
  bool found = false;
  for (const auto& e : d["events"]) found = found || e["kind"] == "out_of_domain";
  CHECK(found);
}

TEST_CASE("run on protocol 2") {
  const fs::path dir = kWork / "p2";
  CHECK(cli("run --builtin protocol2-path --out " + q(dir)).code == 0);
  const auto d = nlohmann::json::parse(slurp(dir / "diagnostics.json"));
  CHECK(d["lyapunov"]["V3_nonincreasing"] == true);
  CHECK(d["classification"]["label"] == "finite_time");
}

TEST_CASE("sweep argument checks") {
  const std::string out = " --out " + q(kWork / "sweep_bad");
  CHECK(cli("sweep --builtin example2-ftc --trials 0 --max-norm 1" + out).code == 2);
  CHECK(cli("sweep --builtin example2-ftc --trials 3 --max-norm 3.2" + out).code == 2);
  CHECK(cli("sweep --builtin example2-ftc --trials 3 --max-norm 0" + out).code == 2);
  // n·C² must stay below π² for the componentwise protocol.
  CHECK(cli("sweep --builtin protocol2-path --trials 3 --max-norm 1.9" + out).code == 2);
  CHECK(cli("sweep --builtin example1-sliding-analytic --trials 3 --max-norm 1" + out).code == 2);
  CHECK(cli("sweep --builtin example2-ftc --max-norm 1" + out).code == 2);
}

TEST_CASE("sweep of a compliant protocol 1 configuration") {
  const auto p = write_config("sweep1.json", R"({
  "name": "sweep-p3", "protocol": 1,
  "agents": [{"init": [0, 0, 0], "controller": {"kind": "lipschitz"}},
             {"init": [0, 0, 0], "controller": {"kind": "sign"}},
             {"init": [0, 0, 0], "controller": {"kind": "sign"}}],
  "edges": [[1, 2], [2, 3]],
  "integrator": {"h": 0.001, "t_max": 60, "record_every": 20},
  "seed": 2024
})");
  const fs::path dir = kWork / "sweep1";
  const Outcome o = cli("sweep " + q(p) + " --out " + q(dir) + " --trials 100 --max-norm 2.827433388230814");
  CHECK(o.code == 0);
  const auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(s["fractions"]["invariance"] == 1.0);
  CHECK(s["fractions"]["finite_time"] == 1.0);
  CHECK(s["fractions"]["monotone"] == 1.0);
  CHECK(s["labels"]["finite_time"] == 100);
  CHECK(csv_rows(dir / "trials.csv").size() == 101);

  // Same seed, different thread count: same bytes.
  CHECK(cli("sweep " + q(p) + " --out " + q(kWork / "sweep1_serial") +
            " --trials 100 --max-norm 2.827433388230814 --threads 1")
            .code == 0);
  CHECK(slurp(dir / "trials.csv") == slurp(kWork / "sweep1_serial" / "trials.csv"));
}

TEST_CASE("sweep of protocol 2 keeps V3 monotone") {
  const fs::path dir = kWork / "sweep2";
  const Outcome o = cli("sweep --builtin protocol2-path --out " + q(dir) + " --trials 100 --max-norm 1.8");
  CHECK(o.code == 0);
  const auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(s["fractions"]["monotone"] == 1.0);
  CHECK(s["out_of_domain"] == 0);
}

TEST_CASE("logging goes to stderr at the requested level") {
  const fs::path dir = kWork / "log";
  Outcome o = cli("run --builtin protocol2-path --out " + q(dir), "ATTSYNC_LOG=error");
  CHECK(o.err.empty());
  o = cli("run --builtin protocol2-path --out " + q(dir), "ATTSYNC_LOG=debug");
  CHECK(o.err.find("[attsync info]") != std::string::npos);
  CHECK(o.err.find("[attsync debug]") != std::string::npos);
}

TEST_CASE("builtins can be listed and printed") {
  Outcome o = cli("builtins");
  CHECK(o.code == 0);
  CHECK(o.out.find("example2-ftc") != std::string::npos);
  o = cli("show example2-ftc");
  CHECK(o.code == 0);
  CHECK(nlohmann::json::parse(o.out)["name"] == "example2-ftc");
}
