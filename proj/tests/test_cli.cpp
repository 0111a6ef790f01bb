#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "multimon/netlist.hpp"
#include "multimon/report.hpp"

namespace {

std::string tmp_path(const std::string& name) {
  return std::string(TEST_TMP_DIR) + "/" + name;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string out_file = tmp_path("cli_stdout.txt");
  const std::string cmd = std::string(MULTIMON_CLI_PATH) + " " + args + " > " +
                          out_file + " 2> " + tmp_path("cli_stderr.txt");
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("presets list and emission") {
  std::string out;
  CHECK(run_cli("presets", &out) == 0);
  for (const auto& name : multimon::preset_names()) {
    CHECK(out.find(name) != std::string::npos);
  }
  CHECK(run_cli("presets trimon-design-table", &out) == 0);
  const auto nl = multimon::parse_netlist(out);
  CHECK(nl.node_count == 4);
  CHECK(run_cli("presets bogus", &out) == 1);
}

TEST_CASE("netlists written by the tool re-parse to equal values") {
  const auto nl = multimon::preset_netlist("trimon-design-table");
  const auto round = multimon::parse_netlist(multimon::netlist_to_json(nl));
  REQUIRE(round.branches.size() == nl.branches.size());
  for (size_t k = 0; k < nl.branches.size(); ++k) {
    CHECK(round.branches[k].i == nl.branches[k].i);
    CHECK(round.branches[k].ej_ghz == nl.branches[k].ej_ghz);
    CHECK(round.branches[k].c_ff == nl.branches[k].c_ff);
  }
  CHECK(round.ground_caps_ff == nl.ground_caps_ff);
}

TEST_CASE("analyze reports the design table and is reproducible") {
  const std::string netlist_file = tmp_path("design.json");
  write_file(netlist_file,
             multimon::netlist_to_json(
                 multimon::preset_netlist("trimon-design-table")));
  std::string a, b;
  CHECK(run_cli("analyze " + netlist_file + " --reproducible --format json",
                &a) == 0);
  CHECK(run_cli("analyze " + netlist_file + " --reproducible --format json",
                &b) == 0);
  CHECK(a == b);
  CHECK(a.find("\"f_ghz\": 5.24") != std::string::npos);
  CHECK(a.find("\"pass\": true") != std::string::npos);

  // The symmetric device reports a degeneracy warning.
  const std::string sym_file = tmp_path("sym.json");
  auto sym = multimon::preset_netlist("trimon-symmetric");
  sym.branches[4].c_ff = 18.0;
  sym.branches[5].c_ff = 18.0;
  write_file(sym_file, multimon::netlist_to_json(sym));
  std::string out;
  CHECK(run_cli("analyze " + sym_file + " --format text", &out) == 0);
  CHECK(out.find("degenerate") != std::string::npos);
}

TEST_CASE("malformed netlists exit with a parse diagnostic") {
  const std::string bad_file = tmp_path("bad.json");
  write_file(bad_file, "{\"nodes\": 4, \"branches\": [");
  std::string out;
  CHECK(run_cli("analyze " + bad_file, &out) == 1);
  CHECK(run_cli("analyze /nonexistent/file.json", &out) == 1);
}

TEST_CASE("sweep emits the canonical CSV") {
  std::string out;
  CHECK(run_cli("sweep --preset trimon-symmetric --flux 0:0.25:0.05 "
                "--reproducible",
                &out) == 0);
  CHECK(out.find("flux_phi0,f_A,f_B,f_C,alpha_A,alpha_B,alpha_C,J_AB,J_BC,"
                 "J_CA,xi_ABC") != std::string::npos);
  // Six rows plus header plus manifest.
  int rows = 0;
  std::stringstream ss(out);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line[0] != '#' && line.find("flux_phi0") != 0) ++rows;
  }
  CHECK(rows == 6);
  CHECK(run_cli("sweep --preset trimon-symmetric --flux 0.3:0.1:0.1", &out) ==
        1);
}

TEST_CASE("compile produces the two-pulse CNOT schedule") {
  const std::string program_file = tmp_path("prog.txt");
  write_file(program_file, "CNOT B A\n");
  std::string out;
  CHECK(run_cli("compile " + program_file + " --reproducible", &out) == 0);
  CHECK(out.find("AB1C0") != std::string::npos);
  CHECK(out.find("AB1C1") != std::string::npos);
  CHECK(out.find("pulse 2") != std::string::npos);
  CHECK(out.find("pulse 3") == std::string::npos);
  CHECK(out.find("# replay distance to ideal") != std::string::npos);

  write_file(program_file, "WIBBLE A\n");
  CHECK(run_cli("compile " + program_file, &out) == 1);
}

TEST_CASE("simulate runs a short experiment file") {
  const std::string exp_file = tmp_path("exp.json");
  write_file(exp_file, R"({
    "state": "bell-ab",
    "pi_length_ns": 100,
    "decoherence_mode": "none",
    "levels_per_mode": 3,
    "step_ns": 1.0,
    "seed": 1
  })");
  std::string out;
  CHECK(run_cli("simulate " + exp_file + " --reproducible", &out) == 0);
  CHECK(out.find("\"fidelity\"") != std::string::npos);

  // Sweep mode emits CSV.
  write_file(exp_file, R"({
    "state": "bell-ab",
    "pi_length_ns": [100, 200],
    "decoherence_mode": "none",
    "step_ns": 1.0
  })");
  CHECK(run_cli("simulate " + exp_file + " --reproducible", &out) == 0);
  CHECK(out.find("pi_length_ns,fidelity") != std::string::npos);
}

TEST_CASE("optimize flags infeasible targets with exit code 2") {
  const std::string target_file = tmp_path("target.json");
  write_file(target_file, R"({
    "f_min_ghz": 4.0, "f_max_ghz": 6.5, "min_separation_mhz": 30,
    "target_transitions": {"AB0C0": 5.0, "BC0A0": 5.0, "CA0B0": 5.0},
    "seed_spec": {"c_mean_ff": 34, "c13_ff": 11.2, "c24_ff": 19.1},
    "knobs": ["ej_mean", "eta_ab", "eta_bc", "eta_ca"],
    "budget": 200
  })");
  std::string out;
  CHECK(run_cli("optimize " + target_file + " --reproducible", &out) == 2);
  CHECK(out.find("\"feasible\": false") != std::string::npos);
}
