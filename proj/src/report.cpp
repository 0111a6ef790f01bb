#include "multimon/report.hpp"

#include <ctime>
#include <sstream>

#include "json.hpp"

#include "multimon/errors.hpp"

namespace multimon {

std::string RunManifest::timestamp() const {
  if (reproducible) return "";
  std::time_t now = std::time(nullptr);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["inputs"] = inputs;
  j["config"] = config;
  j["version"] = kToolVersion;
  j["seed"] = seed;
  const std::string ts = timestamp();
  if (!ts.empty()) j["timestamp"] = ts;
  return j.dump();
}

std::string RunManifest::to_comment_block() const {
  std::ostringstream os;
  os << "# multimon " << kToolVersion << " | command: " << command;
  if (!inputs.empty()) {
    os << " | inputs:";
    for (const auto& in : inputs) os << " " << in;
  }
  if (!config.empty()) os << " | " << config;
  os << " | seed: " << seed;
  const std::string ts = timestamp();
  if (!ts.empty()) os << " | " << ts;
  os << "\n";
  return os.str();
}

namespace {

nlohmann::json device_json(const DeviceAnalysis& dev,
                           const SpacingReport& spacing) {
  nlohmann::json j;
  const char* names = "ABC";
  for (int mu = 0; mu < 3; ++mu) {
    const std::string q(1, names[mu]);
    j["qubits"][q]["f_ghz"] = dev.qubit_freqs[mu];
    j["qubits"][q]["omega_ghz"] = dev.omega[mu];
    j["qubits"][q]["alpha_ghz"] = dev.kerr.anharmonicity(mu);
    j["qubits"][q]["g_direct_mhz"] = dev.g_direct_mhz[mu];
    j["qubits"][q]["detuning_ghz"] = dev.cavity.detunings_ghz[mu];
  }
  j["coupling_ghz"]["J_AB"] = dev.kerr.cross_kerr(0, 1);
  j["coupling_ghz"]["J_BC"] = dev.kerr.cross_kerr(1, 2);
  j["coupling_ghz"]["J_CA"] = dev.kerr.cross_kerr(2, 0);
  j["three_body_ghz"] = dev.kerr.three_body_sym(0, 1, 2);
  j["three_wave_ghz"] = dev.kerr.three_wave_sym(0, 1, 2);
  for (const auto& [state, chi] : dev.cavity.chi_mhz) {
    j["chi_mhz"][state] = chi;
  }
  j["omega_r_ghz"] = dev.cavity.omega_r_ghz;
  for (const auto& line : dev.ladder.transitions) {
    j["transitions_ghz"][line.label.str()] = line.freq_ghz;
  }
  for (const auto& line : dev.ladder.leakage_transitions) {
    j["leakage_transitions_ghz"][line.label.str()] = line.freq_ghz;
  }
  j["spacing"]["pass"] = spacing.pass;
  j["spacing"]["min_gap_mhz"] = spacing.min_gap_mhz;
  j["spacing"]["min_gap_pair"] = spacing.min_gap_pair;
  j["spacing"]["e111_ghz"] = spacing.e111_ghz;
  j["spacing"]["stability_limit_ghz"] = spacing.stability_limit_ghz;
  j["spacing"]["violations"] = spacing.violations;
  if (!dev.degeneracy_warning.empty()) {
    j["warnings"].push_back(dev.degeneracy_warning);
  }
  for (const auto& w : dev.kerr.warnings) j["warnings"].push_back(w);
  return j;
}

}  // namespace

std::string analysis_report_text(const DeviceAnalysis& dev,
                                 const SpacingReport& spacing,
                                 const RunManifest& manifest) {
  std::ostringstream os;
  os.precision(6);
  os << manifest.to_comment_block();
  os << "device analysis (trimon)\n";
  const char* names = "ABC";
  os << "  qubit     f (GHz)   omega (GHz)  alpha (GHz)   g' (MHz)\n";
  for (int mu = 0; mu < 3; ++mu) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %c      %9.4f    %9.4f    %+8.4f   %8.2f\n",
                  names[mu], dev.qubit_freqs[mu], dev.omega[mu],
                  dev.kerr.anharmonicity(mu), dev.g_direct_mhz[mu]);
    os << buf;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "  J_AB %.1f MHz  J_BC %.1f MHz  J_CA %.1f MHz  "
                "J_ABC %.2f MHz  xi %.2f MHz\n",
                dev.kerr.cross_kerr(0, 1) * 1e3, dev.kerr.cross_kerr(1, 2) * 1e3,
                dev.kerr.cross_kerr(2, 0) * 1e3,
                dev.kerr.three_body_sym(0, 1, 2) * 1e3,
                dev.kerr.three_wave_sym(0, 1, 2) * 1e3);
  os << buf;
  os << "  cavity " << dev.cavity.omega_r_ghz << " GHz, dispersive shifts (MHz):\n";
  for (const auto& [state, chi] : dev.cavity.chi_mhz) {
    std::snprintf(buf, sizeof buf, "    chi_%s = %+.4f\n", state.c_str(), chi);
    os << buf;
  }
  os << "  conditional transitions (GHz):\n";
  for (const auto& line : dev.ladder.transitions) {
    std::snprintf(buf, sizeof buf, "    w_%s = %.4f\n", line.label.str().c_str(),
                  line.freq_ghz);
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "  spacing: %s (min gap %.2f MHz at %s)\n",
                spacing.pass ? "pass" : "FAIL", spacing.min_gap_mhz,
                spacing.min_gap_pair.c_str());
  os << buf;
  std::snprintf(buf, sizeof buf,
                "  stability: E(111) = %.3f GHz vs limit %.3f GHz (%s)\n",
                spacing.e111_ghz, spacing.stability_limit_ghz,
                spacing.stability_ok ? "ok" : "FAIL");
  os << buf;
  for (const auto& v : spacing.violations) os << "  violation: " << v << "\n";
  if (!dev.degeneracy_warning.empty()) {
    os << "  warning: " << dev.degeneracy_warning << "\n";
  }
  for (const auto& w : dev.kerr.warnings) os << "  warning: " << w << "\n";
  return os.str();
}

std::string analysis_report_json(const DeviceAnalysis& dev,
                                 const SpacingReport& spacing,
                                 const RunManifest& manifest) {
  nlohmann::json j = device_json(dev, spacing);
  j["manifest"] = nlohmann::json::parse(manifest.to_json());
  return j.dump(2) + "\n";
}

std::string analysis_report_csv(const DeviceAnalysis& dev,
                                const SpacingReport& spacing,
                                const RunManifest& manifest) {
  std::ostringstream os;
  os.precision(9);
  os << manifest.to_comment_block();
  os << "key,value\n";
  const char* names = "ABC";
  for (int mu = 0; mu < 3; ++mu) {
    os << "f_" << names[mu] << "," << dev.qubit_freqs[mu] << "\n";
    os << "alpha_" << names[mu] << "," << dev.kerr.anharmonicity(mu) << "\n";
    os << "gprime_" << names[mu] << "," << dev.g_direct_mhz[mu] << "\n";
  }
  os << "J_AB," << dev.kerr.cross_kerr(0, 1) << "\n";
  os << "J_BC," << dev.kerr.cross_kerr(1, 2) << "\n";
  os << "J_CA," << dev.kerr.cross_kerr(2, 0) << "\n";
  os << "xi_ABC," << dev.kerr.three_wave_sym(0, 1, 2) << "\n";
  for (const auto& [state, chi] : dev.cavity.chi_mhz) {
    os << "chi_" << state << "," << chi << "\n";
  }
  os << "min_gap_mhz," << spacing.min_gap_mhz << "\n";
  os << "spacing_pass," << (spacing.pass ? 1 : 0) << "\n";
  return os.str();
}

std::vector<std::string> preset_names() {
  return {"trimon-symmetric", "trimon-design-table", "ring6", "open-ring",
          "linear-chain"};
}

Netlist preset_netlist(const std::string& name) {
  Netlist nl;
  if (name == "trimon-symmetric") {
    nl.node_count = 4;
    nl.branches = {{0, 1, 9.0, 0, 36.0}, {1, 2, 9.0, 0, 36.0},
                   {2, 3, 9.0, 0, 36.0}, {3, 0, 9.0, 0, 36.0},
                   {0, 2, 0, 0, 12.0},   {1, 3, 0, 0, 24.0}};
    nl.ground_caps_ff = {0.01, 0.02, 0.01, 0.02};
  } else if (name == "trimon-design-table") {
    nl.node_count = 4;
    nl.branches = {{0, 1, 8.794, 0, 34.0}, {1, 2, 8.712, 0, 34.0},
                   {2, 3, 8.042, 0, 34.0}, {3, 0, 7.143, 0, 34.0},
                   {0, 2, 0, 0, 11.2},     {1, 3, 0, 0, 19.1}};
    nl.ground_caps_ff = {0.01, 0.02, 0.01, 0.02};
  } else if (name == "ring6") {
    nl.node_count = 6;
    for (int k = 0; k < 6; ++k) {
      nl.branches.push_back({k, (k + 1) % 6, 9.0, 0, 36.0});
    }
    for (int k = 0; k < 6; ++k) {
      nl.branches.push_back({k, (k + 2) % 6, 0, 0, 12.0});
    }
    for (int k = 0; k < 3; ++k) {
      nl.branches.push_back({k, k + 3, 0, 0, 6.0});
    }
    nl.ground_caps_ff = std::vector<double>(6, 0.01);
  } else if (name == "open-ring") {
    // A ring with one capacitor pad split in two; the junction graph is a
    // chain so there is no flux degree of freedom, and the large split
    // capacitance adds one low-frequency, weakly anharmonic mode.
    nl.node_count = 5;
    nl.branches = {{0, 2, 9.0, 0, 36.0}, {2, 3, 9.0, 0, 36.0},
                   {3, 4, 9.0, 0, 36.0}, {4, 1, 9.0, 0, 36.0},
                   {0, 1, 0, 0, 300.0},  {0, 3, 0, 0, 12.0},
                   {2, 4, 0, 0, 24.0},   {1, 3, 0, 0, 12.0}};
    nl.ground_caps_ff = {0.01, 0.01, 0.02, 0.01, 0.02};
  } else if (name == "linear-chain") {
    nl.node_count = 4;
    nl.branches = {{0, 1, 9.0, 0, 36.0}, {1, 2, 9.0, 0, 36.0},
                   {2, 3, 9.0, 0, 36.0}, {0, 2, 0, 0, 6.0},
                   {1, 3, 0, 0, 6.0},    {0, 3, 0, 0, 3.0}};
    nl.ground_caps_ff = {0.01, 0.02, 0.01, 0.02};
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  return nl;
}

}  // namespace multimon
