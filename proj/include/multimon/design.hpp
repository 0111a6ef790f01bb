#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multimon/cqed.hpp"
#include "multimon/kerr.hpp"
#include "multimon/netlist.hpp"

namespace multimon {

// Four-junction ring parameterized by mean values and the signed asymmetry
// combinations that mix specific mode pairs.
struct AsymmetrySpec {
  double ej_mean_ghz = 9.0;
  double eta_ab = 0.0;
  double eta_bc = 0.0;
  double eta_ca = 0.0;
  double c_mean_ff = 36.0;
  double eta_ab_prime = 0.0;
  double eta_bc_prime = 0.0;
  double eta_ca_prime = 0.0;
  double c13_ff = 12.0;
  double c24_ff = 24.0;

  std::array<double, 4> junction_energies() const;
  std::array<double, 4> nn_capacitances() const;
};

Netlist apply_asymmetry(const AsymmetrySpec& spec);

// Inverse of apply_asymmetry on the junction sector.
struct JunctionAsymmetry {
  double ej_mean_ghz;
  double eta_ab, eta_bc, eta_ca;
};
JunctionAsymmetry recover_junction_asymmetry(const std::array<double, 4>& ej);

struct DesignTarget {
  double f_min_ghz = 4.0;
  double f_max_ghz = 6.0;
  double min_separation_mhz = 30.0;
  // Desired conditional-transition frequencies by label, e.g. {"AB0C0", 5.24}.
  std::vector<std::pair<std::string, double>> target_transitions;
  double omega_r_ghz = 7.3;
  double g_ref_mhz = 70.0;
  double stability_margin = 0.6;  // E(111) <= margin * 4 EJ_min
};

struct SpacingReport {
  bool pass = false;
  double min_gap_mhz = 0.0;
  std::string min_gap_pair;
  double e111_ghz = 0.0;
  double stability_limit_ghz = 0.0;  // margin * 4 EJ_min
  bool stability_ok = false;
  bool window_ok = false;
  std::vector<std::string> violations;
};

// Pairwise-gap audit of the twelve computational transitions plus the 1->2
// leakage lines, the |111> stability bound and the frequency window.
SpacingReport validate_spacing(const LevelDiagram& diagram,
                               const DesignTarget& target,
                               const std::array<double, 4>& junction_energies);

struct DeviceAnalysis {
  Netlist netlist;
  std::vector<double> omega;        // bare harmonic, trimon order A,B,C
  std::vector<double> qubit_freqs;  // reported f = omega - J
  KerrTensor kerr;                  // trimon order
  LevelDiagram diagram;             // physical spectrum (drives the simulator)
  LevelDiagram ladder;              // reported-convention lines (device tables)
  std::vector<double> g_direct_mhz;
  CavityModel cavity;
  std::string degeneracy_warning;   // non-empty if two qubits nearly coincide
};

// Full trimon pipeline: modes -> Kerr -> levels -> couplings -> shifts.
DeviceAnalysis analyze_trimon(const Netlist& nl, double omega_r_ghz,
                              double g_ref_mhz, int order = 4);

struct OptimizeResult {
  AsymmetrySpec spec;
  Netlist netlist;
  SpacingReport report;
  double objective = 0.0;
  bool feasible = false;
  int evaluations = 0;
};

// Derivative-free (Nelder-Mead simplex with restarts) minimization of the
// spacing/window/target penalty over the selected knobs.
// Knob names: ej_mean, eta_ab, eta_bc, eta_ca, c_mean, eta_ab_prime,
// eta_bc_prime, eta_ca_prime, c13, c24.
OptimizeResult optimize_design(const DesignTarget& target,
                               const AsymmetrySpec& seed,
                               const std::vector<std::string>& knobs,
                               std::uint64_t rng_seed = 0,
                               int budget = 2000);

}  // namespace multimon
