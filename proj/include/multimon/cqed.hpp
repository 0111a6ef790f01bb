#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "multimon/circuit.hpp"
#include "multimon/kerr.hpp"

namespace multimon {

// Cavity coupling model. Frequencies in GHz, couplings and shifts in MHz.
// chi maps computational eigenstate labels ("000".."111") to the total
// dispersive shift of the cavity for that state.
struct CavityModel {
  double omega_r_ghz = 0.0;
  double g_ref_mhz = 0.0;
  Eigen::VectorXd field_direction;     // unit vector in node space
  std::vector<double> g_direct_mhz;    // g'_mu per mode
  std::vector<double> detunings_ghz;   // Delta_mu0 per mode
  std::map<std::string, double> chi_mhz;
};

// Direct coupling of each mode: capacitance-metric projection of the
// numerical mode onto the ideal ring pattern of reference_mode, times g_ref.
// For the trimon with the cavity field along qubit A, reference_mode = 0.
std::vector<double> direct_couplings(const ModeSolution& modes,
                                     int reference_mode, double g_ref_mhz);

// Dispersive shifts of all computational eigenstates of a three-qubit device
// from direct plus indirect (cross-Kerr mediated) coupling. qubit_freqs are
// the reported transition frequencies f_mu; detunings are f_mu - omega_r.
// Throws PhysicsError if any denominator comes within 1 MHz of zero.
CavityModel dispersive_shifts(double omega_r_ghz,
                              const std::vector<double>& g_direct_mhz,
                              const KerrTensor& kerr,
                              const std::vector<double>& qubit_freqs);

// Single-excitation shifts of the ideal trimon (only qubit A coupled).
// Used as the reduction reference for the general formulas.
std::array<double, 3> trimon_dispersive_shifts(double g_a_mhz, double delta_a0_ghz,
                                               double j_a, double j_ab,
                                               double j_ca);

// Joint-readout histogram model: each eigenstate produces a Gaussian on the
// measurement axis centered at the cavity phase response for its total
// dispersive shift. Two demarcation lines classify 000-like / discarded /
// 111-like outcomes.
struct HistogramRow {
  std::string state;
  double mean = 0.0;
  double sigma = 0.0;
  long count_below = 0;
  long count_between = 0;
  long count_above = 0;
};

struct ReadoutHistograms {
  std::vector<HistogramRow> rows;
  double discard_fraction = 0.0;   // prepared 000 or 111, between the lines
  double mis_000_as_111 = 0.0;
  double mis_111_as_000 = 0.0;
  bool state_000_below = true;     // which side of the axis 000 sits on
  std::string csv() const;
};

ReadoutHistograms readout_histograms(const std::map<std::string, double>& chi_mhz,
                                     double drive_detuning_mhz,
                                     double noise_sigma, long shots,
                                     std::pair<double, double> demarcations,
                                     std::uint64_t seed,
                                     double kappa_mhz = 1.0);

}  // namespace multimon
