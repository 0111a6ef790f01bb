#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multimon/circuit.hpp"
#include "multimon/polynomial.hpp"
#include "multimon/transitions.hpp"

namespace multimon {

// Taylor expansion of the circuit potential in scaled normal-mode coordinates
// x_mu (mode flux over zero-point flux), coefficients in GHz.
struct PotentialExpansion {
  ModePolynomial poly;
  int order = 4;
  std::vector<double> harmonic_freqs;  // GHz, copied from the mode solution
};

PotentialExpansion expand_potential(const Netlist& nl, const ModeSolution& modes,
                                    int order);

using ModeTriple = std::array<int, 3>;  // sorted indices

// Kerr coefficients in the convention
//   H/h = sum_mu [(omega_mu - beta_mu + lr_mu) n_mu - J_mu n_mu^2]
//       - sum_{mu<nu} 2 J_munu n_mu n_nu
//       + sum_{mu<nu<zeta} J_munuzeta n_mu n_nu n_zeta,
// so a control excitation on nu shifts qubit mu by -2 J_munu and the
// anharmonicity is -2 J_mu. linear_residual (lr) is zero at order 4 and
// carries the sixth-order frequency corrections otherwise.
struct KerrTensor {
  std::vector<double> self_kerr;             // J_mu, GHz
  Eigen::MatrixXd cross_kerr;                // J_munu, GHz, zero diagonal
  std::map<ModeTriple, double> three_body;   // J_munuzeta, GHz
  std::map<ModeTriple, double> three_wave;   // xi: coefficient of x_mu x_nu x_zeta, GHz
  std::vector<double> beta;                  // J_mu + sum_nu J_munu
  std::vector<double> linear_residual;       // GHz
  int order = 4;
  std::vector<std::string> warnings;

  int mode_count() const { return static_cast<int>(self_kerr.size()); }
  double anharmonicity(int mu) const { return -2.0 * self_kerr[mu]; }
  double three_body_sym(int a, int b, int c) const;
  double three_wave_sym(int a, int b, int c) const;

  // Reported qubit transition frequency f_mu = omega_mu - J_mu. This is the
  // convention behind the headline device tables; the level diagram carries
  // the full spectrum.
  std::vector<double> qubit_frequencies(const std::vector<double>& omega) const;
};

KerrTensor extract_kerr(const PotentialExpansion& expansion,
                        const ModeSolution& modes);

// Eq.-9 diagonal energy at an occupation tuple, GHz (E(0) = 0).
double eq9_energy(const KerrTensor& kerr, const std::vector<double>& omega,
                  const std::vector<int>& occupation, bool include_three_body);

struct LevelDiagram {
  int mode_count = 0;
  int max_occupation = 1;
  std::map<std::vector<int>, double> energies;  // occupation -> GHz, E(0)=0
  struct Line {
    TransitionLabel label;
    double freq_ghz;
  };
  std::vector<Line> transitions;
  std::vector<Line> leakage_transitions;  // 1->2 lines, same labeling

  double energy(const std::vector<int>& occ) const;
  double transition(const TransitionLabel& label) const;
  double transition(const std::string& label) const;
};

LevelDiagram build_level_diagram(const KerrTensor& kerr,
                                 const std::vector<double>& omega,
                                 int max_occupation,
                                 bool include_three_body = true);

// Maps the paper's trimon letters to mode indices of a 4-node ring solution:
// returns {iA, iB, iC} where A is the (1,0,-1,0) dipole, B the (0,1,0,-1)
// dipole and C the quadrupole pattern.
std::array<int, 3> trimon_mode_order(const ModeSolution& modes);

ModeSolution permute_modes(const ModeSolution& modes,
                           const std::vector<int>& order);

struct FluxPoint {
  double flux_phi0 = 0.0;
  std::vector<double> qubit_freqs;  // reported convention, trimon order A,B,C
  KerrTensor kerr;                  // trimon mode order
  std::vector<double> omega;        // bare harmonic, trimon order
};

// Full per-point reanalysis across a flux grid (4-node ring devices).
std::vector<FluxPoint> flux_sweep(const Netlist& nl,
                                  const std::vector<double>& flux_grid,
                                  int order = 4);

std::string flux_sweep_csv(const std::vector<FluxPoint>& points);

}  // namespace multimon
