#pragma once

#include <Eigen/Dense>

#include <vector>

#include "multimon/netlist.hpp"

namespace multimon {

// Linearized circuit matrices. EL is the inductive-energy graph Laplacian in
// GHz (junctions enter with their flux-reduced effective energy), Cmat the
// capacitance matrix in fF.
struct LinearizedMatrices {
  Eigen::MatrixXd EL;
  Eigen::MatrixXd Cmat;
  std::vector<double> dc_phases;  // per junction branch, radians
};

struct ZeroMode {
  int index = 0;  // position in the raw ascending eigenvalue ordering
  Eigen::VectorXd vector;
};

// Finite-frequency normal modes from simultaneous diagonalization of EL and
// Cmat. mode_matrix columns are C-orthonormal (v^T C v = 1, C in fF); node
// phase zero-point amplitudes are mode_matrix.col(mu) * zero_point_fluxes[mu].
struct ModeSolution {
  std::vector<double> frequencies;  // GHz, ascending
  Eigen::MatrixXd mode_matrix;      // N x M
  Eigen::MatrixXd cmat;             // capacitance matrix used, fF
  std::vector<ZeroMode> zero_modes;
  std::vector<double> zero_point_fluxes;

  int mode_count() const { return static_cast<int>(frequencies.size()); }
};

// Static junction phases induced by loop flux, from matching junction currents
// around the ring: EJ_k sin(phi_k) equal for all k, sum phi_k = 2*pi*flux.
// Returns all zeros at zero flux. Requires the junction graph to be a single
// cycle when flux is nonzero.
std::vector<double> solve_dc_phases(const Netlist& nl);

LinearizedMatrices build_matrices(const Netlist& nl,
                                  const std::vector<double>& dc_phases);

ModeSolution normal_modes(const LinearizedMatrices& mats);

// Analytic mode shapes of the N-fold symmetric ring (unit-normalized,
// discrete sin/cos standing waves). Used as the orientation reference for
// degenerate subspaces and as a test oracle.
std::vector<Eigen::VectorXd> symmetric_ring_modes(int n);

// Convenience: validate, solve DC phases, build and diagonalize.
struct CircuitSolution {
  std::vector<double> dc_phases;
  LinearizedMatrices matrices;
  ModeSolution modes;
};
CircuitSolution solve_circuit(const Netlist& nl);

}  // namespace multimon
