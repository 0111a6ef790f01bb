#include "multimon/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "multimon/constants.hpp"
#include "multimon/errors.hpp"

namespace multimon {

namespace {

// Walks the junction-only subgraph and returns the cycle as ordered
// (branch index, orientation) pairs, or an empty list if it is not a single
// cycle covering all junction-bearing nodes.
std::vector<std::pair<int, int>> junction_cycle(const Netlist& nl) {
  const auto jb = nl.junction_branches();
  if (jb.size() < 3) return {};
  std::map<int, std::vector<int>> adj;  // node -> junction branch indices
  for (int b : jb) {
    adj[nl.branches[b].i].push_back(b);
    adj[nl.branches[b].j].push_back(b);
  }
  for (const auto& [node, edges] : adj) {
    if (edges.size() != 2) return {};
  }
  if (adj.size() != jb.size()) return {};  // |V| == |E| for a single cycle

  std::vector<std::pair<int, int>> cycle;
  const int start = adj.begin()->first;
  int node = start;
  int prev_branch = -1;
  do {
    // Prefer a branch leaving this node in its stored orientation so the
    // cycle (and the flux sign) follows the file's node ordering.
    int next_branch = -1;
    for (int b : adj[node]) {
      if (b == prev_branch) continue;
      if (next_branch < 0 || (nl.branches[b].i == node &&
                              nl.branches[next_branch].i != node)) {
        next_branch = b;
      }
    }
    if (next_branch < 0) return {};
    const Branch& br = nl.branches[next_branch];
    const int dir = (br.i == node) ? +1 : -1;
    cycle.emplace_back(next_branch, dir);
    node = (dir > 0) ? br.j : br.i;
    prev_branch = next_branch;
  } while (node != start && cycle.size() <= jb.size());
  if (node != start || cycle.size() != jb.size()) return {};
  return cycle;
}

}  // namespace

std::vector<double> solve_dc_phases(const Netlist& nl) {
  const auto jb = nl.junction_branches();
  std::vector<double> phases(jb.size(), 0.0);
  if (nl.flux_phi0 == 0.0) return phases;

  const auto cycle = junction_cycle(nl);
  if (cycle.empty()) {
    throw TopologyError(
        "external flux requires the junction graph to form a single cycle");
  }

  std::vector<double> ej;
  for (const auto& [b, dir] : cycle) ej.push_back(nl.branches[b].ej_ghz);
  const double ej_min = *std::min_element(ej.begin(), ej.end());
  const double target = kTwoPi * nl.flux_phi0;

  // All phases stay in (-pi/2, pi/2), so each is asin(I/EJ_k) of the shared
  // loop current I and the phase sum is strictly increasing in I.
  auto phase_sum = [&](double current) {
    double s = 0.0;
    for (double e : ej) s += std::asin(current / e);
    return s;
  };
  const double i_max = ej_min * (1.0 - 1e-14);
  if (std::abs(target) >= phase_sum(i_max)) {
    throw PhysicsError(
        "flux too large: no junction phase solution with |phase| < pi/2");
  }
  double lo = -i_max, hi = i_max;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phase_sum(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double current = 0.5 * (lo + hi);
  // Newton polish.
  for (int it = 0; it < 8; ++it) {
    double f = phase_sum(current) - target;
    double df = 0.0;
    for (double e : ej) df += 1.0 / std::sqrt(e * e - current * current);
    current -= f / df;
    current = std::clamp(current, -i_max, i_max);
  }

  // Map cycle-oriented phases back to the stored branch orientation.
  std::map<int, int> branch_pos;
  for (size_t k = 0; k < jb.size(); ++k) branch_pos[jb[k]] = static_cast<int>(k);
  for (const auto& [b, dir] : cycle) {
    phases[branch_pos[b]] = dir * std::asin(current / nl.branches[b].ej_ghz);
  }
  return phases;
}

LinearizedMatrices build_matrices(const Netlist& nl,
                                  const std::vector<double>& dc_phases) {
  const auto jb = nl.junction_branches();
  if (dc_phases.size() != jb.size()) {
    throw ConfigError("dc_phases length must equal the junction count");
  }
  const int n = nl.node_count;
  LinearizedMatrices out;
  out.EL = Eigen::MatrixXd::Zero(n, n);
  out.Cmat = Eigen::MatrixXd::Zero(n, n);
  out.dc_phases = dc_phases;

  std::map<int, double> phase_of_branch;
  for (size_t k = 0; k < jb.size(); ++k) phase_of_branch[jb[k]] = dc_phases[k];

  for (int b = 0; b < static_cast<int>(nl.branches.size()); ++b) {
    const Branch& br = nl.branches[b];
    double el = 0.0;
    if (br.has_junction()) {
      const double phi = phase_of_branch[b];
      const double ej_eff = br.ej_ghz * std::cos(phi);
      if (ej_eff <= 0.0) {
        throw PhysicsError("negative effective Josephson energy on branch " +
                           std::to_string(br.i + 1) + "-" +
                           std::to_string(br.j + 1) +
                           " (|DC phase| >= pi/2)");
      }
      el += ej_eff;
    }
    if (br.has_inductor()) el += kInductiveGHznH / br.l_nh;
    if (el != 0.0) {
      out.EL(br.i, br.i) += el;
      out.EL(br.j, br.j) += el;
      out.EL(br.i, br.j) -= el;
      out.EL(br.j, br.i) -= el;
    }
    if (br.c_ff > 0.0) {
      out.Cmat(br.i, br.i) += br.c_ff;
      out.Cmat(br.j, br.j) += br.c_ff;
      out.Cmat(br.i, br.j) -= br.c_ff;
      out.Cmat(br.j, br.i) -= br.c_ff;
    }
  }
  for (int k = 0; k < n; ++k) out.Cmat(k, k) += nl.ground_caps_ff[k];

  Eigen::LLT<Eigen::MatrixXd> llt(out.Cmat);
  if (llt.info() != Eigen::Success) {
    // Identify the first node whose leading minor fails.
    for (int k = 1; k <= n; ++k) {
      Eigen::LLT<Eigen::MatrixXd> sub(out.Cmat.topLeftCorner(k, k));
      if (sub.info() != Eigen::Success) {
        throw ConfigError("capacitance matrix not positive definite at node " +
                          std::to_string(k));
      }
    }
    throw ConfigError("capacitance matrix not positive definite");
  }
  return out;
}

namespace {

bool is_circulant(const Eigen::MatrixXd& m, double tol) {
  const int n = static_cast<int>(m.rows());
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(m(i, j) - m(0, ((j - i) % n + n) % n)) > tol) return false;
    }
  }
  return true;
}

void fix_sign(Eigen::VectorXd& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-9 * scale) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

ModeSolution normal_modes(const LinearizedMatrices& mats) {
  const int n = static_cast<int>(mats.EL.rows());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(mats.EL,
                                                                mats.Cmat);
  if (ges.info() != Eigen::Success) {
    throw PhysicsError("generalized eigensolver failed");
  }
  const Eigen::VectorXd lam = ges.eigenvalues();
  const Eigen::MatrixXd vec = ges.eigenvectors();  // C-orthonormal columns
  const double lam_max = lam.cwiseAbs().maxCoeff();
  const double zero_tol = 1e-6 * lam_max;

  ModeSolution out;
  out.cmat = mats.Cmat;
  std::vector<int> finite;
  for (int k = 0; k < n; ++k) {
    if (lam(k) < -zero_tol) {
      throw PhysicsError("unstable linearization: negative mode eigenvalue " +
                         std::to_string(lam(k)));
    }
    if (lam(k) < zero_tol) {
      ZeroMode zm;
      zm.index = k;
      zm.vector = vec.col(k);
      fix_sign(zm.vector);
      out.zero_modes.push_back(zm);
    } else {
      finite.push_back(k);
    }
  }

  const int m = static_cast<int>(finite.size());
  out.mode_matrix.resize(n, m);
  for (int c = 0; c < m; ++c) {
    out.mode_matrix.col(c) = vec.col(finite[c]);
    const double f = std::sqrt(kEigToFreqSq * lam(finite[c]));
    out.frequencies.push_back(f);
    out.zero_point_fluxes.push_back(kZpfScale / std::sqrt(f));
  }

  // Degenerate subspaces of the symmetric ring are oriented against the
  // analytic standing-wave vectors so the output is deterministic.
  const double circ_tol = 1e-9 * std::max(1.0, mats.Cmat.cwiseAbs().maxCoeff());
  const bool ring = n >= 3 && is_circulant(mats.EL, 1e-9 * lam_max * 100) &&
                    is_circulant(mats.Cmat, circ_tol);
  std::vector<Eigen::VectorXd> analytic;
  if (ring) analytic = symmetric_ring_modes(n);

  int c = 0;
  while (c < m) {
    int d = c + 1;
    const double group_tol = 1e-10 * lam_max;
    while (d < m && std::abs(lam(finite[d]) - lam(finite[d - 1])) < group_tol) {
      ++d;
    }
    const int g = d - c;
    if (g > 1 && ring) {
      const Eigen::MatrixXd sub = out.mode_matrix.middleCols(c, g);
      // Candidates ranked by projection onto the degenerate subspace.
      std::vector<std::pair<double, int>> ranked;
      for (int a = 0; a < static_cast<int>(analytic.size()); ++a) {
        const Eigen::VectorXd coeff =
            sub.transpose() * mats.Cmat * analytic[a];
        ranked.emplace_back(coeff.norm(), a);
      }
      std::sort(ranked.begin(), ranked.end(),
                [](const auto& x, const auto& y) { return x.first > y.first; });
      Eigen::MatrixXd oriented(n, g);
      int filled = 0;
      for (int r = 0; r < static_cast<int>(ranked.size()) && filled < g; ++r) {
        Eigen::VectorXd cand =
            sub * (sub.transpose() * mats.Cmat * analytic[ranked[r].second]);
        // C-metric Gram-Schmidt against already oriented columns.
        for (int p = 0; p < filled; ++p) {
          cand -= oriented.col(p) *
                  (oriented.col(p).transpose() * mats.Cmat * cand)(0);
        }
        const double nrm = std::sqrt((cand.transpose() * mats.Cmat * cand)(0));
        if (nrm > 1e-6) {
          oriented.col(filled++) = cand / nrm;
        }
      }
      if (filled == g) out.mode_matrix.middleCols(c, g) = oriented;
    }
    c = d;
  }
  for (int k = 0; k < m; ++k) {
    Eigen::VectorXd col = out.mode_matrix.col(k);
    fix_sign(col);
    out.mode_matrix.col(k) = col;
  }
  return out;
}

std::vector<Eigen::VectorXd> symmetric_ring_modes(int n) {
  if (n < 3) throw ConfigError("symmetric ring needs at least 3 nodes");
  std::vector<Eigen::VectorXd> out;
  for (int mu = 1; mu <= n - 1; ++mu) {
    const int k = (mu + 1) / 2;
    Eigen::VectorXd v(n);
    for (int j = 0; j < n; ++j) {
      const double arg = kTwoPi * j * k / n;
      v(j) = (mu % 2 == 0) ? std::sin(arg) : std::cos(arg);
    }
    out.push_back(v / v.norm());
  }
  return out;
}

CircuitSolution solve_circuit(const Netlist& nl) {
  nl.validate();
  CircuitSolution sol;
  sol.dc_phases = solve_dc_phases(nl);
  sol.matrices = build_matrices(nl, sol.dc_phases);
  sol.modes = normal_modes(sol.matrices);
  return sol;
}

}  // namespace multimon
