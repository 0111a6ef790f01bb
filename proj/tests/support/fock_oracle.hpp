// Test-side brute-force oracle: exact diagonalization of the full cosine
// Hamiltonian in the harmonic eigenbasis of the linearized circuit, with a
// fixed number of Fock levels per mode. Independent of the perturbative
// Kerr-extraction path: junction cosines enter through exact displacement-
// operator matrix elements, not through a Taylor expansion.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "multimon/circuit.hpp"
#include "multimon/netlist.hpp"

namespace oracle {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Associated Laguerre polynomial L_n^{(k)}(x) by the standard recurrence.
inline double assoc_laguerre(int n, int k, double x) {
  if (n == 0) return 1.0;
  double lm1 = 1.0;
  double l = 1.0 + k - x;
  for (int m = 1; m < n; ++m) {
    const double lp = ((2 * m + 1 + k - x) * l - (m + k) * lm1) / (m + 1);
    lm1 = l;
    l = lp;
  }
  return l;
}

// <m| exp(i t (a + a^dag)) |n> = <m| D(i t) |n>, exact in the infinite
// Fock space. For pure imaginary argument the matrix is symmetric.
inline MatrixXcd displacement_imag(double t, int dim) {
  MatrixXcd d(dim, dim);
  const double x = t * t;
  const double gauss = std::exp(-0.5 * x);
  // log-factorial table for the sqrt(min!/max!) prefactor
  std::vector<double> lfact(dim + 1, 0.0);
  for (int k = 1; k <= dim; ++k) lfact[k] = lfact[k - 1] + std::log(k);
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n <= m; ++n) {
      const int diff = m - n;
      const double pref =
          std::exp(0.5 * (lfact[n] - lfact[m])) * std::pow(t, diff) * gauss;
      const cplx iphase = std::pow(cplx(0.0, 1.0), diff);
      const cplx val = iphase * pref * assoc_laguerre(n, diff, x);
      d(m, n) = val;
      d(n, m) = val;
    }
  }
  return d;
}

inline MatrixXcd position_op(int dim) {
  MatrixXcd x = MatrixXcd::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) {
    x(k - 1, k) = std::sqrt(static_cast<double>(k));
    x(k, k - 1) = std::sqrt(static_cast<double>(k));
  }
  return x;
}

struct Spectrum {
  std::vector<double> eigenvalues;
  MatrixXcd eigenvectors;
  std::vector<int> dims;

  long flat_index(const std::vector<int>& occ) const {
    long idx = 0;
    for (size_t mu = 0; mu < occ.size(); ++mu) idx = idx * dims[mu] + occ[mu];
    return idx;
  }

  // Eigenstate adiabatically connected to a bare occupation tuple, found by
  // largest overlap. Returns its energy; overlap_out reports the match
  // quality (should be close to 1 in the transmon regime).
  double energy_of(const std::vector<int>& occ, double* overlap_out = nullptr) const {
    const long row = flat_index(occ);
    int best = 0;
    double best_ov = -1.0;
    for (int k = 0; k < eigenvectors.cols(); ++k) {
      const double ov = std::norm(eigenvectors(row, k));
      if (ov > best_ov) {
        best_ov = ov;
        best = k;
      }
    }
    if (overlap_out) *overlap_out = best_ov;
    return eigenvalues[best];
  }

  double transition(const std::vector<int>& lower, const std::vector<int>& upper) const {
    return energy_of(upper) - energy_of(lower);
  }
};

// Builds and diagonalizes H = sum_mu f_mu n_mu + sum_branches V_b where V_b
// is the exact junction cosine minus its quadratic Taylor part (already in
// the harmonic term). Energies in GHz.
inline Spectrum diagonalize(const multimon::Netlist& nl,
                            const multimon::ModeSolution& modes,
                            const std::vector<double>& dc_phases,
                            int levels_per_mode) {
  const int m = modes.mode_count();
  const int d = levels_per_mode;
  std::vector<int> dims(m, d);
  long total = 1;
  for (int mu = 0; mu < m; ++mu) total *= d;

  auto embed = [&](const MatrixXcd& op, int mu) {
    MatrixXcd out = MatrixXcd::Identity(1, 1);
    for (int k = 0; k < m; ++k) {
      out = kron(out, k == mu ? op : MatrixXcd::Identity(d, d));
    }
    return out;
  };

  MatrixXcd h = MatrixXcd::Zero(total, total);
  for (int mu = 0; mu < m; ++mu) {
    MatrixXcd n = MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) n(k, k) = k;
    h += modes.frequencies[mu] * embed(n, mu);
  }

  const auto jb = nl.junction_branches();
  for (size_t k = 0; k < jb.size(); ++k) {
    const multimon::Branch& br = nl.branches[jb[k]];
    const double phi = dc_phases[k];
    const double ej = br.ej_ghz;

    std::vector<double> t(m);
    MatrixXcd dphi = MatrixXcd::Zero(total, total);
    MatrixXcd disp = MatrixXcd::Identity(1, 1);
    for (int mu = 0; mu < m; ++mu) {
      t[mu] = (modes.mode_matrix(br.i, mu) - modes.mode_matrix(br.j, mu)) *
              modes.zero_point_fluxes[mu];
      disp = kron(disp, displacement_imag(t[mu], d));
      dphi += t[mu] * embed(position_op(d), mu);
    }
    const MatrixXcd cosop =
        0.5 * (std::exp(cplx(0.0, phi)) * disp +
               std::exp(cplx(0.0, -phi)) * disp.adjoint());
    h += -ej * cosop + ej * std::cos(phi) * MatrixXcd::Identity(total, total) -
         ej * std::sin(phi) * dphi - 0.5 * ej * std::cos(phi) * dphi * dphi;
  }

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  Spectrum out;
  out.dims = dims;
  out.eigenvalues.assign(es.eigenvalues().data(),
                         es.eigenvalues().data() + total);
  out.eigenvectors = es.eigenvectors();
  return out;
}

}  // namespace oracle
