#include "multimon/kerr.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "multimon/constants.hpp"
#include "multimon/errors.hpp"

namespace multimon {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Taylor coefficient of delta^n in -EJ*cos(delta + phi).
double junction_taylor(double ej, double phi, int n) {
  const double f = factorial(n);
  switch (n % 4) {
    case 0: return -ej * std::cos(phi) / f;
    case 1: return ej * std::sin(phi) / f;
    case 2: return ej * std::cos(phi) / f;
    default: return -ej * std::sin(phi) / f;
  }
}

// Adds coeff * (sum_mu t_mu x_mu)^n to poly via the multinomial theorem.
void add_power(ModePolynomial& poly, const Eigen::VectorXd& t, int n,
               double coeff) {
  const int m = static_cast<int>(t.size());
  Monomial expo(m, 0);
  std::vector<double> tpow(m + 1, 1.0);
  // Recursive composition enumeration.
  std::function<void(int, int, double)> rec = [&](int var, int left,
                                                  double partial) {
    if (var == m - 1) {
      expo[var] = left;
      double c = partial;
      for (int p = 0; p < left; ++p) c *= t(var);
      c /= factorial(left);
      poly.add(expo, coeff * factorial(n) * c);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      expo[var] = k;
      double c = partial;
      for (int p = 0; p < k; ++p) c *= t(var);
      rec(var + 1, left - k, c / factorial(k));
    }
  };
  rec(0, n, 1.0);
}

// <n|x^p|n> with x = a + a^dag, exact.
double diagonal_power(int p, int n) {
  if (p % 2 != 0) return 0.0;
  std::vector<double> v(n + p + 2, 0.0);
  v[n] = 1.0;
  for (int it = 0; it < p; ++it) {
    std::vector<double> w(v.size(), 0.0);
    for (int k = 0; k < static_cast<int>(v.size()); ++k) {
      if (v[k] == 0.0) continue;
      if (k > 0) w[k - 1] += std::sqrt(static_cast<double>(k)) * v[k];
      if (k + 1 < static_cast<int>(w.size())) {
        w[k + 1] += std::sqrt(static_cast<double>(k + 1)) * v[k];
      }
    }
    v.swap(w);
  }
  return v[n];
}

// First-order (normal-ordered, number-conserving) diagonal of the nonlinear
// polynomial at occupation tuple n.
double diagonal_first_order(const ModePolynomial& nl, const std::vector<int>& n) {
  double sum = 0.0;
  for (const auto& [mono, c] : nl.terms()) {
    bool even = true;
    for (int e : mono) {
      if (e % 2 != 0) {
        even = false;
        break;
      }
    }
    if (!even) continue;
    double prod = c;
    for (size_t mu = 0; mu < mono.size(); ++mu) {
      if (mono[mu] > 0) prod *= diagonal_power(mono[mu], n[mu]);
    }
    sum += prod;
  }
  return sum;
}

// Second-order perturbation theory of the nonlinear terms at occupation n,
// with harmonic energy denominators. Exact channel sum over the reachable
// Fock grid; nearly resonant channels (|denominator| below guard) are
// skipped and reported.
double second_order_shift(const ModePolynomial& nl,
                          const std::vector<double>& freqs,
                          const std::vector<int>& n, int order,
                          bool* skipped_resonant) {
  const int m = static_cast<int>(freqs.size());
  std::vector<int> dims(m);
  long total = 1;
  for (int mu = 0; mu < m; ++mu) {
    dims[mu] = n[mu] + order + 1;
    total *= dims[mu];
  }
  std::vector<double> amp(total, 0.0);

  // Per-mode ladder action x^p |n_mu>.
  auto ladder = [&](int p, int nmu, int dim) {
    std::vector<double> v(dim, 0.0);
    if (nmu < dim) v[nmu] = 1.0;
    for (int it = 0; it < p; ++it) {
      std::vector<double> w(dim, 0.0);
      for (int k = 0; k < dim; ++k) {
        if (v[k] == 0.0) continue;
        if (k > 0) w[k - 1] += std::sqrt(static_cast<double>(k)) * v[k];
        if (k + 1 < dim) w[k + 1] += std::sqrt(static_cast<double>(k + 1)) * v[k];
      }
      v.swap(w);
    }
    return v;
  };

  std::vector<double> prod;
  for (const auto& [mono, c] : nl.terms()) {
    std::vector<std::vector<double>> per_mode(m);
    for (int mu = 0; mu < m; ++mu) per_mode[mu] = ladder(mono[mu], n[mu], dims[mu]);
    // Accumulate the tensor product.
    prod.assign(total, 0.0);
    std::vector<int> idx(m, 0);
    for (long flat = 0; flat < total; ++flat) {
      double v = c;
      long rem = flat;
      for (int mu = m - 1; mu >= 0; --mu) {
        idx[mu] = rem % dims[mu];
        rem /= dims[mu];
        v *= per_mode[mu][idx[mu]];
        if (v == 0.0) break;
      }
      amp[flat] += v;
    }
  }

  double shift = 0.0;
  std::vector<int> idx(m, 0);
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    bool is_n = true;
    double den = 0.0;
    for (int mu = m - 1; mu >= 0; --mu) {
      idx[mu] = rem % dims[mu];
      rem /= dims[mu];
      den -= freqs[mu] * (idx[mu] - n[mu]);
      if (idx[mu] != n[mu]) is_n = false;
    }
    if (is_n || amp[flat] == 0.0) continue;
    if (std::abs(den) < 0.02) {
      if (skipped_resonant) *skipped_resonant = true;
      continue;
    }
    shift += amp[flat] * amp[flat] / den;
  }
  return shift;
}

}  // namespace

PotentialExpansion expand_potential(const Netlist& nl, const ModeSolution& modes,
                                    int order) {
  if (order < 4 || order > 8 || order % 2 != 0) {
    throw ConfigError("expansion order must be 4, 6 or 8");
  }
  const int m = modes.mode_count();
  PotentialExpansion out;
  out.order = order;
  out.harmonic_freqs = modes.frequencies;
  out.poly = ModePolynomial(m);

  const auto dc = solve_dc_phases(nl);
  const auto jb = nl.junction_branches();
  std::map<int, double> phase_of;
  for (size_t k = 0; k < jb.size(); ++k) phase_of[jb[k]] = dc[k];

  for (int b = 0; b < static_cast<int>(nl.branches.size()); ++b) {
    const Branch& br = nl.branches[b];
    if (!br.has_junction() && !br.has_inductor()) continue;
    Eigen::VectorXd t(m);
    for (int mu = 0; mu < m; ++mu) {
      t(mu) = (modes.mode_matrix(br.i, mu) - modes.mode_matrix(br.j, mu)) *
              modes.zero_point_fluxes[mu];
    }
    if (br.has_inductor()) {
      add_power(out.poly, t, 2, 0.5 * kInductiveGHznH / br.l_nh);
    }
    if (br.has_junction()) {
      const double phi = phase_of[b];
      for (int n = 1; n <= order; ++n) {
        add_power(out.poly, t, n, junction_taylor(br.ej_ghz, phi, n));
      }
      // Constant offset so U(0) = 0 per branch.
      out.poly.add(Monomial(m, 0), -junction_taylor(br.ej_ghz, phi, 0));
    }
  }
  out.poly.prune(1e-18);
  return out;
}

double KerrTensor::three_body_sym(int a, int b, int c) const {
  ModeTriple key{a, b, c};
  std::sort(key.begin(), key.end());
  auto it = three_body.find(key);
  return it == three_body.end() ? 0.0 : it->second;
}

double KerrTensor::three_wave_sym(int a, int b, int c) const {
  ModeTriple key{a, b, c};
  std::sort(key.begin(), key.end());
  auto it = three_wave.find(key);
  return it == three_wave.end() ? 0.0 : it->second;
}

std::vector<double> KerrTensor::qubit_frequencies(
    const std::vector<double>& omega) const {
  std::vector<double> f(omega.size());
  for (size_t mu = 0; mu < omega.size(); ++mu) f[mu] = omega[mu] - self_kerr[mu];
  return f;
}

KerrTensor extract_kerr(const PotentialExpansion& expansion,
                        const ModeSolution& modes) {
  const int m = modes.mode_count();
  const ModePolynomial nl = expansion.poly.degree_filtered(3, expansion.order);
  const bool with_pt2 = expansion.order >= 6;

  bool skipped = false;
  auto energy = [&](const std::vector<int>& n) {
    double e = diagonal_first_order(nl, n);
    if (with_pt2) {
      e += second_order_shift(nl, expansion.harmonic_freqs, n, expansion.order,
                              &skipped);
    }
    return e;
  };

  std::vector<int> zero(m, 0);
  const double e0 = energy(zero);
  std::vector<double> e1(m), e2(m);
  for (int mu = 0; mu < m; ++mu) {
    auto n = zero;
    n[mu] = 1;
    e1[mu] = energy(n);
    n[mu] = 2;
    e2[mu] = energy(n);
  }

  KerrTensor out;
  out.order = expansion.order;
  out.self_kerr.resize(m);
  out.cross_kerr = Eigen::MatrixXd::Zero(m, m);
  for (int mu = 0; mu < m; ++mu) {
    out.self_kerr[mu] = -(e2[mu] - 2.0 * e1[mu] + e0) / 2.0;
  }
  for (int mu = 0; mu < m; ++mu) {
    for (int nu = mu + 1; nu < m; ++nu) {
      auto n = zero;
      n[mu] = 1;
      n[nu] = 1;
      const double e11 = energy(n);
      const double j = -(e11 - e1[mu] - e1[nu] + e0) / 2.0;
      out.cross_kerr(mu, nu) = j;
      out.cross_kerr(nu, mu) = j;
    }
  }
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      for (int c = b + 1; c < m; ++c) {
        auto pair_e = [&](int p, int q) {
          auto n = zero;
          n[p] = 1;
          n[q] = 1;
          return energy(n);
        };
        auto n = zero;
        n[a] = n[b] = n[c] = 1;
        const double d = energy(n) - pair_e(a, b) - pair_e(b, c) - pair_e(a, c) +
                         e1[a] + e1[b] + e1[c] - e0;
        out.three_body[{a, b, c}] = d;
      }
    }
  }
  // Three-wave terms: coefficients of x_a x_b x_c in the expansion.
  for (const auto& [mono, c] : nl.terms()) {
    int deg = std::accumulate(mono.begin(), mono.end(), 0);
    if (deg != 3) continue;
    std::vector<int> ones;
    for (int mu = 0; mu < m; ++mu) {
      if (mono[mu] == 1) ones.push_back(mu);
    }
    if (ones.size() == 3) {
      out.three_wave[{ones[0], ones[1], ones[2]}] = c;
    }
  }

  out.beta.resize(m);
  out.linear_residual.resize(m);
  for (int mu = 0; mu < m; ++mu) {
    double sum_cross = 0.0;
    for (int nu = 0; nu < m; ++nu) sum_cross += out.cross_kerr(mu, nu);
    out.beta[mu] = out.self_kerr[mu] + sum_cross;
    out.linear_residual[mu] =
        (e1[mu] - e0) + out.beta[mu] + out.self_kerr[mu];
  }

  for (int mu = 0; mu < m; ++mu) {
    if (out.self_kerr[mu] > 0.05 * expansion.harmonic_freqs[mu]) {
      std::ostringstream os;
      os << "self-Kerr of mode " << mode_letter(mu) << " is "
         << out.self_kerr[mu] / expansion.harmonic_freqs[mu] * 100.0
         << "% of its frequency; weak-anharmonicity treatment is marginal";
      out.warnings.push_back(os.str());
    }
  }
  if (skipped) {
    out.warnings.push_back(
        "second-order corrections skipped nearly resonant channels "
        "(degenerate modes); order-6 values may be unreliable");
  }
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  return out;
}

double eq9_energy(const KerrTensor& kerr, const std::vector<double>& omega,
                  const std::vector<int>& n, bool include_three_body) {
  const int m = kerr.mode_count();
  double e = 0.0;
  for (int mu = 0; mu < m; ++mu) {
    e += (omega[mu] - kerr.beta[mu] + kerr.linear_residual[mu]) * n[mu] -
         kerr.self_kerr[mu] * n[mu] * n[mu];
  }
  for (int mu = 0; mu < m; ++mu) {
    for (int nu = mu + 1; nu < m; ++nu) {
      e -= 2.0 * kerr.cross_kerr(mu, nu) * n[mu] * n[nu];
    }
  }
  if (include_three_body) {
    for (const auto& [t, j] : kerr.three_body) {
      e += j * n[t[0]] * n[t[1]] * n[t[2]];
    }
  }
  return e;
}

double LevelDiagram::energy(const std::vector<int>& occ) const {
  auto it = energies.find(occ);
  if (it == energies.end()) throw ConfigError("occupation outside diagram");
  return it->second;
}

double LevelDiagram::transition(const TransitionLabel& label) const {
  for (const auto& line : transitions) {
    if (line.label == label) return line.freq_ghz;
  }
  throw ConfigError("unknown transition " + label.str());
}

double LevelDiagram::transition(const std::string& label) const {
  return transition(parse_transition(label, mode_count));
}

LevelDiagram build_level_diagram(const KerrTensor& kerr,
                                 const std::vector<double>& omega,
                                 int max_occupation, bool include_three_body) {
  if (max_occupation < 1) throw ConfigError("max_occupation must be >= 1");
  const int m = kerr.mode_count();
  if (static_cast<int>(omega.size()) != m) {
    throw ConfigError("frequency list does not match Kerr tensor");
  }
  LevelDiagram out;
  out.mode_count = m;
  out.max_occupation = max_occupation;

  std::vector<int> occ(m, 0);
  std::function<void(int)> fill = [&](int mu) {
    if (mu == m) {
      out.energies[occ] = eq9_energy(kerr, omega, occ, include_three_body);
      return;
    }
    for (int k = 0; k <= max_occupation; ++k) {
      occ[mu] = k;
      fill(mu + 1);
    }
    occ[mu] = 0;
  };
  fill(0);

  for (const auto& label : all_transitions(m)) {
    auto lower = label.lower_state();
    auto upper = label.upper_state();
    LevelDiagram::Line line;
    line.label = label;
    line.freq_ghz = eq9_energy(kerr, omega, upper, include_three_body) -
                    eq9_energy(kerr, omega, lower, include_three_body);
    out.transitions.push_back(line);

    auto leak_hi = upper;
    leak_hi[label.target] = 2;
    LevelDiagram::Line leak;
    leak.label = label;
    leak.freq_ghz = eq9_energy(kerr, omega, leak_hi, include_three_body) -
                    eq9_energy(kerr, omega, upper, include_three_body);
    out.leakage_transitions.push_back(leak);
  }
  return out;
}

std::array<int, 3> trimon_mode_order(const ModeSolution& modes) {
  if (modes.mode_count() != 3 || modes.mode_matrix.rows() != 4) {
    throw TopologyError("trimon labeling requires a 4-node, 3-mode solution");
  }
  const auto ideal = symmetric_ring_modes(4);
  std::array<int, 3> order{-1, -1, -1};
  std::array<bool, 3> used{false, false, false};
  // Greedy assignment by descending overlap magnitude.
  std::vector<std::tuple<double, int, int>> scored;
  for (int a = 0; a < 3; ++a) {
    for (int mu = 0; mu < 3; ++mu) {
      Eigen::VectorXd v = modes.mode_matrix.col(mu).normalized();
      scored.emplace_back(std::abs(ideal[a].dot(v)), a, mu);
    }
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });
  for (const auto& [score, a, mu] : scored) {
    if (order[a] < 0 && !used[mu]) {
      order[a] = mu;
      used[mu] = true;
    }
  }
  return order;
}

ModeSolution permute_modes(const ModeSolution& modes,
                           const std::vector<int>& order) {
  ModeSolution out;
  out.zero_modes = modes.zero_modes;
  out.cmat = modes.cmat;
  out.mode_matrix.resize(modes.mode_matrix.rows(), modes.mode_count());
  for (size_t k = 0; k < order.size(); ++k) {
    out.frequencies.push_back(modes.frequencies[order[k]]);
    out.zero_point_fluxes.push_back(modes.zero_point_fluxes[order[k]]);
    out.mode_matrix.col(k) = modes.mode_matrix.col(order[k]);
  }
  return out;
}

std::vector<FluxPoint> flux_sweep(const Netlist& nl,
                                  const std::vector<double>& flux_grid,
                                  int order) {
  if (flux_grid.empty()) throw ConfigError("flux grid is empty");
  for (double f : flux_grid) {
    if (std::abs(f) > 0.25 + 1e-12) {
      throw ConfigError("flux grid must stay within [-0.25, 0.25]");
    }
  }
  std::vector<FluxPoint> out;
  for (double flux : flux_grid) {
    Netlist point = nl;
    point.flux_phi0 = flux;
    const CircuitSolution sol = solve_circuit(point);
    const auto perm = trimon_mode_order(sol.modes);
    const ModeSolution abc =
        permute_modes(sol.modes, {perm[0], perm[1], perm[2]});
    const auto expansion = expand_potential(point, abc, order);
    FluxPoint fp;
    fp.flux_phi0 = flux;
    fp.kerr = extract_kerr(expansion, abc);
    fp.omega = abc.frequencies;
    fp.qubit_freqs = fp.kerr.qubit_frequencies(abc.frequencies);
    out.push_back(std::move(fp));
  }
  return out;
}

std::string flux_sweep_csv(const std::vector<FluxPoint>& points) {
  std::ostringstream os;
  os.precision(9);
  os << "flux_phi0,f_A,f_B,f_C,alpha_A,alpha_B,alpha_C,J_AB,J_BC,J_CA,xi_ABC\n";
  for (const auto& p : points) {
    os << p.flux_phi0;
    for (int mu = 0; mu < 3; ++mu) os << "," << p.qubit_freqs[mu];
    for (int mu = 0; mu < 3; ++mu) os << "," << p.kerr.anharmonicity(mu);
    os << "," << p.kerr.cross_kerr(0, 1) << "," << p.kerr.cross_kerr(1, 2)
       << "," << p.kerr.cross_kerr(2, 0) << ","
       << p.kerr.three_wave_sym(0, 1, 2) << "\n";
  }
  return os.str();
}

}  // namespace multimon
