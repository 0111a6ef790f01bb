#include "multimon/design.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "multimon/errors.hpp"

namespace multimon {

std::array<double, 4> AsymmetrySpec::junction_energies() const {
  return {ej_mean_ghz * (1.0 + eta_ab + eta_bc + eta_ca),
          ej_mean_ghz * (1.0 - eta_ab + eta_bc - eta_ca),
          ej_mean_ghz * (1.0 + eta_ab - eta_bc - eta_ca),
          ej_mean_ghz * (1.0 - eta_ab - eta_bc + eta_ca)};
}

std::array<double, 4> AsymmetrySpec::nn_capacitances() const {
  return {c_mean_ff * (1.0 + eta_ab_prime + eta_bc_prime + eta_ca_prime),
          c_mean_ff * (1.0 - eta_ab_prime + eta_bc_prime - eta_ca_prime),
          c_mean_ff * (1.0 + eta_ab_prime - eta_bc_prime - eta_ca_prime),
          c_mean_ff * (1.0 - eta_ab_prime - eta_bc_prime + eta_ca_prime)};
}

Netlist apply_asymmetry(const AsymmetrySpec& spec) {
  const auto ej = spec.junction_energies();
  const auto c = spec.nn_capacitances();
  for (double e : ej) {
    if (!(e > 0.0)) throw ConfigError("asymmetry produces non-positive EJ");
  }
  for (double v : c) {
    if (!(v > 0.0)) throw ConfigError("asymmetry produces non-positive C");
  }
  if (!(spec.c13_ff > 0.0) || !(spec.c24_ff > 0.0)) {
    throw ConfigError("diagonal capacitances must be positive");
  }
  Netlist nl;
  nl.node_count = 4;
  nl.branches = {{0, 1, ej[0], 0.0, c[0]}, {1, 2, ej[1], 0.0, c[1]},
                 {2, 3, ej[2], 0.0, c[2]}, {3, 0, ej[3], 0.0, c[3]},
                 {0, 2, 0.0, 0.0, spec.c13_ff}, {1, 3, 0.0, 0.0, spec.c24_ff}};
  nl.ground_caps_ff = {0.01, 0.02, 0.01, 0.02};
  return nl;
}

JunctionAsymmetry recover_junction_asymmetry(const std::array<double, 4>& ej) {
  JunctionAsymmetry out;
  out.ej_mean_ghz = (ej[0] + ej[1] + ej[2] + ej[3]) / 4.0;
  const double m4 = 4.0 * out.ej_mean_ghz;
  out.eta_ab = (ej[0] - ej[1] + ej[2] - ej[3]) / m4;
  out.eta_bc = (ej[0] + ej[1] - ej[2] - ej[3]) / m4;
  out.eta_ca = (ej[0] - ej[1] - ej[2] + ej[3]) / m4;
  return out;
}

namespace {

std::string line_name(const TransitionLabel& label, bool leakage) {
  return (leakage ? std::string("w12_") : std::string("w_")) + label.str();
}

}  // namespace

SpacingReport validate_spacing(const LevelDiagram& diagram,
                               const DesignTarget& target,
                               const std::array<double, 4>& junction_energies) {
  SpacingReport rep;
  std::vector<std::pair<std::string, double>> lines;
  for (const auto& l : diagram.transitions) {
    lines.emplace_back(line_name(l.label, false), l.freq_ghz);
  }
  for (const auto& l : diagram.leakage_transitions) {
    lines.emplace_back(line_name(l.label, true), l.freq_ghz);
  }

  rep.min_gap_mhz = 1e12;
  for (size_t a = 0; a < lines.size(); ++a) {
    for (size_t b = a + 1; b < lines.size(); ++b) {
      const double gap = std::abs(lines[a].second - lines[b].second) * 1e3;
      if (gap < rep.min_gap_mhz) {
        rep.min_gap_mhz = gap;
        rep.min_gap_pair = lines[a].first + " / " + lines[b].first;
      }
      if (gap < target.min_separation_mhz) {
        std::ostringstream os;
        os << "gap " << lines[a].first << " / " << lines[b].first << " = "
           << gap << " MHz < " << target.min_separation_mhz << " MHz";
        rep.violations.push_back(os.str());
      }
    }
  }

  rep.window_ok = true;
  for (const auto& l : diagram.transitions) {
    if (l.freq_ghz < target.f_min_ghz || l.freq_ghz > target.f_max_ghz) {
      rep.window_ok = false;
      std::ostringstream os;
      os << line_name(l.label, false) << " = " << l.freq_ghz
         << " GHz outside window [" << target.f_min_ghz << ", "
         << target.f_max_ghz << "]";
      rep.violations.push_back(os.str());
    }
  }

  const double ej_min =
      *std::min_element(junction_energies.begin(), junction_energies.end());
  rep.stability_limit_ghz = target.stability_margin * 4.0 * ej_min;
  rep.e111_ghz = diagram.energy({1, 1, 1});
  rep.stability_ok = rep.e111_ghz <= rep.stability_limit_ghz;
  if (!rep.stability_ok) {
    std::ostringstream os;
    os << "E(111) = " << rep.e111_ghz << " GHz exceeds "
       << target.stability_margin << " * 4*EJ_min = " << rep.stability_limit_ghz
       << " GHz";
    rep.violations.push_back(os.str());
  }
  rep.pass = rep.violations.empty();
  return rep;
}

// Reported-convention ladder: the table frequency f_mu = omega_mu - J_mu
// conditioned by the usual -2J shifts. Realized as a level diagram with
// omega shifted so the zero-control lines land on f_mu. The device tables
// and the spacing audit use this ladder.
static LevelDiagram reported_ladder(const KerrTensor& kerr,
                                    const std::vector<double>& omega) {
  std::vector<double> shifted(omega.size());
  for (size_t mu = 0; mu < omega.size(); ++mu) {
    shifted[mu] = omega[mu] + kerr.beta[mu] - kerr.linear_residual[mu];
  }
  return build_level_diagram(kerr, shifted, 2, false);
}

DeviceAnalysis analyze_trimon(const Netlist& nl, double omega_r_ghz,
                              double g_ref_mhz, int order) {
  DeviceAnalysis out;
  out.netlist = nl;
  const CircuitSolution sol = solve_circuit(nl);
  const auto perm = trimon_mode_order(sol.modes);
  const ModeSolution abc = permute_modes(sol.modes, {perm[0], perm[1], perm[2]});
  out.omega = abc.frequencies;
  const auto expansion = expand_potential(nl, abc, order);
  out.kerr = extract_kerr(expansion, abc);
  out.qubit_freqs = out.kerr.qubit_frequencies(out.omega);
  out.diagram = build_level_diagram(out.kerr, out.omega, 2, true);
  out.ladder = reported_ladder(out.kerr, out.omega);
  out.g_direct_mhz = direct_couplings(abc, 0, g_ref_mhz);
  out.cavity =
      dispersive_shifts(omega_r_ghz, out.g_direct_mhz, out.kerr, out.qubit_freqs);
  out.cavity.g_ref_mhz = g_ref_mhz;
  out.cavity.field_direction = symmetric_ring_modes(4)[0];

  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      if (std::abs(out.qubit_freqs[a] - out.qubit_freqs[b]) < 0.010) {
        out.degeneracy_warning = std::string("qubits ") + mode_letter(a) +
                                 " and " + mode_letter(b) +
                                 " are nearly degenerate";
      }
    }
  }
  return out;
}

namespace {

struct Knob {
  std::string name;
  double AsymmetrySpec::* field;
  double step;
};

const std::vector<Knob>& knob_table() {
  static const std::vector<Knob> table = {
      {"ej_mean", &AsymmetrySpec::ej_mean_ghz, 0.4},
      {"eta_ab", &AsymmetrySpec::eta_ab, 0.02},
      {"eta_bc", &AsymmetrySpec::eta_bc, 0.02},
      {"eta_ca", &AsymmetrySpec::eta_ca, 0.02},
      {"c_mean", &AsymmetrySpec::c_mean_ff, 1.5},
      {"eta_ab_prime", &AsymmetrySpec::eta_ab_prime, 0.02},
      {"eta_bc_prime", &AsymmetrySpec::eta_bc_prime, 0.02},
      {"eta_ca_prime", &AsymmetrySpec::eta_ca_prime, 0.02},
      {"c13", &AsymmetrySpec::c13_ff, 1.0},
      {"c24", &AsymmetrySpec::c24_ff, 1.0},
  };
  return table;
}

}  // namespace

OptimizeResult optimize_design(const DesignTarget& target,
                               const AsymmetrySpec& seed,
                               const std::vector<std::string>& knobs,
                               std::uint64_t rng_seed, int budget) {
  if (knobs.empty()) throw ConfigError("optimizer needs at least one knob");
  std::vector<Knob> active;
  for (const auto& name : knobs) {
    bool found = false;
    for (const auto& k : knob_table()) {
      if (k.name == name) {
        active.push_back(k);
        found = true;
      }
    }
    if (!found) throw ConfigError("unknown knob: " + name);
  }
  const int dim = static_cast<int>(active.size());

  int evals = 0;
  auto make_spec = [&](const std::vector<double>& x) {
    AsymmetrySpec s = seed;
    for (int k = 0; k < dim; ++k) s.*(active[k].field) = x[k];
    return s;
  };

  auto objective = [&](const std::vector<double>& x) -> double {
    ++evals;
    AsymmetrySpec s = make_spec(x);
    // Parameter-validity guard with a smooth pull back to the feasible set.
    double invalid = 0.0;
    for (double e : s.junction_energies()) invalid += std::max(0.0, 0.5 - e);
    for (double c : s.nn_capacitances()) invalid += std::max(0.0, 1.0 - c);
    invalid += std::max(0.0, 0.5 - s.c13_ff) + std::max(0.0, 0.5 - s.c24_ff);
    if (invalid > 0.0) return 1e6 * (1.0 + invalid);
    try {
      const Netlist nl = apply_asymmetry(s);
      const CircuitSolution sol = solve_circuit(nl);
      const auto perm = trimon_mode_order(sol.modes);
      const ModeSolution abc =
          permute_modes(sol.modes, {perm[0], perm[1], perm[2]});
      const KerrTensor kerr = extract_kerr(expand_potential(nl, abc, 4), abc);
      const LevelDiagram ladder = reported_ladder(kerr, abc.frequencies);
      const LevelDiagram diagram = build_level_diagram(kerr, abc.frequencies, 1);

      double penalty = 0.0;
      for (const auto& [label, f_target] : target.target_transitions) {
        const double f = ladder.transition(label);
        penalty += (f - f_target) * (f - f_target);
      }
      // Separation hinge carries 10x the frequency-deviation weight.
      std::vector<double> lines;
      for (const auto& l : ladder.transitions) lines.push_back(l.freq_ghz);
      for (const auto& l : ladder.leakage_transitions) {
        lines.push_back(l.freq_ghz);
      }
      const double sep_ghz = target.min_separation_mhz * 1e-3;
      for (size_t a = 0; a < lines.size(); ++a) {
        for (size_t b = a + 1; b < lines.size(); ++b) {
          const double h =
              std::max(0.0, sep_ghz - std::abs(lines[a] - lines[b]));
          penalty += 10.0 * h * h;
        }
      }
      for (const auto& l : ladder.transitions) {
        const double below = std::max(0.0, target.f_min_ghz - l.freq_ghz);
        const double above = std::max(0.0, l.freq_ghz - target.f_max_ghz);
        penalty += below * below + above * above;
      }
      const auto ej = s.junction_energies();
      const double ej_min = *std::min_element(ej.begin(), ej.end());
      const double e111 = diagram.energy({1, 1, 1});
      const double over =
          std::max(0.0, e111 - target.stability_margin * 4.0 * ej_min);
      penalty += 10.0 * over * over;
      return penalty;
    } catch (const Error&) {
      return 1e6;
    }
  };

  std::mt19937_64 rng(rng_seed);
  std::vector<double> x0(dim);
  for (int k = 0; k < dim; ++k) x0[k] = seed.*(active[k].field);

  std::vector<double> best_x = x0;
  double best_f = objective(x0);

  auto run_simplex = [&](std::vector<double> start, double scale) {
    const int n = dim;
    std::vector<std::vector<double>> pts(n + 1, start);
    std::vector<double> fv(n + 1);
    for (int k = 0; k < n; ++k) pts[k + 1][k] += active[k].step * scale;
    for (int k = 0; k <= n; ++k) fv[k] = objective(pts[k]);
    while (evals < budget) {
      std::vector<int> order(n + 1);
      for (int k = 0; k <= n; ++k) order[k] = k;
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return fv[a] < fv[b]; });
      std::vector<std::vector<double>> p2(n + 1);
      std::vector<double> f2(n + 1);
      for (int k = 0; k <= n; ++k) {
        p2[k] = pts[order[k]];
        f2[k] = fv[order[k]];
      }
      pts = p2;
      fv = f2;
      if (fv[n] - fv[0] < 1e-14 * (1.0 + std::abs(fv[0]))) break;

      std::vector<double> centroid(n, 0.0);
      for (int k = 0; k < n; ++k) {
        for (int d = 0; d < n; ++d) centroid[d] += pts[k][d] / n;
      }
      auto blend = [&](double t) {
        std::vector<double> x(n);
        for (int d = 0; d < n; ++d) {
          x[d] = centroid[d] + t * (pts[n][d] - centroid[d]);
        }
        return x;
      };
      const auto xr = blend(-1.0);
      const double fr = objective(xr);
      if (fr < fv[0]) {
        const auto xe = blend(-2.0);
        const double fe = objective(xe);
        if (fe < fr) {
          pts[n] = xe;
          fv[n] = fe;
        } else {
          pts[n] = xr;
          fv[n] = fr;
        }
      } else if (fr < fv[n - 1]) {
        pts[n] = xr;
        fv[n] = fr;
      } else {
        const auto xc = blend(fr < fv[n] ? -0.5 : 0.5);
        const double fc = objective(xc);
        if (fc < std::min(fr, fv[n])) {
          pts[n] = xc;
          fv[n] = fc;
        } else {
          for (int k = 1; k <= n; ++k) {
            for (int d = 0; d < n; ++d) {
              pts[k][d] = pts[0][d] + 0.5 * (pts[k][d] - pts[0][d]);
            }
            fv[k] = objective(pts[k]);
            if (evals >= budget) break;
          }
        }
      }
      if (evals >= budget) break;
    }
    int arg = 0;
    for (int k = 1; k <= dim; ++k) {
      if (fv[k] < fv[arg]) arg = k;
    }
    if (fv[arg] < best_f) {
      best_f = fv[arg];
      best_x = pts[arg];
    }
  };

  run_simplex(x0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  while (evals < budget && best_f > 1e-12) {
    std::vector<double> start = best_x;
    for (int k = 0; k < dim; ++k) start[k] += 0.5 * active[k].step * jitter(rng);
    run_simplex(start, 0.5);
  }

  OptimizeResult out;
  out.spec = make_spec(best_x);
  out.netlist = apply_asymmetry(out.spec);
  out.objective = best_f;
  out.evaluations = evals;
  const CircuitSolution sol = solve_circuit(out.netlist);
  const auto perm = trimon_mode_order(sol.modes);
  const ModeSolution abc = permute_modes(sol.modes, {perm[0], perm[1], perm[2]});
  const KerrTensor kerr =
      extract_kerr(expand_potential(out.netlist, abc, 4), abc);
  out.report = validate_spacing(reported_ladder(kerr, abc.frequencies), target,
                                out.spec.junction_energies());
  out.feasible = out.report.pass;
  return out;
}

}  // namespace multimon
