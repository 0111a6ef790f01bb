// Acceptance suite: one pass/fail line per criterion. Run with no arguments
// for the full battery or with --only N for a single criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "multimon/cqed.hpp"
#include "multimon/design.hpp"
#include "multimon/kerr.hpp"
#include "multimon/pulsesim.hpp"
#include "support/fock_oracle.hpp"
#include "support/test_devices.hpp"

using namespace multimon;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

#define EXPECT(cond, label)                                        \
  do {                                                             \
    if (!(cond)) {                                                 \
      out.pass = false;                                            \
      out.detail << " [" << label << "]";                         \
    }                                                              \
  } while (0)

double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

// 1. Symmetric-ring modes match the analytic standing waves.
Outcome criterion1() {
  Outcome out;
  double worst = 0.0;
  for (int n : {4, 5, 6}) {
    const auto sol = solve_circuit(testdev::symmetric_ring(n));
    if (sol.modes.mode_count() != n - 1) {
      EXPECT(false, "mode count");
      continue;
    }
    const auto ideal = symmetric_ring_modes(n);
    int k = 0;
    while (k < n - 1) {
      int j = k + 1;
      while (j < n - 1 && std::abs(sol.modes.frequencies[j] -
                                   sol.modes.frequencies[k]) < 1e-6) {
        ++j;
      }
      const int g = j - k;
      Eigen::MatrixXd num = sol.modes.mode_matrix.middleCols(k, g);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(num);
      Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, g);
      const Eigen::MatrixXd p_num = q * q.transpose();
      Eigen::MatrixXd p_ana = Eigen::MatrixXd::Zero(n, n);
      int used = 0;
      for (const auto& u : ideal) {
        if ((p_num * u).norm() > 0.5) {
          p_ana += u * u.transpose();
          ++used;
        }
      }
      EXPECT(used == g, "subspace match");
      worst = std::max(worst, (p_num - p_ana).cwiseAbs().maxCoeff());
      k = j;
    }
  }
  EXPECT(worst < 1e-8, "projector distance");
  out.detail << " max projector distance " << worst;
  return out;
}

// 2. Symmetric trimon: zero-flux frequencies and flux-sweep behavior.
Outcome criterion2() {
  Outcome out;
  std::vector<double> grid;
  for (int k = 0; k <= 5; ++k) grid.push_back(0.05 * k);
  const auto points = flux_sweep(testdev::symmetric_trimon(), grid, 4);

  const double ref[3] = {5.338, 4.778, 6.156};
  for (int mu = 0; mu < 3; ++mu) {
    EXPECT(rel_err(points[0].qubit_freqs[mu], ref[mu]) < 0.01, "zero-flux f");
  }
  out.detail << " f(0) = {" << points[0].qubit_freqs[0] << ", "
             << points[0].qubit_freqs[1] << ", " << points[0].qubit_freqs[2]
             << "}";

  double max_change = 0.0;
  for (size_t k = 1; k < points.size(); ++k) {
    for (int mu = 0; mu < 3; ++mu) {
      max_change = std::max(
          max_change, rel_err(points[k].kerr.self_kerr[mu],
                              points[0].kerr.self_kerr[mu]));
      for (int nu = mu + 1; nu < 3; ++nu) {
        max_change = std::max(
            max_change, rel_err(points[k].kerr.cross_kerr(mu, nu),
                                points[0].kerr.cross_kerr(mu, nu)));
      }
      EXPECT(points[k].qubit_freqs[mu] < points[k - 1].qubit_freqs[mu],
             "f decreasing");
    }
    EXPECT(points[k].kerr.three_wave_sym(0, 1, 2) >
               points[k - 1].kerr.three_wave_sym(0, 1, 2),
           "xi monotone");
  }
  EXPECT(max_change < 0.005, "J stability");
  out.detail << ", max J change " << max_change * 100 << "%";
  return out;
}

// 3. Design-table reproduction.
Outcome criterion3() {
  Outcome out;
  const auto dev = analyze_trimon(testdev::design_table_trimon(), 7.3, 70.0, 4);

  const double f_ref[3] = {5.244, 4.773, 6.059};
  const double a_ref[3] = {-0.120, -0.114, -0.151};
  const double j_ref[3] = {0.081, 0.099, 0.117};
  const double g_ref[3] = {69, 13, 5};
  const double chi_ref[3] = {0.131, 0.089, 0.123};
  const char* chi_key[3] = {"100", "010", "001"};
  const double j_val[3] = {dev.kerr.cross_kerr(0, 1), dev.kerr.cross_kerr(1, 2),
                           dev.kerr.cross_kerr(2, 0)};
  for (int mu = 0; mu < 3; ++mu) {
    EXPECT(rel_err(dev.qubit_freqs[mu], f_ref[mu]) < 0.02, "f");
    EXPECT(rel_err(dev.kerr.anharmonicity(mu), a_ref[mu]) < 0.10, "alpha");
    EXPECT(rel_err(j_val[mu], j_ref[mu]) < 0.10, "J");
    EXPECT(rel_err(dev.g_direct_mhz[mu], g_ref[mu]) < 0.15, "g'");
    EXPECT(rel_err(std::abs(dev.cavity.chi_mhz.at(chi_key[mu])), chi_ref[mu]) <
               0.15,
           "chi");
  }

  DesignTarget target;
  target.min_separation_mhz = 35.0;
  target.f_min_ghz = 4.0;
  target.f_max_ghz = 6.5;
  const auto rep =
      validate_spacing(dev.ladder, target, {8.794, 8.712, 8.042, 7.143});
  EXPECT(rep.min_gap_mhz >= 35.0, "35 MHz gaps");
  out.detail << " f = {" << dev.qubit_freqs[0] << ", " << dev.qubit_freqs[1]
             << ", " << dev.qubit_freqs[2] << "}, min gap " << rep.min_gap_mhz
             << " MHz";
  return out;
}

// 4. Brute-force Fock oracle on randomized transmon-regime netlists.
Outcome criterion4() {
  Outcome out;
  const auto netlists = testdev::oracle_netlists(20, 2024);
  EXPECT(netlists.size() == 20, "generator yield");
  double worst_mhz = 0.0;
  for (const auto& nl : netlists) {
    const auto sol = solve_circuit(nl);
    const auto kerr =
        extract_kerr(expand_potential(nl, sol.modes, 6), sol.modes);
    const auto dg = build_level_diagram(kerr, sol.modes.frequencies, 2);
    const auto spec = oracle::diagonalize(nl, sol.modes, sol.dc_phases, 10);
    for (const auto& line : dg.transitions) {
      const double exact =
          spec.transition(line.label.lower_state(), line.label.upper_state());
      const double tol_mhz = std::max(
          2.0, 10.0 * std::abs(kerr.anharmonicity(line.label.target)));
      const double err_mhz = std::abs(line.freq_ghz - exact) * 1e3;
      worst_mhz = std::max(worst_mhz, err_mhz);
      EXPECT(err_mhz < tol_mhz, "transition error");
    }
  }
  out.detail << " worst transition error " << worst_mhz << " MHz over "
             << netlists.size() << " netlists";
  return out;
}

// 5. Compiler exactness over random programs.
Outcome criterion5() {
  Outcome out;
  std::mt19937_64 rng(4242);
  const std::vector<std::string> gates = {"X", "Y", "Z", "R", "CNOT", "CZ",
                                          "SWAP", "FREDKIN", "CCNOT", "CCZ",
                                          "CCPHASE"};
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    GateSequence seq;
    seq.mode_count = 3;
    Eigen::MatrixXcd ideal = Eigen::MatrixXcd::Identity(8, 8);
    const int len = 1 + static_cast<int>(rng() % 10);
    for (int k = 0; k < len; ++k) {
      const std::string& op = gates[rng() % gates.size()];
      std::string line = op;
      char buf[80];
      if (op == "X" || op == "Y" || op == "Z") {
        line += std::string(" ") + char('A' + rng() % 3);
      } else if (op == "R") {
        std::snprintf(buf, sizeof buf, " %c %.6f %.6f", char('A' + rng() % 3),
                      (rng() % 10000) / 10000.0 * 2 * M_PI,
                      (rng() % 10000) / 10000.0 * 2 * M_PI - M_PI);
        line += buf;
      } else if (op == "CNOT" || op == "CZ" || op == "SWAP") {
        int a = rng() % 3, b;
        do {
          b = rng() % 3;
        } while (b == a);
        line += std::string(" ") + char('A' + a) + " " + char('A' + b);
      } else if (op == "FREDKIN" || op == "CCNOT") {
        int a = rng() % 3, b = (a + 1) % 3, c = (a + 2) % 3;
        if (rng() % 2) std::swap(b, c);
        line += std::string(" ") + char('A' + a) + " " + char('A' + b) + " " +
                char('A' + c);
      } else if (op == "CCZ") {
        std::string bits;
        for (int j = 0; j < 3; ++j) bits += char('0' + rng() % 2);
        line += " " + bits;
      } else {
        std::string bits;
        for (int j = 0; j < 3; ++j) bits += char('0' + rng() % 2);
        std::snprintf(buf, sizeof buf, " %s %.6f", bits.c_str(),
                      (rng() % 10000) / 10000.0 * 2 * M_PI);
        line += buf;
      }
      const auto piece = compile_standard(line, 3);
      if (op == "Z" || op == "CZ" || op == "CCZ" || op == "CCPHASE") {
        EXPECT(piece.pulse_count() == 0, "Z-family zero pulses");
      }
      seq.append(piece);
      ideal = ideal_unitary(line) * ideal;
    }
    worst = std::max(worst,
                     phase_aligned_distance(sequence_unitary(seq), ideal));
  }
  EXPECT(worst < 1e-10, "replay error");
  out.detail << " worst replay error " << worst << " over 1000 programs";
  return out;
}

// 6. The seven-state shift formulas reduce to the ideal trimon set.
Outcome criterion6() {
  Outcome out;
  std::mt19937_64 rng(31415);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0, 1)(rng);
  };
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    KerrTensor kerr;
    kerr.self_kerr = {uni(0.04, 0.09), uni(0.04, 0.09), uni(0.04, 0.09)};
    kerr.cross_kerr = Eigen::MatrixXd::Zero(3, 3);
    kerr.cross_kerr(0, 1) = kerr.cross_kerr(1, 0) = uni(0.05, 0.15);
    kerr.cross_kerr(1, 2) = kerr.cross_kerr(2, 1) = uni(0.05, 0.15);
    kerr.cross_kerr(2, 0) = kerr.cross_kerr(0, 2) = uni(0.05, 0.15);
    kerr.beta = {0, 0, 0};
    kerr.linear_residual = {0, 0, 0};
    const double ga = uni(40, 90);
    const std::vector<double> f = {uni(4.8, 5.6), uni(4.2, 4.7),
                                   uni(5.8, 6.4)};
    const auto cav = dispersive_shifts(7.3, {ga, 0.0, 0.0}, kerr, f);
    const auto ideal = trimon_dispersive_shifts(
        ga, f[0] - 7.3, kerr.self_kerr[0], kerr.cross_kerr(0, 1),
        kerr.cross_kerr(2, 0));
    worst = std::max(worst,
                     rel_err(cav.chi_mhz.at("100"), ideal[0]));
    worst = std::max(worst, rel_err(cav.chi_mhz.at("010"), ideal[1]));
    worst = std::max(worst, rel_err(cav.chi_mhz.at("001"), ideal[2]));
  }
  EXPECT(worst < 1e-12, "reduction identity");
  out.detail << " worst relative error " << worst;
  return out;
}

ExperimentSetup table_setup(const DeviceAnalysis& dev) {
  ExperimentSetup setup;
  setup.kerr = dev.kerr;
  setup.omega = dev.omega;
  setup.config.levels_per_mode = 3;
  setup.config.step_ns = 1.0;
  setup.config.t1_us = {50, 40, 30};
  setup.pi_length_ns = 200.0;
  return setup;
}

// 7. Seven-state fidelity table.
Outcome criterion7() {
  Outcome out;
  const auto dev = analyze_trimon(testdev::design_table_trimon(), 7.3, 70.0, 4);
  auto setup = table_setup(dev);

  struct Row {
    const char* name;
    double prep;
    double tomo;
  };
  const Row rows[] = {{"bell-ab", 0.9977, 0.9798}, {"bell-bc", 0.9962, 0.9777},
                      {"bell-ca", 0.9963, 0.9754}, {"ghz", 0.9938, 0.9695},
                      {"w", 0.9949, 0.9737},       {"w2", 0.9839, 0.9653},
                      {"plus", 0.9876, 0.9699}};
  for (const auto& row : rows) {
    setup.decoherence = DecoherenceMode::prep_only;
    const double fp = run_experiment(row.name, setup).fidelity;
    setup.decoherence = DecoherenceMode::prep_and_tomo;
    const double ft = run_experiment(row.name, setup).fidelity;
    EXPECT(std::abs(fp - row.prep) <= 0.006, row.name);
    EXPECT(std::abs(ft - row.tomo) <= 0.010, row.name);
    EXPECT(ft < fp, row.name);
    out.detail << " " << row.name << ":" << fp << "/" << ft;
  }
  return out;
}

// 8. Single-transition randomized benchmarking of the qubit-A gates.
Outcome criterion8() {
  Outcome out;
  const auto dev = analyze_trimon(testdev::design_table_trimon(), 7.3, 70.0, 4);
  auto setup = table_setup(dev);
  setup.decoherence = DecoherenceMode::prep_and_tomo;
  setup.config.seed = 7;
  const char* labels[4] = {"AB0C0", "AB0C1", "AB1C0", "AB1C1"};
  const double targets[4] = {0.998, 0.995, 0.996, 0.993};
  const std::vector<int> lengths = {1, 4, 8, 14, 22, 32, 46};
  for (int k = 0; k < 4; ++k) {
    const auto res = randomized_benchmark(parse_transition(labels[k], 3),
                                          lengths, 24, setup);
    EXPECT(std::abs(res.average_fidelity - targets[k]) <= 0.004, labels[k]);
    out.detail << " " << labels[k] << ":" << res.average_fidelity;
  }
  return out;
}

// 9. Fidelity vs pulse length reproduces the qualitative curve shapes.
Outcome criterion9() {
  Outcome out;
  const auto dev = analyze_trimon(testdev::design_table_trimon(), 7.3, 70.0, 4);
  auto setup = table_setup(dev);

  setup.decoherence = DecoherenceMode::none;
  std::vector<double> f_none;
  for (double len : {50.0, 100.0, 200.0, 400.0}) {
    setup.pi_length_ns = len;
    f_none.push_back(run_experiment("bell-ab", setup).fidelity);
  }
  for (size_t k = 1; k < f_none.size(); ++k) {
    EXPECT(f_none[k] >= f_none[k - 1], "non-decreasing");
  }
  EXPECT(std::abs(f_none[3] - f_none[2]) <= 0.002, "flat beyond 200 ns");
  out.detail << " F_none = {" << f_none[0] << ", " << f_none[1] << ", "
             << f_none[2] << ", " << f_none[3] << "}";

  setup.decoherence = DecoherenceMode::prep_and_tomo;
  setup.pi_length_ns = 200.0;
  const double t200 = run_experiment("bell-ab", setup).fidelity;
  setup.pi_length_ns = 400.0;
  const double t400 = run_experiment("bell-ab", setup).fidelity;
  EXPECT(t400 < t200, "tomography decay with longer pulses");
  out.detail << ", F_tomo(200) = " << t200 << ", F_tomo(400) = " << t400;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int k = 1; k < argc - 1; ++k) {
    if (std::strcmp(argv[k], "--only") == 0) only = std::atoi(argv[k + 1]);
  }

  using Criterion = std::function<Outcome()>;
  const std::vector<std::pair<std::string, Criterion>> criteria = {
      {"symmetric-ring mode shapes (N = 4, 5, 6)", criterion1},
      {"symmetric trimon zero-flux values and flux sweep", criterion2},
      {"design-table reproduction", criterion3},
      {"Fock-oracle gate on randomized netlists", criterion4},
      {"compiler exactness on random programs", criterion5},
      {"seven-state shift reduction identity", criterion6},
      {"seven-state fidelity table", criterion7},
      {"single-transition randomized benchmarking", criterion8},
      {"fidelity vs pulse length curve shapes", criterion9},
  };

  int failures = 0;
  for (size_t k = 0; k < criteria.size(); ++k) {
    if (only != 0 && static_cast<int>(k + 1) != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("%s criterion %zu: %s (%.1f s)%s\n",
                out.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                secs, out.detail.str().c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
