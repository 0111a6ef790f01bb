// multimon: analysis, design, compilation and simulation for ring-multimon
// superconducting qubit devices. See README.md for the file formats.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "multimon/compiler.hpp"
#include "multimon/design.hpp"
#include "multimon/errors.hpp"
#include "multimon/kerr.hpp"
#include "multimon/pulsesim.hpp"
#include "multimon/report.hpp"

namespace {

using namespace multimon;

struct GlobalOpts {
  std::string out;
  std::uint64_t seed = 0;
  bool reproducible = false;
  std::string format = "text";
};

void add_global(CLI::App* cmd, GlobalOpts* g) {
  cmd->add_option("--out", g->out, "output file (default stdout)");
  cmd->add_option("--seed", g->seed, "random seed");
  cmd->add_flag("--reproducible", g->reproducible,
                "suppress timestamps for byte-identical output");
  cmd->add_option("--format", g->format, "text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}));
}

void emit(const GlobalOpts& g, const std::string& content) {
  if (g.out.empty()) {
    std::cout << content;
  } else {
    std::ofstream out(g.out);
    if (!out) throw ConfigError("cannot write output file: " + g.out);
    out << content;
  }
}

Netlist load_device(const std::string& path, const std::string& preset) {
  if (!preset.empty()) return preset_netlist(preset);
  if (path.empty()) throw ConfigError("need a netlist path or --preset");
  return load_netlist(path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_flux_range(const std::string& spec) {
  double a = 0, b = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(spec);
  if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' ||
      step <= 0) {
    throw ConfigError("flux range must be start:stop:step");
  }
  std::vector<double> grid;
  for (double f = a; f <= b + 1e-12; f += step) grid.push_back(f);
  if (grid.empty()) throw ConfigError("empty flux range");
  return grid;
}

int cmd_analyze(const std::string& netlist_path, const std::string& preset,
                double omega_r, double g_ref, int order, const GlobalOpts& g) {
  const Netlist nl = load_device(netlist_path, preset);
  const DeviceAnalysis dev = analyze_trimon(nl, omega_r, g_ref, order);
  DesignTarget target;
  target.omega_r_ghz = omega_r;
  target.g_ref_mhz = g_ref;
  target.min_separation_mhz = 30.0;
  target.f_min_ghz = 4.0;
  target.f_max_ghz = 6.5;
  std::array<double, 4> ej{0, 0, 0, 0};
  int k = 0;
  for (const auto& br : nl.branches) {
    if (br.has_junction() && k < 4) ej[k++] = br.ej_ghz;
  }
  const SpacingReport spacing = validate_spacing(dev.ladder, target, ej);

  RunManifest manifest;
  manifest.command = "analyze";
  manifest.inputs = {preset.empty() ? netlist_path : "preset:" + preset};
  std::ostringstream cfg;
  cfg << "omega_r=" << omega_r << " g_ref=" << g_ref << " order=" << order;
  manifest.config = cfg.str();
  manifest.seed = g.seed;
  manifest.reproducible = g.reproducible;

  if (g.format == "json") {
    emit(g, analysis_report_json(dev, spacing, manifest));
  } else if (g.format == "csv") {
    emit(g, analysis_report_csv(dev, spacing, manifest));
  } else {
    emit(g, analysis_report_text(dev, spacing, manifest));
  }
  return 0;
}

int cmd_sweep(const std::string& netlist_path, const std::string& preset,
              const std::string& flux, int order, const GlobalOpts& g) {
  const Netlist nl = load_device(netlist_path, preset);
  const auto grid = parse_flux_range(flux);
  const auto points = flux_sweep(nl, grid, order);
  RunManifest manifest;
  manifest.command = "sweep";
  manifest.inputs = {preset.empty() ? netlist_path : "preset:" + preset};
  manifest.config = "flux=" + flux + " order=" + std::to_string(order);
  manifest.seed = g.seed;
  manifest.reproducible = g.reproducible;
  emit(g, manifest.to_comment_block() + flux_sweep_csv(points));
  return 0;
}

int cmd_compile(const std::string& program_path, const GlobalOpts& g) {
  const std::string text = read_file(program_path);
  const GateSequence seq = compile_program(text);
  // Replay check against the ideal composite.
  Eigen::MatrixXcd ideal = Eigen::MatrixXcd::Identity(8, 8);
  {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::istringstream probe(line);
      std::string tok;
      if (!(probe >> tok)) continue;
      ideal = ideal_unitary(line) * ideal;
    }
  }
  const double dist = phase_aligned_distance(sequence_unitary(seq), ideal);
  RunManifest manifest;
  manifest.command = "compile";
  manifest.inputs = {program_path};
  manifest.seed = g.seed;
  manifest.reproducible = g.reproducible;
  std::ostringstream os;
  os << manifest.to_comment_block() << sequence_to_text(seq);
  os << "# replay distance to ideal: " << dist << "\n";
  emit(g, os.str());
  return dist < 1e-9 ? 0 : 2;
}

DecoherenceMode parse_mode(const std::string& s) {
  if (s == "none") return DecoherenceMode::none;
  if (s == "prep_only") return DecoherenceMode::prep_only;
  if (s == "prep_and_tomo") return DecoherenceMode::prep_and_tomo;
  throw ConfigError("decoherence_mode must be none, prep_only or prep_and_tomo");
}

int cmd_simulate(const std::string& experiment_path, const GlobalOpts& g) {
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(read_file(experiment_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("experiment parse error: ") + e.what());
  }

  const std::string preset = spec.value("preset", std::string());
  const std::string netlist_path = spec.value("netlist", std::string());
  const Netlist nl = preset.empty() && netlist_path.empty()
                         ? preset_netlist("trimon-design-table")
                         : load_device(netlist_path, preset);
  const int order = spec.value("order", 4);
  const double omega_r = spec.value("omega_r_ghz", 7.3);
  const double g_ref = spec.value("g_ref_mhz", 70.0);
  const DeviceAnalysis dev = analyze_trimon(nl, omega_r, g_ref, order);

  ExperimentSetup setup;
  setup.kerr = dev.kerr;
  setup.omega = dev.omega;
  setup.config.levels_per_mode = spec.value("levels_per_mode", 3);
  setup.config.step_ns = spec.value("step_ns", 0.1);
  setup.config.seed = spec.value("seed", g.seed);
  setup.config.readout_noise_sigma = spec.value("readout_noise_sigma", 0.0);
  if (spec.contains("t1_us")) {
    setup.config.t1_us = spec["t1_us"].get<std::vector<double>>();
  }
  setup.decoherence = parse_mode(spec.value("decoherence_mode", "prep_only"));
  setup.ideal_drive = spec.value("ideal_drive", true);
  if (!setup.ideal_drive) {
    double norm = std::max(1e-9, dev.g_direct_mhz[0]);
    for (double gp : dev.g_direct_mhz) {
      setup.config.drive_weights.push_back(gp / norm);
    }
  }

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.inputs = {experiment_path};
  manifest.seed = setup.config.seed;
  manifest.reproducible = g.reproducible;

  // Randomized-benchmarking mode.
  if (spec.contains("rb")) {
    setup.pi_length_ns = spec.value("pi_length_ns", 200.0);
    const auto& rb = spec["rb"];
    const TransitionLabel t =
        parse_transition(rb.at("transition").get<std::string>(), 3);
    const auto lengths = rb.at("lengths").get<std::vector<int>>();
    const int trials = rb.value("trials", 24);
    const RbResult res = randomized_benchmark(t, lengths, trials, setup);
    nlohmann::json out;
    out["transition"] = t.str();
    out["average_fidelity"] = res.average_fidelity;
    out["decay_p"] = res.decay_p;
    out["p_stderr"] = res.p_stderr;
    out["amplitude"] = res.amplitude;
    out["baseline"] = res.baseline;
    out["lengths"] = res.lengths;
    out["survivals"] = res.survivals;
    out["manifest"] = nlohmann::json::parse(manifest.to_json());
    emit(g, out.dump(2) + "\n");
    return 0;
  }

  GateSequence prep;
  if (spec.contains("program")) {
    std::string program;
    for (const auto& line : spec["program"]) {
      program += line.get<std::string>() + "\n";
    }
    prep = compile_program(program);
  } else {
    prep = preparation_sequence(spec.at("state").get<std::string>());
  }

  // A pulse-length sweep emits CSV; a single length emits a JSON result.
  if (spec.contains("pi_length_ns") && spec["pi_length_ns"].is_array()) {
    std::ostringstream os;
    os << manifest.to_comment_block() << "pi_length_ns,fidelity\n";
    os.precision(9);
    for (double len : spec["pi_length_ns"].get<std::vector<double>>()) {
      setup.pi_length_ns = len;
      const ExperimentResult res = run_experiment(prep, setup);
      os << len << "," << res.fidelity << "\n";
    }
    emit(g, os.str());
    return 0;
  }

  setup.pi_length_ns = spec.value("pi_length_ns", 200.0);
  const ExperimentResult res = run_experiment(prep, setup);
  nlohmann::json out;
  out["fidelity"] = res.fidelity;
  out["prep_leakage"] = res.prep_leakage;
  out["pulse_count"] = res.pulse_count;
  out["prep_duration_ns"] = res.prep_duration_ns;
  out["manifest"] = nlohmann::json::parse(manifest.to_json());
  emit(g, out.dump(2) + "\n");
  return 0;
}

int cmd_optimize(const std::string& target_path, const GlobalOpts& g) {
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(read_file(target_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("target parse error: ") + e.what());
  }
  DesignTarget target;
  target.f_min_ghz = spec.value("f_min_ghz", 4.0);
  target.f_max_ghz = spec.value("f_max_ghz", 6.0);
  target.min_separation_mhz = spec.value("min_separation_mhz", 30.0);
  target.omega_r_ghz = spec.value("omega_r_ghz", 7.3);
  target.g_ref_mhz = spec.value("g_ref_mhz", 70.0);
  target.stability_margin = spec.value("stability_margin", 0.6);
  if (spec.contains("target_transitions")) {
    for (const auto& [label, value] : spec["target_transitions"].items()) {
      target.target_transitions.emplace_back(label, value.get<double>());
    }
  }
  AsymmetrySpec seed;
  if (spec.contains("seed_spec")) {
    const auto& s = spec["seed_spec"];
    seed.ej_mean_ghz = s.value("ej_mean_ghz", seed.ej_mean_ghz);
    seed.eta_ab = s.value("eta_ab", 0.0);
    seed.eta_bc = s.value("eta_bc", 0.0);
    seed.eta_ca = s.value("eta_ca", 0.0);
    seed.c_mean_ff = s.value("c_mean_ff", seed.c_mean_ff);
    seed.eta_ab_prime = s.value("eta_ab_prime", 0.0);
    seed.eta_bc_prime = s.value("eta_bc_prime", 0.0);
    seed.eta_ca_prime = s.value("eta_ca_prime", 0.0);
    seed.c13_ff = s.value("c13_ff", seed.c13_ff);
    seed.c24_ff = s.value("c24_ff", seed.c24_ff);
  }
  std::vector<std::string> knobs =
      spec.value("knobs", std::vector<std::string>{"ej_mean", "eta_ab",
                                                   "eta_bc", "eta_ca"});
  const int budget = spec.value("budget", 2000);

  const OptimizeResult res = optimize_design(target, seed, knobs, g.seed, budget);

  RunManifest manifest;
  manifest.command = "optimize";
  manifest.inputs = {target_path};
  manifest.seed = g.seed;
  manifest.reproducible = g.reproducible;

  nlohmann::json out;
  out["feasible"] = res.feasible;
  out["objective"] = res.objective;
  out["evaluations"] = res.evaluations;
  out["spec"]["ej_mean_ghz"] = res.spec.ej_mean_ghz;
  out["spec"]["eta_ab"] = res.spec.eta_ab;
  out["spec"]["eta_bc"] = res.spec.eta_bc;
  out["spec"]["eta_ca"] = res.spec.eta_ca;
  out["spec"]["c_mean_ff"] = res.spec.c_mean_ff;
  out["spec"]["eta_ab_prime"] = res.spec.eta_ab_prime;
  out["spec"]["eta_bc_prime"] = res.spec.eta_bc_prime;
  out["spec"]["eta_ca_prime"] = res.spec.eta_ca_prime;
  out["spec"]["c13_ff"] = res.spec.c13_ff;
  out["spec"]["c24_ff"] = res.spec.c24_ff;
  const auto ej = res.spec.junction_energies();
  out["spec"]["junction_energies_ghz"] = {ej[0], ej[1], ej[2], ej[3]};
  out["netlist"] = nlohmann::json::parse(netlist_to_json(res.netlist));
  out["report"]["pass"] = res.report.pass;
  out["report"]["min_gap_mhz"] = res.report.min_gap_mhz;
  out["report"]["violations"] = res.report.violations;
  out["manifest"] = nlohmann::json::parse(manifest.to_json());
  emit(g, out.dump(2) + "\n");
  return res.feasible ? 0 : 2;
}

int cmd_presets(const std::string& name, const GlobalOpts& g) {
  if (name.empty()) {
    std::ostringstream os;
    for (const auto& n : preset_names()) os << n << "\n";
    emit(g, os.str());
    return 0;
  }
  emit(g, netlist_to_json(preset_netlist(name)) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multimon: multi-mode superconducting circuit toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;

  auto* analyze = app.add_subcommand("analyze", "modes, Kerr, couplings, shifts");
  std::string netlist_path, preset;
  double omega_r = 7.3, g_ref = 70.0;
  int order = 4;
  analyze->add_option("netlist", netlist_path, "netlist JSON file");
  analyze->add_option("--preset", preset, "built-in device preset");
  analyze->add_option("--cavity-freq", omega_r, "cavity frequency, GHz");
  analyze->add_option("--g-ref", g_ref, "reference coupling g_A, MHz");
  analyze->add_option("--order", order, "expansion order (4, 6 or 8)");
  add_global(analyze, &g);

  auto* sweep = app.add_subcommand("sweep", "flux sweep to CSV");
  std::string sweep_netlist, sweep_preset, flux = "0:0.25:0.05";
  int sweep_order = 4;
  sweep->add_option("netlist", sweep_netlist, "netlist JSON file");
  sweep->add_option("--preset", sweep_preset, "built-in device preset");
  sweep->add_option("--flux", flux, "start:stop:step in Phi0");
  sweep->add_option("--order", sweep_order, "expansion order");
  add_global(sweep, &g);

  auto* compile = app.add_subcommand("compile", "compile a gate program");
  std::string program_path;
  compile->add_option("program", program_path, "gate program file")->required();
  add_global(compile, &g);

  auto* simulate = app.add_subcommand("simulate", "pulse-level experiment");
  std::string experiment_path;
  simulate->add_option("experiment", experiment_path, "experiment JSON file")
      ->required();
  add_global(simulate, &g);

  auto* optimize = app.add_subcommand("optimize", "fit a device to a target");
  std::string target_path;
  optimize->add_option("target", target_path, "target JSON file")->required();
  add_global(optimize, &g);

  auto* presets = app.add_subcommand("presets", "list or emit preset netlists");
  std::string preset_name;
  presets->add_option("name", preset_name, "preset to emit as JSON");
  add_global(presets, &g);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) {
      return cmd_analyze(netlist_path, preset, omega_r, g_ref, order, g);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_netlist, sweep_preset, flux, sweep_order, g);
    }
    if (compile->parsed()) return cmd_compile(program_path, g);
    if (simulate->parsed()) return cmd_simulate(experiment_path, g);
    if (optimize->parsed()) return cmd_optimize(target_path, g);
    if (presets->parsed()) return cmd_presets(preset_name, g);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
