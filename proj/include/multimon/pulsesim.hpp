#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multimon/compiler.hpp"
#include "multimon/kerr.hpp"

namespace multimon {

// One square-envelope drive segment. amplitude_ghz multiplies the drive
// operator (a e^{i delta} + h.c.); phase is in the conditional-rotation
// azimuth convention, so a resonant pulse of angle theta = 4*pi*amp*M*tau
// implements CCR(phase, theta) on its transition. drive_mode >= 0 drives a
// single mode (ideal drive); -1 uses the configured per-mode weights.
struct PulseSegment {
  double carrier_ghz = 0.0;
  double amplitude_ghz = 0.0;  // 0 = idle
  double phase = 0.0;
  double duration_ns = 0.0;
  int drive_mode = -1;
};

struct PulseSchedule {
  std::vector<PulseSegment> segments;
  void validate() const;
};

struct SimulationConfig {
  int levels_per_mode = 3;
  std::vector<double> t1_us;          // empty = no relaxation
  std::vector<double> drive_weights;  // for drive_mode = -1
  bool include_three_body = false;
  double step_ns = 0.1;
  std::uint64_t seed = 0;
  double readout_noise_sigma = 0.0;   // additive noise on projections
};

// Truncated multi-mode density matrix with occupation-tuple basis labels.
struct DensityMatrix {
  Eigen::MatrixXcd rho;
  std::vector<int> dims;  // levels per mode

  long dim() const { return rho.rows(); }
  static DensityMatrix ground(const std::vector<int>& dims);
  static DensityMatrix pure(const Eigen::VectorXcd& psi,
                            const std::vector<int>& dims);
  std::vector<int> occupation(long flat) const;
  long flat_index(const std::vector<int>& occ) const;
  // Hermiticity, unit trace, positive semidefiniteness (small floor).
  void validate(double trace_tol = 1e-8) const;
};

// Fixed-device Lindblad simulator over the Eq.-9 diagonal Hamiltonian with
// per-mode relaxation. Segments are piecewise constant in their carrier
// frame: the unitary factor is applied exactly (eigendecomposition) and the
// dissipator by a split step with exact coherence decay.
class LindbladSimulator {
 public:
  LindbladSimulator(const KerrTensor& kerr, const std::vector<double>& omega,
                    const SimulationConfig& config);

  int mode_count() const { return modes_; }
  int levels() const { return config_.levels_per_mode; }
  long dim() const { return dim_; }
  const SimulationConfig& config() const { return config_; }

  // Diagonal energy of an occupation tuple, GHz.
  double energy(const std::vector<int>& occ) const;
  // Resonant carrier for a computational transition, GHz.
  double transition_frequency(const TransitionLabel& t) const;

  // Deterministic phases a resonant pulse imprints on each computational
  // basis state (drive-induced Stark shifts), interaction-frame, radians.
  // These are what an experimenter calibrates into the pulse frames.
  std::vector<double> parasitic_phases(const TransitionLabel& transition,
                                       double theta,
                                       double pi_length_ns) const;

  // Carrier tuned onto the drive-shifted resonance of a transition (the
  // frequency a Rabi/Ramsey tune-up would find at this drive amplitude).
  double calibrated_carrier(const TransitionLabel& transition,
                            double amplitude_ghz) const;

  std::vector<int> fock_dims() const;

 private:
  friend class PulseSession;
  Eigen::MatrixXcd rotating_frame_hamiltonian(const PulseSegment& segment,
                                              double frame_ghz) const;
  int modes_;
  long dim_ = 0;
  SimulationConfig config_;
  std::vector<double> energies_;      // per flat index, GHz
  std::vector<double> total_occ_;     // per flat index
  std::vector<double> gamma_;         // 1/ns per mode
  std::vector<long> strides_;
  KerrTensor kerr_;
  std::vector<double> omega_;
};

// Stateful evolution with absolute-time and carrier-frame bookkeeping.
class PulseSession {
 public:
  PulseSession(const LindbladSimulator& sim, DensityMatrix rho);

  void apply(const PulseSegment& segment, bool dissipative);
  double time_ns() const { return time_ns_; }

  // Populations of the 2^N computational states (frame independent).
  std::vector<double> computational_populations() const;
  double leakage() const;
  // Full state rotated into the interaction frame of the device Hamiltonian.
  DensityMatrix state() const;

 private:
  void enter_frame(double carrier_ghz);

  const LindbladSimulator& sim_;
  DensityMatrix rho_;
  double time_ns_ = 0.0;
  double frame_ghz_ = 0.0;
  bool frame_set_ = false;
};

// Convenience wrapper: evolve an initial state through a schedule (with
// relaxation when configured) and return the final interaction-frame state.
DensityMatrix evolve(const DensityMatrix& initial, const PulseSchedule& schedule,
                     const KerrTensor& kerr, const std::vector<double>& omega,
                     const SimulationConfig& config);

// ---------------------------------------------------------------------------
// Joint-readout tomography and state reconstruction.

enum class DecoherenceMode { none, prep_only, prep_and_tomo };

struct TomographyDatum {
  Eigen::MatrixXcd povm;  // ideal 8x8 element
  double value = 0.0;     // measured probability
};

struct TomographyData {
  std::vector<TomographyDatum> data;
};

struct ExperimentSetup {
  KerrTensor kerr;
  std::vector<double> omega;
  SimulationConfig config;
  double pi_length_ns = 200.0;
  DecoherenceMode decoherence = DecoherenceMode::prep_only;
  bool ideal_drive = true;          // drive only the addressed mode
  bool calibrated_frames = true;    // absorb pulse Stark phases into frames
};

// Executes the joint-readout protocol for a compiled preparation: for each
// pre-rotation setting (I, X/2, Y/2 per qubit) runs four measurement rounds;
// each round reads the 000/111 slots and then two more population-swap
// CCNOTs expose the next basis pair. Frame offsets from the preparation
// carry into the tomography pulses.
TomographyData tomography(const GateSequence& prep, const ExperimentSetup& setup);

// Diluted RrhoR maximum-likelihood reconstruction under the Gaussian
// likelihood; deterministic, PSD, unit trace.
DensityMatrix mle_reconstruct(const TomographyData& data, int mode_count = 3,
                              int max_iterations = 5000,
                              double ll_tolerance = 1e-10);

// Uhlmann fidelity Tr sqrt(sqrt(rho_id) rho sqrt(rho_id)).
double fidelity(const DensityMatrix& rho_est, const DensityMatrix& rho_ideal);

struct ExperimentResult {
  double fidelity = 0.0;
  double prep_leakage = 0.0;
  int pulse_count = 0;
  double prep_duration_ns = 0.0;
  DensityMatrix rho_mle;
  Eigen::VectorXcd ideal_state;
};

// Prepares a named state (bell-ab, bell-bc, bell-ca, ghz, w, w2, plus) or a
// caller-compiled program, runs tomography, reconstructs and scores.
GateSequence preparation_sequence(const std::string& state_name);
ExperimentResult run_experiment(const GateSequence& prep,
                                const ExperimentSetup& setup);
ExperimentResult run_experiment(const std::string& state_name,
                                const ExperimentSetup& setup);

// ---------------------------------------------------------------------------
// Single-transition randomized benchmarking.

struct RbResult {
  double average_fidelity = 0.0;
  double decay_p = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  double p_stderr = 0.0;
  std::vector<double> lengths;
  std::vector<double> survivals;
};

RbResult randomized_benchmark(const TransitionLabel& transition,
                              const std::vector<int>& sequence_lengths,
                              int trials, const ExperimentSetup& setup);

}  // namespace multimon
