#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multimon/transitions.hpp"

namespace multimon {

// One conditional rotation CCR(phi, theta) at a transition. phi is the
// azimuthal angle measured from the y axis on the target's Bloch sphere, so
// the active 2x2 block is
//   [ cos(t/2)            -e^{-i phi} sin(t/2) ]
//   [ e^{i phi} sin(t/2)   cos(t/2)            ].
// A pi pulse with phi = -pi/2 is the -i CCNOT.
struct NativeGate {
  TransitionLabel transition;
  double theta = 0.0;  // [0, 2pi)
  double phi = 0.0;    // programmed phase; frame offsets add at replay
  std::optional<double> duration_hint_ns;
  int parallel_group = -1;  // gates sharing a non-negative id act together
};

// Pending virtual phases, one per basis state. The per-transition pulse
// offsets are the differences of these across the transition.
class FrameTracker {
 public:
  FrameTracker() = default;
  explicit FrameTracker(int mode_count);

  int mode_count() const { return modes_; }
  double state_phase(int basis_index) const;
  void add_state_phase(int basis_index, double phase);

  // Offset added to the programmed phase of a pulse at this transition.
  double offset(const TransitionLabel& t) const;
  // All N * 2^(N-1) offsets keyed by label string.
  std::map<std::string, double> phase_offsets() const;

 private:
  int modes_ = 0;
  std::vector<double> phases_;
};

int basis_index(const std::vector<int>& occupation);

// A compiled sequence: pulses interleaved with pure frame updates.
struct SequenceItem {
  enum class Kind { pulse, virtual_phase };
  Kind kind = Kind::pulse;
  NativeGate gate;          // when kind == pulse
  std::vector<int> basis;   // when kind == virtual_phase
  double phase = 0.0;       // virtual phase angle
};

struct GateSequence {
  int mode_count = 3;
  std::string source_name;
  std::vector<SequenceItem> items;

  int pulse_count() const;
  void append(const GateSequence& other);
  // Frame state after replaying all items.
  FrameTracker final_frames() const;
};

Eigen::MatrixXcd ccr_matrix(const TransitionLabel& t, double phi, double theta,
                            int mode_count);

// pi pulse at the transition plus the +-90 degree frame updates that turn
// the -iCCNOT into an exact generalized CCNOT.
GateSequence ccnot(int target, const std::vector<int>& control_state,
                   int mode_count = 3);

// Conditional phase on one basis component; no pulses, frame updates only.
GateSequence cctheta(const std::vector<int>& basis_state, double theta);

// Single-qubit rotation: simultaneous conditional rotations on all of the
// qubit's transitions (level-disjoint parallel group).
GateSequence single_qubit_rotation(int qubit, double theta, double phi,
                                   int mode_count = 3);

// One line of the gate program grammar, e.g. "CNOT B A", "X C", "CCZ 111",
// "R A 1.5708 0.0". Controls come before targets.
GateSequence compile_standard(const std::string& line, int mode_count = 3);

// Full program: one gate per line, '#' comments, frames threaded through.
GateSequence compile_program(const std::string& program_text,
                             int mode_count = 3);

// Replays the sequence: each pulse acts as CCR(phi + offset, theta) with the
// offset from the frames accumulated so far; the final pending phases are
// applied as a diagonal gate at the end.
Eigen::MatrixXcd sequence_unitary(const GateSequence& seq);

// Ideal matrix of a gate-program line (for verification).
Eigen::MatrixXcd ideal_unitary(const std::string& line, int mode_count = 3);

// Max entrywise |U - e^{i delta} V| after optimal global-phase alignment.
double phase_aligned_distance(const Eigen::MatrixXcd& u,
                              const Eigen::MatrixXcd& v);

// Human-readable compiled listing: pulses with effective phases, then the
// final frame-offset table.
std::string sequence_to_text(const GateSequence& seq);

}  // namespace multimon
