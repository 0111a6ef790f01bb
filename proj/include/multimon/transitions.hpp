#pragma once

#include <string>
#include <vector>

namespace multimon {

// Conditional transition label. The target qubit flips 0<->1 while every
// other qubit sits in a definite state. In the string form the other qubits
// are listed in cyclic order after the target, e.g. "AB0C1" is the target-A
// transition with B=0, C=1; target-B transitions read "BC.A.", target-C
// transitions "CA.B.".
struct TransitionLabel {
  int target = 0;
  std::vector<int> controls;  // occupation of the others, cyclic order

  int mode_count() const { return static_cast<int>(controls.size()) + 1; }
  std::string str() const;
  bool operator==(const TransitionLabel&) const = default;
  bool operator<(const TransitionLabel& o) const;

  // Occupation tuples of the two connected states (target = 0 and 1).
  std::vector<int> lower_state() const;
  std::vector<int> upper_state() const;

  // Control occupation of a specific mode index (must not be the target).
  int control_of(int mode) const;
};

TransitionLabel parse_transition(const std::string& s, int mode_count);

// All N * 2^(N-1) conditional transitions in canonical order.
std::vector<TransitionLabel> all_transitions(int mode_count);

char mode_letter(int index);
int mode_index(char letter);

}  // namespace multimon
