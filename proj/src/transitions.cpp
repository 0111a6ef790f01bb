#include "multimon/transitions.hpp"

#include "multimon/errors.hpp"

namespace multimon {

char mode_letter(int index) { return static_cast<char>('A' + index); }

int mode_index(char letter) {
  if (letter < 'A' || letter > 'Z') throw ConfigError("bad mode letter");
  return letter - 'A';
}

std::string TransitionLabel::str() const {
  const int n = mode_count();
  std::string s;
  s += mode_letter(target);
  for (int k = 1; k < n; ++k) {
    s += mode_letter((target + k) % n);
    s += static_cast<char>('0' + controls[k - 1]);
  }
  return s;
}

bool TransitionLabel::operator<(const TransitionLabel& o) const {
  if (target != o.target) return target < o.target;
  return controls < o.controls;
}

std::vector<int> TransitionLabel::lower_state() const {
  const int n = mode_count();
  std::vector<int> occ(n, 0);
  for (int k = 1; k < n; ++k) occ[(target + k) % n] = controls[k - 1];
  return occ;
}

std::vector<int> TransitionLabel::upper_state() const {
  auto occ = lower_state();
  occ[target] = 1;
  return occ;
}

int TransitionLabel::control_of(int mode) const {
  const int n = mode_count();
  if (mode == target) throw ConfigError("mode is the transition target");
  for (int k = 1; k < n; ++k) {
    if ((target + k) % n == mode) return controls[k - 1];
  }
  throw ConfigError("mode index out of range");
}

TransitionLabel parse_transition(const std::string& s, int mode_count) {
  if (static_cast<int>(s.size()) != 1 + 2 * (mode_count - 1)) {
    throw ConfigError("bad transition label: " + s);
  }
  TransitionLabel t;
  t.target = mode_index(s[0]);
  if (t.target >= mode_count) throw ConfigError("bad transition label: " + s);
  t.controls.resize(mode_count - 1);
  for (int k = 1; k < mode_count; ++k) {
    const char letter = s[1 + 2 * (k - 1)];
    const char digit = s[2 + 2 * (k - 1)];
    if (mode_index(letter) != (t.target + k) % mode_count) {
      throw ConfigError("transition label not in cyclic order: " + s);
    }
    if (digit != '0' && digit != '1') {
      throw ConfigError("bad control state in label: " + s);
    }
    t.controls[k - 1] = digit - '0';
  }
  return t;
}

std::vector<TransitionLabel> all_transitions(int mode_count) {
  std::vector<TransitionLabel> out;
  const int combos = 1 << (mode_count - 1);
  for (int target = 0; target < mode_count; ++target) {
    for (int mask = 0; mask < combos; ++mask) {
      TransitionLabel t;
      t.target = target;
      for (int k = 0; k < mode_count - 1; ++k) {
        t.controls.push_back((mask >> (mode_count - 2 - k)) & 1);
      }
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace multimon
