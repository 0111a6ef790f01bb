#include "multimon/compiler.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "multimon/constants.hpp"
#include "multimon/errors.hpp"

namespace multimon {

namespace {

double mod_two_pi(double x) {
  x = std::fmod(x, kTwoPi);
  if (x < 0.0) x += kTwoPi;
  return x;
}

}  // namespace

FrameTracker::FrameTracker(int mode_count)
    : modes_(mode_count), phases_(1 << mode_count, 0.0) {}

double FrameTracker::state_phase(int basis_index) const {
  return phases_.at(basis_index);
}

void FrameTracker::add_state_phase(int basis_index, double phase) {
  phases_.at(basis_index) = mod_two_pi(phases_.at(basis_index) + phase);
}

double FrameTracker::offset(const TransitionLabel& t) const {
  const int lo = multimon::basis_index(t.lower_state());
  const int hi = multimon::basis_index(t.upper_state());
  return mod_two_pi(phases_.at(lo) - phases_.at(hi));
}

std::map<std::string, double> FrameTracker::phase_offsets() const {
  std::map<std::string, double> out;
  for (const auto& t : all_transitions(modes_)) out[t.str()] = offset(t);
  return out;
}

int basis_index(const std::vector<int>& occupation) {
  int idx = 0;
  for (int bit : occupation) {
    if (bit != 0 && bit != 1) throw ConfigError("occupation is not a qubit state");
    idx = (idx << 1) | bit;
  }
  return idx;
}

int GateSequence::pulse_count() const {
  int n = 0;
  for (const auto& it : items) {
    if (it.kind == SequenceItem::Kind::pulse && it.gate.theta != 0.0) ++n;
  }
  return n;
}

void GateSequence::append(const GateSequence& other) {
  if (other.mode_count != mode_count) {
    throw ConfigError("cannot append sequences over different registers");
  }
  // Keep parallel groups from different gates distinct.
  int max_group = -1;
  for (const auto& it : items) {
    if (it.kind == SequenceItem::Kind::pulse) {
      max_group = std::max(max_group, it.gate.parallel_group);
    }
  }
  for (SequenceItem it : other.items) {
    if (it.kind == SequenceItem::Kind::pulse && it.gate.parallel_group >= 0) {
      it.gate.parallel_group += max_group + 1;
    }
    items.push_back(std::move(it));
  }
}

FrameTracker GateSequence::final_frames() const {
  FrameTracker frames(mode_count);
  for (const auto& it : items) {
    if (it.kind == SequenceItem::Kind::virtual_phase) {
      frames.add_state_phase(basis_index(it.basis), it.phase);
    }
  }
  return frames;
}

Eigen::MatrixXcd ccr_matrix(const TransitionLabel& t, double phi, double theta,
                            int mode_count) {
  const int dim = 1 << mode_count;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  const int lo = basis_index(t.lower_state());
  const int hi = basis_index(t.upper_state());
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  const std::complex<double> eip = std::exp(std::complex<double>(0.0, phi));
  u(lo, lo) = c;
  u(hi, hi) = c;
  u(lo, hi) = -s / eip;
  u(hi, lo) = s * eip;
  return u;
}

GateSequence ccnot(int target, const std::vector<int>& control_state,
                   int mode_count) {
  if (target < 0 || target >= mode_count) {
    throw ConfigError("ccnot target out of range");
  }
  if (static_cast<int>(control_state.size()) != mode_count - 1) {
    throw ConfigError("ccnot needs a control state for every other qubit");
  }
  TransitionLabel t;
  t.target = target;
  t.controls = control_state;

  GateSequence seq;
  seq.mode_count = mode_count;
  seq.source_name = "CCNOT@" + t.str();
  SequenceItem pulse;
  pulse.kind = SequenceItem::Kind::pulse;
  pulse.gate.transition = t;
  pulse.gate.theta = M_PI;
  pulse.gate.phi = -M_PI / 2.0;
  seq.items.push_back(pulse);
  // The pi pulse realizes -iCCNOT; owing +90 degrees on the two connected
  // states makes it exact and yields the standard shift table for
  // subsequent pulses.
  for (const auto& basis : {t.lower_state(), t.upper_state()}) {
    SequenceItem vp;
    vp.kind = SequenceItem::Kind::virtual_phase;
    vp.basis = basis;
    vp.phase = M_PI / 2.0;
    seq.items.push_back(vp);
  }
  return seq;
}

GateSequence cctheta(const std::vector<int>& basis_state, double theta) {
  GateSequence seq;
  seq.mode_count = static_cast<int>(basis_state.size());
  std::ostringstream name;
  name << "CCPHASE@";
  for (int b : basis_state) name << b;
  seq.source_name = name.str();
  if (theta != 0.0) {
    SequenceItem vp;
    vp.kind = SequenceItem::Kind::virtual_phase;
    vp.basis = basis_state;
    vp.phase = theta;
    seq.items.push_back(vp);
  }
  return seq;
}

GateSequence single_qubit_rotation(int qubit, double theta, double phi,
                                   int mode_count) {
  if (qubit < 0 || qubit >= mode_count) {
    throw ConfigError("qubit index out of range");
  }
  GateSequence seq;
  seq.mode_count = mode_count;
  seq.source_name = std::string("R@") + mode_letter(qubit);
  const int combos = 1 << (mode_count - 1);
  for (int mask = 0; mask < combos; ++mask) {
    TransitionLabel t;
    t.target = qubit;
    for (int k = 0; k < mode_count - 1; ++k) {
      t.controls.push_back((mask >> (mode_count - 2 - k)) & 1);
    }
    SequenceItem pulse;
    pulse.kind = SequenceItem::Kind::pulse;
    pulse.gate.transition = t;
    pulse.gate.theta = theta;
    pulse.gate.phi = phi;
    pulse.gate.parallel_group = 0;
    seq.items.push_back(pulse);
  }
  return seq;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (is >> tok) tokens.push_back(tok);
  return tokens;
}

int parse_qubit(const std::string& tok, int mode_count) {
  if (tok.size() != 1) throw ConfigError("bad qubit name: " + tok);
  const int q = mode_index(tok[0]);
  if (q >= mode_count) throw ConfigError("qubit out of range: " + tok);
  return q;
}

std::vector<int> parse_bits(const std::string& tok, int mode_count) {
  if (static_cast<int>(tok.size()) != mode_count) {
    throw ConfigError("basis state must have one bit per qubit: " + tok);
  }
  std::vector<int> bits;
  for (char c : tok) {
    if (c != '0' && c != '1') throw ConfigError("bad basis state: " + tok);
    bits.push_back(c - '0');
  }
  return bits;
}

// Controls-at-one plus fixed spectator states select one transition.
std::vector<int> control_pattern(int target,
                                 const std::vector<std::pair<int, int>>& fixed,
                                 int mode_count) {
  std::vector<int> controls(mode_count - 1, 0);
  for (const auto& [qubit, state] : fixed) {
    bool placed = false;
    for (int k = 1; k < mode_count; ++k) {
      if ((target + k) % mode_count == qubit) {
        controls[k - 1] = state;
        placed = true;
      }
    }
    if (!placed) throw ConfigError("control qubit coincides with target");
  }
  return controls;
}

}  // namespace

GateSequence compile_standard(const std::string& line, int mode_count) {
  const auto tokens = tokenize(line);
  if (tokens.empty()) throw ConfigError("empty gate line");
  const std::string& op = tokens[0];
  const int dim_controls = 1 << (mode_count - 1);

  GateSequence seq;
  seq.mode_count = mode_count;
  seq.source_name = line;

  auto require_args = [&](size_t n) {
    if (tokens.size() != n + 1) {
      throw ConfigError("gate " + op + " expects " + std::to_string(n) +
                        " arguments");
    }
  };

  if (op == "X" || op == "Y") {
    require_args(1);
    const int q = parse_qubit(tokens[1], mode_count);
    seq.append(single_qubit_rotation(q, M_PI, op == "X" ? -M_PI / 2.0 : 0.0,
                                     mode_count));
  } else if (op == "R") {
    require_args(3);
    const int q = parse_qubit(tokens[1], mode_count);
    const double theta = std::stod(tokens[2]);
    const double phi = std::stod(tokens[3]);
    seq.append(single_qubit_rotation(q, theta, phi, mode_count));
  } else if (op == "Z") {
    require_args(1);
    const int q = parse_qubit(tokens[1], mode_count);
    for (int mask = 0; mask < dim_controls; ++mask) {
      std::vector<int> basis;
      int pos = 0;
      for (int m = 0; m < mode_count; ++m) {
        if (m == q) {
          basis.push_back(1);
        } else {
          basis.push_back((mask >> (mode_count - 2 - pos)) & 1);
          ++pos;
        }
      }
      seq.append(cctheta(basis, M_PI));
    }
  } else if (op == "CNOT") {
    require_args(2);
    const int control = parse_qubit(tokens[1], mode_count);
    const int target = parse_qubit(tokens[2], mode_count);
    if (control == target) throw ConfigError("CNOT control equals target");
    if (mode_count != 3) throw ConfigError("CNOT decomposition assumes 3 qubits");
    const int spectator = 3 - control - target;
    for (int s = 0; s <= 1; ++s) {
      seq.append(ccnot(target,
                       control_pattern(target, {{control, 1}, {spectator, s}},
                                       mode_count),
                       mode_count));
    }
  } else if (op == "CZ") {
    require_args(2);
    const int a = parse_qubit(tokens[1], mode_count);
    const int b = parse_qubit(tokens[2], mode_count);
    if (a == b) throw ConfigError("CZ arguments must differ");
    for (int mask = 0; mask < (1 << mode_count); ++mask) {
      std::vector<int> basis(mode_count);
      for (int m = 0; m < mode_count; ++m) {
        basis[m] = (mask >> (mode_count - 1 - m)) & 1;
      }
      if (basis[a] == 1 && basis[b] == 1) seq.append(cctheta(basis, M_PI));
    }
  } else if (op == "SWAP") {
    require_args(2);
    const int a = parse_qubit(tokens[1], mode_count);
    const int b = parse_qubit(tokens[2], mode_count);
    if (a == b) throw ConfigError("SWAP arguments must differ");
    seq.append(compile_standard(std::string("CNOT ") + mode_letter(a) + " " +
                                    mode_letter(b),
                                mode_count));
    seq.append(compile_standard(std::string("CNOT ") + mode_letter(b) + " " +
                                    mode_letter(a),
                                mode_count));
    seq.append(compile_standard(std::string("CNOT ") + mode_letter(a) + " " +
                                    mode_letter(b),
                                mode_count));
  } else if (op == "FREDKIN") {
    require_args(3);
    const int c = parse_qubit(tokens[1], mode_count);
    const int a = parse_qubit(tokens[2], mode_count);
    const int b = parse_qubit(tokens[3], mode_count);
    if (c == a || c == b || a == b) throw ConfigError("FREDKIN needs 3 qubits");
    seq.append(ccnot(b, control_pattern(b, {{c, 1}, {a, 1}}, mode_count),
                     mode_count));
    seq.append(ccnot(a, control_pattern(a, {{c, 1}, {b, 1}}, mode_count),
                     mode_count));
    seq.append(ccnot(b, control_pattern(b, {{c, 1}, {a, 1}}, mode_count),
                     mode_count));
  } else if (op == "CCNOT") {
    require_args(3);
    const int c1 = parse_qubit(tokens[1], mode_count);
    const int c2 = parse_qubit(tokens[2], mode_count);
    const int t = parse_qubit(tokens[3], mode_count);
    if (c1 == c2 || c1 == t || c2 == t) throw ConfigError("CCNOT needs 3 qubits");
    seq.append(ccnot(t, control_pattern(t, {{c1, 1}, {c2, 1}}, mode_count),
                     mode_count));
  } else if (op == "CCZ") {
    require_args(1);
    seq.append(cctheta(parse_bits(tokens[1], mode_count), M_PI));
  } else if (op == "CCPHASE") {
    require_args(2);
    seq.append(cctheta(parse_bits(tokens[1], mode_count), std::stod(tokens[2])));
  } else {
    throw ConfigError("unsupported gate: " + op);
  }
  return seq;
}

GateSequence compile_program(const std::string& program_text, int mode_count) {
  GateSequence seq;
  seq.mode_count = mode_count;
  seq.source_name = "program";
  std::istringstream is(program_text);
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (tokenize(line).empty()) continue;
    seq.append(compile_standard(line, mode_count));
  }
  return seq;
}

Eigen::MatrixXcd sequence_unitary(const GateSequence& seq) {
  const int dim = 1 << seq.mode_count;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  FrameTracker frames(seq.mode_count);
  FrameTracker group_frames = frames;
  int current_group = -1;

  // Simultaneous pulses use the frames from the start of their group and
  // must not share an energy level.
  std::set<int> group_levels;

  for (const auto& item : seq.items) {
    if (item.kind == SequenceItem::Kind::virtual_phase) {
      frames.add_state_phase(basis_index(item.basis), item.phase);
      current_group = -1;
      continue;
    }
    const NativeGate& g = item.gate;
    const FrameTracker* ref = &frames;
    if (g.parallel_group >= 0) {
      if (g.parallel_group != current_group) {
        current_group = g.parallel_group;
        group_frames = frames;
        group_levels.clear();
      }
      const int lo = basis_index(g.transition.lower_state());
      const int hi = basis_index(g.transition.upper_state());
      if (!group_levels.insert(lo).second || !group_levels.insert(hi).second) {
        throw ConfigError("parallel pulses share an energy level");
      }
      ref = &group_frames;
    } else {
      current_group = -1;
    }
    const double phi_eff = g.phi + ref->offset(g.transition);
    u = ccr_matrix(g.transition, phi_eff, g.theta, seq.mode_count) * u;
  }

  Eigen::VectorXcd residual(dim);
  for (int k = 0; k < dim; ++k) {
    residual(k) = std::exp(std::complex<double>(0.0, frames.state_phase(k)));
  }
  return residual.asDiagonal() * u;
}

namespace {

Eigen::MatrixXcd kron2(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXcd one_qubit_embed(const Eigen::Matrix2cd& m, int qubit,
                                 int mode_count) {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(1, 1);
  for (int k = 0; k < mode_count; ++k) {
    u = kron2(u, k == qubit ? Eigen::MatrixXcd(m)
                            : Eigen::MatrixXcd(Eigen::Matrix2cd::Identity()));
  }
  return u;
}

}  // namespace

Eigen::MatrixXcd ideal_unitary(const std::string& line, int mode_count) {
  const auto tokens = tokenize(line);
  if (tokens.empty()) throw ConfigError("empty gate line");
  const std::string& op = tokens[0];
  const int dim = 1 << mode_count;
  const std::complex<double> i1(0.0, 1.0);

  auto bitflip_matrix = [&](auto&& mapped_index) {
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) u(mapped_index(k), k) = 1.0;
    return u;
  };

  if (op == "X" || op == "Y") {
    const int q = parse_qubit(tokens[1], mode_count);
    Eigen::Matrix2cd m;
    if (op == "X") {
      m << 0, 1, 1, 0;
    } else {
      m << 0, -i1, i1, 0;
    }
    return one_qubit_embed(m, q, mode_count);
  }
  if (op == "R") {
    const int q = parse_qubit(tokens[1], mode_count);
    const double theta = std::stod(tokens[2]);
    const double phi = std::stod(tokens[3]);
    Eigen::Matrix2cd m;
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    m << c, -s * std::exp(-i1 * phi), s * std::exp(i1 * phi), c;
    return one_qubit_embed(m, q, mode_count);
  }
  if (op == "Z") {
    const int q = parse_qubit(tokens[1], mode_count);
    Eigen::Matrix2cd m;
    m << 1, 0, 0, -1;
    return one_qubit_embed(m, q, mode_count);
  }
  if (op == "CNOT") {
    const int c = parse_qubit(tokens[1], mode_count);
    const int t = parse_qubit(tokens[2], mode_count);
    return bitflip_matrix([&](int k) {
      const int cbit = (k >> (mode_count - 1 - c)) & 1;
      return cbit ? k ^ (1 << (mode_count - 1 - t)) : k;
    });
  }
  if (op == "CZ") {
    const int a = parse_qubit(tokens[1], mode_count);
    const int b = parse_qubit(tokens[2], mode_count);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (int k = 0; k < dim; ++k) {
      if (((k >> (mode_count - 1 - a)) & 1) &&
          ((k >> (mode_count - 1 - b)) & 1)) {
        u(k, k) = -1.0;
      }
    }
    return u;
  }
  if (op == "SWAP") {
    const int a = parse_qubit(tokens[1], mode_count);
    const int b = parse_qubit(tokens[2], mode_count);
    return bitflip_matrix([&](int k) {
      const int ba = (k >> (mode_count - 1 - a)) & 1;
      const int bb = (k >> (mode_count - 1 - b)) & 1;
      if (ba == bb) return k;
      return k ^ (1 << (mode_count - 1 - a)) ^ (1 << (mode_count - 1 - b));
    });
  }
  if (op == "FREDKIN") {
    const int c = parse_qubit(tokens[1], mode_count);
    const int a = parse_qubit(tokens[2], mode_count);
    const int b = parse_qubit(tokens[3], mode_count);
    return bitflip_matrix([&](int k) {
      if (!((k >> (mode_count - 1 - c)) & 1)) return k;
      const int ba = (k >> (mode_count - 1 - a)) & 1;
      const int bb = (k >> (mode_count - 1 - b)) & 1;
      if (ba == bb) return k;
      return k ^ (1 << (mode_count - 1 - a)) ^ (1 << (mode_count - 1 - b));
    });
  }
  if (op == "CCNOT") {
    const int c1 = parse_qubit(tokens[1], mode_count);
    const int c2 = parse_qubit(tokens[2], mode_count);
    const int t = parse_qubit(tokens[3], mode_count);
    return bitflip_matrix([&](int k) {
      const bool on = ((k >> (mode_count - 1 - c1)) & 1) &&
                      ((k >> (mode_count - 1 - c2)) & 1);
      return on ? k ^ (1 << (mode_count - 1 - t)) : k;
    });
  }
  if (op == "CCZ" || op == "CCPHASE") {
    const auto bits = parse_bits(tokens[1], mode_count);
    const double theta = op == "CCZ" ? M_PI : std::stod(tokens[2]);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    u(basis_index(bits), basis_index(bits)) = std::exp(i1 * theta);
    return u;
  }
  throw ConfigError("unsupported gate: " + op);
}

double phase_aligned_distance(const Eigen::MatrixXcd& u,
                              const Eigen::MatrixXcd& v) {
  const std::complex<double> tr = (v.adjoint() * u).trace();
  const std::complex<double> phase =
      std::abs(tr) > 0 ? tr / std::abs(tr) : std::complex<double>(1.0, 0.0);
  return (u - phase * v).cwiseAbs().maxCoeff();
}

std::string sequence_to_text(const GateSequence& seq) {
  std::ostringstream os;
  os.precision(10);
  os << "# compiled from: " << seq.source_name << "\n";
  os << "# pulses (transition, theta_rad, phi_programmed, phi_effective)\n";
  FrameTracker frames(seq.mode_count);
  int n = 0;
  for (const auto& item : seq.items) {
    if (item.kind == SequenceItem::Kind::virtual_phase) {
      frames.add_state_phase(basis_index(item.basis), item.phase);
      continue;
    }
    const NativeGate& g = item.gate;
    os << "pulse " << ++n << " " << g.transition.str() << " " << g.theta << " "
       << g.phi << " " << g.phi + frames.offset(g.transition);
    if (g.parallel_group >= 0) os << " parallel:" << g.parallel_group;
    os << "\n";
  }
  os << "# final frame offsets (transition, radians)\n";
  for (const auto& [label, off] : seq.final_frames().phase_offsets()) {
    os << "frame " << label << " " << off << "\n";
  }
  return os.str();
}

}  // namespace multimon
