#include "multimon/pulsesim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>

#include "multimon/constants.hpp"
#include "multimon/errors.hpp"

namespace multimon {

void PulseSchedule::validate() const {
  for (const auto& s : segments) {
    if (!(s.duration_ns > 0.0)) throw ConfigError("segment duration must be > 0");
    if (!std::isfinite(s.amplitude_ghz)) throw ConfigError("bad amplitude");
  }
}

DensityMatrix DensityMatrix::ground(const std::vector<int>& dims) {
  long d = 1;
  for (int k : dims) d *= k;
  DensityMatrix out;
  out.dims = dims;
  out.rho = Eigen::MatrixXcd::Zero(d, d);
  out.rho(0, 0) = 1.0;
  return out;
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi,
                                  const std::vector<int>& dims) {
  DensityMatrix out;
  out.dims = dims;
  out.rho = psi * psi.adjoint();
  out.rho /= out.rho.trace().real();
  return out;
}

std::vector<int> DensityMatrix::occupation(long flat) const {
  std::vector<int> occ(dims.size());
  for (int mu = static_cast<int>(dims.size()) - 1; mu >= 0; --mu) {
    occ[mu] = flat % dims[mu];
    flat /= dims[mu];
  }
  return occ;
}

long DensityMatrix::flat_index(const std::vector<int>& occ) const {
  long idx = 0;
  for (size_t mu = 0; mu < dims.size(); ++mu) idx = idx * dims[mu] + occ[mu];
  return idx;
}

void DensityMatrix::validate(double trace_tol) const {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw PhysicsError("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > trace_tol) {
    throw PhysicsError("density matrix trace deviates from one");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  if (es.eigenvalues().minCoeff() < -1e-8) {
    throw PhysicsError("density matrix has a negative eigenvalue");
  }
}

LindbladSimulator::LindbladSimulator(const KerrTensor& kerr,
                                     const std::vector<double>& omega,
                                     const SimulationConfig& config)
    : modes_(kerr.mode_count()), config_(config), kerr_(kerr), omega_(omega) {
  if (config_.levels_per_mode < 2) {
    throw ConfigError("levels_per_mode must be at least 2");
  }
  if (config_.levels_per_mode < 3) {
    std::cerr << "note: levels_per_mode < 3 disables leakage physics\n";
  }
  if (!config_.t1_us.empty() &&
      static_cast<int>(config_.t1_us.size()) != modes_) {
    throw ConfigError("t1_us must list one value per mode");
  }
  dim_ = 1;
  for (int mu = 0; mu < modes_; ++mu) dim_ *= config_.levels_per_mode;
  strides_.assign(modes_, 1);
  for (int mu = modes_ - 2; mu >= 0; --mu) {
    strides_[mu] = strides_[mu + 1] * config_.levels_per_mode;
  }
  energies_.resize(dim_);
  total_occ_.resize(dim_);
  for (long r = 0; r < dim_; ++r) {
    std::vector<int> occ(modes_);
    long rem = r;
    double tot = 0.0;
    for (int mu = modes_ - 1; mu >= 0; --mu) {
      occ[mu] = static_cast<int>(rem % config_.levels_per_mode);
      rem /= config_.levels_per_mode;
      tot += occ[mu];
    }
    energies_[r] = eq9_energy(kerr_, omega_, occ, config_.include_three_body);
    total_occ_[r] = tot;
  }
  gamma_.assign(modes_, 0.0);
  for (int mu = 0; mu < modes_ && !config_.t1_us.empty(); ++mu) {
    if (config_.t1_us[mu] > 0.0) gamma_[mu] = 1.0 / (config_.t1_us[mu] * 1e3);
  }
}

double LindbladSimulator::energy(const std::vector<int>& occ) const {
  long idx = 0;
  for (int mu = 0; mu < modes_; ++mu) idx += strides_[mu] * occ[mu];
  return energies_[idx];
}

double LindbladSimulator::transition_frequency(const TransitionLabel& t) const {
  return energy(t.upper_state()) - energy(t.lower_state());
}

std::vector<int> LindbladSimulator::fock_dims() const {
  return std::vector<int>(modes_, config_.levels_per_mode);
}

PulseSession::PulseSession(const LindbladSimulator& sim, DensityMatrix rho)
    : sim_(sim), rho_(std::move(rho)) {
  if (rho_.dim() != sim.dim()) throw ConfigError("state dimension mismatch");
}

void PulseSession::enter_frame(double carrier_ghz) {
  if (frame_set_ && carrier_ghz == frame_ghz_) return;
  const double delta = kTwoPi * (carrier_ghz - (frame_set_ ? frame_ghz_ : 0.0));
  if (time_ns_ != 0.0) {
    for (long r = 0; r < rho_.dim(); ++r) {
      for (long c = 0; c < rho_.dim(); ++c) {
        const double ang =
            delta * time_ns_ * (sim_.total_occ_[r] - sim_.total_occ_[c]);
        rho_.rho(r, c) *= std::exp(std::complex<double>(0.0, ang));
      }
    }
  }
  frame_ghz_ = carrier_ghz;
  frame_set_ = true;
}

Eigen::MatrixXcd LindbladSimulator::rotating_frame_hamiltonian(
    const PulseSegment& segment, double frame_ghz) const {
  const long d = dim_;
  const int levels = config_.levels_per_mode;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  for (long r = 0; r < d; ++r) {
    h(r, r) = kTwoPi * (energies_[r] - frame_ghz * total_occ_[r]);
  }
  if (segment.amplitude_ghz != 0.0) {
    // Drive phase fixed so that `segment.phase` is the CCR azimuth.
    const std::complex<double> eid =
        std::exp(std::complex<double>(0.0, -(segment.phase + M_PI / 2.0)));
    auto add_mode_drive = [&](int mu, double weight) {
      const double g = kTwoPi * segment.amplitude_ghz * weight;
      for (long c = 0; c < d; ++c) {
        const int n = static_cast<int>(c / strides_[mu]) % levels;
        if (n > 0) {
          const long r = c - strides_[mu];
          const std::complex<double> el = g * std::sqrt(double(n)) * eid;
          h(r, c) += el;             // a term
          h(c, r) += std::conj(el);  // a^dag term
        }
      }
    };
    if (segment.drive_mode >= 0) {
      add_mode_drive(segment.drive_mode, 1.0);
    } else {
      if (static_cast<int>(config_.drive_weights.size()) != modes_) {
        throw ConfigError("weighted drive needs drive_weights per mode");
      }
      for (int mu = 0; mu < modes_; ++mu) {
        add_mode_drive(mu, config_.drive_weights[mu]);
      }
    }
  }
  return h;
}

std::vector<double> LindbladSimulator::parasitic_phases(
    const TransitionLabel& transition, double theta,
    double pi_length_ns) const {
  PulseSegment seg;
  seg.amplitude_ghz = 1.0 / (4.0 * pi_length_ns);
  seg.carrier_ghz = calibrated_carrier(transition, seg.amplitude_ghz);
  seg.duration_ns = pi_length_ns * theta / M_PI;
  seg.phase = 0.0;  // diagonal phases are independent of the drive phase
  seg.drive_mode = transition.target;
  const Eigen::MatrixXcd h = rotating_frame_hamiltonian(seg, seg.carrier_ghz);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd ph(dim_);
  for (long k = 0; k < dim_; ++k) {
    ph(k) = std::exp(std::complex<double>(0.0,
                                          -es.eigenvalues()(k) * seg.duration_ns));
  }
  const Eigen::MatrixXcd u =
      es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();

  const int nbits = modes_;
  auto comp_flat = [&](int k) {
    long flat = 0;
    for (int mu = 0; mu < nbits; ++mu) {
      flat += strides_[mu] * ((k >> (nbits - 1 - mu)) & 1);
    }
    return flat;
  };
  auto int_phase = [&](long flat) {
    return kTwoPi * (energies_[flat] - seg.carrier_ghz * total_occ_[flat]) *
           seg.duration_ns;
  };
  const int lo = basis_index(transition.lower_state());
  const int hi = basis_index(transition.upper_state());
  std::vector<double> delta(1 << nbits, 0.0);
  for (int k = 0; k < (1 << nbits); ++k) {
    const long flat = comp_flat(k);
    if (k == lo || k == hi) continue;
    delta[k] = std::arg(u(flat, flat) *
                        std::exp(std::complex<double>(0.0, int_phase(flat))));
  }
  // Driven pair: align each interaction-frame row with the ideal CCR row
  // (branch-safe for any rotation angle).
  const long flo = comp_flat(lo), fhi = comp_flat(hi);
  const double c = std::cos(theta / 2.0), sn = std::sin(theta / 2.0);
  const std::complex<double> glo =
      std::exp(std::complex<double>(0.0, int_phase(flo)));
  const std::complex<double> ghi =
      std::exp(std::complex<double>(0.0, int_phase(fhi)));
  delta[lo] = std::arg(glo * (u(flo, flo) * c + u(flo, fhi) * (-sn)));
  delta[hi] = std::arg(ghi * (u(fhi, flo) * sn + u(fhi, fhi) * c));
  return delta;
}

double LindbladSimulator::calibrated_carrier(const TransitionLabel& transition,
                                              double amplitude_ghz) const {
  const double bare = transition_frequency(transition);
  PulseSegment seg;
  seg.carrier_ghz = bare;
  seg.amplitude_ghz = amplitude_ghz;
  seg.phase = 0.0;
  seg.drive_mode = transition.target;
  const Eigen::MatrixXcd h = rotating_frame_hamiltonian(seg, bare);

  auto comp_flat = [&](const std::vector<int>& occ) {
    long flat = 0;
    for (int mu = 0; mu < modes_; ++mu) flat += strides_[mu] * occ[mu];
    return flat;
  };
  const long flo = comp_flat(transition.lower_state());
  const long fhi = comp_flat(transition.upper_state());
  // Second-order Stark shifts of the pair from all off-resonant couplings.
  auto shift = [&](long m, long exclude) {
    double s = 0.0;
    for (long k = 0; k < dim_; ++k) {
      if (k == m || k == exclude) continue;
      const double num = std::norm(h(k, m));
      if (num == 0.0) continue;
      s += num / (h(m, m).real() - h(k, k).real());
    }
    return s;
  };
  const double delta = shift(fhi, flo) - shift(flo, fhi);
  return bare + delta / kTwoPi;
}

void PulseSession::apply(const PulseSegment& segment, bool dissipative) {
  const long d = sim_.dim();
  const int modes = sim_.mode_count();
  const int levels = sim_.levels();
  if (segment.amplitude_ghz != 0.0) {
    enter_frame(segment.carrier_ghz);
  }
  const double frame = frame_set_ ? frame_ghz_ : 0.0;
  const Eigen::MatrixXcd h = sim_.rotating_frame_hamiltonian(segment, frame);

  bool has_decay = false;
  for (double g : sim_.gamma_) has_decay |= g > 0.0;
  has_decay &= dissipative;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::MatrixXcd& q = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();
  auto propagator = [&](double t) {
    Eigen::VectorXcd ph(d);
    for (long k = 0; k < d; ++k) {
      ph(k) = std::exp(std::complex<double>(0.0, -lam(k) * t));
    }
    return Eigen::MatrixXcd(q * ph.asDiagonal() * q.adjoint());
  };

  if (!has_decay) {
    // Piecewise-constant generator: one exact unitary step.
    const Eigen::MatrixXcd u = propagator(segment.duration_ns);
    rho_.rho = u * rho_.rho * u.adjoint();
  } else {
    const int steps = std::max(
        1, static_cast<int>(std::ceil(segment.duration_ns / sim_.config_.step_ns)));
    const double dt = segment.duration_ns / steps;
    const Eigen::MatrixXcd uh = propagator(dt / 2.0);
    const Eigen::MatrixXcd uf = propagator(dt);

    // Split step: exact unitary, exact coherence decay, second-order
    // accurate jump repopulation (evaluated on the half-decayed state).
    Eigen::VectorXd w(d);
    for (long r = 0; r < d; ++r) {
      double s = 0.0;
      long rem = r;
      for (int mu = modes - 1; mu >= 0; --mu) {
        const int n = static_cast<int>(rem % levels);
        rem /= levels;
        s += 0.5 * sim_.gamma_[mu] * n;
      }
      w(r) = s;
    }
    Eigen::MatrixXcd half(d, d), jump(d, d);
    auto damp = [&](Eigen::MatrixXcd& rho) {
      for (long r = 0; r < d; ++r) {
        for (long c = 0; c < d; ++c) {
          half(r, c) = rho(r, c) * std::exp(-(w(r) + w(c)) * dt / 2.0);
        }
      }
      jump.setZero();
      for (int mu = 0; mu < modes; ++mu) {
        if (sim_.gamma_[mu] == 0.0) continue;
        const long st = sim_.strides_[mu];
        for (long r = 0; r < d; ++r) {
          const int nr = static_cast<int>(r / st) % levels;
          if (nr + 1 >= levels) continue;
          for (long c = 0; c < d; ++c) {
            const int nc = static_cast<int>(c / st) % levels;
            if (nc + 1 >= levels) continue;
            jump(r, c) += sim_.gamma_[mu] *
                          std::sqrt(double(nr + 1) * double(nc + 1)) *
                          half(r + st, c + st);
          }
        }
      }
      for (long r = 0; r < d; ++r) {
        for (long c = 0; c < d; ++c) {
          rho(r, c) = half(r, c) * std::exp(-(w(r) + w(c)) * dt / 2.0) +
                      dt * jump(r, c);
        }
      }
    };

    rho_.rho = uh * rho_.rho * uh.adjoint();
    damp(rho_.rho);
    for (int k = 1; k < steps; ++k) {
      rho_.rho = uf * rho_.rho * uf.adjoint();
      damp(rho_.rho);
    }
    rho_.rho = uh * rho_.rho * uh.adjoint();
  }
  time_ns_ += segment.duration_ns;
}

std::vector<double> PulseSession::computational_populations() const {
  const int modes = sim_.mode_count();
  std::vector<double> pops(1 << modes, 0.0);
  for (int k = 0; k < (1 << modes); ++k) {
    long flat = 0;
    for (int mu = 0; mu < modes; ++mu) {
      flat += sim_.strides_[mu] * ((k >> (modes - 1 - mu)) & 1);
    }
    pops[k] = rho_.rho(flat, flat).real();
  }
  return pops;
}

double PulseSession::leakage() const {
  double comp = 0.0;
  for (double p : computational_populations()) comp += p;
  return rho_.rho.trace().real() - comp;
}

DensityMatrix PulseSession::state() const {
  DensityMatrix out = rho_;
  const double frame = frame_set_ ? frame_ghz_ : 0.0;
  for (long r = 0; r < out.dim(); ++r) {
    for (long c = 0; c < out.dim(); ++c) {
      const double ang = kTwoPi *
                         ((sim_.energies_[r] - sim_.energies_[c]) -
                          frame * (sim_.total_occ_[r] - sim_.total_occ_[c])) *
                         time_ns_;
      out.rho(r, c) *= std::exp(std::complex<double>(0.0, ang));
    }
  }
  return out;
}

DensityMatrix evolve(const DensityMatrix& initial, const PulseSchedule& schedule,
                     const KerrTensor& kerr, const std::vector<double>& omega,
                     const SimulationConfig& config) {
  schedule.validate();
  LindbladSimulator sim(kerr, omega, config);
  PulseSession session(sim, initial);
  for (const auto& seg : schedule.segments) session.apply(seg, true);
  return session.state();
}

// ---------------------------------------------------------------------------
// Tomography

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

Eigen::MatrixXcd ideal_rotation(int qubit, double theta, double phi,
                                int mode_count) {
  Eigen::Matrix2cd m;
  const std::complex<double> i1(0.0, 1.0);
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  m << c, -s * std::exp(-i1 * phi), s * std::exp(i1 * phi), c;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(1, 1);
  for (int k = 0; k < mode_count; ++k) {
    u = kron2(u, k == qubit ? Eigen::MatrixXcd(m)
                            : Eigen::MatrixXcd(Eigen::Matrix2cd::Identity()));
  }
  return u;
}

Eigen::MatrixXcd ideal_ccnot_flip(const TransitionLabel& t) {
  const int dim = 1 << t.mode_count();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  const int lo = basis_index(t.lower_state());
  const int hi = basis_index(t.upper_state());
  u(lo, lo) = 0.0;
  u(hi, hi) = 0.0;
  u(lo, hi) = 1.0;
  u(hi, lo) = 1.0;
  return u;
}

// Population-swap pulses of each measurement round; each round is a fresh
// run of the experiment and swaps its basis pair into the readout slots:
// round 2 exposes 001/110, round 3 010/101, round 4 100/011.
std::vector<TransitionLabel> round_swaps(int round) {
  switch (round) {
    case 2:
      return {parse_transition("CA0B0", 3), parse_transition("CA1B1", 3)};
    case 3:
      return {parse_transition("BC0A0", 3), parse_transition("BC1A1", 3)};
    case 4:
      return {parse_transition("AB0C0", 3), parse_transition("AB1C1", 3)};
    default:
      return {};
  }
}

}  // namespace

TomographyData tomography(const GateSequence& prep, const ExperimentSetup& setup) {
  const int modes = 3;
  if (prep.mode_count != modes) throw ConfigError("tomography expects 3 qubits");
  LindbladSimulator sim(setup.kerr, setup.omega, setup.config);

  std::mt19937_64 rng(setup.config.seed);
  std::normal_distribution<double> noise(0.0, setup.config.readout_noise_sigma);

  // Pre-rotation menu per qubit: identity, X/2 (phi = -pi/2), Y/2 (phi = 0).
  const std::vector<std::pair<bool, double>> prerot = {
      {false, 0.0}, {true, -M_PI / 2.0}, {true, 0.0}};

  TomographyData out;

  std::map<std::string, double> carrier_cache;
  auto pulse_segment = [&](const NativeGate& g, double phi_eff) {
    PulseSegment seg;
    seg.amplitude_ghz = 1.0 / (4.0 * setup.pi_length_ns);
    auto it = carrier_cache.find(g.transition.str());
    if (it == carrier_cache.end()) {
      it = carrier_cache
               .emplace(g.transition.str(),
                        sim.calibrated_carrier(g.transition, seg.amplitude_ghz))
               .first;
    }
    seg.carrier_ghz = it->second;
    seg.duration_ns = setup.pi_length_ns * g.theta / M_PI;
    seg.phase = phi_eff;
    seg.drive_mode = setup.ideal_drive ? g.transition.target : -1;
    return seg;
  };

  // Calibrated virtual-phase corrections for the deterministic Stark
  // phases of each pulse shape.
  std::map<std::pair<std::string, long>, std::vector<double>> calib;
  auto corrections = [&](const NativeGate& g) -> const std::vector<double>& {
    const auto key = std::make_pair(g.transition.str(),
                                    std::lround(g.theta * 1e9));
    auto it = calib.find(key);
    if (it == calib.end()) {
      it = calib
               .emplace(key, sim.parasitic_phases(g.transition, g.theta,
                                                  setup.pi_length_ns))
               .first;
    }
    return it->second;
  };

  for (int setting = 0; setting < 27; ++setting) {
    const std::array<int, 3> choice = {setting / 9, (setting / 3) % 3,
                                       setting % 3};

    Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(8, 8);
    for (int q = 0; q < 3; ++q) {
      if (prerot[choice[q]].first) {
        v = ideal_rotation(q, M_PI / 2.0, prerot[choice[q]].second, modes) * v;
      }
    }

    for (int round = 1; round <= 4; ++round) {
      GateSequence all = prep;
      const size_t prep_end = all.items.size();
      for (int q = 0; q < 3; ++q) {
        if (prerot[choice[q]].first) {
          all.append(single_qubit_rotation(q, M_PI / 2.0,
                                           prerot[choice[q]].second, modes));
        }
      }
      Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(8, 8);
      for (const auto& t : round_swaps(round)) {
        all.append(ccnot(t.target, t.controls, modes));
        w = ideal_ccnot_flip(t) * w;
      }

      PulseSession session(sim, DensityMatrix::ground(sim.fock_dims()));
      FrameTracker frames(modes);
      for (size_t item_idx = 0; item_idx < all.items.size(); ++item_idx) {
        const auto& item = all.items[item_idx];
        if (item.kind == SequenceItem::Kind::virtual_phase) {
          frames.add_state_phase(basis_index(item.basis), item.phase);
          continue;
        }
        if (item.gate.theta == 0.0) continue;
        const bool in_prep = item_idx < prep_end;
        const bool dissipative =
            (setup.decoherence == DecoherenceMode::prep_and_tomo) ||
            (setup.decoherence == DecoherenceMode::prep_only && in_prep);
        const double phi_eff =
            item.gate.phi + frames.offset(item.gate.transition);
        session.apply(pulse_segment(item.gate, phi_eff), dissipative);
        if (setup.calibrated_frames) {
          const auto& delta = corrections(item.gate);
          for (int m = 0; m < 8; ++m) frames.add_state_phase(m, -delta[m]);
        }
      }

      const auto pops = session.computational_populations();
      for (int slot : {0, 7}) {
        TomographyDatum datum;
        Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(8, 8);
        proj(slot, slot) = 1.0;
        datum.povm = v.adjoint() * w.adjoint() * proj * w * v;
        datum.value = pops[slot];
        if (setup.config.readout_noise_sigma > 0.0) {
          datum.value = std::clamp(datum.value + noise(rng), 0.0, 1.0);
        }
        out.data.push_back(datum);
      }
    }
  }
  return out;
}

DensityMatrix mle_reconstruct(const TomographyData& data, int mode_count,
                              int max_iterations, double ll_tolerance) {
  const int dim = 1 << mode_count;
  const int count = static_cast<int>(data.data.size());
  if (count == 0) throw ConfigError("no tomography data");

  // The POVM elements must span the space of Hermitian operators.
  Eigen::MatrixXd basis(dim * dim, count);
  for (int k = 0; k < count; ++k) {
    int row = 0;
    for (int i = 0; i < dim; ++i) basis(row++, k) = data.data[k].povm(i, i).real();
    for (int i = 0; i < dim; ++i) {
      for (int j = i + 1; j < dim; ++j) {
        basis(row++, k) = data.data[k].povm(i, j).real();
        basis(row++, k) = data.data[k].povm(i, j).imag();
      }
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int k = 0; k < sv.size(); ++k) {
    if (sv(k) > 1e-9 * sv(0)) ++rank;
  }
  if (rank < dim * dim) {
    throw ConfigError("tomography data is not informationally complete");
  }

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(dim, dim) / dim;
  const double eps = 0.5;  // dilution
  double last_ll = -1e300;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(dim, dim);
    double ll = 0.0;
    double ysum = 0.0;
    for (const auto& d : data.data) {
      const double p = std::max((d.povm * rho).trace().real(), 1e-12);
      const double y = std::max(d.value, 0.0);
      ll -= 0.5 * (d.value - p) * (d.value - p);
      r += (y / p) * d.povm;
      ysum += y;
    }
    r /= std::max(ysum, 1e-12);
    const Eigen::MatrixXcd g = Eigen::MatrixXcd::Identity(dim, dim) + eps * r;
    rho = g * rho * g.adjoint();
    rho = 0.5 * (rho + Eigen::MatrixXcd(rho.adjoint()));
    rho /= rho.trace().real();
    if (std::abs(ll - last_ll) < ll_tolerance * std::max(1.0, std::abs(ll))) {
      break;
    }
    last_ll = ll;
  }

  DensityMatrix out;
  out.dims = std::vector<int>(mode_count, 2);
  out.rho = rho;
  return out;
}

double fidelity(const DensityMatrix& rho_est, const DensityMatrix& rho_ideal) {
  if (rho_est.dim() != rho_ideal.dim()) {
    throw ConfigError("fidelity arguments have different dimensions");
  }
  auto psd_sqrt = [](const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.eigenvalues().minCoeff() < -1e-8) {
      throw PhysicsError("fidelity input is not positive semidefinite");
    }
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return Eigen::MatrixXcd(es.eigenvectors() * lam.asDiagonal() *
                            es.eigenvectors().adjoint());
  };
  const Eigen::MatrixXcd a = psd_sqrt(rho_ideal.rho);
  const Eigen::MatrixXcd m = a * rho_est.rho * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  double f = 0.0;
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    f += std::sqrt(std::max(0.0, es.eigenvalues()(k)));
  }
  return std::min(1.0, f);
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

GateSequence conditional_pulse(const std::string& label, double theta,
                               double phi) {
  GateSequence seq;
  seq.mode_count = 3;
  seq.source_name = "pulse@" + label;
  SequenceItem item;
  item.kind = SequenceItem::Kind::pulse;
  item.gate.transition = parse_transition(label, 3);
  item.gate.theta = theta;
  item.gate.phi = phi;
  seq.items.push_back(item);
  return seq;
}

}  // namespace

GateSequence preparation_sequence(const std::string& state_name) {
  GateSequence seq;
  seq.mode_count = 3;
  seq.source_name = "prep:" + state_name;
  const double half = M_PI / 2.0;
  if (state_name == "bell-ab") {
    seq.append(conditional_pulse("AB0C0", half, 0.0));
    seq.append(ccnot(1, {0, 1}, 3));  // flip B when C=0, A=1
  } else if (state_name == "bell-bc") {
    seq.append(conditional_pulse("BC0A0", half, 0.0));
    seq.append(ccnot(2, {0, 1}, 3));  // flip C when A=0, B=1
  } else if (state_name == "bell-ca") {
    seq.append(conditional_pulse("AB0C0", half, 0.0));
    seq.append(ccnot(2, {1, 0}, 3));  // flip C when A=1, B=0
  } else if (state_name == "ghz") {
    seq.append(conditional_pulse("AB0C0", half, 0.0));
    seq.append(ccnot(1, {0, 1}, 3));
    seq.append(ccnot(2, {1, 1}, 3));
  } else if (state_name == "w") {
    const double theta_w = 2.0 * std::acos(std::sqrt(2.0 / 3.0));
    seq.append(conditional_pulse("AB0C0", theta_w, 0.0));
    seq.append(conditional_pulse("BC0A0", half, 0.0));
    seq.append(ccnot(2, {0, 0}, 3));
  } else if (state_name == "w2") {
    const double theta_w = 2.0 * std::acos(std::sqrt(2.0 / 3.0));
    seq.append(conditional_pulse("AB0C0", theta_w, 0.0));
    seq.append(ccnot(2, {1, 0}, 3));
    seq.append(conditional_pulse("BC0A0", half, 0.0));
    seq.append(ccnot(2, {0, 1}, 3));
    seq.append(ccnot(0, {0, 0}, 3));
    seq.append(ccnot(1, {0, 1}, 3));
  } else if (state_name == "plus") {
    // Conditional pulses only on populated control branches.
    seq.append(conditional_pulse("AB0C0", half, 0.0));
    seq.append(conditional_pulse("BC0A0", half, 0.0));
    seq.append(conditional_pulse("BC0A1", half, 0.0));
    for (const char* label : {"CA0B0", "CA0B1", "CA1B0", "CA1B1"}) {
      seq.append(conditional_pulse(label, half, 0.0));
    }
  } else {
    throw ConfigError("unknown state: " + state_name);
  }
  return seq;
}

ExperimentResult run_experiment(const GateSequence& prep,
                                const ExperimentSetup& setup) {
  ExperimentResult out;
  out.ideal_state = sequence_unitary(prep).col(0);

  // Prep-only pass for leakage and duration bookkeeping.
  {
    LindbladSimulator sim(setup.kerr, setup.omega, setup.config);
    PulseSession session(sim, DensityMatrix::ground(sim.fock_dims()));
    FrameTracker frames(3);
    for (const auto& item : prep.items) {
      if (item.kind == SequenceItem::Kind::virtual_phase) {
        frames.add_state_phase(basis_index(item.basis), item.phase);
        continue;
      }
      if (item.gate.theta == 0.0) continue;
      PulseSegment seg;
      seg.amplitude_ghz = 1.0 / (4.0 * setup.pi_length_ns);
      seg.carrier_ghz =
          sim.calibrated_carrier(item.gate.transition, seg.amplitude_ghz);
      seg.duration_ns = setup.pi_length_ns * item.gate.theta / M_PI;
      seg.phase = item.gate.phi + frames.offset(item.gate.transition);
      seg.drive_mode = setup.ideal_drive ? item.gate.transition.target : -1;
      session.apply(seg, setup.decoherence != DecoherenceMode::none);
      if (setup.calibrated_frames) {
        const auto delta = sim.parasitic_phases(
            item.gate.transition, item.gate.theta, setup.pi_length_ns);
        for (int m = 0; m < 8; ++m) frames.add_state_phase(m, -delta[m]);
      }
      ++out.pulse_count;
      out.prep_duration_ns += seg.duration_ns;
    }
    out.prep_leakage = session.leakage();
  }

  const TomographyData data = tomography(prep, setup);
  out.rho_mle = mle_reconstruct(data);
  DensityMatrix ideal = DensityMatrix::pure(out.ideal_state, {2, 2, 2});
  out.fidelity = fidelity(out.rho_mle, ideal);
  return out;
}

ExperimentResult run_experiment(const std::string& state_name,
                                const ExperimentSetup& setup) {
  return run_experiment(preparation_sequence(state_name), setup);
}

// ---------------------------------------------------------------------------
// Randomized benchmarking

namespace {

struct CliffordElement {
  Eigen::Matrix2cd matrix;
  std::vector<int> pulses;  // indices into the generator list
};

struct Generator {
  double theta;
  double phi;
};

const std::vector<Generator>& rb_generators() {
  static const std::vector<Generator> g = {
      {M_PI, -M_PI / 2.0},        // X
      {M_PI, 0.0},                // Y
      {M_PI / 2.0, -M_PI / 2.0},  // X/2
      {M_PI / 2.0, M_PI / 2.0},   // -X/2
      {M_PI / 2.0, 0.0},          // Y/2
      {M_PI / 2.0, M_PI},         // -Y/2
  };
  return g;
}

Eigen::Matrix2cd rotation2(double theta, double phi) {
  Eigen::Matrix2cd m;
  const std::complex<double> i1(0.0, 1.0);
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
  m << c, -s * std::exp(-i1 * phi), s * std::exp(i1 * phi), c;
  return m;
}

std::string canonical_key(const Eigen::Matrix2cd& m) {
  // Quotient out the global phase: rotate the first sizable entry (scan
  // order is deterministic; Clifford entries are 0, 1/sqrt2 or 1) to
  // positive real.
  std::complex<double> ref(1.0, 0.0);
  for (int i = 0; i < 2 ; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (std::abs(m(i, j)) > 0.3) {
        ref = m(i, j);
        i = 2;
        break;
      }
    }
  }
  const std::complex<double> phase = ref / std::abs(ref);
  char buf[80];
  std::string key;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const std::complex<double> v = m(i, j) / phase;
      std::snprintf(buf, sizeof buf, "%ld,%ld;", std::lround(v.real() * 1e4),
                    std::lround(v.imag() * 1e4));
      key += buf;
    }
  }
  return key;
}

const std::vector<CliffordElement>& clifford_table() {
  static const std::vector<CliffordElement> table = [] {
    std::vector<CliffordElement> out;
    std::set<std::string> seen;
    CliffordElement id{Eigen::Matrix2cd::Identity(), {}};
    seen.insert(canonical_key(id.matrix));
    out.push_back(id);
    std::vector<CliffordElement> frontier = {id};
    for (int depth = 0; depth < 3 && out.size() < 24; ++depth) {
      std::vector<CliffordElement> next;
      for (const auto& el : frontier) {
        for (int g = 0; g < static_cast<int>(rb_generators().size()); ++g) {
          CliffordElement cand;
          cand.matrix =
              rotation2(rb_generators()[g].theta, rb_generators()[g].phi) *
              el.matrix;
          cand.pulses = el.pulses;
          cand.pulses.push_back(g);
          if (seen.insert(canonical_key(cand.matrix)).second) {
            out.push_back(cand);
            next.push_back(cand);
          }
        }
      }
      frontier = std::move(next);
    }
    if (out.size() != 24) throw PhysicsError("Clifford table generation failed");
    return out;
  }();
  return table;
}

int find_inverse(const Eigen::Matrix2cd& net) {
  const Eigen::Matrix2cd target = net.adjoint();
  const auto& table = clifford_table();
  int best = 0;
  double best_d = 1e300;
  for (int k = 0; k < static_cast<int>(table.size()); ++k) {
    const std::complex<double> tr = (table[k].matrix.adjoint() * target).trace();
    const double d = 2.0 - std::abs(tr);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace

RbResult randomized_benchmark(const TransitionLabel& transition,
                              const std::vector<int>& sequence_lengths,
                              int trials, const ExperimentSetup& setup) {
  if (sequence_lengths.size() < 2) {
    throw ConfigError("randomized benchmarking needs at least two lengths");
  }
  LindbladSimulator sim(setup.kerr, setup.omega, setup.config);
  const double carrier =
      sim.calibrated_carrier(transition, 1.0 / (4.0 * setup.pi_length_ns));
  DensityMatrix rho0 = DensityMatrix::ground(sim.fock_dims());
  const long lo_flat = rho0.flat_index(transition.lower_state());
  rho0.rho(0, 0) = 0.0;
  rho0.rho(lo_flat, lo_flat) = 1.0;

  std::mt19937_64 rng(setup.config.seed);

  RbResult result;
  for (int m : sequence_lengths) {
    double survival = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      Eigen::Matrix2cd net = Eigen::Matrix2cd::Identity();
      std::vector<int> gate_ids;
      for (int k = 0; k < m; ++k) {
        const int id = static_cast<int>(rng() % clifford_table().size());
        gate_ids.push_back(id);
        net = clifford_table()[id].matrix * net;
      }
      gate_ids.push_back(find_inverse(net));

      PulseSession session(sim, rho0);
      for (int id : gate_ids) {
        for (int g : clifford_table()[id].pulses) {
          const auto& gen = rb_generators()[g];
          PulseSegment seg;
          seg.carrier_ghz = carrier;
          seg.duration_ns = setup.pi_length_ns * gen.theta / M_PI;
          seg.amplitude_ghz = 1.0 / (4.0 * setup.pi_length_ns);
          seg.phase = gen.phi;
          seg.drive_mode = transition.target;
          session.apply(seg, setup.decoherence != DecoherenceMode::none);
        }
      }
      survival += session.computational_populations()[basis_index(
          transition.lower_state())];
    }
    result.lengths.push_back(m);
    result.survivals.push_back(survival / trials);
  }

  // Fit survival = A p^m + B: (A, B) by linear least squares on a p grid,
  // then golden-section refinement; flat data resolves to the largest p.
  auto fit_ab = [&](double p, double* a_out, double* b_out) {
    double sxx = 0, sx = 0, sxy = 0, sy = 0;
    const int n = static_cast<int>(result.lengths.size());
    for (int k = 0; k < n; ++k) {
      const double x = std::pow(p, result.lengths[k]);
      sxx += x * x;
      sx += x;
      sxy += x * result.survivals[k];
      sy += result.survivals[k];
    }
    const double det = sxx * n - sx * sx;
    double a = 0.0, b = sy / n;
    if (std::abs(det) > 1e-14) {
      a = (sxy * n - sx * sy) / det;
      b = (sxx * sy - sx * sxy) / det;
    }
    double chi2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double r =
          result.survivals[k] - (a * std::pow(p, result.lengths[k]) + b);
      chi2 += r * r;
    }
    *a_out = a;
    *b_out = b;
    return chi2;
  };

  double best_p = 0.999999, best_chi = 1e300, best_a = 0, best_b = 0;
  for (double p = 0.5; p <= 0.9999991; p += 0.0005) {
    double a, b;
    const double chi = fit_ab(p, &a, &b);
    // Ties (within numerical noise) resolve to the largest p, so flat
    // no-decay data reports p ~ 1 rather than an arbitrary grid point.
    if (chi < best_chi - 1e-12 ||
        (std::abs(chi - best_chi) <= 1e-12 && p > best_p)) {
      best_chi = chi;
      best_p = p;
      best_a = a;
      best_b = b;
    }
  }
  if (best_chi > 1e-12) {
    double lo = std::max(0.5, best_p - 0.001);
    double hi = std::min(0.9999999, best_p + 0.001);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double a, b;
    double f1 = fit_ab(x1, &a, &b), f2 = fit_ab(x2, &a, &b);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = fit_ab(x1, &a, &b);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = fit_ab(x2, &a, &b);
      }
    }
    const double p = 0.5 * (lo + hi);
    const double chi = fit_ab(p, &a, &b);
    if (chi <= best_chi) {
      best_p = p;
      best_chi = chi;
      best_a = a;
      best_b = b;
    }
  }

  if (best_a < -0.05) {
    throw PhysicsError("randomized benchmarking data does not decay");
  }

  result.decay_p = best_p;
  result.amplitude = best_a;
  result.baseline = best_b;
  result.average_fidelity = 1.0 - (1.0 - best_p) / 2.0;

  {
    const int n = static_cast<int>(result.lengths.size());
    const double h = 1e-4;
    double a, b;
    const double c0 = fit_ab(best_p, &a, &b);
    const double cp = fit_ab(std::min(0.9999999, best_p + h), &a, &b);
    const double cm = fit_ab(std::max(0.5, best_p - h), &a, &b);
    const double curv = (cp - 2 * c0 + cm) / (h * h);
    const double sigma2 = c0 / std::max(1, n - 3);
    result.p_stderr = curv > 0 ? std::sqrt(2.0 * sigma2 / curv) : 0.0;
  }
  return result;
}

}  // namespace multimon
