#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "multimon/compiler.hpp"
#include "multimon/errors.hpp"

using namespace multimon;
using Eigen::MatrixXcd;

TEST_CASE("conditional rotation matrix") {
  // A pi pulse with phi = -pi/2 on the fully-conditioned C transition gives
  // -i on the 110/111 block.
  const auto t = parse_transition("CA1B1", 3);
  const MatrixXcd u = ccr_matrix(t, -M_PI / 2.0, M_PI, 3);
  CHECK(std::abs(u(6, 6)) < 1e-12);
  CHECK(u(6, 7).imag() == doctest::Approx(-1.0));
  CHECK(u(7, 6).imag() == doctest::Approx(-1.0));
  for (int k = 0; k < 6; ++k) CHECK(u(k, k).real() == doctest::Approx(1.0));
  // Unitarity.
  CHECK((u.adjoint() * u - MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("generalized CCNOT replays exactly") {
  const auto seq = ccnot(2, {1, 1}, 3);
  CHECK(seq.pulse_count() == 1);
  CHECK(phase_aligned_distance(sequence_unitary(seq),
                               ideal_unitary("CCNOT A B C")) < 1e-12);
  // Involution.
  auto twice = ccnot(0, {1, 0}, 3);
  twice.append(ccnot(0, {1, 0}, 3));
  CHECK(phase_aligned_distance(sequence_unitary(twice),
                               MatrixXcd::Identity(8, 8)) < 1e-12);
}

TEST_CASE("phase-shift table after a pi pulse on qubit A") {
  struct Row {
    std::vector<int> controls;
    const char* shifted[4];
    double sign[4];
  };
  // The four rows of the CCNOT phase-shift bookkeeping: +90 when the flip
  // was conditioned on |0>, -90 when conditioned on |1>.
  const Row rows[] = {
      {{0, 0}, {"BC0A0", "BC0A1", "CA0B0", "CA1B0"}, {+1, +1, +1, +1}},
      {{0, 1}, {"BC1A0", "BC1A1", "CA0B0", "CA1B0"}, {+1, +1, -1, -1}},
      {{1, 0}, {"BC0A0", "BC0A1", "CA0B1", "CA1B1"}, {-1, -1, +1, +1}},
      {{1, 1}, {"BC1A0", "BC1A1", "CA0B1", "CA1B1"}, {-1, -1, -1, -1}},
  };
  for (const auto& row : rows) {
    const auto seq = ccnot(0, row.controls, 3);
    const auto offsets = seq.final_frames().phase_offsets();
    for (int k = 0; k < 4; ++k) {
      double expect = row.sign[k] * M_PI / 2.0;
      if (expect < 0) expect += 2 * M_PI;
      CHECK(offsets.at(row.shifted[k]) == doctest::Approx(expect));
    }
    // Unlisted transitions stay untouched.
    CHECK(offsets.at("AB0C0") == doctest::Approx(0.0));
    CHECK(offsets.at("AB1C1") == doctest::Approx(0.0));
  }
}

TEST_CASE("conditional phase gates are pure frame updates") {
  // CCZ on |111>: -180 on the three transitions into that state.
  const auto seq = cctheta({1, 1, 1}, M_PI);
  CHECK(seq.pulse_count() == 0);
  const auto offsets = seq.final_frames().phase_offsets();
  CHECK(offsets.at("AB1C1") == doctest::Approx(M_PI));
  CHECK(offsets.at("BC1A1") == doctest::Approx(M_PI));
  CHECK(offsets.at("CA1B1") == doctest::Approx(M_PI));
  CHECK(phase_aligned_distance(sequence_unitary(seq), ideal_unitary("CCZ 111")) <
        1e-12);

  // CCtheta on |010>: +theta, -theta, +theta per the cyclic table.
  const double theta = 0.7;
  const auto s2 = cctheta({0, 1, 0}, theta);
  const auto off2 = s2.final_frames().phase_offsets();
  CHECK(off2.at("AB1C0") == doctest::Approx(theta));
  CHECK(off2.at("BC0A0") == doctest::Approx(2 * M_PI - theta));
  CHECK(off2.at("CA0B1") == doctest::Approx(theta));

  CHECK(cctheta({1, 0, 1}, 0.0).items.empty());
}

TEST_CASE("standard gates compile and replay") {
  struct Case {
    const char* line;
    int pulses;
  };
  const Case cases[] = {
      {"X A", 4},        {"Y B", 4},          {"Z C", 0},
      {"R B 1.234 0.777", 4}, {"CNOT B A", 2}, {"CZ A C", 0},
      {"SWAP A B", 6},   {"FREDKIN A B C", 3}, {"CCNOT B C A", 1},
      {"CCZ 111", 0},    {"CCPHASE 010 1.1", 0}};
  for (const auto& c : cases) {
    const auto seq = compile_standard(c.line, 3);
    CHECK(seq.pulse_count() == c.pulses);
    CHECK(phase_aligned_distance(sequence_unitary(seq), ideal_unitary(c.line)) <
          1e-12);
    const MatrixXcd u = sequence_unitary(seq);
    CHECK((u.adjoint() * u - MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  CHECK_THROWS_AS(compile_standard("HADAMARD A", 3), ConfigError);
  CHECK_THROWS_AS(compile_standard("CNOT A A", 3), ConfigError);
  CHECK_THROWS_AS(compile_standard("CCZ 12", 3), ConfigError);
}

TEST_CASE("CNOT control-target order follows the program grammar") {
  // "CNOT B A": control B, target A -> pi pulses at AB1C0 and AB1C1.
  const auto seq = compile_standard("CNOT B A", 3);
  std::vector<std::string> pulsed;
  for (const auto& item : seq.items) {
    if (item.kind == SequenceItem::Kind::pulse) {
      pulsed.push_back(item.gate.transition.str());
    }
  }
  REQUIRE(pulsed.size() == 2);
  CHECK(((pulsed[0] == "AB1C0" && pulsed[1] == "AB1C1") ||
         (pulsed[0] == "AB1C1" && pulsed[1] == "AB1C0")));
}

TEST_CASE("single-qubit gates pulse every control condition in parallel") {
  const auto seq = compile_standard("X C", 3);
  std::vector<std::string> pulsed;
  for (const auto& item : seq.items) {
    if (item.kind == SequenceItem::Kind::pulse) {
      pulsed.push_back(item.gate.transition.str());
      CHECK(item.gate.parallel_group >= 0);
      CHECK(item.gate.theta == doctest::Approx(M_PI));
    }
  }
  const std::vector<std::string> expect = {"CA0B0", "CA0B1", "CA1B0", "CA1B1"};
  CHECK(pulsed == expect);

  // Level-disjointness audit rejects overlapping simultaneous pulses.
  GateSequence bad;
  bad.mode_count = 3;
  for (const char* label : {"AB0C0", "BC0A0"}) {
    SequenceItem item;
    item.kind = SequenceItem::Kind::pulse;
    item.gate.transition = parse_transition(label, 3);
    item.gate.theta = M_PI;
    item.gate.parallel_group = 0;
    bad.items.push_back(item);
  }
  CHECK_THROWS_AS(sequence_unitary(bad), ConfigError);
}

TEST_CASE("random programs replay to the ideal composite") {
  std::mt19937_64 rng(42);
  const std::vector<std::string> gates = {"X", "Y", "Z", "R", "CNOT",
                                          "CZ", "SWAP", "FREDKIN", "CCNOT",
                                          "CCZ", "CCPHASE"};
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    GateSequence seq;
    seq.mode_count = 3;
    MatrixXcd ideal = MatrixXcd::Identity(8, 8);
    const int len = 1 + static_cast<int>(rng() % 8);
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
      seq.append(compile_standard(line, 3));
      ideal = ideal_unitary(line) * ideal;
    }
    worst = std::max(worst,
                     phase_aligned_distance(sequence_unitary(seq), ideal));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("program text round trip") {
  const std::string program =
      "# prepare and entangle\nX A\nCNOT A B\nCCZ 110\nR C 0.5 0.25\n";
  const auto seq = compile_program(program);
  MatrixXcd ideal = ideal_unitary("X A");
  ideal = ideal_unitary("CNOT A B") * ideal;
  ideal = ideal_unitary("CCZ 110") * ideal;
  ideal = ideal_unitary("R C 0.5 0.25") * ideal;
  CHECK(phase_aligned_distance(sequence_unitary(seq), ideal) < 1e-12);

  const std::string text = sequence_to_text(seq);
  CHECK(text.find("pulse 1") != std::string::npos);
  CHECK(text.find("frame AB0C0") != std::string::npos);
}

TEST_CASE("transition label parsing") {
  CHECK(parse_transition("AB0C1", 3).str() == "AB0C1");
  CHECK(parse_transition("BC1A0", 3).target == 1);
  CHECK(parse_transition("CA1B1", 3).lower_state() == std::vector<int>{1, 1, 0});
  CHECK_THROWS_AS(parse_transition("AC0B1", 3), ConfigError);
  CHECK_THROWS_AS(parse_transition("AB2C0", 3), ConfigError);
  CHECK(all_transitions(3).size() == 12);
  CHECK(all_transitions(4).size() == 32);
}

TEST_CASE("four-qubit generalization of the conditional gates") {
  const auto seq = ccnot(1, {1, 0, 1}, 4);
  const MatrixXcd u = sequence_unitary(seq);
  // Ideal: flip qubit B when C=1, D=0, A=1 (cyclic controls from target 1).
  MatrixXcd ideal = MatrixXcd::Identity(16, 16);
  const int lo = basis_index({1, 0, 1, 0});
  const int hi = basis_index({1, 1, 1, 0});
  ideal(lo, lo) = 0;
  ideal(hi, hi) = 0;
  ideal(lo, hi) = 1;
  ideal(hi, lo) = 1;
  CHECK(phase_aligned_distance(u, ideal) < 1e-12);

  // A conditional phase on a 4-qubit component replays exactly too.
  const auto s2 = cctheta({1, 0, 1, 1}, 1.1);
  MatrixXcd ideal2 = MatrixXcd::Identity(16, 16);
  ideal2(basis_index({1, 0, 1, 1}), basis_index({1, 0, 1, 1})) =
      std::exp(std::complex<double>(0, 1.1));
  CHECK(phase_aligned_distance(sequence_unitary(s2), ideal2) < 1e-12);
}
