#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghost/pauli.hpp"
#include "ghost/rng.hpp"

namespace ghost {

enum class GateKind : std::uint8_t {
  PauliRotation,  // exp(-i angle P)
  H,
  S,
  Sdg,
  X,
  Y,
  Z,
  RZ,   // exp(-i angle/2 Z)
  CX,   // control qubits[0], target qubits[1]
  RZZ,  // exp(-i angle/2 Z Z)
  MeasureZ,
  Reset,
};

const char* gate_name(GateKind k);
bool is_single_qubit_unitary(GateKind k);
bool is_two_qubit(GateKind k);

struct Gate {
  GateKind kind = GateKind::H;
  std::array<std::uint32_t, 2> qubits{0, 0};
  double angle = 0.0;
  PauliString pauli;         // PauliRotation only
  std::uint32_t cbit = 0;    // MeasureZ only
  std::int32_t origin = -1;  // index of the source gate when produced by transpile

  static Gate rotation(const PauliString& p, double theta);
  static Gate single(GateKind k, std::size_t q, double angle = 0.0);
  static Gate cx(std::size_t control, std::size_t target);
  static Gate rzz(std::size_t a, std::size_t b, double angle);
  static Gate measure(std::size_t q, std::size_t cbit);
  static Gate reset(std::size_t q);

  // Qubits touched by the gate as a bit mask.
  std::uint64_t support() const;
};

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(std::size_t n_qubits, std::size_t n_cbits = 0)
      : n_qubits_(n_qubits), n_cbits_(n_cbits) {}

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t n_cbits() const { return n_cbits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }

  // Validates indices; grows the classical register to fit measurements.
  void add(Gate g);
  void append(const Circuit& other);
  void set_cbits(std::size_t n) { n_cbits_ = std::max(n_cbits_, n); }

  /// Layers after as-soon-as-possible packing of gates with disjoint supports.
  std::size_t depth() const;
  std::size_t two_qubit_count() const;

 private:
  std::size_t n_qubits_ = 0;
  std::size_t n_cbits_ = 0;
  std::vector<Gate> gates_;
};

class StateVector {
 public:
  explicit StateVector(std::size_t n_qubits, std::uint64_t basis_state = 0);
  explicit StateVector(Eigen::VectorXcd amplitudes);

  std::size_t n_qubits() const { return n_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }
  double norm() const { return amps_.norm(); }

  // Probability that qubit q reads 1.
  double probability_one(std::size_t q) const;

 private:
  std::size_t n_;
  Eigen::VectorXcd amps_;
};

/// Unitary gates only; throws std::invalid_argument for MeasureZ/Reset.
void apply_unitary(StateVector& psi, const Gate& g);
void apply_pauli(StateVector& psi, const PauliString& p);

/// Collapses qubit q using the uniform draw u; returns the outcome bit.
int measure_qubit(StateVector& psi, std::size_t q, double u);
void reset_qubit(StateVector& psi, std::size_t q, double u);

/// Applies any gate; measurement outcomes are written to cbits.
void apply(StateVector& psi, const Gate& g, CounterRng& rng, std::vector<int>& cbits);

cplx expectation(const StateVector& psi, const PauliSum& obs);
cplx expectation(const StateVector& psi, const PauliString& p);

struct NoiseModel {
  double p_bi = 4e-4;  // X after qubit initialization (and after Reset)
  double p_1q = 4e-4;  // single-qubit depolarizing after each 1q gate
  double p_2q = 3e-3;  // two-qubit depolarizing after each CX and RZZ
  double p_bm = 3e-3;  // X before each measurement
  double noise_scale = 1.0;

  struct Scaled {
    double bi, q1, q2, bm;
  };
  // Throws std::invalid_argument when a scaled probability leaves [0, 1].
  Scaled scaled() const;
  bool is_noiseless() const;
};

struct TrajectoryResult {
  StateVector state;
  std::vector<int> cbits;
};

/// One stochastic Pauli-channel trajectory. PauliRotation gates are transpiled
/// first so that noise attaches to physical gates.
TrajectoryResult noisy_trajectory(const Circuit& circuit, const NoiseModel& noise, CounterRng& noise_rng,
                                  CounterRng& measure_rng);

struct TranspileResult {
  Circuit circuit;
  std::size_t n_2q = 0;
  std::size_t depth = 0;
};

/// Expands each weight-w PauliRotation into basis changes, a CX ladder and one
/// central RZZ (RZ for w = 1; identity rotations are dropped). Other gates pass
/// through. Every output gate records the index of its source gate in origin.
TranspileResult transpile(const Circuit& circuit);

/// OpenQASM 2.0 text over {h, s, sdg, x, y, z, rz, cx, rzz, measure, reset}.
/// Pauli rotations are expanded by transpile before export.
std::string to_qasm(const Circuit& circuit);
Circuit from_qasm(const std::string& text);

/// Greedy qubit-wise commuting grouping in term order; identity is skipped.
std::vector<std::vector<PauliString>> group_qubitwise(const std::vector<PauliString>& strings);

/// Appends H (for X) or Sdg then H (for Y) on every qubit where the group basis
/// is not Z, then measures each qubit of the basis support into a fresh cbit.
/// Returns the cbit index per qubit (or -1 when unmeasured).
std::vector<int> append_basis_measurement(Circuit& circuit, const PauliString& basis);

}  // namespace ghost
