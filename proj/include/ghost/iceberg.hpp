#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ghost/avqite.hpp"
#include "ghost/pauli.hpp"
#include "ghost/qsim.hpp"
#include "ghost/sampler.hpp"

namespace ghost {

/// [[k+2, k, 2]] Iceberg code. Physical register: t = 0, logical i -> i + 1,
/// b = k + 1, then two ancillas (k + 2 for S_X and GHZ verification, k + 3
/// for S_Z).
struct IcebergCode {
  explicit IcebergCode(std::size_t k);

  std::size_t k = 0;
  std::size_t top() const { return 0; }
  std::size_t bottom() const { return k + 1; }
  std::size_t data(std::size_t logical) const { return logical + 1; }
  std::size_t ancilla_x() const { return k + 2; }
  std::size_t ancilla_z() const { return k + 3; }
  std::size_t n_data() const { return k + 2; }
  std::size_t n_physical() const { return k + 4; }

  PauliString stabilizer_x() const;
  PauliString stabilizer_z() const;
  /// X_i -> X_i X_t, Z_i -> Z_i Z_b, Y_i -> Y_i X_t Z_b, multiplied out. The
  /// phase is +-1 for Hermitian input. Output spans the full physical register.
  PauliProduct logical_to_physical(const PauliString& logical) const;
};

/// Syndrome rounds placed after generator floor(j N / M), j = 1..M; the last
/// one sits immediately before the final measurement.
std::vector<std::size_t> syndrome_positions(std::size_t n_generators, std::size_t rounds);

/// Appends an S_X and an S_Z measurement (20 two-qubit gates for k = 8) and
/// returns the two classical bits, 0 in the code space.
std::vector<std::size_t> syndrome_round(Circuit& circuit, const IcebergCode& code);

struct EncodedCircuit {
  Circuit circuit;
  std::size_t verify_cbit = 0;                // GHZ parity check, retried on 1
  std::vector<std::size_t> syndrome_cbits;    // 2 per round
  std::vector<std::size_t> round_gate_index;  // first gate of each round
  std::size_t n_2q = 0;                       // transpiled, without syndrome rounds
  std::size_t n_2q_total = 0;
};

/// Verified GHZ preparation of |0...0>_L, logical X on occupied reference
/// qubits, encoded rotations and `rounds` syndrome rounds. Throws
/// std::invalid_argument unless the ansatz has exactly k = 8 logical qubits.
EncodedCircuit encode_circuit(const AnsatzState& ansatz, std::size_t rounds, const IcebergCode& code = IcebergCode(8));

struct EncodedMeasurement {
  std::vector<double> values;  // logical expectation per requested string
  std::vector<double> std_errors;
  std::size_t submitted = 0;
  std::size_t accepted = 0;
  double success_rate() const { return submitted ? double(accepted) / double(submitted) : 0.0; }
};

/// Expectations of logical strings measured through physical basis rotations,
/// post-selected on all syndrome bits; `shots` accepted per commuting group.
/// rounds = 0 measures the unencoded ansatz circuit. Throws LowSuccessRate
/// below a 1% acceptance.
EncodedMeasurement measure_encoded(const AnsatzState& ansatz, std::size_t rounds,
                                   const std::vector<PauliString>& logical, std::size_t shots, std::uint64_t seed,
                                   const std::optional<NoiseModel>& noise);

}  // namespace ghost
