#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghost/qsim.hpp"

namespace ghost {

/// Shot sampler that is exact in distribution for Pauli channels on circuits
/// whose only non-Clifford gates are rotations.
///
/// A Pauli error E pushed past exp(-i a Q) leaves exp(-i (+/-a) Q) with the sign
/// flipped iff E anticommutes with Q, and is conjugated by Clifford gates. So
/// every shot equals "ideal circuit with some rotation signs flipped, followed
/// by a Pauli frame". Sign flips and classical-bit flips are linear over GF(2)
/// in the inserted errors, which makes per-shot work a few XORs; the statevector
/// is simulated once per distinct sign pattern.
///
/// Measurements that are followed by further gates on the same qubit must be
/// deterministic for every sign pattern (true for stabilizer checks on
/// code-preserving circuits); otherwise sampling throws NonDeterministicMeasurement.
class FrameSampler {
 public:
  struct Options {
    std::optional<NoiseModel> noise;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    // Shots with any of these cbits set are rejected (ideal value must be 0).
    std::uint64_t check_mask = 0;
    // Shots with any of these cbits set are re-drawn from scratch.
    std::uint64_t retry_mask = 0;
  };

  struct Shot {
    std::uint64_t cbits = 0;
    bool accepted = true;
  };

  FrameSampler(const Circuit& circuit, Options options);

  /// Samples shot indices [first, first + count). Rejected shots carry no
  /// final-measurement bits.
  std::vector<Shot> sample(std::uint64_t first, std::size_t count) const;

  std::size_t n_rotations() const { return rotation_gate_.size(); }
  std::size_t n_noise_sites() const;
  const Circuit& physical() const { return physical_; }

 private:
  struct Effect {
    std::vector<std::uint64_t> flips;  // rotation sign flips
    std::uint64_t cbits = 0;
  };
  struct Site {
    std::uint32_t gate;  // insert before physical gate index (size() = at end)
    std::uint32_t q0, q1;
    std::uint8_t kind;   // 0 = X only, 1 = 1q depolarizing, 2 = 2q depolarizing
  };

  Effect propagate(std::uint32_t position, std::uint64_t x, std::uint64_t z) const;
  void draw(CounterRng& rng, std::vector<std::uint64_t>& flips, std::uint64_t& cbits) const;
  std::vector<double> signature_distribution(const std::vector<std::uint64_t>& flips,
                                             std::uint64_t& ideal_bits) const;

  Circuit logical_;
  Circuit physical_;
  Options options_;
  NoiseModel::Scaled p_{0, 0, 0, 0};
  std::vector<std::size_t> rotation_gate_;       // logical gate index per rotation
  std::vector<std::int32_t> rotation_of_gate_;   // logical gate index -> rotation or -1
  std::vector<bool> terminal_;                   // logical gate is a terminal measurement
  std::size_t words_ = 0;
  // Sites grouped by channel: 0 init/reset flips, 1 one-qubit, 2 two-qubit, 3 readout.
  std::vector<Site> sites_[4];
  // Basis effects per site: X and Z on q0 (and q1 for two-qubit sites).
  std::vector<std::array<Effect, 4>> effects_[4];
};

struct NonDeterministicMeasurement : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LowSuccessRate : std::runtime_error {
  LowSuccessRate(const std::string& what, std::size_t submitted, std::size_t accepted)
      : std::runtime_error(what), submitted(submitted), accepted(accepted) {}
  std::size_t submitted;
  std::size_t accepted;
};

struct PostSelection {
  std::vector<std::size_t> check_cbits;
  std::vector<std::size_t> retry_cbits;
  // Keep submitting shots until the accepted count reaches the request.
  bool inflate = false;
  double min_success = 0.01;
};

struct GroupRecord {
  PauliString basis;
  std::vector<PauliString> strings;
  std::vector<int> cbit_of_qubit;
  std::size_t submitted = 0;
  std::vector<std::uint64_t> outcomes;  // accepted shots only
};

struct StringEstimate {
  PauliString string;
  std::string basis;
  std::size_t shots = 0;
  std::size_t ones = 0;  // shots with odd parity over the string support
  double mean = 0.0;
  double std_error = 0.0;
};

struct MeasurementRun {
  std::vector<GroupRecord> groups;
  std::vector<StringEstimate> estimates;
  std::size_t submitted = 0;
  std::size_t accepted = 0;
  double success_rate() const { return submitted ? double(accepted) / double(submitted) : 0.0; }
  const StringEstimate& estimate(const PauliString& p) const;
};

/// Measures each string on the state prepared by `prep`, grouping strings
/// into qubit-wise commuting families. Group g draws from stream g.
MeasurementRun measure_pauli_strings(const Circuit& prep, const std::vector<PauliString>& strings,
                                     std::size_t shots, std::uint64_t seed,
                                     const std::optional<NoiseModel>& noise,
                                     const PostSelection& post = {});

struct SampleResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::vector<StringEstimate> tallies;
};

/// Shot estimate of <obs>; identity terms contribute exactly.
/// Throws std::invalid_argument when shots == 0.
SampleResult sample_expectation(const Circuit& circuit, const PauliSum& obs, std::size_t shots,
                                std::uint64_t seed, const std::optional<NoiseModel>& noise = std::nullopt);

/// CSV with columns string,basis,shots,ones.
std::string tallies_csv(const std::vector<StringEstimate>& tallies);

}  // namespace ghost
