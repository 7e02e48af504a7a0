#include "ghost/iceberg.hpp"

#include <stdexcept>

namespace ghost {

IcebergCode::IcebergCode(std::size_t k_) : k(k_) {
  if (k == 0 || k % 2 != 0) throw std::invalid_argument("IcebergCode: k must be even and positive");
  if (n_physical() > PauliString::kMaxQubits) throw std::invalid_argument("IcebergCode: k too large");
}

PauliString IcebergCode::stabilizer_x() const {
  const std::uint64_t data_mask = (std::uint64_t{1} << n_data()) - 1;
  return PauliString(n_physical(), data_mask, 0);
}

PauliString IcebergCode::stabilizer_z() const {
  const std::uint64_t data_mask = (std::uint64_t{1} << n_data()) - 1;
  return PauliString(n_physical(), 0, data_mask);
}

PauliProduct IcebergCode::logical_to_physical(const PauliString& logical) const {
  if (logical.size() != k) throw std::invalid_argument("logical_to_physical: string width differs from k");
  PauliProduct out{1.0, PauliString(n_physical())};
  for (std::size_t i = 0; i < k; ++i) {
    const Pauli p = logical[i];
    if (p == Pauli::I) continue;
    PauliString factor(n_physical());
    factor.set(data(i), p);
    if (p == Pauli::X || p == Pauli::Y) factor.set(top(), Pauli::X);
    if (p == Pauli::Z || p == Pauli::Y) factor.set(bottom(), Pauli::Z);
    const auto prod = multiply(out.string, factor);
    out.phase *= prod.phase;
    out.string = prod.string;
  }
  return out;
}

std::vector<std::size_t> syndrome_positions(std::size_t n_generators, std::size_t rounds) {
  std::vector<std::size_t> pos;
  for (std::size_t j = 1; j <= rounds; ++j) pos.push_back(j * n_generators / rounds);
  return pos;
}

std::vector<std::size_t> syndrome_round(Circuit& circuit, const IcebergCode& code) {
  const std::size_t ax = code.ancilla_x(), az = code.ancilla_z();
  const std::size_t cx_bit = circuit.n_cbits(), cz_bit = cx_bit + 1;
  circuit.set_cbits(cz_bit + 1);

  circuit.add(Gate::reset(ax));
  circuit.add(Gate::single(GateKind::H, ax));
  for (std::size_t q = 0; q < code.n_data(); ++q) circuit.add(Gate::cx(ax, q));
  circuit.add(Gate::single(GateKind::H, ax));
  circuit.add(Gate::measure(ax, cx_bit));

  circuit.add(Gate::reset(az));
  for (std::size_t q = 0; q < code.n_data(); ++q) circuit.add(Gate::cx(q, az));
  circuit.add(Gate::measure(az, cz_bit));
  return {cx_bit, cz_bit};
}

EncodedCircuit encode_circuit(const AnsatzState& ansatz, std::size_t rounds, const IcebergCode& code) {
  if (code.k != 8 || ansatz.n_qubits != code.k) {
    throw std::invalid_argument("encode_circuit: the register layout expects k = 8 logical qubits, got " +
                                std::to_string(ansatz.n_qubits));
  }
  EncodedCircuit out;
  Circuit& c = out.circuit;
  c = Circuit(code.n_physical(), 1);

  // GHZ state (|0...0> + |1...1>)/sqrt2 on the data qubits is |0_L>.
  c.add(Gate::single(GateKind::H, code.top()));
  std::size_t prev = code.top();
  for (std::size_t i = 0; i < code.k; ++i) {
    c.add(Gate::cx(prev, code.data(i)));
    prev = code.data(i);
  }
  c.add(Gate::cx(prev, code.bottom()));
  // Z_t Z_b parity check; a ladder fault that breaks the GHZ state shows up here.
  c.add(Gate::cx(code.top(), code.ancilla_x()));
  c.add(Gate::cx(code.bottom(), code.ancilla_x()));
  c.add(Gate::measure(code.ancilla_x(), 0));
  out.verify_cbit = 0;

  bool flip_top = false;
  for (std::size_t i = 0; i < code.k; ++i) {
    if (ansatz.reference >> i & 1) {
      c.add(Gate::single(GateKind::X, code.data(i)));
      flip_top = !flip_top;
    }
  }
  if (flip_top) c.add(Gate::single(GateKind::X, code.top()));

  const auto positions = syndrome_positions(ansatz.n_params(), rounds);
  std::size_t next_round = 0;
  auto emit_rounds = [&](std::size_t done) {
    while (next_round < positions.size() && positions[next_round] == done) {
      out.round_gate_index.push_back(c.size());
      for (auto b : syndrome_round(c, code)) out.syndrome_cbits.push_back(b);
      ++next_round;
    }
  };
  emit_rounds(0);
  for (std::size_t g = 0; g < ansatz.n_params(); ++g) {
    const auto phys = code.logical_to_physical(ansatz.generators[g]);
    c.add(Gate::rotation(phys.string, ansatz.theta[g] * phys.phase.real()));
    emit_rounds(g + 1);
  }

  out.n_2q_total = transpile(c).n_2q;
  out.n_2q = out.n_2q_total - rounds * 2 * code.n_data();
  return out;
}

EncodedMeasurement measure_encoded(const AnsatzState& ansatz, std::size_t rounds,
                                   const std::vector<PauliString>& logical, std::size_t shots, std::uint64_t seed,
                                   const std::optional<NoiseModel>& noise) {
  EncodedMeasurement out;
  if (logical.empty()) return out;
  MeasurementRun run;
  std::vector<PauliString> measured;
  std::vector<double> phase;
  if (rounds == 0) {
    measured = logical;
    phase.assign(logical.size(), 1.0);
    run = measure_pauli_strings(ansatz.circuit(), measured, shots, seed, noise);
  } else {
    const IcebergCode code(8);
    const auto enc = encode_circuit(ansatz, rounds, code);
    for (const auto& l : logical) {
      const auto p = code.logical_to_physical(l);
      measured.push_back(p.string);
      phase.push_back(p.phase.real());
    }
    PostSelection post;
    post.check_cbits = enc.syndrome_cbits;
    post.retry_cbits = {enc.verify_cbit};
    post.inflate = true;
    run = measure_pauli_strings(enc.circuit, measured, shots, seed, noise, post);
  }
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const auto& e = run.estimate(measured[i]);
    out.values.push_back(phase[i] * e.mean);
    out.std_errors.push_back(e.std_error);
  }
  out.submitted = run.submitted;
  out.accepted = run.accepted;
  return out;
}

}  // namespace ghost
