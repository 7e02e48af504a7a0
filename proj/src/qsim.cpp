#include "ghost/qsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace ghost {

namespace {

constexpr cplx kI(0.0, 1.0);
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

std::uint64_t bit(std::size_t q) { return std::uint64_t{1} << q; }

void check_qubit(std::size_t q, std::size_t n) {
  if (q >= n) {
    throw std::invalid_argument("qubit index " + std::to_string(q) + " out of range for " +
                                std::to_string(n) + " qubits");
  }
}

template <typename F>
void for_each_pair(Eigen::VectorXcd& a, std::size_t q, F&& f) {
  const std::size_t dim = static_cast<std::size_t>(a.size());
  const std::size_t stride = bit(q);
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t b = base; b < base + stride; ++b) f(a[b], a[b + stride]);
  }
}

void apply_rotation(Eigen::VectorXcd& a, const PauliString& p, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const auto x = p.x_mask(), z = p.z_mask();
  const std::size_t dim = static_cast<std::size_t>(a.size());
  if (x == 0) {
    const cplx plus(c, -s), minus(c, s);
    for (std::size_t b = 0; b < dim; ++b) a[b] *= (std::popcount(z & b) & 1) ? minus : plus;
    return;
  }
  static constexpr cplx phases[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  // -i sin(theta) i^{|x.z|}
  const cplx k = cplx(0, -s) * phases[std::popcount(x & z) % 4];
  const std::uint64_t pivot = std::uint64_t{1} << (63 - std::countl_zero(x));
  for (std::size_t b = 0; b < dim; ++b) {
    if (b & pivot) continue;
    const std::size_t bp = b ^ x;
    const cplx ab = a[b], abp = a[bp];
    const double sb = (std::popcount(z & b) & 1) ? -1.0 : 1.0;
    const double sbp = (std::popcount(z & bp) & 1) ? -1.0 : 1.0;
    a[b] = c * ab + k * sbp * abp;
    a[bp] = c * abp + k * sb * ab;
  }
}

}  // namespace

const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::PauliRotation: return "pauli_rotation";
    case GateKind::H: return "h";
    case GateKind::S: return "s";
    case GateKind::Sdg: return "sdg";
    case GateKind::X: return "x";
    case GateKind::Y: return "y";
    case GateKind::Z: return "z";
    case GateKind::RZ: return "rz";
    case GateKind::CX: return "cx";
    case GateKind::RZZ: return "rzz";
    case GateKind::MeasureZ: return "measure";
    case GateKind::Reset: return "reset";
  }
  return "?";
}

bool is_single_qubit_unitary(GateKind k) {
  switch (k) {
    case GateKind::H: case GateKind::S: case GateKind::Sdg: case GateKind::X:
    case GateKind::Y: case GateKind::Z: case GateKind::RZ:
      return true;
    default:
      return false;
  }
}

bool is_two_qubit(GateKind k) { return k == GateKind::CX || k == GateKind::RZZ; }

Gate Gate::rotation(const PauliString& p, double theta) {
  Gate g;
  g.kind = GateKind::PauliRotation;
  g.pauli = p;
  g.angle = theta;
  return g;
}

Gate Gate::single(GateKind k, std::size_t q, double angle) {
  if (!is_single_qubit_unitary(k)) throw std::invalid_argument("Gate::single: not a 1q gate");
  Gate g;
  g.kind = k;
  g.qubits = {static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(q)};
  g.angle = angle;
  return g;
}

Gate Gate::cx(std::size_t control, std::size_t target) {
  if (control == target) throw std::invalid_argument("Gate::cx: control equals target");
  Gate g;
  g.kind = GateKind::CX;
  g.qubits = {static_cast<std::uint32_t>(control), static_cast<std::uint32_t>(target)};
  return g;
}

Gate Gate::rzz(std::size_t a, std::size_t b, double angle) {
  if (a == b) throw std::invalid_argument("Gate::rzz: repeated qubit");
  Gate g;
  g.kind = GateKind::RZZ;
  g.qubits = {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  g.angle = angle;
  return g;
}

Gate Gate::measure(std::size_t q, std::size_t cbit) {
  Gate g;
  g.kind = GateKind::MeasureZ;
  g.qubits = {static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(q)};
  g.cbit = static_cast<std::uint32_t>(cbit);
  return g;
}

Gate Gate::reset(std::size_t q) {
  Gate g;
  g.kind = GateKind::Reset;
  g.qubits = {static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(q)};
  return g;
}

std::uint64_t Gate::support() const {
  if (kind == GateKind::PauliRotation) return pauli.support_mask();
  return bit(qubits[0]) | bit(qubits[1]);
}

void Circuit::add(Gate g) {
  if (g.kind == GateKind::PauliRotation) {
    if (g.pauli.size() != n_qubits_) {
      throw std::invalid_argument("Circuit::add: rotation string has " +
                                  std::to_string(g.pauli.size()) + " qubits, circuit has " +
                                  std::to_string(n_qubits_));
    }
  } else {
    check_qubit(g.qubits[0], n_qubits_);
    check_qubit(g.qubits[1], n_qubits_);
  }
  if (g.kind == GateKind::MeasureZ) n_cbits_ = std::max<std::size_t>(n_cbits_, g.cbit + 1);
  gates_.push_back(std::move(g));
}

void Circuit::append(const Circuit& other) {
  if (other.n_qubits_ != n_qubits_) throw std::invalid_argument("Circuit::append: width mismatch");
  for (const auto& g : other.gates_) add(g);
  n_cbits_ = std::max(n_cbits_, other.n_cbits_);
}

std::size_t Circuit::depth() const {
  std::vector<std::size_t> level(n_qubits_, 0);
  std::size_t depth = 0;
  for (const auto& g : gates_) {
    const auto mask = g.support();
    if (mask == 0) continue;
    std::size_t l = 0;
    for (std::size_t q = 0; q < n_qubits_; ++q)
      if (mask & bit(q)) l = std::max(l, level[q]);
    ++l;
    for (std::size_t q = 0; q < n_qubits_; ++q)
      if (mask & bit(q)) level[q] = l;
    depth = std::max(depth, l);
  }
  return depth;
}

std::size_t Circuit::two_qubit_count() const {
  return static_cast<std::size_t>(
      std::count_if(gates_.begin(), gates_.end(), [](const Gate& g) { return is_two_qubit(g.kind); }));
}

StateVector::StateVector(std::size_t n_qubits, std::uint64_t basis_state) : n_(n_qubits) {
  if (n_qubits > 30) throw std::invalid_argument("StateVector: too many qubits");
  amps_ = Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits);
  if (basis_state >= (std::uint64_t{1} << n_qubits)) {
    throw std::invalid_argument("StateVector: basis state out of range");
  }
  amps_[static_cast<Eigen::Index>(basis_state)] = 1.0;
}

StateVector::StateVector(Eigen::VectorXcd amplitudes) : amps_(std::move(amplitudes)) {
  const auto dim = static_cast<std::uint64_t>(amps_.size());
  if (dim == 0 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("StateVector: amplitude count must be a power of two");
  }
  n_ = static_cast<std::size_t>(std::countr_zero(dim));
}

double StateVector::probability_one(std::size_t q) const {
  check_qubit(q, n_);
  double p = 0.0;
  for (Eigen::Index b = 0; b < amps_.size(); ++b)
    if (static_cast<std::uint64_t>(b) & bit(q)) p += std::norm(amps_[b]);
  return p;
}

void apply_unitary(StateVector& psi, const Gate& g) {
  auto& a = psi.amplitudes();
  const std::size_t q0 = g.qubits[0], q1 = g.qubits[1];
  switch (g.kind) {
    case GateKind::PauliRotation:
      apply_rotation(a, g.pauli, g.angle);
      return;
    case GateKind::H:
      for_each_pair(a, q0, [](cplx& x, cplx& y) {
        const cplx s = x + y, d = x - y;
        x = kInvSqrt2 * s;
        y = kInvSqrt2 * d;
      });
      return;
    case GateKind::S:
      for_each_pair(a, q0, [](cplx&, cplx& y) { y *= kI; });
      return;
    case GateKind::Sdg:
      for_each_pair(a, q0, [](cplx&, cplx& y) { y *= -kI; });
      return;
    case GateKind::X:
      for_each_pair(a, q0, [](cplx& x, cplx& y) { std::swap(x, y); });
      return;
    case GateKind::Y:
      for_each_pair(a, q0, [](cplx& x, cplx& y) {
        const cplx x0 = x;
        x = -kI * y;
        y = kI * x0;
      });
      return;
    case GateKind::Z:
      for_each_pair(a, q0, [](cplx&, cplx& y) { y = -y; });
      return;
    case GateKind::RZ: {
      const cplx e0 = std::polar(1.0, -g.angle / 2), e1 = std::polar(1.0, g.angle / 2);
      for_each_pair(a, q0, [&](cplx& x, cplx& y) {
        x *= e0;
        y *= e1;
      });
      return;
    }
    case GateKind::CX: {
      const auto c = bit(q0), t = bit(q1);
      for (Eigen::Index b = 0; b < a.size(); ++b) {
        const auto u = static_cast<std::uint64_t>(b);
        if ((u & c) && !(u & t)) std::swap(a[b], a[static_cast<Eigen::Index>(u | t)]);
      }
      return;
    }
    case GateKind::RZZ: {
      const cplx even = std::polar(1.0, -g.angle / 2), odd = std::polar(1.0, g.angle / 2);
      for (Eigen::Index b = 0; b < a.size(); ++b) {
        const auto u = static_cast<std::uint64_t>(b);
        a[b] *= (((u >> q0) ^ (u >> q1)) & 1u) ? odd : even;
      }
      return;
    }
    case GateKind::MeasureZ:
    case GateKind::Reset:
      break;
  }
  throw std::invalid_argument(std::string("apply_unitary: non-unitary gate ") + gate_name(g.kind));
}

void apply_pauli(StateVector& psi, const PauliString& p) {
  if (p.is_identity()) return;
  // exp(-i pi/2 P) = -i P; the global phase is irrelevant for trajectories.
  apply_rotation(psi.amplitudes(), p, M_PI / 2);
}

int measure_qubit(StateVector& psi, std::size_t q, double u) {
  const double p1 = psi.probability_one(q);
  const int outcome = u < p1 ? 1 : 0;
  const double keep = outcome ? p1 : 1.0 - p1;
  if (keep <= 0.0) throw std::logic_error("measure_qubit: sampled a zero-probability outcome");
  const double scale = 1.0 / std::sqrt(keep);
  auto& a = psi.amplitudes();
  for (Eigen::Index b = 0; b < a.size(); ++b) {
    const bool one = static_cast<std::uint64_t>(b) & bit(q);
    a[b] = (one == static_cast<bool>(outcome)) ? a[b] * scale : cplx(0.0);
  }
  return outcome;
}

void reset_qubit(StateVector& psi, std::size_t q, double u) {
  if (measure_qubit(psi, q, u)) apply_unitary(psi, Gate::single(GateKind::X, q));
}

void apply(StateVector& psi, const Gate& g, CounterRng& rng, std::vector<int>& cbits) {
  if (g.kind == GateKind::MeasureZ) {
    if (cbits.size() <= g.cbit) cbits.resize(g.cbit + 1, 0);
    cbits[g.cbit] = measure_qubit(psi, g.qubits[0], rng.uniform());
  } else if (g.kind == GateKind::Reset) {
    reset_qubit(psi, g.qubits[0], rng.uniform());
  } else {
    apply_unitary(psi, g);
  }
}

cplx expectation(const StateVector& psi, const PauliString& p) {
  const auto& a = psi.amplitudes();
  static constexpr cplx phases[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  const cplx base = phases[std::popcount(p.x_mask() & p.z_mask()) % 4];
  cplx acc = 0.0;
  for (Eigen::Index b = 0; b < a.size(); ++b) {
    const auto u = static_cast<std::uint64_t>(b);
    const double s = (std::popcount(p.z_mask() & u) & 1) ? -1.0 : 1.0;
    acc += std::conj(a[static_cast<Eigen::Index>(u ^ p.x_mask())]) * a[b] * s;
  }
  return base * acc;
}

cplx expectation(const StateVector& psi, const PauliSum& obs) {
  if (obs.n_qubits() != psi.n_qubits()) throw std::invalid_argument("expectation: width mismatch");
  cplx acc = 0.0;
  for (const auto& [p, c] : obs.terms()) acc += c * expectation(psi, p);
  return acc;
}

NoiseModel::Scaled NoiseModel::scaled() const {
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("noise_scale must be non-negative");
  const Scaled s{p_bi * noise_scale, p_1q * noise_scale, p_2q * noise_scale, p_bm * noise_scale};
  for (double p : {s.bi, s.q1, s.q2, s.bm}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("scaled error probability " + std::to_string(p) +
                                  " outside [0, 1]");
    }
  }
  return s;
}

bool NoiseModel::is_noiseless() const {
  const auto s = scaled();
  return s.bi == 0.0 && s.q1 == 0.0 && s.q2 == 0.0 && s.bm == 0.0;
}

TrajectoryResult noisy_trajectory(const Circuit& circuit, const NoiseModel& noise, CounterRng& noise_rng,
                                  CounterRng& measure_rng) {
  const auto p = noise.scaled();
  const Circuit physical = transpile(circuit).circuit;
  const std::size_t n = physical.n_qubits();
  TrajectoryResult out{StateVector(n), std::vector<int>(physical.n_cbits(), 0)};
  auto flip = [&](std::size_t q) { apply_unitary(out.state, Gate::single(GateKind::X, q)); };
  auto depolarize1 = [&](std::size_t q) {
    if (noise_rng.uniform() >= p.q1) return;
    static constexpr Pauli letters[3] = {Pauli::X, Pauli::Y, Pauli::Z};
    apply_pauli(out.state, PauliString::single(n, q, letters[noise_rng.below(3)]));
  };
  auto depolarize2 = [&](std::size_t a, std::size_t b) {
    if (noise_rng.uniform() >= p.q2) return;
    const auto k = noise_rng.below(15) + 1;  // 1..15, two base-4 letters
    PauliString e(n);
    e.set(a, static_cast<Pauli>(k & 3u));
    e.set(b, static_cast<Pauli>(k >> 2));
    apply_pauli(out.state, e);
  };

  for (std::size_t q = 0; q < n; ++q)
    if (noise_rng.uniform() < p.bi) flip(q);
  for (const auto& g : physical.gates()) {
    if (g.kind == GateKind::MeasureZ) {
      if (noise_rng.uniform() < p.bm) flip(g.qubits[0]);
      apply(out.state, g, measure_rng, out.cbits);
    } else if (g.kind == GateKind::Reset) {
      apply(out.state, g, measure_rng, out.cbits);
      if (noise_rng.uniform() < p.bi) flip(g.qubits[0]);
    } else {
      apply_unitary(out.state, g);
      if (is_single_qubit_unitary(g.kind)) depolarize1(g.qubits[0]);
      if (is_two_qubit(g.kind)) depolarize2(g.qubits[0], g.qubits[1]);
    }
  }
  return out;
}

TranspileResult transpile(const Circuit& circuit) {
  TranspileResult r;
  r.circuit = Circuit(circuit.n_qubits(), circuit.n_cbits());
  auto emit = [&](Gate g, std::size_t origin) {
    g.origin = static_cast<std::int32_t>(origin);
    r.circuit.add(std::move(g));
  };
  for (std::size_t i = 0; i < circuit.size(); ++i) {
    const Gate& g = circuit.gates()[i];
    if (g.kind != GateKind::PauliRotation) {
      emit(g, i);
      continue;
    }
    const auto support = g.pauli.support();
    if (support.empty()) continue;
    for (auto q : support) {
      if (g.pauli[q] == Pauli::X) emit(Gate::single(GateKind::H, q), i);
      if (g.pauli[q] == Pauli::Y) {
        emit(Gate::single(GateKind::Sdg, q), i);
        emit(Gate::single(GateKind::H, q), i);
      }
    }
    const std::size_t w = support.size();
    if (w == 1) {
      emit(Gate::single(GateKind::RZ, support[0], 2 * g.angle), i);
    } else {
      for (std::size_t k = 0; k + 2 < w; ++k) emit(Gate::cx(support[k], support[k + 1]), i);
      emit(Gate::rzz(support[w - 2], support[w - 1], 2 * g.angle), i);
      for (std::size_t k = w - 2; k-- > 0;) emit(Gate::cx(support[k], support[k + 1]), i);
    }
    for (auto q : support) {
      if (g.pauli[q] == Pauli::X) emit(Gate::single(GateKind::H, q), i);
      if (g.pauli[q] == Pauli::Y) {
        emit(Gate::single(GateKind::H, q), i);
        emit(Gate::single(GateKind::S, q), i);
      }
    }
  }
  r.n_2q = r.circuit.two_qubit_count();
  r.depth = r.circuit.depth();
  return r;
}

std::string to_qasm(const Circuit& circuit) {
  const Circuit c = transpile(circuit).circuit;
  std::ostringstream os;
  os << std::setprecision(17);
  os << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
  os << "qreg q[" << c.n_qubits() << "];\n";
  if (c.n_cbits() > 0) os << "creg c[" << c.n_cbits() << "];\n";
  for (const auto& g : c.gates()) {
    const auto a = g.qubits[0], b = g.qubits[1];
    switch (g.kind) {
      case GateKind::CX: os << "cx q[" << a << "],q[" << b << "];\n"; break;
      case GateKind::RZZ: os << "rzz(" << g.angle << ") q[" << a << "],q[" << b << "];\n"; break;
      case GateKind::RZ: os << "rz(" << g.angle << ") q[" << a << "];\n"; break;
      case GateKind::MeasureZ: os << "measure q[" << a << "] -> c[" << g.cbit << "];\n"; break;
      case GateKind::Reset: os << "reset q[" << a << "];\n"; break;
      default: os << gate_name(g.kind) << " q[" << a << "];\n"; break;
    }
  }
  return os.str();
}

Circuit from_qasm(const std::string& text) {
  static const std::regex qreg(R"(^qreg\s+\w+\[(\d+)\];$)");
  static const std::regex creg(R"(^creg\s+\w+\[(\d+)\];$)");
  static const std::regex one(R"(^(h|s|sdg|x|y|z|reset)\s+\w+\[(\d+)\];$)");
  static const std::regex rz(R"(^rz\(([^)]+)\)\s+\w+\[(\d+)\];$)");
  static const std::regex cx(R"(^cx\s+\w+\[(\d+)\]\s*,\s*\w+\[(\d+)\];$)");
  static const std::regex rzz(R"(^rzz\(([^)]+)\)\s+\w+\[(\d+)\]\s*,\s*\w+\[(\d+)\];$)");
  static const std::regex meas(R"(^measure\s+\w+\[(\d+)\]\s*->\s*\w+\[(\d+)\];$)");

  std::istringstream is(text);
  std::string line;
  std::optional<Circuit> c;
  std::size_t n_cbits = 0;
  std::size_t lineno = 0;
  auto need = [&]() -> Circuit& {
    if (!c) throw std::invalid_argument("from_qasm: gate before qreg declaration");
    return *c;
  };
  while (std::getline(is, line)) {
    ++lineno;
    line = std::regex_replace(line, std::regex(R"(//.*$)"), "");
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty() || line.rfind("OPENQASM", 0) == 0 || line.rfind("include", 0) == 0) continue;
    std::smatch m;
    if (std::regex_match(line, m, qreg)) {
      c = Circuit(std::stoul(m[1]), n_cbits);
    } else if (std::regex_match(line, m, creg)) {
      n_cbits = std::stoul(m[1]);
      if (c) c->set_cbits(n_cbits);
    } else if (std::regex_match(line, m, one)) {
      const std::string name = m[1];
      const std::size_t q = std::stoul(m[2]);
      if (name == "reset") {
        need().add(Gate::reset(q));
      } else {
        static const std::pair<const char*, GateKind> names[] = {
            {"h", GateKind::H}, {"s", GateKind::S}, {"sdg", GateKind::Sdg},
            {"x", GateKind::X}, {"y", GateKind::Y}, {"z", GateKind::Z}};
        for (const auto& [nm, kind] : names)
          if (name == nm) need().add(Gate::single(kind, q));
      }
    } else if (std::regex_match(line, m, rz)) {
      need().add(Gate::single(GateKind::RZ, std::stoul(m[2]), std::stod(m[1])));
    } else if (std::regex_match(line, m, cx)) {
      need().add(Gate::cx(std::stoul(m[1]), std::stoul(m[2])));
    } else if (std::regex_match(line, m, rzz)) {
      need().add(Gate::rzz(std::stoul(m[2]), std::stoul(m[3]), std::stod(m[1])));
    } else if (std::regex_match(line, m, meas)) {
      need().add(Gate::measure(std::stoul(m[1]), std::stoul(m[2])));
    } else {
      throw std::invalid_argument("from_qasm: unsupported statement on line " + std::to_string(lineno) +
                                  ": " + line);
    }
  }
  if (!c) throw std::invalid_argument("from_qasm: missing qreg declaration");
  return *c;
}

std::vector<std::vector<PauliString>> group_qubitwise(const std::vector<PauliString>& strings) {
  std::vector<std::vector<PauliString>> groups;
  for (const auto& s : strings) {
    if (s.is_identity()) continue;
    bool placed = false;
    for (auto& g : groups) {
      if (std::all_of(g.begin(), g.end(), [&](const PauliString& t) { return t.qubitwise_commutes_with(s); })) {
        if (std::find(g.begin(), g.end(), s) == g.end()) g.push_back(s);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({s});
  }
  return groups;
}

std::vector<int> append_basis_measurement(Circuit& circuit, const PauliString& basis) {
  std::vector<int> cbit_of(circuit.n_qubits(), -1);
  for (std::size_t q = 0; q < basis.size(); ++q) {
    if (basis[q] == Pauli::X) circuit.add(Gate::single(GateKind::H, q));
    if (basis[q] == Pauli::Y) {
      circuit.add(Gate::single(GateKind::Sdg, q));
      circuit.add(Gate::single(GateKind::H, q));
    }
  }
  std::size_t next = circuit.n_cbits();
  for (std::size_t q = 0; q < basis.size(); ++q) {
    if (basis[q] == Pauli::I) continue;
    cbit_of[q] = static_cast<int>(next);
    circuit.add(Gate::measure(q, next++));
  }
  return cbit_of;
}

}  // namespace ghost
