#include "ghost/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

#include "ghost/parallel.hpp"

namespace ghost {

namespace {

constexpr std::size_t kChunk = 4096;
constexpr int kMaxRetries = 10000;

std::uint64_t mask_of(const std::vector<std::size_t>& cbits) {
  std::uint64_t m = 0;
  for (auto c : cbits) {
    if (c >= 64) throw std::invalid_argument("post-selection cbit index beyond 63");
    m |= std::uint64_t{1} << c;
  }
  return m;
}

// Number of failures before the next success of a Bernoulli(p) sequence.
std::uint64_t geometric_skip(CounterRng& rng, double p) {
  if (p >= 1.0) return 0;
  const double u = rng.uniform();
  const double k = std::floor(std::log1p(-u) / std::log1p(-p));
  return k > 1e18 ? std::uint64_t{1} << 62 : static_cast<std::uint64_t>(k);
}

}  // namespace

FrameSampler::FrameSampler(const Circuit& circuit, Options options)
    : logical_(circuit), options_(std::move(options)) {
  if (circuit.n_cbits() > 64) throw std::invalid_argument("FrameSampler: at most 64 classical bits");
  if (circuit.n_qubits() > 30) throw std::invalid_argument("FrameSampler: too many qubits");
  physical_ = transpile(circuit).circuit;
  if (options_.noise) p_ = options_.noise->scaled();

  const auto& gates = logical_.gates();
  rotation_of_gate_.assign(gates.size(), -1);
  terminal_.assign(gates.size(), false);
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const auto k = gates[i].kind;
    if (k == GateKind::PauliRotation || k == GateKind::RZ || k == GateKind::RZZ) {
      rotation_of_gate_[i] = static_cast<std::int32_t>(rotation_gate_.size());
      rotation_gate_.push_back(i);
    }
  }
  std::uint64_t touched_later = 0;
  for (std::size_t i = gates.size(); i-- > 0;) {
    const auto& g = gates[i];
    if (g.kind == GateKind::MeasureZ && !(touched_later & g.support())) terminal_[i] = true;
    touched_later |= g.support();
  }
  words_ = (rotation_gate_.size() + 63) / 64;

  const double probs[4] = {p_.bi, p_.q1, p_.q2, p_.bm};
  auto add_site = [&](int cls, Site s) {
    if (probs[cls] > 0.0) sites_[cls].push_back(s);
  };
  const auto& phys = physical_.gates();
  for (std::uint32_t q = 0; q < physical_.n_qubits(); ++q) add_site(0, {0, q, q, 0});
  for (std::uint32_t i = 0; i < phys.size(); ++i) {
    const auto& g = phys[i];
    if (is_single_qubit_unitary(g.kind)) add_site(1, {i + 1, g.qubits[0], g.qubits[0], 1});
    if (is_two_qubit(g.kind)) add_site(2, {i + 1, g.qubits[0], g.qubits[1], 2});
    if (g.kind == GateKind::MeasureZ) add_site(3, {i, g.qubits[0], g.qubits[0], 0});
    if (g.kind == GateKind::Reset) add_site(0, {i + 1, g.qubits[0], g.qubits[0], 0});
  }
  for (int cls = 0; cls < 4; ++cls) {
    effects_[cls].resize(sites_[cls].size());
    parallel_for(sites_[cls].size(), [&](std::size_t k) {
      const auto& s = sites_[cls][k];
      const std::uint64_t b0 = std::uint64_t{1} << s.q0, b1 = std::uint64_t{1} << s.q1;
      auto& e = effects_[cls][k];
      e[0] = propagate(s.gate, b0, 0);
      if (s.kind >= 1) e[1] = propagate(s.gate, 0, b0);
      if (s.kind == 2) {
        e[2] = propagate(s.gate, b1, 0);
        e[3] = propagate(s.gate, 0, b1);
      }
    });
  }
}

std::size_t FrameSampler::n_noise_sites() const {
  return sites_[0].size() + sites_[1].size() + sites_[2].size() + sites_[3].size();
}

FrameSampler::Effect FrameSampler::propagate(std::uint32_t position, std::uint64_t x, std::uint64_t z) const {
  Effect e;
  e.flips.assign(words_, 0);
  const auto& phys = physical_.gates();
  auto flip = [&](const Gate& g) {
    const auto r = rotation_of_gate_.at(static_cast<std::size_t>(g.origin));
    e.flips[static_cast<std::size_t>(r) / 64] ^= std::uint64_t{1} << (r % 64);
  };
  for (std::size_t i = position; i < phys.size(); ++i) {
    const auto& g = phys[i];
    const std::uint64_t a = std::uint64_t{1} << g.qubits[0];
    const std::uint64_t b = std::uint64_t{1} << g.qubits[1];
    switch (g.kind) {
      case GateKind::H: {
        const bool xa = x & a, za = z & a;
        x = za ? (x | a) : (x & ~a);
        z = xa ? (z | a) : (z & ~a);
        break;
      }
      case GateKind::S:
      case GateKind::Sdg:
        if (x & a) z ^= a;
        break;
      case GateKind::X: case GateKind::Y: case GateKind::Z:
        break;
      case GateKind::RZ:
        if (x & a) flip(g);
        break;
      case GateKind::RZZ:
        if (static_cast<bool>(x & a) != static_cast<bool>(x & b)) flip(g);
        break;
      case GateKind::CX:
        if (x & a) x ^= b;
        if (z & b) z ^= a;
        break;
      case GateKind::MeasureZ:
        if (x & a) e.cbits ^= std::uint64_t{1} << g.cbit;
        break;
      case GateKind::Reset:
        x &= ~a;
        z &= ~a;
        break;
      case GateKind::PauliRotation:
        throw std::logic_error("FrameSampler: untranspiled rotation in physical circuit");
    }
  }
  return e;
}

void FrameSampler::draw(CounterRng& rng, std::vector<std::uint64_t>& flips, std::uint64_t& cbits) const {
  const double probs[4] = {p_.bi, p_.q1, p_.q2, p_.bm};
  auto apply = [&](const Effect& e) {
    for (std::size_t w = 0; w < words_; ++w) flips[w] ^= e.flips[w];
    cbits ^= e.cbits;
  };
  for (int cls = 0; cls < 4; ++cls) {
    const auto n = sites_[cls].size();
    if (n == 0) continue;
    for (std::uint64_t k = geometric_skip(rng, probs[cls]); k < n; k += 1 + geometric_skip(rng, probs[cls])) {
      const auto& e = effects_[cls][k];
      switch (sites_[cls][k].kind) {
        case 0:
          apply(e[0]);
          break;
        case 1: {
          const auto letter = rng.below(3);  // X, Y, Z
          if (letter != 2) apply(e[0]);
          if (letter != 0) apply(e[1]);
          break;
        }
        default: {
          const auto code = rng.below(15) + 1;
          const auto la = code & 3u, lb = code >> 2;  // Pauli encoding: bit0 = x, bit1 = z
          if (la & 1u) apply(e[0]);
          if (la & 2u) apply(e[1]);
          if (lb & 1u) apply(e[2]);
          if (lb & 2u) apply(e[3]);
          break;
        }
      }
    }
  }
}

std::vector<double> FrameSampler::signature_distribution(const std::vector<std::uint64_t>& flips,
                                                         std::uint64_t& ideal_bits) const {
  StateVector psi(logical_.n_qubits());
  ideal_bits = 0;
  const auto& gates = logical_.gates();
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const auto& g = gates[i];
    if (g.kind == GateKind::MeasureZ || g.kind == GateKind::Reset) {
      if (terminal_[i]) continue;
      const double p1 = psi.probability_one(g.qubits[0]);
      if (p1 > 1e-9 && p1 < 1.0 - 1e-9) {
        throw NonDeterministicMeasurement("mid-circuit measurement on qubit " + std::to_string(g.qubits[0]) +
                                          " is not deterministic (p1 = " + std::to_string(p1) + ")");
      }
      const int outcome = measure_qubit(psi, g.qubits[0], p1 > 0.5 ? 0.0 : 1.0);
      if (g.kind == GateKind::MeasureZ) {
        if (outcome) ideal_bits |= std::uint64_t{1} << g.cbit;
      } else if (outcome) {
        apply_unitary(psi, Gate::single(GateKind::X, g.qubits[0]));
      }
      continue;
    }
    const auto r = rotation_of_gate_[i];
    if (r >= 0 && ((flips[static_cast<std::size_t>(r) / 64] >> (r % 64)) & 1u)) {
      Gate flipped = g;
      flipped.angle = -g.angle;
      apply_unitary(psi, flipped);
    } else {
      apply_unitary(psi, g);
    }
  }
  std::vector<double> cumulative(static_cast<std::size_t>(psi.amplitudes().size()));
  double acc = 0.0;
  for (std::size_t b = 0; b < cumulative.size(); ++b) {
    acc += std::norm(psi.amplitudes()[static_cast<Eigen::Index>(b)]);
    cumulative[b] = acc;
  }
  return cumulative;
}

std::vector<FrameSampler::Shot> FrameSampler::sample(std::uint64_t first, std::size_t count) const {
  std::vector<Shot> shots(count);
  std::vector<std::vector<std::uint64_t>> signature(count);
  const std::size_t n_chunks = (count + kChunk - 1) / kChunk;
  parallel_for(n_chunks, [&](std::size_t c) {
    const std::size_t end = std::min(count, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      CounterRng rng(options_.seed, 2 * options_.stream, first + i);
      std::vector<std::uint64_t> flips(words_);
      std::uint64_t cbits = 0;
      for (int attempt = 0;; ++attempt) {
        std::fill(flips.begin(), flips.end(), 0);
        cbits = 0;
        draw(rng, flips, cbits);
        if (!(cbits & options_.retry_mask)) break;
        if (attempt == kMaxRetries) throw std::runtime_error("FrameSampler: preparation retries exhausted");
      }
      shots[i].accepted = !(cbits & options_.check_mask);
      shots[i].cbits = cbits;
      signature[i] = std::move(flips);
    }
  });

  std::map<std::vector<std::uint64_t>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < count; ++i)
    if (shots[i].accepted) buckets[signature[i]].push_back(i);
  std::vector<const std::pair<const std::vector<std::uint64_t>, std::vector<std::size_t>>*> work;
  for (const auto& kv : buckets) work.push_back(&kv);

  std::vector<std::pair<std::size_t, std::size_t>> terminal;  // (qubit, cbit)
  for (std::size_t i = 0; i < logical_.size(); ++i)
    if (terminal_[i]) terminal.emplace_back(logical_.gates()[i].qubits[0], logical_.gates()[i].cbit);

  parallel_for(work.size(), [&](std::size_t w) {
    std::uint64_t ideal = 0;
    const auto cumulative = signature_distribution(work[w]->first, ideal);
    if (ideal & (options_.check_mask | options_.retry_mask)) {
      throw std::logic_error("FrameSampler: a check bit is set in the noiseless circuit");
    }
    const double total = cumulative.back();
    for (auto i : work[w]->second) {
      CounterRng rng(options_.seed, 2 * options_.stream + 1, first + i);
      const double u = rng.uniform() * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      if (it == cumulative.end()) --it;
      const auto basis = static_cast<std::uint64_t>(it - cumulative.begin());
      std::uint64_t bits = ideal;
      for (const auto& [q, c] : terminal)
        if ((basis >> q) & 1u) bits |= std::uint64_t{1} << c;
      shots[i].cbits ^= bits;
    }
  });
  return shots;
}

const StringEstimate& MeasurementRun::estimate(const PauliString& p) const {
  for (const auto& e : estimates)
    if (e.string == p) return e;
  throw std::out_of_range("MeasurementRun: string " + p.str() + " was not measured");
}

MeasurementRun measure_pauli_strings(const Circuit& prep, const std::vector<PauliString>& strings,
                                     std::size_t shots, std::uint64_t seed,
                                     const std::optional<NoiseModel>& noise, const PostSelection& post) {
  if (shots == 0) throw std::invalid_argument("measure_pauli_strings: shots must be positive");
  MeasurementRun run;
  const auto groups = group_qubitwise(strings);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    GroupRecord rec;
    rec.strings = groups[g];
    rec.basis = PauliString(prep.n_qubits());
    for (const auto& s : rec.strings)
      for (auto q : s.support()) rec.basis.set(q, s[q]);
    Circuit circuit = prep;
    rec.cbit_of_qubit = append_basis_measurement(circuit, rec.basis);

    FrameSampler::Options opt{noise, seed, g, mask_of(post.check_cbits), mask_of(post.retry_cbits)};
    const FrameSampler sampler(circuit, opt);
    const bool checks = opt.check_mask != 0;
    std::uint64_t submitted = 0;
    auto take = [&](std::size_t n) {
      for (const auto& s : sampler.sample(submitted, n)) {
        ++submitted;
        if (s.accepted) rec.outcomes.push_back(s.cbits);
        if (post.inflate && rec.outcomes.size() == shots) break;
      }
    };
    take(shots);
    auto rate = [&] { return double(rec.outcomes.size()) / double(submitted); };
    if (checks && rate() < post.min_success) {
      throw LowSuccessRate("post-selection success rate " + std::to_string(rate()) + " below " +
                               std::to_string(post.min_success),
                           submitted, rec.outcomes.size());
    }
    while (post.inflate && rec.outcomes.size() < shots) {
      const double need = double(shots - rec.outcomes.size()) / std::max(rate(), 1e-6);
      take(static_cast<std::size_t>(std::ceil(need * 1.1)) + 16);
    }
    rec.submitted = submitted;
    run.submitted += submitted;
    run.accepted += rec.outcomes.size();

    for (const auto& s : rec.strings) {
      std::uint64_t cmask = 0;
      for (auto q : s.support()) cmask |= std::uint64_t{1} << rec.cbit_of_qubit[q];
      StringEstimate est;
      est.string = s;
      est.basis = rec.basis.str();
      est.shots = rec.outcomes.size();
      for (auto bits : rec.outcomes) est.ones += std::popcount(bits & cmask) & 1;
      if (est.shots > 0) {
        est.mean = 1.0 - 2.0 * double(est.ones) / double(est.shots);
        est.std_error = std::sqrt(std::max(0.0, 1.0 - est.mean * est.mean) / double(est.shots));
      }
      run.estimates.push_back(est);
    }
    run.groups.push_back(std::move(rec));
  }
  return run;
}

SampleResult sample_expectation(const Circuit& circuit, const PauliSum& obs, std::size_t shots,
                                std::uint64_t seed, const std::optional<NoiseModel>& noise) {
  if (shots == 0) throw std::invalid_argument("sample_expectation: shots must be positive");
  if (obs.n_qubits() != circuit.n_qubits()) throw std::invalid_argument("sample_expectation: width mismatch");
  std::vector<PauliString> strings;
  SampleResult out;
  for (const auto& [p, c] : obs.terms()) {
    if (p.is_identity()) out.estimate += c.real();
    else strings.push_back(p);
  }
  if (strings.empty()) return out;
  const auto run = measure_pauli_strings(circuit, strings, shots, seed, noise);
  double variance = 0.0;
  for (const auto& rec : run.groups) {
    std::vector<std::pair<std::uint64_t, double>> terms;
    for (const auto& s : rec.strings) {
      std::uint64_t cmask = 0;
      for (auto q : s.support()) cmask |= std::uint64_t{1} << rec.cbit_of_qubit[q];
      terms.emplace_back(cmask, obs.coefficient(s).real());
    }
    double sum = 0.0, sum2 = 0.0;
    for (auto bits : rec.outcomes) {
      double v = 0.0;
      for (const auto& [m, c] : terms) v += (std::popcount(bits & m) & 1) ? -c : c;
      sum += v;
      sum2 += v * v;
    }
    const double n = double(rec.outcomes.size());
    const double mean = sum / n;
    out.estimate += mean;
    variance += std::max(0.0, sum2 / n - mean * mean) / n;
  }
  out.std_error = std::sqrt(variance);
  out.tallies = run.estimates;
  return out;
}

std::string tallies_csv(const std::vector<StringEstimate>& tallies) {
  std::ostringstream os;
  os << "string,basis,shots,ones\n";
  for (const auto& t : tallies) os << t.string.str() << ',' << t.basis << ',' << t.shots << ',' << t.ones << '\n';
  return os.str();
}

}  // namespace ghost
