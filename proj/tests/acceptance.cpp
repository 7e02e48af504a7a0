// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

#include "ghost/avqite.hpp"
#include "ghost/iceberg.hpp"
#include "ghost/measurement.hpp"
#include "ghost/rng.hpp"
#include "ghost/self_consistency.hpp"
#include "ghost/spectra.hpp"

namespace ghost {
namespace {

constexpr double kU = 2.5;
constexpr std::size_t kShots = 100000;

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Report {
  int failures = 0;

  // A criterion passes only if every one of its checks does.
  struct Criterion {
    Report& report;
    int id;
    bool ok = true;
    std::string detail;

    void check(bool cond, const std::string& what) {
      ok = ok && cond;
      if (!detail.empty()) detail += "; ";
      detail += what + (cond ? "" : " [out of band]");
    }
    ~Criterion() {
      std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
      std::fflush(stdout);
      if (!ok) ++report.failures;
    }
  };
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double z_of(const SelfConsistencyResult& r) { return qp_weight(gauge_blocks(r.state.R, r.state.lambda)); }

bool in(double x, double lo, double hi) { return x >= lo && x <= hi; }

std::vector<int> run_noiseless(const Circuit& c, StateVector& psi) {
  CounterRng rng(1, 2, 3);
  std::vector<int> cbits(c.n_cbits(), 0);
  for (const auto& g : c.gates()) apply(psi, g, rng, cbits);
  return cbits;
}

void criterion_1(Report& report) {
  Report::Criterion c{report, 1};
  Clock clock;
  const auto r = self_consistency(kU, 1, ed_solver());
  const double t = clock.seconds();
  const double x = kU * 3 * M_PI / 32;
  const double z_closed = 1 - x * x, docc_closed = (1 - x) / 4;
  const double z = z_of(r);
  c.check(r.converged, "converged");
  c.check(std::abs(z - z_closed) <= 1e-3, fmt("Z %.5f vs closed form %.5f", z, z_closed));
  c.check(std::abs(r.double_occupancy - docc_closed) <= 1e-3,
          fmt("docc %.5f vs closed form %.5f", r.double_occupancy, docc_closed));
  c.check(t < 10, fmt("%.2f s (< 10 s)", t));
}

void criterion_2(Report& report, SelfConsistencyResult& b3) {
  Report::Criterion c{report, 2};
  struct Row {
    std::size_t B;
    double docc, z;
  };
  for (const Row row : {Row{3, 0.046, 0.13}, Row{5, 0.046, 0.10}}) {
    Clock clock;
    const auto r = self_consistency(kU, row.B, ed_solver());
    const double t = clock.seconds();
    const double z = z_of(r);
    const std::string tag = "B=" + std::to_string(row.B) + " ";
    c.check(r.converged, tag + "converged");
    c.check(std::abs(r.double_occupancy - row.docc) <= 0.002,
            tag + fmt("docc %.4f (%.3f +- 0.002)", r.double_occupancy, row.docc));
    c.check(std::abs(z - row.z) <= 0.01, tag + fmt("Z %.4f (%.2f +- 0.01)", z, row.z));
    c.check(t < 300, tag + fmt("%.1f s (< 300 s)", t));
    if (row.B == 3) b3 = r;
  }
}

EmbeddingRun criterion_3(Report& report, const SelfConsistencyResult& b3) {
  Report::Criterion c{report, 3};
  Clock clock;
  auto run = run_embedding(b3.params, AvqiteConfig{}, 0.01, b3.gauge);
  const double t = clock.seconds();
  c.check(run.first_below_threshold.has_value(), "eps_DM^max < 0.01 reached");
  if (run.first_below_threshold) {
    const auto& cp = *run.first_below_threshold;
    c.check(in(double(cp.depth), 12, 25), fmt("D %.0f in [12, 25]", double(cp.depth)));
    c.check(in(double(cp.n_params), 30, 70), fmt("N_theta %.0f in [30, 70]", double(cp.n_params)));
    c.check(cp.infidelity <= 5e-3, fmt("infidelity %.2e (<= 5e-3), eps_max %.4f", cp.infidelity, cp.eps_dm_max));
  }
  c.check(t < 1800, fmt("%.0f s (< 1800 s)", t));
  return run;
}

void criterion_4(Report& report, const SelfConsistencyResult& b3) {
  Report::Criterion c{report, 4};
  const auto dos = QuadratureGrid::semicircle(1000);
  const auto& R = b3.state.R;
  const auto& lambda = b3.state.lambda;

  const auto s = compute_spectra(R, lambda, FrequencyGrid::linear(-3, 3, 1201, 0.02), dos);
  const Eigen::VectorXd A = s.spectral_function();
  bool central = false, band_pos = false, band_neg = false;
  for (auto i : local_maxima(A)) {
    const double w = s.freq.omega[i];
    central = central || std::abs(w) < 0.1;
    band_pos = band_pos || std::abs(w - 1.25) <= 0.3;
    band_neg = band_neg || std::abs(w + 1.25) <= 0.3;
  }
  c.check(central && band_pos && band_neg, "maxima at |w| < 0.1 and at +-(1.25 +- 0.3)");

  const auto wide = compute_spectra(R, lambda, FrequencyGrid::linear(-4, 4, 1601, 0.02), dos);
  const double sum = wide.sum_rule(), norm = R.squaredNorm();
  c.check(std::abs(sum - norm) <= 0.01 * norm, fmt("int A on [-4, 4] %.5f vs |R|^2 %.5f", sum, norm));

  const auto g = gauge_blocks(R, lambda);
  const auto freq = FrequencyGrid::linear(-3, 3, 1201, 0.02);
  const Eigen::VectorXcd pole = self_energy(g, freq);
  double dev = 0;
  for (double e : {-0.7, 0.0, 0.4}) dev = std::max(dev, (pole - self_energy_dyson(R, lambda, e, freq)).cwiseAbs().maxCoeff());
  c.check(dev <= 1e-8, fmt("max |Sigma_pole - Sigma_Dyson| %.2e (<= 1e-8)", dev));

  const double z = qp_weight(g), z_slope = qp_weight_slope(g);
  c.check(std::abs(z - z_slope) <= 1e-3, fmt("Z %.6f vs slope %.6f", z, z_slope));
}

void criterion_5(Report& report, const SelfConsistencyResult& b3, const AnsatzState& d18) {
  Report::Criterion c{report, 5};
  const ModeLayout layout(3);
  const auto freq = FrequencyGrid::linear();
  NoiseModel noise;

  const auto m = measure_density(d18, layout, 0, kShots, 1, noise);
  c.check(in(m.eps.max, 0.06, 0.17), fmt("eps max %.4f in [0.06, 0.17]", m.eps.max));
  c.check(in(m.eps.median, 0.02, 0.07), fmt("eps median %.4f in [0.02, 0.07]", m.eps.median));

  const auto noisy = quasiparticle_from_density(b3, m.measured.rho);
  const auto clean = quasiparticle_from_density(b3, m.reference.rho);
  c.check(in(noisy.Z, 0.06, 0.18), fmt("noisy Z %.4f in [0.06, 0.18]", noisy.Z));

  const double w_clean = hubbard_band_weight(clean, b3.U, freq);
  const double w_noisy = hubbard_band_weight(noisy, b3.U, freq);
  c.check(w_noisy < 0.5 * w_clean, fmt("band weight %.4f < 50%% of noiseless %.4f", w_noisy, w_clean));

  // Recovery: the spread over independent seeds sets sigma.
  noise.noise_scale = 0.01;
  std::vector<double> w;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto mi = measure_density(d18, layout, 0, kShots, seed, noise);
    w.push_back(hubbard_band_weight(quasiparticle_from_density(b3, mi.measured.rho), b3.U, freq));
  }
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / double(w.size());
  double var = 0;
  for (double x : w) var += (x - mean) * (x - mean);
  const double sigma = std::sqrt(var / double(w.size() - 1));
  c.check(std::abs(mean - w_clean) <= 3 * sigma,
          fmt("noise_scale 0.01 band weight %.4f +- %.4f vs noiseless %.4f (3 sigma)", mean, sigma, w_clean));
}

void criterion_6(Report& report, const AnsatzState& d10, const AnsatzState& d18) {
  Report::Criterion c{report, 6};
  const IcebergCode code(8);
  const ModeLayout layout(3);
  const auto strings = density_strings(layout);

  // Noiseless encoded statevectors against the logical circuit.
  double dev = 0;
  bool clean_syndromes = true;
  const StateVector logical(Eigen::VectorXcd(d18.state().cast<cplx>()));
  for (std::size_t M = 0; M <= 4; ++M) {
    const auto enc = encode_circuit(d18, M, code);
    StateVector psi(code.n_physical());
    const auto cbits = run_noiseless(enc.circuit, psi);
    for (auto b : enc.syndrome_cbits) clean_syndromes = clean_syndromes && cbits[b] == 0;
    for (const auto& s : strings) {
      const auto p = code.logical_to_physical(s);
      dev = std::max(dev, std::abs(p.phase * expectation(psi, p.string) - expectation(logical, s)));
    }
  }
  c.check(dev <= 1e-10 && clean_syndromes, fmt("noiseless encoded vs logical max dev %.1e (M = 0..4)", dev));

  NoiseModel noise;
  noise.noise_scale = 0.2;
  const double d0 = measure_density(d18, layout, 0, kShots, 1, noise).metrics.trace_distance;
  const double d2 = measure_density(d18, layout, 2, kShots, 1, noise).metrics.trace_distance;
  c.check(d2 <= 0.75 * d0, fmt("D18 noise_scale 0.2 delta_DM M=2 %.4f vs M=0 %.4f (%.0f%% lower)", d2, d0,
                               100 * (1 - d2 / d0)));

  noise.noise_scale = 2.0;
  const std::vector<PauliString> probe{strings.front()};
  const double s10 = measure_encoded(d10, 4, probe, 20000, 1, noise).success_rate();
  const double s18 = measure_encoded(d18, 4, probe, 20000, 1, noise).success_rate();
  c.check(in(s10, 0.15, 0.45), fmt("success D10 M=4 noise_scale 2: %.3f in [0.15, 0.45]", s10));
  c.check(s18 < s10, fmt("D18 %.3f below D10", s18));

  // Every single data-qubit Pauli between logical operations is flagged by a
  // later syndrome round.
  const auto enc = encode_circuit(d18, 2, code);
  const auto& gates = enc.circuit.gates();
  std::size_t first = 0;
  while (gates[first].kind != GateKind::PauliRotation) ++first;
  const std::size_t last = enc.round_gate_index.back();
  const std::size_t round_len = gates.size() - last;
  std::size_t checked = 0, missed = 0;
  for (std::size_t gap = first; gap <= last; ++gap) {
    bool inside_round = false;
    for (auto r : enc.round_gate_index) inside_round = inside_round || (gap > r && gap < r + round_len);
    if (inside_round) continue;
    for (std::size_t q = 0; q < code.n_data(); ++q) {
      for (auto kind : {GateKind::X, GateKind::Y, GateKind::Z}) {
        Circuit circ(enc.circuit.n_qubits(), enc.circuit.n_cbits());
        for (std::size_t i = 0; i < gates.size(); ++i) {
          if (i == gap) circ.add(Gate::single(kind, q));
          circ.add(gates[i]);
        }
        StateVector psi(code.n_physical());
        const auto cbits = run_noiseless(circ, psi);
        int flagged = 0;
        for (auto b : enc.syndrome_cbits) flagged += cbits[b];
        missed += flagged == 0;
        ++checked;
      }
    }
  }
  c.check(missed == 0, fmt("single errors detected: %.0f of %.0f", double(checked - missed), double(checked)));
}

void criterion_7(Report& report) {
  Report::Criterion c{report, 7};
  // Property suites live in the unit-test binaries; run the listed ones here.
  struct Suite {
    const char* binary;
    const char* filter;
    const char* label;
  };
  const Suite suites[] = {
      {GHOST_PAULI_TEST, "PauliString.DenseMatchesKroneckerOracle:Multiply.*:PauliSum.DenseAndSparseAgree",
       "Pauli matrix oracles"},
      {GHOST_PAULI_TEST, "UpToSixModes/Anticommutation.*:JordanWigner.*", "JW anticommutation"},
      {GHOST_QSIM_TEST, "Noise.BellPrepTrajectoriesMatchChannelOracle:Sampling.*ChannelOracle*",
       "channel vs trajectories"},
      {GHOST_AVQITE_TEST, "McLachlan.MetricMatchesFiniteDifferenceGram", "M-matrix finite differences"},
      {GHOST_AVQITE_TEST, "McLachlan.GradientIsHalfEnergyDerivative", "V = dE/2"},
      {GHOST_QSIM_TEST, "Transpile.UnitaryEquivalentOnRandomStates", "transpile equivalence"},
      {GHOST_GGA_TEST, "Quadrature.SemicircleMoments", "DOS moments"},
      {GHOST_GGA_TEST, "TraceDerivative.*:LambdaC.*:LambdaUpdate.*", "lambda_c derivative"},
  };
  Clock clock;
  for (const auto& s : suites) {
    // An empty filter match would also exit 0, so the passed count must be positive.
    const std::string cmd = std::string("\"") + s.binary + "\" --gtest_filter='" + s.filter + "' 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    int passed = 0;
    char line[512];
    while (pipe && std::fgets(line, sizeof line, pipe)) std::sscanf(line, "[  PASSED  ] %d", &passed);
    const int status = pipe ? pclose(pipe) : -1;
    c.check(status == 0 && passed > 0, std::string(s.label) + " (" + std::to_string(passed) + " tests)");
  }
  const double t = clock.seconds();
  c.check(t < 900, fmt("%.1f s (< 900 s)", t));
}

int main_impl() {
  Report report;
  SelfConsistencyResult b3;
  criterion_1(report);
  criterion_2(report, b3);
  const auto run = criterion_3(report, b3);
  criterion_4(report, b3);

  const auto d10 = run.last_at_depth.find(10), d18 = run.last_at_depth.find(18);
  if (d10 == run.last_at_depth.end() || d18 == run.last_at_depth.end()) {
    std::printf("FAIL criterion 5: no D = 18 snapshot\nFAIL criterion 6: no D = 10 / 18 snapshots\n");
    report.failures += 2;
  } else {
    std::printf("# snapshots: D10 N_theta %zu, D18 N_theta %zu\n", d10->second.n_params(), d18->second.n_params());
    criterion_5(report, b3, d18->second);
    criterion_6(report, d10->second, d18->second);
  }
  criterion_7(report);
  std::printf("%d of 7 criteria failed\n", report.failures);
  return report.failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace ghost

int main() { return ghost::main_impl(); }
