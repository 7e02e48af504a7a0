#include "ghost/avqite.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "ghost/fock_ed.hpp"
#include "ghost/gga_bethe.hpp"
#include "ghost/parallel.hpp"

namespace ghost {

namespace {

std::vector<std::uint64_t> layer_masks(const std::vector<PauliString>& gens) {
  std::vector<std::uint64_t> layers;
  for (const auto& g : gens) {
    const std::uint64_t s = g.support_mask();
    std::size_t slot = 0;
    for (std::size_t l = layers.size(); l-- > 0;) {
      if (layers[l] & s) {
        slot = l + 1;
        break;
      }
    }
    if (slot == layers.size()) layers.push_back(0);
    layers[slot] |= s;
  }
  return layers;
}

Eigen::MatrixXd regularized(const Eigen::MatrixXd& M) {
  return M + kTikhonov * Eigen::MatrixXd::Identity(M.rows(), M.cols());
}

std::string reference_string(std::uint64_t bits, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t q = 0; q < n; ++q)
    if ((bits >> q) & 1) s[q] = '1';
  return s;
}

}  // namespace

RealSparse real_hamiltonian(const PauliSum& h) {
  const Eigen::SparseMatrix<cplx> c = h.to_sparse();
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < c.outerSize(); ++k) {
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(c, k); it; ++it) {
      if (std::abs(it.value().imag()) > 1e-12) {
        throw std::invalid_argument("real_hamiltonian: operator has complex matrix elements");
      }
      if (it.value().real() != 0.0) trips.emplace_back(it.row(), it.col(), it.value().real());
    }
  }
  RealSparse out(c.rows(), c.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

RealGenerator::RealGenerator(const PauliString& g) : x_(g.x_mask()), z_(g.z_mask()) {
  const std::size_t ny = g.y_count();
  if (ny % 2 == 0) throw std::invalid_argument("RealGenerator: " + g.str() + " needs an odd number of Y letters");
  // P|s> = i^ny (-1)^{|s & z|} |s ^ x>, so -iP carries the real factor -i * i^ny.
  sign_ = (ny % 4 == 1) ? 1.0 : -1.0;
}

void RealGenerator::apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
  out.resize(in.size());
  for (Eigen::Index s = 0; s < in.size(); ++s) {
    const auto u = static_cast<std::uint64_t>(s);
    out[static_cast<Eigen::Index>(u ^ x_)] = (std::popcount(u & z_) & 1 ? -sign_ : sign_) * in[s];
  }
}

Eigen::VectorXd RealGenerator::apply(const Eigen::VectorXd& in) const {
  Eigen::VectorXd out;
  apply(in, out);
  return out;
}

void RealGenerator::rotate(Eigen::VectorXd& v, double theta, Eigen::VectorXd& scratch) const {
  apply(v, scratch);
  v = std::cos(theta) * v + std::sin(theta) * scratch;
}

std::size_t AnsatzState::depth() const { return layer_masks(generators).size(); }

void AnsatzState::append(const PauliString& g, double angle) {
  if (g.size() != n_qubits) throw std::invalid_argument("AnsatzState: generator width mismatch");
  RealGenerator check(g);
  generators.push_back(g);
  theta.push_back(angle);
}

Eigen::VectorXd AnsatzState::state() const {
  if (n_qubits > 30) throw std::invalid_argument("AnsatzState: too many qubits for a statevector");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Eigen::Index(1) << n_qubits), scratch;
  v[static_cast<Eigen::Index>(reference)] = 1.0;
  for (std::size_t k = 0; k < generators.size(); ++k) RealGenerator(generators[k]).rotate(v, theta[k], scratch);
  return v;
}

Circuit AnsatzState::circuit() const {
  Circuit c(n_qubits);
  for (std::size_t q = 0; q < n_qubits; ++q)
    if ((reference >> q) & 1) c.add(Gate::single(GateKind::X, q));
  for (std::size_t k = 0; k < generators.size(); ++k) c.add(Gate::rotation(generators[k], theta[k]));
  return c;
}

nlohmann::json AnsatzState::to_json() const {
  auto gens = nlohmann::json::array();
  for (std::size_t k = 0; k < generators.size(); ++k) gens.push_back({generators[k].str(), theta[k]});
  return {{"n_qubits", n_qubits}, {"reference", reference_string(reference, n_qubits)}, {"generators", gens}};
}

AnsatzState AnsatzState::from_json(const nlohmann::json& j) {
  AnsatzState a;
  const auto ref = j.at("reference").get<std::string>();
  a.n_qubits = j.value("n_qubits", ref.size());
  if (ref.size() != a.n_qubits) throw std::invalid_argument("ansatz: reference length differs from n_qubits");
  for (std::size_t q = 0; q < ref.size(); ++q) {
    if (ref[q] != '0' && ref[q] != '1') throw std::invalid_argument("ansatz: reference must be a bitstring");
    if (ref[q] == '1') a.reference |= std::uint64_t{1} << q;
  }
  for (const auto& e : j.at("generators")) a.append(PauliString::parse(e.at(0).get<std::string>()), e.at(1).get<double>());
  return a;
}

std::uint64_t embedding_reference(const ModeLayout& layout) {
  std::uint64_t bits = 0;
  const std::size_t filled = (layout.bath() - 1) / 2;
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t mu = 0; mu <= filled; ++mu) bits |= std::uint64_t{1} << layout.qubit(mu, s);
  return bits;
}

Tangent tangent(const AnsatzState& a) {
  const Eigen::Index dim = Eigen::Index(1) << a.n_qubits;
  const std::size_t n = a.n_params();
  std::vector<RealGenerator> gens;
  gens.reserve(n);
  for (const auto& g : a.generators) gens.emplace_back(g);

  Tangent t;
  t.derivatives.resize(dim, static_cast<Eigen::Index>(n));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim), scratch;
  v[static_cast<Eigen::Index>(a.reference)] = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    gens[k].rotate(v, a.theta[k], scratch);
    t.derivatives.col(k) = gens[k].apply(v);
  }
  t.state = v;
  // Push each A_k U_{<=k}|ref> through the remaining rotations.
  parallel_for(n, [&](std::size_t k) {
    Eigen::VectorXd d = t.derivatives.col(k), tmp;
    for (std::size_t l = k + 1; l < n; ++l) gens[l].rotate(d, a.theta[l], tmp);
    t.derivatives.col(k) = d;
  });
  return t;
}

namespace {

McLachlanData mclachlan_from(const Tangent& t, const RealSparse& h, Eigen::VectorXd* hv_out = nullptr) {
  McLachlanData d;
  const Eigen::VectorXd hv = h * t.state;
  d.energy = t.state.dot(hv);
  d.variance = std::max(0.0, hv.squaredNorm() - d.energy * d.energy);
  const Eigen::VectorXd overlap = t.derivatives.transpose() * t.state;  // zero for real states
  d.M = t.derivatives.transpose() * t.derivatives + overlap * overlap.transpose();
  d.V = t.derivatives.transpose() * hv - d.energy * overlap;
  d.L2 = d.variance;
  if (d.V.size()) d.L2 -= d.V.dot(regularized(d.M).ldlt().solve(d.V));
  if (hv_out) *hv_out = hv;
  return d;
}

}  // namespace

McLachlanData mclachlan(const AnsatzState& ansatz, const RealSparse& h) { return mclachlan_from(tangent(ansatz), h); }

StepResult step(AnsatzState& a, const RealSparse& h, double dtau, const McLachlanData& data) {
  StepResult r;
  r.energy_before = data.energy;
  if (a.n_params() == 0) {
    r.energy_after = data.energy;
    return r;
  }
  const Eigen::VectorXd rate = -regularized(data.M).ldlt().solve(data.V);
  double dt = dtau;
  for (int halving = 0; halving <= 20; ++halving) {
    AnsatzState trial = a;
    for (std::size_t k = 0; k < a.n_params(); ++k) trial.theta[k] += dt * rate[static_cast<Eigen::Index>(k)];
    const Eigen::VectorXd v = trial.state();
    const double e = v.dot(h * v);
    if (e <= data.energy + 1e-8) {
      a = std::move(trial);
      r.energy_after = e;
      r.dtau = dt;
      r.halvings = halving;
      return r;
    }
    dt *= 0.5;
  }
  std::ostringstream os;
  os << "AVQITE step: energy rose after 20 halvings of dtau (E = " << data.energy << ", N_theta = " << a.n_params()
     << ")";
  throw StepFailure(os.str());
}

AdaptResult adapt(AnsatzState& a, const RealSparse& h, const std::vector<PauliString>& pool,
                  const AdaptOptions& opt) {
  if (pool.empty()) throw std::invalid_argument("adapt: empty operator pool");
  std::vector<RealGenerator> cands;
  cands.reserve(pool.size());
  for (const auto& g : pool) cands.emplace_back(g);

  AdaptResult out;
  for (;;) {
    const Tangent t = tangent(a);
    Eigen::VectorXd hv;
    const McLachlanData d = mclachlan_from(t, h, &hv);
    out.L2 = d.L2;
    if (d.L2 <= opt.l2_cut) return out;
    if (a.n_params() >= opt.max_params) {
      out.hit_max_params = true;
      return out;
    }
    const Eigen::Index n = d.V.size();
    Eigen::LLT<Eigen::MatrixXd> chol;
    Eigen::VectorXd lv;
    if (n) {
      chol.compute(regularized(d.M));
      lv = chol.matrixL().solve(d.V);
    }
    const Eigen::VectorXd overlap = t.derivatives.transpose() * t.state;

    // Prospective L2 by the Schur complement of the bordered metric.
    std::vector<double> score(pool.size());
    parallel_for(pool.size(), [&](std::size_t c) {
      const Eigen::VectorXd g = cands[c].apply(t.state);
      const double vg = t.state.dot(g);
      const double mm = g.squaredNorm() + vg * vg + kTikhonov;
      const double vn = g.dot(hv) - d.energy * vg;
      if (!n) {
        score[c] = d.L2 - vn * vn / mm;
        return;
      }
      const Eigen::VectorXd m = t.derivatives.transpose() * g + overlap * vg;
      const Eigen::VectorXd u = chol.matrixL().solve(m);
      const double s = mm - u.squaredNorm();
      const double w = vn - u.dot(lv);
      score[c] = s > 1e-14 ? d.L2 - w * w / s : d.L2;
    });

    const double best = *std::min_element(score.begin(), score.end());
    const double reduction = d.L2 - best;
    if (reduction <= 1e-12) {
      std::ostringstream os;
      os << "adapt: no pool generator lowers L2 = " << d.L2 << " (cut " << opt.l2_cut << ")";
      throw AdaptationStall(os.str(), d.L2);
    }
    const auto layers = layer_masks(a.generators);
    const std::uint64_t top = layers.empty() ? 0 : layers.back();
    std::size_t pick = pool.size();
    std::tuple<int, double, std::string> key;
    for (std::size_t c = 0; c < pool.size(); ++c) {
      if (d.L2 - score[c] < (1.0 - opt.kappa) * reduction - 1e-10) continue;
      std::tuple<int, double, std::string> k{(pool[c].support_mask() & top) ? 1 : 0, score[c], pool[c].str()};
      if (pick == pool.size() || k < key) {
        pick = c;
        key = std::move(k);
      }
    }
    a.append(pool[pick]);
    ++out.added;
  }
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::EnergyConverged: return "energy_converged";
    case Termination::MaxParams: return "max_params";
    case Termination::MaxSteps: return "max_steps";
  }
  return "unknown";
}

nlohmann::json AvqiteConfig::to_json() const {
  return {{"dtau", dtau},         {"l2_cut", l2_cut},         {"kappa", kappa},          {"energy_tol", energy_tol},
          {"patience", patience}, {"max_params", max_params}, {"max_steps", max_steps}};
}

AvqiteConfig AvqiteConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"dtau",     "l2_cut",     "kappa",    "energy_tol",
                                           "patience", "max_params", "max_steps"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw std::invalid_argument("avqite config: unknown key '" + k + "'");
  AvqiteConfig c;
  c.dtau = j.value("dtau", c.dtau);
  c.l2_cut = j.value("l2_cut", c.l2_cut);
  c.kappa = j.value("kappa", c.kappa);
  c.energy_tol = j.value("energy_tol", c.energy_tol);
  c.patience = j.value("patience", c.patience);
  c.max_params = j.value("max_params", c.max_params);
  c.max_steps = j.value("max_steps", c.max_steps);
  if (!(c.dtau > 0) || !(c.l2_cut >= 0) || c.kappa < 0 || c.kappa >= 1 || c.patience == 0) {
    throw std::invalid_argument("avqite config: need dtau > 0, l2_cut >= 0, 0 <= kappa < 1, patience > 0");
  }
  return c;
}

RunResult run(const RealSparse& h, const std::vector<PauliString>& pool, AnsatzState ansatz,
              const AvqiteConfig& config, const StepObserver& observer) {
  const AdaptOptions opt{config.l2_cut, config.kappa, config.max_params};
  RunResult res;
  std::size_t depth = ansatz.depth(), flat = 0;
  for (std::size_t it = 0;; ++it) {
    McLachlanData data = mclachlan(ansatz, h);
    bool budget = false;
    if (data.L2 > config.l2_cut) {
      const auto ar = adapt(ansatz, h, pool, opt);
      budget = ar.hit_max_params;
      if (ar.added) data = mclachlan(ansatz, h);
    }
    const auto sr = step(ansatz, h, config.dtau, data);
    flat = std::abs(sr.energy_after - sr.energy_before) < config.energy_tol ? flat + 1 : 0;
    res.steps = it + 1;
    res.energy = sr.energy_after;

    bool done = true;
    if (flat >= config.patience) {
      res.reason = Termination::EnergyConverged;
    } else if (budget) {
      res.reason = Termination::MaxParams;
    } else if (res.steps >= config.max_steps) {
      res.reason = Termination::MaxSteps;
    } else {
      done = false;
    }
    if (observer) {
      const Eigen::VectorXd v = ansatz.state();
      const std::size_t now = ansatz.depth();
      observer({it, &ansatz, &v, sr.energy_after, data.L2, now > depth, done});
      depth = now;
    }
    if (done) break;
  }
  res.ansatz = std::move(ansatz);
  return res;
}

nlohmann::json Checkpoint::to_json() const {
  return {{"step", step},         {"D", depth},  {"N_theta", n_params}, {"energy", energy}, {"eps_dm_max", eps_dm_max},
          {"infidelity", infidelity}, {"R", R}, {"reason", reason}};
}

EmbeddingRun run_embedding(const EmbeddingParams& params, const AvqiteConfig& config, double threshold,
                           const Eigen::MatrixXd& gauge) {
  params.validate();
  const ModeLayout layout(params.bath());
  const RealSparse h = real_hamiltonian(map_embedding_hamiltonian(params, layout));
  const auto gs = ground_state(params);
  const Eigen::VectorXd phi = to_full_space(gs.state);
  const SpinDensity ref_rho = density_matrix(phi, layout);
  const double ref_docc = double_occupancy(phi, layout);
  const Eigen::Index L = static_cast<Eigen::Index>(layout.orbitals());
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(L, L);
  if (gauge.size()) {
    if (gauge.rows() != L - 1 || gauge.cols() != L - 1) throw std::invalid_argument("run_embedding: gauge size");
    T.block(1, 1, L - 1, L - 1) = gauge;
  }

  EmbeddingRun out;
  out.ed_energy = gs.energy;
  AnsatzState init;
  init.n_qubits = layout.n_qubits();
  init.reference = embedding_reference(layout);

  out.result = run(h, build_pool(layout.n_qubits()), init, config, [&](const StepInfo& info) {
    const auto& v = *info.state;
    const SpinDensity rho = density_matrix(v, layout);
    const double docc = double_occupancy(v, layout);
    const double eps = dm_error_metrics(rho, ref_rho, std::make_pair(docc, ref_docc)).max_error;
    const double ov = v.dot(phi);
    out.last_at_depth[info.ansatz->depth()] = *info.ansatz;

    std::string reason;
    if (info.depth_increased) reason = "depth";
    if (!out.first_below_threshold && eps < threshold) reason += reason.empty() ? "threshold" : "+threshold";
    if (info.final) reason += reason.empty() ? "final" : "+final";
    if (reason.empty()) return;

    Checkpoint c;
    c.step = info.step;
    c.depth = info.ansatz->depth();
    c.n_params = info.ansatz->n_params();
    c.energy = info.energy;
    c.eps_dm_max = eps;
    c.infidelity = 1.0 - ov * ov;
    try {
      const Eigen::VectorXd R =
          embedding_update(T * rho.up * T.transpose(), {}, EdgePolicy::Decouple).R;
      c.R.assign(R.data(), R.data() + R.size());
    } catch (const DegenerateInput&) {
    }
    c.reason = reason;
    c.ansatz = *info.ansatz;
    if (!out.first_below_threshold && eps < threshold) out.first_below_threshold = c;
    out.checkpoints.push_back(std::move(c));
  });
  return out;
}

ImpuritySolver avqite_solver(const AvqiteConfig& config) {
  return [config](const EmbeddingParams& p) {
    const auto r = run_embedding(p, config);
    const ModeLayout layout(p.bath());
    const Eigen::VectorXd v = r.result.ansatz.state();
    const SpinDensity rho = density_matrix(v, layout);
    return ImpuritySolution{0.5 * (rho.up + rho.down), double_occupancy(v, layout), r.result.energy};
  };
}

}  // namespace ghost
