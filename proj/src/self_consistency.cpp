#include "ghost/self_consistency.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "ghost/rng.hpp"

namespace ghost {

namespace {

Eigen::MatrixXd to_matrix(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(m.cols())) throw std::invalid_argument("ragged matrix");
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
  }
  return m;
}

nlohmann::json from_matrix(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.cols());
    for (Eigen::Index k = 0; k < m.cols(); ++k) r[k] = m(i, k);
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

GGAState initial_state(std::size_t bath, std::optional<std::uint64_t> seed, double amplitude) {
  if (bath == 0 || bath % 2 == 0) throw std::invalid_argument("initial_state: bath size must be odd");
  const auto B = static_cast<Eigen::Index>(bath);
  GGAState s;
  s.R = Eigen::VectorXd::Constant(B, 0.3);
  s.R[0] = 1.0;
  s.lambda = Eigen::MatrixXd::Zero(B, B);
  for (Eigen::Index a = 1; a < B; ++a) s.lambda(a, a) = (a % 2 == 1) ? 0.5 : -0.5;
  if (seed) {
    CounterRng rng(*seed, 0x5ca1ab1e, 0);
    for (Eigen::Index a = 0; a < B; ++a) s.R[a] += amplitude * (2 * rng.uniform() - 1);
    for (Eigen::Index a = 0; a < B; ++a)
      for (Eigen::Index b = a; b < B; ++b) {
        const double d = amplitude * (2 * rng.uniform() - 1);
        s.lambda(a, b) += d;
        if (a != b) s.lambda(b, a) += d;
      }
  }
  s.R.normalize();
  s.delta = Eigen::MatrixXd::Zero(B, B);
  return s;
}

ImpuritySolver ed_solver() {
  return [](const EmbeddingParams& p) {
    const auto gs = ground_state(p);
    const auto rho = density_matrix(gs.state);
    return ImpuritySolution{0.5 * (rho.up + rho.down), double_occupancy(gs.state), gs.energy};
  };
}

EmbeddingSetup embedding_setup(double U, const GGAState& state, const QuadratureGrid& grid, double g,
                               const WarningSink& warn) {
  EmbeddingSetup s;
  s.moments = lattice_moments(state.R, state.lambda, grid);
  s.D = hybridization(s.moments.delta, s.moments.K, warn);
  s.lambda_c = lambda_c_from(state.R, s.moments.delta, s.D, state.lambda);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.lambda_c);
  const Eigen::Index B = s.D.size();
  std::vector<Eigen::Index> order(B);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return es.eigenvalues()[a] > es.eigenvalues()[b]; });
  s.gauge.resize(B, B);
  s.params.U = U;
  s.params.g = g;
  s.params.lambda_c.resize(B);
  for (Eigen::Index k = 0; k < B; ++k) {
    s.gauge.col(k) = es.eigenvectors().col(order[k]);
    s.params.lambda_c[k] = es.eigenvalues()[order[k]];
  }
  const Eigen::VectorXd rotated = s.gauge.transpose() * s.D;
  s.params.D.assign(rotated.data(), rotated.data() + B);
  return s;
}

UpdatedState update_from_solution(const EmbeddingSetup& setup, const Eigen::MatrixXd& rho_gauge,
                                  const WarningSink& warn) {
  const Eigen::Index B = setup.D.size();
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(B + 1, B + 1);
  T.block(1, 1, B, B) = setup.gauge;
  UpdatedState u;
  u.rho = T * rho_gauge * T.transpose();
  u.embedding = embedding_update(u.rho, warn, EdgePolicy::Decouple);
  u.lambda = lambda_update(setup.lambda_c, u.embedding.delta, setup.D, u.embedding.R);
  return u;
}

SelfConsistencyResult self_consistency(double U, std::size_t bath, const ImpuritySolver& solver,
                                       const SelfConsistencyConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) throw std::invalid_argument("mixing alpha must lie in (0, 1]");
  const auto grid = QuadratureGrid::semicircle(config.n_nodes);
  SelfConsistencyResult out;
  out.U = U;
  out.state = initial_state(bath, config.seed, config.perturbation);
  Eigen::VectorXd previous_D;

  for (std::size_t it = 0; it < config.max_iter; ++it) {
    const auto setup = embedding_setup(U, out.state, grid, config.g, config.warn);
    const auto sol = solver(setup.params);
    const auto upd = update_from_solution(setup, sol.rho, config.warn);

    IterationRecord rec;
    rec.iteration = it;
    rec.residual_R = (upd.embedding.R - out.state.R).cwiseAbs().maxCoeff();
    rec.residual_lambda = (upd.lambda - out.state.lambda).cwiseAbs().maxCoeff();
    rec.residual_delta = (upd.embedding.delta - setup.moments.delta).cwiseAbs().maxCoeff();
    rec.residual_D = previous_D.size() ? (setup.D - previous_D).cwiseAbs().maxCoeff() : 0.0;
    rec.double_occupancy = sol.double_occupancy;
    rec.energy = sol.energy;
    out.history.push_back(rec);
    previous_D = setup.D;

    out.state.delta = setup.moments.delta;
    out.params = setup.params;
    out.gauge = setup.gauge;
    out.D = setup.D;
    out.rho = upd.rho;
    out.double_occupancy = sol.double_occupancy;
    out.energy = sol.energy;
    if (rec.residual() < config.tol) {
      out.converged = true;
      break;
    }
    out.state.R = (1 - config.alpha) * out.state.R + config.alpha * upd.embedding.R;
    out.state.lambda = (1 - config.alpha) * out.state.lambda + config.alpha * upd.lambda;
    out.state.lambda = 0.5 * (out.state.lambda + out.state.lambda.transpose());
  }
  return out;
}

nlohmann::json SelfConsistencyResult::to_json() const {
  Eigen::VectorXd lc(params.lambda_c.size());
  for (std::size_t k = 0; k < params.lambda_c.size(); ++k) lc[k] = params.lambda_c[k];
  return {
      {"U", U},
      {"B", state.R.size()},
      {"R", to_vec(state.R)},
      {"lambda", from_matrix(state.lambda)},
      {"delta", from_matrix(state.delta)},
      {"lambda_c", params.lambda_c},
      {"D", params.D},
      {"g", params.g},
      {"gauge", from_matrix(gauge)},
      {"rho", from_matrix(rho)},
      {"docc", double_occupancy},
      {"energy", energy},
      {"converged", converged},
      {"iterations", history.size()},
  };
}

SelfConsistencyResult SelfConsistencyResult::from_json(const nlohmann::json& j) {
  SelfConsistencyResult r;
  r.U = j.at("U").get<double>();
  r.state.R = from_vec(j.at("R"));
  r.state.lambda = to_matrix(j.at("lambda"));
  r.state.delta = j.contains("delta") ? to_matrix(j.at("delta")) : Eigen::MatrixXd();
  r.params.U = r.U;
  r.params.D = j.at("D").get<std::vector<double>>();
  r.params.lambda_c = j.at("lambda_c").get<std::vector<double>>();
  r.params.g = j.value("g", 10.0);
  if (j.contains("gauge")) r.gauge = to_matrix(j.at("gauge"));
  if (j.contains("rho")) r.rho = to_matrix(j.at("rho"));
  r.double_occupancy = j.value("docc", 0.0);
  r.energy = j.value("energy", 0.0);
  r.converged = j.value("converged", false);
  const auto B = r.state.R.size();
  if (B == 0 || r.state.lambda.rows() != B || r.state.lambda.cols() != B) {
    throw std::invalid_argument("state file: R and lambda dimensions disagree");
  }
  return r;
}

std::string SelfConsistencyResult::history_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "iteration,residual,residual_R,residual_lambda,residual_delta,residual_D,docc,energy\n";
  for (const auto& h : history) {
    os << h.iteration << ',' << h.residual() << ',' << h.residual_R << ',' << h.residual_lambda << ','
       << h.residual_delta << ',' << h.residual_D << ',' << h.double_occupancy << ',' << h.energy << '\n';
  }
  return os.str();
}

}  // namespace ghost
