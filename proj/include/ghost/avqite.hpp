#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ghost/embedding.hpp"
#include "ghost/pauli.hpp"
#include "ghost/qsim.hpp"
#include "ghost/self_consistency.hpp"
#include "json.hpp"

namespace ghost {

using RealSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Real matrix of a Hermitian PauliSum whose matrix elements are all real
/// (e.g. a Jordan-Wigner fermion Hamiltonian with real couplings).
RealSparse real_hamiltonian(const PauliSum& h);

/// A = -i G for a Pauli string with an odd number of Y letters, acting on real
/// vectors; A is real antisymmetric with A^2 = -1.
class RealGenerator {
 public:
  explicit RealGenerator(const PauliString& g);
  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& in) const;
  /// v <- exp(-i theta G) v = cos(theta) v + sin(theta) A v.
  void rotate(Eigen::VectorXd& v, double theta, Eigen::VectorXd& scratch) const;

 private:
  std::uint64_t x_;
  std::uint64_t z_;
  double sign_;
};

/// |Psi(theta)> = prod_k exp(-i theta_k G_k) |reference>, the first generator
/// acting first.
struct AnsatzState {
  std::size_t n_qubits = 0;
  std::uint64_t reference = 0;
  std::vector<PauliString> generators;
  std::vector<double> theta;

  std::size_t n_params() const { return generators.size(); }
  /// Layers under as-soon-as-possible packing of generator supports.
  std::size_t depth() const;
  void append(const PauliString& g, double angle = 0.0);
  Eigen::VectorXd state() const;
  /// X on every reference bit, then one PauliRotation per generator.
  Circuit circuit() const;

  nlohmann::json to_json() const;
  static AnsatzState from_json(const nlohmann::json& j);
};

/// Impurity and the first (B-1)/2 bath orbitals occupied in both spins.
std::uint64_t embedding_reference(const ModeLayout& layout);

struct McLachlanData {
  Eigen::MatrixXd M;
  Eigen::VectorXd V;
  double energy = 0.0;
  double variance = 0.0;
  double L2 = 0.0;
};

constexpr double kTikhonov = 1e-6;

McLachlanData mclachlan(const AnsatzState& ansatz, const RealSparse& h);

/// Exact tangent vectors d_k = U_{>k} A_k U_{<=k} |ref> (columns) and the state.
struct Tangent {
  Eigen::VectorXd state;
  Eigen::MatrixXd derivatives;
};
Tangent tangent(const AnsatzState& ansatz);

struct StepFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdaptationStall : std::runtime_error {
  AdaptationStall(const std::string& what, double l2) : std::runtime_error(what), L2(l2) {}
  double L2;
};

struct StepResult {
  double energy_before = 0.0;
  double energy_after = 0.0;
  double dtau = 0.0;
  int halvings = 0;
};

/// theta += dtau * thetadot with (M + r I) thetadot = -V; dtau is halved up to
/// 20 times until the energy does not rise by more than 1e-8.
StepResult step(AnsatzState& ansatz, const RealSparse& h, double dtau, const McLachlanData& data);

struct AdaptOptions {
  double l2_cut = 1e-2;
  // Candidates whose L2 reduction is at least (1 - kappa) of the best one are
  // ranked by disjointness from the top layer first. kappa = 0 keeps only
  // exact ties (1e-10).
  double kappa = 0.95;
  std::size_t max_params = 400;
};

struct AdaptResult {
  std::size_t added = 0;
  double L2 = 0.0;
  bool hit_max_params = false;
};

/// Grows the ansatz one generator at a time while L2 > l2_cut.
AdaptResult adapt(AnsatzState& ansatz, const RealSparse& h, const std::vector<PauliString>& pool,
                  const AdaptOptions& options);

struct AvqiteConfig {
  double dtau = 0.02;
  double l2_cut = 1e-2;
  double kappa = 0.95;
  double energy_tol = 1e-8;
  std::size_t patience = 10;
  std::size_t max_params = 400;
  std::size_t max_steps = 20000;

  nlohmann::json to_json() const;
  static AvqiteConfig from_json(const nlohmann::json& j);
};

enum class Termination { EnergyConverged, MaxParams, MaxSteps };
const char* termination_name(Termination t);

struct StepInfo {
  std::size_t step = 0;
  const AnsatzState* ansatz = nullptr;
  const Eigen::VectorXd* state = nullptr;
  double energy = 0.0;
  double L2 = 0.0;
  bool depth_increased = false;
  bool final = false;
};

using StepObserver = std::function<void(const StepInfo&)>;

struct RunResult {
  AnsatzState ansatz;
  double energy = 0.0;
  std::size_t steps = 0;
  Termination reason = Termination::EnergyConverged;
};

/// Alternates adapt and step until |dE| < energy_tol for `patience`
/// consecutive steps, the parameter budget is exhausted, or max_steps.
RunResult run(const RealSparse& h, const std::vector<PauliString>& pool, AnsatzState initial,
              const AvqiteConfig& config, const StepObserver& observer = {});

struct Checkpoint {
  std::size_t step = 0;
  std::size_t depth = 0;
  std::size_t n_params = 0;
  double energy = 0.0;
  double eps_dm_max = 0.0;
  double infidelity = 0.0;
  std::vector<double> R;
  std::string reason;  // "depth", "threshold" or "final"
  AnsatzState ansatz;

  nlohmann::json to_json() const;  // without the ansatz
};

struct EmbeddingRun {
  RunResult result;
  double ed_energy = 0.0;
  std::vector<Checkpoint> checkpoints;
  std::map<std::size_t, AnsatzState> last_at_depth;  // last accepted state per depth
  std::optional<Checkpoint> first_below_threshold;
};

/// AVQITE on the embedding Hamiltonian, benchmarked against ED. Checkpoints
/// are taken when the depth grows, when eps_dm_max first drops below
/// `threshold`, and at termination. `gauge` rotates bath orbitals back before
/// R is extracted (identity if empty).
EmbeddingRun run_embedding(const EmbeddingParams& params, const AvqiteConfig& config, double threshold = 0.01,
                           const Eigen::MatrixXd& gauge = {});

/// Impurity solver backed by AVQITE on the embedding Hamiltonian.
ImpuritySolver avqite_solver(const AvqiteConfig& config);

}  // namespace ghost
