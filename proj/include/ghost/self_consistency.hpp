#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghost/embedding.hpp"
#include "ghost/fock_ed.hpp"
#include "ghost/gga_bethe.hpp"
#include "json.hpp"

namespace ghost {

/// Per-spin quasiparticle unknowns (spin blocks identical in the paramagnet).
struct GGAState {
  Eigen::VectorXd R;
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd delta;
};

/// Standard starting point: R = (1, 0.3, ...) normalized, lambda diagonal
/// (0, +0.5, -0.5, ...). A seed adds a uniform perturbation of the given size.
GGAState initial_state(std::size_t bath, std::optional<std::uint64_t> seed = std::nullopt,
                       double amplitude = 0.05);

struct ImpuritySolution {
  Eigen::MatrixXd rho;  // per-spin density matrix in the solver's (diagonal lambda_c) basis
  double double_occupancy = 0.0;
  double energy = 0.0;
};

using ImpuritySolver = std::function<ImpuritySolution(const EmbeddingParams&)>;

ImpuritySolver ed_solver();

struct SelfConsistencyConfig {
  double alpha = 0.3;
  double tol = 1e-6;
  std::size_t max_iter = 500;
  double g = 10.0;
  std::size_t n_nodes = 1000;
  std::optional<std::uint64_t> seed;
  double perturbation = 0.05;
  WarningSink warn;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double residual_R = 0.0;
  double residual_lambda = 0.0;
  double residual_delta = 0.0;  // |Delta_emb - Delta_lat|
  double residual_D = 0.0;      // change of D against the previous iteration
  double double_occupancy = 0.0;
  double energy = 0.0;
  double residual() const { return std::max(residual_R, residual_lambda); }
};

struct SelfConsistencyResult {
  double U = 0.0;
  GGAState state;
  EmbeddingParams params;       // couplings in the diagonal lambda_c gauge
  Eigen::MatrixXd gauge;        // columns: lambda_c eigenvectors (descending levels)
  Eigen::VectorXd D;            // hybridization before the gauge rotation
  Eigen::MatrixXd rho;          // embedding density matrix, original bath basis
  double double_occupancy = 0.0;
  double energy = 0.0;
  bool converged = false;
  std::vector<IterationRecord> history;

  nlohmann::json to_json() const;
  static SelfConsistencyResult from_json(const nlohmann::json& j);
  std::string history_csv() const;
};

/// One pass of the loop at fixed (R, lambda): lattice moments, hybridization,
/// bath levels and the diagonal gauge.
struct EmbeddingSetup {
  LatticeMoments moments;
  Eigen::VectorXd D;
  Eigen::MatrixXd lambda_c;
  Eigen::MatrixXd gauge;
  EmbeddingParams params;
};

EmbeddingSetup embedding_setup(double U, const GGAState& state, const QuadratureGrid& grid, double g,
                               const WarningSink& warn = {});

/// Feeds solver observables (rotated back from the gauge basis) through the
/// embedding and lambda updates. Decoupled bath orbitals (from degenerate
/// starting levels) are tolerated.
struct UpdatedState {
  EmbeddingUpdate embedding;
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd rho;  // original bath basis
};

UpdatedState update_from_solution(const EmbeddingSetup& setup, const Eigen::MatrixXd& rho_gauge,
                                  const WarningSink& warn = {});

/// Iterates to self-consistency with linear mixing. Non-convergence returns
/// converged = false with the full residual history.
SelfConsistencyResult self_consistency(double U, std::size_t bath, const ImpuritySolver& solver,
                                       const SelfConsistencyConfig& config = {});

}  // namespace ghost
