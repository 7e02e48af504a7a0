#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ghost {

/// Quadrature for integrals against the semicircular density of states
/// D0(e) = (2/pi) sqrt(1 - e^2) on [-1, 1]; weights sum to one.
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Gauss-Chebyshev of the second kind: exact for polynomials of degree < 2n.
  static QuadratureGrid semicircle(std::size_t n = 1000);
  double integrate(const std::function<double(double)>& f) const;
  std::size_t size() const { return nodes.size(); }
};

/// Raised when a density-like matrix has eigenvalues outside [0, 1].
struct DegenerateInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Receives human-readable warnings (e.g. eigenvalue flooring).
using WarningSink = std::function<void(const std::string&)>;

constexpr double kDeltaFloor = 1e-12;

struct LatticeMoments {
  Eigen::MatrixXd delta;  // Delta_ab = <f†_a f_b>
  Eigen::VectorXd K;      // K_a = int D0 e [P(e) R]_a
};

/// Occupied projector of h(e) = e R R^T + lambda (mu = 0, zero modes count 1/2),
/// integrated against D0.
LatticeMoments lattice_moments(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda,
                               const QuadratureGrid& grid);

/// sqrt(Delta (1 - Delta)) by eigendecomposition; eigenvalues are floored into
/// [kDeltaFloor, 1 - kDeltaFloor] with a warning. Eigenvalues further than 1e-8
/// outside [0, 1] throw DegenerateInput.
Eigen::MatrixXd sqrt_delta_factor(const Eigen::MatrixXd& delta, const WarningSink& warn = {});

/// D = [sqrt(Delta (1 - Delta))]^{-1} K.
Eigen::VectorXd hybridization(const Eigen::MatrixXd& delta, const Eigen::VectorXd& K,
                              const WarningSink& warn = {});

/// Symmetrized d/dDelta_ab of Tr(f(Delta) M) with f(x) = sqrt(x (1 - x)), via
/// divided differences on the eigenbasis of Delta (f' on near-degenerate pairs).
Eigen::MatrixXd trace_derivative(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& M);

/// lambda_c = -lambda - d/dDelta [Tr(R^T sqrt(Delta (1 - Delta)) D) + c.c.].
Eigen::MatrixXd lambda_c_from(const Eigen::VectorXd& R, const Eigen::MatrixXd& delta,
                              const Eigen::VectorXd& D, const Eigen::MatrixXd& lambda);

struct EmbeddingUpdate {
  Eigen::MatrixXd delta;  // Delta_emb = 1 - rho_bath^T
  Eigen::VectorXd R;
};

/// How embedding_update treats a bath orbital that is exactly empty or full.
enum class EdgePolicy {
  Throw,     // any flooring is a constraint violation
  Decouple,  // an edge orbital within the physical mixing bound is kept
};

/// From the per-spin embedding density matrix (impurity first): the bath block
/// fixes Delta_emb and the mixed row <c† b_a> fixes R through
/// <c† b> = R^T sqrt(Delta_emb (1 - Delta_emb)). Flooring warns, then throws
/// DegenerateInput unless the policy allows a (nearly) decoupled orbital. Edge
/// mixing above sqrt(d (1 - d)) at the floored d always throws.
EmbeddingUpdate embedding_update(const Eigen::MatrixXd& rho, const WarningSink& warn = {},
                                 EdgePolicy policy = EdgePolicy::Throw);

/// Rearranged lambda_c relation solved for lambda at (Delta_emb, D, R_new).
Eigen::MatrixXd lambda_update(const Eigen::MatrixXd& lambda_c, const Eigen::MatrixXd& delta_emb,
                              const Eigen::VectorXd& D, const Eigen::VectorXd& R_new);

}  // namespace ghost
