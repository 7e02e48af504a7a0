#include <gtest/gtest.h>

#include <cmath>
#include <iostream>
#include <random>

#include "ghost/gga_bethe.hpp"
#include "ghost/self_consistency.hpp"

namespace ghost {
namespace {

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = u(rng);
  return 0.5 * (m + m.transpose());
}

// Delta with spectrum safely inside (0, 1).
Eigen::MatrixXd random_delta(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(random_symmetric(rng, n, 1.0));
  std::uniform_real_distribution<double> u(0.1, 0.9);
  Eigen::VectorXd d(n);
  for (auto& x : d) x = u(rng);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double trace_f_oracle(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(delta);
  Eigen::VectorXd f = es.eigenvalues().unaryExpr([](double x) { return std::sqrt(x * (1 - x)); });
  return (es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose() * M).trace();
}

TEST(Quadrature, SemicircleMoments) {
  const auto g = QuadratureGrid::semicircle();
  EXPECT_NEAR(g.integrate([](double) { return 1.0; }), 1.0, 1e-13);
  EXPECT_NEAR(g.integrate([](double e) { return e; }), 0.0, 1e-13);
  EXPECT_NEAR(g.integrate([](double e) { return e * e; }), 0.25, 1e-13);
  EXPECT_NEAR(g.integrate([](double e) { return std::pow(e, 4); }), 0.125, 1e-13);
  // Half-filled band energy: int_{-1}^{0} e D0 = -2/(3 pi); kinks converge slowly.
  EXPECT_NEAR(g.integrate([](double e) { return e < 0 ? e : 0.0; }), -2.0 / (3.0 * M_PI), 1e-6);
}

TEST(LatticeMoments, NonInteractingSingleOrbital) {
  const auto g = QuadratureGrid::semicircle();
  const auto m = lattice_moments(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 1), g);
  EXPECT_NEAR(m.delta(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(m.K[0], -2.0 / (3.0 * M_PI), 1e-6);
}

TEST(LatticeMoments, ZeroRLeavesLocalLevels) {
  const auto g = QuadratureGrid::semicircle(200);
  Eigen::MatrixXd lam = Eigen::Vector3d(-0.4, 0.0, 0.7).asDiagonal();
  const auto m = lattice_moments(Eigen::VectorXd::Zero(3), lam, g);
  EXPECT_NEAR(m.delta(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(m.delta(1, 1), 0.5, 1e-12);
  EXPECT_NEAR(m.delta(2, 2), 0.0, 1e-12);
  EXPECT_NEAR(m.K.norm(), 0.0, 1e-12);
}

TEST(LatticeMoments, ThreadCountDoesNotChangeResult) {
  const auto g = QuadratureGrid::semicircle();
  std::mt19937_64 rng(3);
  const Eigen::VectorXd R = Eigen::Vector3d(0.6, 0.5, 0.4);
  const Eigen::MatrixXd lam = random_symmetric(rng, 3, 0.5);
  setenv("GHOST_EMBED_THREADS", "1", 1);
  const auto a = lattice_moments(R, lam, g);
  setenv("GHOST_EMBED_THREADS", "4", 1);
  const auto b = lattice_moments(R, lam, g);
  unsetenv("GHOST_EMBED_THREADS");
  EXPECT_EQ((a.delta - b.delta).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((a.K - b.K).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hybridization, SolvesTheLinearRelation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto delta = random_delta(rng, 3);
    const Eigen::VectorXd K = Eigen::VectorXd::Random(3);
    const auto D = hybridization(delta, K);
    EXPECT_LT((sqrt_delta_factor(delta) * D - K).norm(), 1e-12);
  }
}

TEST(Hybridization, FloorsBoundaryEigenvaluesWithWarning) {
  int warnings = 0;
  Eigen::MatrixXd delta = Eigen::Vector2d(0.0, 0.5).asDiagonal();
  const auto D = hybridization(delta, Eigen::Vector2d(0.0, 0.1), [&](const std::string&) { ++warnings; });
  EXPECT_EQ(warnings, 1);
  EXPECT_TRUE(D.allFinite());
  Eigen::MatrixXd bad = Eigen::Vector2d(-0.1, 0.5).asDiagonal();
  EXPECT_THROW(hybridization(bad, Eigen::Vector2d::Zero()), DegenerateInput);
}

TEST(TraceDerivative, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const double h = 1e-6;
  for (int trial = 0; trial < 4; ++trial) {
    const auto delta = random_delta(rng, 3);
    const Eigen::MatrixXd M = Eigen::MatrixXd::Random(3, 3);
    const auto grad = trace_derivative(delta, M);
    for (Eigen::Index a = 0; a < 3; ++a) {
      for (Eigen::Index b = a; b < 3; ++b) {
        // Symmetric perturbation E_ab + E_ba probes grad_ab + grad_ba.
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, 3);
        E(a, b) += 1;
        E(b, a) += a == b ? 0 : 1;
        const double fd = (trace_f_oracle(delta + h * E, M) - trace_f_oracle(delta - h * E, M)) / (2 * h);
        const double an = a == b ? grad(a, a) : grad(a, b) + grad(b, a);
        EXPECT_NEAR(an, fd, 1e-6) << "trial " << trial << " entry " << a << b;
      }
    }
  }
}

TEST(TraceDerivative, DegenerateSpectrumUsesDerivative) {
  const Eigen::MatrixXd delta = 0.3 * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd M = Eigen::Matrix2d::Identity();
  const double fp = (1 - 0.6) / (2 * std::sqrt(0.3 * 0.7));
  const auto g = trace_derivative(delta, M);
  EXPECT_NEAR(g(0, 0), fp, 1e-12);
  EXPECT_NEAR(g(0, 1), 0.0, 1e-12);
}

TEST(LambdaC, HalfFillingSingleOrbitalIsMinusLambda) {
  // f'(1/2) = 0 so the derivative term vanishes.
  Eigen::MatrixXd delta(1, 1);
  delta << 0.5;
  Eigen::MatrixXd lam(1, 1);
  lam << 0.37;
  const auto lc = lambda_c_from(Eigen::VectorXd::Ones(1), delta, Eigen::VectorXd::Constant(1, -0.4), lam);
  EXPECT_NEAR(lc(0, 0), -0.37, 1e-14);
}

TEST(LambdaUpdate, InvertsLambdaC) {
  std::mt19937_64 rng(9);
  const auto delta = random_delta(rng, 3);
  const Eigen::VectorXd R = Eigen::Vector3d(0.7, -0.2, 0.4), D = Eigen::Vector3d(-0.3, 0.1, 0.25);
  const auto lam = random_symmetric(rng, 3, 0.6);
  const auto lc = lambda_c_from(R, delta, D, lam);
  EXPECT_LT((lambda_update(lc, delta, D, R) - lam).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(EmbeddingUpdate, BondingStateGivesUnitR) {
  // One spin-orbital pair in the bonding state: <c†c> = <b†b> = 1/2, <c†b> = 1/2.
  Eigen::MatrixXd rho(2, 2);
  rho << 0.5, 0.5, 0.5, 0.5;
  const auto u = embedding_update(rho);
  EXPECT_NEAR(u.delta(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(u.R[0], 1.0, 1e-14);
}

TEST(EmbeddingUpdate, RecoversRFromConsistentDensity) {
  std::mt19937_64 rng(2);
  const auto delta = random_delta(rng, 3);
  const Eigen::VectorXd R = Eigen::Vector3d(0.5, 0.3, -0.2);
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(4, 4);
  rho(0, 0) = 0.5;
  rho.block(1, 1, 3, 3) = Eigen::MatrixXd::Identity(3, 3) - delta.transpose();
  const Eigen::VectorXd cb = sqrt_delta_factor(delta) * R;
  rho.block(0, 1, 1, 3) = cb.transpose();
  rho.block(1, 0, 3, 1) = cb;
  const auto u = embedding_update(rho);
  EXPECT_LT((u.R - R).norm(), 1e-12);
  EXPECT_LT((u.delta - delta).norm(), 1e-14);
}

TEST(EmbeddingUpdate, FullyOccupiedBathThrows) {
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(2, 2);
  rho(1, 1) = 1.0;
  int warnings = 0;
  EXPECT_THROW(embedding_update(rho, [&](const std::string&) { ++warnings; }), DegenerateInput);
  EXPECT_EQ(warnings, 1);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(1, 1) = 1.2;
  EXPECT_THROW(embedding_update(bad), DegenerateInput);
}

TEST(EmbeddingUpdate, DecoupledEdgeOrbitalOnlyWhenAllowed) {
  // Second bath orbital full and unmixed; first is the bonding partner.
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(3, 3);
  rho(0, 0) = rho(1, 1) = rho(0, 1) = rho(1, 0) = 0.5;
  rho(2, 2) = 1.0;
  EXPECT_THROW(embedding_update(rho), DegenerateInput);
  const auto u = embedding_update(rho, {}, EdgePolicy::Decouple);
  EXPECT_NEAR(u.R[0], 1.0, 1e-12);
  EXPECT_NEAR(u.R[1], 0.0, 1e-12);
  rho(0, 2) = rho(2, 0) = 0.1;  // mixing with a full orbital is inconsistent
  EXPECT_THROW(embedding_update(rho, {}, EdgePolicy::Decouple), DegenerateInput);
}

TEST(SelfConsistency, NonInteractingLimit) {
  const auto r = self_consistency(0.0, 1, ed_solver());
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.state.R[0] * r.state.R[0], 1.0, 1e-5);
  EXPECT_NEAR(r.double_occupancy, 0.25, 1e-5);
}

TEST(SelfConsistency, SingleBathReproducesGutzwiller) {
  // B = 1 is the Gutzwiller approximation: Z = 1 - (U/Uc)^2 with Uc = 32/(3 pi)
  // for the half-bandwidth-one semicircle; docc = (1 - U/Uc)/4.
  const double U = 2.5, Uc = 32.0 / (3.0 * M_PI);
  const auto r = self_consistency(U, 1, ed_solver());
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.state.R[0] * r.state.R[0], 1 - (U / Uc) * (U / Uc), 2e-4);
  EXPECT_NEAR(r.double_occupancy, 0.25 * (1 - U / Uc), 2e-4);
}

TEST(SelfConsistency, ParticleHoleSymmetricImpurityOccupation) {
  const auto r = self_consistency(2.5, 3, ed_solver());
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.rho(0, 0), 0.5, 1e-8);
  EXPECT_NEAR(r.state.delta.trace(), 1.5, 1e-6);
  // Descending lambda_c, symmetric pair around zero.
  EXPECT_NEAR(r.params.lambda_c[0], -r.params.lambda_c[2], 1e-5);
  EXPECT_NEAR(r.params.lambda_c[1], 0.0, 1e-5);
  EXPECT_GT(r.params.lambda_c[0], 0.0);
}

TEST(SelfConsistency, HistoryAndJsonRoundTrip) {
  const auto r = self_consistency(2.5, 3, ed_solver(), {.max_iter = 5});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.history.size(), 5u);
  const auto back = SelfConsistencyResult::from_json(r.to_json());
  EXPECT_EQ(back.params.D, r.params.D);
  EXPECT_EQ(back.params.lambda_c, r.params.lambda_c);
  EXPECT_EQ((back.state.lambda - r.state.lambda).norm(), 0.0);
  const auto csv = r.history_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(SelfConsistency, SeedsReachTheSameFixedPoint) {
  SelfConsistencyConfig c;
  c.tol = 1e-9;
  c.max_iter = 3000;
  const auto a = self_consistency(2.5, 3, ed_solver(), c);
  c.seed = 7;
  const auto b = self_consistency(2.5, 3, ed_solver(), c);
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_NEAR(a.double_occupancy, b.double_occupancy, 1e-7);
  EXPECT_NEAR(a.state.R.squaredNorm(), b.state.R.squaredNorm(), 1e-5);
}

}  // namespace
}  // namespace ghost
