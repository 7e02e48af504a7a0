#include "ghost/pauli.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ghost/embedding.hpp"
#include "test_util.hpp"

namespace ghost {
namespace {

using testing::annihilator_oracle;
using testing::dense_oracle;

TEST(PauliString, ParseAndPrintRoundTrip) {
  const auto p = PauliString::parse("YIXZ");
  EXPECT_EQ(p.str(), "YIXZ");
  EXPECT_EQ(p[0], Pauli::Y);
  EXPECT_EQ(p[1], Pauli::I);
  EXPECT_EQ(p.weight(), 3u);
  EXPECT_EQ(p.support(), (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_THROW(PauliString::parse("XQ"), std::invalid_argument);
}

TEST(PauliString, DenseMatchesKroneckerOracle) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const auto w = testing::random_word(rng, 4);
    EXPECT_TRUE(to_dense(PauliString::parse(w)).isApprox(dense_oracle(w), 1e-14)) << w;
  }
}

TEST(Multiply, SingleQubitExamples) {
  auto r = multiply(PauliString::parse("XI"), PauliString::parse("YI"));
  EXPECT_EQ(r.phase, cplx(0, 1));
  EXPECT_EQ(r.string.str(), "ZI");
  r = multiply(PauliString::parse("Z"), PauliString::parse("Z"));
  EXPECT_EQ(r.phase, cplx(1, 0));
  EXPECT_TRUE(r.string.is_identity());
}

TEST(Multiply, LengthMismatchThrows) {
  EXPECT_THROW(multiply(PauliString::parse("X"), PauliString::parse("XX")), std::invalid_argument);
}

TEST(Multiply, RandomSixQubitPairsMatchDenseProducts) {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 100; ++rep) {
    const auto a = testing::random_word(rng, 6);
    const auto b = testing::random_word(rng, 6);
    const auto r = multiply(PauliString::parse(a), PauliString::parse(b));
    const Eigen::MatrixXcd lhs = dense_oracle(a) * dense_oracle(b);
    const Eigen::MatrixXcd rhs = r.phase * dense_oracle(r.string.str());
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13) << a << " * " << b;
  }
}

TEST(Multiply, AssociativeOverAllTwoQubitTriples) {
  std::vector<std::string> words;
  for (char a : std::string("IXYZ"))
    for (char b : std::string("IXYZ")) words.push_back(std::string{a, b});
  for (const auto& a : words) {
    for (const auto& b : words) {
      const auto ab = multiply(PauliString::parse(a), PauliString::parse(b));
      EXPECT_LT((dense_oracle(a) * dense_oracle(b) - ab.phase * dense_oracle(ab.string.str()))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-14);
      for (const auto& c : words) {
        const auto left = multiply(ab.string, PauliString::parse(c));
        const auto bc = multiply(PauliString::parse(b), PauliString::parse(c));
        const auto right = multiply(PauliString::parse(a), bc.string);
        EXPECT_EQ(left.string, right.string);
        EXPECT_LT(std::abs(ab.phase * left.phase - bc.phase * right.phase), 1e-14);
      }
    }
  }
}

TEST(Multiply, CommutationAgreesWithMatrices) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = testing::random_word(rng, 4);
    const auto b = testing::random_word(rng, 4);
    const Eigen::MatrixXcd c = dense_oracle(a) * dense_oracle(b) - dense_oracle(b) * dense_oracle(a);
    EXPECT_EQ(PauliString::parse(a).commutes_with(PauliString::parse(b)), c.norm() < 1e-12);
  }
}

TEST(PauliSum, PruningAndArithmetic) {
  auto s = PauliSum::from_string(PauliString::parse("XZ"), 1.0);
  s.add_term(PauliString::parse("XZ"), -1.0 + 1e-16);
  EXPECT_TRUE(s.empty());
  const auto x = PauliSum::from_string(PauliString::parse("XI"));
  const auto y = PauliSum::from_string(PauliString::parse("YI"));
  const auto prod = x * y - y * x;  // 2i Z
  EXPECT_EQ(prod.size(), 1u);
  EXPECT_LT(std::abs(prod.coefficient(PauliString::parse("ZI")) - cplx(0, 2)), 1e-15);
  EXPECT_THROW(x + PauliSum::identity(3), std::invalid_argument);
}

TEST(PauliSum, DenseAndSparseAgree) {
  std::mt19937_64 rng(5);
  PauliSum s(5);
  for (int k = 0; k < 12; ++k) s.add_term(PauliString::parse(testing::random_word(rng, 5)), cplx(k * 0.1, 0.3));
  const Eigen::MatrixXcd sparse = Eigen::MatrixXcd(s.to_sparse());
  EXPECT_LT((s.to_dense() - sparse).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PauliSum, JsonRoundTrip) {
  PauliSum s(3);
  s.add_term(PauliString::parse("XYZ"), cplx(0.5, -0.25));
  s.add_term(PauliString::parse("III"), 2.0);
  const auto back = PauliSum::from_json(s.to_json());
  EXPECT_EQ(back.terms(), s.terms());
}

TEST(JordanWigner, DocumentedForms) {
  const auto a0 = jordan_wigner(0, 1, LadderKind::Annihilate);
  EXPECT_EQ(a0.coefficient(PauliString::parse("X")), cplx(0.5, 0));
  EXPECT_EQ(a0.coefficient(PauliString::parse("Y")), cplx(0, 0.5));
  const auto a1 = jordan_wigner(1, 2, LadderKind::Annihilate);
  EXPECT_EQ(a1.size(), 2u);
  EXPECT_EQ(a1.coefficient(PauliString::parse("ZX")), cplx(0.5, 0));
  EXPECT_EQ(a1.coefficient(PauliString::parse("ZY")), cplx(0, 0.5));
  const auto c1 = jordan_wigner(1, 2, LadderKind::Create);
  EXPECT_EQ(c1.coefficient(PauliString::parse("ZY")), cplx(0, -0.5));
  EXPECT_THROW(jordan_wigner(2, 2, LadderKind::Create), std::invalid_argument);
}

TEST(JordanWigner, MatchesOccupationBasisAnnihilator) {
  for (std::size_t p = 0; p < 4; ++p) {
    const Eigen::MatrixXcd a = jordan_wigner(p, 4, LadderKind::Annihilate).to_dense();
    EXPECT_LT((a - annihilator_oracle(p, 4).cast<cplx>()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

class Anticommutation : public ::testing::TestWithParam<std::size_t> {};

TEST_P(Anticommutation, CanonicalRelationsHold) {
  const std::size_t n = GetParam();
  const std::size_t dim = std::size_t{1} << n;
  std::vector<Eigen::MatrixXcd> a, ad;
  for (std::size_t p = 0; p < n; ++p) {
    a.push_back(jordan_wigner(p, n, LadderKind::Annihilate).to_dense());
    ad.push_back(jordan_wigner(p, n, LadderKind::Create).to_dense());
  }
  for (std::size_t p = 0; p < n; ++p) {
    EXPECT_LT((ad[p] - a[p].adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    for (std::size_t q = 0; q < n; ++q) {
      const Eigen::MatrixXcd ac = a[p] * ad[q] + ad[q] * a[p];
      const Eigen::MatrixXcd expect =
          (p == q ? 1.0 : 0.0) * Eigen::MatrixXcd::Identity(dim, dim);
      EXPECT_LT((ac - expect).cwiseAbs().maxCoeff(), 1e-13);
      EXPECT_LT((a[p] * a[q] + a[q] * a[p]).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(UpToSixModes, Anticommutation, ::testing::Values(1, 2, 4, 6));

TEST(Pool, SizesMatchEnumeration) {
  EXPECT_EQ(build_pool(4).size(), 20u);
  EXPECT_EQ(build_pool(8).size(), 56u + 8u * 70u);
  EXPECT_THROW(build_pool(3), std::invalid_argument);
}

TEST(Pool, GeneratorsAreRealAndDistinct) {
  const auto pool = build_pool(8);
  std::set<std::string> seen;
  for (const auto& g : pool) {
    EXPECT_TRUE(seen.insert(g.str()).second) << g.str();
    EXPECT_EQ(g.y_count() % 2, 1u);
    EXPECT_EQ(g.z_mask() & ~g.x_mask(), 0u) << "only X/Y letters allowed";
    EXPECT_TRUE(g.weight() == 2 || g.weight() == 4);
    bool anticommutes = false;
    for (std::size_t q = 0; q < 8; ++q)
      anticommutes |= !g.commutes_with(PauliString::single(8, q, Pauli::Z));
    EXPECT_TRUE(anticommutes);
  }
  for (const auto& g : build_pool(4)) {
    // Odd Y count: the matrix is purely imaginary in the computational basis.
    EXPECT_LT(to_dense(g).real().cwiseAbs().maxCoeff(), 1e-15) << g.str();
  }
}

// Dense oracle for the embedding Hamiltonian built from occupation-basis ladder operators.
Eigen::MatrixXd embedding_oracle(const EmbeddingParams& p) {
  const std::size_t L = p.bath() + 1, n = 2 * L, dim = std::size_t{1} << n;
  std::vector<Eigen::MatrixXd> a(n);
  for (std::size_t q = 0; q < n; ++q) a[q] = annihilator_oracle(q, n);
  auto nop = [&](std::size_t q) -> Eigen::MatrixXd { return a[q].transpose() * a[q]; };
  auto hop = [&](std::size_t x, std::size_t y) -> Eigen::MatrixXd { return a[x].transpose() * a[y]; };
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd h = p.U * nop(0) * nop(L) - p.U / 2 * (nop(0) + nop(L));
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(dim, dim), Sz = N, Sp = N;
  for (std::size_t q = 0; q < n; ++q) N += nop(q);
  for (std::size_t mu = 0; mu < L; ++mu) {
    Sz += 0.5 * (nop(mu) - nop(mu + L));
    Sp += hop(mu, mu + L);
  }
  for (std::size_t k = 1; k < L; ++k) {
    for (std::size_t s = 0; s < 2; ++s) {
      const std::size_t c = s * L, b = k + s * L;
      h += p.lambda_c[k - 1] * (I - nop(b));
      h += p.D[k - 1] * (hop(c, b) + hop(b, c));
    }
  }
  const Eigen::MatrixXd S2 = 0.5 * (Sp * Sp.transpose() + Sp.transpose() * Sp) + Sz * Sz;
  const Eigen::MatrixXd F = N - static_cast<double>(L) * I;
  return h + p.g * S2 + p.g * F * F;
}

TEST(EmbeddingHamiltonian, VanishingCouplingsGiveZeroOperator) {
  EmbeddingParams p{0.0, {0.0}, {0.0}, 0.0};
  EXPECT_TRUE(map_embedding_hamiltonian(p, ModeLayout(1)).empty());
}

TEST(EmbeddingHamiltonian, InteractionTermMapsToZZForm) {
  EmbeddingParams p{2.5, {0.0}, {0.0}, 0.0};
  const auto h = map_embedding_hamiltonian(p, ModeLayout(1));
  // U n_up n_dn - U/2 (n_up + n_dn) = U/4 (Z0 Z2 - 1).
  EXPECT_EQ(h.size(), 2u);
  EXPECT_NEAR(h.coefficient(PauliString::parse("ZIZI")).real(), 2.5 / 4, 1e-14);
  EXPECT_NEAR(h.coefficient(PauliString::parse("IIII")).real(), -2.5 / 4, 1e-14);
}

TEST(EmbeddingHamiltonian, MatchesOccupationBasisOracle) {
  const std::vector<EmbeddingParams> cases = {
      {2.5, {-0.4}, {0.0}, 10.0},
      {2.5, {-0.32796, -0.14004, -0.32796}, {1.00238, 0.0, -1.00238}, 10.0},
      {1.3, {0.2, -0.7, 0.1}, {0.4, -0.3, 0.9}, 3.0},
  };
  for (const auto& p : cases) {
    const ModeLayout layout(p.bath());
    const auto h = map_embedding_hamiltonian(p, layout);
    EXPECT_TRUE(h.is_hermitian());
    const Eigen::MatrixXcd m = h.to_dense();
    EXPECT_LT((m - embedding_oracle(p).cast<cplx>()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::MatrixXcd N = total_number(layout).to_dense();
    const Eigen::MatrixXcd Sz = spin_z(layout).to_dense();
    EXPECT_LT((m * N - N * m).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_LT((m * Sz - Sz * m).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(EmbeddingHamiltonian, BathLengthMismatchThrows) {
  EmbeddingParams p{1.0, {0.1, 0.2, 0.3}, {0.0, 0.0}, 10.0};
  EXPECT_THROW(map_embedding_hamiltonian(p, ModeLayout(3)), std::invalid_argument);
  EmbeddingParams q{1.0, {0.1}, {0.0}, 10.0};
  EXPECT_THROW(map_embedding_hamiltonian(q, ModeLayout(3)), std::invalid_argument);
}

TEST(SpinOperators, SingletAndTripletEigenvalues) {
  const ModeLayout layout(1);
  const Eigen::MatrixXcd s2 = total_spin_squared(layout).to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s2);
  std::set<long> values;
  for (int i = 0; i < es.eigenvalues().size(); ++i) values.insert(std::lround(4 * es.eigenvalues()[i]));
  // S(S+1) for S = 0, 1/2, 1 scaled by 4.
  EXPECT_EQ(values, (std::set<long>{0, 3, 8}));
}

TEST(DensityObservables, EntriesCoverUpperTriangles) {
  const ModeLayout layout(3);
  const auto obs = density_matrix_observables(layout);
  EXPECT_EQ(obs.entries.size(), 2u * 10u);
  for (const auto& e : obs.entries) {
    EXPECT_TRUE(e.op.is_hermitian());
    EXPECT_LE(e.mu, e.nu);
  }
  EXPECT_EQ(obs.double_occupancy.size(), 4u);
}

}  // namespace
}  // namespace ghost
