#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "json.hpp"

namespace ghost {

using cplx = std::complex<double>;

// Single-qubit Pauli letter, encoded as (x bit, z bit): Y = X and Z set.
enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

char pauli_char(Pauli p);

/// Pauli string on up to 64 qubits stored as symplectic bit masks.
/// Qubit 0 is the leftmost letter in the text form.
class PauliString {
 public:
  static constexpr std::size_t kMaxQubits = 64;

  PauliString() = default;
  explicit PauliString(std::size_t n_qubits);
  PauliString(std::size_t n_qubits, std::uint64_t x_mask, std::uint64_t z_mask);

  static PauliString parse(std::string_view text);
  static PauliString single(std::size_t n_qubits, std::size_t qubit, Pauli p);

  std::size_t size() const { return n_; }
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }

  Pauli operator[](std::size_t q) const;
  void set(std::size_t q, Pauli p);

  std::size_t weight() const;
  std::uint64_t support_mask() const { return x_ | z_; }
  std::vector<std::size_t> support() const;
  bool is_identity() const { return (x_ | z_) == 0; }
  std::size_t y_count() const;

  bool commutes_with(const PauliString& other) const;
  // Letter-wise compatibility: on every qubit the letters agree or one is I.
  bool qubitwise_commutes_with(const PauliString& other) const;

  std::string str() const;

  friend auto operator<=>(const PauliString&, const PauliString&) = default;

 private:
  std::size_t n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

struct PauliProduct {
  cplx phase;
  PauliString string;
};

/// P·Q = phase·R with phase in {±1, ±i}.
PauliProduct multiply(const PauliString& p, const PauliString& q);

/// Dense 2^n x 2^n matrix of a Pauli string (basis index bit q = qubit q).
Eigen::MatrixXcd to_dense(const PauliString& p);

/// Weighted sum of Pauli strings over a fixed qubit count.
class PauliSum {
 public:
  static constexpr double kPruneThreshold = 1e-14;

  PauliSum() = default;
  explicit PauliSum(std::size_t n_qubits) : n_(n_qubits) {}

  static PauliSum identity(std::size_t n_qubits, cplx coeff = 1.0);
  static PauliSum from_string(const PauliString& p, cplx coeff = 1.0);

  std::size_t n_qubits() const { return n_; }
  const std::map<PauliString, cplx>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  void add_term(const PauliString& p, cplx coeff);
  cplx coefficient(const PauliString& p) const;
  // Drops entries with |coeff| below the prune threshold.
  PauliSum& simplify();

  bool is_hermitian(double tol = 1e-12) const;

  PauliSum& operator+=(const PauliSum& other);
  PauliSum& operator-=(const PauliSum& other);
  PauliSum& operator*=(cplx scalar);
  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
  friend PauliSum operator*(PauliSum a, cplx s) { return a *= s; }
  friend PauliSum operator*(cplx s, PauliSum a) { return a *= s; }
  friend PauliSum operator*(const PauliSum& a, const PauliSum& b);

  PauliSum adjoint() const;

  Eigen::MatrixXcd to_dense() const;
  Eigen::SparseMatrix<cplx> to_sparse() const;

  nlohmann::json to_json() const;
  static PauliSum from_json(const nlohmann::json& j);

 private:
  void check_width(std::size_t n) const;

  std::size_t n_ = 0;
  std::map<PauliString, cplx> terms_;
};

enum class LadderKind { Create, Annihilate };

/// Jordan-Wigner image of a fermionic ladder operator:
/// (Z_0 ... Z_{mode-1}) (X_mode -/+ i Y_mode) / 2, minus sign for creation.
PauliSum jordan_wigner(std::size_t mode, std::size_t n_modes, LadderKind kind);

/// n_p = a†_p a_p.
PauliSum number_operator(std::size_t mode, std::size_t n_modes);

/// a†_p a_q.
PauliSum hopping_operator(std::size_t p, std::size_t q, std::size_t n_modes);

/// Qubit-excitation pool: all Y_i X_j (i != j) plus all weight-4 strings over
/// {X, Y} with an odd number of Y letters. Sorted by text.
std::vector<PauliString> build_pool(std::size_t n_qubits);

/// Spin-major layout: qubit(mu, s) = mu + (B+1) s, mu = 0 is the impurity.
class ModeLayout {
 public:
  explicit ModeLayout(std::size_t bath);

  std::size_t bath() const { return bath_; }
  std::size_t orbitals() const { return bath_ + 1; }
  std::size_t n_qubits() const { return 2 * (bath_ + 1); }
  std::size_t qubit(std::size_t orbital, std::size_t spin) const;

 private:
  std::size_t bath_;
};

struct EmbeddingParams;

/// Embedding Hamiltonian with the spin and particle-number penalties,
/// g S^2 + g (N - B - 1)^2, mapped to qubits.
PauliSum map_embedding_hamiltonian(const EmbeddingParams& params, const ModeLayout& layout);

/// Total spin S^2 and number operator on the layout.
PauliSum total_spin_squared(const ModeLayout& layout);
PauliSum total_number(const ModeLayout& layout);
PauliSum spin_z(const ModeLayout& layout);

/// Qubit operators whose expectations give the one-particle density matrix
/// entries rho_{mu nu, s} (real part, mu <= nu) and the impurity double
/// occupancy.
struct DensityObservable {
  std::size_t spin;
  std::size_t mu;
  std::size_t nu;
  PauliSum op;
};

struct DensityObservables {
  std::vector<DensityObservable> entries;
  PauliSum double_occupancy;
};

DensityObservables density_matrix_observables(const ModeLayout& layout);

}  // namespace ghost
