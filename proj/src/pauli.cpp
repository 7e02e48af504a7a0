#include "ghost/pauli.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "ghost/embedding.hpp"

namespace ghost {

namespace {

constexpr cplx kPhases[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};

std::uint64_t low_mask(std::size_t n) {
  return n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
}

int popcount(std::uint64_t v) { return std::popcount(v); }

}  // namespace

char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

PauliString::PauliString(std::size_t n_qubits) : n_(n_qubits) {
  if (n_qubits > kMaxQubits) {
    throw std::invalid_argument("PauliString supports at most 64 qubits");
  }
}

PauliString::PauliString(std::size_t n_qubits, std::uint64_t x_mask, std::uint64_t z_mask)
    : PauliString(n_qubits) {
  if ((x_mask | z_mask) & ~low_mask(n_qubits)) {
    throw std::invalid_argument("PauliString mask has bits beyond the qubit count");
  }
  x_ = x_mask;
  z_ = z_mask;
}

PauliString PauliString::parse(std::string_view text) {
  PauliString p(text.size());
  for (std::size_t q = 0; q < text.size(); ++q) {
    switch (text[q]) {
      case 'I': case '_': break;
      case 'X': p.set(q, Pauli::X); break;
      case 'Y': p.set(q, Pauli::Y); break;
      case 'Z': p.set(q, Pauli::Z); break;
      default:
        throw std::invalid_argument("invalid Pauli letter '" + std::string(1, text[q]) + "'");
    }
  }
  return p;
}

PauliString PauliString::single(std::size_t n_qubits, std::size_t qubit, Pauli p) {
  PauliString s(n_qubits);
  s.set(qubit, p);
  return s;
}

Pauli PauliString::operator[](std::size_t q) const {
  const auto x = (x_ >> q) & 1u;
  const auto z = (z_ >> q) & 1u;
  return static_cast<Pauli>(x | (z << 1));
}

void PauliString::set(std::size_t q, Pauli p) {
  if (q >= n_) throw std::out_of_range("PauliString::set qubit out of range");
  const auto bit = std::uint64_t{1} << q;
  const auto v = static_cast<unsigned>(p);
  x_ = (v & 1u) ? (x_ | bit) : (x_ & ~bit);
  z_ = (v & 2u) ? (z_ | bit) : (z_ & ~bit);
}

std::size_t PauliString::weight() const { return static_cast<std::size_t>(popcount(x_ | z_)); }

std::size_t PauliString::y_count() const { return static_cast<std::size_t>(popcount(x_ & z_)); }

std::vector<std::size_t> PauliString::support() const {
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < n_; ++q) {
    if ((support_mask() >> q) & 1u) out.push_back(q);
  }
  return out;
}

bool PauliString::commutes_with(const PauliString& other) const {
  return (popcount(x_ & other.z_) + popcount(z_ & other.x_)) % 2 == 0;
}

bool PauliString::qubitwise_commutes_with(const PauliString& other) const {
  const auto both = support_mask() & other.support_mask();
  return ((x_ ^ other.x_) & both) == 0 && ((z_ ^ other.z_) & both) == 0;
}

std::string PauliString::str() const {
  std::string s(n_, 'I');
  for (std::size_t q = 0; q < n_; ++q) s[q] = pauli_char((*this)[q]);
  return s;
}

PauliProduct multiply(const PauliString& p, const PauliString& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("multiply: Pauli strings of different lengths");
  }
  // Write P = i^{|x.z|} X^x Z^z; moving Z^z1 past X^x2 costs (-1)^{|z1.x2|}.
  const auto x = p.x_mask() ^ q.x_mask();
  const auto z = p.z_mask() ^ q.z_mask();
  int k = popcount(p.x_mask() & p.z_mask()) + popcount(q.x_mask() & q.z_mask()) -
          popcount(x & z) + 2 * popcount(p.z_mask() & q.x_mask());
  k = ((k % 4) + 4) % 4;
  return {kPhases[k], PauliString(p.size(), x, z)};
}

Eigen::MatrixXcd to_dense(const PauliString& p) {
  const std::size_t dim = std::size_t{1} << p.size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  const cplx base = kPhases[popcount(p.x_mask() & p.z_mask()) % 4];
  for (std::size_t c = 0; c < dim; ++c) {
    const double sign = (popcount(p.z_mask() & c) % 2) ? -1.0 : 1.0;
    m(c ^ p.x_mask(), c) = base * sign;
  }
  return m;
}

PauliSum PauliSum::identity(std::size_t n_qubits, cplx coeff) {
  PauliSum s(n_qubits);
  s.add_term(PauliString(n_qubits), coeff);
  return s;
}

PauliSum PauliSum::from_string(const PauliString& p, cplx coeff) {
  PauliSum s(p.size());
  s.add_term(p, coeff);
  return s;
}

void PauliSum::check_width(std::size_t n) const {
  if (n != n_) {
    throw std::invalid_argument("PauliSum: qubit count mismatch (" + std::to_string(n) + " vs " +
                                std::to_string(n_) + ")");
  }
}

void PauliSum::add_term(const PauliString& p, cplx coeff) {
  check_width(p.size());
  auto [it, inserted] = terms_.try_emplace(p, coeff);
  if (!inserted) it->second += coeff;
  if (std::abs(it->second) < kPruneThreshold) terms_.erase(it);
}

cplx PauliSum::coefficient(const PauliString& p) const {
  auto it = terms_.find(p);
  return it == terms_.end() ? cplx(0.0) : it->second;
}

PauliSum& PauliSum::simplify() {
  std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < kPruneThreshold; });
  return *this;
}

bool PauliSum::is_hermitian(double tol) const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [tol](const auto& kv) { return std::abs(kv.second.imag()) <= tol; });
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  if (n_ == 0 && terms_.empty()) n_ = other.n_;
  check_width(other.n_);
  for (const auto& [p, c] : other.terms_) add_term(p, c);
  return *this;
}

PauliSum& PauliSum::operator-=(const PauliSum& other) {
  if (n_ == 0 && terms_.empty()) n_ = other.n_;
  check_width(other.n_);
  for (const auto& [p, c] : other.terms_) add_term(p, -c);
  return *this;
}

PauliSum& PauliSum::operator*=(cplx scalar) {
  for (auto& [p, c] : terms_) c *= scalar;
  return simplify();
}

PauliSum operator*(const PauliSum& a, const PauliSum& b) {
  a.check_width(b.n_);
  PauliSum out(a.n_);
  for (const auto& [pa, ca] : a.terms_) {
    for (const auto& [pb, cb] : b.terms_) {
      const auto prod = multiply(pa, pb);
      auto [it, inserted] = out.terms_.try_emplace(prod.string, prod.phase * ca * cb);
      if (!inserted) it->second += prod.phase * ca * cb;
    }
  }
  return out.simplify();
}

PauliSum PauliSum::adjoint() const {
  PauliSum out(n_);
  for (const auto& [p, c] : terms_) out.terms_.emplace(p, std::conj(c));
  return out;
}

Eigen::MatrixXcd PauliSum::to_dense() const {
  const std::size_t dim = std::size_t{1} << n_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [p, c] : terms_) {
    const cplx base = c * kPhases[popcount(p.x_mask() & p.z_mask()) % 4];
    for (std::size_t col = 0; col < dim; ++col) {
      const double sign = (popcount(p.z_mask() & col) % 2) ? -1.0 : 1.0;
      m(col ^ p.x_mask(), col) += base * sign;
    }
  }
  return m;
}

Eigen::SparseMatrix<cplx> PauliSum::to_sparse() const {
  const std::size_t dim = std::size_t{1} << n_;
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(terms_.size() * dim);
  for (const auto& [p, c] : terms_) {
    const cplx base = c * kPhases[popcount(p.x_mask() & p.z_mask()) % 4];
    for (std::size_t col = 0; col < dim; ++col) {
      const double sign = (popcount(p.z_mask() & col) % 2) ? -1.0 : 1.0;
      trips.emplace_back(static_cast<int>(col ^ p.x_mask()), static_cast<int>(col), base * sign);
    }
  }
  Eigen::SparseMatrix<cplx> m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(cplx(0.0), kPruneThreshold);
  return m;
}

nlohmann::json PauliSum::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& [p, c] : terms_) {
    arr.push_back({{"string", p.str()}, {"re", c.real()}, {"im", c.imag()}});
  }
  return arr;
}

PauliSum PauliSum::from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("PauliSum JSON must be a non-empty list of {string, re, im}");
  }
  PauliSum s(j.front().at("string").get<std::string>().size());
  for (const auto& t : j) {
    s.add_term(PauliString::parse(t.at("string").get<std::string>()),
               cplx(t.at("re").get<double>(), t.value("im", 0.0)));
  }
  return s;
}

PauliSum jordan_wigner(std::size_t mode, std::size_t n_modes, LadderKind kind) {
  if (mode >= n_modes) {
    throw std::invalid_argument("jordan_wigner: mode " + std::to_string(mode) +
                                " out of range for " + std::to_string(n_modes) + " modes");
  }
  const std::uint64_t prefix = low_mask(mode);
  const std::uint64_t bit = std::uint64_t{1} << mode;
  PauliSum s(n_modes);
  s.add_term(PauliString(n_modes, bit, prefix), 0.5);
  const double ysign = kind == LadderKind::Create ? -1.0 : 1.0;
  s.add_term(PauliString(n_modes, bit, prefix | bit), cplx(0.0, 0.5 * ysign));
  return s;
}

PauliSum number_operator(std::size_t mode, std::size_t n_modes) {
  return hopping_operator(mode, mode, n_modes);
}

PauliSum hopping_operator(std::size_t p, std::size_t q, std::size_t n_modes) {
  return jordan_wigner(p, n_modes, LadderKind::Create) *
         jordan_wigner(q, n_modes, LadderKind::Annihilate);
}

std::vector<PauliString> build_pool(std::size_t n_qubits) {
  if (n_qubits < 4) throw std::invalid_argument("build_pool: need at least 4 qubits");
  std::vector<PauliString> pool;
  for (std::size_t i = 0; i < n_qubits; ++i) {
    for (std::size_t j = 0; j < n_qubits; ++j) {
      if (i == j) continue;
      PauliString p(n_qubits);
      p.set(i, Pauli::Y);
      p.set(j, Pauli::X);
      pool.push_back(p);
    }
  }
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n_qubits); ++mask) {
    if (std::popcount(mask) != 4) continue;
    // Odd-size subsets of the support carry the Y letters.
    for (std::uint64_t ys = mask;; ys = (ys - 1) & mask) {
      if (std::popcount(ys) % 2 == 1) pool.emplace_back(n_qubits, mask, ys);
      if (ys == 0) break;
    }
  }
  std::sort(pool.begin(), pool.end(),
            [](const PauliString& a, const PauliString& b) { return a.str() < b.str(); });
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  return pool;
}

ModeLayout::ModeLayout(std::size_t bath) : bath_(bath) {
  if (bath == 0) throw std::invalid_argument("ModeLayout: bath size must be positive");
  if (n_qubits() > PauliString::kMaxQubits) throw std::invalid_argument("ModeLayout: too many modes");
}

std::size_t ModeLayout::qubit(std::size_t orbital, std::size_t spin) const {
  if (orbital > bath_ || spin > 1) throw std::out_of_range("ModeLayout::qubit");
  return orbital + (bath_ + 1) * spin;
}

PauliSum total_number(const ModeLayout& layout) {
  PauliSum n(layout.n_qubits());
  for (std::size_t q = 0; q < layout.n_qubits(); ++q) n += number_operator(q, layout.n_qubits());
  return n;
}

PauliSum spin_z(const ModeLayout& layout) {
  const auto nq = layout.n_qubits();
  PauliSum sz(nq);
  for (std::size_t mu = 0; mu < layout.orbitals(); ++mu) {
    sz += 0.5 * number_operator(layout.qubit(mu, 0), nq);
    sz -= 0.5 * number_operator(layout.qubit(mu, 1), nq);
  }
  return sz;
}

PauliSum total_spin_squared(const ModeLayout& layout) {
  const auto nq = layout.n_qubits();
  PauliSum splus(nq);
  for (std::size_t mu = 0; mu < layout.orbitals(); ++mu) {
    splus += hopping_operator(layout.qubit(mu, 0), layout.qubit(mu, 1), nq);
  }
  const PauliSum sminus = splus.adjoint();
  const PauliSum sz = spin_z(layout);
  return sminus * splus + sz * sz + sz;
}

PauliSum map_embedding_hamiltonian(const EmbeddingParams& params, const ModeLayout& layout) {
  params.validate();
  if (params.bath() != layout.bath()) {
    throw std::invalid_argument("map_embedding_hamiltonian: params bath size " +
                                std::to_string(params.bath()) + " does not match layout bath size " +
                                std::to_string(layout.bath()));
  }
  const auto nq = layout.n_qubits();
  const auto n_up = number_operator(layout.qubit(0, 0), nq);
  const auto n_dn = number_operator(layout.qubit(0, 1), nq);

  PauliSum h = params.U * (n_up * n_dn) - (params.U / 2.0) * (n_up + n_dn);
  for (std::size_t a = 1; a <= layout.bath(); ++a) {
    for (std::size_t s = 0; s < 2; ++s) {
      const auto c = layout.qubit(0, s);
      const auto b = layout.qubit(a, s);
      // b b† = 1 - n_b
      h += params.lambda_c[a - 1] *
           (PauliSum::identity(nq) - number_operator(b, nq));
      h += params.D[a - 1] * (hopping_operator(c, b, nq) + hopping_operator(b, c, nq));
    }
  }
  if (params.g != 0.0) {
    const auto filling = total_number(layout) -
                         PauliSum::identity(nq, static_cast<double>(layout.bath() + 1));
    h += params.g * total_spin_squared(layout);
    h += params.g * (filling * filling);
  }
  return h.simplify();
}

DensityObservables density_matrix_observables(const ModeLayout& layout) {
  const auto nq = layout.n_qubits();
  DensityObservables out;
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t mu = 0; mu < layout.orbitals(); ++mu) {
      for (std::size_t nu = mu; nu < layout.orbitals(); ++nu) {
        const auto p = layout.qubit(mu, s);
        const auto q = layout.qubit(nu, s);
        PauliSum op = mu == nu ? number_operator(p, nq)
                               : 0.5 * (hopping_operator(p, q, nq) + hopping_operator(q, p, nq));
        out.entries.push_back({s, mu, nu, std::move(op)});
      }
    }
  }
  out.double_occupancy =
      number_operator(layout.qubit(0, 0), nq) * number_operator(layout.qubit(0, 1), nq);
  return out;
}

}  // namespace ghost
