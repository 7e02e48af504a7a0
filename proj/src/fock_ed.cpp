#include "ghost/fock_ed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ghost {

namespace {

// Applies a†_p a_q to an occupation bitstring; returns false when the result vanishes.
bool hop(std::uint64_t bits, std::size_t p, std::size_t q, std::uint64_t& out, double& sign) {
  const std::uint64_t bq = std::uint64_t{1} << q;
  const std::uint64_t bp = std::uint64_t{1} << p;
  if (!(bits & bq)) return false;
  int parity = std::popcount(bits & (bq - 1));
  const std::uint64_t mid = bits ^ bq;
  if (mid & bp) return false;
  parity += std::popcount(mid & (bp - 1));
  out = mid | bp;
  sign = (parity % 2) ? -1.0 : 1.0;
  return true;
}

template <typename Vec>
SpinDensity full_density(const Vec& psi, const ModeLayout& layout) {
  const std::size_t dim = std::size_t{1} << layout.n_qubits();
  if (static_cast<std::size_t>(psi.size()) != dim) {
    throw std::invalid_argument("density_matrix: statevector has " + std::to_string(psi.size()) +
                                " amplitudes, expected " + std::to_string(dim));
  }
  const std::size_t L = layout.orbitals();
  SpinDensity rho{Eigen::MatrixXd::Zero(L, L), Eigen::MatrixXd::Zero(L, L)};
  for (std::size_t s = 0; s < 2; ++s) {
    Eigen::MatrixXd& block = s == 0 ? rho.up : rho.down;
    for (std::size_t mu = 0; mu < L; ++mu) {
      for (std::size_t nu = mu; nu < L; ++nu) {
        const auto p = layout.qubit(mu, s), q = layout.qubit(nu, s);
        double acc = 0.0;
        for (std::size_t b = 0; b < dim; ++b) {
          if (psi[b] == 0.0) continue;
          std::uint64_t out;
          double sign;
          if (hop(b, p, q, out, sign)) acc += std::real(std::conj(psi[out]) * psi[b]) * sign;
        }
        block(mu, nu) = block(nu, mu) = acc;
      }
    }
  }
  return rho;
}

template <typename Vec>
double full_docc(const Vec& psi, const ModeLayout& layout) {
  const std::uint64_t mask = (std::uint64_t{1} << layout.qubit(0, 0)) |
                             (std::uint64_t{1} << layout.qubit(0, 1));
  double acc = 0.0;
  for (Eigen::Index b = 0; b < psi.size(); ++b) {
    if ((static_cast<std::uint64_t>(b) & mask) == mask) acc += std::norm(psi[b]);
  }
  return acc;
}

}  // namespace

std::size_t SectorBasis::index_of(std::uint64_t bits) const {
  auto it = std::lower_bound(states.begin(), states.end(), bits);
  return (it != states.end() && *it == bits) ? static_cast<std::size_t>(it - states.begin())
                                             : states.size();
}

SectorBasis build_basis(std::size_t bath) {
  if (bath % 2 == 0 || bath > 7) {
    throw std::invalid_argument("build_basis: bath size must be odd and at most 7, got " +
                                std::to_string(bath));
  }
  SectorBasis basis;
  basis.bath = bath;
  const std::size_t L = bath + 1;
  const std::uint64_t spin_mask = (std::uint64_t{1} << L) - 1;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << (2 * L)); ++s) {
    if (static_cast<std::size_t>(std::popcount(s & spin_mask)) == L / 2 &&
        static_cast<std::size_t>(std::popcount(s >> L)) == L / 2) {
      basis.states.push_back(s);
    }
  }
  return basis;
}

Eigen::MatrixXd sector_spin_squared(const SectorBasis& basis) {
  // S^2 = S- S+ inside S_z = 0, with S+ = sum_mu a†_mu,up a_mu,dn.
  const std::size_t L = basis.bath + 1;
  const std::size_t dim = basis.size();
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t mu = 0; mu < L; ++mu) {
      std::uint64_t mid;
      double s1;
      if (!hop(basis.states[i], mu, mu + L, mid, s1)) continue;
      for (std::size_t nu = 0; nu < L; ++nu) {
        std::uint64_t out;
        double s2sign;
        if (!hop(mid, nu + L, nu, out, s2sign)) continue;
        s2(basis.index_of(out), i) += s1 * s2sign;
      }
    }
  }
  return s2;
}

Eigen::MatrixXd sector_hamiltonian(const EmbeddingParams& params, const SectorBasis& basis) {
  params.validate();
  if (params.bath() != basis.bath) {
    throw std::invalid_argument("sector_hamiltonian: params bath size does not match basis");
  }
  const std::size_t L = basis.bath + 1;
  const std::size_t dim = basis.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const auto s = basis.states[i];
    const double nup = static_cast<double>(s & 1u);
    const double ndn = static_cast<double>((s >> L) & 1u);
    h(i, i) += params.U * nup * ndn - params.U / 2 * (nup + ndn);
    for (std::size_t a = 1; a < L; ++a) {
      for (std::size_t sp = 0; sp < 2; ++sp) {
        const std::size_t c = sp * L, b = a + sp * L;
        h(i, i) += params.lambda_c[a - 1] * (1.0 - static_cast<double>((s >> b) & 1u));
        std::uint64_t out;
        double sign;
        if (hop(s, c, b, out, sign)) h(basis.index_of(out), i) += params.D[a - 1] * sign;
        if (hop(s, b, c, out, sign)) h(basis.index_of(out), i) += params.D[a - 1] * sign;
      }
    }
  }
  if (params.g != 0.0) h += params.g * sector_spin_squared(basis);
  return h;
}

GroundState ground_state(const EmbeddingParams& params) {
  const auto basis = build_basis(params.bath());
  const Eigen::MatrixXd h = sector_hamiltonian(params, basis);
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    throw std::logic_error("ground_state: assembled Hamiltonian is not symmetric (max asymmetry " +
                           std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("ground_state: eigensolver failed");
  const Eigen::MatrixXd s2 = sector_spin_squared(basis);

  Eigen::Index pick = 0;
  if (basis.size() > 1 && es.eigenvalues()[1] - es.eigenvalues()[0] < 1e-10) {
    const Eigen::VectorXd v0 = es.eigenvectors().col(0), v1 = es.eigenvectors().col(1);
    if (v1.dot(s2 * v1) < v0.dot(s2 * v0)) pick = 1;
  }
  GroundState gs;
  gs.energy = es.eigenvalues()[pick];
  gs.state.basis = basis;
  gs.state.amplitudes = es.eigenvectors().col(pick);
  // Fix the overall sign so the largest amplitude is positive.
  Eigen::Index imax;
  gs.state.amplitudes.cwiseAbs().maxCoeff(&imax);
  if (gs.state.amplitudes[imax] < 0) gs.state.amplitudes = -gs.state.amplitudes;
  gs.spin_squared = gs.state.amplitudes.dot(s2 * gs.state.amplitudes);
  gs.gap = basis.size() > 1 ? es.eigenvalues()[1] - es.eigenvalues()[0] : 0.0;
  return gs;
}

SpinDensity density_matrix(const ManyBodyState& state) {
  const auto& basis = state.basis;
  const std::size_t L = basis.bath + 1;
  SpinDensity rho{Eigen::MatrixXd::Zero(L, L), Eigen::MatrixXd::Zero(L, L)};
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double ai = state.amplitudes[i];
    if (ai == 0.0) continue;
    for (std::size_t s = 0; s < 2; ++s) {
      Eigen::MatrixXd& block = s == 0 ? rho.up : rho.down;
      for (std::size_t mu = 0; mu < L; ++mu) {
        for (std::size_t nu = 0; nu < L; ++nu) {
          std::uint64_t out;
          double sign;
          if (hop(basis.states[i], mu + s * L, nu + s * L, out, sign)) {
            block(mu, nu) += state.amplitudes[basis.index_of(out)] * sign * ai;
          }
        }
      }
    }
  }
  return rho;
}

double double_occupancy(const ManyBodyState& state) {
  const std::size_t L = state.basis.bath + 1;
  const std::uint64_t mask = 1u | (std::uint64_t{1} << L);
  double acc = 0.0;
  for (std::size_t i = 0; i < state.basis.size(); ++i) {
    if ((state.basis.states[i] & mask) == mask) acc += state.amplitudes[i] * state.amplitudes[i];
  }
  return acc;
}

SpinDensity density_matrix(const Eigen::VectorXcd& psi, const ModeLayout& layout) {
  return full_density(psi, layout);
}
SpinDensity density_matrix(const Eigen::VectorXd& psi, const ModeLayout& layout) {
  return full_density(psi, layout);
}
double double_occupancy(const Eigen::VectorXd& psi, const ModeLayout& layout) {
  return full_docc(psi, layout);
}
double double_occupancy(const Eigen::VectorXcd& psi, const ModeLayout& layout) {
  return full_docc(psi, layout);
}

Eigen::VectorXd to_full_space(const ManyBodyState& state) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(Eigen::Index{1} << state.basis.n_modes());
  for (std::size_t i = 0; i < state.basis.size(); ++i) {
    full[static_cast<Eigen::Index>(state.basis.states[i])] = state.amplitudes[i];
  }
  return full;
}

DmErrorMetrics dm_error_metrics(const std::vector<Eigen::MatrixXd>& measured,
                                const std::vector<Eigen::MatrixXd>& reference,
                                std::optional<std::pair<double, double>> docc) {
  if (measured.size() != reference.size()) {
    throw std::invalid_argument("dm_error_metrics: block count mismatch");
  }
  DmErrorMetrics out;
  double frob2 = 0.0;
  for (std::size_t k = 0; k < measured.size(); ++k) {
    const auto& m = measured[k];
    const auto& r = reference[k];
    if (m.rows() != r.rows() || m.cols() != r.cols()) {
      throw std::invalid_argument("dm_error_metrics: shape mismatch in block " + std::to_string(k));
    }
    const Eigen::MatrixXd diff = m - r;
    frob2 += diff.squaredNorm();
    for (Eigen::Index i = 0; i < diff.rows(); ++i) {
      for (Eigen::Index j = i; j < diff.cols(); ++j) out.entries.push_back(std::abs(diff(i, j)));
    }
  }
  if (docc) out.entries.push_back(std::abs(docc->first - docc->second));
  out.max_error = out.entries.empty() ? 0.0 : *std::max_element(out.entries.begin(), out.entries.end());
  out.trace_distance = 0.5 * std::sqrt(frob2);
  return out;
}

DmErrorMetrics dm_error_metrics(const SpinDensity& measured, const SpinDensity& reference,
                                std::optional<std::pair<double, double>> docc) {
  return dm_error_metrics(std::vector<Eigen::MatrixXd>{measured.up, measured.down},
                          std::vector<Eigen::MatrixXd>{reference.up, reference.down}, docc);
}

}  // namespace ghost
