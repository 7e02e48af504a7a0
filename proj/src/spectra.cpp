#include "ghost/spectra.hpp"

#include <cmath>
#include <sstream>

#include "ghost/parallel.hpp"

namespace ghost {

using cplx = std::complex<double>;

FrequencyGrid FrequencyGrid::linear(double lo, double hi, std::size_t n, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("FrequencyGrid: broadening eta must be positive");
  if (n < 2 || !(hi > lo)) throw std::invalid_argument("FrequencyGrid: need n >= 2 and hi > lo");
  FrequencyGrid g;
  g.eta = eta;
  g.omega.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.omega[i] = lo + (hi - lo) * double(i) / double(n - 1);
  return g;
}

GaugeBlocks gauge_blocks(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda) {
  const Eigen::Index B = R.size();
  if (lambda.rows() != B || lambda.cols() != B) throw std::invalid_argument("gauge_blocks: lambda must be B x B");
  GaugeBlocks g;
  g.R0 = R.norm();
  if (g.R0 < 1e-10) throw GaugeUndefined("gauge_blocks: |R| below 1e-10");

  // Householder reflection built on the side that avoids cancellation; the
  // first column is flipped when needed so that u e1 = R / |R|.
  const Eigen::VectorXd r = R / g.R0;
  const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(B, 0);
  const bool plus = r[0] >= 0.0;
  const Eigen::VectorXd v = plus ? Eigen::VectorXd(e1 + r) : Eigen::VectorXd(e1 - r);
  g.u = Eigen::MatrixXd::Identity(B, B) - 2.0 * v * v.transpose() / v.squaredNorm();
  if (plus) g.u.col(0) *= -1.0;

  const Eigen::MatrixXd lam = 0.5 * (lambda + lambda.transpose());
  Eigen::MatrixXd L = g.u.transpose() * lam * g.u;
  g.lambda0 = L(0, 0);
  if (B > 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.block(1, 1, B - 1, B - 1));
    Eigen::MatrixXd W = es.eigenvectors();  // ascending eigenvalues
    g.lambda2 = es.eigenvalues();
    g.lambda1 = W.transpose() * L.block(1, 0, B - 1, 1);
    for (Eigen::Index c = 0; c < B - 1; ++c) {
      if (g.lambda1[c] < 0.0) {
        g.lambda1[c] = -g.lambda1[c];
        W.col(c) *= -1.0;
      }
    }
    g.u.rightCols(B - 1) = g.u.rightCols(B - 1) * W;
  } else {
    g.lambda1.resize(0);
    g.lambda2.resize(0);
  }
  return g;
}

Eigen::VectorXcd greens(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda, const FrequencyGrid& freq,
                        const QuadratureGrid& dos) {
  if (!(freq.eta > 0.0)) throw std::invalid_argument("greens: eta must be positive");
  const Eigen::Index B = R.size();
  if (lambda.rows() != B || lambda.cols() != B) throw std::invalid_argument("greens: lambda must be B x B");
  const Eigen::MatrixXd rr = R * R.transpose();
  const Eigen::MatrixXd lam = 0.5 * (lambda + lambda.transpose());

  // Poles e_k(eps) and residues (R^T v_k)^2 per node, independent of omega.
  const std::size_t n = dos.size();
  Eigen::MatrixXd poles(B, n), residues(B, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  for (std::size_t i = 0; i < n; ++i) {
    es.compute(dos.nodes[i] * rr + lam);
    poles.col(i) = es.eigenvalues();
    residues.col(i) = (es.eigenvectors().transpose() * R).array().square() * dos.weights[i];
  }
  Eigen::VectorXcd G(freq.size());
  parallel_for(freq.size(), [&](std::size_t w) {
    const cplx z(freq.omega[w], freq.eta);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < B; ++k) acc += residues(k, i) / (z - poles(k, i));
    G[w] = acc;
  });
  return G;
}

cplx greens_at(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda, double e, cplx z) {
  const Eigen::Index B = R.size();
  const Eigen::MatrixXcd A =
      z * Eigen::MatrixXcd::Identity(B, B) - (e * R * R.transpose() + 0.5 * (lambda + lambda.transpose())).cast<cplx>();
  const Eigen::VectorXcd Rc = R.cast<cplx>();
  return Rc.dot(A.partialPivLu().solve(Rc));
}

Eigen::VectorXcd self_energy(const GaugeBlocks& g, const FrequencyGrid& freq) {
  const double inv = 1.0 / (g.R0 * g.R0);
  Eigen::VectorXcd s(freq.size());
  for (std::size_t w = 0; w < freq.size(); ++w) {
    const cplx z(freq.omega[w], freq.eta);
    cplx acc = z * (1.0 - inv) + g.lambda0 * inv;
    for (Eigen::Index c = 0; c < g.lambda2.size(); ++c) acc += g.lambda1[c] * g.lambda1[c] * inv / (z - g.lambda2[c]);
    s[w] = acc;
  }
  return s;
}

Eigen::VectorXcd self_energy_dyson(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda, double e,
                                   const FrequencyGrid& freq) {
  Eigen::VectorXcd s(freq.size());
  for (std::size_t w = 0; w < freq.size(); ++w) {
    const cplx z(freq.omega[w], freq.eta);
    s[w] = z - e - 1.0 / greens_at(R, lambda, e, z);
  }
  return s;
}

double qp_weight(const GaugeBlocks& g) {
  const double inv = 1.0 / (g.R0 * g.R0);
  double acc = inv;
  for (Eigen::Index c = 0; c < g.lambda2.size(); ++c) {
    if (std::abs(g.lambda2[c]) < 1e-12) {
      if (g.lambda1[c] < 1e-12) continue;  // decoupled pole
      throw DivergentWeight("qp_weight: self-energy pole at omega = 0");
    }
    acc += g.lambda1[c] * g.lambda1[c] * inv / (g.lambda2[c] * g.lambda2[c]);
  }
  return 1.0 / acc;
}

double qp_weight_slope(const GaugeBlocks& g, double h, double eta) {
  FrequencyGrid f;
  f.eta = eta;
  f.omega = {-h, h};
  const auto s = self_energy(g, f);
  return 1.0 / (1.0 - (s[1].real() - s[0].real()) / (2 * h));
}

double SpectralData::sum_rule() const {
  const Eigen::VectorXd A = spectral_function();
  double acc = 0.0;
  for (std::size_t i = 1; i < freq.size(); ++i) acc += 0.5 * (A[i] + A[i - 1]) * (freq.omega[i] - freq.omega[i - 1]);
  return acc;
}

std::string SpectralData::csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "omega,ReG,ImG,A,ReSigma,ImSigma\n";
  const Eigen::VectorXd A = spectral_function();
  for (std::size_t i = 0; i < freq.size(); ++i) {
    os << freq.omega[i] << ',' << G[i].real() << ',' << G[i].imag() << ',' << A[i] << ',';
    if (sigma) {
      os << (*sigma)[i].real() << ',' << (*sigma)[i].imag();
    } else {
      os << "nan,nan";
    }
    os << '\n';
  }
  return os.str();
}

SpectralData compute_spectra(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda, const FrequencyGrid& freq,
                             const QuadratureGrid& dos) {
  SpectralData s{freq, greens(R, lambda, freq, dos), std::nullopt};
  try {
    s.sigma = self_energy(gauge_blocks(R, lambda), freq);
  } catch (const GaugeUndefined&) {
  }
  return s;
}

std::vector<std::size_t> local_maxima(const Eigen::VectorXd& y) {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 1; i + 1 < y.size(); ++i)
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back(static_cast<std::size_t>(i));
  return out;
}

double band_weight(const SpectralData& s, double lo, double hi) {
  const Eigen::VectorXd A = s.spectral_function();
  double acc = 0.0;
  for (std::size_t i = 1; i < s.freq.size(); ++i) {
    const double a = s.freq.omega[i - 1], b = s.freq.omega[i];
    const double m = std::abs(0.5 * (a + b));
    if (m >= lo && m <= hi) acc += 0.5 * (A[i] + A[i - 1]) * (b - a);
  }
  return acc;
}

}  // namespace ghost
