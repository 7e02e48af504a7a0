#include "ghost/gga_bethe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ghost/parallel.hpp"

namespace ghost {

namespace {

constexpr double kZeroMode = 1e-13;
constexpr double kDegenerate = 1e-9;
constexpr std::size_t kNodeChunks = 16;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

struct FlooredSpectrum {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
  bool floored = false;
};

FlooredSpectrum floored_spectrum(const Eigen::MatrixXd& delta, const WarningSink& warn) {
  if (delta.rows() != delta.cols()) throw std::invalid_argument("Delta must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(delta));
  FlooredSpectrum out{es.eigenvectors(), es.eigenvalues()};
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    const double d = out.values[i];
    if (d < -1e-8 || d > 1.0 + 1e-8) {
      std::ostringstream os;
      os << "Delta eigenvalue " << d << " lies outside [0, 1]";
      throw DegenerateInput(os.str());
    }
    const double clipped = std::clamp(d, kDeltaFloor, 1.0 - kDeltaFloor);
    if (clipped != d) {
      out.floored = true;
      if (warn) {
        std::ostringstream os;
        os << "floored Delta eigenvalue " << d << " to " << clipped;
        warn(os.str());
      }
      out.values[i] = clipped;
    }
  }
  return out;
}

double f(double x) { return std::sqrt(x * (1.0 - x)); }
double fprime(double x) { return (1.0 - 2.0 * x) / (2.0 * f(x)); }

}  // namespace

QuadratureGrid QuadratureGrid::semicircle(std::size_t n) {
  if (n == 0) throw std::invalid_argument("QuadratureGrid: need at least one node");
  QuadratureGrid g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = double(i) * M_PI / double(n + 1);
    g.nodes[i - 1] = std::cos(t);
    g.weights[i - 1] = 2.0 / double(n + 1) * std::sin(t) * std::sin(t);
  }
  return g;
}

double QuadratureGrid::integrate(const std::function<double(double)>& fn) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * fn(nodes[i]);
  return acc;
}

LatticeMoments lattice_moments(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda,
                               const QuadratureGrid& grid) {
  const Eigen::Index B = R.size();
  if (lambda.rows() != B || lambda.cols() != B) {
    throw std::invalid_argument("lattice_moments: lambda must be B x B with B = len(R)");
  }
  const Eigen::MatrixXd rr = R * R.transpose();
  const Eigen::MatrixXd lam = symmetrize(lambda);
  const std::size_t chunks = std::min(kNodeChunks, grid.size());
  std::vector<LatticeMoments> partial(chunks, {Eigen::MatrixXd::Zero(B, B), Eigen::VectorXd::Zero(B)});
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * grid.size() / chunks, end = (c + 1) * grid.size() / chunks;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    for (std::size_t i = begin; i < end; ++i) {
      const double e = grid.nodes[i], w = grid.weights[i];
      es.compute(e * rr + lam);
      Eigen::VectorXd occ(B);
      for (Eigen::Index k = 0; k < B; ++k) {
        const double ev = es.eigenvalues()[k];
        occ[k] = std::abs(ev) <= kZeroMode ? 0.5 : (ev < 0 ? 1.0 : 0.0);
      }
      const Eigen::MatrixXd P = es.eigenvectors() * occ.asDiagonal() * es.eigenvectors().transpose();
      partial[c].delta += w * P;
      partial[c].K += (w * e) * (P * R);
    }
  });
  LatticeMoments out{Eigen::MatrixXd::Zero(B, B), Eigen::VectorXd::Zero(B)};
  for (const auto& p : partial) {
    out.delta += p.delta;
    out.K += p.K;
  }
  out.delta = symmetrize(out.delta);
  return out;
}

Eigen::MatrixXd sqrt_delta_factor(const Eigen::MatrixXd& delta, const WarningSink& warn) {
  const auto s = floored_spectrum(delta, warn);
  Eigen::VectorXd fv = s.values.unaryExpr([](double x) { return f(x); });
  return s.vectors * fv.asDiagonal() * s.vectors.transpose();
}

Eigen::VectorXd hybridization(const Eigen::MatrixXd& delta, const Eigen::VectorXd& K, const WarningSink& warn) {
  if (K.size() != delta.rows()) throw std::invalid_argument("hybridization: K length mismatch");
  const auto s = floored_spectrum(delta, warn);
  Eigen::VectorXd inv = s.values.unaryExpr([](double x) { return 1.0 / f(x); });
  return s.vectors * (inv.asDiagonal() * (s.vectors.transpose() * K));
}

Eigen::MatrixXd trace_derivative(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& M) {
  const auto s = floored_spectrum(delta, {});
  const Eigen::Index n = s.values.size();
  Eigen::MatrixXd F(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double di = s.values[i], dj = s.values[j];
      F(i, j) = std::abs(di - dj) < kDegenerate ? fprime(0.5 * (di + dj)) : (f(di) - f(dj)) / (di - dj);
    }
  }
  const Eigen::MatrixXd mt = s.vectors.transpose() * M * s.vectors;
  const Eigen::MatrixXd g = mt.transpose().cwiseProduct(F);
  return symmetrize(s.vectors * g * s.vectors.transpose());
}

Eigen::MatrixXd lambda_c_from(const Eigen::VectorXd& R, const Eigen::MatrixXd& delta, const Eigen::VectorXd& D,
                              const Eigen::MatrixXd& lambda) {
  if (R.size() != D.size() || delta.rows() != R.size() || lambda.rows() != R.size()) {
    throw std::invalid_argument("lambda_c_from: inconsistent dimensions");
  }
  // Tr(R^T f D) + c.c. = 2 Tr(f(Delta) D R^T) for real quantities.
  return -symmetrize(lambda) - 2.0 * trace_derivative(delta, D * R.transpose());
}

EmbeddingUpdate embedding_update(const Eigen::MatrixXd& rho, const WarningSink& warn, EdgePolicy policy) {
  const Eigen::Index L = rho.rows();
  if (L < 2 || rho.cols() != L) throw std::invalid_argument("embedding_update: rho must be (B+1) x (B+1)");
  const Eigen::Index B = L - 1;
  EmbeddingUpdate out;
  out.delta = Eigen::MatrixXd::Identity(B, B) - rho.block(1, 1, B, B).transpose();
  const auto s = floored_spectrum(out.delta, warn);
  const Eigen::VectorXd cb = rho.block(0, 1, 1, B).transpose();
  const Eigen::VectorXd proj = s.vectors.transpose() * cb;
  Eigen::VectorXd coeff(B);
  for (Eigen::Index k = 0; k < B; ++k) {
    const double d = s.values[k];
    const bool edge = d <= kDeltaFloor || d >= 1.0 - kDeltaFloor;
    if (!edge) {
      coeff[k] = proj[k] / f(d);
      continue;
    }
    // |<c† b_k>| <= sqrt(d_k (1 - d_k)) for any physical state, so mixing
    // beyond the floored bound signals inconsistent input.
    const double bound = f(d);
    if (policy == EdgePolicy::Throw || std::abs(proj[k]) > bound + 1e-10) {
      throw DegenerateInput("embedding_update: Delta_emb reached the edge of [0, 1]; the bath occupation "
                            "constraint cannot be inverted");
    }
    coeff[k] = std::clamp(proj[k] / bound, -1.0, 1.0);
  }
  out.R = s.vectors * coeff;
  return out;
}

Eigen::MatrixXd lambda_update(const Eigen::MatrixXd& lambda_c, const Eigen::MatrixXd& delta_emb,
                              const Eigen::VectorXd& D, const Eigen::VectorXd& R_new) {
  return -symmetrize(lambda_c) - 2.0 * trace_derivative(delta_emb, D * R_new.transpose());
}

}  // namespace ghost
