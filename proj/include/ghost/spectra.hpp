#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghost/gga_bethe.hpp"

namespace ghost {

struct FrequencyGrid {
  std::vector<double> omega;
  double eta = 0.02;

  /// n equally spaced points on [lo, hi]; throws unless eta > 0 and n >= 2.
  static FrequencyGrid linear(double lo = -3.0, double hi = 3.0, std::size_t n = 1201, double eta = 0.02);
  std::size_t size() const { return omega.size(); }
};

/// R is too small for the quasiparticle gauge (insulating fixed point).
struct GaugeUndefined : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A pole of the self-energy sits at omega = 0, so Z is not defined.
struct DivergentWeight : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Orthogonal u with R = u (R0, 0, ..., 0)^T and u^T lambda u = [[l0, l1], [l1^T, diag(l2)]],
/// l2 ascending and l1 >= 0 entrywise.
struct GaugeBlocks {
  Eigen::MatrixXd u;
  double R0 = 0.0;
  double lambda0 = 0.0;
  Eigen::VectorXd lambda1;
  Eigen::VectorXd lambda2;
};

GaugeBlocks gauge_blocks(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda);

/// Local Green's function R^T (omega + i eta - h(e))^{-1} R averaged over D0.
Eigen::VectorXcd greens(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda, const FrequencyGrid& freq,
                        const QuadratureGrid& dos);

/// Lattice Green's function at a single band energy e.
std::complex<double> greens_at(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda, double e,
                               std::complex<double> z);

/// Pole expansion; the linear term carries the same omega + i eta as the poles
/// so that it agrees with the Dyson form to rounding.
Eigen::VectorXcd self_energy(const GaugeBlocks& g, const FrequencyGrid& freq);

/// z - e - 1/G_e(z); independent of e by locality.
Eigen::VectorXcd self_energy_dyson(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda, double e,
                                   const FrequencyGrid& freq);

/// Z = [1/R0^2 + sum_c l1_c^2 / (R0^2 l2_c^2)]^{-1}.
double qp_weight(const GaugeBlocks& g);

/// 1 / (1 - dRe Sigma/d omega) at omega = 0 by central differences.
double qp_weight_slope(const GaugeBlocks& g, double h = 1e-4, double eta = 2e-3);

struct SpectralData {
  FrequencyGrid freq;
  Eigen::VectorXcd G;
  std::optional<Eigen::VectorXcd> sigma;  // empty when the gauge is undefined

  Eigen::VectorXd spectral_function() const { return -G.imag() / M_PI; }
  double sum_rule() const;  // trapezoid integral of A
  std::string csv() const;
};

SpectralData compute_spectra(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda, const FrequencyGrid& freq,
                             const QuadratureGrid& dos);

/// Indices of strict local maxima of a sampled curve.
std::vector<std::size_t> local_maxima(const Eigen::VectorXd& y);

/// Trapezoid integral of A over |omega| in [lo, hi].
double band_weight(const SpectralData& s, double lo, double hi);

}  // namespace ghost
