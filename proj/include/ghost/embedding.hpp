#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"

namespace ghost {

/// Couplings of the single-band embedding Hamiltonian in the gauge where the
/// bath levels are diagonal:
///   U n_up n_dn - U/2 (n_up + n_dn) + sum_a,s lambda_c[a] b_as b†_as
///   + sum_a,s D[a] (c†_s b_as + h.c.)
/// plus the penalty g S^2 + g (N - B - 1)^2.
struct EmbeddingParams {
  double U = 0.0;
  std::vector<double> D;
  std::vector<double> lambda_c;
  double g = 10.0;

  std::size_t bath() const { return D.size(); }

  // Throws std::invalid_argument on length mismatch, even B, or g < 0.
  void validate() const;

  nlohmann::json to_json() const;
  static EmbeddingParams from_json(const nlohmann::json& j);
};

}  // namespace ghost
