#include "ghost/embedding.hpp"

#include <stdexcept>
#include <string>

namespace ghost {

void EmbeddingParams::validate() const {
  if (D.size() != lambda_c.size()) {
    throw std::invalid_argument("embedding params: D has " + std::to_string(D.size()) +
                                " entries but lambda_c has " + std::to_string(lambda_c.size()));
  }
  if (D.empty() || D.size() % 2 == 0) {
    throw std::invalid_argument("embedding params: bath size B must be odd, got " +
                                std::to_string(D.size()));
  }
  if (!(g >= 0.0)) {
    throw std::invalid_argument("embedding params: penalty g must be non-negative");
  }
}

nlohmann::json EmbeddingParams::to_json() const {
  return {{"U", U}, {"D", D}, {"lambda_c", lambda_c}, {"g", g}};
}

EmbeddingParams EmbeddingParams::from_json(const nlohmann::json& j) {
  EmbeddingParams p;
  for (const auto& [key, _] : j.items()) {
    if (key != "U" && key != "D" && key != "lambda_c" && key != "g") {
      throw std::invalid_argument("embedding params: unknown key '" + key + "'");
    }
  }
  p.U = j.at("U").get<double>();
  p.D = j.at("D").get<std::vector<double>>();
  p.lambda_c = j.at("lambda_c").get<std::vector<double>>();
  p.g = j.value("g", 10.0);
  p.validate();
  return p;
}

}  // namespace ghost
