#pragma once

#include <nlohmann/json.hpp>

#include "affectfuse/neuralnet.hpp"

namespace affectfuse::detail {

inline nlohmann::json config_to_json(const nn::MLPConfig& c) {
  return nlohmann::json{{"n_hidden", c.n_hidden},
                        {"first_units", c.first_units},
                        {"learning_rate", c.learning_rate},
                        {"loss", nn::to_string(c.loss)},
                        {"seed", c.seed},
                        {"max_epochs", c.max_epochs},
                        {"batch_size", c.batch_size},
                        {"patience", c.patience}};
}

inline nn::MLPConfig config_from_json(const nlohmann::json& j) {
  nn::MLPConfig c;
  c.n_hidden = j.at("n_hidden").get<int>();
  c.first_units = j.at("first_units").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.loss = nn::loss_kind_from_string(j.at("loss").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.patience = j.at("patience").get<int>();
  return c;
}

}  // namespace affectfuse::detail
