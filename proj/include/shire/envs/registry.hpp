#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "shire/envs/cartpole.hpp"
#include "shire/envs/environment.hpp"
#include "shire/envs/lander.hpp"
#include "shire/envs/mountaincar.hpp"
#include "shire/envs/taxi.hpp"

namespace shire::envs {

inline const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names{"cartpole", "mountaincar", "lander", "taxi"};
  return names;
}

inline std::string env_names_joined() {
  std::string out;
  for (const auto& n : env_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

inline std::unique_ptr<Environment> make_env(std::string_view name) {
  if (name == "cartpole") return std::make_unique<CartPole>();
  if (name == "mountaincar") return std::make_unique<MountainCar>();
  if (name == "lander") return std::make_unique<Lander>();
  if (name == "taxi") return std::make_unique<Taxi>();
  throw ConfigError("unknown environment '" + std::string(name) + "' (valid: " + env_names_joined() + ")");
}

inline EnvSpec env_spec(std::string_view name) { return make_env(name)->spec(); }

}  // namespace shire::envs
