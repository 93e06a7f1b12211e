#include "nesy/envs/environment.hpp"

#include <algorithm>

#include "nesy/envs/doorkey.hpp"
#include "nesy/envs/office_world.hpp"

namespace nesy::envs {

int Environment::action_index(const std::string& name) const {
  const auto& names = action_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range(domain_id() + ": unknown action '" + name + "'");
  return static_cast<int>(it - names.begin());
}

EnvConfig normalized(EnvConfig config) {
  if (config.domain == "doorkey") {
    const int n = config.grid_size;
    if (n < 5) throw ConfigError("doorkey grid_size must be at least 5");
    if (config.num_keys < 1 || config.num_keys > doorkey::kColorCount) {
      throw ConfigError("doorkey num_keys must lie in [1, 6] (one colour per key)");
    }
    // Largest area left of the wall is (n - 4) columns of (n - 2) cells, shared with the agent.
    if (config.num_keys + 1 > (n - 4) * (n - 2)) {
      throw ConfigError("doorkey: " + std::to_string(config.num_keys) + " keys cannot be placed on a " +
                        std::to_string(n) + "x" + std::to_string(n) + " grid");
    }
    if (config.max_steps == 0) config.max_steps = 10 * n * n;
  } else if (config.domain == "officeworld") {
    office::parse_task(config.task);
    if (config.max_steps == 0) config.max_steps = 1000;
  } else {
    throw ConfigError("unknown domain '" + config.domain + "'");
  }
  if (config.max_steps < 1) throw ConfigError("max_steps must be positive");
  return config;
}

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  const EnvConfig c = normalized(config);
  if (c.domain == "doorkey") return std::make_unique<doorkey::DoorKeyEnv>(c);
  return std::make_unique<office::OfficeWorldEnv>(c);
}

}  // namespace nesy::envs
