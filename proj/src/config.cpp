// Copyright 2026, the dualbev project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dualbev/config.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dualbev {

std::vector<double> default_curvature_sweep(int K) {
  if (K < 1) {
    throw std::invalid_argument("curvature sweep needs K >= 1");
  }
  std::vector<double> out(K);
  if (K == 1) {
    out[0] = 0.0;
    return out;
  }
  for (int i = 0; i < K; ++i) {
    out[i] = -0.3 + 0.6 * i / (K - 1);
  }
  return out;
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config root must be a JSON object");
  }

  RunConfig cfg;
  bool saw_K = false;
  bool saw_curvatures = false;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "k") {
        cfg.k = value.get<double>();
      } else if (key == "K") {
        cfg.K = value.get<int>();
        saw_K = true;
      } else if (key == "H") {
        cfg.H = value.get<int>();
      } else if (key == "P") {
        cfg.P = value.get<int>();
      } else if (key == "v") {
        cfg.v = value.get<double>();
      } else if (key == "dt") {
        cfg.dt = value.get<double>();
      } else if (key == "goal_radius") {
        cfg.goal_radius = value.get<double>();
      } else if (key == "step_budget") {
        cfg.step_budget = value.get<int>();
      } else if (key == "omega_max") {
        cfg.omega_max = value.get<double>();
      } else if (key == "sigma") {
        cfg.sigma = value.get<double>();
      } else if (key == "d_max") {
        cfg.d_max = value.get<double>();
      } else if (key == "seed") {
        cfg.seed = value.get<uint64_t>();
      } else if (key == "curvatures") {
        cfg.curvatures = value.get<std::vector<double>>();
        saw_curvatures = true;
      } else if (key == "world") {
        cfg.world = value.get<std::string>();
      } else if (key == "map") {
        cfg.map = value.get<std::string>();
      } else if (key == "out_prefix") {
        cfg.out_prefix = value.get<std::string>();
      } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config value has wrong type: ") +
                                e.what());
  }

  if (saw_K && saw_curvatures) {
    if (static_cast<int>(cfg.curvatures.size()) != cfg.K) {
      throw std::invalid_argument(
          "config sets K=" + std::to_string(cfg.K) + " but lists " +
          std::to_string(cfg.curvatures.size()) + " curvatures");
    }
  } else if (saw_K) {
    cfg.curvatures = default_curvature_sweep(cfg.K);
  } else if (saw_curvatures) {
    cfg.K = static_cast<int>(cfg.curvatures.size());
  }

  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  if (!(k >= 0.0) || !(k <= 1.0)) {
    throw std::invalid_argument("config k must be in [0, 1], got " +
                                std::to_string(k));
  }
  if (K < 1 || H < 1 || P < 0 || step_budget < 1) {
    throw std::invalid_argument("config K, H, step_budget must be >= 1 and P >= 0");
  }
  if (static_cast<int>(curvatures.size()) != K) {
    throw std::invalid_argument("config curvature list does not match K");
  }
  if (!(v > 0.0) || !(dt > 0.0) || !(goal_radius > 0.0) || !(omega_max > 0.0) ||
      !(sigma > 0.0) || !(d_max > 0.0)) {
    throw std::invalid_argument(
        "config v, dt, goal_radius, omega_max, sigma, d_max must be positive");
  }
  for (double c : curvatures) {
    if (!std::isfinite(c)) {
      throw std::invalid_argument("config curvatures must be finite");
    }
  }
}

CycleConfig RunConfig::cycle() const {
  CycleConfig c;
  c.k = k;
  c.d_max = d_max;
  c.v = v;
  c.dt = dt;
  c.omega_max = omega_max;
  c.goal_radius = goal_radius;
  c.step_budget = step_budget;
  c.context_past = P;
  return c;
}

OraclePlannerConfig RunConfig::planner() const {
  OraclePlannerConfig p;
  p.curvatures = curvatures;
  p.horizon = H;
  p.v = v;
  p.dt = dt;
  p.omega_max = omega_max;
  return p;
}

uint64_t resolve_seed(std::optional<uint64_t> flag_seed,
                      std::optional<uint64_t> config_seed) {
  if (flag_seed.has_value()) return *flag_seed;
  if (config_seed.has_value()) return *config_seed;
  const char* env = std::getenv("DUALBEV_SEED");
  if (env != nullptr && *env != '\0') {
    // strtoull alone would accept "-3" by wrapping it; require plain digits.
    for (const char* p = env; *p != '\0'; ++p) {
      if (*p < '0' || *p > '9') {
        throw std::runtime_error(
            std::string("DUALBEV_SEED is not a non-negative integer: '") +
            env + "'");
      }
    }
    return static_cast<uint64_t>(std::strtoull(env, nullptr, 10));
  }
  return 0;
}

}  // namespace dualbev
