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

#ifndef DUALBEV_CONFIG_HPP
#define DUALBEV_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dualbev/integration.hpp"

namespace dualbev {

/// Runtime parameters shared by the CLI commands. JSON keys mirror the
/// field names below; unknown keys are rejected.
struct RunConfig {
  double k = 0.5;       ///< map weight in the selection cost
  int K = 7;            ///< candidate paths per planning step
  int H = 5;            ///< waypoints per candidate
  int P = 5;            ///< past observations in the context
  double v = 1.5;       ///< m/s
  double dt = 0.5;      ///< s
  double goal_radius = 2.0;
  int step_budget = 200;
  double omega_max = 1.2;
  double sigma = 2.0;
  double d_max = 20.0;
  uint64_t seed = 0;
  /// Candidate curvature sweep; defaults to K values evenly spaced over
  /// [-0.3, 0.3] 1/m.
  std::vector<double> curvatures = {-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3};
  std::string world;       ///< optional world PGM path
  std::string map;         ///< optional hint map PGM path
  std::string out_prefix;  ///< optional output path prefix

  /// Keys: k, K, H, P, v, dt, goal_radius, step_budget, omega_max, sigma,
  /// d_max, seed, curvatures, world, map, out_prefix. "K" regenerates the
  /// default sweep; an explicit "curvatures" list must agree with "K" when
  /// both are present. Throws std::invalid_argument on unknown keys or
  /// inconsistent values, std::runtime_error on unreadable files.
  static RunConfig from_json_file(const std::filesystem::path& path);
  static RunConfig from_json_text(const std::string& text);

  void validate() const;

  CycleConfig cycle() const;
  OraclePlannerConfig planner() const;
};

/// Evenly spaced curvature sweep over [-0.3, 0.3] 1/m (K = 1 gives {0}).
std::vector<double> default_curvature_sweep(int K);

/// Seed precedence: an explicit flag, then a config file value, then the
/// DUALBEV_SEED environment variable, then 0. Throws std::runtime_error
/// when DUALBEV_SEED is set but not a non-negative integer.
uint64_t resolve_seed(std::optional<uint64_t> flag_seed,
                      std::optional<uint64_t> config_seed);

}  // namespace dualbev

#endif  // DUALBEV_CONFIG_HPP
