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

#ifndef DUALBEV_SIMULATOR_HPP
#define DUALBEV_SIMULATOR_HPP

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dualbev/integration.hpp"
#include "dualbev/rng.hpp"

namespace dualbev {

/// Aggregate results of an evaluation battery. The temporal suite fills
/// pairs / far_close_accuracy / dist_accuracy; the exploration suite fills
/// the per-level success counts and the displacement and velocity averages.
struct MetricReport {
  // Temporal-distance prediction metrics (percent).
  int pairs = 0;
  double far_close_accuracy = 0.0;
  std::array<double, 3> dist_accuracy{};  ///< |error| <= 1, 2, 3 steps

  // Exploration metrics. Levels: 0 easy (< 10 m), 1 medium (10-20 m),
  // 2 hard (> 20 m), by Euclidean start-goal distance.
  int trials_per_level = 0;
  std::array<int, 3> successes{};
  std::array<double, 3> mean_displacement{};  ///< meters, successes per level
  double avg_displacement = 0.0;  ///< meters, over all successful episodes
  double avg_velocity = 0.0;      ///< m/s, over successful moving episodes
};

/// Predicts travel time (control steps) between two world positions.
using TemporalPredictor =
    std::function<double(const WorldModel&, const Vec2&, const Vec2&)>;

/// Ground-truth predictor: grid shortest path converted to steps.
/// Unreachable queries predict kUnreachableSteps.
TemporalPredictor oracle_predictor(double v = 1.5, double dt = 0.5);
/// Oracle plus uniform noise in [-noise_range, +noise_range].
TemporalPredictor noisy_predictor(double noise_range, uint64_t seed,
                                  double v = 1.5, double dt = 0.5);
/// Always predicts the same number of steps.
TemporalPredictor constant_predictor(double steps);

/// Score a predictor on n_pairs random reachable (from, to) pairs. A pair
/// is "close" when its true temporal distance is at most 10 steps;
/// far_close_accuracy is the rate of correct far/close decisions, and
/// dist_accuracy[t-1] the rate of |prediction - truth| <= t steps.
/// Throws std::invalid_argument on n_pairs < 1 and std::runtime_error when
/// the world admits no reachable pair.
MetricReport eval_temporal_metrics(const TemporalPredictor& predictor,
                                   const WorldModel& world, int n_pairs,
                                   uint64_t seed);

struct EpisodeSpec {
  Vec2 start;
  Vec2 goal;
};

/// Draw a (start, goal) pair of free cell centers whose Euclidean distance
/// lies in [min_dist, max_dist) and that are connected on the grid. Starts
/// closer than goal_clearance to the goal are rejected so episodes cannot
/// succeed without moving. Throws std::runtime_error after max_attempts.
EpisodeSpec sample_reachable_pair(const WorldModel& world, Rng& rng,
                                  double min_dist, double max_dist,
                                  double goal_clearance = 3.0,
                                  int max_attempts = 5000);

struct ExplorationConfig {
  CycleConfig cycle;
  OraclePlannerConfig planner;
  bool use_hint_map = true;
  double sigma = 2.0;  ///< hint map falloff, meters
};

/// Run trials_per_level closed-loop episodes per difficulty level. Episode
/// sampling consumes the RNG identically whether or not the hint map is
/// used, so two calls with the same seed form paired trials. Worlds are
/// cycled through per trial. Throws std::runtime_error when a level cannot
/// be sampled in a world (e.g. hard goals in a small world).
MetricReport eval_exploration(const ExplorationConfig& config,
                              const std::vector<WorldModel>& worlds,
                              int trials_per_level, uint64_t seed);

std::string metric_report_to_json(const MetricReport& report,
                                  std::string_view suite);

/// Fixed-width text tables, one row per labelled report.
std::string format_temporal_table(
    std::span<const std::pair<std::string, MetricReport>> rows);
std::string format_exploration_table(
    std::span<const std::pair<std::string, MetricReport>> rows);

}  // namespace dualbev

#endif  // DUALBEV_SIMULATOR_HPP
