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

#ifndef DUALBEV_INTEGRATION_HPP
#define DUALBEV_INTEGRATION_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "dualbev/global_map.hpp"
#include "dualbev/local_planner.hpp"

namespace dualbev {

/// A candidate graded against the global map.
struct ScoredPath {
  CandidatePath candidate;
  Eigen::MatrixX2d world_waypoints;
  double score = 0.0;                ///< mean map cost along the path
  double normalized_distance = 0.0;  ///< min(temporal, d_max) / d_max
  double cost = 0.0;                 ///< k * score + (1 - k) * normalized_distance
  int index = -1;                    ///< position in the candidate list
};

/// Transform robot-frame waypoints into world coordinates at the pose.
Eigen::MatrixX2d to_world(const CandidatePath& path, const Pose2D& pose);

struct SelectionResult {
  ScoredPath winner;
  std::vector<ScoredPath> all;
};

/// Grade every candidate with cost = k * score + (1 - k) * normalized
/// temporal distance and pick the minimum. Ties go to the lower temporal
/// distance, then the lower index. The map cost of a candidate is the mean
/// map value along its world-frame waypoint polyline (the robot position is
/// prepended so single-waypoint candidates still form a segment).
/// Throws std::invalid_argument on an empty candidate list, k outside
/// [0, 1], or d_max <= 0.
SelectionResult select_path(std::span<const CandidatePath> candidates,
                            const Pose2D& pose, const ProbabilityMap& map,
                            double k, double d_max);

/// One unicycle control step toward the winner's first waypoint: turn the
/// heading toward it, clamped to omega_max * dt, then advance v * dt along
/// the new heading. The returned heading is normalized to (-pi, pi].
Pose2D control_step(const ScoredPath& winner, const Pose2D& pose, double v,
                    double dt, double omega_max);

enum class Outcome { kSuccess, kCollision, kTimeout };
const char* outcome_name(Outcome outcome);

struct CycleConfig {
  double k = 0.5;          ///< map-vs-distance mixing weight, [0, 1]
  double d_max = 20.0;     ///< temporal distance normalizer, steps
  double v = 1.5;          ///< m/s
  double dt = 0.5;         ///< s
  double omega_max = 1.2;  ///< rad/s
  double goal_radius = 2.0;  ///< m
  int step_budget = 200;
  int context_past = 5;

  void validate() const;
};

struct TrajectoryPoint {
  int step = 0;  ///< 1-based control step index
  Pose2D pose;
  double cost = 0.0;
  double score = 0.0;
  double temporal_distance = 0.0;
};

struct EpisodeResult {
  Outcome outcome = Outcome::kTimeout;
  int steps = 0;
  double displacement = 0.0;  ///< meters traveled = steps * v * dt
  Pose2D final_pose;
  std::vector<TrajectoryPoint> trajectory;
};

/// Run the closed loop: plan, select, step, until the goal is within
/// goal_radius (SUCCESS), the swept path of a step hits an obstacle
/// (COLLISION), or the step budget runs out (TIMEOUT). The observation
/// context carries positions only: the current pose, context_past previous
/// positions (the start repeated before enough history exists), and the
/// goal. Throws std::invalid_argument when the start pose is blocked.
EpisodeResult run_cycle(const CandidatePlanner& planner,
                        const ProbabilityMap& map, const WorldModel& world,
                        const Pose2D& start, const Vec2& goal,
                        const CycleConfig& config);

/// CSV with header "step,x,y,heading,cost,score,dist", one row per step.
void write_episode_csv(const EpisodeResult& episode,
                       const std::filesystem::path& path);

/// Single-line JSON summary of an episode.
std::string episode_to_json(const EpisodeResult& episode, const Vec2& goal);

}  // namespace dualbev

#endif  // DUALBEV_INTEGRATION_HPP
