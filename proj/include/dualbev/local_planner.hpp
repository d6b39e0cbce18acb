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

#ifndef DUALBEV_LOCAL_PLANNER_HPP
#define DUALBEV_LOCAL_PLANNER_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "dualbev/bev_geometry.hpp"
#include "dualbev/world.hpp"

namespace dualbev {

/// Sentinel temporal distance for candidates whose endpoint cannot reach
/// the goal at all.
inline constexpr double kUnreachableSteps = 1e6;

/// Sentinel temporal distance for candidates the tracking controller
/// cannot follow for even one control step without leaving free space.
/// Strictly worse than kUnreachableSteps: an unreachable-goal arc is still
/// safe to drive, an untrackable one is not.
inline constexpr double kUntrackableSteps = 2e6;

/// One candidate local path. Waypoints are in the robot frame (x forward,
/// y left, robot at the origin); temporal_distance is the estimated number
/// of control steps to the goal when following this candidate; gps_offset
/// is the goal position relative to the robot.
struct CandidatePath {
  Eigen::MatrixX2d waypoints;      ///< H rows
  double temporal_distance = 0.0;  ///< steps, >= 0
  Vec2 gps_offset = Vec2::Zero();

  /// Throws std::invalid_argument on an empty waypoint matrix, non-finite
  /// entries, a negative temporal distance, or a first waypoint farther
  /// than one control step (v * dt meters) from the robot.
  void validate(double v, double dt) const;
};

/// What the planner can see at one moment. Either field may be absent
/// depending on the sensor setup.
struct Observation {
  std::optional<Vec2> position;
  std::shared_ptr<const ImageFeatures> image;
};

/// Rolling observation window handed to a planner: the current observation,
/// a fixed number of past ones, and the goal.
struct ObservationContext {
  Observation current;
  std::vector<Observation> past;
  Observation goal;
};

/// Throws std::invalid_argument unless ctx carries exactly expected_past
/// past observations.
void validate_context(const ObservationContext& ctx, int expected_past);

class CandidatePlanner {
 public:
  virtual ~CandidatePlanner() = default;

  /// Propose K candidate paths. Deterministic given the construction seed
  /// and inputs; safe to call from multiple threads.
  virtual std::vector<CandidatePath> plan_candidates(
      const ObservationContext& ctx, const Pose2D& pose) const = 0;
  virtual int candidate_count() const = 0;
};

/// Per-cell shortest-path cost from a fixed goal cell over the 8-connected
/// free grid. Costs are exact (straight, diagonal) move-count pairs; the
/// metric length is straight + diag * sqrt(2) cells. Diagonal moves may not
/// cut corners: both orthogonal neighbors must be free.
struct GridSteps {
  int straight = -1;
  int diag = -1;

  bool reachable() const { return straight >= 0; }
  double length_cells() const {
    return straight + diag * 1.4142135623730951;
  }
};

class GridDistanceField {
 public:
  GridDistanceField() = default;
  GridDistanceField(int cols, int rows)
      : cols_(cols), rows_(rows),
        steps_(static_cast<size_t>(cols) * rows) {}

  const GridSteps& at(int cx, int cy) const {
    return steps_[static_cast<size_t>(cy) * cols_ + cx];
  }
  GridSteps& at(int cx, int cy) {
    return steps_[static_cast<size_t>(cy) * cols_ + cx];
  }
  int cols() const { return cols_; }
  int rows() const { return rows_; }

 private:
  int cols_ = 0;
  int rows_ = 0;
  std::vector<GridSteps> steps_;
};

/// Uniform-cost expansion from (gx, gy). Throws std::invalid_argument when
/// the goal cell is out of bounds or occupied.
GridDistanceField shortest_path_field(const WorldModel& world, int gx, int gy);

/// Shortest-path travel estimate between two world positions, in control
/// steps of v * dt meters. nullopt when either endpoint is blocked or no
/// path exists.
std::optional<double> oracle_temporal_distance(const WorldModel& world,
                                               const Vec2& from,
                                               const Vec2& to, double v = 1.5,
                                               double dt = 0.5);

struct OraclePlannerConfig {
  std::vector<double> curvatures = {-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3};
  int horizon = 5;       ///< waypoints per candidate
  double v = 1.5;        ///< m/s
  double dt = 0.5;       ///< s per control step
  double omega_max = 1.2;    ///< rad/s, the tracking controller's turn limit
  double walk_pitch = 0.08;  ///< arc collision-walk increment, meters

  void validate() const;
};

/// Ground-truth planner: sweeps constant-curvature arcs from the pose,
/// truncates each at the first obstacle, and grades the arc end by grid
/// shortest path to the goal. Needs ctx.goal.position. Thread safe; the
/// per-goal distance fields are cached under a mutex.
class OraclePlanner : public CandidatePlanner {
 public:
  OraclePlanner(const WorldModel& world, OraclePlannerConfig config = {});

  std::vector<CandidatePath> plan_candidates(const ObservationContext& ctx,
                                             const Pose2D& pose) const override;
  int candidate_count() const override {
    return static_cast<int>(config_.curvatures.size());
  }
  const OraclePlannerConfig& config() const { return config_; }

 private:
  const GridDistanceField& field_for(int gx, int gy) const;

  const WorldModel& world_;
  OraclePlannerConfig config_;
  mutable std::mutex cache_mutex_;
  mutable std::map<long, std::unique_ptr<GridDistanceField>> field_cache_;
};

struct StubPlannerConfig {
  int image_width = 16;
  int image_height = 12;
  int channels = 8;
  int candidates = 7;
  int horizon = 5;
  int latent_dim = 8;
  int context_past = 5;
  uint64_t seed = 0;
  double v = 1.5;
  double dt = 0.5;
  BevGridSpec grid;

  void validate() const;
};

/// Stand-in for the learned pipeline with random frozen weights: runs the
/// real lift / pool stages on the current image, then decodes waypoints,
/// temporal distance, and GPS offset with a fixed affine head. Goal
/// conditioning: with a goal image the latent mean is derived from it
/// (navigation); without one the latent is sampled from the prior
/// (exploration). Deterministic per construction seed.
class StubPlanner : public CandidatePlanner {
 public:
  explicit StubPlanner(StubPlannerConfig config = {});

  std::vector<CandidatePath> plan_candidates(const ObservationContext& ctx,
                                             const Pose2D& pose) const override;
  int candidate_count() const override { return config_.candidates; }
  const StubPlannerConfig& config() const { return config_; }

 private:
  StubPlannerConfig config_;
  CameraModel camera_;
  FrustumLattice frustum_;
  Eigen::MatrixXd head_;  ///< (2H+3) x (flat_dim + latent_dim)
};

/// Camera used by the stub pipeline for a given image size.
CameraModel default_stub_camera(int image_w, int image_h);

}  // namespace dualbev

#endif  // DUALBEV_LOCAL_PLANNER_HPP
