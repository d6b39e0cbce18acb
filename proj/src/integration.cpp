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

#include "dualbev/integration.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dualbev {

Eigen::MatrixX2d to_world(const CandidatePath& path, const Pose2D& pose) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  Eigen::MatrixX2d out(path.waypoints.rows(), 2);
  for (Eigen::Index i = 0; i < path.waypoints.rows(); ++i) {
    const double rx = path.waypoints(i, 0);
    const double ry = path.waypoints(i, 1);
    out(i, 0) = pose.x + c * rx - s * ry;
    out(i, 1) = pose.y + s * rx + c * ry;
  }
  return out;
}

SelectionResult select_path(std::span<const CandidatePath> candidates,
                            const Pose2D& pose, const ProbabilityMap& map,
                            double k, double d_max) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_path got an empty candidate list");
  }
  if (!(k >= 0.0) || !(k <= 1.0)) {
    throw std::invalid_argument("selection weight k must be in [0, 1], got " +
                                std::to_string(k));
  }
  if (!(d_max > 0.0)) {
    throw std::invalid_argument("d_max must be positive, got " +
                                std::to_string(d_max));
  }
  SelectionResult result;
  result.all.reserve(candidates.size());
  int best = -1;
  for (size_t i = 0; i < candidates.size(); ++i) {
    ScoredPath sp;
    sp.candidate = candidates[i];
    sp.index = static_cast<int>(i);
    sp.world_waypoints = to_world(candidates[i], pose);

    // Prepend the robot position so the scored polyline always has >= 2
    // vertices and covers the approach to the first waypoint.
    std::vector<Vec2> polyline;
    polyline.reserve(sp.world_waypoints.rows() + 1);
    polyline.emplace_back(pose.x, pose.y);
    for (Eigen::Index r = 0; r < sp.world_waypoints.rows(); ++r) {
      polyline.emplace_back(sp.world_waypoints(r, 0), sp.world_waypoints(r, 1));
    }
    sp.score = score_path(map, polyline);
    sp.normalized_distance =
        std::min(sp.candidate.temporal_distance, d_max) / d_max;
    sp.cost = k * sp.score + (1.0 - k) * sp.normalized_distance;

    result.all.push_back(std::move(sp));
    const ScoredPath& cur = result.all.back();
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const ScoredPath& b = result.all[best];
    if (cur.cost < b.cost ||
        (cur.cost == b.cost &&
         cur.candidate.temporal_distance < b.candidate.temporal_distance)) {
      best = static_cast<int>(i);
    }
  }
  result.winner = result.all[best];
  return result;
}

Pose2D control_step(const ScoredPath& winner, const Pose2D& pose, double v,
                    double dt, double omega_max) {
  if (!(v > 0.0) || !(dt > 0.0) || !(omega_max > 0.0)) {
    throw std::invalid_argument("control_step v, dt, omega_max must be positive");
  }
  const double tx = winner.world_waypoints(0, 0);
  const double ty = winner.world_waypoints(0, 1);
  const double desired = std::atan2(ty - pose.y, tx - pose.x);
  const double err = wrap_angle(desired - pose.heading);
  const double turn = std::clamp(err, -omega_max * dt, omega_max * dt);
  Pose2D next;
  next.heading = wrap_angle(pose.heading + turn);
  next.x = pose.x + v * dt * std::cos(next.heading);
  next.y = pose.y + v * dt * std::sin(next.heading);
  return next;
}

const char* outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::kSuccess: return "SUCCESS";
    case Outcome::kCollision: return "COLLISION";
    case Outcome::kTimeout: return "TIMEOUT";
  }
  return "?";
}

void CycleConfig::validate() const {
  if (!(k >= 0.0) || !(k <= 1.0)) {
    throw std::invalid_argument("cycle k must be in [0, 1]");
  }
  if (!(d_max > 0.0) || !(v > 0.0) || !(dt > 0.0) || !(omega_max > 0.0) ||
      !(goal_radius > 0.0)) {
    throw std::invalid_argument(
        "cycle d_max, v, dt, omega_max, goal_radius must be positive");
  }
  if (step_budget < 1 || context_past < 0) {
    throw std::invalid_argument("cycle step budget must be >= 1");
  }
}

EpisodeResult run_cycle(const CandidatePlanner& planner,
                        const ProbabilityMap& map, const WorldModel& world,
                        const Pose2D& start, const Vec2& goal,
                        const CycleConfig& config) {
  config.validate();
  if (!world.is_free(start.position())) {
    throw std::invalid_argument("run_cycle start pose is inside an obstacle");
  }

  EpisodeResult episode;
  Pose2D pose = start.normalized();
  std::deque<Vec2> history(config.context_past, start.position());

  if ((goal - pose.position()).norm() <= config.goal_radius) {
    episode.outcome = Outcome::kSuccess;
    episode.final_pose = pose;
    return episode;
  }

  for (int step = 1; step <= config.step_budget; ++step) {
    ObservationContext ctx;
    ctx.current.position = pose.position();
    ctx.goal.position = goal;
    ctx.past.reserve(config.context_past);
    for (const Vec2& p : history) ctx.past.push_back(Observation{p, nullptr});

    auto candidates = planner.plan_candidates(ctx, pose);
    // A planner can flag a proposal as untrackable (kUntrackableSteps).
    // After min(d, d_max)/d_max squashing those are indistinguishable from
    // merely-far candidates, so drop them here. Keep them all when nothing
    // better exists: the robot is cornered and still has to move.
    const auto doomed = [](const CandidatePath& p) {
      return p.temporal_distance >= kUntrackableSteps;
    };
    if (!std::all_of(candidates.begin(), candidates.end(), doomed)) {
      std::erase_if(candidates, doomed);
    }
    const SelectionResult sel =
        select_path(candidates, pose, map, config.k, config.d_max);
    const Pose2D next =
        control_step(sel.winner, pose, config.v, config.dt, config.omega_max);

    episode.steps = step;
    episode.displacement = static_cast<double>(step) * config.v * config.dt;
    episode.trajectory.push_back(
        TrajectoryPoint{step, next, sel.winner.cost, sel.winner.score,
                        sel.winner.candidate.temporal_distance});

    // The step is 0.75 m against 0.5 m cells; check the swept segment, not
    // just the endpoint, so thin obstacles cannot be tunneled through.
    if (!world.segment_free(pose.position(), next.position())) {
      episode.outcome = Outcome::kCollision;
      episode.final_pose = next;
      return episode;
    }

    if (config.context_past > 0) {
      history.push_back(pose.position());
      history.pop_front();
    }
    pose = next;

    if ((goal - pose.position()).norm() <= config.goal_radius) {
      episode.outcome = Outcome::kSuccess;
      episode.final_pose = pose;
      return episode;
    }
  }
  episode.outcome = Outcome::kTimeout;
  episode.final_pose = pose;
  return episode;
}

void write_episode_csv(const EpisodeResult& episode,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "step,x,y,heading,cost,score,dist\n";
  char buf[160];
  for (const TrajectoryPoint& p : episode.trajectory) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  p.step, p.pose.x, p.pose.y, p.pose.heading, p.cost, p.score,
                  p.temporal_distance);
    out << buf;
  }
}

std::string episode_to_json(const EpisodeResult& episode, const Vec2& goal) {
  std::ostringstream os;
  os.precision(12);
  os << "{\"outcome\":\"" << outcome_name(episode.outcome)
     << "\",\"steps\":" << episode.steps
     << ",\"displacement\":" << episode.displacement << ",\"final\":{\"x\":"
     << episode.final_pose.x << ",\"y\":" << episode.final_pose.y
     << ",\"heading\":" << episode.final_pose.heading
     << "},\"goal\":{\"x\":" << goal.x() << ",\"y\":" << goal.y() << "}}";
  return os.str();
}

}  // namespace dualbev
