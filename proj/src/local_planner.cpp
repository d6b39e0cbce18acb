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

#include "dualbev/local_planner.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "dualbev/bev_pooling.hpp"
#include "dualbev/losses.hpp"

namespace dualbev {

void CandidatePath::validate(double v, double dt) const {
  if (waypoints.rows() < 1) {
    throw std::invalid_argument("candidate path has no waypoints");
  }
  if (!waypoints.allFinite() || !gps_offset.allFinite()) {
    throw std::invalid_argument("candidate path contains non-finite values");
  }
  if (!(temporal_distance >= 0.0) || !std::isfinite(temporal_distance)) {
    throw std::invalid_argument("candidate temporal distance must be >= 0, got " +
                                std::to_string(temporal_distance));
  }
  const double reach = v * dt + 1e-9;
  const double first = waypoints.row(0).norm();
  if (first > reach) {
    throw std::invalid_argument(
        "first waypoint is " + std::to_string(first) +
        " m from the robot, beyond one control step of " +
        std::to_string(v * dt) + " m");
  }
}

void validate_context(const ObservationContext& ctx, int expected_past) {
  if (static_cast<int>(ctx.past.size()) != expected_past) {
    throw std::invalid_argument(
        "observation context carries " + std::to_string(ctx.past.size()) +
        " past observations, expected " + std::to_string(expected_past));
  }
}

GridDistanceField shortest_path_field(const WorldModel& world, int gx, int gy) {
  if (!world.in_bounds(gx, gy) || world.occupied(gx, gy)) {
    throw std::invalid_argument("distance field goal cell (" +
                                std::to_string(gx) + ", " + std::to_string(gy) +
                                ") is blocked or out of bounds");
  }
  GridDistanceField field(world.cols(), world.rows());
  struct Entry {
    double cost;
    int cx, cy;
    bool operator>(const Entry& o) const { return cost > o.cost; }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  field.at(gx, gy) = GridSteps{0, 0};
  queue.push({0.0, gx, gy});
  constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!queue.empty()) {
    const Entry e = queue.top();
    queue.pop();
    const GridSteps cur = field.at(e.cx, e.cy);
    if (e.cost > cur.length_cells() + 1e-12) continue;  // stale entry
    for (int m = 0; m < 8; ++m) {
      const int nx = e.cx + dx8[m];
      const int ny = e.cy + dy8[m];
      if (!world.in_bounds(nx, ny) || world.occupied(nx, ny)) continue;
      const bool diagonal = m >= 4;
      // Diagonal moves may not squeeze between two touching obstacles.
      if (diagonal && (world.occupied(e.cx + dx8[m], e.cy) ||
                       world.occupied(e.cx, e.cy + dy8[m]))) {
        continue;
      }
      GridSteps cand = cur;
      if (diagonal) {
        ++cand.diag;
      } else {
        ++cand.straight;
      }
      GridSteps& slot = field.at(nx, ny);
      if (!slot.reachable() ||
          cand.length_cells() < slot.length_cells() - 1e-12) {
        slot = cand;
        queue.push({cand.length_cells(), nx, ny});
      }
    }
  }
  return field;
}

namespace {

// Field readout at a continuous world position. The per-cell field is
// quantized at half a cell, so candidate endpoints a few centimeters apart
// can flip ranks on cell parity alone, and a replanning loop then jitters
// between near-equal arcs instead of converging. Bilinear over the four
// surrounding cell centers smooths the readout; falls back to the
// endpoint's own cell when a corner is blocked, unreachable, or off grid.
double field_length_cells_at(const GridDistanceField& field,
                             const WorldModel& world, const Vec2& pos,
                             const GridSteps& nearest) {
  const double gx = pos.x() / world.cell_size() - 0.5;
  const double gy = pos.y() / world.cell_size() - 0.5;
  const int x0 = static_cast<int>(std::floor(gx));
  const int y0 = static_cast<int>(std::floor(gy));
  double corner[2][2];
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const int cx = x0 + dx;
      const int cy = y0 + dy;
      if (!world.in_bounds(cx, cy) || world.occupied(cx, cy)) {
        return nearest.length_cells();
      }
      const GridSteps s = field.at(cx, cy);
      if (!s.reachable()) return nearest.length_cells();
      corner[dy][dx] = s.length_cells();
    }
  }
  const double fx = gx - x0;
  const double fy = gy - y0;
  const double top = corner[0][0] * (1.0 - fx) + corner[0][1] * fx;
  const double bottom = corner[1][0] * (1.0 - fx) + corner[1][1] * fx;
  return top * (1.0 - fy) + bottom * fy;
}

}  // namespace

std::optional<double> oracle_temporal_distance(const WorldModel& world,
                                               const Vec2& from, const Vec2& to,
                                               double v, double dt) {
  const auto [fx, fy] = world.cell_of(from);
  const auto [tx, ty] = world.cell_of(to);
  if (fx < 0 || tx < 0 || world.occupied(fx, fy) || world.occupied(tx, ty)) {
    return std::nullopt;
  }
  const GridDistanceField field = shortest_path_field(world, tx, ty);
  const GridSteps steps = field.at(fx, fy);
  if (!steps.reachable()) return std::nullopt;
  const double meters = steps.length_cells() * world.cell_size();
  return meters / (v * dt);
}

void OraclePlannerConfig::validate() const {
  if (curvatures.empty()) {
    throw std::invalid_argument("oracle planner needs at least one curvature");
  }
  if (horizon < 1) {
    throw std::invalid_argument("oracle planner horizon must be >= 1");
  }
  if (!(v > 0.0) || !(dt > 0.0) || !(walk_pitch > 0.0) || !(omega_max > 0.0)) {
    throw std::invalid_argument(
        "oracle planner v, dt, omega_max, walk_pitch must be positive");
  }
}

OraclePlanner::OraclePlanner(const WorldModel& world, OraclePlannerConfig config)
    : world_(world), config_(std::move(config)) {
  config_.validate();
}

namespace {

/// Constant-curvature arc position at arc length s, robot frame.
Vec2 arc_point(double curvature, double s) {
  if (curvature == 0.0) return Vec2(s, 0.0);
  return Vec2(std::sin(curvature * s) / curvature,
              (1.0 - std::cos(curvature * s)) / curvature);
}

Vec2 robot_to_world(const Vec2& r, const Pose2D& pose) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return Vec2(pose.x + c * r.x() - s * r.y(), pose.y + s * r.x() + c * r.y());
}

}  // namespace

const GridDistanceField& OraclePlanner::field_for(int gx, int gy) const {
  const long key = static_cast<long>(gy) * world_.cols() + gx;
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = field_cache_.find(key);
  if (it == field_cache_.end()) {
    it = field_cache_
             .emplace(key, std::make_unique<GridDistanceField>(
                               shortest_path_field(world_, gx, gy)))
             .first;
  }
  return *it->second;
}

std::vector<CandidatePath> OraclePlanner::plan_candidates(
    const ObservationContext& ctx, const Pose2D& pose) const {
  if (!ctx.goal.position.has_value()) {
    throw std::invalid_argument(
        "oracle planner needs a goal position in the observation context");
  }
  const Vec2 goal = *ctx.goal.position;
  const auto [gx, gy] = world_.cell_of(goal);
  const bool goal_ok = gx >= 0 && !world_.occupied(gx, gy);

  const double step_m = config_.v * config_.dt;
  const double max_len = step_m * config_.horizon;
  std::vector<CandidatePath> out;
  out.reserve(config_.curvatures.size());
  for (const double curvature : config_.curvatures) {
    // Walk the arc until the first blocked sample; keep the free prefix.
    double free_len = 0.0;
    const int n_samples =
        static_cast<int>(std::ceil(max_len / config_.walk_pitch));
    for (int i = 1; i <= n_samples; ++i) {
      const double s = std::min(i * config_.walk_pitch, max_len);
      if (!world_.is_free(robot_to_world(arc_point(curvature, s), pose))) {
        break;
      }
      free_len = s;
    }

    // The controller advances a full v * dt per step no matter how close
    // the first waypoint is, so a proposal is only trackable up to a whole
    // number of control steps. Trim to that; an arc without even one free
    // step cannot be followed safely and is marked unreachable (the
    // waypoints still point along the free prefix so a cornered robot
    // behaves deterministically).
    const double whole_len = std::floor(free_len / step_m) * step_m;
    bool trackable = whole_len >= step_m;

    CandidatePath path;
    path.waypoints.resize(config_.horizon, 2);
    for (int i = 0; i < config_.horizon; ++i) {
      const double s = trackable ? std::min(step_m * (i + 1), whole_len)
                                 : free_len * (i + 1) / config_.horizon;
      path.waypoints.row(i) = arc_point(curvature, s);
    }
    path.gps_offset = goal - pose.position();

    // The controller tracks the first waypoint with a clamped turn and a
    // straight advance, which is a chord of the arc, not the arc. Replay
    // that exact step so no proposal ever leads it off a verified path.
    if (trackable) {
      const Vec2 w0 = path.waypoints.row(0);
      const double bearing = std::atan2(w0.y(), w0.x());
      const double turn = std::clamp(bearing, -config_.omega_max * config_.dt,
                                     config_.omega_max * config_.dt);
      const Vec2 landing{step_m * std::cos(turn), step_m * std::sin(turn)};
      trackable = world_.segment_free(pose.position(),
                                      robot_to_world(landing, pose));
    }

    path.temporal_distance = trackable ? kUnreachableSteps : kUntrackableSteps;
    if (goal_ok && trackable) {
      const Vec2 end_world = robot_to_world(
          arc_point(curvature, whole_len), pose);
      const auto [ex, ey] = world_.cell_of(end_world);
      if (ex >= 0 && !world_.occupied(ex, ey)) {
        const GridDistanceField& field = field_for(gx, gy);
        const GridSteps rest = field.at(ex, ey);
        if (rest.reachable()) {
          const double rest_cells =
              field_length_cells_at(field, world_, end_world, rest);
          path.temporal_distance =
              whole_len / step_m + rest_cells * world_.cell_size() / step_m;
        }
      }
    }
    path.validate(config_.v, config_.dt);
    out.push_back(std::move(path));
  }
  return out;
}

void StubPlannerConfig::validate() const {
  if (image_width < 1 || image_height < 1 || channels < 1) {
    throw std::invalid_argument("stub image dimensions must be positive");
  }
  if (candidates < 1 || horizon < 1 || latent_dim < 1 || context_past < 0) {
    throw std::invalid_argument("stub planner K, H, latent_dim must be >= 1");
  }
  if (!(v > 0.0) || !(dt > 0.0)) {
    throw std::invalid_argument("stub planner v and dt must be positive");
  }
  grid.validate();
}

CameraModel default_stub_camera(int image_w, int image_h) {
  CameraModel cam;
  cam.fx = 0.7 * image_w;
  cam.fy = 0.7 * image_w;
  cam.cx = (image_w - 1) / 2.0;
  cam.cy = (image_h - 1) / 2.0;
  // Optical axis along robot +x, image x along -y (left), image y along -z.
  cam.rotation << 0, 0, 1,
                 -1, 0, 0,
                  0, -1, 0;
  cam.translation = Vec3(0.0, 0.0, 1.2);
  return cam;
}

StubPlanner::StubPlanner(StubPlannerConfig config) : config_(std::move(config)) {
  config_.validate();
  camera_ = default_stub_camera(config_.image_width, config_.image_height);
  frustum_ = make_frustum(config_.image_width, config_.image_height, camera_,
                          config_.grid);
  const Eigen::Index flat = static_cast<Eigen::Index>(config_.grid.x_cells()) *
                            config_.grid.y_cells() * config_.channels;
  const Eigen::Index outputs = 2 * config_.horizon + 3;
  head_.resize(outputs, flat + config_.latent_dim);
  Rng rng(config_.seed);
  const double x_scale = 1.0 / std::sqrt(static_cast<double>(flat));
  const double z_scale = 1.0 / std::sqrt(static_cast<double>(config_.latent_dim));
  for (Eigen::Index r = 0; r < outputs; ++r) {
    for (Eigen::Index c = 0; c < head_.cols(); ++c) {
      head_(r, c) = rng.normal() * (c < flat ? x_scale : z_scale);
    }
  }
}

namespace {

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

const ImageFeatures& require_image(const Observation& obs,
                                   const StubPlannerConfig& cfg,
                                   const char* which) {
  if (!obs.image) {
    throw std::invalid_argument(std::string("stub planner needs a ") + which +
                                " image observation");
  }
  const ImageFeatures& img = *obs.image;
  if (img.width != cfg.image_width || img.height != cfg.image_height ||
      img.channels != cfg.channels) {
    throw std::invalid_argument(
        std::string(which) + " image is " + std::to_string(img.width) + "x" +
        std::to_string(img.height) + "x" + std::to_string(img.channels) +
        ", planner expects " + std::to_string(cfg.image_width) + "x" +
        std::to_string(cfg.image_height) + "x" + std::to_string(cfg.channels));
  }
  return img;
}

}  // namespace

std::vector<CandidatePath> StubPlanner::plan_candidates(
    const ObservationContext& ctx, const Pose2D& pose) const {
  (void)pose;  // candidates are expressed in the robot frame
  validate_context(ctx, config_.context_past);
  const ImageFeatures& image = require_image(ctx.current, config_, "current");

  Rng rng(config_.seed ^ 0x5bf0f5e2d1c3a947ull);

  // Depth head stand-in: random per-pixel logits, fixed by the seed.
  const size_t n_logits = static_cast<size_t>(config_.image_height) *
                          config_.image_width * config_.grid.depth_bins();
  std::vector<double> logits(n_logits);
  for (double& l : logits) l = rng.normal();
  const DepthDistribution depth = DepthDistribution::from_logits(
      config_.image_height, config_.image_width, config_.grid.depth_bins(),
      logits);

  const LiftedFeatures lifted = lift(image, depth);
  const FeaturePointCloud cloud =
      build_point_cloud(frustum_, lifted, config_.grid);
  const BevFeatureMap pooled = pool_interval(cloud, config_.grid);
  const Eigen::Map<const Eigen::VectorXd> x(pooled.data.data(),
                                            pooled.data.size());

  // Goal conditioning: a goal image defines the latent mean (navigation);
  // without one the latent is drawn from the prior (exploration).
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(config_.latent_dim);
  Eigen::VectorXd logvar = Eigen::VectorXd::Zero(config_.latent_dim);
  if (ctx.goal.image) {
    const ImageFeatures& goal_img = require_image(ctx.goal, config_, "goal");
    Eigen::VectorXd channel_mean = Eigen::VectorXd::Zero(config_.channels);
    const size_t px_count =
        static_cast<size_t>(goal_img.height) * goal_img.width;
    for (size_t p = 0; p < px_count; ++p) {
      for (int c = 0; c < config_.channels; ++c) {
        channel_mean[c] += goal_img.data[p * config_.channels + c];
      }
    }
    channel_mean /= static_cast<double>(px_count);
    for (int i = 0; i < config_.latent_dim; ++i) {
      mu[i] = channel_mean[i % config_.channels];
    }
    logvar.setConstant(-2.0);
  }

  const Eigen::Index flat = head_.cols() - config_.latent_dim;
  const Eigen::VectorXd y_img = head_.leftCols(flat) * x;

  const double step_m = config_.v * config_.dt;
  const double component_scale = 0.99 * step_m / std::sqrt(2.0);
  std::vector<CandidatePath> out;
  out.reserve(config_.candidates);
  for (int k = 0; k < config_.candidates; ++k) {
    const LatentGoal latent = LatentGoal::draw(mu, logvar, rng);
    const Eigen::VectorXd y =
        y_img + head_.rightCols(config_.latent_dim) * latent.sample;

    CandidatePath path;
    path.waypoints.resize(config_.horizon, 2);
    Vec2 cursor = Vec2::Zero();
    for (int i = 0; i < config_.horizon; ++i) {
      cursor.x() += component_scale * std::tanh(y[2 * i]);
      cursor.y() += component_scale * std::tanh(y[2 * i + 1]);
      path.waypoints.row(i) = cursor;
    }
    path.temporal_distance = softplus(y[2 * config_.horizon]);
    path.gps_offset = Vec2(y[2 * config_.horizon + 1], y[2 * config_.horizon + 2]);
    path.validate(config_.v, config_.dt);
    out.push_back(std::move(path));
  }
  return out;
}

}  // namespace dualbev
