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

#include "dualbev/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace dualbev {

TemporalPredictor oracle_predictor(double v, double dt) {
  return [v, dt](const WorldModel& world, const Vec2& from, const Vec2& to) {
    const auto steps = oracle_temporal_distance(world, from, to, v, dt);
    return steps.value_or(kUnreachableSteps);
  };
}

TemporalPredictor noisy_predictor(double noise_range, uint64_t seed, double v,
                                  double dt) {
  if (!(noise_range >= 0.0)) {
    throw std::invalid_argument("noise range must be non-negative");
  }
  auto rng = std::make_shared<Rng>(seed);
  return [noise_range, rng, v, dt](const WorldModel& world, const Vec2& from,
                                   const Vec2& to) {
    const auto steps = oracle_temporal_distance(world, from, to, v, dt);
    const double noise = rng->uniform(-noise_range, noise_range);
    return std::max(0.0, steps.value_or(kUnreachableSteps) + noise);
  };
}

TemporalPredictor constant_predictor(double steps) {
  return [steps](const WorldModel&, const Vec2&, const Vec2&) { return steps; };
}

namespace {

constexpr double kCloseThresholdSteps = 10.0;

Vec2 random_free_center(const WorldModel& world, Rng& rng, int max_attempts) {
  for (int i = 0; i < max_attempts; ++i) {
    const int cx = rng.uniform_int(0, world.cols() - 1);
    const int cy = rng.uniform_int(0, world.rows() - 1);
    if (!world.occupied(cx, cy)) return world.cell_center_world(cx, cy);
  }
  throw std::runtime_error("could not sample a free cell");
}

}  // namespace

MetricReport eval_temporal_metrics(const TemporalPredictor& predictor,
                                   const WorldModel& world, int n_pairs,
                                   uint64_t seed) {
  if (n_pairs < 1) {
    throw std::invalid_argument("temporal evaluation needs n_pairs >= 1");
  }
  Rng rng(seed);
  int close_correct = 0;
  std::array<int, 3> within{};
  for (int i = 0; i < n_pairs; ++i) {
    Vec2 from, to;
    double truth = 0.0;
    bool found = false;
    for (int attempt = 0; attempt < 5000; ++attempt) {
      from = random_free_center(world, rng, 5000);
      to = random_free_center(world, rng, 5000);
      const auto steps = oracle_temporal_distance(world, from, to);
      if (steps.has_value()) {
        truth = *steps;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::runtime_error("world admits no reachable evaluation pair");
    }
    const double pred = predictor(world, from, to);
    const bool truth_close = truth <= kCloseThresholdSteps;
    const bool pred_close = pred <= kCloseThresholdSteps;
    close_correct += (truth_close == pred_close) ? 1 : 0;
    const double err = std::abs(pred - truth);
    for (int t = 0; t < 3; ++t) {
      within[t] += (err <= static_cast<double>(t + 1)) ? 1 : 0;
    }
  }
  MetricReport report;
  report.pairs = n_pairs;
  report.far_close_accuracy = 100.0 * close_correct / n_pairs;
  for (int t = 0; t < 3; ++t) {
    report.dist_accuracy[t] = 100.0 * within[t] / n_pairs;
  }
  return report;
}

EpisodeSpec sample_reachable_pair(const WorldModel& world, Rng& rng,
                                  double min_dist, double max_dist,
                                  double goal_clearance, int max_attempts) {
  if (!(min_dist >= 0.0) || !(max_dist > min_dist)) {
    throw std::invalid_argument("sample distance band is empty");
  }
  // A start boxed in on all sides fails instantly no matter how good the
  // planner is; demand one free cell of maneuvering room around it.
  const auto has_elbow_room = [&world](const Vec2& p) {
    const auto [cx, cy] = world.cell_of(p);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (!world.in_bounds(cx + dx, cy + dy) ||
            world.occupied(cx + dx, cy + dy)) {
          return false;
        }
      }
    }
    return true;
  };
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const Vec2 start = random_free_center(world, rng, max_attempts);
    const Vec2 goal = random_free_center(world, rng, max_attempts);
    const double d = (goal - start).norm();
    if (d < min_dist || d >= max_dist || d < goal_clearance) continue;
    if (!has_elbow_room(start)) continue;
    if (!oracle_temporal_distance(world, start, goal).has_value()) continue;
    return EpisodeSpec{start, goal};
  }
  throw std::runtime_error(
      "could not sample a reachable start/goal pair in [" +
      std::to_string(min_dist) + ", " + std::to_string(max_dist) +
      ") m; the world may be too small for this level");
}

MetricReport eval_exploration(const ExplorationConfig& config,
                              const std::vector<WorldModel>& worlds,
                              int trials_per_level, uint64_t seed) {
  if (worlds.empty()) {
    throw std::invalid_argument("exploration evaluation needs at least one world");
  }
  if (trials_per_level < 1) {
    throw std::invalid_argument("exploration evaluation needs trials_per_level >= 1");
  }
  config.cycle.validate();

  // Hint maps and planners are built per world, lazily, off the RNG path.
  std::vector<ProbabilityMap> maps(worlds.size());
  std::vector<std::unique_ptr<OraclePlanner>> planners(worlds.size());
  auto ensure_world = [&](size_t w) {
    if (planners[w]) return;
    planners[w] = std::make_unique<OraclePlanner>(worlds[w], config.planner);
    if (config.use_hint_map && worlds[w].obstacle_count() > 0) {
      maps[w] = synth_hint_map(worlds[w].occupancy_raster(), config.sigma);
    } else {
      // No map arm (or nothing to map): a uniform zero-cost map.
      Raster zero(worlds[w].cols(), worlds[w].rows(),
                  worlds[w].occupancy_raster().geo(), 0.0);
      maps[w] = ProbabilityMap::from_raster(std::move(zero));
    }
  };

  constexpr double kLevelLo[3] = {0.0, 10.0, 20.0};
  constexpr double kLevelHi[3] = {10.0, 20.0, 1e9};

  Rng rng(seed);
  MetricReport report;
  report.trials_per_level = trials_per_level;
  double disp_sum = 0.0;
  int disp_count = 0;
  double vel_sum = 0.0;
  int vel_count = 0;
  for (int level = 0; level < 3; ++level) {
    double level_disp = 0.0;
    for (int trial = 0; trial < trials_per_level; ++trial) {
      const size_t w =
          (static_cast<size_t>(level) * trials_per_level + trial) %
          worlds.size();
      const EpisodeSpec spec = sample_reachable_pair(
          worlds[w], rng, kLevelLo[level], kLevelHi[level],
          config.cycle.goal_radius + 1.0);
      ensure_world(w);
      const Vec2 dir = spec.goal - spec.start;
      const Pose2D start{spec.start.x(), spec.start.y(),
                         std::atan2(dir.y(), dir.x())};
      const EpisodeResult episode = run_cycle(
          *planners[w], maps[w], worlds[w], start, spec.goal, config.cycle);
      if (episode.outcome == Outcome::kSuccess) {
        ++report.successes[level];
        level_disp += episode.displacement;
        disp_sum += episode.displacement;
        ++disp_count;
        if (episode.steps > 0) {
          vel_sum += episode.displacement /
                     (episode.steps * config.cycle.dt);
          ++vel_count;
        }
      }
    }
    report.mean_displacement[level] =
        report.successes[level] > 0 ? level_disp / report.successes[level]
                                    : 0.0;
  }
  report.avg_displacement = disp_count > 0 ? disp_sum / disp_count : 0.0;
  report.avg_velocity = vel_count > 0 ? vel_sum / vel_count : 0.0;
  return report;
}

std::string metric_report_to_json(const MetricReport& report,
                                  std::string_view suite) {
  std::ostringstream os;
  os.precision(10);
  os << "{\"suite\":\"" << suite << "\"";
  if (suite == "temporal") {
    os << ",\"pairs\":" << report.pairs
       << ",\"far_close_accuracy\":" << report.far_close_accuracy
       << ",\"dist_accuracy\":{\"1\":" << report.dist_accuracy[0]
       << ",\"2\":" << report.dist_accuracy[1]
       << ",\"3\":" << report.dist_accuracy[2] << "}";
  } else {
    os << ",\"trials_per_level\":" << report.trials_per_level
       << ",\"successes\":[" << report.successes[0] << ","
       << report.successes[1] << "," << report.successes[2] << "]"
       << ",\"mean_displacement\":[" << report.mean_displacement[0] << ","
       << report.mean_displacement[1] << "," << report.mean_displacement[2]
       << "]"
       << ",\"avg_displacement\":" << report.avg_displacement
       << ",\"avg_velocity\":" << report.avg_velocity;
  }
  os << "}";
  return os.str();
}

std::string format_temporal_table(
    std::span<const std::pair<std::string, MetricReport>> rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %16s %12s %12s %12s\n", "method",
                "far_or_close(%)", "err<=1(%)", "err<=2(%)", "err<=3(%)");
  os << line;
  for (const auto& [name, r] : rows) {
    std::snprintf(line, sizeof(line), "%-16s %16.2f %12.2f %12.2f %12.2f\n",
                  name.c_str(), r.far_close_accuracy, r.dist_accuracy[0],
                  r.dist_accuracy[1], r.dist_accuracy[2]);
    os << line;
  }
  return os.str();
}

std::string format_exploration_table(
    std::span<const std::pair<std::string, MetricReport>> rows) {
  std::ostringstream os;
  char line[200];
  std::snprintf(line, sizeof(line), "%-16s %12s %14s %12s %14s %14s\n",
                "method", "easy(<10m)", "medium(10-20m)", "hard(>20m)",
                "avg_disp(m)", "avg_vel(m/s)");
  os << line;
  for (const auto& [name, r] : rows) {
    char easy[24], medium[24], hard[24];
    std::snprintf(easy, sizeof(easy), "%d/%d", r.successes[0],
                  r.trials_per_level);
    std::snprintf(medium, sizeof(medium), "%d/%d", r.successes[1],
                  r.trials_per_level);
    std::snprintf(hard, sizeof(hard), "%d/%d", r.successes[2],
                  r.trials_per_level);
    std::snprintf(line, sizeof(line), "%-16s %12s %14s %12s %14.2f %14.2f\n",
                  name.c_str(), easy, medium, hard, r.avg_displacement,
                  r.avg_velocity);
    os << line;
  }
  return os.str();
}

}  // namespace dualbev
