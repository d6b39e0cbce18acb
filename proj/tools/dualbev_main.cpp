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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dualbev/bev_pooling.hpp"
#include "dualbev/config.hpp"
#include "dualbev/simulator.hpp"

namespace {

using namespace dualbev;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCollision = 3;
constexpr int kExitTimeout = 4;

bool parse_dims(const std::string& text, int* w, int* h) {
  char extra = 0;
  return std::sscanf(text.c_str(), "%dx%d%c", w, h, &extra) == 2;
}

bool parse_xy(const std::string& text, double* x, double* y) {
  char extra = 0;
  return std::sscanf(text.c_str(), "%lf,%lf%c", x, y, &extra) == 2;
}

bool parse_pose(const std::string& text, double* x, double* y, double* theta,
                bool* has_theta) {
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", x, y, theta, &extra) == 3) {
    *has_theta = true;
    return true;
  }
  *has_theta = false;
  return parse_xy(text, x, y);
}

std::filesystem::path overhead_path(const std::filesystem::path& world_path) {
  std::filesystem::path p = world_path;
  p.replace_extension();
  p += "_overhead.pgm";
  return p;
}

// ---------------------------------------------------------------- gen-world

struct GenWorldArgs {
  std::string kind = "scatter";
  std::optional<uint64_t> seed;
  std::string dims = "64x64";
  double cell_size = 0.5;
  std::string out;
};

int cmd_gen_world(const GenWorldArgs& args) {
  int cols = 0, rows = 0;
  if (!parse_dims(args.dims, &cols, &rows)) {
    std::cerr << "error: --dims must look like 64x64, got '" << args.dims
              << "'\n";
    return kExitUsage;
  }
  if (cols < 10 || rows < 10) {
    std::cerr << "error: --dims must be at least 10x10 cells\n";
    return kExitUsage;
  }
  const uint64_t seed = resolve_seed(args.seed, std::nullopt);
  const WorldModel world =
      gen_world(parse_world_kind(args.kind), seed, cols, rows, args.cell_size);
  world.save_pgm(args.out);
  write_pgm(world.overhead_view(), overhead_path(args.out));
  std::cout << "{\"world\":\"" << args.out << "\",\"overhead\":\""
            << overhead_path(args.out).string() << "\",\"kind\":\""
            << args.kind << "\",\"seed\":" << seed << ",\"cols\":" << cols
            << ",\"rows\":" << rows
            << ",\"obstacles\":" << world.obstacle_count() << "}\n";
  return kExitOk;
}

// ----------------------------------------------------------------- make-map

struct MakeMapArgs {
  std::string world;
  std::string mode = "synth";
  double sigma = 2.0;
  std::vector<std::string> trajectories;
  std::string out;
};

int cmd_make_map(const MakeMapArgs& args) {
  const WorldModel world = WorldModel::load_pgm(args.world);
  if (args.mode == "synth") {
    const ProbabilityMap map =
        synth_hint_map(world.occupancy_raster(), args.sigma);
    write_pgm(map.raster(), args.out);
    std::cout << "{\"out\":\"" << args.out << "\",\"mode\":\"synth\",\"sigma\":"
              << args.sigma << "}\n";
    return kExitOk;
  }
  // fit
  if (args.trajectories.empty()) {
    std::cerr << "error: --mode fit needs at least one --trajectory CSV\n";
    return kExitUsage;
  }
  const Raster& overhead = world.overhead_view();
  RasterSpec spec{overhead.width(), overhead.height(), overhead.geo()};
  std::vector<Raster> masks;
  masks.reserve(args.trajectories.size());
  for (const std::string& path : args.trajectories) {
    masks.push_back(rasterize_trajectories({read_trajectory_csv(path)}, spec));
  }
  const FitResult fit = fit_tiny_gbpm(masks, overhead);
  for (size_t e = 0; e < fit.loss_curve.size(); ++e) {
    std::fprintf(stderr, "epoch %zu loss %.8f\n", e + 1, fit.loss_curve[e]);
  }
  write_pgm(fit.map.raster(), args.out);
  std::cout << "{\"out\":\"" << args.out << "\",\"mode\":\"fit\",\"epochs\":"
            << fit.loss_curve.size() << ",\"final_loss\":"
            << (fit.loss_curve.empty() ? 0.0 : fit.loss_curve.back()) << "}\n";
  return kExitOk;
}

// ---------------------------------------------------------------------- run

struct RunArgs {
  std::string world;
  std::string map;
  std::string config;
  std::string goal;
  std::string start;
  std::string out_prefix = "episode";
  bool render = false;
  std::optional<uint64_t> seed;
  std::optional<double> k, v, dt, goal_radius, omega_max, sigma, d_max;
  std::optional<int> K, H, P, step_budget;
};

RunConfig merge_config(const RunArgs& args, std::optional<uint64_t>* seed_out) {
  RunConfig cfg;
  std::optional<uint64_t> config_seed;
  if (!args.config.empty()) {
    cfg = RunConfig::from_json_file(args.config);
    config_seed = cfg.seed;
  }
  if (args.k) cfg.k = *args.k;
  if (args.v) cfg.v = *args.v;
  if (args.dt) cfg.dt = *args.dt;
  if (args.goal_radius) cfg.goal_radius = *args.goal_radius;
  if (args.omega_max) cfg.omega_max = *args.omega_max;
  if (args.sigma) cfg.sigma = *args.sigma;
  if (args.d_max) cfg.d_max = *args.d_max;
  if (args.step_budget) cfg.step_budget = *args.step_budget;
  if (args.H) cfg.H = *args.H;
  if (args.P) cfg.P = *args.P;
  if (args.K) {
    cfg.K = *args.K;
    cfg.curvatures = default_curvature_sweep(cfg.K);
  }
  cfg.seed = resolve_seed(args.seed, config_seed);
  *seed_out = cfg.seed;
  cfg.validate();
  return cfg;
}

Pose2D default_start(const WorldModel& world, const Vec2& goal) {
  for (int cy = 0; cy < world.rows(); ++cy) {
    for (int cx = 0; cx < world.cols(); ++cx) {
      if (!world.occupied(cx, cy)) {
        const Vec2 p = world.cell_center_world(cx, cy);
        const Vec2 dir = goal - p;
        return Pose2D{p.x(), p.y(), std::atan2(dir.y(), dir.x())};
      }
    }
  }
  throw std::runtime_error("world has no free cell to start from");
}

void render_episode(const WorldModel& world, const ProbabilityMap& map,
                    const EpisodeResult& episode, const Pose2D& start,
                    const Vec2& goal, const std::filesystem::path& path) {
  const Raster occ = world.occupancy_raster();
  const int w = occ.width();
  const int h = occ.height();
  std::vector<uint8_t> rgb(static_cast<size_t>(w) * h * 3);
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      uint8_t r, g, b;
      if (occ.at(px, py) != 0.0) {
        r = g = b = 30;
      } else {
        const double cost = map.sample_world(occ.pixel_to_world(px, py));
        r = g = b = static_cast<uint8_t>(255.0 * (1.0 - 0.8 * cost));
      }
      const size_t at = (static_cast<size_t>(py) * w + px) * 3;
      rgb[at] = r;
      rgb[at + 1] = g;
      rgb[at + 2] = b;
    }
  }
  auto paint = [&](const Vec2& world_pt, uint8_t r, uint8_t g, uint8_t b,
                   int radius) {
    const Vec2 px = occ.world_to_pixel(world_pt);
    const int cx = static_cast<int>(std::lround(px.x()));
    const int cy = static_cast<int>(std::lround(px.y()));
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        const int x = cx + dx, y = cy + dy;
        if (x < 0 || x >= w || y < 0 || y >= h) continue;
        const size_t at = (static_cast<size_t>(y) * w + x) * 3;
        rgb[at] = r;
        rgb[at + 1] = g;
        rgb[at + 2] = b;
      }
    }
  };
  for (const TrajectoryPoint& p : episode.trajectory) {
    paint(p.pose.position(), 200, 40, 40, 0);
  }
  paint(start.position(), 40, 60, 220, 1);
  paint(goal, 30, 170, 60, 1);
  write_ppm(path, w, h, rgb);
}

int cmd_run(const RunArgs& args) {
  double gx = 0.0, gy = 0.0;
  if (!parse_xy(args.goal, &gx, &gy)) {
    std::cerr << "error: --goal must look like x,y (meters), got '"
              << args.goal << "'\n";
    return kExitUsage;
  }
  Pose2D start_pose;
  bool have_start = false, have_theta = false;
  if (!args.start.empty()) {
    if (!parse_pose(args.start, &start_pose.x, &start_pose.y,
                    &start_pose.heading, &have_theta)) {
      std::cerr << "error: --start must look like x,y or x,y,theta, got '"
                << args.start << "'\n";
      return kExitUsage;
    }
    have_start = true;
  }

  std::optional<uint64_t> seed;
  const RunConfig cfg = merge_config(args, &seed);
  const WorldModel world = WorldModel::load_pgm(args.world);
  const Vec2 goal(gx, gy);

  ProbabilityMap map;
  if (!args.map.empty()) {
    map = ProbabilityMap::from_raster(read_pgm(args.map));
  } else {
    map = ProbabilityMap::from_raster(
        Raster(world.cols(), world.rows(), world.occupancy_raster().geo(), 0.0));
  }

  Pose2D start;
  if (have_start) {
    start = start_pose;
    if (!have_theta) {
      const Vec2 dir = goal - start.position();
      start.heading = std::atan2(dir.y(), dir.x());
    }
  } else {
    start = default_start(world, goal);
  }

  const OraclePlanner planner(world, cfg.planner());
  const EpisodeResult episode =
      run_cycle(planner, map, world, start, goal, cfg.cycle());

  const std::string prefix = args.out_prefix;
  write_episode_csv(episode, prefix + ".csv");
  {
    std::ofstream json_out(prefix + ".json");
    if (!json_out) {
      throw std::runtime_error("cannot open " + prefix + ".json for writing");
    }
    json_out << episode_to_json(episode, goal) << "\n";
  }
  if (args.render) {
    render_episode(world, map, episode, start, goal, prefix + ".ppm");
  }
  std::cout << episode_to_json(episode, goal) << "\n";
  switch (episode.outcome) {
    case Outcome::kSuccess: return kExitOk;
    case Outcome::kCollision: return kExitCollision;
    case Outcome::kTimeout: return kExitTimeout;
  }
  return kExitError;
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
  std::string suite;
  int trials = 0;  ///< 0 = suite default
  std::string kind = "scatter";
  std::string dims = "56x56";
  double cell_size = 0.5;
  int worlds = 5;
  std::optional<uint64_t> seed;
  std::string predictor = "oracle";
  double noise = 2.0;
  double constant = 10.0;
  double k = 0.5;
  double sigma = 2.0;
  std::string out;
};

int cmd_eval(const EvalArgs& args) {
  int cols = 0, rows = 0;
  if (!parse_dims(args.dims, &cols, &rows)) {
    std::cerr << "error: --dims must look like 56x56, got '" << args.dims
              << "'\n";
    return kExitUsage;
  }
  const uint64_t seed = resolve_seed(args.seed, std::nullopt);
  const WorldKind kind = parse_world_kind(args.kind);
  std::string json;

  if (args.suite == "temporal") {
    const int pairs = args.trials > 0 ? args.trials : 100;
    const WorldModel world = gen_world(kind, seed, cols, rows, args.cell_size);
    TemporalPredictor predictor;
    if (args.predictor == "oracle") {
      predictor = oracle_predictor();
    } else if (args.predictor == "noisy") {
      predictor = noisy_predictor(args.noise, seed ^ 0x7f4a7c15ull);
    } else {
      predictor = constant_predictor(args.constant);
    }
    const MetricReport report =
        eval_temporal_metrics(predictor, world, pairs, seed);
    const std::vector<std::pair<std::string, MetricReport>> rows_out = {
        {args.predictor, report}};
    std::cout << format_temporal_table(rows_out);
    json = metric_report_to_json(report, "temporal");
  } else {
    const int trials = args.trials > 0 ? args.trials : 5;
    std::vector<WorldModel> worlds;
    worlds.reserve(args.worlds);
    for (int i = 0; i < args.worlds; ++i) {
      worlds.push_back(
          gen_world(kind, seed + i, cols, rows, args.cell_size));
    }
    ExplorationConfig with_map;
    with_map.cycle.k = args.k;
    with_map.sigma = args.sigma;
    with_map.use_hint_map = true;
    ExplorationConfig without_map = with_map;
    without_map.use_hint_map = false;
    without_map.cycle.k = 0.0;
    const MetricReport a = eval_exploration(with_map, worlds, trials, seed);
    const MetricReport b = eval_exploration(without_map, worlds, trials, seed);
    const std::vector<std::pair<std::string, MetricReport>> rows_out = {
        {"with map", a}, {"without map", b}};
    std::cout << format_exploration_table(rows_out);
    json = "{\"with_map\":" + metric_report_to_json(a, "exploration") +
           ",\"without_map\":" + metric_report_to_json(b, "exploration") + "}";
  }

  std::cout << json << "\n";
  if (!args.out.empty()) {
    std::ofstream out(args.out);
    if (!out) {
      throw std::runtime_error("cannot open " + args.out + " for writing");
    }
    out << json << "\n";
  }
  return kExitOk;
}

// ------------------------------------------------------- benchmark-pooling

struct BenchArgs {
  int n = 100000;
  int channels = 8;
  std::optional<uint64_t> seed;
};

int cmd_bench(const BenchArgs& args) {
  const PoolingBenchReport report =
      bench_pooling(args.n, args.channels, resolve_seed(args.seed, std::nullopt));
  if (report.naive_checksum != report.interval_checksum) {
    std::cerr << "error: pooling paths disagree\n";
    return kExitError;
  }
  std::cout << report.to_json() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-layer BEV navigation toolkit"};
  app.require_subcommand(1);

  GenWorldArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-world", "generate a world occupancy PGM");
  gen->add_option("--kind", gen_args.kind, "world layout")
      ->check(CLI::IsMember({"empty", "corridor", "scatter", "rooms"}));
  gen->add_option("--seed", gen_args.seed, "random seed");
  gen->add_option("--dims", gen_args.dims, "grid cells, WxH (default 64x64)");
  gen->add_option("--cell-size", gen_args.cell_size, "meters per cell");
  gen->add_option("--out", gen_args.out, "output PGM path")->required();

  MakeMapArgs map_args;
  CLI::App* mkmap = app.add_subcommand("make-map", "build a traversability hint map");
  mkmap->add_option("--world", map_args.world, "world PGM")->required();
  mkmap->add_option("--mode", map_args.mode, "synth | fit")
      ->check(CLI::IsMember({"synth", "fit"}));
  mkmap->add_option("--sigma", map_args.sigma, "synth falloff, meters");
  mkmap->add_option("--trajectory", map_args.trajectories,
                    "trajectory CSV (repeatable, fit mode)");
  mkmap->add_option("--out", map_args.out, "output PGM path")->required();

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run one closed-loop episode");
  run->add_option("--world", run_args.world, "world PGM")->required();
  run->add_option("--map", run_args.map, "hint map PGM");
  run->add_option("--config", run_args.config, "JSON config file");
  run->add_option("--goal", run_args.goal, "goal position x,y")->required();
  run->add_option("--start", run_args.start, "start pose x,y[,theta]");
  run->add_option("--out-prefix", run_args.out_prefix,
                  "output prefix for .csv/.json/.ppm");
  run->add_flag("--render", run_args.render, "also write a PPM render");
  run->add_option("--seed", run_args.seed, "random seed");
  run->add_option("--k", run_args.k, "map weight in [0,1]");
  run->add_option("--v", run_args.v, "speed m/s");
  run->add_option("--dt", run_args.dt, "control period s");
  run->add_option("--goal-radius", run_args.goal_radius, "success radius m");
  run->add_option("--omega-max", run_args.omega_max, "turn rate limit rad/s");
  run->add_option("--sigma", run_args.sigma, "hint falloff m");
  run->add_option("--d-max", run_args.d_max, "distance normalizer, steps");
  run->add_option("--step-budget", run_args.step_budget, "max control steps");
  run->add_option("--K", run_args.K, "candidate count");
  run->add_option("--H", run_args.H, "waypoints per candidate");
  run->add_option("--P", run_args.P, "past observations");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "run an evaluation battery");
  eval->add_option("--suite", eval_args.suite, "temporal | exploration")
      ->required()
      ->check(CLI::IsMember({"temporal", "exploration"}));
  eval->add_option("--trials", eval_args.trials,
                   "pairs (temporal) or trials per level (exploration)");
  eval->add_option("--kind", eval_args.kind, "world layout")
      ->check(CLI::IsMember({"empty", "corridor", "scatter", "rooms"}));
  eval->add_option("--dims", eval_args.dims, "world cells, WxH");
  eval->add_option("--cell-size", eval_args.cell_size, "meters per cell");
  eval->add_option("--worlds", eval_args.worlds, "worlds in the battery")
      ->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_args.seed, "random seed");
  eval->add_option("--predictor", eval_args.predictor,
                   "temporal suite predictor")
      ->check(CLI::IsMember({"oracle", "noisy", "constant"}));
  eval->add_option("--noise", eval_args.noise, "noisy predictor range, steps");
  eval->add_option("--constant", eval_args.constant,
                   "constant predictor value, steps");
  eval->add_option("--k", eval_args.k, "map weight for the with-map arm");
  eval->add_option("--sigma", eval_args.sigma, "hint falloff m");
  eval->add_option("--out", eval_args.out, "also write the JSON report here");

  BenchArgs bench_args;
  CLI::App* bench =
      app.add_subcommand("benchmark-pooling", "compare the two pooling paths");
  bench->add_option("--n", bench_args.n, "point count")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--channels", bench_args.channels, "feature channels")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_args.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    std::cerr << "usage: see 'dualbev --help' or 'dualbev <command> --help'\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_world(gen_args);
    if (mkmap->parsed()) return cmd_make_map(map_args);
    if (run->parsed()) return cmd_run(run_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (bench->parsed()) return cmd_bench(bench_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
