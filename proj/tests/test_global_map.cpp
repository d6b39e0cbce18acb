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

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "dualbev/global_map.hpp"
#include "dualbev/rng.hpp"
#include "oracles.hpp"

using namespace dualbev;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() /
                 ("dualbev_gmap_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

Raster random_mask(int w, int h, double density, Rng& rng) {
  Raster mask(w, h, GeoRef{0.0, 0.0, 0.5});
  bool any = false;
  for (double& v : mask.cells()) {
    v = rng.uniform() < density ? 1.0 : 0.0;
    any = any || v != 0.0;
  }
  if (!any) mask.at(w / 2, h / 2) = 1.0;
  return mask;
}

}  // namespace

TEST_SUITE("global_map") {

TEST_CASE("trajectory csv round trip") {
  TrajectoryLog log;
  log.points = {Vec2(0.0, 0.0), Vec2(1.25, -3.5), Vec2(2.0, 4.0)};
  log.timestamps = {0.0, 0.5, 1.0};
  const fs::path dir = temp_dir();
  const fs::path file = dir / "log.csv";
  write_trajectory_csv(log, file);
  const TrajectoryLog back = read_trajectory_csv(file);
  REQUIRE(back.points.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back.points[i].x() == doctest::Approx(log.points[i].x()).epsilon(1e-9));
    CHECK(back.points[i].y() == doctest::Approx(log.points[i].y()).epsilon(1e-9));
    CHECK(back.timestamps[i] == doctest::Approx(log.timestamps[i]).epsilon(1e-9));
  }
  fs::remove_all(dir);
}

TEST_CASE("trajectory csv rejects bad headers and malformed rows") {
  const fs::path dir = temp_dir();
  const fs::path bad_header = dir / "bad_header.csv";
  std::ofstream(bad_header) << "x,y,t\n0,0,0\n";
  CHECK_THROWS_AS(read_trajectory_csv(bad_header), std::runtime_error);

  const fs::path bad_row = dir / "bad_row.csv";
  std::ofstream(bad_row) << "t,x,y\n0,1.0\n";
  CHECK_THROWS_AS(read_trajectory_csv(bad_row), std::runtime_error);

  CHECK_THROWS_AS(read_trajectory_csv(dir / "missing.csv"), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("trajectory validation") {
  TrajectoryLog log;
  log.points = {Vec2(0, 0), Vec2(1, 1)};
  log.timestamps = {1.0};
  CHECK_THROWS_AS(log.validate(), std::invalid_argument);
  log.timestamps = {1.0, 0.5};
  CHECK_THROWS_AS(log.validate(), std::invalid_argument);
  log.timestamps = {0.5, 1.0};
  CHECK_NOTHROW(log.validate());
  log.points[0].x() = std::nan("");
  CHECK_THROWS_AS(log.validate(), std::invalid_argument);
}

TEST_CASE("stroke rasterization burns an exact capsule") {
  // Segment (1,1)-(4,1), radius 0.5, half-meter pixels: 9 pixels on the
  // center row, 7 on the rows at distance 0.5. Counted by hand.
  TrajectoryLog log;
  log.points = {Vec2(1.0, 1.0), Vec2(4.0, 1.0)};
  RasterSpec spec;
  spec.width = 12;
  spec.height = 6;
  spec.geo = GeoRef{0.0, 0.0, 0.5};
  const Raster burned = rasterize_trajectories({log}, spec, 0.5);
  int count = 0;
  for (double v : burned.cells()) {
    CHECK((v == 0.0 || v == 1.0));
    if (v == 1.0) ++count;
  }
  CHECK(count == 23);
}

TEST_CASE("an isolated point burns a disc") {
  TrajectoryLog log;
  log.points = {Vec2(2.0, 2.0)};
  RasterSpec spec;
  spec.width = 10;
  spec.height = 10;
  spec.geo = GeoRef{0.0, 0.0, 0.5};
  const Raster burned = rasterize_trajectories({log}, spec, 0.5);
  int count = 0;
  for (double v : burned.cells()) count += v == 1.0 ? 1 : 0;
  // Center plus the four axis neighbors at exactly 0.5 m.
  CHECK(count == 5);
  CHECK(burned.at(4, 4) == 1.0);
}

TEST_CASE("distance transform matches brute force on random masks") {
  Rng rng(20260402);
  for (int trial = 0; trial < 12; ++trial) {
    const int w = rng.uniform_int(4, 40);
    const int h = rng.uniform_int(4, 40);
    const Raster mask = random_mask(w, h, 0.08, rng);
    const Raster dt = distance_transform(mask);
    const std::vector<double> ref = oracles::brute_force_edt(mask);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        REQUIRE(std::abs(dt.at(x, y) - ref[static_cast<size_t>(y) * w + x]) <=
                1e-9);
      }
    }
  }
}

TEST_CASE("distance transform pins: sources are zero, 3-4-5 triangle") {
  Raster mask(8, 8, GeoRef{0.0, 0.0, 1.0});
  mask.at(1, 1) = 1.0;
  const Raster dt = distance_transform(mask);
  CHECK(dt.at(1, 1) == 0.0);
  CHECK(dt.at(4, 5) == doctest::Approx(5.0).epsilon(1e-12));  // dx=3, dy=4
  CHECK(dt.at(1, 3) == doctest::Approx(2.0).epsilon(1e-12));

  // Pixel distances scale with meters_per_pixel.
  Raster fine(8, 8, GeoRef{0.0, 0.0, 0.25});
  fine.at(1, 1) = 1.0;
  CHECK(distance_transform(fine).at(4, 5) == doctest::Approx(1.25).epsilon(1e-12));

  Raster empty(4, 4, GeoRef{});
  CHECK_THROWS_AS(distance_transform(empty), std::invalid_argument);
}

TEST_CASE("hint map is exp(-d/sigma) with obstacles at cost 1") {
  Raster mask(9, 9, GeoRef{0.0, 0.0, 1.0});
  mask.at(4, 4) = 1.0;
  const ProbabilityMap map = synth_hint_map(mask, 2.0);
  CHECK(map.raster().at(4, 4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(map.raster().at(6, 4) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(map.raster().at(4, 0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  // Monotone decay away from the obstacle along a row.
  for (int x = 5; x < 8; ++x) {
    CHECK(map.raster().at(x + 1, 4) < map.raster().at(x, 4));
  }
  CHECK_THROWS_AS(synth_hint_map(mask, 0.0), std::invalid_argument);
}

TEST_CASE("path scoring averages the map along the polyline") {
  Raster flat(20, 20, GeoRef{0.0, 0.0, 1.0}, 0.25);
  const ProbabilityMap map = ProbabilityMap::from_raster(flat);
  const std::vector<Vec2> path = {Vec2(2.0, 2.0), Vec2(10.0, 2.0),
                                  Vec2(10.0, 9.0)};
  CHECK(score_path(map, path) == doctest::Approx(0.25).epsilon(1e-12));

  // Wholly outside the hull: every sample reads 1.
  const std::vector<Vec2> outside = {Vec2(100.0, 100.0), Vec2(105.0, 100.0)};
  CHECK(score_path(map, outside) == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<Vec2> degenerate = {Vec2(1.0, 1.0)};
  CHECK_THROWS_AS(score_path(map, degenerate), std::invalid_argument);
}

TEST_CASE("a path through a high-cost band scores strictly higher") {
  Raster banded(30, 30, GeoRef{0.0, 0.0, 1.0}, 0.1);
  for (int y = 12; y <= 17; ++y) {
    for (int x = 0; x < 30; ++x) banded.at(x, y) = 0.9;
  }
  const ProbabilityMap map = ProbabilityMap::from_raster(banded);
  const std::vector<Vec2> through = {Vec2(5.0, 5.0), Vec2(5.0, 25.0)};
  const std::vector<Vec2> along = {Vec2(5.0, 5.0), Vec2(25.0, 5.0)};
  CHECK(score_path(map, through) > score_path(map, along) + 0.1);
}

TEST_CASE("tiny traversability fit separates road from rough ground") {
  // Overhead intensity: dark road band, bright elsewhere. The driven mask
  // covers part of the road, so intensity is a perfect discriminator.
  const int w = 40, h = 40;
  Raster overhead(w, h, GeoRef{0.0, 0.0, 0.5});
  Rng rng(11);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool road = y >= 14 && y < 26;
      overhead.at(x, y) = road ? rng.uniform(0.05, 0.15) : rng.uniform(0.7, 0.9);
    }
  }
  // Drives cover most of the road; what was never driven looks identical,
  // so the model can only win by reading the intensity features.
  Raster mask(w, h, GeoRef{0.0, 0.0, 0.5});
  for (int y = 14; y < 26; ++y) {
    for (int x = 1; x < 39; ++x) mask.at(x, y) = 1.0;
  }

  const FitResult fit = fit_tiny_gbpm({mask}, overhead);
  REQUIRE(fit.loss_curve.size() >= 10);
  CHECK(fit.loss_curve[9] < fit.loss_curve[0]);
  CHECK(fit.loss_curve.back() < fit.loss_curve[0]);

  int road_cheap = 0, road_total = 0;
  for (int y = 14; y < 26; ++y) {
    for (int x = 0; x < w; ++x) {
      ++road_total;
      if (fit.map.raster().at(x, y) < 0.5) ++road_cheap;
    }
  }
  CHECK(road_cheap >= (road_total * 9) / 10);

  // Rough ground should not read as cheap either.
  int rough_cheap = 0, rough_total = 0;
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < w; ++x) {
      ++rough_total;
      if (fit.map.raster().at(x, y) < 0.5) ++rough_cheap;
    }
  }
  CHECK(rough_cheap <= rough_total / 10);
}

TEST_CASE("fit edge cases") {
  Raster overhead(12, 12, GeoRef{0.0, 0.0, 0.5}, 0.5);
  Raster mask(12, 12, GeoRef{0.0, 0.0, 0.5});
  mask.at(3, 3) = 1.0;

  FitOptions zero_epochs;
  zero_epochs.epochs = 0;
  const FitResult fit = fit_tiny_gbpm({mask}, overhead, zero_epochs);
  CHECK(fit.loss_curve.empty());
  // Zero weights: sigmoid(0) = 0.5 everywhere, cost 0.5.
  CHECK(fit.map.raster().at(6, 6) == doctest::Approx(0.5).epsilon(1e-12));

  Raster empty_mask(12, 12, GeoRef{0.0, 0.0, 0.5});
  CHECK_THROWS_AS(fit_tiny_gbpm({empty_mask}, overhead, zero_epochs),
                  std::invalid_argument);
  Raster full_mask(12, 12, GeoRef{0.0, 0.0, 0.5}, 1.0);
  CHECK_THROWS_AS(fit_tiny_gbpm({full_mask}, overhead, zero_epochs),
                  std::invalid_argument);
  Raster wrong_geo(12, 12, GeoRef{1.0, 0.0, 0.5});
  wrong_geo.at(3, 3) = 1.0;
  CHECK_THROWS_AS(fit_tiny_gbpm({wrong_geo}, overhead, zero_epochs),
                  std::invalid_argument);
}

TEST_CASE("pgm round trip preserves quantized values and georeferencing") {
  const fs::path dir = temp_dir();
  const fs::path file = dir / "map.pgm";
  Raster r(7, 5, GeoRef{-3.5, 2.0, 0.25});
  Rng rng(3);
  for (double& v : r.cells()) v = rng.uniform();
  r.at(0, 0) = 0.5;  // rounds to byte 128
  write_pgm(r, file);
  CHECK(fs::exists(sidecar_path(file)));

  const Raster back = read_pgm(file);
  CHECK(back.width() == 7);
  CHECK(back.height() == 5);
  CHECK(back.geo() == r.geo());
  CHECK(back.at(0, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 7; ++x) {
      // Quantization moves a value by at most half a byte step.
      CHECK(std::abs(back.at(x, y) - r.at(x, y)) <= 0.5 / 255.0 + 1e-12);
      // Re-quantizing the restored value is the identity.
      CHECK(std::lround(back.at(x, y) * 255.0) ==
            std::lround(r.at(x, y) * 255.0));
    }
  }

  Raster bad(2, 2, GeoRef{}, 1.5);
  CHECK_THROWS_AS(write_pgm(bad, dir / "bad.pgm"), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("pgm reader reports what went wrong") {
  const fs::path dir = temp_dir();
  const fs::path not_pgm = dir / "not.pgm";
  std::ofstream(not_pgm) << "P6\n2 2\n255\nxxxx";
  CHECK_THROWS_WITH_AS(read_pgm(not_pgm),
                       doctest::Contains("expected P5"), std::runtime_error);

  const fs::path truncated = dir / "short.pgm";
  std::ofstream(truncated, std::ios::binary) << "P5\n4 4\n255\nab";
  CHECK_THROWS_AS(read_pgm(truncated), std::runtime_error);

  // A valid payload without its sidecar is unusable.
  const fs::path orphan = dir / "orphan.pgm";
  Raster tiny(2, 2, GeoRef{});
  write_pgm(tiny, orphan);
  fs::remove(sidecar_path(orphan));
  CHECK_THROWS_AS(read_pgm(orphan), std::runtime_error);
  fs::remove_all(dir);
}

}
