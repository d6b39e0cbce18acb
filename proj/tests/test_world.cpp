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

#include <filesystem>

#include "doctest.h"
#include "dualbev/world.hpp"

using namespace dualbev;
namespace fs = std::filesystem;

TEST_SUITE("world") {

TEST_CASE("kind names round trip") {
  for (WorldKind k : {WorldKind::kEmpty, WorldKind::kCorridor,
                      WorldKind::kScatter, WorldKind::kRooms}) {
    CHECK(parse_world_kind(world_kind_name(k)) == k);
  }
  CHECK_THROWS_AS(parse_world_kind("labyrinth"), std::invalid_argument);
}

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(WorldModel(9, 20, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(WorldModel(20, 9, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(WorldModel(20, 20, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gen_world(WorldKind::kEmpty, 0, 8, 8), std::invalid_argument);
}

TEST_CASE("cell geometry and bounds behavior") {
  WorldModel w(12, 10, 0.5);
  CHECK(w.width_m() == doctest::Approx(6.0));
  CHECK(w.height_m() == doctest::Approx(5.0));
  CHECK(w.cell_of(Vec2(0.0, 0.0)) == std::pair<int, int>(0, 0));
  CHECK(w.cell_of(Vec2(0.49, 0.49)) == std::pair<int, int>(0, 0));
  CHECK(w.cell_of(Vec2(0.5, 0.0)) == std::pair<int, int>(1, 0));
  CHECK(w.cell_of(Vec2(5.99, 4.99)) == std::pair<int, int>(11, 9));
  CHECK(w.cell_of(Vec2(6.0, 0.0)) == std::pair<int, int>(-1, -1));
  CHECK(w.cell_of(Vec2(-0.001, 0.0)) == std::pair<int, int>(-1, -1));
  CHECK(w.cell_center_world(0, 0) == Vec2(0.25, 0.25));

  // Outside the grid counts as occupied.
  CHECK(w.occupied(-1, 0));
  CHECK(w.occupied(0, 10));
  CHECK_FALSE(w.is_free(Vec2(-1.0, -1.0)));
  CHECK(w.is_free(Vec2(1.0, 1.0)));
}

TEST_CASE("empty worlds have no obstacles, others do") {
  const WorldModel empty = gen_world(WorldKind::kEmpty, 1, 24, 24);
  CHECK(empty.obstacle_count() == 0);
  for (WorldKind k :
       {WorldKind::kCorridor, WorldKind::kScatter, WorldKind::kRooms}) {
    const WorldModel w = gen_world(k, 1, 24, 24);
    CHECK(w.obstacle_count() > 0);
    // Border is sealed for the walled kinds.
    if (k != WorldKind::kCorridor) {
      for (int c = 0; c < w.cols(); ++c) {
        CHECK(w.occupied(c, 0));
        CHECK(w.occupied(c, w.rows() - 1));
      }
    }
  }
}

TEST_CASE("generation is deterministic in the seed") {
  const WorldModel a = gen_world(WorldKind::kScatter, 42, 30, 20);
  const WorldModel b = gen_world(WorldKind::kScatter, 42, 30, 20);
  const WorldModel c = gen_world(WorldKind::kScatter, 43, 30, 20);
  REQUIRE(a.cols() == b.cols());
  int diff_ab = 0, diff_ac = 0;
  for (int cy = 0; cy < a.rows(); ++cy) {
    for (int cx = 0; cx < a.cols(); ++cx) {
      diff_ab += a.occupied(cx, cy) != b.occupied(cx, cy) ? 1 : 0;
      diff_ac += a.occupied(cx, cy) != c.occupied(cx, cy) ? 1 : 0;
    }
  }
  CHECK(diff_ab == 0);
  CHECK(diff_ac > 0);
}

TEST_CASE("segment sweep catches obstacles between free endpoints") {
  WorldModel w(16, 16, 0.5);
  w.set_occupied(5, 5, true);  // covers [2.5, 3.0) x [2.5, 3.0)
  const Vec2 a(2.2, 2.75), b(3.2, 2.75);
  CHECK(w.is_free(a));
  CHECK(w.is_free(b));
  CHECK_FALSE(w.segment_free(a, b));
  // A parallel segment one row below passes.
  CHECK(w.segment_free(Vec2(2.2, 2.25), Vec2(3.2, 2.25)));
  // Endpoints themselves are checked.
  CHECK_FALSE(w.segment_free(Vec2(2.75, 2.75), Vec2(3.5, 3.5)));
  // Degenerate segment reduces to a point check.
  CHECK(w.segment_free(Vec2(1.0, 1.0), Vec2(1.0, 1.0)));
}

TEST_CASE("occupancy raster mirrors the grid") {
  WorldModel w(12, 10, 0.5);
  w.set_occupied(3, 7, true);
  const Raster r = w.occupancy_raster();
  CHECK(r.width() == 12);
  CHECK(r.height() == 10);
  CHECK(r.geo().meters_per_pixel == 0.5);
  CHECK(r.at(3, 7) == 1.0);
  CHECK(r.at(0, 0) == 0.0);
  // Pixel (0,0) center sits at the center of cell (0,0).
  CHECK(r.pixel_to_world(0, 0) == w.cell_center_world(0, 0));
}

TEST_CASE("overhead view separates ground from obstacles") {
  const WorldModel w = gen_world(WorldKind::kScatter, 7, 24, 24);
  const Raster& view = w.overhead_view();
  REQUIRE(view.width() == 24);
  for (int cy = 0; cy < 24; ++cy) {
    for (int cx = 0; cx < 24; ++cx) {
      const double v = view.at(cx, cy);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (w.occupied(cx, cy)) {
        CHECK(v > 0.5);
      } else {
        CHECK(v < 0.5);
      }
    }
  }
}

TEST_CASE("pgm save and load round trips the occupancy") {
  fs::path dir = fs::temp_directory_path() /
                 ("dualbev_world_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path file = dir / "world.pgm";
  const WorldModel w = gen_world(WorldKind::kRooms, 3, 20, 14);
  w.save_pgm(file);
  const WorldModel back = WorldModel::load_pgm(file);
  REQUIRE(back.cols() == 20);
  REQUIRE(back.rows() == 14);
  CHECK(back.cell_size() == doctest::Approx(w.cell_size()).epsilon(1e-12));
  for (int cy = 0; cy < 14; ++cy) {
    for (int cx = 0; cx < 20; ++cx) {
      CHECK(back.occupied(cx, cy) == w.occupied(cx, cy));
    }
  }
  fs::remove_all(dir);
}

}
