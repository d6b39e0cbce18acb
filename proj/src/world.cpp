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

#include "dualbev/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dualbev/rng.hpp"

namespace dualbev {

WorldKind parse_world_kind(std::string_view name) {
  if (name == "empty") return WorldKind::kEmpty;
  if (name == "corridor") return WorldKind::kCorridor;
  if (name == "scatter") return WorldKind::kScatter;
  if (name == "rooms") return WorldKind::kRooms;
  throw std::invalid_argument("unknown world kind '" + std::string(name) +
                              "' (expected empty|corridor|scatter|rooms)");
}

const char* world_kind_name(WorldKind kind) {
  switch (kind) {
    case WorldKind::kEmpty: return "empty";
    case WorldKind::kCorridor: return "corridor";
    case WorldKind::kScatter: return "scatter";
    case WorldKind::kRooms: return "rooms";
  }
  return "?";
}

WorldModel::WorldModel(int cols, int rows, double cell_size)
    : cols_(cols), rows_(rows), cell_size_(cell_size) {
  if (cols < 10 || rows < 10) {
    throw std::invalid_argument("world dims must be at least 10x10 cells, got " +
                                std::to_string(cols) + "x" +
                                std::to_string(rows));
  }
  if (!(cell_size > 0.0)) {
    throw std::invalid_argument("world cell size must be positive, got " +
                                std::to_string(cell_size));
  }
  occupied_.assign(static_cast<size_t>(cols) * rows, 0);
  rebuild_overhead(0);
}

void WorldModel::set_occupied(int cx, int cy, bool value) {
  if (!in_bounds(cx, cy)) {
    throw std::invalid_argument("set_occupied outside the grid: (" +
                                std::to_string(cx) + ", " + std::to_string(cy) +
                                ")");
  }
  occupied_[index(cx, cy)] = value ? 1 : 0;
}

int WorldModel::obstacle_count() const {
  int n = 0;
  for (uint8_t v : occupied_) n += v;
  return n;
}

std::pair<int, int> WorldModel::cell_of(const Vec2& world) const {
  const int cx = static_cast<int>(std::floor(world.x() / cell_size_));
  const int cy = static_cast<int>(std::floor(world.y() / cell_size_));
  if (!in_bounds(cx, cy)) return {-1, -1};
  return {cx, cy};
}

bool WorldModel::is_free(const Vec2& world) const {
  const auto [cx, cy] = cell_of(world);
  if (cx < 0) return false;
  return !occupied_[index(cx, cy)];
}

bool WorldModel::segment_free(const Vec2& a, const Vec2& b) const {
  const double len = (b - a).norm();
  const int samples =
      std::max(1, static_cast<int>(std::ceil(len / (cell_size_ / 4.0))));
  for (int i = 0; i <= samples; ++i) {
    const Vec2 p = a + (b - a) * (static_cast<double>(i) / samples);
    if (!is_free(p)) return false;
  }
  return true;
}

Raster WorldModel::occupancy_raster() const {
  GeoRef geo{0.5 * cell_size_, 0.5 * cell_size_, cell_size_};
  Raster out(cols_, rows_, geo, 0.0);
  for (int cy = 0; cy < rows_; ++cy) {
    for (int cx = 0; cx < cols_; ++cx) {
      out.at(cx, cy) = occupied_[index(cx, cy)] ? 1.0 : 0.0;
    }
  }
  return out;
}

void WorldModel::rebuild_overhead(uint64_t seed) {
  GeoRef geo{0.5 * cell_size_, 0.5 * cell_size_, cell_size_};
  overhead_ = Raster(cols_, rows_, geo, 0.0);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  for (int cy = 0; cy < rows_; ++cy) {
    for (int cx = 0; cx < cols_; ++cx) {
      const double noise = rng.uniform(-0.04, 0.04);
      overhead_.at(cx, cy) =
          (occupied_[index(cx, cy)] ? 0.78 : 0.22) + noise;
    }
  }
}

void WorldModel::save_pgm(const std::filesystem::path& path) const {
  write_pgm(occupancy_raster(), path);
}

WorldModel WorldModel::load_pgm(const std::filesystem::path& path) {
  const Raster raster = read_pgm(path);
  WorldModel world(raster.width(), raster.height(),
                   raster.geo().meters_per_pixel);
  for (int cy = 0; cy < world.rows(); ++cy) {
    for (int cx = 0; cx < world.cols(); ++cx) {
      world.occupied_[world.index(cx, cy)] = raster.at(cx, cy) > 0.5 ? 1 : 0;
    }
  }
  world.rebuild_overhead(0);
  return world;
}

namespace {

void add_border(WorldModel& w) {
  for (int cx = 0; cx < w.cols(); ++cx) {
    w.set_occupied(cx, 0, true);
    w.set_occupied(cx, w.rows() - 1, true);
  }
  for (int cy = 0; cy < w.rows(); ++cy) {
    w.set_occupied(0, cy, true);
    w.set_occupied(w.cols() - 1, cy, true);
  }
}

void gen_corridor(WorldModel& w) {
  add_border(w);
  // Serpentine: horizontal walls every 6 rows, alternating gap side.
  const int gap = std::max(2, w.cols() / 8);
  int wall_i = 0;
  for (int cy = 6; cy < w.rows() - 2; cy += 6, ++wall_i) {
    const bool gap_left = (wall_i % 2 == 0);
    for (int cx = 1; cx < w.cols() - 1; ++cx) {
      const bool in_gap =
          gap_left ? cx < 1 + gap : cx >= w.cols() - 1 - gap;
      if (!in_gap) w.set_occupied(cx, cy, true);
    }
  }
}

void gen_scatter(WorldModel& w, Rng& rng) {
  add_border(w);
  // Square blobs covering roughly 12% of the interior.
  const int interior = (w.cols() - 2) * (w.rows() - 2);
  const int n_blobs = std::max(1, interior / 28);
  for (int b = 0; b < n_blobs; ++b) {
    const int size = rng.uniform_int(1, 2);
    const int cx0 = rng.uniform_int(2, w.cols() - 3 - size);
    const int cy0 = rng.uniform_int(2, w.rows() - 3 - size);
    for (int dy = 0; dy < size; ++dy) {
      for (int dx = 0; dx < size; ++dx) {
        w.set_occupied(cx0 + dx, cy0 + dy, true);
      }
    }
  }
}

void gen_rooms(WorldModel& w, Rng& rng) {
  add_border(w);
  const int room = std::max(8, std::min(w.cols(), w.rows()) / 3);
  const int door = 2;
  for (int cy = room; cy < w.rows() - 2; cy += room) {
    for (int cx = 1; cx < w.cols() - 1; ++cx) w.set_occupied(cx, cy, true);
  }
  for (int cx = room; cx < w.cols() - 2; cx += room) {
    for (int cy = 1; cy < w.rows() - 1; ++cy) w.set_occupied(cx, cy, true);
  }
  // Cut one door per wall run between crossings.
  for (int cy = room; cy < w.rows() - 2; cy += room) {
    for (int cx0 = 1; cx0 < w.cols() - 1; cx0 += room) {
      const int cx1 = std::min(cx0 + room - 1, w.cols() - 2);
      if (cx1 - cx0 < door + 1) continue;
      const int at = rng.uniform_int(cx0 + 1, cx1 - door);
      for (int d = 0; d < door; ++d) w.set_occupied(at + d, cy, false);
    }
  }
  for (int cx = room; cx < w.cols() - 2; cx += room) {
    for (int cy0 = 1; cy0 < w.rows() - 1; cy0 += room) {
      const int cy1 = std::min(cy0 + room - 1, w.rows() - 2);
      if (cy1 - cy0 < door + 1) continue;
      const int at = rng.uniform_int(cy0 + 1, cy1 - door);
      for (int d = 0; d < door; ++d) w.set_occupied(cx, at + d, false);
    }
  }
}

}  // namespace

WorldModel gen_world(WorldKind kind, uint64_t seed, int cols, int rows,
                     double cell_size) {
  WorldModel world(cols, rows, cell_size);
  Rng rng(seed);
  switch (kind) {
    case WorldKind::kEmpty:
      break;
    case WorldKind::kCorridor:
      gen_corridor(world);
      break;
    case WorldKind::kScatter:
      gen_scatter(world, rng);
      break;
    case WorldKind::kRooms:
      gen_rooms(world, rng);
      break;
  }
  world.rebuild_overhead(seed);
  return world;
}

}  // namespace dualbev
