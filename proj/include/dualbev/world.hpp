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

#ifndef DUALBEV_WORLD_HPP
#define DUALBEV_WORLD_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dualbev/raster.hpp"

namespace dualbev {

enum class WorldKind { kEmpty, kCorridor, kScatter, kRooms };

WorldKind parse_world_kind(std::string_view name);
const char* world_kind_name(WorldKind kind);

/// Axis-aligned occupancy world. Cell (cx, cy) covers the square
/// [cx*s, (cx+1)*s) x [cy*s, (cy+1)*s) with s = cell_size; the world corner
/// is at the origin. Everything outside the grid is treated as occupied.
class WorldModel {
 public:
  WorldModel() = default;
  /// Throws std::invalid_argument on dims < 10x10 or cell_size <= 0.
  WorldModel(int cols, int rows, double cell_size);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  double cell_size() const { return cell_size_; }
  double width_m() const { return cols_ * cell_size_; }
  double height_m() const { return rows_ * cell_size_; }

  bool in_bounds(int cx, int cy) const {
    return cx >= 0 && cx < cols_ && cy >= 0 && cy < rows_;
  }
  bool occupied(int cx, int cy) const {
    return !in_bounds(cx, cy) || occupied_[index(cx, cy)];
  }
  void set_occupied(int cx, int cy, bool value);
  int obstacle_count() const;

  /// Cell containing a world point; {-1, -1} when outside.
  std::pair<int, int> cell_of(const Vec2& world) const;
  Vec2 cell_center_world(int cx, int cy) const {
    return Vec2((cx + 0.5) * cell_size_, (cy + 0.5) * cell_size_);
  }

  bool is_free(const Vec2& world) const;
  /// Swept check: every sample along [a, b] at a pitch of cell_size/4
  /// (endpoints included) must be free.
  bool segment_free(const Vec2& a, const Vec2& b) const;

  /// 0/1 obstacle raster; pixel (i, j) is cell (i, j), georeferenced at
  /// cell centers with meters_per_pixel = cell_size.
  Raster occupancy_raster() const;
  /// Synthetic top-down intensity image over the same georeferencing
  /// (dark driveable ground, bright obstacles).
  const Raster& overhead_view() const { return overhead_; }

  /// Serialize the occupancy grid as a PGM (occupied = 1.0) + sidecar.
  void save_pgm(const std::filesystem::path& path) const;
  /// Rebuild a world from a PGM written by save_pgm (threshold 0.5).
  /// Throws std::runtime_error on I/O problems via read_pgm.
  static WorldModel load_pgm(const std::filesystem::path& path);

  void rebuild_overhead(uint64_t seed);

 private:
  size_t index(int cx, int cy) const {
    return static_cast<size_t>(cy) * cols_ + cx;
  }

  int cols_ = 0;
  int rows_ = 0;
  double cell_size_ = 0.5;
  std::vector<uint8_t> occupied_;
  Raster overhead_;
};

/// Generate a world layout. Kinds:
///  - empty:    open ground, no obstacles
///  - corridor: serpentine walls forcing long detours
///  - scatter:  border walls plus random square blobs
///  - rooms:    border walls plus room partitions with door gaps
WorldModel gen_world(WorldKind kind, uint64_t seed, int cols, int rows,
                     double cell_size = 0.5);

}  // namespace dualbev

#endif  // DUALBEV_WORLD_HPP
