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

#ifndef DUALBEV_RASTER_HPP
#define DUALBEV_RASTER_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dualbev/types.hpp"

namespace dualbev {

/// World placement of a raster: the CENTER of pixel (0, 0) sits at
/// (origin_x, origin_y) and pixel centers advance by meters_per_pixel
/// along +x (pixel x) and +y (pixel y).
struct GeoRef {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double meters_per_pixel = 1.0;

  bool operator==(const GeoRef&) const = default;
};

/// Row-major scalar raster with georeferencing.
class Raster {
 public:
  Raster() = default;
  /// Throws std::invalid_argument on non-positive dimensions or
  /// meters_per_pixel.
  Raster(int width, int height, GeoRef geo, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  const GeoRef& geo() const { return geo_; }

  double at(int x, int y) const { return cells_[index(x, y)]; }
  double& at(int x, int y) { return cells_[index(x, y)]; }
  std::span<const double> cells() const { return cells_; }
  std::span<double> cells() { return cells_; }

  Vec2 pixel_to_world(double px, double py) const {
    return Vec2(geo_.origin_x + px * geo_.meters_per_pixel,
                geo_.origin_y + py * geo_.meters_per_pixel);
  }
  Vec2 world_to_pixel(const Vec2& w) const {
    return Vec2((w.x() - geo_.origin_x) / geo_.meters_per_pixel,
                (w.y() - geo_.origin_y) / geo_.meters_per_pixel);
  }

  /// True when (px, py) lies inside the bilinear support, i.e. within
  /// [0, width-1] x [0, height-1] in pixel coordinates.
  bool in_hull(double px, double py) const {
    return px >= 0.0 && px <= width_ - 1 && py >= 0.0 && py <= height_ - 1;
  }

  /// Bilinear interpolation at fractional pixel coordinates; requires
  /// in_hull(px, py).
  double bilinear(double px, double py) const;

 private:
  size_t index(int x, int y) const {
    return static_cast<size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  GeoRef geo_;
  std::vector<double> cells_;
};

/// A raster constrained to [0, 1], sampled in world coordinates.
/// Samples outside the raster hull read as 1.0: unknown terrain is
/// treated as maximally costly.
class ProbabilityMap {
 public:
  ProbabilityMap() = default;
  /// Throws std::invalid_argument when any cell is outside [0, 1].
  static ProbabilityMap from_raster(Raster raster);

  const Raster& raster() const { return raster_; }
  double sample_world(const Vec2& world) const;

 private:
  Raster raster_;
};

/// Write as binary PGM (P5, maxval 255, byte = round(value * 255)) plus a
/// georeferencing sidecar next to it (see sidecar_path). Values must be in
/// [0, 1]; throws std::invalid_argument otherwise.
void write_pgm(const Raster& raster, const std::filesystem::path& path);

/// Read a P5 PGM written by write_pgm, restoring values as byte / 255 and
/// the georeferencing from the sidecar. Throws std::runtime_error on a bad
/// magic number, truncated payload, or missing/invalid sidecar.
Raster read_pgm(const std::filesystem::path& path);

/// foo.pgm -> foo.geo.json
std::filesystem::path sidecar_path(const std::filesystem::path& pgm_path);

/// Write an RGB byte image as binary PPM (P6). rgb holds width*height*3
/// bytes, row-major.
void write_ppm(const std::filesystem::path& path, int width, int height,
               std::span<const uint8_t> rgb);

}  // namespace dualbev

#endif  // DUALBEV_RASTER_HPP
