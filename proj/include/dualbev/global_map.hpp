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

#ifndef DUALBEV_GLOBAL_MAP_HPP
#define DUALBEV_GLOBAL_MAP_HPP

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "dualbev/raster.hpp"

namespace dualbev {

/// A recorded drive: world positions, optionally timestamped.
struct TrajectoryLog {
  std::vector<Vec2> points;
  std::vector<double> timestamps;  ///< empty, or one per point

  /// Throws std::invalid_argument on non-finite points, a timestamp count
  /// mismatch, or non-monotone timestamps.
  void validate() const;
};

/// Parse a CSV with header "t,x,y". Throws std::runtime_error on a missing
/// file, bad header, or malformed rows.
TrajectoryLog read_trajectory_csv(const std::filesystem::path& path);

/// Write the "t,x,y" CSV form (t written as the row index when the log has
/// no timestamps).
void write_trajectory_csv(const TrajectoryLog& log,
                          const std::filesystem::path& path);

/// Raster extent used when burning trajectories.
struct RasterSpec {
  int width = 0;
  int height = 0;
  GeoRef geo;
};

/// Burn trajectories into a binary raster: a pixel is 1 when its center lies
/// within stroke_radius meters of any trajectory segment (capsule stroke;
/// an isolated point burns a disc). Throws std::invalid_argument on an
/// invalid spec or stroke_radius <= 0.
Raster rasterize_trajectories(const std::vector<TrajectoryLog>& logs,
                              const RasterSpec& spec,
                              double stroke_radius = 0.5);

/// Exact Euclidean distance (meters) from every pixel center to the nearest
/// nonzero pixel center, via the separable lower-envelope transform on
/// squared distances. Throws std::invalid_argument when the mask has no
/// nonzero pixel.
Raster distance_transform(const Raster& mask);

/// Traversability-cost hint from an obstacle mask: cost = exp(-d / sigma)
/// where d is the distance to the nearest obstacle. Obstacle pixels cost 1.
/// Throws std::invalid_argument on sigma <= 0 or an all-zero mask.
ProbabilityMap synth_hint_map(const Raster& obstacle_mask, double sigma);

/// Mean map cost along a world-space polyline, sampled uniformly by arc
/// length at S = max(2, ceil(length / sample_pitch)) points. Out-of-map
/// samples read as 1. Throws std::invalid_argument on fewer than 2 vertices.
double score_path(const ProbabilityMap& map, std::span<const Vec2> path,
                  double sample_pitch = 0.5);

struct FitOptions {
  double alpha = 0.25;      ///< focal loss class weight
  double gamma = 2.0;       ///< focal loss focusing exponent
  double learning_rate = 2.0;
  int epochs = 150;
  double plateau_tol = 1e-7;  ///< stop when the loss improves less than this
  int plateau_patience = 5;   ///< ... for this many consecutive epochs
};

struct FitResult {
  ProbabilityMap map;              ///< cost = 1 - predicted traversability
  std::vector<double> loss_curve;  ///< focal loss after each epoch
  Eigen::Vector4d weights;         ///< logistic weights over the features
};

/// Fit a tiny per-pixel logistic model of traversability from driven-area
/// masks over an overhead intensity raster. Features per pixel: bias, the
/// intensity, its square, and the 3x3 box mean. Trained full batch with
/// gradient descent on the focal loss; labels are the union of the masks.
/// Throws std::invalid_argument when masks and overhead disagree on size or
/// georeferencing, when no mask pixel is set, or when every pixel is set.
FitResult fit_tiny_gbpm(const std::vector<Raster>& masks,
                        const Raster& overhead, const FitOptions& options = {});

}  // namespace dualbev

#endif  // DUALBEV_GLOBAL_MAP_HPP
