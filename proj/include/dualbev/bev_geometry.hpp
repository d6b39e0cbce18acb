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

#ifndef DUALBEV_BEV_GEOMETRY_HPP
#define DUALBEV_BEV_GEOMETRY_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "dualbev/types.hpp"

namespace dualbev {

/// Pinhole camera with a rigid camera-to-robot transform.
/// Camera frame: x right, y down, z forward (optical axis).
/// Robot frame: x forward, y left, z up.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  Mat3 rotation = Mat3::Identity();  ///< camera frame -> robot frame
  Vec3 translation = Vec3::Zero();   ///< camera origin in robot frame, meters

  /// Throws std::invalid_argument unless fx, fy > 0 and rotation is
  /// orthonormal with det +1 within 1e-9.
  void validate() const;

  /// Back-project pixel (u, v) at depth d (meters along the optical axis)
  /// into the robot frame.
  Vec3 unproject(double u, double v, double depth) const;
};

/// Discretization of the bird's-eye-view plane and the depth axis.
/// BEV cells are half-open: a point with x == x_max or y == y_max is
/// outside the grid. Depth bins are a closed lattice of bin centers
/// depth_min + j * depth_step, j = 0 .. depth_bins()-1.
struct BevGridSpec {
  double x_min = -5.0;
  double x_max = 20.0;
  double x_step = 0.25;
  double y_min = -10.0;
  double y_max = 10.0;
  double y_step = 0.2;
  double depth_min = 1.0;
  double depth_max = 20.0;
  double depth_step = 0.25;

  int x_cells() const;
  int y_cells() const;
  int depth_bins() const;
  double depth_at(int j) const { return depth_min + j * depth_step; }

  /// Throws std::invalid_argument on non-positive steps, inverted ranges,
  /// or ranges that are not an integer number of steps within 1e-9.
  void validate() const;
};

/// BEV cell index; OUT is encoded as {-1, -1}.
struct CellIndex {
  int x = -1;
  int y = -1;

  bool out() const { return x < 0; }
  bool operator==(const CellIndex&) const = default;
};

/// Map a robot-frame point onto the BEV grid (z is ignored).
CellIndex project_point(const Vec3& point, const BevGridSpec& grid);

/// World position of the center of cell (ix, iy), in the robot frame.
Vec2 cell_center(const CellIndex& cell, const BevGridSpec& grid);

/// Dense camera frustum lattice: one 3D point per (pixel, depth bin),
/// already expressed in the robot frame.
struct FrustumLattice {
  int height = 0;
  int width = 0;
  int bins = 0;
  std::vector<Vec3> points;  ///< ((v * width) + u) * bins + j

  const Vec3& at(int v, int u, int j) const {
    return points[(static_cast<size_t>(v) * width + u) * bins + j];
  }
  size_t size() const { return points.size(); }
};

/// Build the frustum lattice for an image_w x image_h feature map.
/// Throws std::invalid_argument on non-positive image dimensions.
FrustumLattice make_frustum(int image_w, int image_h, const CameraModel& camera,
                            const BevGridSpec& grid);

/// Per-pixel feature map, channel-minor layout.
struct ImageFeatures {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;  ///< (v * width + u) * channels + c

  static ImageFeatures zeros(int height, int width, int channels);
  double at(int v, int u, int c) const {
    return data[(static_cast<size_t>(v) * width + u) * channels + c];
  }
  double& at(int v, int u, int c) {
    return data[(static_cast<size_t>(v) * width + u) * channels + c];
  }
};

/// Per-pixel categorical depth distribution (one weight per depth bin).
struct DepthDistribution {
  int height = 0;
  int width = 0;
  int bins = 0;
  std::vector<double> weights;  ///< (v * width + u) * bins + j

  /// Per-pixel softmax over logits; each pixel's weights sum to 1.
  static DepthDistribution from_logits(int height, int width, int bins,
                                       std::span<const double> logits);
  /// Adopt raw weights. Throws std::invalid_argument on negative entries
  /// or a size mismatch.
  static DepthDistribution from_weights(int height, int width, int bins,
                                        std::vector<double> weights);

  double at(int v, int u, int j) const {
    return weights[(static_cast<size_t>(v) * width + u) * bins + j];
  }
};

/// Features lifted onto the frustum: out[v,u,j,c] = depth[v,u,j] * img[v,u,c].
struct LiftedFeatures {
  int height = 0;
  int width = 0;
  int bins = 0;
  int channels = 0;
  std::vector<double> data;  ///< ((v * width + u) * bins + j) * channels + c

  double at(int v, int u, int j, int c) const {
    return data[((static_cast<size_t>(v) * width + u) * bins + j) * channels +
                c];
  }
};

/// Outer product of image features with the per-pixel depth distribution.
/// Throws std::invalid_argument when the two inputs disagree on image size.
LiftedFeatures lift(const ImageFeatures& image, const DepthDistribution& depth);

/// Map each 3D point to its BEV cell (or OUT).
std::vector<CellIndex> project_to_grid(std::span<const Vec3> points,
                                       const BevGridSpec& grid);

/// Flat feature cloud ready for BEV pooling: one entry per frustum point,
/// structure-of-arrays. OUT points are kept (cells[i].out() == true) and
/// skipped by the pooling stage.
struct FeaturePointCloud {
  int channels = 0;
  std::vector<CellIndex> cells;
  std::vector<double> features;  ///< point-major, size() * channels

  size_t size() const { return cells.size(); }
};

/// Pair lifted features with the grid cell of each frustum point.
/// Throws std::invalid_argument when lattice and features disagree on shape.
FeaturePointCloud build_point_cloud(const FrustumLattice& frustum,
                                    const LiftedFeatures& lifted,
                                    const BevGridSpec& grid);

}  // namespace dualbev

#endif  // DUALBEV_BEV_GEOMETRY_HPP
