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

#include "dualbev/bev_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace dualbev {

namespace {

/// Number of whole steps in [lo, hi); the range must be an integer
/// multiple of step within 1e-9 of a step.
int step_count(double lo, double hi, double step, const char* axis) {
  const double raw = (hi - lo) / step;
  const long long n = std::llround(raw);
  if (n < 1 || std::abs(raw - static_cast<double>(n)) > 1e-9) {
    throw std::invalid_argument(std::string("grid ") + axis + " range [" +
                                std::to_string(lo) + ", " + std::to_string(hi) +
                                ") is not a whole number of steps of " +
                                std::to_string(step));
  }
  return static_cast<int>(n);
}

}  // namespace

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw std::invalid_argument("camera focal lengths must be positive, got fx=" +
                                std::to_string(fx) + " fy=" + std::to_string(fy));
  }
  if (!std::isfinite(cx) || !std::isfinite(cy) ||
      !translation.allFinite() || !rotation.allFinite()) {
    throw std::invalid_argument("camera model contains non-finite entries");
  }
  const double ortho_err =
      (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-9) {
    throw std::invalid_argument(
        "camera rotation is not orthonormal: max |R R^T - I| = " +
        std::to_string(ortho_err));
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("camera rotation determinant is not +1: " +
                                std::to_string(rotation.determinant()));
  }
}

Vec3 CameraModel::unproject(double u, double v, double depth) const {
  const Vec3 cam((u - cx) * depth / fx, (v - cy) * depth / fy, depth);
  return rotation * cam + translation;
}

int BevGridSpec::x_cells() const { return step_count(x_min, x_max, x_step, "x"); }
int BevGridSpec::y_cells() const { return step_count(y_min, y_max, y_step, "y"); }

int BevGridSpec::depth_bins() const {
  return step_count(depth_min, depth_max, depth_step, "depth") + 1;
}

void BevGridSpec::validate() const {
  if (!(x_step > 0.0) || !(y_step > 0.0) || !(depth_step > 0.0)) {
    throw std::invalid_argument("grid steps must be positive");
  }
  if (!(x_max > x_min) || !(y_max > y_min) || !(depth_max > depth_min)) {
    throw std::invalid_argument("grid ranges must be non-empty");
  }
  // These throw when a range is not a whole number of steps.
  (void)x_cells();
  (void)y_cells();
  (void)depth_bins();
}

CellIndex project_point(const Vec3& point, const BevGridSpec& grid) {
  const double x = point.x();
  const double y = point.y();
  // Half-open ranges checked against the configured bounds directly so that
  // a point exactly at x_max or y_max is OUT regardless of rounding in the
  // index arithmetic below.
  if (!(x >= grid.x_min) || x >= grid.x_max || !(y >= grid.y_min) ||
      y >= grid.y_max) {
    return CellIndex{};
  }
  const int nx = grid.x_cells();
  const int ny = grid.y_cells();
  const int ix = std::min(
      nx - 1, static_cast<int>(std::floor((x - grid.x_min) / grid.x_step)));
  const int iy = std::min(
      ny - 1, static_cast<int>(std::floor((y - grid.y_min) / grid.y_step)));
  return CellIndex{ix, iy};
}

Vec2 cell_center(const CellIndex& cell, const BevGridSpec& grid) {
  if (cell.out()) {
    throw std::invalid_argument("cell_center called on an OUT cell index");
  }
  return Vec2(grid.x_min + (cell.x + 0.5) * grid.x_step,
              grid.y_min + (cell.y + 0.5) * grid.y_step);
}

FrustumLattice make_frustum(int image_w, int image_h, const CameraModel& camera,
                            const BevGridSpec& grid) {
  if (image_w < 1 || image_h < 1) {
    throw std::invalid_argument("frustum image dimensions must be positive, got " +
                                std::to_string(image_w) + "x" +
                                std::to_string(image_h));
  }
  camera.validate();
  grid.validate();
  const int bins = grid.depth_bins();
  FrustumLattice lattice;
  lattice.height = image_h;
  lattice.width = image_w;
  lattice.bins = bins;
  lattice.points.resize(static_cast<size_t>(image_h) * image_w * bins);
  size_t idx = 0;
  for (int v = 0; v < image_h; ++v) {
    for (int u = 0; u < image_w; ++u) {
      for (int j = 0; j < bins; ++j) {
        lattice.points[idx++] = camera.unproject(u, v, grid.depth_at(j));
      }
    }
  }
  return lattice;
}

ImageFeatures ImageFeatures::zeros(int height, int width, int channels) {
  if (height < 1 || width < 1 || channels < 1) {
    throw std::invalid_argument("image feature dimensions must be positive");
  }
  ImageFeatures f;
  f.height = height;
  f.width = width;
  f.channels = channels;
  f.data.assign(static_cast<size_t>(height) * width * channels, 0.0);
  return f;
}

DepthDistribution DepthDistribution::from_logits(int height, int width, int bins,
                                                 std::span<const double> logits) {
  if (height < 1 || width < 1 || bins < 1) {
    throw std::invalid_argument("depth distribution dimensions must be positive");
  }
  const size_t expected = static_cast<size_t>(height) * width * bins;
  if (logits.size() != expected) {
    throw std::invalid_argument("depth logits size " +
                                std::to_string(logits.size()) + " != expected " +
                                std::to_string(expected));
  }
  DepthDistribution d;
  d.height = height;
  d.width = width;
  d.bins = bins;
  d.weights.resize(expected);
  for (size_t px = 0; px < expected / bins; ++px) {
    const double* in = logits.data() + px * bins;
    double* out = d.weights.data() + px * bins;
    double mx = in[0];
    for (int j = 1; j < bins; ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (int j = 0; j < bins; ++j) {
      out[j] = std::exp(in[j] - mx);
      sum += out[j];
    }
    for (int j = 0; j < bins; ++j) out[j] /= sum;
  }
  return d;
}

DepthDistribution DepthDistribution::from_weights(int height, int width, int bins,
                                                  std::vector<double> weights) {
  if (height < 1 || width < 1 || bins < 1) {
    throw std::invalid_argument("depth distribution dimensions must be positive");
  }
  const size_t expected = static_cast<size_t>(height) * width * bins;
  if (weights.size() != expected) {
    throw std::invalid_argument("depth weights size " +
                                std::to_string(weights.size()) +
                                " != expected " + std::to_string(expected));
  }
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw std::invalid_argument("depth weight at flat index " +
                                  std::to_string(i) + " is negative or non-finite");
    }
  }
  DepthDistribution d;
  d.height = height;
  d.width = width;
  d.bins = bins;
  d.weights = std::move(weights);
  return d;
}

LiftedFeatures lift(const ImageFeatures& image, const DepthDistribution& depth) {
  if (image.height != depth.height || image.width != depth.width) {
    throw std::invalid_argument(
        "lift shape mismatch: features " + std::to_string(image.width) + "x" +
        std::to_string(image.height) + " vs depth " +
        std::to_string(depth.width) + "x" + std::to_string(depth.height));
  }
  LiftedFeatures out;
  out.height = image.height;
  out.width = image.width;
  out.bins = depth.bins;
  out.channels = image.channels;
  out.data.resize(static_cast<size_t>(out.height) * out.width * out.bins *
                  out.channels);
  size_t idx = 0;
  for (int v = 0; v < out.height; ++v) {
    for (int u = 0; u < out.width; ++u) {
      const double* feat =
          image.data.data() +
          (static_cast<size_t>(v) * out.width + u) * out.channels;
      const double* w = depth.weights.data() +
                        (static_cast<size_t>(v) * out.width + u) * out.bins;
      for (int j = 0; j < out.bins; ++j) {
        for (int c = 0; c < out.channels; ++c) {
          out.data[idx++] = w[j] * feat[c];
        }
      }
    }
  }
  return out;
}

std::vector<CellIndex> project_to_grid(std::span<const Vec3> points,
                                       const BevGridSpec& grid) {
  grid.validate();
  std::vector<CellIndex> cells(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    cells[i] = project_point(points[i], grid);
  }
  return cells;
}

FeaturePointCloud build_point_cloud(const FrustumLattice& frustum,
                                    const LiftedFeatures& lifted,
                                    const BevGridSpec& grid) {
  if (frustum.height != lifted.height || frustum.width != lifted.width ||
      frustum.bins != lifted.bins) {
    throw std::invalid_argument("frustum and lifted features disagree on shape");
  }
  FeaturePointCloud cloud;
  cloud.channels = lifted.channels;
  cloud.cells = project_to_grid(frustum.points, grid);
  cloud.features = lifted.data;  // same (pixel, bin) ordering by construction
  return cloud;
}

}  // namespace dualbev
