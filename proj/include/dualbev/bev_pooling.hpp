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

#ifndef DUALBEV_BEV_POOLING_HPP
#define DUALBEV_BEV_POOLING_HPP

#include <cstdint>
#include <ostream>
#include <string>

#include "dualbev/bev_geometry.hpp"

namespace dualbev {

/// Dense BEV feature grid produced by pooling. Layout matches the
/// linearized cell key used by the interval reducer:
/// data[(ix * y_cells + iy) * channels + c].
struct BevFeatureMap {
  int x_cells = 0;
  int y_cells = 0;
  int channels = 0;
  std::vector<double> data;

  double at(int ix, int iy, int c) const {
    return data[(static_cast<size_t>(ix) * y_cells + iy) * channels + c];
  }
  double& at(int ix, int iy, int c) {
    return data[(static_cast<size_t>(ix) * y_cells + iy) * channels + c];
  }

  /// FNV-1a over the dimensions and the raw bytes of every cell value.
  /// Bitwise-equal maps (and only those) share a checksum.
  uint64_t checksum() const;
};

/// Reference pooling: walk the points in order and scatter-add each into its
/// cell. OUT points are skipped. Quadratic cache behavior on large clouds but
/// trivially correct.
BevFeatureMap pool_naive(const FeaturePointCloud& cloud, const BevGridSpec& grid);

/// Interval pooling: stable counting sort of point indices by linearized
/// cell key, then one segmented sum per run of equal keys. The sort is
/// stable, so every cell accumulates its points in the same order as
/// pool_naive and the result is bitwise identical.
BevFeatureMap pool_interval(const FeaturePointCloud& cloud,
                            const BevGridSpec& grid);

/// Timing comparison of the two pooling paths on a seeded random cloud.
struct PoolingBenchReport {
  int n_points = 0;
  int channels = 0;
  uint64_t seed = 0;
  long long naive_ns = 0;
  long long interval_ns = 0;
  double interval_points_per_sec = 0.0;
  uint64_t naive_checksum = 0;
  uint64_t interval_checksum = 0;

  std::string to_json() const;  ///< single line
};

/// Generate a uniform random cloud (roughly 5% OUT points), run both pooling
/// paths, and report wall-clock timings plus result checksums.
/// Throws std::invalid_argument when n_points < 0 or channels < 1.
PoolingBenchReport bench_pooling(int n_points, int channels, uint64_t seed);

}  // namespace dualbev

#endif  // DUALBEV_BEV_POOLING_HPP
