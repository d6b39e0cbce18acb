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

#include "dualbev/bev_pooling.hpp"

#include <chrono>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "dualbev/rng.hpp"

namespace dualbev {

namespace {

void check_cloud(const FeaturePointCloud& cloud, const BevGridSpec& grid,
                 int x_cells, int y_cells) {
  if (cloud.channels < 0) {
    throw std::invalid_argument("point cloud channel count is negative");
  }
  if (cloud.features.size() !=
      cloud.size() * static_cast<size_t>(cloud.channels)) {
    throw std::invalid_argument(
        "point cloud feature buffer size " +
        std::to_string(cloud.features.size()) + " != points * channels = " +
        std::to_string(cloud.size() * static_cast<size_t>(cloud.channels)));
  }
  (void)grid;
  for (const CellIndex& c : cloud.cells) {
    if (c.out()) continue;
    if (c.x >= x_cells || c.y >= y_cells) {
      throw std::invalid_argument("point cell index (" + std::to_string(c.x) +
                                  ", " + std::to_string(c.y) +
                                  ") outside the grid");
    }
  }
}

BevFeatureMap make_map(const BevGridSpec& grid, int channels, int& x_cells,
                       int& y_cells) {
  grid.validate();
  BevFeatureMap map;
  map.x_cells = x_cells = grid.x_cells();
  map.y_cells = y_cells = grid.y_cells();
  map.channels = channels;
  map.data.assign(
      static_cast<size_t>(map.x_cells) * map.y_cells * std::max(channels, 0),
      0.0);
  return map;
}

}  // namespace

uint64_t BevFeatureMap::checksum() const {
  uint64_t h = 1469598103934665603ull;  // FNV offset basis
  auto mix = [&h](const void* bytes, size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(bytes);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;  // FNV prime
    }
  };
  mix(&x_cells, sizeof(x_cells));
  mix(&y_cells, sizeof(y_cells));
  mix(&channels, sizeof(channels));
  mix(data.data(), data.size() * sizeof(double));
  return h;
}

BevFeatureMap pool_naive(const FeaturePointCloud& cloud,
                         const BevGridSpec& grid) {
  int x_cells = 0, y_cells = 0;
  BevFeatureMap map = make_map(grid, cloud.channels, x_cells, y_cells);
  check_cloud(cloud, grid, x_cells, y_cells);
  const int C = cloud.channels;
  for (size_t i = 0; i < cloud.size(); ++i) {
    const CellIndex& cell = cloud.cells[i];
    if (cell.out()) continue;
    double* dst =
        map.data.data() +
        (static_cast<size_t>(cell.x) * y_cells + cell.y) * C;
    const double* src = cloud.features.data() + i * C;
    for (int c = 0; c < C; ++c) dst[c] += src[c];
  }
  return map;
}

BevFeatureMap pool_interval(const FeaturePointCloud& cloud,
                            const BevGridSpec& grid) {
  int x_cells = 0, y_cells = 0;
  BevFeatureMap map = make_map(grid, cloud.channels, x_cells, y_cells);
  check_cloud(cloud, grid, x_cells, y_cells);
  const int C = cloud.channels;
  const size_t n = cloud.size();
  const size_t n_keys = static_cast<size_t>(x_cells) * y_cells;

  // Stable counting sort of the in-grid point indices by linearized cell key.
  std::vector<size_t> bucket_start(n_keys + 1, 0);
  for (size_t i = 0; i < n; ++i) {
    const CellIndex& cell = cloud.cells[i];
    if (cell.out()) continue;
    ++bucket_start[static_cast<size_t>(cell.x) * y_cells + cell.y + 1];
  }
  for (size_t k = 0; k < n_keys; ++k) bucket_start[k + 1] += bucket_start[k];
  std::vector<size_t> order(bucket_start[n_keys]);
  {
    std::vector<size_t> cursor(bucket_start.begin(), bucket_start.end() - 1);
    for (size_t i = 0; i < n; ++i) {
      const CellIndex& cell = cloud.cells[i];
      if (cell.out()) continue;
      order[cursor[static_cast<size_t>(cell.x) * y_cells + cell.y]++] = i;
    }
  }

  // One contiguous interval per cell; accumulate in sorted (= original
  // per-cell) order so the floating-point sums match pool_naive bit for bit.
  for (size_t key = 0; key < n_keys; ++key) {
    const size_t lo = bucket_start[key];
    const size_t hi = bucket_start[key + 1];
    if (lo == hi) continue;
    double* dst = map.data.data() + key * C;
    for (size_t s = lo; s < hi; ++s) {
      const double* src = cloud.features.data() + order[s] * C;
      for (int c = 0; c < C; ++c) dst[c] += src[c];
    }
  }
  return map;
}

std::string PoolingBenchReport::to_json() const {
  char hex_naive[32], hex_interval[32];
  std::snprintf(hex_naive, sizeof(hex_naive), "0x%016llx",
                static_cast<unsigned long long>(naive_checksum));
  std::snprintf(hex_interval, sizeof(hex_interval), "0x%016llx",
                static_cast<unsigned long long>(interval_checksum));
  std::ostringstream os;
  os << "{\"n_points\":" << n_points << ",\"channels\":" << channels
     << ",\"seed\":" << seed << ",\"naive_ns\":" << naive_ns
     << ",\"interval_ns\":" << interval_ns << ",\"interval_points_per_sec\":"
     << interval_points_per_sec << ",\"naive_checksum\":\"" << hex_naive
     << "\",\"interval_checksum\":\"" << hex_interval << "\"}";
  return os.str();
}

PoolingBenchReport bench_pooling(int n_points, int channels, uint64_t seed) {
  if (n_points < 0) {
    throw std::invalid_argument("bench point count must be non-negative");
  }
  if (channels < 1) {
    throw std::invalid_argument("bench channel count must be positive");
  }
  const BevGridSpec grid;
  const int nx = grid.x_cells();
  const int ny = grid.y_cells();

  Rng rng(seed);
  FeaturePointCloud cloud;
  cloud.channels = channels;
  cloud.cells.resize(n_points);
  cloud.features.resize(static_cast<size_t>(n_points) * channels);
  for (int i = 0; i < n_points; ++i) {
    if (rng.uniform() < 0.05) {
      cloud.cells[i] = CellIndex{};  // OUT
    } else {
      cloud.cells[i] =
          CellIndex{rng.uniform_int(0, nx - 1), rng.uniform_int(0, ny - 1)};
    }
    for (int c = 0; c < channels; ++c) {
      cloud.features[static_cast<size_t>(i) * channels + c] =
          rng.uniform(-1.0, 1.0);
    }
  }

  PoolingBenchReport report;
  report.n_points = n_points;
  report.channels = channels;
  report.seed = seed;

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  const BevFeatureMap naive = pool_naive(cloud, grid);
  auto t1 = clock::now();
  const BevFeatureMap interval = pool_interval(cloud, grid);
  auto t2 = clock::now();

  report.naive_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
  report.interval_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(t2 - t1).count();
  report.interval_points_per_sec =
      report.interval_ns > 0
          ? 1e9 * static_cast<double>(n_points) / report.interval_ns
          : 0.0;
  report.naive_checksum = naive.checksum();
  report.interval_checksum = interval.checksum();
  return report;
}

}  // namespace dualbev
