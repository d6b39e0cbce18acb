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

#include "dualbev/global_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dualbev/losses.hpp"

namespace dualbev {

void TrajectoryLog::validate() const {
  for (size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      throw std::invalid_argument("trajectory point " + std::to_string(i) +
                                  " is non-finite");
    }
  }
  if (!timestamps.empty()) {
    if (timestamps.size() != points.size()) {
      throw std::invalid_argument(
          "trajectory has " + std::to_string(points.size()) + " points but " +
          std::to_string(timestamps.size()) + " timestamps");
    }
    for (size_t i = 1; i < timestamps.size(); ++i) {
      if (!(timestamps[i] >= timestamps[i - 1])) {
        throw std::invalid_argument("trajectory timestamps decrease at row " +
                                    std::to_string(i));
      }
    }
  }
}

TrajectoryLog read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trajectory CSV " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("trajectory CSV " + path.string() + " is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,x,y") {
    throw std::runtime_error("trajectory CSV " + path.string() +
                             " has header '" + line + "', expected 't,x,y'");
  }
  TrajectoryLog log;
  size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    double t = 0.0, x = 0.0, y = 0.0;
    char c1 = 0, c2 = 0;
    if (!(ss >> t >> c1 >> x >> c2 >> y) || c1 != ',' || c2 != ',') {
      throw std::runtime_error("trajectory CSV " + path.string() +
                               " row " + std::to_string(row) +
                               " is malformed: '" + line + "'");
    }
    log.timestamps.push_back(t);
    log.points.emplace_back(x, y);
  }
  log.validate();
  return log;
}

void write_trajectory_csv(const TrajectoryLog& log,
                          const std::filesystem::path& path) {
  log.validate();
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "t,x,y\n";
  char buf[96];
  for (size_t i = 0; i < log.points.size(); ++i) {
    const double t =
        log.timestamps.empty() ? static_cast<double>(i) : log.timestamps[i];
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", t, log.points[i].x(),
                  log.points[i].y());
    out << buf;
  }
}

namespace {

double segment_dist2(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (a + t * ab - p).squaredNorm();
}

}  // namespace

Raster rasterize_trajectories(const std::vector<TrajectoryLog>& logs,
                              const RasterSpec& spec, double stroke_radius) {
  if (!(stroke_radius > 0.0)) {
    throw std::invalid_argument("stroke radius must be positive, got " +
                                std::to_string(stroke_radius));
  }
  Raster out(spec.width, spec.height, spec.geo, 0.0);
  const double r2 = stroke_radius * stroke_radius;
  for (const TrajectoryLog& log : logs) {
    log.validate();
    if (log.points.empty()) continue;
    const size_t n_segs = std::max<size_t>(log.points.size() - 1, 1);
    for (size_t s = 0; s < n_segs; ++s) {
      const Vec2& a = log.points[s];
      const Vec2& b = log.points[std::min(s + 1, log.points.size() - 1)];
      // Pixel bounding box of the capsule around segment (a, b).
      const Vec2 lo_px = out.world_to_pixel(
          Vec2(std::min(a.x(), b.x()) - stroke_radius,
               std::min(a.y(), b.y()) - stroke_radius));
      const Vec2 hi_px = out.world_to_pixel(
          Vec2(std::max(a.x(), b.x()) + stroke_radius,
               std::max(a.y(), b.y()) + stroke_radius));
      const int x0 = std::max(0, static_cast<int>(std::floor(lo_px.x())));
      const int y0 = std::max(0, static_cast<int>(std::floor(lo_px.y())));
      const int x1 =
          std::min(spec.width - 1, static_cast<int>(std::ceil(hi_px.x())));
      const int y1 =
          std::min(spec.height - 1, static_cast<int>(std::ceil(hi_px.y())));
      for (int py = y0; py <= y1; ++py) {
        for (int px = x0; px <= x1; ++px) {
          if (out.at(px, py) != 0.0) continue;
          const Vec2 center = out.pixel_to_world(px, py);
          if (segment_dist2(center, a, b) <= r2) out.at(px, py) = 1.0;
        }
      }
    }
  }
  return out;
}

namespace {

// Squared distances beyond any real one in the rasters handled here, but
// small enough that envelope intersections stay well below the sentinels.
constexpr double kFar = 1e12;

/// One pass of the lower-envelope squared distance transform.
void dt_1d(const double* f, int n, double* d, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -1e30;
  z[1] = 1e30;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + static_cast<double>(q) * q) -
                (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + static_cast<double>(q) * q) -
           (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = 1e30;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

Raster distance_transform(const Raster& mask) {
  const int w = mask.width();
  const int h = mask.height();
  if (w == 0) {
    throw std::invalid_argument("distance transform of an empty raster");
  }
  std::vector<double> g(static_cast<size_t>(w) * h);
  bool any = false;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool set = mask.at(x, y) != 0.0;
      any = any || set;
      g[static_cast<size_t>(y) * w + x] = set ? 0.0 : kFar;
    }
  }
  if (!any) {
    throw std::invalid_argument(
        "distance transform requires at least one nonzero mask pixel");
  }

  const int n_max = std::max(w, h);
  std::vector<double> f(n_max), d(n_max), z(n_max + 1);
  std::vector<int> v(n_max);

  // Columns first, then rows; the transform is separable.
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = g[static_cast<size_t>(y) * w + x];
    dt_1d(f.data(), h, d.data(), v.data(), z.data());
    for (int y = 0; y < h; ++y) g[static_cast<size_t>(y) * w + x] = d[y];
  }
  Raster out(w, h, mask.geo(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = g[static_cast<size_t>(y) * w + x];
    dt_1d(f.data(), w, d.data(), v.data(), z.data());
    for (int x = 0; x < w; ++x) {
      out.at(x, y) = std::sqrt(d[x]) * mask.geo().meters_per_pixel;
    }
  }
  return out;
}

ProbabilityMap synth_hint_map(const Raster& obstacle_mask, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("hint map sigma must be positive, got " +
                                std::to_string(sigma));
  }
  Raster dist = distance_transform(obstacle_mask);
  for (double& v : dist.cells()) v = std::exp(-v / sigma);
  return ProbabilityMap::from_raster(std::move(dist));
}

double score_path(const ProbabilityMap& map, std::span<const Vec2> path,
                  double sample_pitch) {
  if (path.size() < 2) {
    throw std::invalid_argument("path score needs at least 2 vertices, got " +
                                std::to_string(path.size()));
  }
  if (!(sample_pitch > 0.0)) {
    throw std::invalid_argument("sample pitch must be positive");
  }
  std::vector<double> cum(path.size(), 0.0);
  for (size_t i = 1; i < path.size(); ++i) {
    cum[i] = cum[i - 1] + (path[i] - path[i - 1]).norm();
  }
  const double length = cum.back();
  const int samples =
      std::max(2, static_cast<int>(std::ceil(length / sample_pitch)));
  double acc = 0.0;
  size_t seg = 0;
  for (int i = 0; i < samples; ++i) {
    const double s =
        length * static_cast<double>(i) / static_cast<double>(samples - 1);
    while (seg + 2 < path.size() && cum[seg + 1] < s) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0.0 ? (s - cum[seg]) / seg_len : 0.0;
    const Vec2 p = path[seg] + std::clamp(t, 0.0, 1.0) * (path[seg + 1] - path[seg]);
    acc += map.sample_world(p);
  }
  return acc / samples;
}

namespace {

/// Per-pixel fit features: bias, intensity, intensity^2, 3x3 box mean
/// (edge-clamped).
Eigen::Vector4d fit_features(const Raster& overhead, int x, int y) {
  const double i0 = overhead.at(x, y);
  double box = 0.0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int bx = std::clamp(x + dx, 0, overhead.width() - 1);
      const int by = std::clamp(y + dy, 0, overhead.height() - 1);
      box += overhead.at(bx, by);
    }
  }
  return Eigen::Vector4d(1.0, i0, i0 * i0, box / 9.0);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

FitResult fit_tiny_gbpm(const std::vector<Raster>& masks,
                        const Raster& overhead, const FitOptions& options) {
  if (overhead.width() == 0) {
    throw std::invalid_argument("fit overhead raster is empty");
  }
  if (masks.empty()) {
    throw std::invalid_argument("fit requires at least one mask");
  }
  for (const Raster& m : masks) {
    if (m.width() != overhead.width() || m.height() != overhead.height() ||
        !(m.geo() == overhead.geo())) {
      throw std::invalid_argument(
          "fit mask and overhead raster disagree on size or georeferencing");
    }
  }
  if (options.epochs < 0 || !(options.learning_rate > 0.0)) {
    throw std::invalid_argument("fit epochs must be >= 0 and learning rate positive");
  }

  const int w = overhead.width();
  const int h = overhead.height();
  const size_t n = static_cast<size_t>(w) * h;

  std::vector<uint8_t> labels(n, 0);
  size_t n_fg = 0;
  for (const Raster& m : masks) {
    for (size_t i = 0; i < n; ++i) {
      if (m.cells()[i] > 0.5 && !labels[i]) {
        labels[i] = 1;
        ++n_fg;
      }
    }
  }
  if (n_fg == 0 || n_fg == n) {
    throw std::invalid_argument(
        "fit labels are degenerate: " + std::to_string(n_fg) + " of " +
        std::to_string(n) + " pixels driven");
  }

  std::vector<Eigen::Vector4d> feats(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      feats[static_cast<size_t>(y) * w + x] = fit_features(overhead, x, y);
    }
  }

  Eigen::Vector4d weights = Eigen::Vector4d::Zero();
  std::vector<double> p(n);
  FitResult result;
  int stale = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Eigen::Vector4d grad = Eigen::Vector4d::Zero();
    for (size_t i = 0; i < n; ++i) {
      p[i] = sigmoid(weights.dot(feats[i]));
      const double p_t =
          std::clamp(labels[i] ? p[i] : 1.0 - p[i], 1e-7, 1.0 - 1e-7);
      const double sign = labels[i] ? 1.0 : -1.0;
      const double dl_dz = focal_loss_gradient(options.alpha, options.gamma,
                                               p_t) *
                           sign * p[i] * (1.0 - p[i]);
      grad += dl_dz * feats[i];
    }
    weights -= options.learning_rate / static_cast<double>(n) * grad;

    for (size_t i = 0; i < n; ++i) p[i] = sigmoid(weights.dot(feats[i]));
    const double loss =
        focal_loss_batch(p, labels, options.alpha, options.gamma);
    result.loss_curve.push_back(loss);
    if (result.loss_curve.size() > 1) {
      const double prev = result.loss_curve[result.loss_curve.size() - 2];
      stale = (prev - loss < options.plateau_tol) ? stale + 1 : 0;
      if (stale >= options.plateau_patience) break;
    }
  }

  Raster cost(w, h, overhead.geo(), 0.0);
  for (size_t i = 0; i < n; ++i) {
    cost.cells()[i] = 1.0 - sigmoid(weights.dot(feats[i]));
  }
  result.map = ProbabilityMap::from_raster(std::move(cost));
  result.weights = weights;
  return result;
}

}  // namespace dualbev
