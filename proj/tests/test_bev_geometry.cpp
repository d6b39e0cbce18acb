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

#include <doctest.h>

#include "dualbev/bev_geometry.hpp"
#include "dualbev/rng.hpp"

using namespace dualbev;

namespace {

CameraModel identity_camera() {
  CameraModel cam;
  cam.fx = 100.0;
  cam.fy = 100.0;
  cam.cx = 0.5;
  cam.cy = 0.5;
  return cam;
}

}  // namespace

TEST_SUITE("bev_geometry") {

TEST_CASE("default grid dimensions") {
  const BevGridSpec grid;
  CHECK(grid.x_cells() == 100);
  CHECK(grid.y_cells() == 100);
  CHECK(grid.depth_bins() == 77);
  CHECK(grid.depth_at(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(grid.depth_at(76) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("grid validation rejects bad ranges") {
  BevGridSpec grid;
  grid.x_step = -0.25;
  CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
  grid = BevGridSpec{};
  grid.x_max = grid.x_min;
  CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
  grid = BevGridSpec{};
  grid.x_max = 20.1;  // not a whole number of 0.25 steps
  CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
}

TEST_CASE("projection of known points") {
  const BevGridSpec grid;
  CHECK(project_point(Vec3(5.0, 0.0, 0.0), grid) == CellIndex{40, 50});
  CHECK(project_point(Vec3(-5.0, -10.0, 0.0), grid) == CellIndex{0, 0});
  CHECK(project_point(Vec3(25.0, 0.0, 0.0), grid).out());
  // Half-open upper edges.
  CHECK(project_point(Vec3(20.0, 0.0, 0.0), grid).out());
  CHECK(project_point(Vec3(0.0, 10.0, 0.0), grid).out());
  CHECK(project_point(Vec3(0.0, -10.0 - 1e-9, 0.0), grid).out());
  // z is ignored.
  CHECK(project_point(Vec3(5.0, 0.0, 123.0), grid) == CellIndex{40, 50});
}

TEST_CASE("cell-center round trip covers every cell") {
  const BevGridSpec grid;
  for (int ix = 0; ix < grid.x_cells(); ++ix) {
    for (int iy = 0; iy < grid.y_cells(); ++iy) {
      const Vec2 c = cell_center(CellIndex{ix, iy}, grid);
      const CellIndex back = project_point(Vec3(c.x(), c.y(), 0.0), grid);
      REQUIRE(back == CellIndex{ix, iy});
    }
  }
}

TEST_CASE("camera validation") {
  CameraModel cam = identity_camera();
  CHECK_NOTHROW(cam.validate());
  cam.fx = 0.0;
  CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
  cam = identity_camera();
  cam.rotation(0, 0) = 1.0 + 1e-6;  // not orthonormal
  CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
  cam = identity_camera();
  cam.rotation.col(0) *= -1.0;  // det -1
  CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
}

TEST_CASE("unproject puts the principal point on the optical axis") {
  const CameraModel cam = identity_camera();
  const Vec3 p = cam.unproject(cam.cx, cam.cy, 5.0);
  CHECK(p.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.z() == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("frustum lattice size and determinism") {
  const BevGridSpec grid;
  const CameraModel cam = identity_camera();
  const FrustumLattice a = make_frustum(2, 2, cam, grid);
  CHECK(a.size() == 2 * 2 * 77);
  const FrustumLattice b = make_frustum(2, 2, cam, grid);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a.points[i].x() == b.points[i].x());
    REQUIRE(a.points[i].y() == b.points[i].y());
    REQUIRE(a.points[i].z() == b.points[i].z());
  }
  CHECK_THROWS_AS(make_frustum(0, 2, cam, grid), std::invalid_argument);
}

TEST_CASE("softmax depth distributions are normalized") {
  Rng rng(7);
  for (int fixture = 0; fixture < 20; ++fixture) {
    std::vector<double> logits(3 * 4 * 11);
    for (double& l : logits) l = rng.uniform(-5.0, 5.0);
    const DepthDistribution d = DepthDistribution::from_logits(3, 4, 11, logits);
    for (int v = 0; v < 3; ++v) {
      for (int u = 0; u < 4; ++u) {
        double sum = 0.0;
        for (int j = 0; j < 11; ++j) {
          REQUIRE(d.at(v, u, j) >= 0.0);
          sum += d.at(v, u, j);
        }
        REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
  CHECK_THROWS_AS(
      DepthDistribution::from_weights(1, 1, 2, std::vector<double>{0.5, -0.1}),
      std::invalid_argument);
}

TEST_CASE("lift is the outer product of features and depth weights") {
  ImageFeatures img = ImageFeatures::zeros(2, 3, 2);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = 0.1 * (i + 1);
  std::vector<double> w(2 * 3 * 4);
  for (size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / (i % 4 + 1);
  const DepthDistribution depth = DepthDistribution::from_weights(2, 3, 4, w);
  const LiftedFeatures lifted = lift(img, depth);
  for (int v = 0; v < 2; ++v) {
    for (int u = 0; u < 3; ++u) {
      for (int j = 0; j < 4; ++j) {
        for (int c = 0; c < 2; ++c) {
          REQUIRE(lifted.at(v, u, j, c) ==
                  doctest::Approx(depth.at(v, u, j) * img.at(v, u, c))
                      .epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("lift linearity in the image features") {
  Rng rng(11);
  ImageFeatures img = ImageFeatures::zeros(3, 3, 4);
  for (double& x : img.data) x = rng.uniform(-2.0, 2.0);
  std::vector<double> logits(3 * 3 * 8);
  for (double& l : logits) l = rng.normal();
  const DepthDistribution depth = DepthDistribution::from_logits(3, 3, 8, logits);

  ImageFeatures scaled = img;
  for (double& x : scaled.data) x *= 3.5;
  const LiftedFeatures a = lift(img, depth);
  const LiftedFeatures b = lift(scaled, depth);
  for (size_t i = 0; i < a.data.size(); ++i) {
    REQUIRE(b.data[i] == doctest::Approx(3.5 * a.data[i]).epsilon(1e-9));
  }
}

TEST_CASE("summing lifted features over depth recovers the image features") {
  Rng rng(13);
  for (int fixture = 0; fixture < 100; ++fixture) {
    const int h = rng.uniform_int(1, 4);
    const int w = rng.uniform_int(1, 4);
    const int c = rng.uniform_int(1, 3);
    const int bins = rng.uniform_int(1, 16);
    ImageFeatures img = ImageFeatures::zeros(h, w, c);
    for (double& x : img.data) x = rng.uniform(-10.0, 10.0);
    std::vector<double> logits(static_cast<size_t>(h) * w * bins);
    for (double& l : logits) l = rng.uniform(-4.0, 4.0);
    const DepthDistribution depth =
        DepthDistribution::from_logits(h, w, bins, logits);
    const LiftedFeatures lifted = lift(img, depth);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        for (int ch = 0; ch < c; ++ch) {
          double sum = 0.0;
          for (int j = 0; j < bins; ++j) sum += lifted.at(v, u, j, ch);
          REQUIRE(sum == doctest::Approx(img.at(v, u, ch)).epsilon(1e-6));
        }
      }
    }
  }
}

TEST_CASE("lift rejects mismatched shapes") {
  const ImageFeatures img = ImageFeatures::zeros(2, 2, 1);
  const DepthDistribution depth = DepthDistribution::from_weights(
      2, 3, 1, std::vector<double>(6, 1.0));
  CHECK_THROWS_AS(lift(img, depth), std::invalid_argument);
}

TEST_CASE("point cloud pairs every lattice point with its cell") {
  const BevGridSpec grid;
  CameraModel cam = identity_camera();
  cam.cx = 0.5;
  cam.cy = 0.5;
  // Face the camera along +x in the robot frame (optical axis = +x).
  cam.rotation << 0, 0, 1,
                 -1, 0, 0,
                  0, -1, 0;
  const FrustumLattice frustum = make_frustum(2, 2, cam, grid);
  ImageFeatures img = ImageFeatures::zeros(2, 2, 3);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = 0.25 * i;
  std::vector<double> logits(2 * 2 * 77, 0.0);
  const DepthDistribution depth =
      DepthDistribution::from_logits(2, 2, 77, logits);
  const LiftedFeatures lifted = lift(img, depth);
  const FeaturePointCloud cloud = build_point_cloud(frustum, lifted, grid);
  REQUIRE(cloud.size() == frustum.size());
  REQUIRE(cloud.features.size() == cloud.size() * 3);
  const std::vector<CellIndex> expect = project_to_grid(frustum.points, grid);
  for (size_t i = 0; i < cloud.size(); ++i) {
    REQUIRE(cloud.cells[i] == expect[i]);
  }
}

}  // TEST_SUITE
