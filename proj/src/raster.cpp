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

#include "dualbev/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace dualbev {

Raster::Raster(int width, int height, GeoRef geo, double fill)
    : width_(width), height_(height), geo_(geo) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("raster dimensions must be positive, got " +
                                std::to_string(width) + "x" +
                                std::to_string(height));
  }
  if (!(geo.meters_per_pixel > 0.0)) {
    throw std::invalid_argument("meters_per_pixel must be positive, got " +
                                std::to_string(geo.meters_per_pixel));
  }
  cells_.assign(static_cast<size_t>(width) * height, fill);
}

double Raster::bilinear(double px, double py) const {
  if (!in_hull(px, py)) {
    throw std::invalid_argument("bilinear sample (" + std::to_string(px) +
                                ", " + std::to_string(py) +
                                ") is outside the raster hull");
  }
  const int x0 = std::min(static_cast<int>(std::floor(px)), width_ - 2 >= 0 ? width_ - 2 : 0);
  const int y0 = std::min(static_cast<int>(std::floor(py)), height_ - 2 >= 0 ? height_ - 2 : 0);
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = px - x0;
  const double fy = py - y0;
  const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
  const double bot = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
  return top * (1.0 - fy) + bot * fy;
}

ProbabilityMap ProbabilityMap::from_raster(Raster raster) {
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      const double v = raster.at(x, y);
      if (!(v >= 0.0) || !(v <= 1.0)) {
        throw std::invalid_argument(
            "probability map cell (" + std::to_string(x) + ", " +
            std::to_string(y) + ") is outside [0, 1]: " + std::to_string(v));
      }
    }
  }
  ProbabilityMap map;
  map.raster_ = std::move(raster);
  return map;
}

double ProbabilityMap::sample_world(const Vec2& world) const {
  if (raster_.width() == 0) {
    throw std::logic_error("sampling an empty probability map");
  }
  const Vec2 px = raster_.world_to_pixel(world);
  if (!raster_.in_hull(px.x(), px.y())) return 1.0;
  return raster_.bilinear(px.x(), px.y());
}

std::filesystem::path sidecar_path(const std::filesystem::path& pgm_path) {
  std::filesystem::path p = pgm_path;
  p.replace_extension(".geo.json");
  return p;
}

void write_pgm(const Raster& raster, const std::filesystem::path& path) {
  if (raster.width() == 0) {
    throw std::invalid_argument("writing an empty raster");
  }
  std::vector<uint8_t> bytes;
  bytes.reserve(raster.cells().size());
  for (size_t i = 0; i < raster.cells().size(); ++i) {
    const double v = raster.cells()[i];
    if (!(v >= 0.0) || !(v <= 1.0)) {
      throw std::invalid_argument("PGM value at flat index " +
                                  std::to_string(i) +
                                  " is outside [0, 1]: " + std::to_string(v));
    }
    bytes.push_back(static_cast<uint8_t>(std::lround(v * 255.0)));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "P5\n" << raster.width() << " " << raster.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("short write to " + path.string());
  }
  out.close();

  nlohmann::json geo = {{"origin_x", raster.geo().origin_x},
                        {"origin_y", raster.geo().origin_y},
                        {"meters_per_pixel", raster.geo().meters_per_pixel}};
  std::ofstream side(sidecar_path(path));
  if (!side) {
    throw std::runtime_error("cannot open " + sidecar_path(path).string() +
                             " for writing");
  }
  side << geo.dump() << "\n";
}

namespace {

/// Skip PGM whitespace and '#' comment lines.
void skip_pgm_space(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      while (c != '\n' && c != EOF) c = in.get();
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_pgm_int(std::istream& in, const std::string& path, const char* what) {
  skip_pgm_space(in);
  int value = 0;
  if (!(in >> value)) {
    throw std::runtime_error("truncated PGM header in " + path +
                             " while reading " + what);
  }
  return value;
}

}  // namespace

Raster read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    throw std::runtime_error("expected P5 magic in " + path.string() +
                             ", got bytes '" + std::string(magic, 2) + "'");
  }
  const int width = read_pgm_int(in, path.string(), "width");
  const int height = read_pgm_int(in, path.string(), "height");
  const int maxval = read_pgm_int(in, path.string(), "maxval");
  if (width < 1 || height < 1 || maxval != 255) {
    throw std::runtime_error("unsupported PGM header in " + path.string() +
                             ": " + std::to_string(width) + "x" +
                             std::to_string(height) + " maxval " +
                             std::to_string(maxval));
  }
  in.get();  // single whitespace byte after maxval
  std::vector<uint8_t> bytes(static_cast<size_t>(width) * height);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (static_cast<size_t>(in.gcount()) != bytes.size()) {
    throw std::runtime_error("truncated PGM payload in " + path.string() +
                             ": expected " + std::to_string(bytes.size()) +
                             " bytes, got " + std::to_string(in.gcount()));
  }

  const std::filesystem::path side = sidecar_path(path);
  std::ifstream side_in(side);
  if (!side_in) {
    throw std::runtime_error("missing georeferencing sidecar " + side.string());
  }
  GeoRef geo;
  try {
    const nlohmann::json j = nlohmann::json::parse(side_in);
    geo.origin_x = j.at("origin_x").get<double>();
    geo.origin_y = j.at("origin_y").get<double>();
    geo.meters_per_pixel = j.at("meters_per_pixel").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid sidecar " + side.string() + ": " +
                             e.what());
  }

  Raster raster(width, height, geo);
  for (size_t i = 0; i < bytes.size(); ++i) {
    raster.cells()[i] = bytes[i] / 255.0;
  }
  return raster;
}

void write_ppm(const std::filesystem::path& path, int width, int height,
               std::span<const uint8_t> rgb) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("PPM dimensions must be positive");
  }
  if (rgb.size() != static_cast<size_t>(width) * height * 3) {
    throw std::invalid_argument("PPM payload size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "P6\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()),
            static_cast<std::streamsize>(rgb.size()));
  if (!out) {
    throw std::runtime_error("short write to " + path.string());
  }
}

}  // namespace dualbev
