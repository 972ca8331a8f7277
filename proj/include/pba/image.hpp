#pragma once

#include <cstdint>
#include <vector>

#include "pba/errors.hpp"

namespace pba {

// Row-major raster with interleaved channels, values in [0,1].
// Integer coordinates address pixel centers; the continuous image domain
// is [0, W-1] x [0, H-1].
struct ImageGrid {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  ImageGrid() = default;
  ImageGrid(int w, int h, int ch, double fill = 0.0)
      : width(w), height(h), channels(ch),
        data(static_cast<std::size_t>(w) * h * ch, fill) {}

  double at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool same_dims(const ImageGrid& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

struct ValidityMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> flags;

  ValidityMask() = default;
  ValidityMask(int w, int h, bool value = false)
      : width(w), height(h), flags(static_cast<std::size_t>(w) * h, value ? 1 : 0) {}

  bool at(int x, int y) const { return flags[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { flags[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto f : flags) n += f != 0;
    return n;
  }
};

// Per-pixel depth (or inverse depth) in scene units with validity flags.
// Every valid entry must be positive and finite.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int w, int h, double fill = 0.0, bool valid_fill = true)
      : width(w), height(h),
        data(static_cast<std::size_t>(w) * h, fill),
        valid(static_cast<std::size_t>(w) * h, valid_fill ? 1 : 0) {}

  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  bool valid_at(int x, int y) const {
    return valid[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set_valid(int x, int y, bool v) {
    valid[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

}  // namespace pba
