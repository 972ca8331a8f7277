#pragma once

#include <map>
#include <string>
#include <vector>

#include "pba/camera.hpp"
#include "pba/image.hpp"
#include "pba/pose.hpp"

namespace pba {

// Binary PGM (P5) or PPM (P6), 8-bit or 16-bit (big-endian samples),
// normalized by maxval into [0,1]. Malformed input throws IoError carrying
// the byte offset.
ImageGrid load_image(const std::string& path);

// P5 for 1 channel, P6 for 3; values clamped to [0,1] and quantized to
// maxval (default 16-bit).
void save_image(const std::string& path, const ImageGrid& img, int maxval = 65535);

// Grayscale PFM, little-endian (negative scale field), rows stored bottom to
// top, invalid pixels as NaN. Loading maps NaN and other unusable values
// (non-finite or non-positive) to invalid pixels; when `warning` is non-null
// it receives a note about them.
DepthMap load_depth(const std::string& path, std::string* warning = nullptr);
void save_depth(const std::string& path, const DepthMap& d);

// Text file "fx fy cx cy".
Intrinsics load_intrinsics(const std::string& path);
void save_intrinsics(const std::string& path, const Intrinsics& k);

// Text file: a "pairs K" header, K lines of 6 values (axis-angle rotation,
// translation) for consecutive frame transforms t -> t+1, then an
// "absolute K+1" section of composed frame-0 -> frame-t transforms. Loading
// reads the pairs section; values round-trip exactly.
void save_poses(const std::string& path, const std::vector<RigidPose>& pairs);
std::vector<RigidPose> load_poses(const std::string& path);

// Flat "key = value" configuration with '#' comments; later keys override
// earlier ones. Typed getters throw InvalidInputError naming the key.
struct Config {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& def = "") const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  unsigned get_uint(const std::string& key, unsigned def) const;
  std::vector<double> get_doubles(const std::string& key) const;  // empty if absent
};

Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace pba
