#include "pba/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "pba/errors.hpp"

namespace pba {
namespace {

bool is_pnm_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Skips whitespace and '#' comments between header tokens.
void skip_header_filler(const std::string& b, std::size_t& pos) {
  while (pos < b.size()) {
    if (is_pnm_space(b[pos])) {
      ++pos;
    } else if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else {
      return;
    }
  }
}

long parse_header_uint(const std::string& b, std::size_t& pos, const char* what) {
  skip_header_filler(b, pos);
  std::size_t start = pos;
  long v = 0;
  while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
    v = v * 10 + (b[pos] - '0');
    if (v > 1 << 30) throw IoError(std::string(what) + " out of range", start);
    ++pos;
  }
  if (pos == start) throw IoError(std::string("expected ") + what, pos);
  return v;
}

double parse_header_double(const std::string& b, std::size_t& pos, const char* what) {
  skip_header_filler(b, pos);
  const char* begin = b.c_str() + pos;
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) throw IoError(std::string("expected ") + what, pos);
  pos += static_cast<std::size_t>(end - begin);
  return v;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint32_t float_bits(float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, sizeof u);
  return u;
}

float bits_float(std::uint32_t u) {
  float f;
  std::memcpy(&f, &u, sizeof f);
  return f;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in) throw IoError("read failure on " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path);
}

ImageGrid load_image(const std::string& path) {
  std::string b = read_file(path);
  std::size_t pos = 0;
  if (b.size() < 2 || b[0] != 'P' || (b[1] != '5' && b[1] != '6'))
    throw IoError("not a binary PGM/PPM (want P5 or P6)", 0);
  int channels = b[1] == '5' ? 1 : 3;
  pos = 2;
  long w = parse_header_uint(b, pos, "width");
  long h = parse_header_uint(b, pos, "height");
  long maxval = parse_header_uint(b, pos, "maxval");
  if (w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20))
    throw IoError("bad image dimensions", pos);
  if (maxval < 1 || maxval > 65535) throw IoError("unsupported maxval", pos);
  if (pos >= b.size() || !is_pnm_space(b[pos]))
    throw IoError("expected single whitespace after maxval", pos);
  ++pos;
  int bytes_per = maxval > 255 ? 2 : 1;
  std::size_t need =
      static_cast<std::size_t>(w) * h * channels * static_cast<std::size_t>(bytes_per);
  if (b.size() - pos < need) throw IoError("truncated pixel payload", b.size());
  ImageGrid img(static_cast<int>(w), static_cast<int>(h), channels);
  double inv = 1.0 / static_cast<double>(maxval);
  const unsigned char* p = reinterpret_cast<const unsigned char*>(b.data()) + pos;
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    unsigned v;
    if (bytes_per == 2) {
      v = (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1];
    } else {
      v = p[i];
    }
    img.data[i] = v * inv;
  }
  return img;
}

void save_image(const std::string& path, const ImageGrid& img, int maxval) {
  if (img.channels != 1 && img.channels != 3)
    throw InvalidInputError("save_image: channels must be 1 or 3");
  if (img.width < 1 || img.height < 1) throw InvalidInputError("save_image: empty image");
  if (maxval < 1 || maxval > 65535) throw InvalidInputError("save_image: bad maxval");
  std::string out;
  out += img.channels == 1 ? "P5\n" : "P6\n";
  out += std::to_string(img.width) + " " + std::to_string(img.height) + "\n";
  out += std::to_string(maxval) + "\n";
  int bytes_per = maxval > 255 ? 2 : 1;
  out.reserve(out.size() + img.data.size() * static_cast<std::size_t>(bytes_per));
  for (double d : img.data) {
    double c = d < 0.0 ? 0.0 : (d > 1.0 ? 1.0 : d);
    unsigned v = static_cast<unsigned>(std::lround(c * maxval));
    if (bytes_per == 2) out += static_cast<char>((v >> 8) & 0xff);
    out += static_cast<char>(v & 0xff);
  }
  write_file(path, out);
}

void save_depth(const std::string& path, const DepthMap& d) {
  if (d.width < 1 || d.height < 1) throw InvalidInputError("save_depth: empty map");
  std::string out = "Pf\n" + std::to_string(d.width) + " " + std::to_string(d.height) +
                    "\n-1.0\n";
  out.reserve(out.size() + d.pixel_count() * 4);
  for (int y = d.height - 1; y >= 0; --y) {
    for (int x = 0; x < d.width; ++x) {
      float f = d.valid_at(x, y) ? static_cast<float>(d.at(x, y))
                                 : std::numeric_limits<float>::quiet_NaN();
      std::uint32_t u = float_bits(f);
      out += static_cast<char>(u & 0xff);
      out += static_cast<char>((u >> 8) & 0xff);
      out += static_cast<char>((u >> 16) & 0xff);
      out += static_cast<char>((u >> 24) & 0xff);
    }
  }
  write_file(path, out);
}

DepthMap load_depth(const std::string& path, std::string* warning) {
  std::string b = read_file(path);
  if (b.size() < 2 || b[0] != 'P' || (b[1] != 'f' && b[1] != 'F'))
    throw IoError("not a PFM file", 0);
  if (b[1] == 'F') throw IoError("color PFM unsupported (want grayscale Pf)", 1);
  std::size_t pos = 2;
  long w = parse_header_uint(b, pos, "width");
  long h = parse_header_uint(b, pos, "height");
  std::size_t scale_pos = pos;
  double scale = parse_header_double(b, pos, "scale");
  if (w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20))
    throw IoError("bad PFM dimensions", pos);
  if (!(scale < 0.0))
    throw IoError("big-endian PFM (positive scale) unsupported", scale_pos);
  if (pos >= b.size() || !is_pnm_space(b[pos]))
    throw IoError("expected single whitespace after scale", pos);
  ++pos;
  std::size_t need = static_cast<std::size_t>(w) * h * 4;
  if (b.size() - pos < need) throw IoError("truncated PFM payload", b.size());
  DepthMap d(static_cast<int>(w), static_cast<int>(h));
  const unsigned char* p = reinterpret_cast<const unsigned char*>(b.data()) + pos;
  std::size_t bad = 0;
  for (long row = 0; row < h; ++row) {
    long y = h - 1 - row;  // PFM rows run bottom to top
    for (long x = 0; x < w; ++x) {
      std::size_t i = (static_cast<std::size_t>(row) * w + x) * 4;
      std::uint32_t u = static_cast<std::uint32_t>(p[i]) |
                        (static_cast<std::uint32_t>(p[i + 1]) << 8) |
                        (static_cast<std::uint32_t>(p[i + 2]) << 16) |
                        (static_cast<std::uint32_t>(p[i + 3]) << 24);
      double v = bits_float(u);
      if (std::isfinite(v) && v > 0.0) {
        d.at(static_cast<int>(x), static_cast<int>(y)) = v;
      } else {
        d.at(static_cast<int>(x), static_cast<int>(y)) = 0.0;
        d.set_valid(static_cast<int>(x), static_cast<int>(y), false);
        ++bad;
      }
    }
  }
  if (bad > 0 && warning != nullptr) {
    *warning = std::to_string(bad) + " pixels were NaN or non-positive; flagged invalid";
  }
  return d;
}

Intrinsics load_intrinsics(const std::string& path) {
  std::istringstream in(read_file(path));
  double v[4];
  for (int i = 0; i < 4; ++i) {
    if (!(in >> v[i])) throw IoError("intrinsics: expected 4 numbers in " + path);
  }
  std::string extra;
  if (in >> extra) throw IoError("intrinsics: trailing content in " + path);
  return Intrinsics(v[0], v[1], v[2], v[3]);
}

void save_intrinsics(const std::string& path, const Intrinsics& k) {
  write_file(path, fmt_double(k.fx) + " " + fmt_double(k.fy) + " " + fmt_double(k.cx) +
                       " " + fmt_double(k.cy) + "\n");
}

void save_poses(const std::string& path, const std::vector<RigidPose>& pairs) {
  std::string out = "pairs " + std::to_string(pairs.size()) + "\n";
  auto line = [&](const RigidPose& p) {
    for (int i = 0; i < 3; ++i) out += fmt_double(p.rotation[i]) + " ";
    out += fmt_double(p.translation[0]) + " " + fmt_double(p.translation[1]) + " " +
           fmt_double(p.translation[2]) + "\n";
  };
  for (const RigidPose& p : pairs) line(p);
  out += "absolute " + std::to_string(pairs.size() + 1) + "\n";
  line(RigidPose::identity());
  std::vector<RigidPose> chain;
  for (const RigidPose& p : pairs) {
    chain.push_back(p);
    line(compose_poses(chain));
  }
  write_file(path, out);
}

std::vector<RigidPose> load_poses(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "pairs")
    throw IoError("poses: expected 'pairs <count>' header in " + path);
  std::vector<RigidPose> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v[6];
    for (int j = 0; j < 6; ++j) {
      if (!(in >> v[j])) throw IoError("poses: truncated pair list in " + path);
    }
    out[i].rotation = Eigen::Vector3d(v[0], v[1], v[2]);
    out[i].translation = Eigen::Vector3d(v[3], v[4], v[5]);
  }
  return out;
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
  auto it = values.find(key);
  return it == values.end() ? def : it->second;
}

double Config::get_double(const std::string& key, double def) const {
  auto it = values.find(key);
  if (it == values.end()) return def;
  const char* s = it->second.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    throw InvalidInputError("config: key '" + key + "' is not a number");
  return v;
}

int Config::get_int(const std::string& key, int def) const {
  double v = get_double(key, static_cast<double>(def));
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw InvalidInputError("config: key '" + key + "' is not an integer");
  return i;
}

unsigned Config::get_uint(const std::string& key, unsigned def) const {
  double v = get_double(key, static_cast<double>(def));
  if (v < 0.0 || static_cast<double>(static_cast<unsigned>(v)) != v)
    throw InvalidInputError("config: key '" + key + "' is not an unsigned integer");
  return static_cast<unsigned>(v);
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  auto it = values.find(key);
  std::vector<double> out;
  if (it == values.end()) return out;
  std::istringstream in(it->second);
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof())
    throw InvalidInputError("config: key '" + key + "' is not a number list");
  return out;
}

Config parse_config_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw IoError("config: line " + std::to_string(lineno) + " is not 'key = value'");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty())
      throw IoError("config: line " + std::to_string(lineno) + " has an empty key");
    cfg.values[key] = val;
  }
  return cfg;
}

Config load_config(const std::string& path) { return parse_config_text(read_file(path)); }

}  // namespace pba
