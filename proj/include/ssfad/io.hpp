#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "ssfad/raster.hpp"

namespace ssfad {

enum class CubeDType { float32, float64 };

namespace detail {

inline std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

// key=value lines; blank lines and '#' comments ignored.
inline std::map<std::string, std::string> parse_kv_header(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open header file: " + path.string());
  }
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("malformed header line in " + path.string() +
                               ": '" + line + "'");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline int parse_positive_int(const std::map<std::string, std::string>& kv,
                              const std::string& key,
                              const std::filesystem::path& path) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    throw std::runtime_error("header " + path.string() + " missing key '" +
                             key + "'");
  }
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(it->second, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != it->second.size() || v <= 0 || v > 1'000'000) {
    throw std::runtime_error("header " + path.string() + ": key '" + key +
                             "' must be a positive integer, got '" +
                             it->second + "'");
  }
  return static_cast<int>(v);
}

inline std::filesystem::path sibling_raw_path(std::filesystem::path header) {
  header.replace_extension(".raw");
  return header;
}

// On-disk scalars are little-endian; swap on big-endian hosts.
inline void swap_bytes_if_big_endian(char* buf, std::size_t elem_size,
                                     std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    (void)buf;
    (void)elem_size;
    (void)count;
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      char* p = buf + i * elem_size;
      for (std::size_t a = 0, b = elem_size - 1; a < b; ++a, --b) {
        std::swap(p[a], p[b]);
      }
    }
  }
}

inline std::vector<char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open data file: " + path.string());
  }
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<char> bytes(size);
  if (size > 0 && !in.read(bytes.data(), static_cast<std::streamsize>(size))) {
    throw std::runtime_error("failed to read data file: " + path.string());
  }
  return bytes;
}

template <typename Scalar>
void decode_scalars(const std::vector<char>& bytes, std::vector<double>& out,
                    const std::filesystem::path& path) {
  std::vector<char> buf = bytes;
  swap_bytes_if_big_endian(buf.data(), sizeof(Scalar), buf.size() / sizeof(Scalar));
  const std::size_t n = buf.size() / sizeof(Scalar);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Scalar v;
    std::memcpy(&v, buf.data() + i * sizeof(Scalar), sizeof(Scalar));
    if (!std::isfinite(static_cast<double>(v))) {
      throw std::runtime_error("non-finite value at element " +
                               std::to_string(i) + " in " + path.string());
    }
    out[i] = static_cast<double>(v);
  }
}

template <typename Scalar>
void write_scalars_le(std::ostream& os, const std::vector<double>& values) {
  std::vector<char> buf(values.size() * sizeof(Scalar));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Scalar v = static_cast<Scalar>(values[i]);
    std::memcpy(buf.data() + i * sizeof(Scalar), &v, sizeof(Scalar));
  }
  swap_bytes_if_big_endian(buf.data(), sizeof(Scalar), values.size());
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

}  // namespace detail

/// Reads a cube from a key=value text header plus its sibling `.raw` data
/// file (same path with the extension replaced). Required keys: height,
/// width, bands, dtype in {float32, float64}; optional interleave=bsq and
/// byteorder=little are checked if present.
inline HyperCube load_cube(const std::filesystem::path& header_path) {
  const auto kv = detail::parse_kv_header(header_path);
  const int h = detail::parse_positive_int(kv, "height", header_path);
  const int w = detail::parse_positive_int(kv, "width", header_path);
  const int nb = detail::parse_positive_int(kv, "bands", header_path);

  const auto dtype_it = kv.find("dtype");
  if (dtype_it == kv.end()) {
    throw std::runtime_error("header " + header_path.string() +
                             " missing key 'dtype'");
  }
  const std::string& dtype = dtype_it->second;
  if (dtype != "float32" && dtype != "float64") {
    throw std::runtime_error("unsupported dtype '" + dtype + "' in " +
                             header_path.string());
  }
  if (auto it = kv.find("interleave"); it != kv.end() && it->second != "bsq") {
    throw std::runtime_error("unsupported interleave '" + it->second + "' in " +
                             header_path.string());
  }
  if (auto it = kv.find("byteorder"); it != kv.end() && it->second != "little") {
    throw std::runtime_error("unsupported byteorder '" + it->second + "' in " +
                             header_path.string());
  }

  const auto data_path = detail::sibling_raw_path(header_path);
  const auto bytes = detail::read_file_bytes(data_path);
  const std::size_t elem_size = dtype == "float32" ? 4 : 8;
  const std::size_t expected =
      static_cast<std::size_t>(h) * w * nb * elem_size;
  if (bytes.size() != expected) {
    throw std::runtime_error("size mismatch for " + data_path.string() +
                             ": expected " + std::to_string(expected) +
                             " bytes, found " + std::to_string(bytes.size()));
  }

  HyperCube cube(h, w, nb);
  if (dtype == "float32") {
    detail::decode_scalars<float>(bytes, cube.data(), data_path);
  } else {
    detail::decode_scalars<double>(bytes, cube.data(), data_path);
  }
  return cube;
}

inline void save_cube(const HyperCube& cube,
                      const std::filesystem::path& header_path,
                      CubeDType dtype = CubeDType::float64) {
  std::ofstream hdr(header_path);
  if (!hdr) {
    throw std::runtime_error("cannot write header file: " +
                             header_path.string());
  }
  hdr << "height=" << cube.height() << "\n"
      << "width=" << cube.width() << "\n"
      << "bands=" << cube.bands() << "\n"
      << "dtype=" << (dtype == CubeDType::float32 ? "float32" : "float64")
      << "\n"
      << "interleave=bsq\n"
      << "byteorder=little\n";
  if (!hdr.flush()) {
    throw std::runtime_error("failed to write header: " + header_path.string());
  }

  const auto data_path = detail::sibling_raw_path(header_path);
  std::ofstream raw(data_path, std::ios::binary);
  if (!raw) {
    throw std::runtime_error("cannot write data file: " + data_path.string());
  }
  if (dtype == CubeDType::float32) {
    detail::write_scalars_le<float>(raw, cube.data());
  } else {
    detail::write_scalars_le<double>(raw, cube.data());
  }
  if (!raw.flush()) {
    throw std::runtime_error("failed to write data: " + data_path.string());
  }
}

/// Score maps are stored as 1-band float32 cubes.
inline void save_map(const DetectionMap& map,
                     const std::filesystem::path& header_path) {
  HyperCube cube(map.height(), map.width(), 1);
  cube.data() = map.scores();
  save_cube(cube, header_path, CubeDType::float32);
}

inline DetectionMap load_map(const std::filesystem::path& header_path) {
  const HyperCube cube = load_cube(header_path);
  if (cube.bands() != 1) {
    throw std::runtime_error("score map must have exactly 1 band: " +
                             header_path.string());
  }
  DetectionMap map(cube.height(), cube.width());
  map.scores() = cube.data();
  return map;
}

namespace detail {

// One PGM header token, skipping whitespace and '#' comment lines.
inline std::string next_pgm_token(std::istream& in) {
  std::string tok;
  int ch = 0;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

inline GroundTruthMask load_mask_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open mask file: " + path.string());
  }
  if (next_pgm_token(in) != "P5") {
    throw std::runtime_error("mask " + path.string() +
                             " is not a binary PGM (magic P5 expected)");
  }
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_pgm_token(in));
    h = std::stoi(next_pgm_token(in));
    maxval = std::stoi(next_pgm_token(in));
  } catch (const std::exception&) {
    throw std::runtime_error("malformed PGM dimensions in " + path.string());
  }
  if (w <= 0 || h <= 0) {
    throw std::runtime_error("malformed PGM dimensions in " + path.string());
  }
  if (maxval <= 0 || maxval > 255) {
    throw std::runtime_error("unsupported PGM maxval " +
                             std::to_string(maxval) + " in " + path.string() +
                             " (8-bit only)");
  }
  std::vector<char> bytes(static_cast<std::size_t>(w) * h);
  if (!in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw std::runtime_error("truncated PGM pixel data in " + path.string());
  }
  GroundTruthMask mask(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto v = static_cast<unsigned char>(bytes[static_cast<std::size_t>(r) * w + c]);
      mask.at(r, c) = v > 0 ? 1 : 0;
    }
  }
  return mask;
}

inline GroundTruthMask load_mask_raw(const std::filesystem::path& header_path) {
  const auto kv = parse_kv_header(header_path);
  const int h = parse_positive_int(kv, "height", header_path);
  const int w = parse_positive_int(kv, "width", header_path);
  if (auto it = kv.find("dtype"); it != kv.end() && it->second != "uint8") {
    throw std::runtime_error("mask header dtype must be uint8: " +
                             header_path.string());
  }
  const auto data_path = sibling_raw_path(header_path);
  const auto bytes = read_file_bytes(data_path);
  if (bytes.size() != static_cast<std::size_t>(h) * w) {
    throw std::runtime_error("size mismatch for " + data_path.string());
  }
  GroundTruthMask mask(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto v = static_cast<unsigned char>(bytes[static_cast<std::size_t>(r) * w + c]);
      mask.at(r, c) = v > 0 ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace detail

/// Loads a ground-truth mask from a binary PGM (magic P5, 8-bit) or from a
/// key=value header with a sibling raw uint8 file. A stored byte > 0 marks
/// an anomaly pixel.
inline GroundTruthMask load_mask(
    const std::filesystem::path& path,
    std::optional<std::pair<int, int>> expected_shape = std::nullopt) {
  GroundTruthMask mask = [&] {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) {
      throw std::runtime_error("cannot open mask file: " + path.string());
    }
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    if (probe.gcount() == 2 && magic[0] == 'P' && magic[1] == '5') {
      return detail::load_mask_pgm(path);
    }
    return detail::load_mask_raw(path);
  }();
  if (expected_shape &&
      (mask.height() != expected_shape->first ||
       mask.width() != expected_shape->second)) {
    throw std::runtime_error(
        "mask shape " + std::to_string(mask.height()) + "x" +
        std::to_string(mask.width()) + " does not match expected " +
        std::to_string(expected_shape->first) + "x" +
        std::to_string(expected_shape->second));
  }
  return mask;
}

inline void save_mask_pgm(const GroundTruthMask& mask,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write mask file: " + path.string());
  }
  out << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      out.put(mask.at(r, c) ? static_cast<char>(255) : 0);
    }
  }
  if (!out.flush()) {
    throw std::runtime_error("failed to write mask: " + path.string());
  }
}

/// 8-bit preview of a score map: minmax-normalized, scaled to 0..255 with
/// round-half-up.
inline void save_map_preview_pgm(const DetectionMap& map,
                                 const std::filesystem::path& path) {
  const DetectionMap norm = minmax_normalize(map);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write preview file: " + path.string());
  }
  out << "P5\n" << map.width() << " " << map.height() << "\n255\n";
  for (double v : norm.scores()) {
    const int byte = static_cast<int>(std::floor(v * 255.0 + 0.5));
    out.put(static_cast<char>(std::clamp(byte, 0, 255)));
  }
  if (!out.flush()) {
    throw std::runtime_error("failed to write preview: " + path.string());
  }
}

}  // namespace ssfad
