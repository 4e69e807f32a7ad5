#include "csl/map_io.hpp"

#include <png.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

namespace csl {

namespace {

static_assert(std::endian::native == std::endian::little, "map_io assumes a little-endian host");

template <typename T> void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T> T get(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw std::runtime_error("read_point_map: truncated stream");
  return v;
}

}  // namespace

void write_point_map(std::ostream& os, const PointMap& map) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(map.width()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(map.height()));
  for (std::size_t k = 0; k < map.size(); ++k) {
    for (int c = 0; c < 3; ++c) put<float>(os, static_cast<float>(map[k][c]));
    put<std::uint8_t>(os, map.valid(k) ? 1 : 0);
  }
  if (!os) throw std::runtime_error("write_point_map: write failed");
}

PointMap read_point_map(std::istream& is) {
  const auto w = get<std::uint32_t>(is);
  const auto h = get<std::uint32_t>(is);
  if (w > (1u << 16) || h > (1u << 16)) throw std::runtime_error("read_point_map: implausible size");
  PointMap map(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t k = 0; k < map.size(); ++k) {
    Vec3d v;
    for (int c = 0; c < 3; ++c) v[c] = get<float>(is);
    const auto m = get<std::uint8_t>(is);
    if (m > 1) throw std::runtime_error("read_point_map: bad mask byte");
    if (m) {
      if (!v.allFinite()) throw std::runtime_error("read_point_map: non-finite valid entry");
      map.set(k, v);
    }
  }
  return map;
}

void save_point_map(const std::filesystem::path& path, const PointMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  write_point_map(os, map);
}

PointMap load_point_map(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_point_map(is);
}

void save_point_map_png(const std::filesystem::path& path, const PointMap& map,
                        std::optional<double> half_range) {
  double r = half_range.value_or(0.0);
  if (!half_range)
    for (std::size_t k = 0; k < map.size(); ++k)
      if (map.valid(k)) r = std::max(r, map[k].cwiseAbs().maxCoeff());
  if (!(r > 0)) r = 1.0;

  const int w = map.width(), h = map.height();
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3, 0);
  for (std::size_t k = 0; k < map.size(); ++k) {
    if (!map.valid(k)) continue;
    for (int c = 0; c < 3; ++c) {
      const double u = std::clamp(0.5 + 0.5 * map[k][c] / r, 0.0, 1.0);
      rgb[3 * k + c] = static_cast<std::uint8_t>(std::lround(255.0 * u));
    }
  }

  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng write failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int j = 0; j < h; ++j) png_write_row(png, rgb.data() + static_cast<std::size_t>(j) * w * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace csl
