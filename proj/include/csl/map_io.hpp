#pragma once

#include "csl/dense_map.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace csl {

// Binary grid layout, little endian:
//   uint32 width, uint32 height,
//   then width*height records in row-major order of
//   float32 x, float32 y, float32 z, uint8 mask.
void write_point_map(std::ostream& os, const PointMap& map);
PointMap read_point_map(std::istream& is);

void save_point_map(const std::filesystem::path& path, const PointMap& map);
PointMap load_point_map(const std::filesystem::path& path);

/// Colour codes X, Y, Z as R, G, B, mapping [lo, hi] to [0, 255] per channel.
/// Without a range, the symmetric bound max|coordinate| over valid pixels is
/// used. Invalid pixels are black.
void save_point_map_png(const std::filesystem::path& path, const PointMap& map,
                        std::optional<double> half_range = std::nullopt);

}  // namespace csl
