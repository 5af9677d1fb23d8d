#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "radarsr/bev.hpp"

namespace radarsr {

/// 8-bit grayscale raster, row-major.
struct Gray8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;
  bool operator==(const Gray8&) const = default;
};

/// round(v * 255) per pixel, after clamping to [0, 1].
Gray8 quantize(const Image& pixels);
Image dequantize(const Gray8& img);

void write_pgm(const std::filesystem::path& path, const Gray8& img);
Gray8 read_pgm(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Gray8& img);
Gray8 read_png(const std::filesystem::path& path);

/// Writes `<stem>.pgm`, `<stem>.png` and the grid sidecar `<stem>.bev`.
void save_bev(const std::filesystem::path& stem, const BevImage& img);
/// Reads `<stem>.pgm` (or `<stem>.png` if no PGM exists) plus `<stem>.bev`.
BevImage load_bev(const std::filesystem::path& stem);

}  // namespace radarsr
