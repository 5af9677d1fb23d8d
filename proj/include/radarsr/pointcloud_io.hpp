#pragma once

#include <filesystem>
#include <iosfwd>

#include "radarsr/pointcloud.hpp"

namespace radarsr {

// Text format: one point per line, "x y z [intensity]", '#' starts a comment.
// Binary format (little-endian): "PCB1", u32 count, then count*3 or count*4
// float32 values. The stride is inferred from the payload size.

void write_cloud_text(std::ostream& os, const PointCloud& cloud);
PointCloud read_cloud_text(std::istream& is);

void write_cloud_binary(std::ostream& os, const PointCloud& cloud);
PointCloud read_cloud_binary(std::istream& is);

/// Dispatches on extension: ".pcb" is binary, anything else is text.
void save_cloud(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud load_cloud(const std::filesystem::path& path);

}  // namespace radarsr
