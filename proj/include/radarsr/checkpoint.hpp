#pragma once

#include <filesystem>
#include <iosfwd>

#include "radarsr/score_model.hpp"

namespace radarsr {

/// Binary checkpoint, little-endian:
///   "SRDM" | u32 version | u32 height | u32 width | u32 time_dim |
///   u32 depth | depth x u32 widths | u64 count | count x f64 parameters
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const DenoiserModel& model);
DenoiserModel read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const DenoiserModel& model);
DenoiserModel load_checkpoint(const std::filesystem::path& path);

}  // namespace radarsr
