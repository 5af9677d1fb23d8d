#include "radarsr/checkpoint.hpp"

#include <algorithm>
#include <fstream>

#include "binary_io.hpp"
#include "radarsr/errors.hpp"

namespace radarsr {

namespace {
constexpr char kMagic[4] = {'S', 'R', 'D', 'M'};
constexpr std::uint32_t kMaxDepth = 16;
}  // namespace

void write_checkpoint(std::ostream& os, const DenoiserModel& model) {
  const DenoiserArch& a = model.arch();
  os.write(kMagic, 4);
  detail::write_le<std::uint32_t>(os, kCheckpointVersion);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.height));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.width));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.time_dim));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.depth()));
  for (int w : a.widths) detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(w));
  const Eigen::VectorXd& params = model.parameters();
  detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) detail::write_le<double>(os, params[i]);
}

DenoiserModel read_checkpoint(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) throw FormatError("checkpoint: missing SRDM magic");
  const auto version = detail::read_le<std::uint32_t>(is);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  DenoiserArch a;
  a.height = static_cast<int>(detail::read_le<std::uint32_t>(is));
  a.width = static_cast<int>(detail::read_le<std::uint32_t>(is));
  a.time_dim = static_cast<int>(detail::read_le<std::uint32_t>(is));
  const auto depth = detail::read_le<std::uint32_t>(is);
  if (depth == 0 || depth > kMaxDepth) throw FormatError("checkpoint: implausible depth");
  a.widths.resize(depth);
  for (auto& w : a.widths) w = static_cast<int>(detail::read_le<std::uint32_t>(is));
  const auto count = detail::read_le<std::uint64_t>(is);
  // Validate the architecture before trusting `count` for an allocation.
  const DenoiserModel shape(a, 0);
  if (count != static_cast<std::uint64_t>(shape.parameter_count())) {
    throw FormatError("checkpoint: parameter count does not match architecture");
  }
  Eigen::VectorXd params(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < params.size(); ++i) params[i] = detail::read_le<double>(is);
  return DenoiserModel(a, std::move(params));
}

void save_checkpoint(const std::filesystem::path& path, const DenoiserModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_checkpoint(os, model);
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

DenoiserModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  return read_checkpoint(is);
}

}  // namespace radarsr
