#include "radarsr/pointcloud_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "binary_io.hpp"
#include "radarsr/errors.hpp"

namespace radarsr {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'B', '1'};

void put_number(std::ostream& os, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip form
  os.write(buf, res.ptr - buf);
}

}  // namespace

void write_cloud_text(std::ostream& os, const PointCloud& cloud) {
  const bool with_intensity = !cloud.empty() && cloud.has_intensity();
  os << "# x y z" << (with_intensity ? " intensity" : "") << '\n';
  for (const auto& p : cloud.points) {
    put_number(os, p.x);
    os << ' ';
    put_number(os, p.y);
    os << ' ';
    put_number(os, p.z);
    if (with_intensity) {
      os << ' ';
      put_number(os, *p.intensity);
    }
    os << '\n';
  }
}

PointCloud read_cloud_text(std::istream& is) {
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<double> values;
    std::string token;
    while (ss >> token) {
      double v = 0;
      const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
      if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw FormatError("line " + std::to_string(lineno) + ": bad number '" + token + "'");
      }
      values.push_back(v);
    }
    if (values.empty()) continue;
    if (values.size() != 3 && values.size() != 4) {
      throw FormatError("line " + std::to_string(lineno) + ": expected 3 or 4 values");
    }
    Point3 p{values[0], values[1], values[2], std::nullopt};
    if (values.size() == 4) p.intensity = values[3];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw FormatError("line " + std::to_string(lineno) + ": non-finite coordinate");
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

void write_cloud_binary(std::ostream& os, const PointCloud& cloud) {
  const bool with_intensity = !cloud.empty() && cloud.has_intensity();
  os.write(kMagic, 4);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cloud.size()));
  for (const auto& p : cloud.points) {
    detail::write_le<float>(os, static_cast<float>(p.x));
    detail::write_le<float>(os, static_cast<float>(p.y));
    detail::write_le<float>(os, static_cast<float>(p.z));
    if (with_intensity) detail::write_le<float>(os, static_cast<float>(*p.intensity));
  }
}

PointCloud read_cloud_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) throw FormatError("missing PCB1 magic");
  const auto count = detail::read_le<std::uint32_t>(is);
  const std::string payload{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  std::size_t stride = 0;
  if (payload.size() == std::size_t{count} * 12) {
    stride = 3;
  } else if (payload.size() == std::size_t{count} * 16) {
    stride = 4;
  } else {
    throw FormatError("PCB1 payload size does not match point count");
  }
  std::istringstream body(payload);
  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Point3 p;
    p.x = detail::read_le<float>(body);
    p.y = detail::read_le<float>(body);
    p.z = detail::read_le<float>(body);
    if (stride == 4) p.intensity = detail::read_le<float>(body);
    cloud.points.push_back(p);
  }
  return cloud;
}

void save_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  if (path.extension() == ".pcb") {
    write_cloud_binary(os, cloud);
  } else {
    write_cloud_text(os, cloud);
  }
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

PointCloud load_cloud(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  PointCloud cloud = path.extension() == ".pcb" ? read_cloud_binary(is) : read_cloud_text(is);
  cloud.frame_id = path.stem().string();
  return cloud;
}

}  // namespace radarsr
