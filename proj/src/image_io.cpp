#include "radarsr/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include <png.h>

#include "radarsr/errors.hpp"

namespace radarsr {

namespace fs = std::filesystem;

Gray8 quantize(const Image& pixels) {
  Gray8 out;
  out.height = static_cast<int>(pixels.rows());
  out.width = static_cast<int>(pixels.cols());
  out.data.resize(static_cast<std::size_t>(pixels.size()));
  for (Eigen::Index i = 0; i < pixels.size(); ++i) {
    const double v = std::clamp(pixels.data()[i], 0.0, 1.0);
    out.data[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

Image dequantize(const Gray8& img) {
  Image out(img.height, img.width);
  for (std::size_t i = 0; i < img.data.size(); ++i) out.data()[i] = img.data[i] / 255.0;
  return out;
}

void write_pgm(const fs::path& path, const Gray8& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& is) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
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

}  // namespace

Gray8 read_pgm(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  if (pgm_token(is) != "P5") throw FormatError(path.string() + ": not a binary PGM");
  Gray8 img;
  try {
    img.width = std::stoi(pgm_token(is));
    img.height = std::stoi(pgm_token(is));
    if (std::stoi(pgm_token(is)) != 255) throw FormatError(path.string() + ": only maxval 255 is supported");
  } catch (const std::logic_error&) {
    throw FormatError(path.string() + ": malformed PGM header");
  }
  if (img.width <= 0 || img.height <= 0) throw FormatError(path.string() + ": bad PGM dimensions");
  img.data.resize(static_cast<std::size_t>(img.width) * img.height);
  if (!is.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()))) {
    throw FormatError(path.string() + ": truncated PGM data");
  }
  return img;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const fs::path& path, const Gray8& img) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("cannot open '" + path.string() + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng failed writing '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < img.height; ++r) {
    png_write_row(png, img.data.data() + static_cast<std::size_t>(r) * img.width);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Gray8 read_png(const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error("cannot open '" + path.string() + "'");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng initialization failed");
  }
  Gray8 img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("libpng failed reading '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": expected 8-bit grayscale PNG");
  }
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.data.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int r = 0; r < img.height; ++r) {
    png_read_row(png, img.data.data() + static_cast<std::size_t>(r) * img.width, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

namespace {

fs::path with_suffix(const fs::path& stem, const char* suffix) { return fs::path(stem.string() + suffix); }

}  // namespace

void save_bev(const fs::path& stem, const BevImage& img) {
  const Gray8 gray = quantize(img.pixels);
  write_pgm(with_suffix(stem, ".pgm"), gray);
  write_png(with_suffix(stem, ".png"), gray);
  img.grid.to_config().save(with_suffix(stem, ".bev"));
}

BevImage load_bev(const fs::path& stem) {
  BevImage img;
  img.grid = BevGrid::from_config(KeyValueConfig::load(with_suffix(stem, ".bev")));
  const fs::path pgm = with_suffix(stem, ".pgm");
  const Gray8 gray = fs::exists(pgm) ? read_pgm(pgm) : read_png(with_suffix(stem, ".png"));
  if (gray.width != img.grid.width || gray.height != img.grid.height) {
    throw ShapeMismatch(stem.string() + ": raster size disagrees with grid sidecar");
  }
  img.pixels = dequantize(gray);
  return img;
}

}  // namespace radarsr
