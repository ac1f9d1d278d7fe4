#pragma once

// 8-bit rasters, fixed colour maps and file output (PNG via libpng, PGM/PPM fallback).

#include <qkdrates/errors.hpp>
#include <qkdrates/linalg.hpp>

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qkdrates {

struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> pixels;  // row-major, top row first

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, fill) {
    detail::require(w > 0 && h > 0, "image dimensions must be positive");
    detail::require(c == 1 || c == 3, "image must have 1 or 3 channels");
  }

  std::uint8_t* at(int x, int y) { return &pixels[(static_cast<std::size_t>(y) * width + x) * channels]; }
  const std::uint8_t* at(int x, int y) const { return &pixels[(static_cast<std::size_t>(y) * width + x) * channels]; }
};

enum class Palette { viridis, gray };
enum class ImageFormat { png, pnm };

inline Palette parse_palette(std::string_view s) {
  if (s == "viridis") return Palette::viridis;
  if (s == "gray" || s == "grey") return Palette::gray;
  throw ValidationError("unknown palette '" + std::string(s) + "' (expected viridis or gray)");
}

inline ImageFormat parse_image_format(std::string_view s) {
  if (s == "png") return ImageFormat::png;
  if (s == "pnm" || s == "pgm" || s == "ppm") return ImageFormat::pnm;
  throw ValidationError("unknown image format '" + std::string(s) + "' (expected png or pnm)");
}

inline std::string_view file_extension(ImageFormat f, int channels) {
  if (f == ImageFormat::png) return ".png";
  return channels == 1 ? ".pgm" : ".ppm";
}

using Rgb = std::array<std::uint8_t, 3>;

namespace detail {

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// Nine samples of matplotlib's viridis, interpolated linearly.
inline constexpr std::array<std::array<double, 3>, 9> kViridis{{
    {0.267004, 0.004874, 0.329415},
    {0.282623, 0.140926, 0.457517},
    {0.253935, 0.265254, 0.529983},
    {0.206756, 0.371758, 0.553117},
    {0.163625, 0.471133, 0.558148},
    {0.127568, 0.566949, 0.550556},
    {0.134692, 0.658636, 0.517649},
    {0.266941, 0.748751, 0.440573},
    {0.993248, 0.906157, 0.143936},
}};

}  // namespace detail

inline Rgb viridis(double t) {
  t = std::clamp(t, 0.0, 1.0) * (detail::kViridis.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), detail::kViridis.size() - 2);
  const double f = t - static_cast<double>(i);
  Rgb out{};
  for (int c = 0; c < 3; ++c)
    out[c] = detail::to_byte((1.0 - f) * detail::kViridis[i][c] + f * detail::kViridis[i + 1][c]);
  return out;
}

/// Full-saturation hue wheel; phase 0 and 2π map to the same colour.
inline Rgb phase_colour(double phase) {
  double h = std::fmod(phase, kTwoPi);
  if (h < 0) h += kTwoPi;
  h = h / kTwoPi * 6.0;
  const int sector = std::min(static_cast<int>(h), 5);
  const double f = h - sector;
  const double rise = f, fall = 1.0 - f;
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = 1; g = rise; break;
    case 1: r = fall; g = 1; break;
    case 2: g = 1; b = rise; break;
    case 3: g = fall; b = 1; break;
    case 4: r = rise; b = 1; break;
    default: r = 1; b = fall; break;
  }
  return {detail::to_byte(r), detail::to_byte(g), detail::to_byte(b)};
}

/// Writes an 8-bit gray or RGB PNG.
inline void write_png(const Image& img, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng initialisation failed for " + path.string());
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed writing PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.pixels.data() + stride * static_cast<std::size_t>(y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(fp.get()) != 0) throw std::runtime_error("failed writing PNG " + path.string());
}

/// Binary PGM (1 channel) or PPM (3 channels).
inline void write_pnm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline void write_image(const Image& img, const std::filesystem::path& path, ImageFormat format) {
  if (format == ImageFormat::png)
    write_png(img, path);
  else
    write_pnm(img, path);
}

/// Nearest-neighbour resample to w×h.
inline Image resample(const Image& src, int w, int h) {
  Image out(w, h, src.channels);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(src.height - 1, static_cast<int>((y + 0.5) * src.height / h));
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(src.width - 1, static_cast<int>((x + 0.5) * src.width / w));
      std::copy_n(src.at(sx, sy), src.channels, out.at(x, y));
    }
  }
  return out;
}

/// Copies `tile` into `canvas` with its top-left corner at (x0, y0); gray tiles are expanded to RGB.
inline void blit(Image& canvas, const Image& tile, int x0, int y0) {
  for (int y = 0; y < tile.height; ++y)
    for (int x = 0; x < tile.width; ++x) {
      const std::uint8_t* s = tile.at(x, y);
      std::uint8_t* d = canvas.at(x0 + x, y0 + y);
      for (int c = 0; c < canvas.channels; ++c) d[c] = s[tile.channels == 1 ? 0 : c];
    }
}

}  // namespace qkdrates
