#pragma once

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "fmo/image.hpp"

namespace fmo {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

/// Loads an 8- or 16-bit PNG (gray, RGB or RGBA). Integer codes map to
/// [0,1] by division by the maximum code.
inline Image load_png(const std::string& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error("load_png: cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("load_png: png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("load_png: png_create_info_struct failed");
  }
  std::vector<png_bytep> rows;
  std::vector<png_byte> buf;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("load_png: unreadable file " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // little-endian in memory
  png_read_update_info(png, info);

  bit_depth = png_get_bit_depth(png, info);
  int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3 && channels != 4) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("load_png: unsupported channel count " +
                std::to_string(channels));
  }

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buf.resize(rowbytes * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(static_cast<int>(w), static_cast<int>(h), channels);
  if (bit_depth == 16) {
    const double max_code = 65535.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
      const png_byte* p = buf.data() + 2 * i;
      unsigned code = static_cast<unsigned>(p[0]) |
                      (static_cast<unsigned>(p[1]) << 8);
      img.data[i] = code / max_code;
    }
  } else {
    for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = buf[i] / 255.0;
  }
  return img;
}

/// Saves an image whose values lie in [0,1], quantizing by round(v*max_code).
/// bit_depth must be 8 or 16.
inline void save_png(const Image& img, const std::string& path,
                     int bit_depth = 8) {
  if (bit_depth != 8 && bit_depth != 16)
    throw Error("save_png: bit depth must be 8 or 16");
  for (double v : img.data)
    if (!(v >= 0.0 && v <= 1.0))
      throw Error("save_png: pixel value outside [0,1]");

  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("save_png: cannot open " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("save_png: png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("save_png: png_create_info_struct failed");
  }
  std::vector<png_bytep> rows;
  std::vector<png_byte> buf;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("save_png: write failed for " + path);
  }
  png_init_io(png, fp.get());

  int color_type = img.channels == 1   ? PNG_COLOR_TYPE_GRAY
                   : img.channels == 3 ? PNG_COLOR_TYPE_RGB
                                       : PNG_COLOR_TYPE_RGBA;
  png_set_IHDR(png, info, img.width, img.height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);

  const std::size_t bytes_per_value = bit_depth / 8;
  const std::size_t rowbytes =
      static_cast<std::size_t>(img.width) * img.channels * bytes_per_value;
  buf.resize(rowbytes * img.height);
  if (bit_depth == 16) {
    const double max_code = 65535.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
      unsigned code = static_cast<unsigned>(std::lround(img.data[i] * max_code));
      buf[2 * i] = static_cast<png_byte>(code & 0xff);
      buf[2 * i + 1] = static_cast<png_byte>(code >> 8);
    }
  } else {
    for (std::size_t i = 0; i < img.size(); ++i)
      buf[i] = static_cast<png_byte>(std::lround(img.data[i] * 255.0));
  }
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = buf.data() + y * rowbytes;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace fmo
