// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <png.h>

#include <nlohmann/json.hpp>

#include "depthsight/depthmap.hpp"
#include "depthsight/errors.hpp"
#include "depthsight/image.hpp"

namespace depthsight {

static_assert(std::endian::native == std::endian::little,
              "image I/O assumes a little-endian host");

// ---------------------------------------------------------------------------
// PFM: float depth maps in meters. Grayscale "Pf", negative scale =
// little-endian, rows stored bottom-to-top. Invalid pixels are written as
// NaN; on read, any non-finite or non-positive value becomes invalid.
// ---------------------------------------------------------------------------

inline void write_pfm(const std::filesystem::path& path, const DepthMap& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "Pf\n" << m.width() << " " << m.height() << "\n-1.0\n";
  std::vector<float> row(m.width());
  for (int y = m.height() - 1; y >= 0; --y) {
    for (int x = 0; x < m.width(); ++x) {
      const double z = m.at(x, y);
      row[x] = DepthMap::is_valid(z) ? static_cast<float>(z)
                                     : std::numeric_limits<float>::quiet_NaN();
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

namespace detail {

inline std::string next_pnm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {  // comment to end of line
      while (in.get(c) && c != '\n') {}
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

inline float byteswap_float(float f) {
  std::uint32_t u = std::bit_cast<std::uint32_t>(f);
  u = ((u & 0xFF000000u) >> 24) | ((u & 0x00FF0000u) >> 8) |
      ((u & 0x0000FF00u) << 8) | ((u & 0x000000FFu) << 24);
  return std::bit_cast<float>(u);
}

}  // namespace detail

inline DepthMap read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string magic = detail::next_pnm_token(in);
  if (magic != "Pf") {
    throw UnknownFormat(path.string() + ": expected grayscale PFM magic 'Pf', got '" +
                        magic + "'");
  }
  int w = 0, h = 0;
  double scale = 0;
  try {
    w = std::stoi(detail::next_pnm_token(in));
    h = std::stoi(detail::next_pnm_token(in));
    scale = std::stod(detail::next_pnm_token(in));
  } catch (const std::exception&) {
    throw ParseError(path.string() + ": malformed PFM header");
  }
  if (w < 1 || h < 1 || scale == 0) throw ParseError(path.string() + ": bad PFM header values");
  const bool file_big_endian = scale > 0;

  DepthMap m(w, h);
  std::vector<float> row(w);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw ParseError(path.string() + ": truncated PFM pixel data");
    for (int x = 0; x < w; ++x) {
      float f = row[x];
      if (file_big_endian) f = detail::byteswap_float(f);
      if (std::isfinite(f) && f > 0) m.set(x, y, f);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// PGM: binary P5, maxval 255. The single-channel carrier for quantized
// depth (channels of a quantized image are equal by construction) and for
// segmentation masks.
// ---------------------------------------------------------------------------

inline void write_pgm(const std::filesystem::path& path, const Image8& img) {
  if (img.channels != 1 && !channels_equal(img)) {
    throw ChannelMismatch("write_pgm: multi-channel image with unequal channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const char v = static_cast<char>(img.at(x, y, 0));
      out.write(&v, 1);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline Image8 read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string magic = detail::next_pnm_token(in);
  if (magic != "P5") {
    throw UnknownFormat(path.string() + ": expected binary PGM magic 'P5', got '" +
                        magic + "'");
  }
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(detail::next_pnm_token(in));
    h = std::stoi(detail::next_pnm_token(in));
    maxval = std::stoi(detail::next_pnm_token(in));
  } catch (const std::exception&) {
    throw ParseError(path.string() + ": malformed PGM header");
  }
  if (w < 1 || h < 1) throw ParseError(path.string() + ": bad PGM size");
  if (maxval != 255) {
    throw UnknownFormat(path.string() + ": only 8-bit PGM supported (maxval 255)");
  }
  Image8 img(w, h, 1);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (!in) throw ParseError(path.string() + ": truncated PGM pixel data");
  return img;
}

// ---------------------------------------------------------------------------
// PNG via libpng: the 3-channel carrier for quantized depth.
// ---------------------------------------------------------------------------

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

inline void write_png(const std::filesystem::path& path, const Image8& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw InternalError("write_png: only 1- or 3-channel images");
  }
  detail::FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::vector<png_bytep> rows(img.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng write error for " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);  // pin for byte-stable output
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = const_cast<png_bytep>(&img.data[static_cast<std::size_t>(y) * img.width *
                                              img.channels]);
  }
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline Image8 read_png(const std::filesystem::path& path) {
  detail::FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  Image8 img;
  std::vector<png_bytep> rows;
  rows.reserve(1);  // allocated before the jump target below
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("libpng read error for " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int ch = png_get_channels(png, info);
  if (ch != 1 && ch != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnknownFormat(path.string() + ": unsupported PNG channel count " +
                        std::to_string(ch));
  }
  img = Image8(w, h, ch);
  rows.resize(h);
  for (int y = 0; y < h; ++y) {
    rows[y] = &img.data[static_cast<std::size_t>(y) * w * ch];
  }
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

// ---------------------------------------------------------------------------
// Quantization sidecar: JSON next to an 8-bit image so dequantization is
// lossless in metadata. For image X the sidecar is X.json.
// ---------------------------------------------------------------------------

inline std::filesystem::path sidecar_path(const std::filesystem::path& image_path) {
  return std::filesystem::path(image_path.string() + ".json");
}

inline void write_quantization_sidecar(const std::filesystem::path& image_path,
                                       const QuantizationSpec& q) {
  const nlohmann::json j{{"z_min", q.z_min}, {"z_max", q.z_max},
                         {"levels", QuantizationSpec::kLevels}};
  std::ofstream out(sidecar_path(image_path), std::ios::binary);
  if (!out) throw IoError("cannot open " + sidecar_path(image_path).string());
  out << j.dump(2) << "\n";
}

inline std::optional<QuantizationSpec> read_quantization_sidecar(
    const std::filesystem::path& image_path) {
  const std::filesystem::path p = sidecar_path(image_path);
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    QuantizationSpec q;
    q.z_min = j.at("z_min").get<double>();
    q.z_max = j.at("z_max").get<double>();
    q.validate();
    return q;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(p.string() + ": bad quantization sidecar: " + e.what());
  }
}

}  // namespace depthsight
