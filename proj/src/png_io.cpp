/* Copyright 2026 The latentprobe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <png.h>

#include <cstring>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "latentprobe/errors.hpp"
#include "latentprobe/raster_io.hpp"

namespace latentprobe {
namespace {

struct ImageCloser {
  void operator()(png_image* image) const { png_image_free(image); }
};

// Opens `path` with the simplified libpng API and converts to `format`.
std::vector<std::uint8_t> decode_png(const std::filesystem::path& path, png_uint_32 format,
                                     int* width, int* height, png_uint_32* source_format) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  }
  std::unique_ptr<png_image, ImageCloser> guard(&image);
  if (source_format != nullptr) *source_format = image.format;
  image.format = format;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  guard.release();
  *width = static_cast<int>(image.width);
  *height = static_cast<int>(image.height);
  return pixels;
}

void encode_png(const std::filesystem::path& path, png_uint_32 format, int width, int height,
                const std::vector<std::uint8_t>& pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw IoError("cannot write PNG " + path.string() + ": " + message);
  }
}

}  // namespace

LabelMap load_label_png(const std::filesystem::path& path, const ColorPalette& palette) {
  int width = 0, height = 0;
  png_uint_32 source_format = 0;
  const auto rgb = decode_png(path, PNG_FORMAT_RGB, &width, &height, &source_format);
  if (source_format & PNG_FORMAT_FLAG_ALPHA) {
    throw FormatError("label PNG " + path.string() + " has an alpha channel");
  }
  LabelMap labels(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t o = 3 * (static_cast<std::size_t>(y) * width + x);
      const Rgb color{rgb[o], rgb[o + 1], rgb[o + 2]};
      const auto id = palette.lookup(color);
      if (!id) {
        std::ostringstream msg;
        msg << "unknown color (" << int(color[0]) << ',' << int(color[1]) << ','
            << int(color[2]) << ") at (" << x << ',' << y << ')';
        throw FormatError(msg.str());
      }
      labels(y, x) = *id;
    }
  }
  return labels;
}

void save_label_png(const LabelMap& labels, const ColorPalette& palette,
                    const std::filesystem::path& path) {
  const int width = static_cast<int>(labels.cols());
  const int height = static_cast<int>(labels.rows());
  std::vector<std::uint8_t> rgb(3 * labels.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Label id = labels(y, x);
      if (id < 0 || id >= palette.size()) {
        throw std::out_of_range("label " + std::to_string(id) + " at (" + std::to_string(x) +
                                "," + std::to_string(y) + ") is not in the palette");
      }
      const Rgb& color = palette[id].color;
      std::memcpy(&rgb[3 * (static_cast<std::size_t>(y) * width + x)], color.data(), 3);
    }
  }
  encode_png(path, PNG_FORMAT_RGB, width, height, rgb);
}

BinaryMask load_mask_png(const std::filesystem::path& path) {
  int width = 0, height = 0;
  const auto gray = decode_png(path, PNG_FORMAT_GRAY, &width, &height, nullptr);
  BinaryMask mask(height, width);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = gray[i] != 0 ? 1 : 0;
  return mask;
}

void save_mask_png(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> gray(mask.size());
  for (Eigen::Index i = 0; i < mask.size(); ++i) gray[i] = mask.data()[i] ? 255 : 0;
  encode_png(path, PNG_FORMAT_GRAY, static_cast<int>(mask.cols()), static_cast<int>(mask.rows()),
             gray);
}

bool png_has_color(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png_image_free(&image);
  return color;
}

}  // namespace latentprobe
