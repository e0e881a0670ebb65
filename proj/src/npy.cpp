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

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "latentprobe/errors.hpp"
#include "latentprobe/raster_io.hpp"

namespace latentprobe {
namespace {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read without byte swapping");

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicSize = 6;
constexpr std::size_t kPreambleSize = kMagicSize + 2 + 2;

std::string header_value(const std::string& header, const std::string& key,
                         const std::filesystem::path& path) {
  const std::regex pattern("['\"]" + key + "['\"]\\s*:\\s*([^,()]+|\\([^)]*\\))");
  std::smatch match;
  if (!std::regex_search(header, match, pattern)) {
    throw FormatError(path.string() + ": NPY header has no '" + key + "' entry");
  }
  std::string value = match[1].str();
  while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back()))) value.pop_back();
  return value;
}

std::vector<std::size_t> parse_shape(const std::string& text, const std::filesystem::path& path) {
  if (text.size() < 2 || text.front() != '(' || text.back() != ')') {
    throw FormatError(path.string() + ": malformed NPY shape " + text);
  }
  std::vector<std::size_t> shape;
  std::stringstream in(text.substr(1, text.size() - 2));
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t");
    const std::string digits = item.substr(first, last - first + 1);
    if (digits.find_first_not_of("0123456789") != std::string::npos) {
      throw FormatError(path.string() + ": malformed NPY shape " + text);
    }
    shape.push_back(std::stoull(digits));
  }
  return shape;
}

std::string shape_literal(std::span<const std::size_t> shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  if (shape.size() == 1) out += ",";
  return out + ")";
}

void require_finite(std::span<const float> data, const std::filesystem::path& path) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw FormatError(path.string() + ": non-finite value at flat index " + std::to_string(i));
    }
  }
}

void require_unit_interval(std::span<const float> data, const std::filesystem::path& path,
                           const char* what) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data[i] >= 0.0f && data[i] <= 1.0f)) {
      throw FormatError(path.string() + ": " + what + " value " + std::to_string(data[i]) +
                        " at flat index " + std::to_string(i) + " is outside [0,1]");
    }
  }
}

}  // namespace

NpyArray read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  char preamble[kPreambleSize];
  if (!in.read(preamble, kPreambleSize)) throw FormatError(path.string() + ": truncated NPY file");
  if (std::memcmp(preamble, kMagic, kMagicSize) != 0) {
    throw FormatError(path.string() + ": bad NPY magic string");
  }
  const int major = static_cast<unsigned char>(preamble[6]);
  const int minor = static_cast<unsigned char>(preamble[7]);
  if (major != 1 || minor != 0) {
    throw FormatError(path.string() + ": unsupported NPY version " + std::to_string(major) + "." +
                      std::to_string(minor));
  }
  const std::size_t header_len = static_cast<unsigned char>(preamble[8]) |
                                 (static_cast<std::size_t>(static_cast<unsigned char>(preamble[9])) << 8);
  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len))) {
    throw FormatError(path.string() + ": truncated NPY header");
  }

  const std::string descr = header_value(header, "descr", path);
  if (descr != "'<f4'" && descr != "\"<f4\"") {
    throw FormatError(path.string() + ": unsupported dtype " + descr + " (expected '<f4')");
  }
  if (header_value(header, "fortran_order", path) != "False") {
    throw FormatError(path.string() + ": Fortran-ordered arrays are not supported");
  }

  NpyArray array;
  array.shape = parse_shape(header_value(header, "shape", path), path);
  if (array.shape.empty() || array.shape.size() > 3) {
    throw FormatError(path.string() + ": unsupported NPY rank " + std::to_string(array.shape.size()));
  }
  std::size_t count = 1;
  for (auto d : array.shape) count *= d;
  array.data.resize(count);
  if (!in.read(reinterpret_cast<char*>(array.data.data()),
               static_cast<std::streamsize>(count * sizeof(float)))) {
    throw FormatError(path.string() + ": NPY payload shorter than its shape");
  }
  return array;
}

void write_npy(const std::filesystem::path& path, std::span<const std::size_t> shape,
               std::span<const float> data) {
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': " +
                       shape_literal(shape) + ", }";
  // Pad so that the payload starts on a 64-byte boundary; the header ends with '\n'.
  const std::size_t unpadded = kPreambleSize + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMagic, kMagicSize);
  const char version[2] = {1, 0};
  out.write(version, 2);
  const char len[2] = {static_cast<char>(header.size() & 0xff),
                       static_cast<char>((header.size() >> 8) & 0xff)};
  out.write(len, 2);
  out << header;
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!out) throw IoError("failed writing " + path.string());
}

NpyTensor load_npy_f32(const std::filesystem::path& path) {
  NpyArray array = read_npy(path);
  require_finite(array.data, path);
  const auto& s = array.shape;
  switch (s.size()) {
    case 1: {
      require_unit_interval(array.data, path, "SE weight");
      return SEWeightVector(Eigen::Map<const Eigen::VectorXf>(array.data.data(),
                                                              static_cast<Eigen::Index>(s[0])));
    }
    case 2: {
      require_unit_interval(array.data, path, "probability");
      return ProbabilityMap(Eigen::Map<const ProbabilityMap>(
          array.data.data(), static_cast<Eigen::Index>(s[0]), static_cast<Eigen::Index>(s[1])));
    }
    default: {
      if (s[0] == 0) throw FormatError(path.string() + ": activation stack has K = 0");
      ActivationStack acts(static_cast<int>(s[0]), static_cast<int>(s[1]), static_cast<int>(s[2]));
      std::copy(array.data.begin(), array.data.end(), acts.values().data());
      return acts;
    }
  }
}

namespace {

template <typename T>
T expect_tensor(const std::filesystem::path& path, const char* what) {
  auto tensor = load_npy_f32(path);
  if (auto* value = std::get_if<T>(&tensor)) return std::move(*value);
  throw FormatError(path.string() + ": expected " + what);
}

}  // namespace

ActivationStack load_activations(const std::filesystem::path& path) {
  return expect_tensor<ActivationStack>(path, "a (K,H,W) activation stack");
}

ProbabilityMap load_probability(const std::filesystem::path& path) {
  return expect_tensor<ProbabilityMap>(path, "an (H,W) probability map");
}

SEWeightVector load_se_weights(const std::filesystem::path& path) {
  return expect_tensor<SEWeightVector>(path, "a (K,) SE weight vector");
}

void save_npy(const std::filesystem::path& path, const ActivationStack& acts) {
  const std::size_t shape[3] = {static_cast<std::size_t>(acts.maps()),
                                static_cast<std::size_t>(acts.height()),
                                static_cast<std::size_t>(acts.width())};
  write_npy(path, shape, std::span<const float>(acts.values().data(), acts.values().size()));
}

void save_npy(const std::filesystem::path& path, const ProbabilityMap& prob) {
  const std::size_t shape[2] = {static_cast<std::size_t>(prob.rows()),
                                static_cast<std::size_t>(prob.cols())};
  write_npy(path, shape, std::span<const float>(prob.data(), prob.size()));
}

void save_npy(const std::filesystem::path& path, const SEWeightVector& weights) {
  const std::size_t shape[1] = {static_cast<std::size_t>(weights.size())};
  write_npy(path, shape, std::span<const float>(weights.data(), weights.size()));
}

}  // namespace latentprobe
