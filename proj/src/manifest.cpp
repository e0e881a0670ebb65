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

#include <fstream>

#include <json.hpp>

#include "latentprobe/errors.hpp"
#include "latentprobe/raster_io.hpp"

namespace latentprobe {
namespace {

using nlohmann::json;

std::filesystem::path resolve(const json& tile, const char* key, const std::filesystem::path& base) {
  if (!tile.contains(key) || tile[key].is_null()) return {};
  if (!tile[key].is_string()) throw FormatError(std::string("manifest key '") + key + "' must be a string");
  std::filesystem::path p = tile[key].get<std::string>();
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

TileEntry parse_tile(const json& tile, const std::filesystem::path& base, std::string name) {
  if (!tile.is_object()) throw FormatError("manifest tile must be a JSON object");
  TileEntry entry;
  entry.name = tile.contains("name") ? tile["name"].get<std::string>() : std::move(name);
  entry.image = resolve(tile, "image", base);
  entry.labels = resolve(tile, "labels", base);
  entry.activations = resolve(tile, "activations", base);
  entry.se_weights = resolve(tile, "se_weights", base);
  entry.probability = resolve(tile, "probability", base);
  if (tile.contains("gsd_cm") && !tile["gsd_cm"].is_null()) {
    entry.gsd_cm = tile["gsd_cm"].get<double>();
  }
  return entry;
}

}  // namespace

TileManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  const std::string stem = path.stem().string();
  TileManifest manifest;
  try {
    if (doc.is_array()) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        manifest.push_back(parse_tile(doc[i], base, stem + "_" + std::to_string(i)));
      }
    } else {
      manifest.push_back(parse_tile(doc, base, stem));
    }
  } catch (const json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  return manifest;
}

void save_manifest(const TileManifest& manifest, const std::filesystem::path& path) {
  auto to_json = [](const TileEntry& e) {
    json tile;
    tile["name"] = e.name;
    auto put = [&](const char* key, const std::filesystem::path& p) {
      if (!p.empty()) tile[key] = p.string();
    };
    put("image", e.image);
    put("labels", e.labels);
    put("activations", e.activations);
    put("se_weights", e.se_weights);
    put("probability", e.probability);
    if (e.gsd_cm) tile["gsd_cm"] = *e.gsd_cm;
    return tile;
  };
  json doc;
  if (manifest.size() == 1) {
    doc = to_json(manifest.front());
  } else {
    doc = json::array();
    for (const auto& e : manifest) doc.push_back(to_json(e));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace latentprobe
