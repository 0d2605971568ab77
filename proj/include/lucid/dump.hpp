#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lucid/amfm.hpp"
#include "lucid/image.hpp"

namespace lucid {

/// Writes named raster layers into one directory and remembers how each was
/// scaled, so the manifest can restore physical values.
class LayerWriter {
 public:
  explicit LayerWriter(std::filesystem::path dir);

  /// Per-layer min/max normalization.
  void add_normalized(const std::string& name, const ImageGrid& layer);

  /// Fixed range, e.g. [-pi, pi] for phase.
  void add_fixed(const std::string& name, const ImageGrid& layer, LayerScale scale);

  std::size_t size() const { return layers_.size(); }
  const std::filesystem::path& dir() const { return dir_; }

  /// Array of {name, file, min, max, mapping}.
  nlohmann::json layers_json() const;

 private:
  std::filesystem::path dir_;
  nlohmann::json layers_ = nlohmann::json::array();
};

/// Adds A (min/max), phase and both frequency axes (fixed [-pi, pi]) of
/// every component, named "<prefix>channelNN_<quantity>".
void add_decomposition_layers(LayerWriter& writer, const Decomposition& decomposition,
                              const std::string& prefix = "");

/// Adds the export_features stack with fixed ranges for |omega| and
/// orientation.
void add_feature_layers(LayerWriter& writer, const std::vector<FeatureLayer>& features);

/// Pretty-printed, newline-terminated JSON. Throws IoError.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace lucid
