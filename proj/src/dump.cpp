#include <cstdio>
#include <fstream>
#include <numbers>

#include "lucid/dump.hpp"
#include "lucid/error.hpp"

namespace lucid {
namespace {

constexpr double kPi = std::numbers::pi;

std::string channel_tag(int id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "channel%02d", id);
  return buf;
}

}  // namespace

LayerWriter::LayerWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

void LayerWriter::add_normalized(const std::string& name, const ImageGrid& layer) {
  const std::string file = name + ".pgm";
  const LayerScale scale = save_normalized_raster(layer, dir_ / file);
  layers_.push_back({{"name", name}, {"file", file}, {"min", scale.min}, {"max", scale.max}, {"mapping", "minmax"}});
}

void LayerWriter::add_fixed(const std::string& name, const ImageGrid& layer, LayerScale scale) {
  const std::string file = name + ".pgm";
  save_scaled_raster(layer, scale, dir_ / file);
  layers_.push_back({{"name", name}, {"file", file}, {"min", scale.min}, {"max", scale.max}, {"mapping", "fixed"}});
}

nlohmann::json LayerWriter::layers_json() const { return layers_; }

void add_decomposition_layers(LayerWriter& writer, const Decomposition& decomposition, const std::string& prefix) {
  for (const AmfmComponent& c : decomposition.components) {
    const std::string tag = prefix + channel_tag(c.channel_id) + "_";
    writer.add_normalized(tag + "amplitude", c.amplitude);
    writer.add_fixed(tag + "phase", c.phase, {-kPi, kPi});
    writer.add_fixed(tag + "omega1", c.omega1, {-kPi, kPi});
    writer.add_fixed(tag + "omega2", c.omega2, {-kPi, kPi});
  }
}

void add_feature_layers(LayerWriter& writer, const std::vector<FeatureLayer>& features) {
  for (const FeatureLayer& f : features) {
    if (f.name.ends_with("amplitude")) {
      writer.add_normalized(f.name, f.data);
    } else if (f.name.ends_with("frequency_magnitude")) {
      writer.add_fixed(f.name, f.data, {0.0, kPi * std::numbers::sqrt2});
    } else {
      writer.add_fixed(f.name, f.data, {-kPi, kPi});
    }
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << value.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what(), e.byte);
  }
}

}  // namespace lucid
