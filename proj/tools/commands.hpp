#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lucid/dump.hpp"

namespace lucid::cli {

/// Output sink for one run. The directory is created on first write, so a
/// run that fails during validation leaves nothing behind.
class RunContext {
 public:
  explicit RunContext(std::filesystem::path dir);

  LayerWriter& layers();
  void write_json(const std::string& file, const nlohmann::json& value);
  const std::filesystem::path& dir() const { return dir_; }

  /// Non-raster artifacts, in write order.
  const std::vector<std::string>& files() const { return files_; }

 private:
  void ensure_dir();

  std::filesystem::path dir_;
  bool created_ = false;
  LayerWriter writer_;
  std::vector<std::string> files_;
};

struct Command {
  std::string name;
  std::string description;
  nlohmann::json defaults;  ///< every accepted key with its default value
  std::function<nlohmann::json(const nlohmann::json& config, RunContext& ctx)> run;
};

const std::vector<Command>& commands();

/// Defaults, overlaid by a config file's object (or the "config" member of
/// an earlier report), overlaid by explicit flags. Unknown keys and type
/// mismatches throw std::invalid_argument.
nlohmann::json merge_config(const Command& command, const nlohmann::json& file_config,
                            const std::vector<std::pair<std::string, std::string>>& flags);

/// Parses a flag string according to the JSON type of `like`.
nlohmann::json parse_flag_value(const std::string& text, const nlohmann::json& like);

/// Runs the command and writes report.json last. Returns the report.
nlohmann::json execute(const Command& command, const nlohmann::json& config, const std::filesystem::path& out_dir);

}  // namespace lucid::cli
