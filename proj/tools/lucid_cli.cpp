#include <cstdlib>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"
#include "lucid/error.hpp"

namespace {

constexpr const char* kOutDirEnv = "LUCID_OUT_DIR";

struct Invocation {
  const lucid::cli::Command* command = nullptr;
  CLI::App* app = nullptr;
  std::string config_path;
  std::string out_dir = "lucid_out";
  std::map<std::string, std::string> values;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lucid: AM-FM image analysis and model interpretation tools"};
  app.require_subcommand(1);

  std::vector<Invocation> invocations;
  invocations.reserve(lucid::cli::commands().size());
  for (const lucid::cli::Command& cmd : lucid::cli::commands()) {
    Invocation& inv = invocations.emplace_back();
    inv.command = &cmd;
    inv.app = app.add_subcommand(cmd.name, cmd.description);
    inv.app->add_option("--config", inv.config_path, "JSON config, or the report of an earlier run");
    inv.app->add_option("--out", inv.out_dir, std::string("output directory (overridden by ") + kOutDirEnv + ")");
    for (const auto& [key, value] : cmd.defaults.items()) {
      inv.app->add_option("--" + key, inv.values[key], "default: " + value.dump());
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (Invocation& inv : invocations) {
    if (!inv.app->parsed()) continue;
    try {
      std::vector<std::pair<std::string, std::string>> flags;
      for (const auto& [key, text] : inv.values) {
        if (inv.app->get_option("--" + key)->count() > 0) flags.emplace_back(key, text);
      }
      const nlohmann::json file = inv.config_path.empty() ? nlohmann::json() : lucid::read_json(inv.config_path);
      const nlohmann::json config = lucid::cli::merge_config(*inv.command, file, flags);
      std::string out_dir = inv.out_dir;
      if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') out_dir = env;
      lucid::cli::execute(*inv.command, config, out_dir);
      std::cout << inv.command->name << ": wrote " << out_dir << "/report.json\n";
      return 0;
    } catch (const lucid::InvariantError& e) {
      std::cerr << "internal error: " << e.what() << '\n';
      return 2;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const lucid::FormatError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const lucid::IoError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const lucid::NumericalError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << '\n';
      return 2;
    }
  }
  return 1;
}
