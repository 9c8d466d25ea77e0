// towlab <solve|simulate|verify|measure|sweep> --config FILE --out DIR
#include <chrono>
#include <ctime>
#include <iostream>

#include <CLI11.hpp>

#include "runner.hpp"
#include "towlab/io.hpp"

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = towlab::cli;
  CLI::App app{"Tug-of-war regularity lab"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  for (const char* name : cli::kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  std::string message;
  int code = cli::kConfigError;
  try {
    const nlohmann::json config = cli::load_config(config_path);
    code = cli::run(command, config, out_dir, utc_now(), message);
  } catch (const towlab::ConfigError& e) {
    message = nlohmann::json{{"status", "config_error"}, {"error", e.what()}}.dump();
  }
  (code == cli::kConfigError ? std::cerr : std::cout) << message << "\n";
  return code;
}
