#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace towlab::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2 };

inline constexpr const char* kCommands[] = {"solve", "simulate", "verify", "measure", "sweep"};

/// Parses and validates `config` for `command`, then runs it and writes the
/// artifacts into `out_dir`. Config errors are detected before anything is
/// written. `timestamp` lands only in run_manifest.json.
int run(const std::string& command, const nlohmann::json& config, const std::filesystem::path& out_dir,
        const std::string& timestamp, std::string& message);

/// Reads a config file; throws ConfigError on I/O or parse failure.
nlohmann::json load_config(const std::filesystem::path& path);

}  // namespace towlab::cli
