#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "wmsn/benchmark.hpp"
#include "wmsn/simulation.hpp"

namespace wmsn {

/// Invalid run configuration; `key()` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  int tickMillis = 200;
  /// Ticks per simulation run before it finishes (or restarts when repeating).
  std::int64_t maxTicks = 500;
};

struct RunConfig {
  SimulationSetup setup;
  std::int64_t ticks = 100;
  BenchmarkConfig benchmark;
  ServiceConfig service;
};

RunConfig parseRunConfig(const nlohmann::json& doc);
RunConfig parseRunConfig(const std::string& text);
RunConfig loadRunConfig(const std::filesystem::path& path);
nlohmann::json toJson(const RunConfig& config);

/// Explicit path, else $WMSN_CONFIG, else none (built-in defaults).
std::optional<std::filesystem::path> resolveConfigPath(const std::optional<std::string>& cliPath);

}  // namespace wmsn
