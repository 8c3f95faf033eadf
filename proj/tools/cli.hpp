#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hwlab::cli {

inline constexpr const char* tool_version = "0.1.0";
inline constexpr int manifest_format_version = 1;

enum ExitCode { exit_ok = 0, exit_mismatch = 1, exit_validation = 2, exit_numerical = 3, exit_censored = 4 };

/// Fully resolved request: defaults merged with the config file and the command-line overrides.
struct RunConfig {
  std::string command;
  nlohmann::json parameters;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Files produced by one run, keyed by file name. Tables are the CSV entries.
struct Bundle {
  std::map<std::string, std::string> files;
  nlohmann::json summary = nlohmann::json::object();
  /// Nonzero when the run finished but the command reports a failure (blow-up, censored fit).
  int status = exit_ok;
  std::string status_message;
};

const std::vector<std::string>& commands();
nlohmann::json default_parameters(const std::string& command);

/// Merges user parameters into the defaults; unknown keys and type changes throw
/// hwlab::Error with ErrorCode::invalid_argument.
nlohmann::json resolve_parameters(const std::string& command, const nlohmann::json& user);

/// 64-bit FNV-1a of the canonical JSON of {command, parameters, seed}.
std::string config_hash(const RunConfig& cfg);
std::string fnv1a_hex(const std::string& bytes);

Bundle execute(const RunConfig& cfg);
nlohmann::json make_manifest(const RunConfig& cfg, const Bundle& bundle);
/// Writes the bundle files, manifest.json and summary.md into dir.
void write_bundle(const std::filesystem::path& dir, const RunConfig& cfg, const Bundle& bundle);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv);

}  // namespace hwlab::cli
