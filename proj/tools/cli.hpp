#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace xcorr::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "XCORR_OUT_DIR";

enum ExitCode : int { ok = 0, domain_failure = 1, usage_error = 2 };

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // --out, wins over the environment
  std::size_t workers = 1;
  bool emit_paths = false;
};

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::string artifact_version = kVersion;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;
  nlohmann::ordered_json config;
  std::vector<std::string> warnings;
};

/// FNV-1a 64-bit digest, hex encoded.
std::string fnv1a_hex(const std::string& bytes);
/// Digest of the compact dump of an effective config.
std::string config_digest(const nlohmann::ordered_json& config);

void write_manifest(const RunManifest& m, const std::filesystem::path& dir);
/// Throws InvalidInput when the stored digest does not match the stored config.
RunManifest read_manifest(const std::filesystem::path& file);

/// Loads the config and merges `command_defaults` under the command's own section.
nlohmann::ordered_json load_config(const std::filesystem::path& file, const std::string& command);

/// --out, then XCORR_OUT_DIR, then the config's "out_dir", then ".".
std::filesystem::path resolve_out_dir(const RunOptions& opts, const nlohmann::ordered_json& cfg);

int cmd_check_kernel(const RunOptions& opts);
int cmd_simulate(const RunOptions& opts);
int cmd_estimate(const RunOptions& opts);
int cmd_bounds(const RunOptions& opts);
int cmd_montecarlo(const RunOptions& opts);

/// Parses argv and dispatches; maps exceptions to exit codes.
int run(int argc, char** argv);

}  // namespace xcorr::cli
