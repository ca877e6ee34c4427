#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opirl {

inline constexpr const char* kCodeVersion = "0.1.0";

/// Record of one artifact-producing command. Written with status "running"
/// before work starts and rewritten with the outcome on exit.
struct RunManifest {
  struct Evaluation {
    double mean = 0.0;
    double stddev = 0.0;
    double success_rate = 0.0;
    int episodes = 0;
    std::uint64_t seed = 0;
  };

  std::string command;
  std::vector<std::string> arguments;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::string version = kCodeVersion;
  std::string env_id;
  /// Input path -> hex FNV-1a digest of its bytes.
  std::map<std::string, std::string> inputs;
  /// Role ("metrics", "policy", ...) -> path.
  std::map<std::string, std::string> outputs;
  std::string started;
  std::string finished;
  std::string status = "running";
  std::string error;
  std::optional<Evaluation> final_eval;

  void write(const std::filesystem::path& path) const;
  /// SchemaError when a required field is missing.
  static RunManifest read(const std::filesystem::path& path);
};

/// Hex FNV-1a digest of a file's bytes.
std::string file_digest(const std::filesystem::path& path);
/// UTC, ISO 8601 with seconds.
std::string utc_timestamp();

}  // namespace opirl
