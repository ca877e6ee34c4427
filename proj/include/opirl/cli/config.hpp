#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opirl/agent/opirl.hpp"
#include "opirl/expert/sac.hpp"

namespace opirl {

/// Hyperparameters of both learners. Sections in files: [agent] for the
/// OPIRL learner, [expert] for SAC (expert training and reward transfer).
struct RunConfig {
  OpirlConfig agent;
  SacConfig expert;
};

/// Defaults, then `in`, then overrides of the form "section.key=value".
/// A zero buffer capacity resolves to twice the step count. ConfigError on an
/// unknown key (listing the valid ones), a malformed value (naming the key and
/// the expected type) or a value that fails validation.
RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides = {});

/// Every accepted key as "section.key".
std::vector<std::string> config_keys();

/// Resolved values keyed like config_keys(), in the same textual form the parser accepts.
std::map<std::string, std::string> describe_config(const RunConfig& config);

}  // namespace opirl
