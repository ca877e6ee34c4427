#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "opirl/replay/buffer.hpp"

namespace opirl {

/// One rollout in raw environment observations (no absorbing indicator).
struct Episode {
  std::vector<Vector> observations;  // length L + 1
  std::vector<Vector> actions;       // length L
  std::vector<double> rewards;       // ground truth, length L
  bool terminated = false;

  Index length() const { return static_cast<Index>(actions.size()); }
  double total_return() const;
};

struct TrajectorySet {
  static constexpr int kFormatVersion = 1;

  Index obs_dim = 0;
  Index act_dim = 0;
  std::string env_id;
  std::vector<Episode> episodes;
};

/// JSON-lines: a header record, then one episode per line. Numbers carry 17
/// significant digits so values round-trip exactly.
void save_trajectories(const std::filesystem::path& path, const TrajectorySet& set);

/// ParseError (with line) for malformed or truncated files, SchemaError for
/// shapes that disagree with the header. Nothing is returned on failure.
TrajectorySet load_trajectories(const std::filesystem::path& path);

/// Converts a demonstration into transitions. With `absorbing`, observations
/// gain the indicator dimension and an episode that terminated before
/// `horizon` continues as zero-action absorbing self-loops up to the horizon.
std::vector<Transition> episode_transitions(const Episode& episode, int horizon, bool absorbing);

}  // namespace opirl
