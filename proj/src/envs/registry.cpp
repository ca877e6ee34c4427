#include "opirl/envs/absorbing.hpp"
#include "opirl/envs/environment.hpp"
#include "opirl/envs/line_env.hpp"
#include "opirl/envs/point_maze.hpp"
#include "opirl/envs/tabular.hpp"
#include "opirl/numcore/errors.hpp"

namespace opirl {

std::unique_ptr<Environment> make_env(const std::string& id, const EnvOptions& options) {
  std::unique_ptr<Environment> env;
  if (id == "pointmaze-left" || id == "pointmaze-right") {
    PointMazeConfig config = id == "pointmaze-left" ? PointMazeConfig::left() : PointMazeConfig::right();
    config.goal_band = options.goal_band;
    env = std::make_unique<PointMaze>(config);
  } else if (id == "line-1d") {
    env = std::make_unique<LineEnv>();
  } else if (id.rfind("tabular:", 0) == 0) {
    env = std::make_unique<TabularEnv>(load_tabular_mdp(id.substr(8)), id);
  } else {
    throw ConfigError("unknown environment '" + id +
                      "'; expected pointmaze-left, pointmaze-right, line-1d or tabular:<file>");
  }
  if (options.absorbing) env = std::make_unique<AbsorbingWrapper>(std::move(env));
  return env;
}

}  // namespace opirl
