#include "opirl/irl/reward_handle.hpp"

#include "opirl/numcore/checkpoint.hpp"
#include "opirl/numcore/errors.hpp"

namespace opirl {

RewardHandle::RewardHandle(const Discriminator& d, ObservationPipeline pipeline, std::string env_id)
    : RewardHandle(d.reward_net(), d.act_dim(), d.absorbing(), std::move(pipeline), std::move(env_id)) {}

RewardHandle::RewardHandle(Mlp reward, Index act_dim, bool absorbing, ObservationPipeline pipeline,
                           std::string env_id)
    : reward_(std::move(reward)),
      act_dim_(act_dim),
      absorbing_(absorbing),
      pipeline_(std::move(pipeline)),
      env_id_(std::move(env_id)) {}

Vector RewardHandle::evaluate_processed(const Matrix& states, const Matrix& actions) const {
  if (actions.cols() != act_dim_ || states.cols() + actions.cols() != reward_.input_dim()) {
    throw DimensionError("reward expects " + std::to_string(reward_.input_dim() - act_dim_) + "+" +
                         std::to_string(act_dim_) + " inputs, got states " + shape_string(states) + " and actions " +
                         shape_string(actions));
  }
  Matrix a = actions;
  if (absorbing_) {
    for (Index i = 0; i < states.rows(); ++i) {
      if (states(i, states.cols() - 1) == 1.0) a.row(i).setZero();
    }
  }
  Matrix sa(states.rows(), states.cols() + a.cols());
  sa << states, a;
  return reward_.predict(sa).col(0);
}

Vector RewardHandle::operator()(const Matrix& raw_states, const Matrix& actions) const {
  return evaluate_processed(pipeline_.apply_rows(raw_states), actions);
}

void RewardHandle::save(const std::filesystem::path& path) const {
  ParameterFile file;
  file.add(reward_);
  add_pipeline(file, pipeline_);
  file.meta["kind"] = "reward";
  file.meta["reward-net"] = reward_.name();
  file.meta["env-id"] = env_id_;
  file.meta["act-dim"] = std::to_string(act_dim_);
  file.meta["absorbing"] = absorbing_ ? "true" : "false";
  save_parameter_file(path, file);
}

RewardHandle RewardHandle::load(const std::filesystem::path& path) {
  const ParameterFile file = load_parameter_file(path);
  auto kind = file.meta.find("kind");
  if (kind == file.meta.end() || kind->second != "reward") {
    throw SchemaError(path.string() + " is not a reward checkpoint");
  }
  return RewardHandle(file.load_mlp(file.get_meta("reward-net")), std::stoll(file.get_meta("act-dim")),
                      file.get_meta("absorbing") == "true", read_pipeline(file), file.get_meta("env-id"));
}

}  // namespace opirl
