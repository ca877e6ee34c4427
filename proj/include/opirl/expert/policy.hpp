#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>

#include "opirl/envs/pipeline.hpp"
#include "opirl/numcore/mlp.hpp"

namespace opirl {

/// tanh-squashed diagonal Gaussian. One network emits the mean and the
/// log-standard-deviation side by side; log-std is clamped to [-10, 2].
class SquashedGaussianPolicy {
 public:
  static constexpr double kLogStdMin = -10.0;
  static constexpr double kLogStdMax = 2.0;
  /// Added inside log(1 - tanh(u)^2 + eps).
  static constexpr double kSquashEpsilon = 1e-6;

  SquashedGaussianPolicy() = default;
  SquashedGaussianPolicy(Index obs_dim, Index act_dim, const std::vector<Index>& hidden, Rng& rng,
                         std::string name = "policy");
  /// Wraps a network whose output has 2 * act_dim columns.
  explicit SquashedGaussianPolicy(Mlp net);

  struct Heads {
    ad::Var mean;
    ad::Var log_std;
  };
  struct Sample {
    ad::Var action;
    ad::Var log_prob;  // column of per-row log-densities
  };

  Heads heads(ad::Tape& tape, ad::Var obs);
  /// Reparameterised draw tanh(mean + std * noise); noise is standard normal, one row per observation.
  Sample rsample(ad::Tape& tape, ad::Var obs, const Matrix& noise);
  Sample rsample(ad::Tape& tape, ad::Var obs, Rng& rng);
  /// tanh(mean), the deterministic action.
  ad::Var mean_action(ad::Tape& tape, ad::Var obs);

  /// Tape-free draw returning actions and log-densities.
  std::pair<Matrix, Vector> sample(const Matrix& obs, Rng& rng) const;
  Matrix deterministic(const Matrix& obs) const;
  /// Single observation; deterministic when rng is null.
  Vector act(const Vector& obs, Rng* rng) const;
  /// Log-density of given actions (clipped just inside (-1, 1)).
  Vector log_prob(const Matrix& obs, const Matrix& actions) const;

  Matrix standard_noise(Index rows, Rng& rng) const;

  Index obs_dim() const { return net_.input_dim(); }
  Index act_dim() const { return net_.output_dim() / 2; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

 private:
  std::pair<Matrix, Matrix> split(const Matrix& out) const;

  Mlp net_;
};

/// Policy checkpoint: the network, the observation pipeline it was trained
/// behind, and free-form metadata such as the environment id.
void save_policy(const std::filesystem::path& path, const SquashedGaussianPolicy& policy,
                 const ObservationPipeline& pipeline, const std::map<std::string, std::string>& meta);
SquashedGaussianPolicy load_policy(const std::filesystem::path& path, ObservationPipeline* pipeline,
                                   std::map<std::string, std::string>* meta);

}  // namespace opirl
