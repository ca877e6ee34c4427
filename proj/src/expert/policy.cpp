#include "opirl/expert/policy.hpp"

#include <cmath>
#include <numbers>

#include "opirl/numcore/checkpoint.hpp"
#include "opirl/numcore/errors.hpp"

namespace opirl {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

SquashedGaussianPolicy::SquashedGaussianPolicy(Index obs_dim, Index act_dim, const std::vector<Index>& hidden,
                                               Rng& rng, std::string name)
    : net_(Mlp::make(std::move(name), obs_dim, hidden, 2 * act_dim, rng)) {}

SquashedGaussianPolicy::SquashedGaussianPolicy(Mlp net) : net_(std::move(net)) {
  if (net_.output_dim() % 2 != 0) throw SchemaError("policy network output must hold mean and log-std halves");
}

SquashedGaussianPolicy::Heads SquashedGaussianPolicy::heads(ad::Tape& tape, ad::Var obs) {
  ad::Var out = net_.forward(tape, obs);
  const Index d = act_dim();
  return {ad::slice_cols(out, 0, d), ad::clamp(ad::slice_cols(out, d, d), kLogStdMin, kLogStdMax)};
}

SquashedGaussianPolicy::Sample SquashedGaussianPolicy::rsample(ad::Tape& tape, ad::Var obs, const Matrix& noise) {
  Heads h = heads(tape, obs);
  if (noise.rows() != obs.rows() || noise.cols() != act_dim()) {
    throw DimensionError("policy noise " + shape_string(noise) + " does not match " + shape_string(h.mean.value()));
  }
  ad::Var u = h.mean + ad::exp(h.log_std) * tape.constant(noise);
  ad::Var action = ad::tanh(u);
  const Matrix gauss = (-0.5 * noise.array().square() - kHalfLog2Pi).matrix();
  ad::Var log_prob = ad::row_sum(tape.constant(gauss) - h.log_std) -
                     ad::row_sum(ad::log(1.0 + kSquashEpsilon - ad::square(action)));
  return {action, log_prob};
}

SquashedGaussianPolicy::Sample SquashedGaussianPolicy::rsample(ad::Tape& tape, ad::Var obs, Rng& rng) {
  return rsample(tape, obs, standard_noise(obs.rows(), rng));
}

ad::Var SquashedGaussianPolicy::mean_action(ad::Tape& tape, ad::Var obs) {
  ad::Var out = net_.forward(tape, obs);
  return ad::tanh(ad::slice_cols(out, 0, act_dim()));
}

Matrix SquashedGaussianPolicy::standard_noise(Index rows, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix noise(rows, act_dim());
  for (Index i = 0; i < noise.size(); ++i) noise.data()[i] = normal(rng);
  return noise;
}

std::pair<Matrix, Matrix> SquashedGaussianPolicy::split(const Matrix& out) const {
  const Index d = act_dim();
  return {out.leftCols(d), out.rightCols(d).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax)};
}

std::pair<Matrix, Vector> SquashedGaussianPolicy::sample(const Matrix& obs, Rng& rng) const {
  const auto [mean, log_std] = split(net_.predict(obs));
  const Matrix noise = standard_noise(obs.rows(), rng);
  const Matrix action = (mean.array() + log_std.array().exp() * noise.array()).tanh().matrix();
  const Vector log_prob = (-0.5 * noise.array().square() - kHalfLog2Pi - log_std.array()).matrix().rowwise().sum() -
                          (1.0 + kSquashEpsilon - action.array().square()).log().matrix().rowwise().sum();
  return {action, log_prob};
}

Matrix SquashedGaussianPolicy::deterministic(const Matrix& obs) const {
  return split(net_.predict(obs)).first.array().tanh().matrix();
}

Vector SquashedGaussianPolicy::act(const Vector& obs, Rng* rng) const {
  const Matrix row = obs.transpose();
  if (rng == nullptr) return deterministic(row).row(0).transpose();
  return sample(row, *rng).first.row(0).transpose();
}

Vector SquashedGaussianPolicy::log_prob(const Matrix& obs, const Matrix& actions) const {
  if (actions.rows() != obs.rows() || actions.cols() != act_dim()) {
    throw DimensionError("actions " + shape_string(actions) + " do not match policy for " + shape_string(obs));
  }
  const auto [mean, log_std] = split(net_.predict(obs));
  const double bound = 1.0 - 1e-6;
  const Matrix a = actions.cwiseMax(-bound).cwiseMin(bound);
  const Matrix u = a.array().atanh().matrix();
  const Matrix eps = ((u - mean).array() / log_std.array().exp()).matrix();
  return (-0.5 * eps.array().square() - kHalfLog2Pi - log_std.array()).matrix().rowwise().sum() -
         (1.0 + kSquashEpsilon - a.array().square()).log().matrix().rowwise().sum();
}

void save_policy(const std::filesystem::path& path, const SquashedGaussianPolicy& policy,
                 const ObservationPipeline& pipeline, const std::map<std::string, std::string>& meta) {
  ParameterFile file;
  file.add(policy.net());
  add_pipeline(file, pipeline);
  file.meta["kind"] = "policy";
  file.meta["policy-net"] = policy.net().name();
  for (const auto& [k, v] : meta) file.meta[k] = v;
  save_parameter_file(path, file);
}

SquashedGaussianPolicy load_policy(const std::filesystem::path& path, ObservationPipeline* pipeline,
                                   std::map<std::string, std::string>* meta) {
  const ParameterFile file = load_parameter_file(path);
  auto kind = file.meta.find("kind");
  if (kind == file.meta.end() || kind->second != "policy") {
    throw SchemaError(path.string() + " is not a policy checkpoint");
  }
  if (meta) *meta = file.meta;
  if (pipeline) *pipeline = read_pipeline(file);
  return SquashedGaussianPolicy(file.load_mlp(file.get_meta("policy-net")));
}

}  // namespace opirl
