#include "opirl/numcore/mlp.hpp"

#include <cmath>

#include "opirl/numcore/errors.hpp"

namespace opirl {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw SchemaError("unknown activation '" + name + "'");
}

Mlp::Mlp(std::string name, std::vector<Index> layer_sizes, std::vector<Activation> activations, Rng& rng)
    : name_(std::move(name)), sizes_(std::move(layer_sizes)), activations_(std::move(activations)) {
  if (sizes_.size() < 2) throw ContractError("Mlp needs at least input and output sizes");
  if (activations_.size() != sizes_.size() - 1) {
    throw ContractError("Mlp: " + std::to_string(sizes_.size() - 1) + " layers but " +
                        std::to_string(activations_.size()) + " activations");
  }
  for (Index s : sizes_) {
    if (s <= 0) throw ContractError("Mlp layer sizes must be positive");
  }
  params_.reserve(2 * activations_.size());
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const Index fan_in = sizes_[l];
    const Index fan_out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> uni(-limit, limit);
    Matrix w(fan_in, fan_out);
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = uni(rng);
    const std::string prefix = name_ + "/l" + std::to_string(l);
    params_.push_back({prefix + "/weight", std::move(w), Matrix::Zero(fan_in, fan_out)});
    params_.push_back({prefix + "/bias", Matrix::Zero(1, fan_out), Matrix::Zero(1, fan_out)});
  }
}

Mlp Mlp::make(std::string name, Index input_dim, const std::vector<Index>& hidden, Index output_dim, Rng& rng,
              Activation hidden_activation, Activation output_activation) {
  std::vector<Index> sizes{input_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output_dim);
  std::vector<Activation> acts(hidden.size(), hidden_activation);
  acts.push_back(output_activation);
  return Mlp(std::move(name), std::move(sizes), std::move(acts), rng);
}

void Mlp::check_input(const Matrix& input) const {
  if (input.cols() != input_dim()) {
    throw DimensionError(name_ + ": input " + shape_string(input) + " does not match first layer (?x" +
                         std::to_string(input_dim()) + ")");
  }
}

namespace {

ad::Var activate(Activation a, ad::Var z) {
  switch (a) {
    case Activation::Relu: return ad::relu(z);
    case Activation::Tanh: return ad::tanh(z);
    case Activation::Identity: return z;
  }
  return z;
}

}  // namespace

ad::Var Mlp::forward(ad::Tape& tape, ad::Var input) {
  std::vector<ad::Var> unused;
  return forward(tape, input, unused);
}

ad::Var Mlp::forward(ad::Tape& tape, ad::Var input, std::vector<ad::Var>& pre_activations) {
  check_input(input.value());
  pre_activations.clear();
  ad::Var x = input;
  for (std::size_t l = 0; l < activations_.size(); ++l) {
    ad::Var w = tape.parameter(weight(l));
    ad::Var b = tape.parameter(bias(l));
    ad::Var z = ad::matmul(x, w) + b;
    pre_activations.push_back(z);
    x = activate(activations_[l], z);
  }
  return x;
}

Matrix Mlp::predict(const Matrix& input) const {
  check_input(input);
  Matrix x = input;
  for (std::size_t l = 0; l < activations_.size(); ++l) {
    Matrix z = x * params_[2 * l].value;
    z.rowwise() += params_[2 * l + 1].value.row(0);
    switch (activations_[l]) {
      case Activation::Relu: x = z.cwiseMax(0.0); break;
      case Activation::Tanh: x = z.array().tanh().matrix(); break;
      case Activation::Identity: x = std::move(z); break;
    }
  }
  return x;
}

ad::Var Mlp::input_gradient(ad::Tape& tape, ad::Var input) {
  if (output_dim() != 1) throw ContractError(name_ + ": input_gradient needs a single-output network");
  std::vector<ad::Var> pre;
  forward(tape, input, pre);
  ad::Var g = tape.constant(Matrix::Ones(input.rows(), 1));
  for (std::size_t l = activations_.size(); l-- > 0;) {
    switch (activations_[l]) {
      case Activation::Relu:
        // ReLU's derivative is piecewise constant, so the mask carries no parameter gradient.
        g = g * tape.constant((pre[l].value().array() > 0.0).cast<double>().matrix());
        break;
      case Activation::Tanh:
        g = g * (1.0 - ad::square(ad::tanh(pre[l])));
        break;
      case Activation::Identity:
        break;
    }
    g = ad::matmul(g, ad::transpose(tape.parameter(weight(l))));
  }
  return g;
}

std::vector<ad::Parameter*> Mlp::parameter_ptrs() {
  std::vector<ad::Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(&p);
  return out;
}

void Mlp::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Mlp::polyak_update(const Mlp& source, double tau) {
  if (source.params_.size() != params_.size()) throw ContractError("polyak_update: architecture mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    params_[i].value = tau * source.params_[i].value + (1.0 - tau) * params_[i].value;
  }
}

void Mlp::assign(const Mlp& other) {
  if (other.sizes_ != sizes_) throw DimensionError("assign: architecture mismatch for " + name_);
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i].value = other.params_[i].value;
}

}  // namespace opirl
