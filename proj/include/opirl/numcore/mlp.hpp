#pragma once

#include <string>
#include <vector>

#include "opirl/numcore/autodiff.hpp"
#include "opirl/numcore/matrix.hpp"

namespace opirl {

enum class Activation { Relu, Tanh, Identity };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

/// Fully connected network. Layer l maps rows x -> act_l(x W_l + b_l).
///
/// Weights are Glorot-uniform initialised, biases zero. Copies are deep, so a
/// copy serves as a target network or a frozen snapshot.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string name, std::vector<Index> layer_sizes, std::vector<Activation> activations, Rng& rng);

  /// Hidden layers share one activation; the output layer is linear unless stated.
  static Mlp make(std::string name, Index input_dim, const std::vector<Index>& hidden, Index output_dim,
                  Rng& rng, Activation hidden_activation = Activation::Relu,
                  Activation output_activation = Activation::Identity);

  ad::Var forward(ad::Tape& tape, ad::Var input);

  /// Forward pass that also returns each layer's pre-activation.
  ad::Var forward(ad::Tape& tape, ad::Var input, std::vector<ad::Var>& pre_activations);

  /// Tape-free inference.
  Matrix predict(const Matrix& input) const;

  /// Row-wise gradient of a single-output network with respect to its input,
  /// built as graph nodes so it can itself be differentiated with respect to
  /// the parameters.
  ad::Var input_gradient(ad::Tape& tape, ad::Var input);

  Index input_dim() const { return sizes_.front(); }
  Index output_dim() const { return sizes_.back(); }
  std::size_t num_layers() const { return activations_.size(); }
  const std::vector<Index>& layer_sizes() const { return sizes_; }
  const std::vector<Activation>& activations() const { return activations_; }
  const std::string& name() const { return name_; }

  std::vector<ad::Parameter>& parameters() { return params_; }
  const std::vector<ad::Parameter>& parameters() const { return params_; }
  std::vector<ad::Parameter*> parameter_ptrs();

  ad::Parameter& weight(std::size_t layer) { return params_[2 * layer]; }
  ad::Parameter& bias(std::size_t layer) { return params_[2 * layer + 1]; }

  void zero_grad();

  /// target <- tau * source + (1 - tau) * target, parameter by parameter.
  void polyak_update(const Mlp& source, double tau);

  /// Replaces all parameter values; shapes must match.
  void assign(const Mlp& other);

 private:
  void check_input(const Matrix& input) const;

  std::string name_;
  std::vector<Index> sizes_;
  std::vector<Activation> activations_;
  std::vector<ad::Parameter> params_;
};

}  // namespace opirl
