#pragma once

#include <functional>
#include <span>

#include "opirl/numcore/autodiff.hpp"
#include "opirl/numcore/mlp.hpp"

namespace opirl {

/// Builds a scalar objective on a fresh tape.
using ScalarObjective = std::function<ad::Var(ad::Tape&)>;

/// Compares reverse-mode gradients of `objective` against central differences
/// with step h, over every entry of every parameter. Returns
/// max |analytic - numeric| / (|numeric| + 1e-8).
double finite_diff_check(std::span<ad::Parameter* const> params, const ScalarObjective& objective, double h);

/// Same check with the objective sum(net(input)).
double finite_diff_check(Mlp& net, const Matrix& input, double h);

}  // namespace opirl
