#include "opirl/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "opirl/numcore/errors.hpp"

namespace opirl {

double finite_diff_check(std::span<ad::Parameter* const> params, const ScalarObjective& objective, double h) {
  if (!(h > 0)) throw ContractError("finite_diff_check: h must be positive");
  for (ad::Parameter* p : params) p->zero_grad();
  {
    ad::Tape tape;
    tape.backward(objective(tape));
  }
  auto evaluate = [&]() {
    ad::Tape tape;
    return objective(tape).item();
  };
  double worst = 0.0;
  for (ad::Parameter* p : params) {
    const Matrix analytic = p->grad;
    for (Index i = 0; i < p->value.size(); ++i) {
      double& w = p->value.data()[i];
      const double saved = w;
      w = saved + h;
      const double up = evaluate();
      w = saved - h;
      const double down = evaluate();
      w = saved;
      const double numeric = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(analytic.data()[i] - numeric) / (std::abs(numeric) + 1e-8));
    }
  }
  return worst;
}

double finite_diff_check(Mlp& net, const Matrix& input, double h) {
  auto params = net.parameter_ptrs();
  return finite_diff_check(params, [&](ad::Tape& tape) {
    return ad::sum(net.forward(tape, tape.constant(input)));
  }, h);
}

}  // namespace opirl
