#include "opirl/numcore/adam.hpp"

#include <cmath>

#include "opirl/numcore/errors.hpp"

namespace opirl {

void adam_step(std::span<ad::Parameter* const> params, AdamState& state) {
  const AdamOptions& o = state.options;
  if (!(o.learning_rate > 0) || !(o.beta1 > 0 && o.beta1 < 1) || !(o.beta2 > 0 && o.beta2 < 1) ||
      !(o.epsilon > 0)) {
    throw ContractError("adam_step: invalid optimizer options");
  }
  for (const ad::Parameter* p : params) {
    if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols()) {
      throw ContractError("adam_step: missing gradient for '" + p->name + "'");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  for (ad::Parameter* p : params) {
    auto [m_it, m_new] = state.first_moment.try_emplace(p->name, Matrix::Zero(p->value.rows(), p->value.cols()));
    auto [v_it, v_new] = state.second_moment.try_emplace(p->name, Matrix::Zero(p->value.rows(), p->value.cols()));
    Matrix& m = m_it->second;
    Matrix& v = v_it->second;
    m = o.beta1 * m + (1.0 - o.beta1) * p->grad;
    v = o.beta2 * v + (1.0 - o.beta2) * p->grad.cwiseAbs2();
    p->value.array() -= o.learning_rate * (m.array() / correction1) /
                        ((v.array() / correction2).sqrt() + o.epsilon);
  }
}

}  // namespace opirl
