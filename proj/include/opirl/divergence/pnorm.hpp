#pragma once

#include "opirl/numcore/autodiff.hpp"

namespace opirl {

/// f(x) = c |x|^p for p > 1, c > 0, together with its convex conjugate
///
///   f*(y) = sup_x (x y - c |x|^p) = (p - 1) c (|y| / (c p))^q,   1/p + 1/q = 1.
///
/// For c = 1/p this is the familiar |y|^q / q.
class PNormGenerator {
 public:
  /// Throws ContractError unless p > 1 and c > 0.
  PNormGenerator(double p, double c);

  /// p = 3/2 with c = 1/p, which makes the conjugate exactly |y|^3 / 3.
  static PNormGenerator default_generator() { return PNormGenerator(1.5, 2.0 / 3.0); }

  double p() const { return p_; }
  double q() const { return q_; }
  double c() const { return c_; }

  double value(double x) const;
  /// f'(x) = c p |x|^(p-1) sgn(x)
  double derivative(double x) const;
  double conjugate(double y) const;
  /// d f*/dy, which is also the maximiser x*(y) of x y - f(x).
  double conjugate_grad(double y) const;

  /// f*(y) applied elementwise on the tape.
  ad::Var conjugate(ad::Var y) const;

 private:
  double p_;
  double q_;
  double c_;
  double conj_scale_;  // f*(y) = conj_scale_ * |y|^q
};

}  // namespace opirl
