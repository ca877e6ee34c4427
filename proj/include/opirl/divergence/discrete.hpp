#pragma once

#include <initializer_list>

#include "opirl/divergence/pnorm.hpp"
#include "opirl/numcore/matrix.hpp"

namespace opirl {

/// Probability vector over a finite set. Entries are non-negative and sum to
/// one within 1e-12; construction enforces both.
class DiscreteDist {
 public:
  explicit DiscreteDist(Vector probabilities);
  DiscreteDist(std::initializer_list<double> probabilities);

  /// Normalises arbitrary non-negative weights.
  static DiscreteDist from_weights(const Vector& weights);

  Index size() const { return probs_.size(); }
  double operator[](Index i) const { return probs_[i]; }
  const Vector& probabilities() const { return probs_; }

 private:
  Vector probs_;
};

/// sum_i P(i) log(P(i)/Q(i)), with 0 log 0 = 0. DomainError when P(i) > 0 = Q(i).
double kl_discrete(const DiscreteDist& p, const DiscreteDist& q);

/// sum_i Q(i) f(P(i)/Q(i)). DomainError when P(i) > 0 = Q(i).
double f_div_discrete(const PNormGenerator& gen, const DiscreteDist& p, const DiscreteDist& q);

}  // namespace opirl
