#include "opirl/divergence/discrete.hpp"

#include <cmath>

#include "opirl/numcore/errors.hpp"

namespace opirl {

DiscreteDist::DiscreteDist(Vector probabilities) : probs_(std::move(probabilities)) {
  if (probs_.size() == 0) throw ContractError("DiscreteDist: empty support");
  if (!probs_.allFinite() || (probs_.array() < 0.0).any()) {
    throw ContractError("DiscreteDist: probabilities must be finite and non-negative");
  }
  if (std::abs(probs_.sum() - 1.0) > 1e-12) throw ContractError("DiscreteDist: probabilities must sum to 1");
}

DiscreteDist::DiscreteDist(std::initializer_list<double> probabilities)
    : DiscreteDist(Vector(Eigen::Map<const Vector>(probabilities.begin(), static_cast<Index>(probabilities.size())))) {}

DiscreteDist DiscreteDist::from_weights(const Vector& weights) {
  const double total = weights.sum();
  if (!(total > 0)) throw ContractError("DiscreteDist: weights must have positive mass");
  return DiscreteDist(weights / total);
}

namespace {

void check_support(const DiscreteDist& p, const DiscreteDist& q) {
  if (p.size() != q.size()) {
    throw DimensionError("distributions over " + std::to_string(p.size()) + " and " + std::to_string(q.size()) +
                         " points");
  }
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0 && q[i] == 0) {
      throw DomainError("support violation at index " + std::to_string(i) + ": P > 0 where Q = 0");
    }
  }
}

}  // namespace

double kl_discrete(const DiscreteDist& p, const DiscreteDist& q) {
  check_support(p, q);
  double total = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0) total += p[i] * std::log(p[i] / q[i]);
  }
  return total;
}

double f_div_discrete(const PNormGenerator& gen, const DiscreteDist& p, const DiscreteDist& q) {
  check_support(p, q);
  double total = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (q[i] > 0) total += q[i] * gen.value(p[i] / q[i]);
  }
  return total;
}

}  // namespace opirl
