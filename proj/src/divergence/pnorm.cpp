#include "opirl/divergence/pnorm.hpp"

#include <cmath>

#include "opirl/numcore/errors.hpp"

namespace opirl {

namespace {

double abs_pow(double x, double p) { return x == 0.0 ? 0.0 : std::exp(p * std::log(std::abs(x))); }
double sign(double x) { return (x > 0) - (x < 0); }

}  // namespace

PNormGenerator::PNormGenerator(double p, double c) : p_(p), c_(c) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ContractError("PNormGenerator: p must be > 1");
  if (!(c > 0.0) || !std::isfinite(c)) throw ContractError("PNormGenerator: c must be > 0");
  q_ = p / (p - 1.0);
  conj_scale_ = (p - 1.0) * c * std::pow(1.0 / (c * p), q_);
}

double PNormGenerator::value(double x) const { return c_ * abs_pow(x, p_); }

double PNormGenerator::derivative(double x) const { return sign(x) * c_ * p_ * abs_pow(x, p_ - 1.0); }

double PNormGenerator::conjugate(double y) const { return conj_scale_ * abs_pow(y, q_); }

double PNormGenerator::conjugate_grad(double y) const { return sign(y) * abs_pow(y / (c_ * p_), q_ - 1.0); }

ad::Var PNormGenerator::conjugate(ad::Var y) const { return conj_scale_ * ad::abs_pow(y, q_); }

}  // namespace opirl
