#include "opirl/envs/normalizer.hpp"

#include "opirl/numcore/errors.hpp"

namespace opirl {

RunningNormalizer::RunningNormalizer(Index dim) : mean_(Vector::Zero(dim)), m2_(Vector::Zero(dim)) {}

RunningNormalizer RunningNormalizer::from_statistics(const Vector& mean, const Vector& variance, std::int64_t count) {
  if (mean.size() != variance.size()) throw DimensionError("normalizer: mean and variance sizes differ");
  if ((variance.array() < 0.0).any()) throw ContractError("normalizer: negative variance");
  RunningNormalizer n(mean.size());
  n.count_ = count;
  n.mean_ = mean;
  n.m2_ = variance * static_cast<double>(count);
  n.frozen_ = true;
  return n;
}

void RunningNormalizer::update(const Vector& obs) {
  if (frozen_) throw ContractError("normalizer: update after freeze");
  if (obs.size() != dim()) {
    throw DimensionError("normalizer: observation of size " + std::to_string(obs.size()) + ", expected " +
                         std::to_string(dim()));
  }
  ++count_;
  const Vector delta = obs - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta.cwiseProduct(obs - mean_);
}

void RunningNormalizer::update_rows(const Matrix& batch) {
  for (Index i = 0; i < batch.rows(); ++i) update(batch.row(i).transpose());
}

Vector RunningNormalizer::variance() const {
  if (count_ == 0) return Vector::Zero(dim());
  return (m2_ / static_cast<double>(count_)).cwiseMax(0.0);
}

Vector RunningNormalizer::normalize(const Vector& obs) const {
  if (obs.size() != dim()) {
    throw DimensionError("normalizer: observation of size " + std::to_string(obs.size()) + ", expected " +
                         std::to_string(dim()));
  }
  return ((obs - mean_).array() / (variance().array() + kEpsilon).sqrt()).matrix();
}

Matrix RunningNormalizer::normalize_rows(const Matrix& batch) const {
  if (batch.cols() != dim()) {
    throw DimensionError("normalizer: batch " + shape_string(batch) + " does not have " + std::to_string(dim()) +
                         " columns");
  }
  const Eigen::RowVectorXd scale = (variance().array() + kEpsilon).rsqrt().matrix().transpose();
  Matrix out = batch;
  out.rowwise() -= mean_.transpose();
  out.array().rowwise() *= scale.array();
  return out;
}

}  // namespace opirl
