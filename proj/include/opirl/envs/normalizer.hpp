#pragma once

#include "opirl/numcore/matrix.hpp"

namespace opirl {

/// Streaming per-dimension mean and variance (Welford). Normalises to
/// (x - mean) / sqrt(var + 1e-8).
class RunningNormalizer {
 public:
  static constexpr double kEpsilon = 1e-8;

  RunningNormalizer() = default;
  explicit RunningNormalizer(Index dim);

  /// Restores previously computed statistics; the result is frozen.
  static RunningNormalizer from_statistics(const Vector& mean, const Vector& variance, std::int64_t count);

  void update(const Vector& obs);
  void update_rows(const Matrix& batch);

  Vector normalize(const Vector& obs) const;
  Matrix normalize_rows(const Matrix& batch) const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  Index dim() const { return mean_.size(); }
  std::int64_t count() const { return count_; }
  const Vector& mean() const { return mean_; }
  /// Population variance; zero before any update.
  Vector variance() const;

 private:
  std::int64_t count_ = 0;
  Vector mean_;
  Vector m2_;
  bool frozen_ = false;
};

}  // namespace opirl
