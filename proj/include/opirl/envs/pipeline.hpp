#pragma once

#include <optional>

#include "opirl/envs/normalizer.hpp"
#include "opirl/numcore/checkpoint.hpp"

namespace opirl {

/// Maps raw environment observations to network inputs. The normalizer covers
/// the base observation; the absorbing indicator passes through, and absorbing
/// observations are left as (0, ..., 0, 1).
struct ObservationPipeline {
  bool absorbing = false;
  std::optional<RunningNormalizer> normalizer;

  Vector apply(const Vector& obs) const;
  Matrix apply_rows(const Matrix& rows) const;
};

/// Stores the pipeline as "pipeline.*" metadata and "normalizer/*" tensors.
void add_pipeline(ParameterFile& file, const ObservationPipeline& pipeline);
ObservationPipeline read_pipeline(const ParameterFile& file);

}  // namespace opirl
