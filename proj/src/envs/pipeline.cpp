#include "opirl/envs/pipeline.hpp"

#include "opirl/envs/absorbing.hpp"
#include "opirl/numcore/errors.hpp"

namespace opirl {

Vector ObservationPipeline::apply(const Vector& obs) const {
  if (!normalizer) return obs;
  const Index base = normalizer->dim();
  if (obs.size() != base + (absorbing ? 1 : 0)) {
    throw DimensionError("observation of size " + std::to_string(obs.size()) + " does not fit a pipeline over " +
                         std::to_string(base) + " base dimensions" + (absorbing ? " plus indicator" : ""));
  }
  if (absorbing && is_absorbing(obs)) return obs;
  Vector out = obs;
  out.head(base) = normalizer->normalize(obs.head(base));
  return out;
}

Matrix ObservationPipeline::apply_rows(const Matrix& rows) const {
  if (!normalizer) return rows;
  Matrix out(rows.rows(), rows.cols());
  for (Index i = 0; i < rows.rows(); ++i) out.row(i) = apply(rows.row(i).transpose()).transpose();
  return out;
}

void add_pipeline(ParameterFile& file, const ObservationPipeline& pipeline) {
  file.meta["pipeline.absorbing"] = pipeline.absorbing ? "true" : "false";
  file.meta["pipeline.normalized"] = pipeline.normalizer ? "true" : "false";
  if (pipeline.normalizer) {
    file.meta["pipeline.count"] = std::to_string(pipeline.normalizer->count());
    file.add("normalizer/mean", pipeline.normalizer->mean().transpose());
    file.add("normalizer/variance", pipeline.normalizer->variance().transpose());
  }
}

ObservationPipeline read_pipeline(const ParameterFile& file) {
  ObservationPipeline p;
  p.absorbing = file.get_meta("pipeline.absorbing") == "true";
  if (file.get_meta("pipeline.normalized") == "true") {
    const Vector mean = file.tensor("normalizer/mean").transpose();
    const Vector var = file.tensor("normalizer/variance").transpose();
    p.normalizer = RunningNormalizer::from_statistics(mean, var, std::stoll(file.get_meta("pipeline.count")));
  }
  return p;
}

}  // namespace opirl
