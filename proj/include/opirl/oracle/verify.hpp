#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "opirl/numcore/matrix.hpp"

namespace opirl {

/// Outcome of one identity check over many instances. The recorded
/// left/right values belong to the instance with the largest gap.
struct VerificationReport {
  std::string check;
  std::string instance;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  std::int64_t instances = 0;
  std::int64_t violations = 0;
  std::int64_t skipped = 0;
  std::vector<std::string> notes;
  bool passed = false;

  /// Folds one instance in: keeps the worst gap and counts gaps above the
  /// tolerance (or a tighter one for this instance).
  void record(const std::string& description, double left, double right, double instance_gap,
              std::optional<double> instance_tolerance = std::nullopt);
  /// passed iff every instance stayed within tolerance.
  void finish();
};

/// KL(P||Q) <= D_f(P||Q) for f(x) = x^2 / 2 on `trials` random 8-point pairs,
/// plus the P = Q and near-degenerate boundary cases. The gap is the amount
/// by which KL exceeds D_f (zero when the bound holds).
VerificationReport verify_kl_upper_bound(int trials, Rng& rng);

/// KL(pi||exp) = E_pi[log R/exp] + KL(pi||R) on random triples; tolerance 1e-12.
VerificationReport verify_kl_decomposition(int trials, Rng& rng);

/// inf_x E_pi[-x] + E_R[f*(x)] = -D_f(pi||R) by a per-point grid search over
/// [-20, 20] with step 1e-3, for the default generator; tolerance 1e-3. Also
/// checks that x* = f'(pi/R) attains the bound.
VerificationReport verify_variational_form(int instances, Rng& rng);

/// E_occ[r - (B Q - Q)] = (1 - gamma) E_{s0, a0}[Q] on random (MDP, policy,
/// Q-table) triples with exact occupancies; tolerance 1e-8.
VerificationReport verify_telescoping(int instances, Rng& rng);

/// Trains the adversarial discriminator on known discrete distributions and
/// compares its logit with the log density ratio; tolerance 0.1 on points
/// with mass at least 0.05.
VerificationReport verify_discriminator_optimum(std::uint64_t seed);

/// Every check at its stated size.
std::vector<VerificationReport> verify_all(std::uint64_t seed);

void print_report_table(std::ostream& out, const std::vector<VerificationReport>& reports);
void write_report_json(const std::filesystem::path& path, const std::vector<VerificationReport>& reports);

}  // namespace opirl
