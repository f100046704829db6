// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_CORRECTION_HPP
#define TIMEBIN_CORE_CORRECTION_HPP

#include <cstdint>
#include <vector>

#include "core/estimation.hpp"
#include "core/state.hpp"

namespace timebin {

/// Per-bin phase error decomposed by origin. The phase imprinted on bin j is
/// dynamical[j] + geometric[j] + technical[j].
struct PhaseBudget {
  std::vector<double> dynamical;
  std::vector<double> geometric;
  std::vector<double> technical;

  static PhaseBudget zero(int d);

  int dim() const;
  double total(int j) const;
  std::vector<double> totals() const;
};

/// Imprint a budget's total phases on a state.
TimeBinState perturb(const TimeBinState& s, const PhaseBudget& budget);

/// Feed-forward settings derived from measured adjacent increments:
/// cumulative[0] = 0, cumulative[j+1] = cumulative[j] + delta_theta[j]
/// (no wrapping, so the ramp stays continuous), and the phase to program on
/// bin j is correction_phases[j] = -cumulative[j].
struct CorrectionPlan {
  std::vector<double> cumulative;
  std::vector<double> correction_phases;

  DiagonalPhaseUnitary unitary() const { return DiagonalPhaseUnitary{correction_phases}; }
};

CorrectionPlan build_plan(const RelativePhaseSet& phases);

/// Remove a modeled per-bin dynamical phase (length d) from measured
/// adjacent increments; what remains estimates the geometric plus technical
/// part: wrap(delta_theta[j] - (dyn_model[j+1] - dyn_model[j])).
RelativePhaseSet separate_dynamical(const RelativePhaseSet& phases,
                                    const std::vector<double>& dyn_model);

/// One full calibration round against a known target state.
struct ClosedLoopConfig {
  TimeBinState target;
  PhaseBudget budget;
  int scan_points = 12;
  std::int64_t shots_per_point = 0;  // 0 = noiseless probabilities
  std::uint64_t seed = 0;
  double visibility_floor = 0.05;
  double fidelity_threshold = 0.0;  // <=0 picks 1 - 1e-6 (noiseless) or 0.99 (noisy)
  bool enforce = true;              // raise VerificationFailed below threshold
};

struct ClosedLoopReport {
  TimeBinState prepared;
  TimeBinState corrected;
  RelativePhaseSet phases;               // measured increments, target-referenced
  CorrectionPlan plan;
  double fidelity_before = 0.0;
  double fidelity_after = 0.0;
  std::vector<double> residual_offsets;  // target-referenced, after correction
  double threshold = 0.0;
  bool passed = false;
};

/// Perturb the target by the budget, scan every adjacent pair, build and
/// apply the feed-forward plan, then verify with fresh scans. Scan RNG
/// streams are derived per pair from config.seed, so reruns are reproducible.
ClosedLoopReport closed_loop(const ClosedLoopConfig& config);

}  // namespace timebin

#endif
