// SPDX-License-Identifier: Apache-2.0
#include "core/correction.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/phase_math.hpp"
#include "core/rng.hpp"

namespace timebin {

namespace {

// RNG stream tags keeping calibration and verification scans independent.
constexpr std::uint64_t kCalibrationStream = 1;
constexpr std::uint64_t kVerificationStream = 2;

}  // namespace

PhaseBudget PhaseBudget::zero(int d) {
  if (d < 2) fail(ErrorCode::InvalidArgument, "phase budget needs at least 2 bins");
  PhaseBudget b;
  b.dynamical.assign(static_cast<std::size_t>(d), 0.0);
  b.geometric.assign(static_cast<std::size_t>(d), 0.0);
  b.technical.assign(static_cast<std::size_t>(d), 0.0);
  return b;
}

int PhaseBudget::dim() const {
  if (dynamical.size() != geometric.size() || geometric.size() != technical.size()) {
    fail(ErrorCode::DimensionMismatch, "phase budget components differ in length");
  }
  if (dynamical.size() < 2) {
    fail(ErrorCode::InvalidArgument, "phase budget needs at least 2 bins");
  }
  return static_cast<int>(dynamical.size());
}

double PhaseBudget::total(int j) const {
  const int d = dim();
  if (j < 0 || j >= d) fail(ErrorCode::IndexOutOfRange, "budget bin out of range");
  return dynamical[j] + geometric[j] + technical[j];
}

std::vector<double> PhaseBudget::totals() const {
  const int d = dim();
  std::vector<double> t(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) t[j] = dynamical[j] + geometric[j] + technical[j];
  return t;
}

TimeBinState perturb(const TimeBinState& s, const PhaseBudget& budget) {
  if (budget.dim() != s.dim()) {
    fail(ErrorCode::DimensionMismatch, "budget dimension does not match state");
  }
  return apply_diagonal(DiagonalPhaseUnitary{budget.totals()}, s);
}

CorrectionPlan build_plan(const RelativePhaseSet& phases) {
  if (phases.d < 2) fail(ErrorCode::InvalidArgument, "need at least 2 bins");
  if (static_cast<int>(phases.delta_theta.size()) != phases.d - 1) {
    fail(ErrorCode::DimensionMismatch, "increment list does not match dimension");
  }
  if (phases.reference_bin < 0 || phases.reference_bin >= phases.d) {
    fail(ErrorCode::IndexOutOfRange, "reference bin out of range");
  }
  CorrectionPlan plan;
  plan.cumulative.resize(static_cast<std::size_t>(phases.d));
  plan.cumulative[0] = 0.0;
  for (int j = 0; j + 1 < phases.d; ++j) {
    plan.cumulative[j + 1] = plan.cumulative[j] + phases.delta_theta[j];
  }
  const double anchor = plan.cumulative[phases.reference_bin];
  plan.correction_phases.resize(plan.cumulative.size());
  for (int j = 0; j < phases.d; ++j) {
    plan.cumulative[j] -= anchor;
    plan.correction_phases[j] = -plan.cumulative[j];
  }
  return plan;
}

RelativePhaseSet separate_dynamical(const RelativePhaseSet& phases,
                                    const std::vector<double>& dyn_model) {
  if (static_cast<int>(dyn_model.size()) != phases.d) {
    fail(ErrorCode::DimensionMismatch, "dynamical model must give one phase per bin");
  }
  if (static_cast<int>(phases.delta_theta.size()) != phases.d - 1) {
    fail(ErrorCode::DimensionMismatch, "increment list does not match dimension");
  }
  RelativePhaseSet out = phases;
  for (int j = 0; j + 1 < phases.d; ++j) {
    out.delta_theta[j] = wrap_angle(phases.delta_theta[j] - (dyn_model[j + 1] - dyn_model[j]));
  }
  return out;
}

ClosedLoopReport closed_loop(const ClosedLoopConfig& config) {
  config.target.require_normalized("closed_loop target");
  const int d = config.target.dim();

  std::vector<double> target_offsets(static_cast<std::size_t>(d) - 1);
  for (int j = 0; j + 1 < d; ++j) {
    target_offsets[j] = config.target.pair_offset(j, j + 1);
  }

  const TimeBinState prepared = perturb(config.target, config.budget);

  const auto scan_pair = [&](const TimeBinState& s, int j, std::uint64_t stream) {
    ScanConfig sc;
    sc.j = j;
    sc.k = j + 1;
    sc.phases = ScanConfig::uniform_phases(config.scan_points);
    sc.shots_per_point = config.shots_per_point;
    sc.rng_seed = derive_seed(config.seed, stream, static_cast<std::uint64_t>(j));
    return fit_fringe(simulate_scan(s, sc), config.visibility_floor);
  };

  std::vector<FringeFit> fits;
  fits.reserve(static_cast<std::size_t>(d) - 1);
  for (int j = 0; j + 1 < d; ++j) fits.push_back(scan_pair(prepared, j, kCalibrationStream));

  ClosedLoopReport report{
      .prepared = prepared,
      .corrected = prepared,  // placeholder until the plan is applied
      .phases = estimate_adjacent_phases(fits, d, target_offsets),
      .plan = {},
      .fidelity_before = fidelity(prepared, config.target),
  };
  report.plan = build_plan(report.phases);
  report.corrected = apply_diagonal(report.plan.unitary(), prepared);
  report.fidelity_after = fidelity(report.corrected, config.target);

  report.residual_offsets.resize(static_cast<std::size_t>(d) - 1);
  for (int j = 0; j + 1 < d; ++j) {
    const FringeFit check = scan_pair(report.corrected, j, kVerificationStream);
    report.residual_offsets[j] = wrap_angle(target_offsets[j] - check.offset);
  }

  report.threshold = config.fidelity_threshold > 0.0
                         ? config.fidelity_threshold
                         : (config.shots_per_point == 0 ? 1.0 - 1e-6 : 0.99);
  report.passed = report.fidelity_after >= report.threshold;
  if (!report.passed && config.enforce) {
    fail(ErrorCode::VerificationFailed,
         "post-correction fidelity " + std::to_string(report.fidelity_after) +
             " below threshold " + std::to_string(report.threshold));
  }
  return report;
}

}  // namespace timebin
