// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_ESTIMATION_HPP
#define TIMEBIN_CORE_ESTIMATION_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "core/density.hpp"
#include "core/interferometer.hpp"

namespace timebin {

/// Parameters of P(phi) = mean + coherence * cos(phi + offset) recovered from
/// one fringe scan. Uncertainties are zero in noiseless mode.
struct FringeFit {
  int j = 0;
  int k = 1;
  double offset = 0.0;     // arg rho_jk, wrapped to (-pi, pi]
  double coherence = 0.0;  // |rho_jk|
  double mean = 0.0;       // (p_j + p_k) / 2
  double visibility = 0.0; // coherence / mean
  double stderr_offset = 0.0;
  double stderr_mean = 0.0;
};

/// Adjacent-pair phase increments for one calibration round.
/// delta_theta[j] refers to the (j, j+1) pair; reference_bin carries no
/// increment and anchors the global phase.
struct RelativePhaseSet {
  int d = 2;
  std::vector<double> delta_theta;
  std::vector<double> visibilities;
  int reference_bin = 0;
};

/// Recover offset/coherence/mean from a scan taken on a uniform phase grid
/// spanning one period (at least 3 points). The first-harmonic projection is
/// exact on such grids; when counts are present a linear least-squares
/// refinement and error propagation run on top of it. Scans whose visibility
/// falls below visibility_floor are rejected as flat.
FringeFit fit_fringe(const FringeScan& scan, double visibility_floor = 0.05);

/// Collect adjacent-pair fits into per-pair phase increments. Without
/// reference offsets the raw fitted offsets are returned; with them the
/// increment is wrap(reference - fitted), i.e. the phase still to apply to
/// reach the reference.
RelativePhaseSet estimate_adjacent_phases(
    const std::vector<FringeFit>& fits, int d,
    const std::optional<std::vector<double>>& reference_offsets = std::nullopt);

/// Convenience form: fit the d-1 adjacent-pair scans, then collect the raw
/// offsets.
RelativePhaseSet estimate_adjacent_phases(const std::vector<FringeScan>& scans,
                                          double visibility_floor = 0.05);

/// Build a density matrix from measured populations plus fitted pairwise
/// coherences. Each fit's mean level must agree with (p_j + p_k)/2 within
/// mean_sigma_tolerance combined standard errors (with a small absolute
/// floor), else the two data sets are inconsistent. population_shots > 0
/// folds the counting error of the population measurement into that budget.
DensityMatrix assemble_density(const Eigen::VectorXd& populations,
                               const std::vector<FringeFit>& fits,
                               double mean_sigma_tolerance = 5.0,
                               std::int64_t population_shots = 0);

/// Fit each scan, then assemble. Pairs may be arbitrary (not just adjacent);
/// unscanned off-diagonals stay marked unknown.
DensityMatrix pairwise_coherences(const std::vector<FringeScan>& scans,
                                  const Eigen::VectorXd& populations,
                                  double visibility_floor = 0.05,
                                  double mean_sigma_tolerance = 5.0,
                                  std::int64_t population_shots = 0);

/// Cyclic consistency of fitted phases: wrap(arg rho_jk + arg rho_kl -
/// arg rho_jl) for every triangle whose three coherences are known. All
/// residuals vanish for phases drawn from a single underlying state.
struct ClosureResidual {
  int j = 0;
  int k = 0;
  int l = 0;
  double residual = 0.0;
};

std::vector<ClosureResidual> closure_residuals(const DensityMatrix& rho);
double max_closure_residual(const DensityMatrix& rho);

}  // namespace timebin

#endif
