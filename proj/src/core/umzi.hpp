// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_UMZI_HPP
#define TIMEBIN_CORE_UMZI_HPP

#include <Eigen/Dense>
#include <vector>

#include "core/state.hpp"

namespace timebin {

/// One unbalanced Mach-Zehnder stage: power splitting ratio eta and arm
/// phase phi. The single-port map sends each bin amplitude a_j to
/// sqrt(eta) a_j on bin j plus sqrt(1-eta) e^{i phi} a_j on bin j+1.
struct StageParams {
  double eta = 0.5;
  double phi = 0.0;
};

/// Single-port output of a cascade. The raw amplitudes are the coherent
/// path sums on the monitored port before renormalization; their squared
/// norm is the conditional weight. Bin overlap makes the map non-unitary,
/// so the weight may exceed 1 and is not a success probability.
struct CascadeResult {
  Eigen::VectorXcd raw_amplitudes;
  double conditional_weight = 0.0;
  TimeBinState state;
};

/// Apply one stage to an amplitude vector; output is one bin longer.
Eigen::VectorXcd apply_stage(const Eigen::VectorXcd& input, const StageParams& stage);

/// Fold m stages over a single excitation in bin 0. All stages share the
/// same delay, so d = m + 1. The grid argument supplies bin metadata for
/// the renormalized output state.
CascadeResult cascade(const std::vector<StageParams>& stages,
                      const TimeBinGrid& grid = TimeBinGrid{});

/// Closed-form single-port amplitudes of two cascaded balanced stages:
/// (1/2, (e^{i phi1} + e^{i phi2})/2, e^{i(phi1+phi2)}/2).
Eigen::Vector3cd qutrit_closed_form(double phi1, double phi2);

}  // namespace timebin

#endif
