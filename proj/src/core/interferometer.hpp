// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_INTERFEROMETER_HPP
#define TIMEBIN_CORE_INTERFEROMETER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "core/density.hpp"
#include "core/state.hpp"

namespace timebin {

/// One analyzer sweep: which pair is interfered, at which analyzer phases,
/// with how many detection shots per point (0 = noiseless probabilities).
struct ScanConfig {
  int j = 0;
  int k = 1;
  std::vector<double> phases;
  std::int64_t shots_per_point = 0;
  std::uint64_t rng_seed = 0;

  static std::vector<double> uniform_phases(int points);
};

/// Result of a sweep: ideal single-port probability per phase point, plus
/// Poisson photon counts when shots_per_point > 0.
struct FringeScan {
  ScanConfig config;
  std::vector<double> probabilities;
  std::vector<std::int64_t> counts;  // empty in noiseless mode

  bool has_counts() const { return !counts.empty(); }
};

/// Single-port detection probability for mixing bins j and k at analyzer
/// phase phi: (p_j + p_k)/2 + Re[e^{i phi} rho_jk]. Unknown coherences
/// read as zero.
double fringe_probability(const DensityMatrix& rho, int j, int k, double phi);

/// Sweep the analyzer phase over config.phases. Counts are drawn
/// independently per point from Poisson(shots * P), reproducible under a
/// fixed rng_seed.
FringeScan simulate_scan(const DensityMatrix& rho, const ScanConfig& config);
FringeScan simulate_scan(const TimeBinState& s, const ScanConfig& config);

/// |<f_l|psi>|^2 for every DFT basis state.
Eigen::VectorXd fourier_basis_probabilities(const TimeBinState& s);

/// Computational-basis populations as a photon-counting experiment would
/// record them: exact when shots == 0, otherwise normalized Poisson counts.
Eigen::VectorXd simulate_populations(const TimeBinState& s, std::int64_t shots,
                                     std::uint64_t seed);

/// Fourier-basis probabilities through the same counting model.
Eigen::VectorXd simulate_fourier_probabilities(const TimeBinState& s,
                                               std::int64_t shots,
                                               std::uint64_t seed);

}  // namespace timebin

#endif
