// SPDX-License-Identifier: Apache-2.0
#include "core/interferometer.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <string>

#include "core/errors.hpp"
#include "core/phase_math.hpp"
#include "core/rng.hpp"

namespace timebin {

namespace {

constexpr double kProbSlack = 1e-12;

double checked_probability(double p, double phi) {
  if (p < -kProbSlack || p > 1.0 + kProbSlack) {
    fail(ErrorCode::Internal, "fringe probability " + std::to_string(p) +
                                  " out of range at phi=" + std::to_string(phi));
  }
  return std::min(std::max(p, 0.0), 1.0);
}

std::vector<std::int64_t> draw_counts(const std::vector<double>& probs,
                                      std::int64_t shots, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::int64_t> counts;
  counts.reserve(probs.size());
  for (double p : probs) {
    std::poisson_distribution<std::int64_t> poisson(static_cast<double>(shots) * p);
    counts.push_back(poisson(rng));
  }
  return counts;
}

}  // namespace

std::vector<double> ScanConfig::uniform_phases(int points) {
  if (points < 3) fail(ErrorCode::InvalidArgument, "need at least 3 phase points");
  std::vector<double> phases(points);
  for (int i = 0; i < points; ++i) phases[i] = kTwoPi * i / points;
  return phases;
}

double fringe_probability(const DensityMatrix& rho, int j, int k, double phi) {
  const int d = rho.dim();
  if (j < 0 || j >= d || k < 0 || k >= d) {
    fail(ErrorCode::IndexOutOfRange, "fringe pair out of range");
  }
  if (j == k) fail(ErrorCode::InvalidArgument, "fringe pair must be distinct bins");
  const double mean = 0.5 * (rho.population(j) + rho.population(k));
  const std::complex<double> coh = rho.known(j, k) ? rho.entry(j, k) : 0.0;
  return mean + (std::polar(1.0, phi) * coh).real();
}

FringeScan simulate_scan(const DensityMatrix& rho, const ScanConfig& config) {
  if (config.phases.empty()) fail(ErrorCode::InvalidArgument, "empty phase list");
  if (config.shots_per_point < 0) {
    fail(ErrorCode::InvalidArgument, "shots_per_point must be non-negative");
  }
  FringeScan scan;
  scan.config = config;
  scan.probabilities.reserve(config.phases.size());
  for (double phi : config.phases) {
    scan.probabilities.push_back(
        checked_probability(fringe_probability(rho, config.j, config.k, phi), phi));
  }
  if (config.shots_per_point > 0) {
    scan.counts = draw_counts(scan.probabilities, config.shots_per_point, config.rng_seed);
  }
  return scan;
}

FringeScan simulate_scan(const TimeBinState& s, const ScanConfig& config) {
  return simulate_scan(DensityMatrix::from_state(s), config);
}

Eigen::VectorXd fourier_basis_probabilities(const TimeBinState& s) {
  const TimeBinState f = dft_apply(s, /*inverse=*/true);
  return f.amplitudes().cwiseAbs2();
}

namespace {

Eigen::VectorXd sampled_distribution(const Eigen::VectorXd& probs, std::int64_t shots,
                                     std::uint64_t seed) {
  if (shots == 0) return probs;
  if (shots < 0) fail(ErrorCode::InvalidArgument, "shots must be non-negative");
  Rng rng(seed);
  Eigen::VectorXd out(probs.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    std::poisson_distribution<std::int64_t> poisson(static_cast<double>(shots) * probs[i]);
    out[i] = static_cast<double>(poisson(rng));
    total += out[i];
  }
  if (total <= 0.0) fail(ErrorCode::FringeFlat, "no photons detected in population scan");
  return out / total;
}

}  // namespace

Eigen::VectorXd simulate_populations(const TimeBinState& s, std::int64_t shots,
                                     std::uint64_t seed) {
  return sampled_distribution(s.populations(), shots, seed);
}

Eigen::VectorXd simulate_fourier_probabilities(const TimeBinState& s, std::int64_t shots,
                                               std::uint64_t seed) {
  return sampled_distribution(fourier_basis_probabilities(s), shots, seed);
}

}  // namespace timebin
