// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_DENSITY_HPP
#define TIMEBIN_CORE_DENSITY_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "core/state.hpp"

namespace timebin {

/// d x d density operator with per-entry coverage bookkeeping: tomography
/// only determines the off-diagonals whose pair was actually scanned, so
/// every entry carries a known/unknown flag. Unknown entries read as zero.
class DensityMatrix {
public:
  static constexpr double kHermitianTolerance = 1e-10;
  static constexpr double kTraceTolerance = 1e-10;

  /// Full matrix, all entries known. Checks Hermiticity and unit trace.
  explicit DensityMatrix(Eigen::MatrixXcd entries);

  /// Rank-1 projector |psi><psi| of a normalized state.
  static DensityMatrix from_state(const TimeBinState& s);

  /// Diagonal part only; every off-diagonal starts out unknown.
  static DensityMatrix from_populations(const Eigen::VectorXd& populations);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  std::complex<double> entry(int j, int k) const;
  double population(int j) const;

  bool known(int j, int k) const;
  int unknown_offdiagonal_count() const;

  /// Set rho_jk (and rho_kj by conjugation) and mark the pair known.
  void set_coherence(int j, int k, std::complex<double> value);

  double trace() const { return entries_.trace().real(); }
  double min_eigenvalue() const;

  /// Clip negative eigenvalues to zero and renormalize the trace.
  /// Returns true when the clip changed anything beyond numerical noise.
  bool project_psd();

  /// Probability of each DFT basis outcome, <f_l| rho |f_l>.
  Eigen::VectorXd fourier_probabilities() const;

private:
  DensityMatrix(Eigen::MatrixXcd entries, std::vector<std::uint8_t> known);
  void check_indices(int j, int k) const;

  Eigen::MatrixXcd entries_;
  std::vector<std::uint8_t> known_;  // row-major d*d coverage mask
};

}  // namespace timebin

#endif
