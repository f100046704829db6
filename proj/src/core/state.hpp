// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_STATE_HPP
#define TIMEBIN_CORE_STATE_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace timebin {

/// Temporal grid the bins live on. delta_t, sigma_pulse and sigma_jitter are
/// carried as metadata; no waveform is ever simulated. The grid counts as
/// orthogonal when the bin separation dominates pulse width plus jitter.
struct TimeBinGrid {
  int d = 2;
  double delta_t = 1.0;
  double sigma_pulse = 0.0;
  double sigma_jitter = 0.0;

  bool orthogonal() const { return delta_t > sigma_pulse + sigma_jitter; }
};

/// Pure state over d time bins: one complex amplitude per bin.
/// Immutable after construction. States built through normalize() carry
/// unit norm; states loaded from external data keep a flag recording
/// whether their amplitudes were unit-norm within 1e-10.
class TimeBinState {
public:
  static constexpr double kNormTolerance = 1e-10;

  TimeBinState(TimeBinGrid grid, Eigen::VectorXcd amplitudes);

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const TimeBinGrid& grid() const { return grid_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  bool is_normalized() const { return normalized_; }

  /// |alpha_j|^2 per bin.
  Eigen::VectorXd populations() const;

  /// arg(alpha_j * conj(alpha_k)): the exact fringe offset of pair (j,k).
  /// Errors with FringeFlat when either amplitude vanishes.
  double pair_offset(int j, int k) const;

  /// Same magnitudes, all phases zeroed (the flat-phase reference).
  TimeBinState flattened() const;

  /// Throws InvalidArgument unless the state is normalized.
  void require_normalized(const char* where) const;

private:
  TimeBinGrid grid_;
  Eigen::VectorXcd amplitudes_;
  bool normalized_;
};

struct NormalizeResult {
  TimeBinState state;
  double weight;  // squared norm before rescaling (conditional weight)
};

/// Rescale raw amplitudes to unit norm. Errors with ZeroVector when the
/// vector norm is below 1e-14.
NormalizeResult normalize(const TimeBinGrid& grid, const Eigen::VectorXcd& raw);

/// |<a|b>|^2. Insensitive to global phases on either argument.
double fidelity(const TimeBinState& a, const TimeBinState& b);

/// Phase-only diagonal unitary diag(e^{i phi_j}).
class DiagonalPhaseUnitary {
public:
  explicit DiagonalPhaseUnitary(Eigen::VectorXd phases)
      : phases_(std::move(phases)) {}

  explicit DiagonalPhaseUnitary(const std::vector<double>& phases)
      : phases_(Eigen::Map<const Eigen::VectorXd>(phases.data(),
                                                  static_cast<Eigen::Index>(phases.size()))) {}

  static DiagonalPhaseUnitary identity(int d) {
    return DiagonalPhaseUnitary(Eigen::VectorXd::Zero(d));
  }

  int dim() const { return static_cast<int>(phases_.size()); }
  const Eigen::VectorXd& phases() const { return phases_; }
  DiagonalPhaseUnitary inverse() const { return DiagonalPhaseUnitary(-phases_); }

private:
  Eigen::VectorXd phases_;
};

TimeBinState apply_diagonal(const DiagonalPhaseUnitary& u, const TimeBinState& s);

/// Apply the DFT F_d with (F_d)_{lj} = e^{2 pi i j l / d} / sqrt(d), or its
/// inverse (conjugate convention) when `inverse` is set.
TimeBinState dft_apply(const TimeBinState& s, bool inverse = false);

/// The DFT as an explicit matrix; mainly for cross-checks.
Eigen::MatrixXcd dft_matrix(int d);

}  // namespace timebin

#endif
