// SPDX-License-Identifier: Apache-2.0
#include "core/state.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/phase_math.hpp"

namespace timebin {

TimeBinState::TimeBinState(TimeBinGrid grid, Eigen::VectorXcd amplitudes)
    : grid_(grid), amplitudes_(std::move(amplitudes)) {
  if (grid_.d < 2) fail(ErrorCode::InvalidArgument, "grid needs d >= 2 bins");
  if (grid_.d != static_cast<int>(amplitudes_.size()))
    fail(ErrorCode::DimensionMismatch,
         "amplitude vector length " + std::to_string(amplitudes_.size()) +
             " does not match grid d=" + std::to_string(grid_.d));
  normalized_ = std::abs(amplitudes_.squaredNorm() - 1.0) <= kNormTolerance;
}

Eigen::VectorXd TimeBinState::populations() const {
  return amplitudes_.cwiseAbs2();
}

double TimeBinState::pair_offset(int j, int k) const {
  const int d = dim();
  if (j < 0 || k < 0 || j >= d || k >= d || j == k)
    fail(ErrorCode::IndexOutOfRange,
         "invalid bin pair (" + std::to_string(j) + "," + std::to_string(k) + ")");
  const std::complex<double> rho_jk = amplitudes_[j] * std::conj(amplitudes_[k]);
  if (std::abs(rho_jk) < 1e-14)
    fail(ErrorCode::FringeFlat,
         "pair (" + std::to_string(j) + "," + std::to_string(k) +
             ") has no coherence; offset undefined");
  return std::arg(rho_jk);
}

TimeBinState TimeBinState::flattened() const {
  Eigen::VectorXcd flat = amplitudes_.cwiseAbs().cast<std::complex<double>>();
  return TimeBinState(grid_, std::move(flat));
}

void TimeBinState::require_normalized(const char* where) const {
  if (!normalized_)
    fail(ErrorCode::InvalidArgument,
         std::string(where) + " requires a normalized state");
}

NormalizeResult normalize(const TimeBinGrid& grid, const Eigen::VectorXcd& raw) {
  const double weight = raw.squaredNorm();
  if (std::sqrt(weight) < 1e-14)
    fail(ErrorCode::ZeroVector, "cannot normalize a zero amplitude vector");
  TimeBinGrid g = grid;
  g.d = static_cast<int>(raw.size());
  return NormalizeResult{TimeBinState(g, raw / std::sqrt(weight)), weight};
}

double fidelity(const TimeBinState& a, const TimeBinState& b) {
  if (a.dim() != b.dim())
    fail(ErrorCode::DimensionMismatch,
         "fidelity of states with d=" + std::to_string(a.dim()) + " and d=" +
             std::to_string(b.dim()));
  a.require_normalized("fidelity");
  b.require_normalized("fidelity");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

TimeBinState apply_diagonal(const DiagonalPhaseUnitary& u, const TimeBinState& s) {
  if (u.dim() != s.dim())
    fail(ErrorCode::DimensionMismatch,
         "diagonal unitary dim " + std::to_string(u.dim()) +
             " applied to state dim " + std::to_string(s.dim()));
  Eigen::VectorXcd out = s.amplitudes();
  for (int j = 0; j < s.dim(); ++j)
    out[j] *= std::polar(1.0, u.phases()[j]);
  return TimeBinState(s.grid(), std::move(out));
}

TimeBinState dft_apply(const TimeBinState& s, bool inverse) {
  s.require_normalized("dft_apply");
  const int d = s.dim();
  const double sign = inverse ? -1.0 : 1.0;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(d);
  for (int l = 0; l < d; ++l) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < d; ++j) {
      // Reduce j*l mod d before taking sin/cos so the argument stays small.
      const double angle = sign * kTwoPi * static_cast<double>((j * l) % d) / d;
      acc += std::polar(1.0, angle) * s.amplitudes()[j];
    }
    out[l] = acc / std::sqrt(static_cast<double>(d));
  }
  return TimeBinState(s.grid(), std::move(out));
}

Eigen::MatrixXcd dft_matrix(int d) {
  Eigen::MatrixXcd f(d, d);
  for (int l = 0; l < d; ++l)
    for (int j = 0; j < d; ++j)
      f(l, j) = std::polar(1.0 / std::sqrt(static_cast<double>(d)),
                           kTwoPi * static_cast<double>((j * l) % d) / d);
  return f;
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonUniformGrid: return "NonUniformGrid";
    case ErrorCode::FringeFlat: return "FringeFlat";
    case ErrorCode::MissingPair: return "MissingPair";
    case ErrorCode::PopulationMismatch: return "PopulationMismatch";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::OverlapVanished: return "OverlapVanished";
    case ErrorCode::AmplitudeVanished: return "AmplitudeVanished";
    case ErrorCode::UnsupportedSpinCount: return "UnsupportedSpinCount";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace timebin
