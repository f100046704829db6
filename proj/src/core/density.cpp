// SPDX-License-Identifier: Apache-2.0
#include "core/density.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/phase_math.hpp"

namespace timebin {

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
    fail(ErrorCode::InvalidArgument, "density matrix must be square");
  const double herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (herm >= kHermitianTolerance)
    fail(ErrorCode::InvalidArgument,
         "density matrix is not Hermitian (max deviation " + std::to_string(herm) + ")");
  if (std::abs(trace() - 1.0) > kTraceTolerance)
    fail(ErrorCode::InvalidArgument,
         "density matrix trace " + std::to_string(trace()) + " != 1");
  known_.assign(static_cast<std::size_t>(dim()) * dim(), 1);
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries, std::vector<std::uint8_t> known)
    : entries_(std::move(entries)), known_(std::move(known)) {}

DensityMatrix DensityMatrix::from_state(const TimeBinState& s) {
  s.require_normalized("DensityMatrix::from_state");
  const Eigen::VectorXcd& a = s.amplitudes();
  return DensityMatrix(a * a.adjoint());
}

DensityMatrix DensityMatrix::from_populations(const Eigen::VectorXd& populations) {
  const int d = static_cast<int>(populations.size());
  if (d < 2) fail(ErrorCode::InvalidArgument, "need at least two populations");
  if (populations.minCoeff() < -1e-12)
    fail(ErrorCode::InvalidArgument, "negative population");
  if (std::abs(populations.sum() - 1.0) > 1e-6)
    fail(ErrorCode::PopulationMismatch,
         "populations sum to " + std::to_string(populations.sum()) + ", expected 1");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  std::vector<std::uint8_t> known(static_cast<std::size_t>(d) * d, 0);
  for (int j = 0; j < d; ++j) {
    m(j, j) = populations[j];
    known[static_cast<std::size_t>(j) * d + j] = 1;
  }
  return DensityMatrix(std::move(m), std::move(known));
}

void DensityMatrix::check_indices(int j, int k) const {
  if (j < 0 || k < 0 || j >= dim() || k >= dim())
    fail(ErrorCode::IndexOutOfRange,
         "density index (" + std::to_string(j) + "," + std::to_string(k) +
             ") outside d=" + std::to_string(dim()));
}

std::complex<double> DensityMatrix::entry(int j, int k) const {
  check_indices(j, k);
  return entries_(j, k);
}

double DensityMatrix::population(int j) const {
  check_indices(j, j);
  return entries_(j, j).real();
}

bool DensityMatrix::known(int j, int k) const {
  check_indices(j, k);
  return known_[static_cast<std::size_t>(j) * dim() + k] != 0;
}

int DensityMatrix::unknown_offdiagonal_count() const {
  int n = 0;
  for (int j = 0; j < dim(); ++j)
    for (int k = j + 1; k < dim(); ++k)
      if (!known(j, k)) ++n;
  return n;
}

void DensityMatrix::set_coherence(int j, int k, std::complex<double> value) {
  check_indices(j, k);
  if (j == k) fail(ErrorCode::InvalidArgument, "set_coherence needs j != k");
  entries_(j, k) = value;
  entries_(k, j) = std::conj(value);
  known_[static_cast<std::size_t>(j) * dim() + k] = 1;
  known_[static_cast<std::size_t>(k) * dim() + j] = 1;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool DensityMatrix::project_psd() {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries_);
  Eigen::VectorXd ev = es.eigenvalues();
  const bool clipped = ev.minCoeff() < -1e-12;
  ev = ev.cwiseMax(0.0);
  const double total = ev.sum();
  if (total < 1e-14)
    fail(ErrorCode::ZeroVector, "PSD projection collapsed the density matrix");
  ev /= total;
  entries_ = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return clipped;
}

Eigen::VectorXd DensityMatrix::fourier_probabilities() const {
  const int d = dim();
  Eigen::VectorXd probs(d);
  for (int l = 0; l < d; ++l) {
    // |f_l>_j = e^{2 pi i l j / d} / sqrt(d)
    std::complex<double> acc = 0.0;
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        acc += std::polar(1.0, -kTwoPi * static_cast<double>((l * j) % d) / d) *
               entries_(j, k) *
               std::polar(1.0, kTwoPi * static_cast<double>((l * k) % d) / d);
    probs[l] = acc.real() / d;
  }
  return probs;
}

}  // namespace timebin
