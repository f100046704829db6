// SPDX-License-Identifier: Apache-2.0
#include "core/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "core/errors.hpp"
#include "core/phase_math.hpp"

namespace timebin {

namespace {

constexpr double kGridTolerance = 1e-9;
constexpr double kTinyCoherence = 1e-14;

std::string pair_label(int j, int k) {
  return "(" + std::to_string(j) + ", " + std::to_string(k) + ")";
}

void require_uniform_grid(const std::vector<double>& phases) {
  const int points = static_cast<int>(phases.size());
  if (points < 3) {
    fail(ErrorCode::InvalidArgument, "fringe fit needs at least 3 phase points");
  }
  const double step = kTwoPi / points;
  for (int i = 0; i < points; ++i) {
    const double deviation = wrap_angle(phases[i] - phases[0] - i * step);
    if (std::abs(deviation) > kGridTolerance) {
      fail(ErrorCode::NonUniformGrid,
           "phase grid is not uniform over one period (point " + std::to_string(i) +
               " deviates by " + std::to_string(deviation) + " rad)");
    }
  }
}

}  // namespace

FringeFit fit_fringe(const FringeScan& scan, double visibility_floor) {
  require_uniform_grid(scan.config.phases);
  const int points = static_cast<int>(scan.config.phases.size());

  std::vector<double> y(points);
  const bool noisy = scan.has_counts();
  if (noisy) {
    if (static_cast<int>(scan.counts.size()) != points) {
      fail(ErrorCode::DimensionMismatch, "counts/phases length mismatch");
    }
    if (scan.config.shots_per_point <= 0) {
      fail(ErrorCode::InvalidArgument, "counts present but shots_per_point is zero");
    }
    bool any = false;
    for (int i = 0; i < points; ++i) {
      if (scan.counts[i] < 0) fail(ErrorCode::InvalidArgument, "negative photon count");
      any = any || scan.counts[i] > 0;
      y[i] = static_cast<double>(scan.counts[i]) /
             static_cast<double>(scan.config.shots_per_point);
    }
    if (!any) {
      fail(ErrorCode::FringeFlat,
           "all counts are zero for pair " + pair_label(scan.config.j, scan.config.k));
    }
  } else {
    if (static_cast<int>(scan.probabilities.size()) != points) {
      fail(ErrorCode::DimensionMismatch, "probabilities/phases length mismatch");
    }
    y = scan.probabilities;
  }

  // First-harmonic projection; exact for the model on a uniform grid.
  double mean = 0.0;
  std::complex<double> rho(0.0, 0.0);
  for (int i = 0; i < points; ++i) {
    mean += y[i];
    rho += y[i] * std::polar(1.0, -scan.config.phases[i]);
  }
  mean /= points;
  rho *= 2.0 / points;

  if (noisy) {
    // Least-squares refinement in the linear parameters (m, a, b) of
    // m + a cos(phi) + b sin(phi). It coincides with the projection on a
    // uniform grid but also absorbs the tolerated grid jitter.
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (int i = 0; i < points; ++i) {
      const Eigen::Vector3d basis(1.0, std::cos(scan.config.phases[i]),
                                  std::sin(scan.config.phases[i]));
      normal += basis * basis.transpose();
      rhs += y[i] * basis;
    }
    const Eigen::Vector3d sol = normal.colPivHouseholderQr().solve(rhs);
    mean = sol[0];
    rho = std::complex<double>(sol[1], -sol[2]);
  }

  FringeFit fit;
  fit.j = scan.config.j;
  fit.k = scan.config.k;
  fit.coherence = std::abs(rho);
  fit.mean = mean;
  if (!(mean > 0.0)) {
    fail(ErrorCode::FringeFlat,
         "no signal for pair " + pair_label(fit.j, fit.k));
  }
  fit.visibility = fit.coherence / mean;
  if (fit.visibility < visibility_floor) {
    fail(ErrorCode::FringeFlat,
         "visibility " + std::to_string(fit.visibility) + " below floor " +
             std::to_string(visibility_floor) + " for pair " + pair_label(fit.j, fit.k));
  }
  fit.offset = wrap_angle(std::arg(rho));

  if (noisy) {
    const double shots = static_cast<double>(scan.config.shots_per_point);
    double var_theta = 0.0;
    double var_mean = 0.0;
    for (int i = 0; i < points; ++i) {
      const double phi = scan.config.phases[i];
      const double model =
          std::max(mean + (std::polar(1.0, phi) * rho).real(), 0.0);
      const double var_y = model / shots;
      const double s = std::sin(phi + fit.offset);
      var_theta += var_y * s * s;
      var_mean += var_y;
    }
    const double scale = 2.0 / (points * fit.coherence);
    fit.stderr_offset = scale * std::sqrt(var_theta);
    fit.stderr_mean = std::sqrt(var_mean) / points;
  }
  return fit;
}

RelativePhaseSet estimate_adjacent_phases(
    const std::vector<FringeFit>& fits, int d,
    const std::optional<std::vector<double>>& reference_offsets) {
  if (d < 2) fail(ErrorCode::InvalidArgument, "need at least 2 bins");
  if (reference_offsets && static_cast<int>(reference_offsets->size()) != d - 1) {
    fail(ErrorCode::DimensionMismatch, "reference offsets must cover the adjacent pairs");
  }

  std::vector<const FringeFit*> by_pair(static_cast<std::size_t>(d) - 1, nullptr);
  for (const FringeFit& fit : fits) {
    if (fit.k != fit.j + 1 || fit.j < 0 || fit.k >= d) {
      fail(ErrorCode::InvalidArgument,
           "pair " + pair_label(fit.j, fit.k) + " is not an adjacent pair of a " +
               std::to_string(d) + "-bin register");
    }
    if (by_pair[fit.j] != nullptr) {
      fail(ErrorCode::InvalidArgument, "duplicate fit for pair " + pair_label(fit.j, fit.k));
    }
    by_pair[fit.j] = &fit;
  }

  RelativePhaseSet set;
  set.d = d;
  set.reference_bin = 0;
  set.delta_theta.resize(static_cast<std::size_t>(d) - 1);
  set.visibilities.resize(static_cast<std::size_t>(d) - 1);
  for (int j = 0; j < d - 1; ++j) {
    const FringeFit* fit = by_pair[j];
    if (fit == nullptr) {
      fail(ErrorCode::MissingPair, "no fringe data for pair " + pair_label(j, j + 1));
    }
    set.delta_theta[j] = reference_offsets
                             ? wrap_angle((*reference_offsets)[j] - fit->offset)
                             : fit->offset;
    set.visibilities[j] = fit->visibility;
  }
  return set;
}

RelativePhaseSet estimate_adjacent_phases(const std::vector<FringeScan>& scans,
                                          double visibility_floor) {
  const int d = static_cast<int>(scans.size()) + 1;
  std::vector<FringeFit> fits;
  fits.reserve(scans.size());
  for (const FringeScan& scan : scans) fits.push_back(fit_fringe(scan, visibility_floor));
  return estimate_adjacent_phases(fits, d);
}

DensityMatrix assemble_density(const Eigen::VectorXd& populations,
                               const std::vector<FringeFit>& fits,
                               double mean_sigma_tolerance,
                               std::int64_t population_shots) {
  DensityMatrix rho = DensityMatrix::from_populations(populations);
  const int d = rho.dim();
  for (const FringeFit& fit : fits) {
    if (fit.j < 0 || fit.j >= d || fit.k < 0 || fit.k >= d || fit.j == fit.k) {
      fail(ErrorCode::IndexOutOfRange, "fit pair " + pair_label(fit.j, fit.k) +
                                           " out of range for dimension " + std::to_string(d));
    }
    const double expected = 0.5 * (populations[fit.j] + populations[fit.k]);
    double sigma_sq = fit.stderr_mean * fit.stderr_mean;
    if (population_shots > 0) {
      const auto clamp01 = [](double p) { return std::min(std::max(p, 0.0), 1.0); };
      const double pj = clamp01(populations[fit.j]);
      const double pk = clamp01(populations[fit.k]);
      sigma_sq +=
          0.25 * (pj * (1.0 - pj) + pk * (1.0 - pk)) / static_cast<double>(population_shots);
    }
    const double allowed = std::max(mean_sigma_tolerance * std::sqrt(sigma_sq), 1e-9);
    if (std::abs(fit.mean - expected) > allowed) {
      fail(ErrorCode::PopulationMismatch,
           "fringe mean " + std::to_string(fit.mean) + " for pair " +
               pair_label(fit.j, fit.k) + " disagrees with populations (expected " +
               std::to_string(expected) + ", allowed " + std::to_string(allowed) + ")");
    }
    rho.set_coherence(fit.j, fit.k, std::polar(fit.coherence, fit.offset));
  }
  return rho;
}

DensityMatrix pairwise_coherences(const std::vector<FringeScan>& scans,
                                  const Eigen::VectorXd& populations,
                                  double visibility_floor, double mean_sigma_tolerance,
                                  std::int64_t population_shots) {
  std::vector<FringeFit> fits;
  fits.reserve(scans.size());
  for (const FringeScan& scan : scans) fits.push_back(fit_fringe(scan, visibility_floor));
  return assemble_density(populations, fits, mean_sigma_tolerance, population_shots);
}

std::vector<ClosureResidual> closure_residuals(const DensityMatrix& rho) {
  const int d = rho.dim();
  std::vector<ClosureResidual> out;
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      for (int l = k + 1; l < d; ++l) {
        if (!rho.known(j, k) || !rho.known(k, l) || !rho.known(j, l)) continue;
        const std::complex<double> a = rho.entry(j, k);
        const std::complex<double> b = rho.entry(k, l);
        const std::complex<double> c = rho.entry(j, l);
        if (std::abs(a) < kTinyCoherence || std::abs(b) < kTinyCoherence ||
            std::abs(c) < kTinyCoherence) {
          continue;
        }
        ClosureResidual r;
        r.j = j;
        r.k = k;
        r.l = l;
        r.residual = wrap_angle(std::arg(a) + std::arg(b) - std::arg(c));
        out.push_back(r);
      }
    }
  }
  return out;
}

double max_closure_residual(const DensityMatrix& rho) {
  double worst = 0.0;
  for (const ClosureResidual& r : closure_residuals(rho)) {
    worst = std::max(worst, std::abs(r.residual));
  }
  return worst;
}

}  // namespace timebin
