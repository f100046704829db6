// SPDX-License-Identifier: Apache-2.0
#include "core/dynamics.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "core/errors.hpp"

namespace timebin {

namespace {

using Complex = std::complex<double>;

constexpr double kStepBound = 0.5;       // accuracy guard on dt * ||H||
constexpr double kOverlapFloor = 1e-6;   // Pancharatnam phase ill-defined below
constexpr double kAmplitudeFloor = 1e-8; // per-bin unwrapping ill-defined below

int joint_dim(const std::vector<FieldSchedule>& schedules) {
  if (schedules.empty() || schedules.size() > 2) {
    fail(ErrorCode::UnsupportedSpinCount,
         "supported spin counts are 1 and 2, got " + std::to_string(schedules.size()));
  }
  return 1 << schedules.size();
}

double common_duration(const std::vector<FieldSchedule>& schedules) {
  const double t0 = schedules.front().duration();
  for (const FieldSchedule& s : schedules) {
    s.validate();
    if (std::abs(s.duration() - t0) > 1e-9 * std::max(1.0, std::abs(t0))) {
      fail(ErrorCode::InvalidArgument, "spin schedules disagree on total duration");
    }
  }
  return t0;
}

}  // namespace

void FieldSchedule::validate() const {
  if (!(spin_gap > 0.0)) fail(ErrorCode::InvalidArgument, "spin_gap must be positive");
  if (!(loop_rate > 0.0)) fail(ErrorCode::InvalidArgument, "loop_rate must be positive");
  if (!(n_cycles >= 0.0)) fail(ErrorCode::InvalidArgument, "n_cycles must be non-negative");
  if (cone_angle < 0.0 || cone_angle > kPi) {
    fail(ErrorCode::InvalidArgument, "cone_angle must lie in [0, pi]");
  }
}

Eigen::Vector3d FieldSchedule::axis(double t) const {
  const double s = std::sin(cone_angle);
  return {s * std::cos(loop_rate * t), s * std::sin(loop_rate * t), std::cos(cone_angle)};
}

Eigen::Matrix2cd spin_hamiltonian(const FieldSchedule& schedule, double t) {
  schedule.validate();
  const Eigen::Vector3d n = schedule.axis(t);
  const double half = 0.5 * schedule.spin_gap;
  Eigen::Matrix2cd h;
  h(0, 0) = Complex(half * n.z(), 0.0);
  h(0, 1) = Complex(half * n.x(), -half * n.y());
  h(1, 0) = std::conj(h(0, 1));
  h(1, 1) = Complex(-half * n.z(), 0.0);
  return h;
}

Eigen::MatrixXcd hamiltonian_at(const std::vector<FieldSchedule>& schedules, double t,
                                double energy_shift) {
  const int dim = joint_dim(schedules);
  Eigen::MatrixXcd h;
  if (schedules.size() == 1) {
    h = spin_hamiltonian(schedules[0], t);
  } else {
    const Eigen::Matrix2cd a = spin_hamiltonian(schedules[0], t);
    const Eigen::Matrix2cd b = spin_hamiltonian(schedules[1], t);
    h = Eigen::MatrixXcd::Zero(4, 4);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        h.block<2, 2>(2 * i, 2 * j) = a(i, j) * Eigen::Matrix2cd::Identity();
      }
      h.block<2, 2>(2 * i, 2 * i) += b;
    }
  }
  if (energy_shift != 0.0) h += energy_shift * Eigen::MatrixXcd::Identity(dim, dim);
  return h;
}

Trajectory propagate(const std::vector<FieldSchedule>& schedules, double dt,
                     const Eigen::VectorXcd& psi0, double energy_shift) {
  const int dim = joint_dim(schedules);
  const double span = common_duration(schedules);
  if (psi0.size() != dim) {
    fail(ErrorCode::DimensionMismatch, "initial state has wrong dimension");
  }
  if (std::abs(psi0.squaredNorm() - 1.0) > 1e-10) {
    fail(ErrorCode::InvalidArgument, "initial state must be normalized");
  }

  Trajectory traj;
  traj.schedules = schedules;
  traj.energy_shift = energy_shift;
  traj.times.push_back(0.0);
  traj.states.push_back(psi0);
  if (span == 0.0) {
    traj.dt = 0.0;
    return traj;
  }
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "dt must be positive");

  const long long n_steps = std::max(1LL, std::llround(span / dt));
  const double step = span / static_cast<double>(n_steps);
  traj.dt = step;
  traj.times.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);

  Eigen::VectorXcd psi = psi0;
  for (long long n = 0; n < n_steps; ++n) {
    const double t = step * static_cast<double>(n);
    const Eigen::MatrixXcd h = hamiltonian_at(schedules, t + 0.5 * step, energy_shift);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double h_norm = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    if (step * h_norm > kStepBound) {
      fail(ErrorCode::StepTooLarge,
           "dt * ||H|| = " + std::to_string(step * h_norm) + " exceeds " +
               std::to_string(kStepBound));
    }
    Eigen::VectorXcd phase(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) phase[i] = std::polar(1.0, -ev[i] * step);
    psi = eig.eigenvectors() * phase.asDiagonal() * (eig.eigenvectors().adjoint() * psi);
    traj.times.push_back(step * static_cast<double>(n + 1));
    traj.states.push_back(psi);
  }
  return traj;
}

PhaseDecomposition decompose_phases(const Trajectory& trajectory) {
  if (trajectory.states.empty()) fail(ErrorCode::InvalidArgument, "empty trajectory");
  const int m = trajectory.samples();
  const Eigen::VectorXcd& psi0 = trajectory.initial();

  PhaseDecomposition dec;
  dec.times = trajectory.times;
  dec.total.assign(m, 0.0);
  dec.dynamical.assign(m, 0.0);
  dec.geometric.assign(m, 0.0);
  dec.im_overlap_accumulator.assign(m, 0.0);

  const auto energy = [&](int n) {
    const Eigen::MatrixXcd h =
        hamiltonian_at(trajectory.schedules, trajectory.times[n], trajectory.energy_shift);
    return std::real(Complex(trajectory.states[n].dot(h * trajectory.states[n])));
  };

  Complex prev_overlap(1.0, 0.0);
  double prev_energy = energy(0);
  for (int n = 1; n < m; ++n) {
    const Complex overlap = psi0.dot(trajectory.states[n]);
    if (std::abs(overlap) < kOverlapFloor) {
      fail(ErrorCode::OverlapVanished,
           "overlap with the initial state fell below " + std::to_string(kOverlapFloor) +
               " at t = " + std::to_string(trajectory.times[n]));
    }
    dec.total[n] = dec.total[n - 1] + std::arg(overlap * std::conj(prev_overlap));
    prev_overlap = overlap;

    const double e = energy(n);
    const double dt_n = trajectory.times[n] - trajectory.times[n - 1];
    dec.dynamical[n] = dec.dynamical[n - 1] - 0.5 * (prev_energy + e) * dt_n;
    prev_energy = e;

    dec.geometric[n] = dec.total[n] - dec.dynamical[n];
    dec.im_overlap_accumulator[n] =
        dec.im_overlap_accumulator[n - 1] +
        std::imag(Complex(trajectory.states[n - 1].dot(trajectory.states[n])));
  }
  return dec;
}

BinPhaseReport bin_phases(const Trajectory& trajectory, const std::vector<int>& mapping) {
  if (trajectory.states.empty()) fail(ErrorCode::InvalidArgument, "empty trajectory");
  const int d = trajectory.dim();

  std::vector<int> map(mapping);
  if (map.empty()) {
    map.resize(static_cast<std::size_t>(d));
    for (int b = 0; b < d; ++b) map[b] = b;
  }
  if (static_cast<int>(map.size()) != d) {
    fail(ErrorCode::DimensionMismatch, "bin mapping length does not match dimension");
  }
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  for (int bin : map) {
    if (bin < 0 || bin >= d || seen[static_cast<std::size_t>(bin)]) {
      fail(ErrorCode::InvalidArgument, "bin mapping must be a permutation");
    }
    seen[static_cast<std::size_t>(bin)] = true;
  }

  BinPhaseReport report;
  report.theta_abs.assign(static_cast<std::size_t>(d), 0.0);
  report.theta_mod.assign(static_cast<std::size_t>(d), 0.0);
  for (int b = 0; b < d; ++b) {
    double theta = 0.0;
    Complex prev = trajectory.states.front()[b];
    for (int n = 0; n < trajectory.samples(); ++n) {
      const Complex a = trajectory.states[n][b];
      if (std::abs(a) <= kAmplitudeFloor) {
        fail(ErrorCode::AmplitudeVanished,
             "amplitude of bin " + std::to_string(map[b]) + " fell to " +
                 std::to_string(std::abs(a)) + " at t = " +
                 std::to_string(trajectory.times[n]));
      }
      if (n > 0) theta += std::arg(a * std::conj(prev));
      prev = a;
    }
    report.theta_abs[map[b]] = theta;
    report.theta_mod[map[b]] = mod_two_pi(theta);
  }
  return report;
}

DiagonalPhaseUnitary correction_from_dynamics(const BinPhaseReport& report) {
  if (report.theta_abs.empty()) fail(ErrorCode::InvalidArgument, "empty bin-phase report");
  std::vector<double> phases(report.theta_abs.size());
  for (std::size_t j = 0; j < phases.size(); ++j) phases[j] = -report.theta_abs[j];
  return DiagonalPhaseUnitary{phases};
}

double berry_connection_phase(const FieldSchedule& schedule, int samples) {
  schedule.validate();
  if (samples < 8) fail(ErrorCode::InvalidArgument, "need at least 8 integration samples");
  const double span = schedule.duration();
  if (span == 0.0) return 0.0;

  // Field-aligned eigenvector in a gauge smooth over the whole loop.
  const auto eigenstate = [&](double t) {
    Eigen::Vector2cd n;
    n[0] = Complex(std::cos(0.5 * schedule.cone_angle), 0.0);
    n[1] = std::polar(std::sin(0.5 * schedule.cone_angle), schedule.loop_rate * t);
    return n;
  };

  const double h = schedule.period() * 1e-6;
  const auto connection = [&](double t) {
    const Eigen::Vector2cd dn = (eigenstate(t + h) - eigenstate(t - h)) / (2.0 * h);
    return std::real(Complex(0.0, 1.0) * Complex(eigenstate(t).dot(dn)));
  };

  const double step = span / samples;
  double integral = 0.5 * (connection(0.0) + connection(span));
  for (int i = 1; i < samples; ++i) integral += connection(step * i);
  return integral * step;
}

}  // namespace timebin
