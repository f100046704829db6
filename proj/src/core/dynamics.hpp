// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_DYNAMICS_HPP
#define TIMEBIN_CORE_DYNAMICS_HPP

#include <Eigen/Dense>
#include <vector>

#include "core/phase_math.hpp"
#include "core/state.hpp"

namespace timebin {

/// Effective-field loop for one spin-1/2: the field direction traces a cone
/// of half-angle cone_angle about z at angular rate loop_rate, with Larmor
/// splitting spin_gap (hbar = 1 throughout).
struct FieldSchedule {
  double cone_angle = 0.0;  // radians, in [0, pi]
  double spin_gap = 1.0;    // omega > 0
  double loop_rate = 1.0;   // Omega > 0
  double n_cycles = 1.0;    // >= 0, fractional loops allowed

  void validate() const;
  Eigen::Vector3d axis(double t) const;
  double period() const { return 2.0 * kPi / loop_rate; }
  double duration() const { return n_cycles * period(); }
  double default_dt() const { return period() * 1e-4; }
  double adiabaticity_ratio() const { return spin_gap / loop_rate; }
  bool non_adiabatic() const { return adiabaticity_ratio() < 10.0; }
};

/// (omega/2) n(t).sigma for one spin.
Eigen::Matrix2cd spin_hamiltonian(const FieldSchedule& schedule, double t);

/// Joint Hamiltonian of 1 or 2 decoupled spins (H_a x I + I x H_b), plus an
/// optional constant energy shift times identity.
Eigen::MatrixXcd hamiltonian_at(const std::vector<FieldSchedule>& schedules, double t,
                                double energy_shift = 0.0);

/// Stored propagation run: sampled states plus everything needed to
/// re-evaluate H(t) along it.
struct Trajectory {
  std::vector<FieldSchedule> schedules;
  double energy_shift = 0.0;
  double dt = 0.0;  // actual step after rounding the span to whole steps
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;

  int samples() const { return static_cast<int>(times.size()); }
  int dim() const { return static_cast<int>(states.empty() ? 0 : states.front().size()); }
  double duration() const { return times.empty() ? 0.0 : times.back(); }
  const Eigen::VectorXcd& initial() const { return states.front(); }
  const Eigen::VectorXcd& final_state() const { return states.back(); }
};

/// Integrate i dpsi/dt = H(t) psi with the exponential midpoint rule
/// psi <- exp(-i H(t + dt/2) dt) psi. Each step is exactly unitary, so the
/// norm is conserved to rounding. The step must satisfy dt * ||H|| <= 0.5.
Trajectory propagate(const std::vector<FieldSchedule>& schedules, double dt,
                     const Eigen::VectorXcd& psi0, double energy_shift = 0.0);

/// Total / dynamical / geometric phase along a trajectory:
///   total[n]      unwrapped arg <psi(0)|psi(t_n)>
///   dynamical[n]  -integral of <psi|H|psi> dt' (trapezoid rule)
///   geometric[n]  total[n] - dynamical[n]
/// im_overlap_accumulator is the running sum of Im <psi_n|psi_{n+1}>; it
/// tracks the dynamical phase for an exact trajectory and is reported purely
/// as a diagnostic.
struct PhaseDecomposition {
  std::vector<double> times;
  std::vector<double> total;
  std::vector<double> dynamical;
  std::vector<double> geometric;
  std::vector<double> im_overlap_accumulator;
};

PhaseDecomposition decompose_phases(const Trajectory& trajectory);

/// Unwrapped per-bin phases theta_j = arg alpha_j(T) - arg alpha_j(0),
/// tracked continuously along the trajectory, plus their mod-2pi reduction.
struct BinPhaseReport {
  std::vector<double> theta_abs;
  std::vector<double> theta_mod;  // in [0, 2pi)
};

/// mapping[basis_index] = bin index; empty mapping means identity
/// (lexicographic tensor order |uu>, |ud>, |du>, |dd> for two spins).
BinPhaseReport bin_phases(const Trajectory& trajectory, const std::vector<int>& mapping = {});

/// diag(e^{-i theta_j}): feed-forward that returns every bin to its initial
/// phase, leaving magnitudes untouched.
DiagonalPhaseUnitary correction_from_dynamics(const BinPhaseReport& report);

/// Loop integral of the connection i<n|dn/dt> along the instantaneous
/// field-aligned eigenstate, evaluated by finite differences in a smooth
/// gauge. Adiabatic oracle for the geometric phase: -pi(1 - cos cone_angle)
/// per cycle.
double berry_connection_phase(const FieldSchedule& schedule, int samples = 4096);

}  // namespace timebin

#endif
