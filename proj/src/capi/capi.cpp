// SPDX-License-Identifier: Apache-2.0
//
// C boundary: translates between the opaque-handle C surface and the C++
// core. All exceptions are caught here and mapped to status codes; the
// message lands in a thread-local buffer served by tb_last_error().

#include "timebin/timebin.h"

#include <cstring>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "core/correction.hpp"
#include "core/density.hpp"
#include "core/dynamics.hpp"
#include "core/errors.hpp"
#include "core/estimation.hpp"
#include "core/interferometer.hpp"
#include "core/json_io.hpp"
#include "core/phase_math.hpp"
#include "core/rng.hpp"
#include "core/state.hpp"
#include "core/umzi.hpp"
#include "core/version.hpp"

struct tb_state {
  timebin::TimeBinState impl;
};

struct tb_density {
  timebin::DensityMatrix impl;
};

struct tb_trajectory {
  timebin::Trajectory impl;
};

namespace {

using timebin::Error;
using timebin::ErrorCode;

thread_local std::string tl_error;

tb_status map_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return TB_ERR_INVALID_ARGUMENT;
    case ErrorCode::ZeroVector: return TB_ERR_ZERO_VECTOR;
    case ErrorCode::DimensionMismatch: return TB_ERR_DIMENSION_MISMATCH;
    case ErrorCode::IndexOutOfRange: return TB_ERR_INDEX_OUT_OF_RANGE;
    case ErrorCode::NonUniformGrid: return TB_ERR_NON_UNIFORM_GRID;
    case ErrorCode::FringeFlat: return TB_ERR_FRINGE_FLAT;
    case ErrorCode::MissingPair: return TB_ERR_MISSING_PAIR;
    case ErrorCode::PopulationMismatch: return TB_ERR_POPULATION_MISMATCH;
    case ErrorCode::VerificationFailed: return TB_ERR_VERIFICATION_FAILED;
    case ErrorCode::StepTooLarge: return TB_ERR_STEP_TOO_LARGE;
    case ErrorCode::OverlapVanished: return TB_ERR_OVERLAP_VANISHED;
    case ErrorCode::AmplitudeVanished: return TB_ERR_AMPLITUDE_VANISHED;
    case ErrorCode::UnsupportedSpinCount: return TB_ERR_UNSUPPORTED_SPIN_COUNT;
    case ErrorCode::ParseError: return TB_ERR_PARSE;
    case ErrorCode::Internal: return TB_ERR_INTERNAL;
  }
  return TB_ERR_UNKNOWN;
}

template <typename Fn>
tb_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return TB_OK;
  } catch (const Error& e) {
    tl_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    tl_error = "out of memory";
    return TB_ERR_BAD_ALLOC;
  } catch (const std::exception& e) {
    tl_error = e.what();
    return TB_ERR_UNKNOWN;
  } catch (...) {
    tl_error = "unknown failure";
    return TB_ERR_UNKNOWN;
  }
}

void require(const void* ptr, const char* name) {
  if (ptr == nullptr) {
    timebin::fail(ErrorCode::InvalidArgument, std::string(name) + " must not be null");
  }
}

timebin::TimeBinGrid to_grid(const tb_grid& g) {
  timebin::TimeBinGrid grid;
  grid.d = g.d;
  grid.delta_t = g.delta_t;
  grid.sigma_pulse = g.sigma_pulse;
  grid.sigma_jitter = g.sigma_jitter;
  return grid;
}

tb_grid from_grid(const timebin::TimeBinGrid& g) {
  return tb_grid{g.d, g.delta_t, g.sigma_pulse, g.sigma_jitter};
}

Eigen::VectorXcd to_complex(const double* interleaved, int d) {
  Eigen::VectorXcd v(d);
  for (int j = 0; j < d; ++j) {
    v[j] = std::complex<double>(interleaved[2 * j], interleaved[2 * j + 1]);
  }
  return v;
}

void write_complex(const Eigen::VectorXcd& v, double* interleaved) {
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    interleaved[2 * j] = v[j].real();
    interleaved[2 * j + 1] = v[j].imag();
  }
}

void write_real(const Eigen::VectorXd& v, double* out) {
  std::memcpy(out, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

double floor_or_default(double visibility_floor) {
  return visibility_floor <= 0.0 ? 0.05 : visibility_floor;
}

timebin::FringeFit to_fit(const tb_fringe_fit& f) {
  timebin::FringeFit fit;
  fit.j = f.j;
  fit.k = f.k;
  fit.offset = f.offset;
  fit.coherence = f.coherence;
  fit.mean = f.mean_level;
  fit.visibility = f.visibility;
  fit.stderr_offset = f.stderr_offset;
  fit.stderr_mean = f.stderr_mean;
  return fit;
}

tb_fringe_fit from_fit(const timebin::FringeFit& fit) {
  tb_fringe_fit f;
  f.j = fit.j;
  f.k = fit.k;
  f.offset = fit.offset;
  f.coherence = fit.coherence;
  f.mean_level = fit.mean;
  f.visibility = fit.visibility;
  f.stderr_offset = fit.stderr_offset;
  f.stderr_mean = fit.stderr_mean;
  return f;
}

timebin::FieldSchedule to_schedule(const tb_field_schedule& s) {
  timebin::FieldSchedule schedule;
  schedule.cone_angle = s.cone_angle;
  schedule.spin_gap = s.spin_gap;
  schedule.loop_rate = s.loop_rate;
  schedule.n_cycles = s.n_cycles;
  return schedule;
}

char* copy_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

/* ---- library metadata & error reporting ---------------------------------- */

const char* tb_version(void) { return timebin::kVersion; }

const char* tb_status_name(tb_status status) {
  switch (status) {
    case TB_OK: return "ok";
    case TB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TB_ERR_ZERO_VECTOR: return "zero vector";
    case TB_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case TB_ERR_INDEX_OUT_OF_RANGE: return "index out of range";
    case TB_ERR_NON_UNIFORM_GRID: return "non-uniform phase grid";
    case TB_ERR_FRINGE_FLAT: return "fringe flat";
    case TB_ERR_MISSING_PAIR: return "missing pair";
    case TB_ERR_POPULATION_MISMATCH: return "population mismatch";
    case TB_ERR_VERIFICATION_FAILED: return "verification failed";
    case TB_ERR_STEP_TOO_LARGE: return "step too large";
    case TB_ERR_OVERLAP_VANISHED: return "overlap vanished";
    case TB_ERR_AMPLITUDE_VANISHED: return "amplitude vanished";
    case TB_ERR_UNSUPPORTED_SPIN_COUNT: return "unsupported spin count";
    case TB_ERR_PARSE: return "parse error";
    case TB_ERR_INTERNAL: return "internal error";
    case TB_ERR_BAD_ALLOC: return "out of memory";
    case TB_ERR_UNKNOWN: return "unknown error";
  }
  return "unrecognized status";
}

const char* tb_last_error(void) { return tl_error.c_str(); }

void tb_string_free(char* text) { delete[] text; }

/* ---- angles & seeds ------------------------------------------------------- */

double tb_wrap_angle(double angle) { return timebin::wrap_angle(angle); }

double tb_mod_two_pi(double angle) { return timebin::mod_two_pi(angle); }

unsigned long long tb_derive_seed(unsigned long long base, unsigned long long stream,
                                  unsigned long long index) {
  return timebin::derive_seed(base, stream, index);
}

/* ---- states --------------------------------------------------------------- */

tb_status tb_state_normalize(tb_grid grid, const double* amplitudes, int d,
                             double* weight, tb_state** out) {
  return guarded([&] {
    require(amplitudes, "amplitudes");
    require(out, "out");
    if (d < 2) timebin::fail(ErrorCode::InvalidArgument, "need at least 2 bins");
    timebin::NormalizeResult result = timebin::normalize(to_grid(grid), to_complex(amplitudes, d));
    if (weight != nullptr) *weight = result.weight;
    *out = new tb_state{std::move(result.state)};
  });
}

void tb_state_free(tb_state* s) { delete s; }

tb_status tb_state_dim(const tb_state* s, int* d) {
  return guarded([&] {
    require(s, "state");
    require(d, "d");
    *d = s->impl.dim();
  });
}

tb_status tb_state_grid(const tb_state* s, tb_grid* grid) {
  return guarded([&] {
    require(s, "state");
    require(grid, "grid");
    *grid = from_grid(s->impl.grid());
  });
}

tb_status tb_state_amplitudes(const tb_state* s, double* amplitudes) {
  return guarded([&] {
    require(s, "state");
    require(amplitudes, "amplitudes");
    write_complex(s->impl.amplitudes(), amplitudes);
  });
}

tb_status tb_state_populations(const tb_state* s, double* populations) {
  return guarded([&] {
    require(s, "state");
    require(populations, "populations");
    write_real(s->impl.populations(), populations);
  });
}

tb_status tb_state_pair_offset(const tb_state* s, int j, int k, double* offset) {
  return guarded([&] {
    require(s, "state");
    require(offset, "offset");
    *offset = s->impl.pair_offset(j, k);
  });
}

tb_status tb_state_fidelity(const tb_state* a, const tb_state* b, double* fidelity) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(fidelity, "fidelity");
    *fidelity = timebin::fidelity(a->impl, b->impl);
  });
}

tb_status tb_state_apply_phases(const tb_state* s, const double* phases, tb_state** out) {
  return guarded([&] {
    require(s, "state");
    require(phases, "phases");
    require(out, "out");
    const Eigen::Map<const Eigen::VectorXd> p(phases, s->impl.dim());
    *out = new tb_state{timebin::apply_diagonal(timebin::DiagonalPhaseUnitary(p.eval()),
                                                s->impl)};
  });
}

tb_status tb_state_dft(const tb_state* s, int inverse, tb_state** out) {
  return guarded([&] {
    require(s, "state");
    require(out, "out");
    *out = new tb_state{timebin::dft_apply(s->impl, inverse != 0)};
  });
}

tb_status tb_state_flatten(const tb_state* s, tb_state** out) {
  return guarded([&] {
    require(s, "state");
    require(out, "out");
    *out = new tb_state{s->impl.flattened()};
  });
}

tb_status tb_state_fourier_probabilities(const tb_state* s, double* out) {
  return guarded([&] {
    require(s, "state");
    require(out, "out");
    write_real(timebin::fourier_basis_probabilities(s->impl), out);
  });
}

tb_status tb_state_simulate_populations(const tb_state* s, long long shots,
                                        unsigned long long seed, double* out) {
  return guarded([&] {
    require(s, "state");
    require(out, "out");
    write_real(timebin::simulate_populations(s->impl, shots, seed), out);
  });
}

tb_status tb_state_simulate_fourier(const tb_state* s, long long shots,
                                    unsigned long long seed, double* out) {
  return guarded([&] {
    require(s, "state");
    require(out, "out");
    write_real(timebin::simulate_fourier_probabilities(s->impl, shots, seed), out);
  });
}

tb_status tb_state_to_json(const tb_state* s, char** json) {
  return guarded([&] {
    require(s, "state");
    require(json, "json");
    *json = copy_string(timebin::state_to_json(s->impl));
  });
}

tb_status tb_state_from_json(const char* json, tb_state** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new tb_state{timebin::state_from_json(json)};
  });
}

/* ---- interferometer cascade ----------------------------------------------- */

tb_status tb_cascade(const tb_stage* stages, int n_stages, tb_grid grid, double* raw,
                     double* weight, tb_state** state) {
  return guarded([&] {
    require(stages, "stages");
    if (n_stages < 1) timebin::fail(ErrorCode::InvalidArgument, "need at least one stage");
    std::vector<timebin::StageParams> params(static_cast<std::size_t>(n_stages));
    for (int i = 0; i < n_stages; ++i) params[i] = {stages[i].eta, stages[i].phi};
    timebin::CascadeResult result = timebin::cascade(params, to_grid(grid));
    if (raw != nullptr) write_complex(result.raw_amplitudes, raw);
    if (weight != nullptr) *weight = result.conditional_weight;
    if (state != nullptr) *state = new tb_state{std::move(result.state)};
  });
}

tb_status tb_qutrit_closed_form(double phi1, double phi2, double* out) {
  return guarded([&] {
    require(out, "out");
    write_complex(timebin::qutrit_closed_form(phi1, phi2), out);
  });
}

/* ---- density matrices ----------------------------------------------------- */

tb_status tb_density_from_state(const tb_state* s, tb_density** out) {
  return guarded([&] {
    require(s, "state");
    require(out, "out");
    *out = new tb_density{timebin::DensityMatrix::from_state(s->impl)};
  });
}

tb_status tb_density_from_populations(const double* populations, int d, tb_density** out) {
  return guarded([&] {
    require(populations, "populations");
    require(out, "out");
    if (d < 2) timebin::fail(ErrorCode::InvalidArgument, "need at least 2 bins");
    const Eigen::Map<const Eigen::VectorXd> p(populations, d);
    *out = new tb_density{timebin::DensityMatrix::from_populations(p.eval())};
  });
}

void tb_density_free(tb_density* m) { delete m; }

tb_status tb_density_dim(const tb_density* m, int* d) {
  return guarded([&] {
    require(m, "density");
    require(d, "d");
    *d = m->impl.dim();
  });
}

tb_status tb_density_set_coherence(tb_density* m, int j, int k, double re, double im) {
  return guarded([&] {
    require(m, "density");
    m->impl.set_coherence(j, k, std::complex<double>(re, im));
  });
}

tb_status tb_density_entry(const tb_density* m, int j, int k, double* re, double* im,
                           int* known) {
  return guarded([&] {
    require(m, "density");
    const std::complex<double> value = m->impl.entry(j, k);
    if (re != nullptr) *re = value.real();
    if (im != nullptr) *im = value.imag();
    if (known != nullptr) *known = m->impl.known(j, k) ? 1 : 0;
  });
}

tb_status tb_density_assemble(const double* populations, int d, const tb_fringe_fit* fits,
                              int n_fits, double mean_sigma_tolerance,
                              long long population_shots, tb_density** out) {
  return guarded([&] {
    require(populations, "populations");
    require(out, "out");
    if (n_fits > 0) require(fits, "fits");
    if (d < 2) timebin::fail(ErrorCode::InvalidArgument, "need at least 2 bins");
    std::vector<timebin::FringeFit> converted;
    converted.reserve(static_cast<std::size_t>(n_fits));
    for (int i = 0; i < n_fits; ++i) converted.push_back(to_fit(fits[i]));
    const Eigen::Map<const Eigen::VectorXd> p(populations, d);
    *out = new tb_density{timebin::assemble_density(p.eval(), converted,
                                                    mean_sigma_tolerance, population_shots)};
  });
}

tb_status tb_density_project_psd(tb_density* m, int* clipped) {
  return guarded([&] {
    require(m, "density");
    const bool did = m->impl.project_psd();
    if (clipped != nullptr) *clipped = did ? 1 : 0;
  });
}

tb_status tb_density_min_eigenvalue(const tb_density* m, double* value) {
  return guarded([&] {
    require(m, "density");
    require(value, "value");
    *value = m->impl.min_eigenvalue();
  });
}

tb_status tb_density_fourier_probabilities(const tb_density* m, double* out) {
  return guarded([&] {
    require(m, "density");
    require(out, "out");
    write_real(m->impl.fourier_probabilities(), out);
  });
}

tb_status tb_density_max_closure_residual(const tb_density* m, double* out) {
  return guarded([&] {
    require(m, "density");
    require(out, "out");
    *out = timebin::max_closure_residual(m->impl);
  });
}

/* ---- fringe scans & fits --------------------------------------------------- */

tb_status tb_fringe_probability(const tb_density* m, int j, int k, double phi,
                                double* probability) {
  return guarded([&] {
    require(m, "density");
    require(probability, "probability");
    *probability = timebin::fringe_probability(m->impl, j, k, phi);
  });
}

tb_status tb_scan_uniform_phases(int n_points, double* phases) {
  return guarded([&] {
    require(phases, "phases");
    const std::vector<double> p = timebin::ScanConfig::uniform_phases(n_points);
    std::memcpy(phases, p.data(), sizeof(double) * p.size());
  });
}

tb_status tb_simulate_scan(const tb_state* s, int j, int k, const double* phases,
                           int n_points, long long shots, unsigned long long seed,
                           double* probabilities, long long* counts) {
  return guarded([&] {
    require(s, "state");
    require(phases, "phases");
    if (n_points < 1) timebin::fail(ErrorCode::InvalidArgument, "need at least one point");
    if (counts != nullptr && shots <= 0) {
      timebin::fail(ErrorCode::InvalidArgument, "counts requested but shots is zero");
    }
    timebin::ScanConfig config;
    config.j = j;
    config.k = k;
    config.phases.assign(phases, phases + n_points);
    config.shots_per_point = counts != nullptr ? shots : 0;
    config.rng_seed = seed;
    const timebin::FringeScan scan = timebin::simulate_scan(s->impl, config);
    if (probabilities != nullptr) {
      std::memcpy(probabilities, scan.probabilities.data(), sizeof(double) * scan.probabilities.size());
    }
    if (counts != nullptr) {
      std::memcpy(counts, scan.counts.data(), sizeof(long long) * scan.counts.size());
    }
  });
}

tb_status tb_fit_fringe(int j, int k, const double* phases, const double* probabilities,
                        const long long* counts, int n_points, long long shots,
                        double visibility_floor, tb_fringe_fit* fit) {
  return guarded([&] {
    require(phases, "phases");
    require(fit, "fit");
    if (counts == nullptr) require(probabilities, "probabilities");
    if (n_points < 3) timebin::fail(ErrorCode::InvalidArgument, "need at least 3 points");
    timebin::FringeScan scan;
    scan.config.j = j;
    scan.config.k = k;
    scan.config.phases.assign(phases, phases + n_points);
    if (counts != nullptr) {
      scan.config.shots_per_point = shots;
      scan.counts.assign(counts, counts + n_points);
    } else {
      scan.probabilities.assign(probabilities, probabilities + n_points);
    }
    *fit = from_fit(timebin::fit_fringe(scan, floor_or_default(visibility_floor)));
  });
}

/* ---- feed-forward correction ----------------------------------------------- */

tb_status tb_build_plan(const double* delta_theta, int d, int reference_bin,
                        double* cumulative, double* correction_phases) {
  return guarded([&] {
    require(delta_theta, "delta_theta");
    if (d < 2) timebin::fail(ErrorCode::InvalidArgument, "need at least 2 bins");
    timebin::RelativePhaseSet set;
    set.d = d;
    set.reference_bin = reference_bin;
    set.delta_theta.assign(delta_theta, delta_theta + (d - 1));
    set.visibilities.assign(static_cast<std::size_t>(d) - 1, 0.0);
    const timebin::CorrectionPlan plan = timebin::build_plan(set);
    if (cumulative != nullptr) {
      std::memcpy(cumulative, plan.cumulative.data(), sizeof(double) * plan.cumulative.size());
    }
    if (correction_phases != nullptr) {
      std::memcpy(correction_phases, plan.correction_phases.data(),
                  sizeof(double) * plan.correction_phases.size());
    }
  });
}

tb_status tb_separate_dynamical(const double* delta_theta, int d, const double* dyn_model,
                                double* out) {
  return guarded([&] {
    require(delta_theta, "delta_theta");
    require(dyn_model, "dyn_model");
    require(out, "out");
    if (d < 2) timebin::fail(ErrorCode::InvalidArgument, "need at least 2 bins");
    timebin::RelativePhaseSet set;
    set.d = d;
    set.delta_theta.assign(delta_theta, delta_theta + (d - 1));
    set.visibilities.assign(static_cast<std::size_t>(d) - 1, 0.0);
    const timebin::RelativePhaseSet residual =
        timebin::separate_dynamical(set, std::vector<double>(dyn_model, dyn_model + d));
    std::memcpy(out, residual.delta_theta.data(), sizeof(double) * residual.delta_theta.size());
  });
}

tb_status tb_closed_loop(const tb_state* target, const double* dyn, const double* geom,
                         const double* tech, const tb_closed_loop_config* config,
                         double* fidelity_before, double* fidelity_after, double* threshold,
                         int* passed, double* delta_theta, double* visibilities,
                         double* residual_offsets, double* correction_phases,
                         tb_state** corrected) {
  return guarded([&] {
    require(target, "target");
    require(config, "config");
    const int d = target->impl.dim();

    timebin::PhaseBudget budget = timebin::PhaseBudget::zero(d);
    const auto fill = [d](std::vector<double>& dst, const double* src) {
      if (src != nullptr) dst.assign(src, src + d);
    };
    fill(budget.dynamical, dyn);
    fill(budget.geometric, geom);
    fill(budget.technical, tech);

    timebin::ClosedLoopConfig cfg{target->impl, budget};
    cfg.scan_points = config->scan_points;
    cfg.shots_per_point = config->shots_per_point;
    cfg.seed = config->seed;
    cfg.visibility_floor = floor_or_default(config->visibility_floor);
    cfg.fidelity_threshold = config->fidelity_threshold;
    cfg.enforce = false;  // report first, decide about the status below
    const timebin::ClosedLoopReport report = timebin::closed_loop(cfg);

    if (fidelity_before != nullptr) *fidelity_before = report.fidelity_before;
    if (fidelity_after != nullptr) *fidelity_after = report.fidelity_after;
    if (threshold != nullptr) *threshold = report.threshold;
    if (passed != nullptr) *passed = report.passed ? 1 : 0;
    if (delta_theta != nullptr) {
      std::memcpy(delta_theta, report.phases.delta_theta.data(),
                  sizeof(double) * report.phases.delta_theta.size());
    }
    if (visibilities != nullptr) {
      std::memcpy(visibilities, report.phases.visibilities.data(),
                  sizeof(double) * report.phases.visibilities.size());
    }
    if (residual_offsets != nullptr) {
      std::memcpy(residual_offsets, report.residual_offsets.data(),
                  sizeof(double) * report.residual_offsets.size());
    }
    if (correction_phases != nullptr) {
      std::memcpy(correction_phases, report.plan.correction_phases.data(),
                  sizeof(double) * report.plan.correction_phases.size());
    }
    if (corrected != nullptr) *corrected = new tb_state{report.corrected};

    if (!report.passed && config->enforce != 0) {
      timebin::fail(ErrorCode::VerificationFailed,
                    "post-correction fidelity " + std::to_string(report.fidelity_after) +
                        " below threshold " + std::to_string(report.threshold));
    }
  });
}

/* ---- driven-spin dynamics --------------------------------------------------- */

tb_status tb_propagate(const tb_field_schedule* schedules, int n_spins, double dt,
                       const double* psi0, int dim, double energy_shift,
                       tb_trajectory** out) {
  return guarded([&] {
    require(schedules, "schedules");
    require(psi0, "psi0");
    require(out, "out");
    if (n_spins < 1 || n_spins > 2) {
      timebin::fail(ErrorCode::UnsupportedSpinCount,
                    "supported spin counts are 1 and 2, got " + std::to_string(n_spins));
    }
    if (dim != (1 << n_spins)) {
      timebin::fail(ErrorCode::DimensionMismatch, "psi0 dimension must be 2^n_spins");
    }
    std::vector<timebin::FieldSchedule> converted;
    converted.reserve(static_cast<std::size_t>(n_spins));
    for (int i = 0; i < n_spins; ++i) converted.push_back(to_schedule(schedules[i]));
    *out = new tb_trajectory{
        timebin::propagate(converted, dt, to_complex(psi0, dim), energy_shift)};
  });
}

void tb_trajectory_free(tb_trajectory* t) { delete t; }

tb_status tb_trajectory_samples(const tb_trajectory* t, int* samples) {
  return guarded([&] {
    require(t, "trajectory");
    require(samples, "samples");
    *samples = t->impl.samples();
  });
}

tb_status tb_trajectory_dim(const tb_trajectory* t, int* dim) {
  return guarded([&] {
    require(t, "trajectory");
    require(dim, "dim");
    *dim = t->impl.dim();
  });
}

tb_status tb_trajectory_times(const tb_trajectory* t, double* times) {
  return guarded([&] {
    require(t, "trajectory");
    require(times, "times");
    std::memcpy(times, t->impl.times.data(), sizeof(double) * t->impl.times.size());
  });
}

tb_status tb_trajectory_state(const tb_trajectory* t, int index, double* state) {
  return guarded([&] {
    require(t, "trajectory");
    require(state, "state");
    if (index < 0 || index >= t->impl.samples()) {
      timebin::fail(ErrorCode::IndexOutOfRange, "sample index out of range");
    }
    write_complex(t->impl.states[static_cast<std::size_t>(index)], state);
  });
}

tb_status tb_decompose_phases(const tb_trajectory* t, double* total, double* dynamical,
                              double* geometric, double* im_overlap_accumulator) {
  return guarded([&] {
    require(t, "trajectory");
    const timebin::PhaseDecomposition dec = timebin::decompose_phases(t->impl);
    const std::size_t n = dec.times.size();
    if (total != nullptr) std::memcpy(total, dec.total.data(), sizeof(double) * n);
    if (dynamical != nullptr) std::memcpy(dynamical, dec.dynamical.data(), sizeof(double) * n);
    if (geometric != nullptr) std::memcpy(geometric, dec.geometric.data(), sizeof(double) * n);
    if (im_overlap_accumulator != nullptr) {
      std::memcpy(im_overlap_accumulator, dec.im_overlap_accumulator.data(),
                  sizeof(double) * n);
    }
  });
}

tb_status tb_bin_phases(const tb_trajectory* t, const int* mapping, double* theta_abs,
                        double* theta_mod) {
  return guarded([&] {
    require(t, "trajectory");
    std::vector<int> map;
    if (mapping != nullptr) map.assign(mapping, mapping + t->impl.dim());
    const timebin::BinPhaseReport report = timebin::bin_phases(t->impl, map);
    const std::size_t n = report.theta_abs.size();
    if (theta_abs != nullptr) std::memcpy(theta_abs, report.theta_abs.data(), sizeof(double) * n);
    if (theta_mod != nullptr) std::memcpy(theta_mod, report.theta_mod.data(), sizeof(double) * n);
  });
}

tb_status tb_correction_from_dynamics(const double* theta_abs, int d,
                                      double* correction_phases) {
  return guarded([&] {
    require(theta_abs, "theta_abs");
    require(correction_phases, "correction_phases");
    if (d < 1) timebin::fail(ErrorCode::InvalidArgument, "need at least 1 bin");
    timebin::BinPhaseReport report;
    report.theta_abs.assign(theta_abs, theta_abs + d);
    report.theta_mod.resize(static_cast<std::size_t>(d), 0.0);
    const timebin::DiagonalPhaseUnitary u = timebin::correction_from_dynamics(report);
    write_real(u.phases(), correction_phases);
  });
}

tb_status tb_berry_connection_phase(const tb_field_schedule* schedule, int samples,
                                    double* phase) {
  return guarded([&] {
    require(schedule, "schedule");
    require(phase, "phase");
    const int n = samples <= 0 ? 4096 : samples;
    *phase = timebin::berry_connection_phase(to_schedule(*schedule), n);
  });
}
