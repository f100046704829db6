/* SPDX-License-Identifier: Apache-2.0 */
#ifndef TIMEBIN_TIMEBIN_H
#define TIMEBIN_TIMEBIN_H

/*
 * C interface to the time-bin qudit calibration library.
 *
 * Conventions:
 *   - Every fallible call returns tb_status; TB_OK is 0. On failure,
 *     tb_last_error() returns a thread-local description of what went wrong.
 *   - Complex vectors cross the boundary as interleaved doubles
 *     [re0, im0, re1, im1, ...].
 *   - Output pointers may be NULL when the caller does not need that output,
 *     unless a parameter is documented as required.
 *   - Handles (tb_state, tb_density, tb_trajectory) are opaque; free them
 *     with the matching *_free call. Freeing NULL is a no-op.
 *   - Angles are radians; rates are angular frequencies with hbar = 1.
 */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(TB_BUILD_SHARED)
#    define TB_API __declspec(dllexport)
#  else
#    define TB_API __declspec(dllimport)
#  endif
#else
#  define TB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tb_status {
  TB_OK = 0,
  TB_ERR_INVALID_ARGUMENT = 1,
  TB_ERR_ZERO_VECTOR = 2,
  TB_ERR_DIMENSION_MISMATCH = 3,
  TB_ERR_INDEX_OUT_OF_RANGE = 4,
  TB_ERR_NON_UNIFORM_GRID = 5,
  TB_ERR_FRINGE_FLAT = 6,
  TB_ERR_MISSING_PAIR = 7,
  TB_ERR_POPULATION_MISMATCH = 8,
  TB_ERR_VERIFICATION_FAILED = 9,
  TB_ERR_STEP_TOO_LARGE = 10,
  TB_ERR_OVERLAP_VANISHED = 11,
  TB_ERR_AMPLITUDE_VANISHED = 12,
  TB_ERR_UNSUPPORTED_SPIN_COUNT = 13,
  TB_ERR_PARSE = 14,
  TB_ERR_INTERNAL = 15,
  TB_ERR_BAD_ALLOC = 16,
  TB_ERR_UNKNOWN = 17
} tb_status;

typedef struct tb_state tb_state;
typedef struct tb_density tb_density;
typedef struct tb_trajectory tb_trajectory;

/* Temporal grid metadata. sigma_pulse and sigma_jitter are bookkeeping only;
 * bins count as orthogonal when delta_t > sigma_pulse + sigma_jitter. */
typedef struct tb_grid {
  int d;
  double delta_t;
  double sigma_pulse;
  double sigma_jitter;
} tb_grid;

/* One unbalanced interferometer stage: bar transmission eta in [0, 1] and
 * long-arm phase phi. */
typedef struct tb_stage {
  double eta;
  double phi;
} tb_stage;

/* Fringe-fit result for the pair (j, k):
 * P(phi) = mean_level + coherence * cos(phi + offset). */
typedef struct tb_fringe_fit {
  int j;
  int k;
  double offset;
  double coherence;
  double mean_level;
  double visibility;
  double stderr_offset; /* 0 in noiseless mode */
  double stderr_mean;   /* 0 in noiseless mode */
} tb_fringe_fit;

/* Conical field loop for one spin-1/2:
 * n(t) = (sin(cone_angle) cos(loop_rate t),
 *         sin(cone_angle) sin(loop_rate t), cos(cone_angle)),
 * H(t) = (spin_gap / 2) n(t).sigma, over n_cycles loops. */
typedef struct tb_field_schedule {
  double cone_angle;
  double spin_gap;
  double loop_rate;
  double n_cycles;
} tb_field_schedule;

typedef struct tb_closed_loop_config {
  int scan_points;            /* >= 3 analyzer phases per pair */
  long long shots_per_point;  /* 0 = noiseless probabilities */
  unsigned long long seed;
  double visibility_floor;    /* pass 0 for the default 0.05 */
  double fidelity_threshold;  /* <= 0 = 1 - 1e-6 noiseless, 0.99 noisy */
  int enforce;                /* nonzero: fail when fidelity below threshold */
} tb_closed_loop_config;

/* ---- library metadata & error reporting ---------------------------------- */

TB_API const char* tb_version(void);
TB_API const char* tb_status_name(tb_status status);

/* Thread-local message describing the most recent failure on this thread.
 * Valid until the next failing call on the same thread. */
TB_API const char* tb_last_error(void);

/* Free a string returned through a char** output. */
TB_API void tb_string_free(char* text);

/* ---- angles & seeds ------------------------------------------------------- */

TB_API double tb_wrap_angle(double angle);   /* into (-pi, pi] */
TB_API double tb_mod_two_pi(double angle);   /* into [0, 2*pi) */

/* Deterministic per-(stream, index) seed derivation from a base seed. */
TB_API unsigned long long tb_derive_seed(unsigned long long base,
                                         unsigned long long stream,
                                         unsigned long long index);

/* ---- states --------------------------------------------------------------- */

/* Normalize 2*d interleaved raw amplitudes onto grid (grid.d is taken from
 * d). weight receives the squared norm before rescaling. */
TB_API tb_status tb_state_normalize(tb_grid grid, const double* amplitudes, int d,
                                    double* weight, tb_state** out);

TB_API void tb_state_free(tb_state* s);

TB_API tb_status tb_state_dim(const tb_state* s, int* d);
TB_API tb_status tb_state_grid(const tb_state* s, tb_grid* grid);

/* amplitudes must hold 2*d doubles. */
TB_API tb_status tb_state_amplitudes(const tb_state* s, double* amplitudes);

/* populations must hold d doubles. */
TB_API tb_status tb_state_populations(const tb_state* s, double* populations);

/* Exact fringe offset arg(alpha_j conj(alpha_k)); TB_ERR_FRINGE_FLAT when
 * either amplitude vanishes. */
TB_API tb_status tb_state_pair_offset(const tb_state* s, int j, int k, double* offset);

TB_API tb_status tb_state_fidelity(const tb_state* a, const tb_state* b, double* fidelity);

/* Apply diag(e^{i phases[j]}). phases must hold d doubles. */
TB_API tb_status tb_state_apply_phases(const tb_state* s, const double* phases,
                                       tb_state** out);

/* Discrete Fourier transform (inverse nonzero applies the conjugate). */
TB_API tb_status tb_state_dft(const tb_state* s, int inverse, tb_state** out);

/* Same magnitudes, all phases zeroed. */
TB_API tb_status tb_state_flatten(const tb_state* s, tb_state** out);

/* |<f_l|psi>|^2 for all d Fourier basis states; out holds d doubles. */
TB_API tb_status tb_state_fourier_probabilities(const tb_state* s, double* out);

/* Computational-basis populations through a photon-counting model:
 * exact when shots == 0, otherwise normalized Poisson counts. */
TB_API tb_status tb_state_simulate_populations(const tb_state* s, long long shots,
                                               unsigned long long seed, double* out);

/* Fourier-basis probabilities through the same counting model. */
TB_API tb_status tb_state_simulate_fourier(const tb_state* s, long long shots,
                                           unsigned long long seed, double* out);

/* JSON round-trip of {"d", "delta_t", "amplitudes", "normalized"}. */
TB_API tb_status tb_state_to_json(const tb_state* s, char** json);
TB_API tb_status tb_state_from_json(const char* json, tb_state** out);

/* ---- interferometer cascade ----------------------------------------------- */

/* Feed a single pulse through n_stages unbalanced stages. Outputs (each
 * optional): raw holds 2*(n_stages+1) interleaved doubles with the
 * unnormalized single-port amplitudes, weight the conditional weight
 * (squared norm), state the renormalized (n_stages+1)-bin state. */
TB_API tb_status tb_cascade(const tb_stage* stages, int n_stages, tb_grid grid,
                            double* raw, double* weight, tb_state** state);

/* Closed-form qutrit amplitudes for a balanced two-stage cascade;
 * out holds 6 interleaved doubles. */
TB_API tb_status tb_qutrit_closed_form(double phi1, double phi2, double* out);

/* ---- density matrices ----------------------------------------------------- */

TB_API tb_status tb_density_from_state(const tb_state* s, tb_density** out);

/* Diagonal-only matrix; every off-diagonal starts as unknown (reads 0). */
TB_API tb_status tb_density_from_populations(const double* populations, int d,
                                             tb_density** out);

TB_API void tb_density_free(tb_density* m);

TB_API tb_status tb_density_dim(const tb_density* m, int* d);

/* Set rho_jk (and its conjugate mirror) and mark the entry known. */
TB_API tb_status tb_density_set_coherence(tb_density* m, int j, int k,
                                          double re, double im);

/* Read one entry; known receives whether it was measured/derived (unknown
 * off-diagonals read as zero). */
TB_API tb_status tb_density_entry(const tb_density* m, int j, int k,
                                  double* re, double* im, int* known);

/* Populations + fitted coherences with a mean-level consistency check
 * (TB_ERR_POPULATION_MISMATCH when a fit disagrees with the populations by
 * more than mean_sigma_tolerance combined standard errors).
 * population_shots > 0 adds the population counting error to that budget. */
TB_API tb_status tb_density_assemble(const double* populations, int d,
                                     const tb_fringe_fit* fits, int n_fits,
                                     double mean_sigma_tolerance,
                                     long long population_shots, tb_density** out);

/* Clip negative eigenvalues and renormalize the trace. clipped receives
 * nonzero when anything beyond rounding noise was removed. */
TB_API tb_status tb_density_project_psd(tb_density* m, int* clipped);

TB_API tb_status tb_density_min_eigenvalue(const tb_density* m, double* value);

/* Fourier-basis probabilities implied by the matrix; unknown entries count
 * as zero. out holds d doubles. */
TB_API tb_status tb_density_fourier_probabilities(const tb_density* m, double* out);

/* Largest |wrap(arg rho_jk + arg rho_kl - arg rho_jl)| over triangles whose
 * three coherences are known and nonzero; 0 when there is no such triangle. */
TB_API tb_status tb_density_max_closure_residual(const tb_density* m, double* out);

/* ---- fringe scans & fits --------------------------------------------------- */

/* Single-port probability for mixing bins j and k at analyzer phase phi:
 * (p_j + p_k)/2 + Re[e^{i phi} rho_jk]. */
TB_API tb_status tb_fringe_probability(const tb_density* m, int j, int k, double phi,
                                       double* probability);

/* n_points phases uniformly covering [0, 2*pi). */
TB_API tb_status tb_scan_uniform_phases(int n_points, double* phases);

/* Sweep the analyzer over the given phases on a pure state. probabilities
 * (optional) holds n_points ideal values; counts (optional, requires
 * shots > 0) holds n_points Poisson draws with mean shots * P. */
TB_API tb_status tb_simulate_scan(const tb_state* s, int j, int k,
                                  const double* phases, int n_points,
                                  long long shots, unsigned long long seed,
                                  double* probabilities, long long* counts);

/* First-harmonic fringe fit (least-squares refined when counts are given).
 * phases/probabilities/counts are parallel arrays; counts may be NULL for
 * noiseless data, in which case shots is ignored. visibility_floor <= 0
 * selects the default 0.05. */
TB_API tb_status tb_fit_fringe(int j, int k, const double* phases,
                               const double* probabilities, const long long* counts,
                               int n_points, long long shots,
                               double visibility_floor, tb_fringe_fit* fit);

/* ---- feed-forward correction ----------------------------------------------- */

/* Cumulative phases from d-1 adjacent increments, anchored at
 * reference_bin: cumulative has d entries starting from 0 at the anchor;
 * correction_phases[j] = -cumulative[j]. Both outputs optional. */
TB_API tb_status tb_build_plan(const double* delta_theta, int d, int reference_bin,
                               double* cumulative, double* correction_phases);

/* Subtract a per-bin dynamical model (d entries) from d-1 measured
 * increments; out holds d-1 wrapped residual increments. */
TB_API tb_status tb_separate_dynamical(const double* delta_theta, int d,
                                       const double* dyn_model, double* out);

/* Full perturb -> scan -> fit -> correct -> verify round against a target.
 * dyn/geom/tech are optional per-bin budget components (NULL = zeros).
 * Outputs (all optional): delta_theta, visibilities and residual_offsets
 * hold d-1 doubles; correction_phases holds d doubles. With config->enforce
 * nonzero the call returns TB_ERR_VERIFICATION_FAILED when the corrected
 * fidelity misses the threshold — outputs are still filled. */
TB_API tb_status tb_closed_loop(const tb_state* target, const double* dyn,
                                const double* geom, const double* tech,
                                const tb_closed_loop_config* config,
                                double* fidelity_before, double* fidelity_after,
                                double* threshold, int* passed,
                                double* delta_theta, double* visibilities,
                                double* residual_offsets, double* correction_phases,
                                tb_state** corrected);

/* ---- driven-spin dynamics --------------------------------------------------- */

/* Integrate 1 or 2 decoupled spins from the interleaved initial state psi0
 * of dimension 2^n_spins. dt is the requested step (the span is rounded to
 * a whole number of steps); energy_shift adds E0 * identity. */
TB_API tb_status tb_propagate(const tb_field_schedule* schedules, int n_spins,
                              double dt, const double* psi0, int dim,
                              double energy_shift, tb_trajectory** out);

TB_API void tb_trajectory_free(tb_trajectory* t);

TB_API tb_status tb_trajectory_samples(const tb_trajectory* t, int* samples);
TB_API tb_status tb_trajectory_dim(const tb_trajectory* t, int* dim);

/* times holds samples doubles. */
TB_API tb_status tb_trajectory_times(const tb_trajectory* t, double* times);

/* state holds 2*dim interleaved doubles for sample `index`. */
TB_API tb_status tb_trajectory_state(const tb_trajectory* t, int index, double* state);

/* Phase decomposition along the trajectory; each optional output holds
 * samples doubles. total is the unwrapped Pancharatnam phase
 * arg<psi(0)|psi(t)>, dynamical is -integral <H> dt, geometric their
 * difference. im_overlap_accumulator is the running sum of
 * Im<psi_n|psi_{n+1}> — a diagnostic that tracks the dynamical phase. */
TB_API tb_status tb_decompose_phases(const tb_trajectory* t, double* total,
                                     double* dynamical, double* geometric,
                                     double* im_overlap_accumulator);

/* Per-bin unwrapped phases at the final time and their mod-2pi reduction;
 * each optional output holds dim doubles. mapping (optional) is a
 * permutation basis-index -> bin-index; NULL = identity (lexicographic). */
TB_API tb_status tb_bin_phases(const tb_trajectory* t, const int* mapping,
                               double* theta_abs, double* theta_mod);

/* Feed-forward phases -theta_abs[j]; out holds d doubles. */
TB_API tb_status tb_correction_from_dynamics(const double* theta_abs, int d,
                                             double* correction_phases);

/* Loop integral of the connection i<n|dn/dt> along the field-aligned
 * eigenstate (adiabatic oracle: -pi(1 - cos cone_angle) per cycle).
 * samples <= 0 selects the default resolution. */
TB_API tb_status tb_berry_connection_phase(const tb_field_schedule* schedule,
                                           int samples, double* phase);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TIMEBIN_TIMEBIN_H */
