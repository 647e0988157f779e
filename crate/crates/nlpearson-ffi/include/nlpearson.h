#ifndef NLPEARSON_H
#define NLPEARSON_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum NlpStatus {
  NLP_STATUS_OK = 0,
  NLP_STATUS_NULL_POINTER = 1,
  NLP_STATUS_INVALID_UTF8 = 2,
  NLP_STATUS_INVALID_JSON = 3,
  NLP_STATUS_PARAMETER = 4,
  NLP_STATUS_DOMAIN = 5,
  NLP_STATUS_SPECTRUM_BOUND = 6,
  NLP_STATUS_NUMERIC = 7,
  NLP_STATUS_RESOLUTION = 8,
  NLP_STATUS_DATUM = 9,
  NLP_STATUS_UNSUPPORTED = 10,
  NLP_STATUS_CONFIG = 11,
  NLP_STATUS_MISUSE = 12,
  NLP_STATUS_IO = 13,
  NLP_STATUS_BUFFER_TOO_SMALL = 14,
  NLP_STATUS_PANIC = 15,
} NlpStatus;

/**
 * Spectral category of a family.
 */
typedef enum NlpCategory {
  NLP_CATEGORY_DISCRETE = 1,
  NLP_CATEGORY_DISCRETE_AND_SIMPLE_CONTINUOUS = 2,
  NLP_CATEGORY_DISCRETE_AND_DOUBLE_CONTINUOUS = 3,
} NlpCategory;

/**
 * Dependence class of a stationary time-changed process.
 */
typedef enum NlpDependence {
  NLP_DEPENDENCE_SHORT_RANGE = 0,
  NLP_DEPENDENCE_LONG_RANGE = 1,
  NLP_DEPENDENCE_UNKNOWN = 2,
} NlpDependence;

/**
 * A Pearson diffusion family.
 */
typedef struct NlpFamily NlpFamily;

/**
 * A Bernstein function driving the time change.
 */
typedef struct NlpPhi NlpPhi;

/**
 * A spectral expansion of the transition density.
 */
typedef struct NlpSpectral NlpSpectral;

/**
 * Simulated paths, stored time-major.
 */
typedef struct NlpTrajectories NlpTrajectories;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nlp_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *nlp_last_error_message(void);

/**
 * Builds a family from a JSON descriptor such as
 * `{"kind":"cir","theta":1,"a":1,"b":2}`.
 */
enum NlpStatus nlp_family_from_json(const char *spec, struct NlpFamily **out);

void nlp_family_free(struct NlpFamily *family);

enum NlpStatus nlp_family_category(const struct NlpFamily *family, enum NlpCategory *out);

/**
 * Stationary density m(x).
 */
enum NlpStatus nlp_family_stationary_density(const struct NlpFamily *family, double x, double *out);

/**
 * Discrete eigenvalue λ_n.
 */
enum NlpStatus nlp_family_eigenvalue(const struct NlpFamily *family, size_t n, double *out);

/**
 * Builds a Bernstein function from a JSON descriptor such as
 * `{"kind":"stable","alpha":0.5}`.
 */
enum NlpStatus nlp_phi_from_json(const char *spec, struct NlpPhi **out);

void nlp_phi_free(struct NlpPhi *phi);

/**
 * Φ(λ).
 */
enum NlpStatus nlp_phi_eval(const struct NlpPhi *phi, double lambda, double *out);

enum NlpStatus nlp_phi_classify(const struct NlpPhi *phi, enum NlpDependence *out);

/**
 * Relaxation function E[exp(−λ L(t))] for the time change `phi`.
 */
enum NlpStatus nlp_relaxation(const struct NlpPhi *phi, double t, double lambda, double *out);

/**
 * Spectral expansion for `family`; pass NULL for `phi` to get the classical
 * (untime-changed) transition density.
 */
enum NlpStatus nlp_spectral_new(const struct NlpFamily *family,
                                const struct NlpPhi *phi,
                                struct NlpSpectral **out);

void nlp_spectral_free(struct NlpSpectral *spectral);

/**
 * Transition density p(t, x_i; x0) for `n` points. `bounds` may be NULL;
 * otherwise it receives the truncation bound of each value, NaN where none
 * is available.
 */
enum NlpStatus nlp_spectral_density(const struct NlpSpectral *spectral,
                                    double t,
                                    double x0,
                                    const double *xs,
                                    size_t n,
                                    double *values,
                                    double *bounds);

/**
 * Simulates X(L(t)) on the grid k·horizon/n_obs, k = 0..n_obs. A NaN `x0`
 * starts the paths from the stationary law. `exact` selects exact OU
 * transitions instead of the Euler scheme.
 */
enum NlpStatus nlp_simulate_nonlocal(const struct NlpFamily *family,
                                     const struct NlpPhi *phi,
                                     double x0,
                                     double horizon,
                                     size_t n_obs,
                                     size_t n_paths,
                                     uint64_t seed,
                                     bool exact,
                                     struct NlpTrajectories **out);

void nlp_trajectories_free(struct NlpTrajectories *ts);

/**
 * Number of paths and of observation times.
 */
enum NlpStatus nlp_trajectories_shape(const struct NlpTrajectories *ts,
                                      size_t *n_paths,
                                      size_t *n_times);

/**
 * Copies the values of all paths at time index `j` into `buf`, which must
 * hold `len >= n_paths` doubles.
 */
enum NlpStatus nlp_trajectories_marginal(const struct NlpTrajectories *ts,
                                         size_t j,
                                         double *buf,
                                         size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLPEARSON_H */
