/* SPDX-License-Identifier: Apache-2.0 */

#ifndef QDARWIN_H
#define QDARWIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QdStatus {
  QD_STATUS_OK = 0,
  QD_STATUS_NULL_POINTER = 1,
  QD_STATUS_INVALID_ARGUMENT = 2,
  QD_STATUS_CONFIG = 3,
  QD_STATUS_NUMERICAL = 4,
  QD_STATUS_BUFFER_TOO_SMALL = 5,
  QD_STATUS_PANIC = 6,
} QdStatus;

// Diagonalized model together with its parameters.
typedef struct QdPropagator QdPropagator;

// Model parameters. A negative `gamma_bar` means "same as `gamma`".
typedef struct QdParams {
  size_t n_env;
  double omega0;
  double omega_min;
  double omega_max;
  double gamma;
  double gamma_bar;
  double alpha0_re;
  double alpha0_im;
  double branch_a_re;
  double branch_a_im;
  double branch_b_re;
  double branch_b_im;
} QdParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *qd_last_error(void);

// Library version as a static NUL-terminated string.
const char *qd_version(void);

// Fills `out` with the default model parameters.
//
// # Safety
// `out` must be null or point to writable memory for one `QdParams`.
enum QdStatus qd_params_default(struct QdParams *out);

// Builds and diagonalizes the model described by `params`.
//
// # Safety
// `params` must be null or valid for reads; `out` must be null or valid
// for one pointer write. On success `*out` owns a new handle.
enum QdStatus qd_propagator_new(const struct QdParams *params, struct QdPropagator **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `p` must be null or a handle from [`qd_propagator_new`] not yet freed.
void qd_propagator_free(struct QdPropagator *p);

// Number of bath oscillators, or 0 for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t qd_propagator_n_env(const struct QdPropagator *p);

// Continuum decay rate `4 pi gamma^2 N / bandwidth` of the model.
//
// # Safety
// `p` must be null or a live handle; `out` must be null or writable.
enum QdStatus qd_propagator_decay_rate(const struct QdPropagator *p, double *out);

// Coherent amplitudes at time `t`, interleaved as `re, im`: the system
// first, then every bath mode. `out` must hold `2 * (n_env + 1)` doubles.
//
// # Safety
// `p` must be null or a live handle; `out` must be null or writable for
// `len` doubles.
enum QdStatus qd_propagator_evolve(const struct QdPropagator *p, double t, double *out, size_t len);

// System and bath excitation numbers at time `t`.
//
// # Safety
// `p` must be null or a live handle; `system` and `env` must be null or
// writable.
enum QdStatus qd_excitations(const struct QdPropagator *p, double t, double *system, double *env);

// Von Neumann entropy (nats) of the system at time `t`.
//
// # Safety
// `p` must be null or a live handle; `out` must be null or writable.
enum QdStatus qd_system_entropy(const struct QdPropagator *p, double t, double *out);

// Mutual information `I(S:F)` at time `t` for the bath modes listed in
// `fragment` (1-based, distinct).
//
// # Safety
// `p` must be null or a live handle; `fragment` must be readable for
// `len` entries; `out` must be null or writable.
enum QdStatus qd_mutual_information(const struct QdPropagator *p,
                                    double t,
                                    const size_t *fragment,
                                    size_t len,
                                    double *out);

// Non-Markovianity degree on the time grid `times` (ascending), maximized
// over pairs formed from `samples` normal initial amplitudes drawn with
// `seed`.
//
// # Safety
// `p` must be null or a live handle; `times` must be readable for
// `n_times` entries; `out` must be null or writable.
enum QdStatus qd_nm_degree(const struct QdPropagator *p,
                           const double *times,
                           size_t n_times,
                           size_t samples,
                           uint64_t seed,
                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDARWIN_H */
