#ifndef SPIKEFILT_H
#define SPIKEFILT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every fallible call.
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_NULL_POINTER = 1,
  SF_STATUS_INVALID_ARGUMENT = 2,
  SF_STATUS_BUFFER_TOO_SMALL = 3,
  SF_STATUS_FAILED = 4,
  SF_STATUS_PANIC = 5,
} SfStatus;

typedef enum SfRule {
  SF_RULE_INST = 0,
  SF_RULE_FILT = 1,
} SfRule;

// Neuron and kernel parameters.
typedef struct SfParams SfParams;

// Input spike pattern over a set of synapses.
typedef struct SfPattern SfPattern;

// Sorted spike times in ms.
typedef struct SfSpikeTrain SfSpikeTrain;

// Kernel values at one lag.
typedef struct SfKernels {
  double alpha;
  double epsilon;
  double kappa;
  double lambda;
} SfKernels;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *sf_version(void);

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`) and returns the full message length excluding the NUL.
// Returns 0 when no error has been recorded.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t sf_last_error_message(char *buf, size_t len);

// Default parameters.
//
// # Safety
// `out` must be valid for writing a pointer.
enum SfStatus sf_params_new_default(struct SfParams **out);

// Parameters from explicit values (ms, mV, 1/ms).
//
// # Safety
// `out` must be valid for writing a pointer.
enum SfStatus sf_params_new(double eps0,
                            double tau_m,
                            double tau_s,
                            double theta,
                            double u_reset,
                            double tau_q,
                            double rho0,
                            double delta_u,
                            struct SfParams **out);

// # Safety
// `p` must be null or a handle from `sf_params_new*` not yet freed.
void sf_params_free(struct SfParams *p);

// Current, PSP, reset and FILT window kernels at lag `s` ms.
//
// # Safety
// `params` must be a live handle and `out` valid for writing.
enum SfStatus sf_kernels(const struct SfParams *params, double s, struct SfKernels *out);

// Spike train from `n` strictly increasing, finite, non-negative times.
//
// # Safety
// `times` must be valid for `n` reads and `out` valid for writing.
enum SfStatus sf_spike_train_new(const double *times, size_t n, struct SfSpikeTrain **out);

// Number of spikes; 0 for a null handle.
//
// # Safety
// `train` must be null or a live handle.
size_t sf_spike_train_len(const struct SfSpikeTrain *train);

// Copies the spike times into `buf` of capacity `cap`; `written` receives
// the spike count. Fails with `BufferTooSmall` when `cap` is short.
//
// # Safety
// `train` must be a live handle, `buf` valid for `cap` writes and `written`
// valid for writing.
enum SfStatus sf_spike_train_times(const struct SfSpikeTrain *train,
                                   double *buf,
                                   size_t cap,
                                   size_t *written);

// # Safety
// `train` must be null or a live handle.
void sf_spike_train_free(struct SfSpikeTrain *train);

// Pattern with exactly one spike per input: input `j` fires at `times[j]`.
//
// # Safety
// `times` must be valid for `n_inputs` reads and `out` valid for writing.
enum SfStatus sf_pattern_new_single(const double *times,
                                    size_t n_inputs,
                                    double duration,
                                    struct SfPattern **out);

// General pattern: input `j` owns the next `counts[j]` entries of `times`.
//
// # Safety
// `counts` must be valid for `n_inputs` reads, `times` for the sum of the
// counts, and `out` valid for writing.
enum SfStatus sf_pattern_new(const double *times,
                             const size_t *counts,
                             size_t n_inputs,
                             double duration,
                             struct SfPattern **out);

// Number of inputs; 0 for a null handle.
//
// # Safety
// `pattern` must be null or a live handle.
size_t sf_pattern_n_inputs(const struct SfPattern *pattern);

// # Safety
// `pattern` must be null or a live handle.
void sf_pattern_free(struct SfPattern *pattern);

// Van Rossum distance between two trains.
//
// # Safety
// `a` and `b` must be live handles and `out` valid for writing.
enum SfStatus sf_vrd(const struct SfSpikeTrain *a,
                     const struct SfSpikeTrain *b,
                     double tau_q,
                     double *out);

// Simulates one trial with step `dt` and returns the output spikes.
//
// # Safety
// `pattern` and `params` must be live handles, `weights` valid for
// `n_weights` reads and `out` valid for writing.
enum SfStatus sf_simulate(const struct SfPattern *pattern,
                          const double *weights,
                          size_t n_weights,
                          const struct SfParams *params,
                          double dt,
                          struct SfSpikeTrain **out);

// Per-trial weight change of `rule` into `dw` (one entry per input).
//
// # Safety
// All handles must be live and `dw` valid for `n` writes.
enum SfStatus sf_update(enum SfRule rule,
                        const struct SfPattern *pattern,
                        const struct SfSpikeTrain *actual,
                        const struct SfSpikeTrain *target,
                        double eta,
                        const struct SfParams *params,
                        double *dw,
                        size_t n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPIKEFILT_H */
