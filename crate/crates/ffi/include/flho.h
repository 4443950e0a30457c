#ifndef FLHO_H
#define FLHO_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FlhoStatus {
  FLHO_STATUS_OK = 0,
  FLHO_STATUS_INVALID_ARGUMENT = 1,
  FLHO_STATUS_NUMERICAL_FAILURE = 2,
  FLHO_STATUS_IO = 3,
  FLHO_STATUS_NULL_POINTER = 4,
  FLHO_STATUS_PANIC = 5,
} FlhoStatus;

// Computed spectrum of `H = (K/2)(Lx² + κ²Ly²)`.
typedef struct FlhoSpectrum FlhoSpectrum;

typedef struct FlhoConstants {
  double hbar;
  double hbar1;
  double hbar2;
  double mass;
  double stiffness;
  double q;
  double p;
  double j;
  uint64_t l;
  double k_energy;
  double kappa;
  double omega;
  // Factor applied to hbar1 and hbar2 so that l is an integer.
  double rescale;
} FlhoConstants;

typedef struct FlhoKillingReport {
  double jacobi_defect;
  double killing_det;
  uint32_t killing_rank;
  // 1 when the Killing form is nondegenerate.
  uint32_t semisimple;
} FlhoKillingReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next `flho_*` call on the same thread.
const char *flho_last_error(void);

// Library version as a static NUL-terminated string.
const char *flho_version(void);

// Computes the spectrum for `(l, K, κ)`. `lowest = 0` requests every eigenvalue.
//
// # Safety
// `out` must be valid for a pointer write.
enum FlhoStatus flho_spectrum_new(uint64_t l,
                                  double k_energy,
                                  double kappa,
                                  size_t lowest,
                                  struct FlhoSpectrum **out);

// # Safety
// `spec` must be null or a pointer from [`flho_spectrum_new`] not yet freed.
void flho_spectrum_free(struct FlhoSpectrum *spec);

// Number of eigenvalues held, 0 for a null handle.
//
// # Safety
// `spec` must be null or a live handle.
size_t flho_spectrum_len(const struct FlhoSpectrum *spec);

// Copies up to `cap` ascending eigenvalues into `buf`; `written` receives the count.
//
// # Safety
// `spec` must be a live handle, `buf` valid for `cap` doubles, `written` writable.
enum FlhoStatus flho_spectrum_eigenvalues(const struct FlhoSpectrum *spec,
                                          double *buf,
                                          size_t cap,
                                          size_t *written);

// Eigenvalue `index` with its parity (0 even `m`, 1 odd `m`) and degeneracy group.
// Any of the output pointers may be null.
//
// # Safety
// `spec` must be a live handle; non-null outputs must be writable.
enum FlhoStatus flho_spectrum_get(const struct FlhoSpectrum *spec,
                                  size_t index,
                                  double *energy,
                                  uint32_t *parity,
                                  size_t *group);

// Number of degeneracy groups.
//
// # Safety
// `spec` must be null or a live handle.
size_t flho_spectrum_group_count(const struct FlhoSpectrum *spec);

// Lowest value and multiplicity of degeneracy group `g`.
//
// # Safety
// `spec` must be a live handle; non-null outputs must be writable.
enum FlhoStatus flho_spectrum_group(const struct FlhoSpectrum *spec,
                                    size_t g,
                                    double *value,
                                    size_t *multiplicity);

// Derives the oscillator constants from `ħ, ħ′, ħ″, m, k`.
//
// # Safety
// `out` must be writable.
enum FlhoStatus flho_constants(double hbar,
                               double hbar1,
                               double hbar2,
                               double mass,
                               double stiffness,
                               struct FlhoConstants *out);

// Closed-form level `E_n` of the `κ = 1` oscillator.
//
// # Safety
// `out` must be writable.
enum FlhoStatus flho_medium_level(uint64_t l, double k_energy, uint64_t n, double *out);

// Stability report for a bracket given as `count` rows of `(i, j, k, value)`
// in `entries` (row-major, `4·count` doubles, indices as exact integers).
//
// # Safety
// `entries` must be valid for `4·count` doubles; `out` must be writable.
enum FlhoStatus flho_killing_report(size_t dim,
                                    const double *entries,
                                    size_t count,
                                    struct FlhoKillingReport *out);

// Same as [`flho_killing_report`] for structure constants in the JSON file format.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum FlhoStatus flho_killing_report_file(const char *path, struct FlhoKillingReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLHO_H */
