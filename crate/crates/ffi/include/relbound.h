#ifndef RELBOUND_H
#define RELBOUND_H

/* Generated by cbindgen from the relbound-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum RbStatus {
  RB_OK = 0,
  /**
   * invalid configuration (masses, charge, coupling, grid, names)
   */
  RB_ERR_CONFIG = 1,
  /**
   * arguments outside the mathematical domain
   */
  RB_ERR_DOMAIN = 2,
  /**
   * numerical failure during assembly or diagonalization
   */
  RB_ERR_NUMERICAL = 3,
  /**
   * a required pointer argument was null
   */
  RB_ERR_NULL_ARGUMENT = 4,
  /**
   * an index argument was out of range
   */
  RB_ERR_INDEX = 5,
  /**
   * internal panic; the handle state is still valid
   */
  RB_ERR_INTERNAL = 6,
} RbStatus;

/**
 * Opaque solved spectrum of one channel block.
 */
typedef struct RbSpectrum RbSpectrum;

/**
 * Opaque two-body system: masses, charge, coupling and form factors.
 */
typedef struct RbSystem RbSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the most recent error on this thread into `buf`
 * (always NUL-terminated, truncated to `len`). Returns the full message
 * length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null (query mode).
 */
uintptr_t rb_last_error(char *buf, uintptr_t len);

/**
 * Creates a system from explicit parameters. `form_factors` selects the
 * vertex structure by name ("point", "dipole-proton", ...); pass null for
 * point couplings.
 *
 * # Safety
 * `out` must be a valid pointer; `form_factors` must be null or a
 * NUL-terminated string.
 */
enum RbStatus rb_system_new(double m1,
                            double m2,
                            int z,
                            double alpha,
                            const char *form_factors,
                            struct RbSystem **out);

/**
 * Creates a system from a named preset: "hydrogen", "muonic-hydrogen" or
 * "equal-mass".
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RbStatus rb_system_preset(const char *name, struct RbSystem **out);

/**
 * Frees a system handle. Null is accepted.
 *
 * # Safety
 * `sys` must be a pointer from `rb_system_new`/`rb_system_preset`, used
 * at most once here.
 */
void rb_system_free(struct RbSystem *sys);

/**
 * One partial-wave kernel element V_ab(k, k') of the block (`j`, `block`),
 * where `block` is 'a' (spin-singlet-type) or 'b' (spin-triplet-type) and
 * `a`, `b` index the block channels.
 *
 * # Safety
 * `sys` and `out` must be valid pointers.
 */
enum RbStatus rb_kernel_element(const struct RbSystem *sys,
                                int j,
                                char block,
                                uintptr_t a,
                                uintptr_t b,
                                double k,
                                double kp,
                                double *out);

/**
 * Solves the block (`j`, `block`) on an `n`-point grid. `k0 <= 0` selects
 * the automatic Bohr-momentum scale. On success `*out` owns the spectrum.
 *
 * # Safety
 * `sys` and `out` must be valid pointers.
 */
enum RbStatus rb_solve(const struct RbSystem *sys,
                       int j,
                       char block,
                       uintptr_t n,
                       double k0,
                       struct RbSpectrum **out);

/**
 * Frees a spectrum handle. Null is accepted.
 *
 * # Safety
 * `spec` must be a pointer from `rb_solve`, used at most once here.
 */
void rb_spectrum_free(struct RbSpectrum *spec);

/**
 * Number of states (channels x grid points) in the spectrum.
 *
 * # Safety
 * `spec` must be a valid spectrum pointer.
 */
uintptr_t rb_spectrum_size(const struct RbSpectrum *spec);

/**
 * Number of states with negative binding energy.
 *
 * # Safety
 * `spec` must be a valid spectrum pointer.
 */
uintptr_t rb_spectrum_bound_count(const struct RbSpectrum *spec);

/**
 * Invariant mass of state `idx` (ascending order).
 *
 * # Safety
 * `spec` and `out` must be valid pointers.
 */
enum RbStatus rb_spectrum_mass(const struct RbSpectrum *spec, uintptr_t idx, double *out);

/**
 * Binding energy M - m1 - m2 of state `idx`.
 *
 * # Safety
 * `spec` and `out` must be valid pointers.
 */
enum RbStatus rb_spectrum_binding(const struct RbSpectrum *spec, uintptr_t idx, double *out);

/**
 * Copies the grid nodes (momenta) into `buf`; returns the grid size. With a
 * null `buf` only the size is reported.
 *
 * # Safety
 * `buf` must be null or point to at least `len` doubles.
 */
uintptr_t rb_spectrum_grid(const struct RbSpectrum *spec, double *buf, uintptr_t len);

/**
 * Copies the radial wave function Phi of (`state`, `channel`) at the grid
 * nodes into `buf` (up to `len` values); returns the grid size, or 0 if the
 * indices are out of range.
 *
 * # Safety
 * `buf` must be null or point to at least `len` doubles.
 */
uintptr_t rb_spectrum_wavefunction(const struct RbSpectrum *spec,
                                   uintptr_t state,
                                   uintptr_t channel,
                                   double *buf,
                                   uintptr_t len);

/**
 * Runs the full internal verification battery with the given seed. Returns
 * RbOk when every suite passes; RbErrNumerical when a suite fails, with the
 * failing suites named in the last-error message.
 */
enum RbStatus rb_verify(uint64_t seed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELBOUND_H */
