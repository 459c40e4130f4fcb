#ifndef STARCOMB_H
#define STARCOMB_H

/* Generated by cbindgen from the starcomb-capi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum sc_status {
  SC_OK = 0,
  SC_ERR_INVALID_ARGUMENT = 1,
  SC_ERR_SINGULAR_BASIS = 2,
  SC_ERR_CAPACITY_EXCEEDED = 3,
  SC_ERR_INJECTIVITY_FAILED = 4,
  SC_ERR_NOT_ADMISSIBLE = 5,
  SC_ERR_NON_SMOOTH_WEIGHT = 6,
  SC_ERR_QUADRATURE = 7,
  SC_ERR_NO_CANDIDATES = 8,
  SC_ERR_NULL_POINTER = 9,
  SC_ERR_PANIC = 10,
} sc_status;

// Closed-form autocorrelation table.
typedef struct sc_autocorr sc_autocorr;

// Generated weighted comb on a box.
typedef struct sc_comb sc_comb;

// Finite decoration attached to each lattice point.
typedef struct sc_decoration sc_decoration;

// Closed-form diffraction peak list.
typedef struct sc_peaks sc_peaks;

// Validated cut-and-project scheme.
typedef struct sc_scheme sc_scheme;

// Weight function on the internal space.
typedef struct sc_weight sc_weight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent error on this thread.
//
// The pointer stays valid until the next failing call on the same thread.
// Never returns null; the message is empty if no error occurred yet.
//
// # Safety
// The returned pointer must not be freed or written through.
const char *sc_last_error_message(void);

// Build and validate a cut-and-project scheme.
//
// `basis_rows` is the row-major `(d+m) x (d+m)` basis matrix whose columns
// generate the lattice; the first `d` coordinate rows are physical, the
// remaining `m` internal. Validation enumerates lattice points up to
// `search_radius` looking for an injectivity witness and scans internal
// coverage at cell size `coverage_eps`; pass `0` and `0.0` for the defaults.
//
// # Safety
// `basis_rows` must point to `(d+m)*(d+m)` doubles and `out` must be a valid
// location for a handle. On success `*out` owns the scheme and must be
// released with [`sc_scheme_free`].
enum sc_status sc_scheme_new(uintptr_t d,
                             uintptr_t m,
                             const double *basis_rows,
                             int64_t search_radius,
                             double coverage_eps,
                             struct sc_scheme **out);

// Release a scheme handle. Null is ignored.
//
// # Safety
// `s` must be a handle from [`sc_scheme_new`] not freed before.
void sc_scheme_free(struct sc_scheme *s);

// Absolute determinant of the lattice basis (the covolume).
//
// # Safety
// `s` must be a live scheme handle and `out` a valid double location.
enum sc_status sc_scheme_det_abs(const struct sc_scheme *s, double *out);

// Physical and internal dimensions of the scheme.
//
// # Safety
// `s` must be a live scheme handle; `d` and `m` may each be null to skip.
enum sc_status sc_scheme_dims(const struct sc_scheme *s, uintptr_t *d, uintptr_t *m);

// Gaussian weight `exp(-pi |h/width|^2)` on `R^m`.
//
// # Safety
// `out` must be a valid location; on success `*out` must be released with
// [`sc_weight_free`].
enum sc_status sc_weight_gaussian(uintptr_t m, double width, struct sc_weight **out);

// Smooth bump supported on the ball of the given radius.
//
// # Safety
// Same contract as [`sc_weight_gaussian`].
enum sc_status sc_weight_bump(uintptr_t m, double radius, struct sc_weight **out);

// Smooth weight `(1 + |h|^2 / scale^2)^(-exponent/2)` with power-law decay.
//
// # Safety
// Same contract as [`sc_weight_gaussian`].
enum sc_status sc_weight_poly_decay(uintptr_t m,
                                    double exponent,
                                    double scale,
                                    struct sc_weight **out);

// Indicator of the box `[lo, hi]`; admitted only on density paths.
//
// # Safety
// `lo` and `hi` must point to `m` doubles; same handle contract as
// [`sc_weight_gaussian`].
enum sc_status sc_weight_sharp_window(uintptr_t m,
                                      const double *lo,
                                      const double *hi,
                                      struct sc_weight **out);

// Release a weight handle. Null is ignored.
//
// # Safety
// `w` must be a handle from a weight constructor not freed before.
void sc_weight_free(struct sc_weight *w);

// Evaluate the weight at an internal point.
//
// # Safety
// `h` must point to `m` doubles matching the weight's dimension; `re` and
// `im` may each be null to skip that component.
enum sc_status sc_weight_eval(const struct sc_weight *w, const double *h, double *re, double *im);

// Internal truncation radius so the discarded comb tail stays below `eps`
// after scaling by `volume_scale` (use the box volume of the planned comb).
//
// # Safety
// `w` and `s` must be live handles; `out` must be a valid double location.
enum sc_status sc_weight_truncation_radius(const struct sc_weight *w,
                                           const struct sc_scheme *s,
                                           double eps,
                                           double volume_scale,
                                           double *out);

// The single-atom decoration: one unshifted atom of weight one.
//
// # Safety
// `s` must be a live scheme handle; on success `*out` must be released with
// [`sc_decoration_free`].
enum sc_status sc_decoration_default(const struct sc_scheme *s, struct sc_decoration **out);

// Decoration with `n_atoms` atoms: physical shifts `s[i*d .. i*d+d]`,
// internal shifts `k[i*m .. i*m+m]`, complex weights `w[2*i], w[2*i+1]`.
//
// # Safety
// `s_shifts` must hold `n_atoms*d` doubles, `k_shifts` `n_atoms*m`, and
// `weights` `2*n_atoms`; same handle contract as [`sc_decoration_default`].
enum sc_status sc_decoration_new(const struct sc_scheme *s,
                                 uintptr_t n_atoms,
                                 const double *s_shifts,
                                 const double *k_shifts,
                                 const double *weights,
                                 struct sc_decoration **out);

// Release a decoration handle. Null is ignored.
//
// # Safety
// `d` must be a handle from a decoration constructor not freed before.
void sc_decoration_free(struct sc_decoration *d);

// Closed-form density of the comb (average weight per unit volume).
//
// # Safety
// All handles must be live; `re` and `im` may each be null to skip.
enum sc_status sc_density_closed(const struct sc_scheme *s,
                                 const struct sc_weight *w,
                                 const struct sc_decoration *deco,
                                 double quad_tol,
                                 double *re,
                                 double *im);

// Generate the weighted comb on the box `[region_lo, region_hi]`.
//
// The comb represents the hull element with representative
// `(origin_s, origin_k)`; pass null for both to take the zero element.
//
// # Safety
// `region_lo`/`region_hi` must point to `d` doubles; `origin_s` to `d` and
// `origin_k` to `m` doubles when non-null (null them together). On success
// `*out` must be released with [`sc_comb_free`].
enum sc_status sc_comb_generate(const struct sc_scheme *s,
                                const struct sc_weight *w,
                                const struct sc_decoration *deco,
                                const double *origin_s,
                                const double *origin_k,
                                const double *region_lo,
                                const double *region_hi,
                                double trunc_eps,
                                struct sc_comb **out);

// Release a comb handle. Null is ignored.
//
// # Safety
// `c` must be a handle from [`sc_comb_generate`] not freed before.
void sc_comb_free(struct sc_comb *c);

// Number of atoms in the comb.
//
// # Safety
// `c` must be a live comb handle and `out` a valid location.
enum sc_status sc_comb_len(const struct sc_comb *c, uintptr_t *out);

// Copy out atom `idx`: its position (ascending order) and complex weight.
//
// # Safety
// `position` must point to `d` doubles when non-null; `w_re`/`w_im` may be
// null to skip. `idx` past the end yields `SC_ERR_INVALID_ARGUMENT`.
enum sc_status sc_comb_atom(const struct sc_comb *c,
                            uintptr_t idx,
                            double *position,
                            double *w_re,
                            double *w_im);

// Average weight of the comb per unit volume of its box.
//
// # Safety
// `c` must be a live comb handle; `re` and `im` may each be null to skip.
enum sc_status sc_weyl_average(const struct sc_comb *c, double *re, double *im);

// Fourier average of the comb at frequency `k` (length `d`).
//
// # Safety
// `c` must be a live comb handle and `k` point to `d` doubles.
enum sc_status sc_fourier_bohr(const struct sc_comb *c, const double *k, double *re, double *im);

// Closed-form autocorrelation on displacements in `[lo, hi]` (length `d`
// each) with the given internal truncation.
//
// # Safety
// All handles must be live; on success `*out` must be released with
// [`sc_autocorr_free`].
enum sc_status sc_autocorr_closed(const struct sc_scheme *s,
                                  const struct sc_weight *w,
                                  const struct sc_decoration *deco,
                                  const double *lo,
                                  const double *hi,
                                  double internal_cut,
                                  double quad_tol,
                                  struct sc_autocorr **out);

// Number of entries in the table (sorted by descending modulus).
//
// # Safety
// `t` must be a live table handle and `out` a valid location.
enum sc_status sc_autocorr_len(const struct sc_autocorr *t, uintptr_t *out);

// Copy out entry `idx`: displacement (length `d`) and complex coefficient.
//
// # Safety
// `u` must point to `d` doubles when non-null; `re`/`im` may be null.
enum sc_status sc_autocorr_entry(const struct sc_autocorr *t,
                                 uintptr_t idx,
                                 double *u,
                                 double *re,
                                 double *im);

// Release a table handle. Null is ignored.
//
// # Safety
// `t` must be a handle from [`sc_autocorr_closed`] not freed before.
void sc_autocorr_free(struct sc_autocorr *t);

// Closed-form diffraction peaks with frequency in `[k_lo, k_hi]` and
// intensity above `intensity_floor`. Pass `internal_cut <= 0` to derive the
// cut from the floor.
//
// # Safety
// All handles must be live; `k_lo`/`k_hi` must point to `d` doubles. On
// success `*out` must be released with [`sc_peaks_free`].
enum sc_status sc_diffraction_peaks(const struct sc_scheme *s,
                                    const struct sc_weight *w,
                                    const struct sc_decoration *deco,
                                    const double *k_lo,
                                    const double *k_hi,
                                    double internal_cut,
                                    double intensity_floor,
                                    double quad_tol,
                                    struct sc_peaks **out);

// Number of peaks (sorted by descending intensity).
//
// # Safety
// `p` must be a live peak-list handle and `out` a valid location.
enum sc_status sc_peaks_len(const struct sc_peaks *p, uintptr_t *out);

// Copy out peak `idx`: frequency `k` (length `d`), internal frequency `eta`
// (length `m`), complex amplitude, and intensity.
//
// # Safety
// `k` must point to `d` and `eta` to `m` doubles when non-null; the scalar
// outputs may each be null to skip.
enum sc_status sc_peaks_get(const struct sc_peaks *p,
                            uintptr_t idx,
                            double *k,
                            double *eta,
                            double *amp_re,
                            double *amp_im,
                            double *intensity);

// Release a peak-list handle. Null is ignored.
//
// # Safety
// `p` must be a handle from [`sc_diffraction_peaks`] not freed before.
void sc_peaks_free(struct sc_peaks *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STARCOMB_H */
