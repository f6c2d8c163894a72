#ifndef FRACSYM_H
#define FRACSYM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every fallible call.
typedef enum FracsymStatus {
  FRACSYM_OK = 0,
  // A required pointer was null or a string was not UTF-8.
  FRACSYM_NULL_ARGUMENT = 1,
  FRACSYM_INVALID_GRID = 2,
  FRACSYM_INVALID_PARAMETER = 3,
  FRACSYM_DOMAIN = 4,
  FRACSYM_GRID_MISMATCH = 5,
  FRACSYM_MALFORMED_FILE = 6,
  FRACSYM_NO_CONVERGENCE = 7,
  FRACSYM_TRUNCATION = 8,
  FRACSYM_UNSUPPORTED = 9,
  FRACSYM_IO = 10,
  // The library panicked; the handle arguments are left untouched.
  FRACSYM_INTERNAL = 11,
} FracsymStatus;

// Opaque piecewise-constant grid function.
typedef struct FracsymFunction FracsymFunction;

// Opaque uniform grid.
typedef struct FracsymGrid FracsymGrid;

// Opaque set of grid cells.
typedef struct FracsymSet FracsymSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *fracsym_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *fracsym_version(void);

// Creates a grid with `dim` (1 or 2) axes; `shape` and `origin` hold `dim`
// entries, `origin` being the lower box corner.
//
// # Safety
// `shape` and `origin` must point to `dim` readable values; `out` must be
// writable.
enum FracsymStatus fracsym_grid_new(size_t dim,
                                    const size_t *shape,
                                    const double *origin,
                                    double spacing,
                                    bool periodic,
                                    struct FracsymGrid **out);

// # Safety
// `grid` must come from this library and not be used afterwards.
void fracsym_grid_free(struct FracsymGrid *grid);

// Number of cells of a grid (0 for a null handle).
//
// # Safety
// `grid` must be null or a live handle.
size_t fracsym_grid_len(const struct FracsymGrid *grid);

// Function with the given cell values (row-major) on `grid`.
//
// # Safety
// `values` must point to `len` readable doubles; handles must be live.
enum FracsymStatus fracsym_function_new(const struct FracsymGrid *grid,
                                        const double *values,
                                        size_t len,
                                        struct FracsymFunction **out);

// # Safety
// `f` must come from this library and not be used afterwards.
void fracsym_function_free(struct FracsymFunction *f);

// Number of cells (0 for a null handle).
//
// # Safety
// `f` must be null or a live handle.
size_t fracsym_function_len(const struct FracsymFunction *f);

// Copies the cell values into `buf`, which must hold exactly
// `fracsym_function_len(f)` doubles.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum FracsymStatus fracsym_function_values(const struct FracsymFunction *f,
                                           double *buf,
                                           size_t len);

// Loads a function (masks become indicators) from a grid file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum FracsymStatus fracsym_function_load(const char *path, struct FracsymFunction **out);

// # Safety
// `path` must be a NUL-terminated string; `f` a live handle.
enum FracsymStatus fracsym_function_save(const struct FracsymFunction *f, const char *path);

// Set from a 0/1 byte mask (row-major).
//
// # Safety
// `mask` must point to `len` readable bytes; handles must be live.
enum FracsymStatus fracsym_set_new(const struct FracsymGrid *grid,
                                   const uint8_t *mask,
                                   size_t len,
                                   struct FracsymSet **out);

// # Safety
// `set` must come from this library and not be used afterwards.
void fracsym_set_free(struct FracsymSet *set);

// Number of cells in the set (0 for a null handle).
//
// # Safety
// `set` must be null or a live handle.
size_t fracsym_set_count(const struct FracsymSet *set);

// Symmetric-decreasing rearrangement about the box center.
//
// # Safety
// Handles must be live; `out` writable.
enum FracsymStatus fracsym_schwarz(const struct FracsymFunction *f, struct FracsymFunction **out);

// Steiner rearrangement along `axis`.
//
// # Safety
// Handles must be live; `out` writable.
enum FracsymStatus fracsym_steiner(const struct FracsymFunction *f,
                                   size_t axis,
                                   struct FracsymFunction **out);

// Isotropic Gagliardo seminorm [u]_{W^{s,p}}.
//
// # Safety
// Handles must be live; `out` writable.
enum FracsymStatus fracsym_gagliardo_seminorm(const struct FracsymFunction *f,
                                              double s,
                                              double p,
                                              double *out);

// Fractional perimeter P_s of a set.
//
// # Safety
// Handles must be live; `out` writable.
enum FracsymStatus fracsym_fractional_perimeter(const struct FracsymSet *set,
                                                double s,
                                                double *out);

// Fraenkel asymmetry of a set.
//
// # Safety
// Handles must be live; `out` writable.
enum FracsymStatus fracsym_fraenkel_asymmetry(const struct FracsymSet *set, double *out);

// First Dirichlet eigenvalue of (−Δ)ˢ on the set; the eigenfunction is
// written to `eigenfunction` when that pointer is non-null.
//
// # Safety
// Handles must be live; `lambda` writable; `eigenfunction` null or writable.
enum FracsymStatus fracsym_first_eigenpair(const struct FracsymSet *set,
                                           double s,
                                           double tol,
                                           double *lambda,
                                           struct FracsymFunction **eigenfunction);

// Fourier-multiplier fractional Laplacian of a periodic function.
//
// # Safety
// Handles must be live; `out` writable.
enum FracsymStatus fracsym_fractional_laplacian(const struct FracsymFunction *f,
                                                double s,
                                                struct FracsymFunction **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACSYM_H */
