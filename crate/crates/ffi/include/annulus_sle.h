#ifndef ANNULUS_SLE_H
#define ANNULUS_SLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum AsleStatus {
  // Success.
  ASLE_STATUS_OK = 0,
  // A required pointer argument was null.
  ASLE_STATUS_NULL_POINTER = 1,
  // Arguments violate a precondition (range, neutrality, coincident points, ...).
  ASLE_STATUS_INVALID_ARGUMENT = 2,
  // The computation itself failed (non-convergence, pole proximity, swallowing, ...).
  ASLE_STATUS_NUMERICAL = 3,
  // An unexpected internal failure (caught panic).
  ASLE_STATUS_INTERNAL = 4,
} AsleStatus;

// Boundary condition on the inner boundary.
typedef enum AsleBoundary {
  // Excursion-reflected.
  ASLE_BOUNDARY_ER = 0,
  // Dirichlet.
  ASLE_BOUNDARY_DIRICHLET = 1,
} AsleBoundary;

// Evaluation method of screening partition functions.
typedef enum AsleMethod {
  // Euler integral over the boundary arc (`κ > 4`).
  ASLE_METHOD_EULER = 0,
  // Residue calculus (`4/κ ∈ {1, 2, 3, 4}`).
  ASLE_METHOD_RESIDUE = 1,
  // Closed forms (`κ ∈ {4, 2, 4/3, 1}`, ER only).
  ASLE_METHOD_CLOSED_FORM = 2,
  // Degenerate hypergeometric limit (`r = ∞`).
  ASLE_METHOD_HYPERGEOMETRIC = 3,
} AsleMethod;

// Force divisor with its SLE parameter and boundary condition (opaque).
typedef struct AsleForce AsleForce;

// One SLE path in progress (opaque).
typedef struct AsleLoewner AsleLoewner;

// Screening partition function evaluator (opaque).
typedef struct AslePartition AslePartition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len` bytes). Returns the full message length excluding the
// terminator, or 0 when there is no error.
//
// # Safety
// `buf` must be null or valid for `len` writable bytes.
size_t asle_last_error_message(char *buf, size_t len);

// Theta function `Θ(r, z)`.
//
// # Safety
// `out_re` and `out_im` must be valid for writes.
enum AsleStatus asle_theta(double r, double z_re, double z_im, double *out_re, double *out_im);

// Loewner kernel `H(r, z)`.
//
// # Safety
// `out_re` and `out_im` must be valid for writes.
enum AsleStatus asle_loewner_kernel(double r,
                                    double z_re,
                                    double z_im,
                                    double *out_re,
                                    double *out_im);

// Green's function `G_r(ζ, z)` of the given boundary condition.
//
// # Safety
// `out` must be valid for writes.
enum AsleStatus asle_green(enum AsleBoundary bc,
                           double r,
                           double zeta_re,
                           double zeta_im,
                           double z_re,
                           double z_im,
                           double *out);

// Creates a screening partition function evaluator.
//
// # Safety
// `out` must be valid for writes; the handle must be released with
// [`asle_partition_free`].
enum AsleStatus asle_partition_new(enum AsleMethod method,
                                   double kappa,
                                   enum AsleBoundary bc,
                                   struct AslePartition **out);

// Evaluates `Z(r, x)`.
//
// # Safety
// `h` must be a live handle from [`asle_partition_new`]; `out` must be valid
// for writes.
enum AsleStatus asle_partition_eval(const struct AslePartition *h, double r, double x, double *out);

// Releases an evaluator.
//
// # Safety
// `h` must be null or a handle from [`asle_partition_new`] not yet freed.
void asle_partition_free(struct AslePartition *h);

// Creates a force divisor with seed charge `a = √(2/κ)`.  Point `j` is
// `q_re[j]` on the outer boundary, or `q_re[j] + i r` on the inner one when
// `inner[j] != 0` (`inner` may be null), with charge `beta[j]`.  The charges
// must satisfy `a + Σ β_j = 0`.
//
// # Safety
// `q_re`, `beta` (and `inner` if non-null) must be valid for `n` reads; `out`
// must be valid for writes.  Release with [`asle_force_free`].
enum AsleStatus asle_force_new(double kappa,
                               enum AsleBoundary bc,
                               double r,
                               size_t n,
                               const double *q_re,
                               const double *beta,
                               const uint8_t *inner,
                               struct AsleForce **out);

// One-leg partition function `Z_β(r, p)`.
//
// # Safety
// `h` must be a live handle; `out` must be valid for writes.
enum AsleStatus asle_force_partition(const struct AsleForce *h, double r, double p, double *out);

// Drift `Λ(r, ξ)` induced by the force divisor.
//
// # Safety
// `h` must be a live handle; `out` must be valid for writes.
enum AsleStatus asle_force_drift(const struct AsleForce *h, double r, double xi, double *out);

// Releases a force divisor.
//
// # Safety
// `h` must be null or a handle from [`asle_force_new`] not yet freed.
void asle_force_free(struct AsleForce *h);

// Starts an SLE(κ,Λ) path in the strip of modulus `r0` from `p`.  The drift
// comes from `force` (its κ and boundary condition); with `force` null the
// path is driftless.  The force handle may be freed afterwards.
//
// # Safety
// `force` must be null or a live handle; `out` must be valid for writes.
// Release with [`asle_loewner_free`].
enum AsleStatus asle_loewner_new(double kappa,
                                 double r0,
                                 double p,
                                 double dt,
                                 uint64_t seed,
                                 const struct AsleForce *force,
                                 struct AsleLoewner **out);

// Advances the path by `n_steps` steps.  On a numerical error (e.g. a force
// point swallowed) the path stays at the last completed step.
//
// # Safety
// `h` must be a live handle.
enum AsleStatus asle_loewner_advance(struct AsleLoewner *h, size_t n_steps);

// Current time and driver value.
//
// # Safety
// `h` must be a live handle; `t` and `xi` must be valid for writes.
enum AsleStatus asle_loewner_driver(const struct AsleLoewner *h, double *t, double *xi);

// Current tip `γ_t`, from the reverse flow started at `ξ_t + iε`.
//
// # Safety
// `h` must be a live handle; `out_re` and `out_im` must be valid for writes.
enum AsleStatus asle_loewner_tip(const struct AsleLoewner *h,
                                 double eps,
                                 double *out_re,
                                 double *out_im);

// Releases a path.
//
// # Safety
// `h` must be null or a handle from [`asle_loewner_new`] not yet freed.
void asle_loewner_free(struct AsleLoewner *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANNULUS_SLE_H */
