/* C ABI for the curved-space Dirac library.
 *
 * Handles returned by cd_params_new and the cd_profile_* constructors are
 * owned by the caller and must be released with the matching cd_*_free.
 * All other functions borrow them immutably, so a handle may be shared
 * across threads once built. Fallible calls return a CdStatus; results are
 * written through out-pointers only on CD_OK.
 *
 * On failure, cd_last_error_message() returns the human-readable detail for
 * the calling thread; the pointer stays valid until the next failing call
 * on the same thread, so copy the string before calling anything else.
 * Panics never cross the boundary: they surface as CD_ERR_PANIC.
 *
 * Maintained by hand; keep in sync with the exported Rust signatures.
 */

#ifndef CURVED_DIRAC_H
#define CURVED_DIRAC_H

#ifdef __cplusplus
extern "C" {
#endif

/* Result codes of every fallible call. */
typedef enum CdStatus {
  CD_OK = 0,
  /* A required pointer argument was null. */
  CD_ERR_NULL_ARGUMENT = 1,
  /* Arguments violate a model constraint or accept no closed form. */
  CD_ERR_INVALID_ARGUMENT = 2,
  /* The evaluation point lies outside the profile domain. */
  CD_ERR_OUT_OF_DOMAIN = 3,
  /* Structural singularity: zero metric, degenerate energy, matching or
   * balance singularity, special-function pole. */
  CD_ERR_SINGULAR = 4,
  /* A numerical method failed to reach its accuracy or converge. */
  CD_ERR_NUMERICAL = 5,
  /* An internal panic was caught at the boundary. */
  CD_ERR_PANIC = 6
} CdStatus;

/* Opaque model-parameter handle. */
typedef struct CdParams CdParams;

/* Opaque background-profile handle. */
typedef struct CdProfile CdProfile;

/* Static name of a status code, always a valid C string. */
const char *cd_status_message(CdStatus status);

/* Detail text of the most recent failure on the calling thread; empty if
 * nothing failed yet. */
const char *cd_last_error_message(void);

/* Allocates model parameters (alpha, tau, lambda, mass, curvature R) after
 * validating them; requires alpha^2 tau^2 < 1, tau != 0, mass >= 0, R > 0. */
CdStatus cd_params_new(double alpha, double tau, double lambda, double mass,
                       double curvature_r, CdParams **out);

/* Releases a parameter handle; a null pointer is ignored. */
void cd_params_free(CdParams *params);

/* Profile constructors. Each writes a caller-owned handle on CD_OK.
 *
 * linear_flat:     b linear in x, constant eta = theta sqrt(R); sign_a1 is
 *                  +1 or -1 and fixes the slope sign of a.
 * hyperbolic:      positive constant curvature, constants (zeta, vartheta,
 *                  a0), domain symmetric around the origin.
 * trig:            negative constant curvature; requires vartheta > |a0|.
 * inverse_square:  critical 1/x^2 curvature on x > 0 with coefficient pairs
 *                  (a0, a1) and (b0, b1).
 * flat:            constant a = a0, b = 0, eta = 0 on the whole line.
 */
CdStatus cd_profile_linear_flat(const CdParams *params, double theta,
                                double xi, int sign_a1, CdProfile **out);
CdStatus cd_profile_hyperbolic(const CdParams *params, double zeta,
                               double vartheta, double a0, CdProfile **out);
CdStatus cd_profile_trig(const CdParams *params, double zeta, double vartheta,
                         double a0, CdProfile **out);
CdStatus cd_profile_inverse_square(const CdParams *params, double a0,
                                   double a1, double b0, double b1,
                                   CdProfile **out);
CdStatus cd_profile_flat(const CdParams *params, double a0, CdProfile **out);

/* Releases a profile handle; a null pointer is ignored. */
void cd_profile_free(CdProfile *profile);

/* Constant torsion scalar eta of the profile. */
CdStatus cd_profile_eta(const CdProfile *profile, double *out);

/* Open domain boundaries of the profile. */
CdStatus cd_profile_domain(const CdProfile *profile, double *lo, double *hi);

/* Profile pair at x: out receives a, a', b, b' (4 doubles). */
CdStatus cd_profile_local(const CdProfile *profile, double x, double *out);

/* Time-time component of the contravariant metric at x. */
CdStatus cd_profile_g00(const CdProfile *profile, double x, double *out);

/* Torsion scalar at x; equals eta on valid profiles (diagnostic). */
CdStatus cd_profile_sigma0(const CdProfile *profile, double x, double *out);

/* Flattening coordinate y(x) and phase coordinate q(x). */
CdStatus cd_profile_maps(const CdProfile *profile, double x, double *y,
                         double *q);

/* Envelope decay rate and signed wavenumber at energy epsilon. omega = 0
 * marks the flat scattering regime; wavenumber then carries the plane-wave
 * rate instead. */
CdStatus cd_decay_parameter(double epsilon, double mass, double eta,
                            double *omega, double *wavenumber);

/* Interaction-free solution at (t, x) for right-branch constants
 * A = a_re + i a_im, B = b_re + i b_im; subspace is 0 (positive energy) or
 * 1 (negative energy). out receives re_up, im_up, re_dn, im_dn (4 doubles).
 */
CdStatus cd_free_spinor(const CdProfile *profile, double epsilon, double a_re,
                        double a_im, double b_re, double b_im, int subspace,
                        double t, double x, double *out);

/* Probability density of the interaction-free solution at (t, x). */
CdStatus cd_free_density(const CdProfile *profile, double epsilon,
                         double a_re, double a_im, double b_re, double b_im,
                         int subspace, double t, double x, double *out);

/* Closed-form solution of the pseudo-scalar plus pseudo-vector coupling at
 * (t, x) on the chosen branch (+1 or -1). Requires the linear profile and
 * an admissible coupling S0 + W0 = +/- eta / 2. out receives re_up, im_up,
 * re_dn, im_dn (4 doubles). */
CdStatus cd_morse_spinor(const CdProfile *profile, double s0, double w0,
                         double epsilon, int branch, double t, double x,
                         double *out);

/* Probability density of the interacting closed form at (t, x). */
CdStatus cd_morse_density(const CdProfile *profile, double s0, double w0,
                          double epsilon, int branch, double t, double x,
                          double *out);

#ifdef __cplusplus
}
#endif

#endif /* CURVED_DIRAC_H */
