/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef PEGLAB_H
#define PEGLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PegStatus {
  PEG_STATUS_OK = 0,
  PEG_STATUS_NULL_POINTER = 1,
  PEG_STATUS_INVALID_ARGUMENT = 2,
  PEG_STATUS_NOT_EMBEDDED = 3,
  PEG_STATUS_TOPOLOGY = 4,
  PEG_STATUS_IO = 5,
  PEG_STATUS_PANIC = 6,
} PegStatus;

// Opaque curve handle.
typedef struct PegCurve PegCurve;

// Opaque solve report handle.
typedef struct PegReport PegReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *peg_last_error(void);

// Ellipse `a cos t + i b sin t`.
enum PegStatus peg_curve_ellipse(double a, double b, struct PegCurve **out);

// Curve from its JSON form.
enum PegStatus peg_curve_from_json(const char *json, struct PegCurve **out);

// Seeded random perturbation of modes `|k| <= max_mode`.
enum PegStatus peg_curve_perturb(const struct PegCurve *curve,
                                 double amplitude,
                                 size_t max_mode,
                                 uint64_t seed,
                                 struct PegCurve **out);

void peg_curve_free(struct PegCurve *curve);

// Point of the curve at parameter `t`.
enum PegStatus peg_curve_eval(const struct PegCurve *curve, double t, double *re, double *im);

// Sampling embedding check with `samples >= 64` parameter values.
enum PegStatus peg_curve_check_embedded(const struct PegCurve *curve,
                                        size_t samples,
                                        bool *embedded);

// Rectangles with diagonal angle `phi` in `(0, pi/2]`. `right_angle`
// requests the exact square problem and ignores `phi`. `grid = 0` uses the
// default seed density.
enum PegStatus peg_solve_rectangle(const struct PegCurve *curve,
                                   double phi,
                                   bool right_angle,
                                   uint32_t grid,
                                   struct PegReport **out);

// Cyclic quadrilaterals with shape data `(s, t, phi)`.
enum PegStatus peg_solve_quad(const struct PegCurve *curve,
                              double s,
                              double t,
                              double phi,
                              uint32_t grid,
                              struct PegReport **out);

void peg_report_free(struct PegReport *report);

enum PegStatus peg_report_orbit_count(const struct PegReport *report, size_t *out);

enum PegStatus peg_report_signed_total(const struct PegReport *report, int64_t *out);

enum PegStatus peg_report_degenerate(const struct PegReport *report, bool *out);

// Vertices `A, B, C, D` of orbit `index` as `[re, im]` pairs in `out[8]`.
enum PegStatus peg_report_orbit_vertices(const struct PegReport *report, size_t index, double *out);

// Orientation sign shared by the orbit's members; 0 when they disagree.
enum PegStatus peg_report_orbit_sign(const struct PegReport *report, size_t index, int8_t *out);

// Runs the ledger and Euler bookkeeping, attaches the result to the report
// and writes the Euler characteristic. Returns `Topology` if the
// accounting fails; the block is still attached in that case.
enum PegStatus peg_report_topology(struct PegReport *report, int8_t global_sign, int64_t *chi);

// Report as JSON. Release with `peg_string_free`.
enum PegStatus peg_report_to_json(const struct PegReport *report, char **out);

void peg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEGLAB_H */
