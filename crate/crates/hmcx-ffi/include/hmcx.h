/* C interface for the hmcx convexity auditor. Generated by cbindgen; do not edit. */

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call. Numeric values match the CLI exit codes: 0 for a
// clean result, 1 when the property under test fails (a violation or a
// reduction mismatch), 2 for invalid input, 3 for a numerical failure
// while evaluating.
typedef enum HmcxStatus {
  HMCX_STATUS_OK = 0,
  HMCX_STATUS_VIOLATED = 1,
  HMCX_STATUS_INVALID = 2,
  HMCX_STATUS_NUMERICAL = 3,
} HmcxStatus;

// Orientation of the membership test: `Convex` checks the defining
// inequality as stated, `Concave` checks it with both sides swapped.
typedef enum HmcxDirection {
  HMCX_DIRECTION_CONVEX = 0,
  HMCX_DIRECTION_CONCAVE = 1,
} HmcxDirection;

// Opaque parsed function of one variable. Create with
// [`hmcx_expr_parse`], release with [`hmcx_expr_free`].
typedef struct HmcxExpr HmcxExpr;

// Opaque kernel (the weight `h` of the convexity class). Create with
// [`hmcx_kernel_parse`], release with [`hmcx_kernel_free`].
typedef struct HmcxKernel HmcxKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse a function of one variable, e.g. `"x^2"` or `"exp(x) - 1"`.
// `variable` names the free variable; pass null for the default `"x"`.
// Returns null on failure (see [`hmcx_last_error`]). Release the result
// with [`hmcx_expr_free`].
//
// # Safety
// `text` must point to a NUL-terminated string; `variable` may be null or
// do the same.
struct HmcxExpr *hmcx_expr_parse(const char *text, const char *variable);

// Evaluate a parsed expression at `x`, writing the value to `out_value`.
//
// # Safety
// `expr` must be a live handle from [`hmcx_expr_parse`]; `out_value` must
// point to writable memory for one `double`.
enum HmcxStatus hmcx_expr_eval(const struct HmcxExpr *expr, double x, double *out_value);

// Release an expression handle. Null is a no-op.
//
// # Safety
// `expr` must be null or a handle from [`hmcx_expr_parse`] that has not
// been freed already.
void hmcx_expr_free(struct HmcxExpr *expr);

// Parse a kernel specification: `"identity"`, `"one"`, `"reciprocal"`,
// `"power:S"`, or `"custom:EXPR"` with `EXPR` a function of `t`. Returns
// null on failure. Release the result with [`hmcx_kernel_free`].
//
// # Safety
// `spec` must point to a NUL-terminated string.
struct HmcxKernel *hmcx_kernel_parse(const char *spec);

// Release a kernel handle. Null is a no-op.
//
// # Safety
// `kernel` must be null or a handle from [`hmcx_kernel_parse`] that has
// not been freed already.
void hmcx_kernel_free(struct HmcxKernel *kernel);

// Search `[0, b_cap]` for a violation of `(h, m)`-convexity of `f`,
// spending at most `budget` evaluations. On `Ok` or `Violated`,
// `*out_json` (when `out_json` is non-null) receives the full report —
// verdict, worst certificate, largest defect seen — as a JSON string to
// release with [`hmcx_string_free`].
//
// # Safety
// `f` and `h` must be live handles; `out_json` must be null or point to
// writable memory for one pointer.
enum HmcxStatus hmcx_check_membership(const struct HmcxExpr *f,
                                      const struct HmcxKernel *h,
                                      double m,
                                      enum HmcxDirection direction,
                                      double b_cap,
                                      uint64_t budget,
                                      uint64_t seed,
                                      char **out_json);

// Evaluate the inequality chain named by `inequality_id` (`"thm4"`,
// `"thm5"`, `"thm8"`, `"m1"`, `"m2"`, `"m3"`, `"s"`, `"q"`, `"p"`, or
// `"h1"`) for `f` under kernel `h` on `[a, b]`. Negative or non-finite
// tolerances are rejected; pass `1e-9` for both to match the CLI
// defaults. On `Ok` or `Violated`, `*out_json` receives the term values,
// per-pair verdicts, and overall result as JSON.
//
// # Safety
// `inequality_id` must point to a NUL-terminated string; `f` and `h` must
// be live handles; `out_json` must be null or point to writable memory
// for one pointer.
enum HmcxStatus hmcx_audit(const char *inequality_id,
                           const struct HmcxExpr *f,
                           const struct HmcxKernel *h,
                           double m,
                           double a,
                           double b,
                           double tol_abs,
                           double tol_rel,
                           char **out_json);

// Verify the specialization case named by `case_id` (e.g. `"thm4-to-m1"`)
// on `f` over `[a, b]`. `s` supplies the exponent for cases that need
// one — pass NaN otherwise; `h` supplies the kernel for cases that take a
// caller-chosen one — pass null otherwise. On `Ok` or `Violated`,
// `*out_json` receives both evaluated chains and the per-pair comparison
// as JSON. `Violated` here means the chains did not match.
//
// # Safety
// `case_id` must point to a NUL-terminated string; `f` must be a live
// handle; `h` must be null or a live handle; `out_json` must be null or
// point to writable memory for one pointer.
enum HmcxStatus hmcx_reduce(const char *case_id,
                            const struct HmcxExpr *f,
                            double m,
                            double a,
                            double b,
                            double s,
                            const struct HmcxKernel *h,
                            char **out_json);

// Message for the most recent failure on this thread, or null if the last
// call succeeded. The pointer is valid until the next library call on the
// same thread; do not free it.
const char *hmcx_last_error(void);

// Release a string returned through an `out_json` parameter. Null is a
// no-op.
//
// # Safety
// `text` must be null or a string obtained from this library that has not
// been freed already.
void hmcx_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
