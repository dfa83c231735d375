// C declarations for the Clarabel shim in src/lib.rs. Keep the struct
// layouts in sync with the #[repr(C)] definitions there.
#ifndef CLARABEL_CAPI_H_
#define CLARABEL_CAPI_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  CLARABEL_CAPI_CONE_ZERO = 0,
  CLARABEL_CAPI_CONE_NONNEG = 1,
  CLARABEL_CAPI_CONE_SOC = 2,
  CLARABEL_CAPI_CONE_PSD_TRIANGLE = 3,
};

enum {
  CLARABEL_CAPI_UNSOLVED = 0,
  CLARABEL_CAPI_SOLVED = 1,
  CLARABEL_CAPI_PRIMAL_INFEASIBLE = 2,
  CLARABEL_CAPI_DUAL_INFEASIBLE = 3,
  CLARABEL_CAPI_ALMOST_SOLVED = 4,
  CLARABEL_CAPI_ALMOST_PRIMAL_INFEASIBLE = 5,
  CLARABEL_CAPI_ALMOST_DUAL_INFEASIBLE = 6,
  CLARABEL_CAPI_MAX_ITERATIONS = 7,
  CLARABEL_CAPI_MAX_TIME = 8,
  CLARABEL_CAPI_NUMERICAL_ERROR = 9,
  CLARABEL_CAPI_INSUFFICIENT_PROGRESS = 10,
};

typedef struct {
  size_t m;
  size_t n;
  const size_t* colptr;
  const size_t* rowval;
  const double* nzval;
} clarabel_capi_csc;

typedef struct {
  uint32_t max_iter;
  double time_limit;
  int32_t verbose;
  double tol_gap_abs;
  double tol_gap_rel;
  double tol_feas;
  int32_t use_faer;
  int32_t chordal;
} clarabel_capi_settings;

typedef struct {
  int32_t status;
  uint32_t iterations;
  double solve_time;
  double obj_primal;
  double obj_dual;
  double r_prim;
  double r_dual;
} clarabel_capi_result;

int32_t clarabel_capi_solve(const clarabel_capi_csc* p, const double* q,
                            const clarabel_capi_csc* a, const double* b,
                            size_t n_cones, const int32_t* cone_types,
                            const size_t* cone_dims,
                            const clarabel_capi_settings* settings,
                            double* x_out, double* z_out, double* s_out,
                            clarabel_capi_result* result);

#ifdef __cplusplus
}
#endif

#endif  // CLARABEL_CAPI_H_
