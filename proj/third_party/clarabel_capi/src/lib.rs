//! Minimal C ABI over the Clarabel interior-point solver.
//!
//! Problem form: minimize 1/2 x'Px + q'x subject to Ax + s = b, s in K,
//! with K a product of zero, nonnegative, second-order and PSD-triangle
//! cones listed in order.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use std::slice;

pub const CONE_ZERO: i32 = 0;
pub const CONE_NONNEG: i32 = 1;
pub const CONE_SOC: i32 = 2;
pub const CONE_PSD_TRIANGLE: i32 = 3;

#[repr(C)]
pub struct CscView {
    pub m: usize,
    pub n: usize,
    pub colptr: *const usize,
    pub rowval: *const usize,
    pub nzval: *const f64,
}

#[repr(C)]
pub struct CapiSettings {
    pub max_iter: u32,
    pub time_limit: f64,
    pub verbose: i32,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub tol_feas: f64,
    pub use_faer: i32,
    pub chordal: i32,
}

#[repr(C)]
pub struct CapiResult {
    pub status: i32,
    pub iterations: u32,
    pub solve_time: f64,
    pub obj_primal: f64,
    pub obj_dual: f64,
    pub r_prim: f64,
    pub r_dual: f64,
}

unsafe fn to_csc(v: &CscView) -> CscMatrix<f64> {
    let colptr = slice::from_raw_parts(v.colptr, v.n + 1).to_vec();
    let nnz = colptr[v.n];
    let (rowval, nzval) = if nnz == 0 {
        (Vec::new(), Vec::new())
    } else {
        (
            slice::from_raw_parts(v.rowval, nnz).to_vec(),
            slice::from_raw_parts(v.nzval, nnz).to_vec(),
        )
    };
    CscMatrix::new(v.m, v.n, colptr, rowval, nzval)
}

fn status_code(s: SolverStatus) -> i32 {
    match s {
        SolverStatus::Unsolved => 0,
        SolverStatus::Solved => 1,
        SolverStatus::PrimalInfeasible => 2,
        SolverStatus::DualInfeasible => 3,
        SolverStatus::AlmostSolved => 4,
        SolverStatus::AlmostPrimalInfeasible => 5,
        SolverStatus::AlmostDualInfeasible => 6,
        SolverStatus::MaxIterations => 7,
        SolverStatus::MaxTime => 8,
        SolverStatus::NumericalError => 9,
        SolverStatus::InsufficientProgress => 10,
        _ => 11,
    }
}

/// Returns 0 on success (the result struct is filled in), negative on
/// malformed input (-1 bad cone type, -2 solver setup rejected the data).
#[no_mangle]
pub unsafe extern "C" fn clarabel_capi_solve(
    p: *const CscView,
    q: *const f64,
    a: *const CscView,
    b: *const f64,
    n_cones: usize,
    cone_types: *const i32,
    cone_dims: *const usize,
    settings: *const CapiSettings,
    x_out: *mut f64,
    z_out: *mut f64,
    s_out: *mut f64,
    result: *mut CapiResult,
) -> i32 {
    let p = to_csc(&*p);
    let a = to_csc(&*a);
    let n = a.n;
    let m = a.m;
    let q = slice::from_raw_parts(q, n);
    let b = slice::from_raw_parts(b, m);
    let types = slice::from_raw_parts(cone_types, n_cones);
    let dims = slice::from_raw_parts(cone_dims, n_cones);

    let mut cones = Vec::with_capacity(n_cones);
    for (t, d) in types.iter().zip(dims.iter()) {
        cones.push(match *t {
            CONE_ZERO => SupportedConeT::ZeroConeT(*d),
            CONE_NONNEG => SupportedConeT::NonnegativeConeT(*d),
            CONE_SOC => SupportedConeT::SecondOrderConeT(*d),
            CONE_PSD_TRIANGLE => SupportedConeT::PSDTriangleConeT(*d),
            _ => return -1,
        });
    }

    let cs = &*settings;
    let mut st = DefaultSettings::<f64>::default();
    st.max_iter = cs.max_iter;
    st.time_limit = cs.time_limit;
    st.verbose = cs.verbose != 0;
    st.tol_gap_abs = cs.tol_gap_abs;
    st.tol_gap_rel = cs.tol_gap_rel;
    st.tol_feas = cs.tol_feas;
    st.chordal_decomposition_enable = cs.chordal != 0;
    st.direct_solve_method = if cs.use_faer != 0 { "faer".into() } else { "qdldl".into() };
    st.max_threads = 1;

    let mut solver = match DefaultSolver::new(&p, q, &a, b, &cones, st) {
        Ok(s) => s,
        Err(_) => return -2,
    };
    solver.solve();
    let sol = &solver.solution;
    slice::from_raw_parts_mut(x_out, n).copy_from_slice(&sol.x);
    slice::from_raw_parts_mut(z_out, m).copy_from_slice(&sol.z);
    slice::from_raw_parts_mut(s_out, m).copy_from_slice(&sol.s);
    let r = &mut *result;
    r.status = status_code(sol.status);
    r.iterations = sol.iterations;
    r.solve_time = sol.solve_time;
    r.obj_primal = sol.obj_val;
    r.obj_dual = sol.obj_val_dual;
    r.r_prim = sol.r_prim;
    r.r_dual = sol.r_dual;
    0
}
