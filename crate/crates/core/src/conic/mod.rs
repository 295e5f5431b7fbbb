//! The scalar robust power-loading program and the interior-point solver
//! behind it.

mod program;
mod solver;

pub use program::{
    build_program, build_robust_program, lmi2x2_check, AffineExpr, ConeProgram, Layout, Restriction,
    RotatedCone, GAMMA_RATIO_FLOOR, MU_FLOOR, TOL_S,
};
pub use solver::{solve, ConeSolution, SolveStatus, MAX_ITERS};
