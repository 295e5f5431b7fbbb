use super::polish::ProductProblem;
use super::{channel_modes, clamp_power, Method, ScalarDesign, Transceiver};
use crate::conic::{build_program, solve, ConeSolution, Restriction};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::worstcase::{
    diagonal_mse, kkt_residual, mse, worst_case_error_diagonal, DesignProblem, WorstCaseCertificate,
};

/// Output of the globally optimal robust design.
#[derive(Debug, Clone)]
pub struct RobustDesign {
    pub transceiver: Transceiver,
    /// Worst-case error of the scalar problem lifted to matrix form.
    pub certificate: WorstCaseCertificate,
    pub scalars: ScalarDesign,
    pub solution: ConeSolution,
}

/// Solves one conic program and maps non-optimal exits to errors.
pub fn solve_scalar_program(
    gamma: &[f64],
    problem: &DesignProblem,
    restriction: Restriction,
) -> Result<(Vec<f64>, Vec<f64>, ConeSolution)> {
    let (program, layout) = build_program(gamma, problem.epsilon, problem.noise_var, problem.power, restriction)?;
    let solution = solve(&program);
    if !solution.is_healthy() {
        return Err(Error::Solver {
            status: solution.status,
            iterations: solution.iterations,
        });
    }
    let (mut f, g) = layout.scalars(&solution.primal)?;
    clamp_power(&mut f, problem.power);
    Ok((f, g, solution))
}

/// Globally optimal worst-case design via the joint conic program, refined
/// by Newton steps in the product variables.
pub fn robust_design(problem: &DesignProblem) -> Result<RobustDesign> {
    let (factors, gamma) = channel_modes(problem)?;
    let (mut f, mut g, solution) = solve_scalar_program(&gamma, problem, Restriction::None)?;
    let products = ProductProblem {
        gamma: &gamma,
        epsilon: problem.epsilon,
        noise_var: problem.noise_var,
        power: problem.power,
    };
    let m0: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a * b).collect();
    if let Some(m) = products.polish(&m0) {
        (f, g) = products.split(&m);
    }
    let scalars = ScalarDesign { gamma, f, g };
    let (fm, gm) = scalars.lift(&factors);

    let diag = worst_case_error_diagonal(&scalars.f, &scalars.g, &scalars.gamma, problem.epsilon)?;
    let l = scalars.f.len();
    let u = factors.u.leading_cols(l);
    let v = factors.v.leading_cols(l);
    let x = ComplexMatrix::from_diagonal(l, l, &diag.x);
    let e_star = u.matmul(&x)?.matmul(&v.adjoint())?;
    let certificate = WorstCaseCertificate {
        mse_value: mse(&fm, &gm, &e_star, problem)?,
        kkt_residual: kkt_residual(&fm, &gm, &e_star, diag.omega, problem)?,
        omega: diag.omega,
        hard_case: diag.hard_case,
        e_star,
    };
    debug_assert!({
        let scalar = diagonal_mse(&scalars.f, &scalars.g, &scalars.gamma, &diag.x, problem.noise_var);
        (scalar - certificate.mse_value).abs() <= 1e-8 * scalar.max(1.0)
    });

    let iterations = solution.iterations;
    let transceiver = Transceiver::evaluate(fm, gm, problem, Method::RobustOptimal, iterations)?;
    Ok(RobustDesign {
        transceiver,
        certificate,
        scalars,
        solution,
    })
}
