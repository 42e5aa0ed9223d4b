//! Local empirical risk minimization by projected gradient descent.
//!
//! Fixed step 1/L with L = 1 (the gradient Lipschitz bound of the function
//! class), no line search, start at the cube center: the iteration is a
//! pure function of its inputs. Convergence is declared on the projected
//! gradient, so boundary minimizers terminate cleanly.

use crate::cube::DomainCube;
use crate::error::{Error, Result};
use crate::loss::{mean_gradient_into, SampleFunction};

pub const DEFAULT_ERM_TOL: f64 = 1e-6;
pub const ERM_MAX_ITERS: usize = 100_000;

/// Minimize the average of `functions` over `cube` to projected-gradient
/// norm `tol`.
pub fn erm_minimize(functions: &[SampleFunction], cube: DomainCube, tol: f64) -> Result<Vec<f64>> {
    erm_minimize_capped(functions, cube, tol, ERM_MAX_ITERS)
}

pub fn erm_minimize_capped(
    functions: &[SampleFunction],
    cube: DomainCube,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>> {
    assert!(!functions.is_empty(), "ERM needs at least one sample");
    assert!(tol > 0.0);
    let d = cube.dim();
    let mut theta = cube.center();
    let mut grad = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    let mut grad_norm = f64::INFINITY;
    for _ in 0..max_iters {
        mean_gradient_into(functions, &theta, &mut grad, &mut scratch);
        let mut pg_sq = 0.0;
        for j in 0..d {
            let next = (theta[j] - grad[j]).clamp(cube.lo(), cube.hi());
            let pg = theta[j] - next;
            pg_sq += pg * pg;
            theta[j] = next;
        }
        grad_norm = pg_sq.sqrt();
        if grad_norm <= tol {
            return Ok(theta);
        }
    }
    Err(Error::ErmNonConvergence { grad_norm, tol, iters: max_iters })
}
