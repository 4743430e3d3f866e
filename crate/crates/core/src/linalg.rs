//! Dense complex linear solves with a singularity guard.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Ratio of smallest to largest LU pivot below which a system is treated
/// as singular.
const PIVOT_RATIO_TOL: f64 = 1e-13;

/// Solve `a·x = b` by partial-pivoting LU. Fails with
/// [`Error::SingularSystem`] on a (numerically) rank-deficient matrix or if
/// the solution does not satisfy the system to `residual_tol`.
pub(crate) fn solve(
    a: DMatrix<Complex64>,
    b: &DVector<Complex64>,
    residual_tol: f64,
) -> Result<DVector<Complex64>> {
    let lu = a.clone().lu();
    let u = lu.u();
    let pivots = u.diagonal().map(|z| z.norm());
    let largest = pivots.max();
    let smallest = pivots.min();
    if !(largest > 0.0) || smallest / largest < PIVOT_RATIO_TOL {
        return Err(Error::SingularSystem { residual: f64::INFINITY });
    }
    let x = lu.solve(b).ok_or(Error::SingularSystem { residual: f64::INFINITY })?;
    let residual = (&a * &x - b).camax();
    if !(residual <= residual_tol) {
        return Err(Error::SingularSystem { residual });
    }
    Ok(x)
}
