//! Damped Newton iteration with dense linear solves.

use super::{JacobianMode, SolverConfig};
use crate::tableau::{Matrix, Vector};
use crate::{Error, Result};

const MAX_HALVINGS: usize = 8;

pub trait NewtonProblem {
    fn residual(&mut self, x: &Vector) -> Vector;

    /// Analytic Jacobian of the residual, `None` to use differences.
    fn jacobian(&mut self, _x: &Vector) -> Option<Matrix> {
        None
    }
}

fn fd_jacobian<P: NewtonProblem + ?Sized>(p: &mut P, x: &Vector, scale: f64) -> Matrix {
    let n = x.len();
    let mut xs = x.clone();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let d = scale * (1.0 + x[j].abs());
        xs[j] = x[j] + d;
        let up = p.residual(&xs);
        xs[j] = x[j] - d;
        let down = p.residual(&xs);
        xs[j] = x[j];
        cols.push((up - down) / (2.0 * d));
    }
    Matrix::from_columns(&cols)
}

/// Solves `R(x) = 0` from `guess` until `|R(x)| <= abs_tol + rel_tol |x|`
/// in the max norm. Returns the root and the number of iterations.
pub fn newton_solve<P: NewtonProblem + ?Sized>(p: &mut P, guess: Vector, cfg: &SolverConfig) -> Result<(Vector, usize)> {
    let mut x = guess;
    let mut r = p.residual(&x);
    for iter in 0..cfg.max_iters {
        let norm = r.amax();
        if norm <= cfg.tolerance(x.amax()) {
            return Ok((x, iter));
        }
        let j = match cfg.jacobian_mode {
            JacobianMode::Analytic => match p.jacobian(&x) {
                Some(j) => j,
                None => fd_jacobian(p, &x, cfg.fd_step_scale),
            },
            JacobianMode::FiniteDifference => fd_jacobian(p, &x, cfg.fd_step_scale),
        };
        let d = j
            .lu()
            .solve(&-&r)
            .filter(|d| d.iter().all(|v| v.is_finite()))
            .ok_or(Error::SingularJacobian { iters: iter + 1 })?;
        let mut alpha = 1.0;
        let (mut xn, mut rn);
        let mut halvings = 0;
        loop {
            xn = &x + &d * alpha;
            rn = p.residual(&xn);
            if rn.amax() < norm || halvings == MAX_HALVINGS {
                break;
            }
            alpha *= 0.5;
            halvings += 1;
        }
        // A full step below rounding level cannot improve the iterate.
        let negligible = halvings == 0 && d.amax() <= 4.0 * f64::EPSILON * (1.0 + xn.amax());
        x = xn;
        r = rn;
        if negligible {
            return Ok((x, iter + 1));
        }
    }
    let norm = r.amax();
    if norm <= cfg.tolerance(x.amax()) {
        Ok((x, cfg.max_iters))
    } else {
        Err(Error::NewtonDiverged {
            iters: cfg.max_iters,
            residual: norm,
        })
    }
}

struct FnProblem<R, J> {
    residual: R,
    jacobian: Option<J>,
}

impl<R, J> NewtonProblem for FnProblem<R, J>
where
    R: FnMut(&Vector) -> Vector,
    J: FnMut(&Vector) -> Matrix,
{
    fn residual(&mut self, x: &Vector) -> Vector {
        (self.residual)(x)
    }

    fn jacobian(&mut self, x: &Vector) -> Option<Matrix> {
        self.jacobian.as_mut().map(|j| j(x))
    }
}

/// [`newton_solve`] for closures; `jacobian = None` uses differences.
pub fn newton_solve_fn<R, J>(residual: R, jacobian: Option<J>, guess: Vector, cfg: &SolverConfig) -> Result<(Vector, usize)>
where
    R: FnMut(&Vector) -> Vector,
    J: FnMut(&Vector) -> Matrix,
{
    newton_solve(&mut FnProblem { residual, jacobian }, guess, cfg)
}
