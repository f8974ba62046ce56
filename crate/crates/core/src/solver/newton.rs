//! Damped Newton iteration on the flat 4-torus.

use nalgebra::{Matrix4, Vector4};

use crate::residual::{ResidualValue, TorusQuadruple};

/// Largest per-coordinate step, in radians.
const MAX_STEP: f64 = 1.0;
/// Relative singular-value cutoff for the pseudo-inverse fallback.
const PINV_CUTOFF: f64 = 1e-10;
const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iters: usize,
    /// Convergence threshold on the residual norm.
    pub tol: f64,
    /// Stop early once the iterate falls this close to the small diagonal.
    pub diag_abort: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOutcome {
    pub q: TorusQuadruple,
    pub residual: ResidualValue,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `J step = -r`. Uses LU when `J` is comfortably nonsingular and a
/// truncated-SVD minimum-norm step otherwise, so iterates can still land on
/// positive-dimensional solution families.
pub fn newton_step(jac: &Matrix4<f64>, r: &Vector4<f64>) -> Option<Vector4<f64>> {
    let col_scale: f64 = jac.column_iter().map(|c| c.norm()).product();
    let det = jac.determinant();
    if col_scale > 0.0 && det.abs() > 1e-8 * col_scale {
        if let Some(step) = jac.lu().solve(&(-r)) {
            if step.iter().all(|x| x.is_finite()) {
                return Some(step);
            }
        }
    }
    let svd = jac.svd(true, true);
    let smax = svd.singular_values.max();
    if smax.is_nan() || smax <= 0.0 {
        return None;
    }
    let step = svd.solve(&(-r), PINV_CUTOFF * smax).ok()?;
    step.iter().all(|x| x.is_finite()).then_some(step)
}

/// Runs damped Newton from `start`. `system` returns the residual and its
/// Jacobian; the step is halved until the residual norm decreases.
pub fn newton<F>(start: TorusQuadruple, opts: &NewtonOptions, system: F) -> NewtonOutcome
where
    F: Fn(&TorusQuadruple) -> (ResidualValue, Matrix4<f64>),
{
    let mut q = start;
    let (mut res, mut jac) = system(&q);
    let target = opts.tol * 1e-4;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        if res.norm <= target {
            break;
        }
        let Some(mut step) = newton_step(&jac, &res.as_vector()) else {
            break;
        };
        let big = step.amax();
        if big > MAX_STEP {
            step *= MAX_STEP / big;
        }
        iterations += 1;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let s = step * lambda;
            let cand = q.shifted(&[s[0], s[1], s[2], s[3]]);
            let (r, j) = system(&cand);
            if r.norm < res.norm {
                accepted = Some((cand, r, j));
                break;
            }
            lambda *= 0.5;
        }
        let Some((nq, nr, nj)) = accepted else {
            break;
        };
        q = nq;
        res = nr;
        jac = nj;
        if opts.diag_abort > 0.0 && iterations >= 3 && q.diag_distance() < opts.diag_abort {
            break;
        }
    }
    NewtonOutcome { q, residual: res, iterations, converged: res.norm <= opts.tol }
}
