//! Damped least-squares (Levenberg–Marquardt) minimizer.
//!
//! Minimizes ½‖r(p)‖² for a residual vector r: ℝⁿ → ℝᵐ with a user-supplied
//! Jacobian. Damping follows Marquardt: the normal matrix JᵀJ is augmented
//! by μ·diag(JᵀJ), with μ shrunk after accepted steps and grown after
//! rejected ones. Rows of the Jacobian are scanned for non-zeros so that
//! block-sparse problems (global fits) stay cheap.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A least-squares problem with analytic Jacobian.
pub trait LeastSquaresProblem {
    fn n_residuals(&self) -> usize;
    fn n_params(&self) -> usize;
    /// Writes r(params) into `out` (length `n_residuals`).
    fn residuals(&self, params: &[f64], out: &mut [f64]);
    /// Writes ∂rᵢ/∂pⱼ into `out[i * n_params + j]`.
    fn jacobian(&self, params: &[f64], out: &mut [f64]);
    /// Adjusts a trial point before it is evaluated. No-op by default.
    fn constrain(&self, _current: &[f64], _trial: &mut [f64]) {}
}

/// For parameters entering the model only through their square, a step that
/// crosses zero is replaced by halving toward zero. Gauss–Newton otherwise
/// oscillates across zero when the optimum sits on the boundary.
pub fn halve_sign_changes(indices: impl IntoIterator<Item = usize>, current: &[f64], trial: &mut [f64]) {
    for i in indices {
        if trial[i] * current[i] < 0.0 {
            trial[i] = 0.5 * current[i];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Converged when an accepted step changes the RSS by less than this fraction.
    pub rss_rel_tol: f64,
    /// Converged when the step norm falls below this.
    pub step_tol: f64,
    pub initial_damping: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            rss_rel_tol: 1e-10,
            step_tol: 1e-12,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
}

/// Runs Levenberg–Marquardt from `init`.
pub fn minimize<P: LeastSquaresProblem>(problem: &P, init: &[f64], config: &LmConfig) -> Result<LmOutcome> {
    let m = problem.n_residuals();
    let n = problem.n_params();
    assert_eq!(init.len(), n, "parameter vector has the wrong length");
    if m < n {
        return Err(Error::InsufficientData { got: m, need: n });
    }

    let mut params = init.to_vec();
    let mut residuals = vec![0.0; m];
    problem.residuals(&params, &mut residuals);
    let mut rss = sum_squares(&residuals);
    if !rss.is_finite() {
        return Err(Error::IllConditioned);
    }

    let mut jac = vec![0.0; m * n];
    let mut normal = vec![0.0; n * n];
    let mut gradient = vec![0.0; n];
    let mut scratch = vec![0.0; n * n];
    let mut step = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial_residuals = vec![0.0; m];

    problem.jacobian(&params, &mut jac);
    normal_equations(&jac, &residuals, m, n, &mut normal, &mut gradient);

    let mut damping = config.initial_damping;
    for iteration in 1..=config.max_iterations {
        if rss == 0.0 {
            return Ok(LmOutcome { params, rss, iterations: iteration - 1 });
        }
        let max_diag = (0..n).map(|i| normal[i * n + i]).fold(0.0, f64::max);
        if !(max_diag > 0.0) || !max_diag.is_finite() {
            return Err(Error::IllConditioned);
        }
        let floor = 1e-12 * max_diag;

        scratch.copy_from_slice(&normal);
        for i in 0..n {
            scratch[i * n + i] += damping * normal[i * n + i].max(floor);
        }
        for (s, g) in step.iter_mut().zip(&gradient) {
            *s = -g;
        }
        if !cholesky_solve(&mut scratch, &mut step, n) {
            damping *= 10.0;
            if damping > 1e32 {
                return Err(Error::IllConditioned);
            }
            continue;
        }

        let step_norm = libm::sqrt(sum_squares(&step));
        for ((t, p), s) in trial.iter_mut().zip(&params).zip(&step) {
            *t = p + s;
        }
        problem.constrain(&params, &mut trial);
        problem.residuals(&trial, &mut trial_residuals);
        let trial_rss = sum_squares(&trial_residuals);

        if trial_rss.is_finite() && trial_rss < rss {
            let rel_change = (rss - trial_rss) / rss;
            core::mem::swap(&mut params, &mut trial);
            core::mem::swap(&mut residuals, &mut trial_residuals);
            rss = trial_rss;
            if rel_change < config.rss_rel_tol || step_norm < config.step_tol {
                return Ok(LmOutcome { params, rss, iterations: iteration });
            }
            problem.jacobian(&params, &mut jac);
            normal_equations(&jac, &residuals, m, n, &mut normal, &mut gradient);
            damping = (damping / 3.0).max(1e-15);
        } else {
            if step_norm < config.step_tol {
                return Ok(LmOutcome { params, rss, iterations: iteration });
            }
            damping *= 4.0;
            if damping > 1e32 {
                // No descent direction left: stationary point.
                return Ok(LmOutcome { params, rss, iterations: iteration });
            }
        }
    }
    Err(Error::NotConverged { iterations: config.max_iterations })
}

/// Parameter covariance s²·(JᵀJ)⁻¹ with s² = rss/(m − n).
///
/// A singular normal matrix is regularized with a ridge of 1e-12·max diag so
/// that poorly determined parameters report large, finite uncertainties.
pub fn covariance(jac: &[f64], m: usize, n: usize, rss: f64) -> Result<Vec<f64>> {
    let mut normal = vec![0.0; n * n];
    let zeros = vec![0.0; m];
    let mut gradient = vec![0.0; n];
    normal_equations(jac, &zeros, m, n, &mut normal, &mut gradient);
    let max_diag = (0..n).map(|i| normal[i * n + i]).fold(0.0, f64::max);
    if !(max_diag > 0.0) || !max_diag.is_finite() {
        return Err(Error::IllConditioned);
    }

    let dof = if m > n { (m - n) as f64 } else { 1.0 };
    let s2 = rss / dof;
    let mut ridge = 0.0;
    for _ in 0..4 {
        let mut factor = normal.clone();
        for i in 0..n {
            factor[i * n + i] += ridge;
        }
        if cholesky_factor(&mut factor, n) {
            let mut cov = vec![0.0; n * n];
            let mut column = vec![0.0; n];
            for j in 0..n {
                column.iter_mut().for_each(|c| *c = 0.0);
                column[j] = 1.0;
                cholesky_substitute(&factor, &mut column, n);
                for i in 0..n {
                    cov[i * n + j] = column[i] * s2;
                }
            }
            return Ok(cov);
        }
        ridge = if ridge == 0.0 { 1e-12 * max_diag } else { ridge * 1e3 };
    }
    Err(Error::IllConditioned)
}

fn sum_squares(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn normal_equations(jac: &[f64], residuals: &[f64], m: usize, n: usize, normal: &mut [f64], gradient: &mut [f64]) {
    normal.iter_mut().for_each(|x| *x = 0.0);
    gradient.iter_mut().for_each(|x| *x = 0.0);
    let mut nz: Vec<(usize, f64)> = Vec::with_capacity(n);
    for i in 0..m {
        let row = &jac[i * n..(i + 1) * n];
        nz.clear();
        nz.extend(row.iter().copied().enumerate().filter(|(_, v)| *v != 0.0));
        let r = residuals[i];
        for (a, &(ja, va)) in nz.iter().enumerate() {
            gradient[ja] += va * r;
            for &(jb, vb) in &nz[a..] {
                normal[ja * n + jb] += va * vb;
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            normal[a * n + b] = normal[b * n + a];
        }
    }
}

/// In-place lower Cholesky factor of an n×n SPD matrix. Returns false if the
/// matrix is not positive definite.
fn cholesky_factor(a: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = libm::sqrt(d);
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    true
}

fn cholesky_substitute(l: &[f64], b: &mut [f64], n: usize) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    if !cholesky_factor(a, n) {
        return false;
    }
    cholesky_substitute(a, b, n);
    b.iter().all(|x| x.is_finite())
}

/// Central finite-difference Jacobian, for checking analytic Jacobians.
pub fn finite_difference_jacobian<P: LeastSquaresProblem>(problem: &P, params: &[f64], rel_step: f64) -> Vec<f64> {
    let m = problem.n_residuals();
    let n = problem.n_params();
    let mut jac = vec![0.0; m * n];
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    let mut p = params.to_vec();
    for j in 0..n {
        let h = rel_step * params[j].abs().max(1.0);
        p[j] = params[j] + h;
        problem.residuals(&p, &mut plus);
        p[j] = params[j] - h;
        problem.residuals(&p, &mut minus);
        p[j] = params[j];
        for i in 0..m {
            jac[i * n + j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}
