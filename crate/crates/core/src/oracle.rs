//! Independent numerical ground truth: classical RK4 over ℍⁿ, central
//! finite-difference residuals and a Laplace-expansion determinant.

use crate::error::{mismatch, Error, Result};
use crate::linalg::{QMatrix, QVector};
use crate::quat::Quaternion;

/// Step used by [`fd_residual`].
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationResult {
    pub state: QVector,
    pub steps: usize,
    /// Richardson estimate `|x_h − x_{2h}| / 15` of the global error.
    pub error_estimate: f64,
}

/// Integrates `ẋ = A x` from `t0` to `t1` with fixed step `≈ h`.
pub fn rk4_integrate(
    a: &QMatrix,
    t0: f64,
    x0: &QVector,
    t1: f64,
    h: f64,
) -> Result<IntegrationResult> {
    let n = a.ensure_square()?;
    if x0.len() != n {
        return Err(mismatch(
            format!("x0 of length {n}"),
            format!("length {}", x0.len()),
        ));
    }
    rk4_integrate_with(|_| a.clone(), t0, x0, t1, h)
}

/// Integrates the time-varying system `ẋ = A(t) x`.
pub fn rk4_integrate_with(
    a: impl Fn(f64) -> QMatrix,
    t0: f64,
    x0: &QVector,
    t1: f64,
    h: f64,
) -> Result<IntegrationResult> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::Parse(format!("step size must be positive, got {h}")));
    }
    let steps = ((t1 - t0).abs() / h).round() as usize;
    let fine = run_rk4(&a, t0, x0, t1, steps)?;
    let error_estimate = if steps >= 2 && steps.is_multiple_of(2) {
        let coarse = run_rk4(&a, t0, x0, t1, steps / 2)?;
        (&fine - &coarse).norm() / 15.0
    } else {
        0.0
    };
    Ok(IntegrationResult {
        state: fine,
        steps,
        error_estimate,
    })
}

fn run_rk4(
    a: &impl Fn(f64) -> QMatrix,
    t0: f64,
    x0: &QVector,
    t1: f64,
    steps: usize,
) -> Result<QVector> {
    if steps == 0 {
        return Ok(x0.clone());
    }
    let dt = (t1 - t0) / steps as f64;
    let axpy = |x: &QVector, k: &QVector, s: f64| &k.scale(s) + x;
    let mut x = x0.clone();
    for s in 0..steps {
        let t = t0 + s as f64 * dt;
        let am = a(t + 0.5 * dt);
        let k1 = a(t).mat_vec(&x)?;
        let k2 = am.mat_vec(&axpy(&x, &k1, 0.5 * dt))?;
        let k3 = am.mat_vec(&axpy(&x, &k2, 0.5 * dt))?;
        let k4 = a(t + dt).mat_vec(&axpy(&x, &k3, dt))?;
        let incr = &(&k1 + &k2.scale(2.0)) + &(&k3.scale(2.0) + &k4);
        x = axpy(&x, &incr, dt / 6.0);
    }
    Ok(x)
}

/// `max_t ‖(M(t+h) − M(t−h))/2h − A M(t)‖` with `h = 1e−5`.
pub fn fd_residual(m: impl Fn(f64) -> QMatrix, a: &QMatrix, ts: &[f64]) -> f64 {
    ts.iter()
        .map(|&t| {
            let deriv = (&m(t + FD_STEP) - &m(t - FD_STEP)).scale(0.5 / FD_STEP);
            (&deriv - &(a * &m(t))).norm()
        })
        .fold(0.0, f64::max)
}

/// Classical Laplace expansion, valid only when all entries commute.
pub fn cofactor_det(a: &QMatrix) -> Result<Quaternion> {
    let n = a.ensure_square()?;
    let entries = a.as_slice();
    for (p, x) in entries.iter().enumerate() {
        for (q, y) in entries.iter().enumerate().skip(p + 1) {
            let c = x.commutator(*y).norm();
            if c > 1e-12 * (x.norm() * y.norm()).max(1.0) {
                return Err(Error::NonCommutingEntries(format!(
                    "a[{}][{}] and a[{}][{}] (|commutator| = {c:e})",
                    p / n,
                    p % n,
                    q / n,
                    q % n
                )));
            }
        }
    }
    let rows: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (0..n).collect();
    Ok(laplace(a, &rows, &cols))
}

fn laplace(a: &QMatrix, rows: &[usize], cols: &[usize]) -> Quaternion {
    match cols.len() {
        0 => Quaternion::ONE,
        1 => a[(rows[0], cols[0])],
        _ => {
            let mut acc = Quaternion::ZERO;
            for (k, &c) in cols.iter().enumerate() {
                let minor: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = a[(rows[0], c)] * laplace(a, &rows[1..], &minor);
                if k % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}
