//! Linear systems `ẋ = A x` over ℍⁿ: fundamental matrices, `exp(At)`,
//! initial value problems, diagonal time-varying systems and the Wronskian
//! growth check.
//!
//! Solution columns have the form `(Σ_p v_p t^p/p!) e^{λt}`. The exponential
//! sits on the right of the vector and constants of superposition multiply on
//! the right as well; placing either on the left does not give a solution.

use crate::error::{mismatch, Error, Result};
use crate::linalg::{q_inverse, QMatrix, QVector};
use crate::oracle::fd_residual;
use crate::pdet::{ddet, wronskian, INDEPENDENCE_TOL};
use crate::quat::Quaternion;
use crate::spectra::full_spectrum;

/// Commutator and nilpotency bound for [`commuting_split_exp`].
pub const SPLIT_TOL: f64 = 1e-10;
/// Default relative term cutoff for [`exp_series`].
pub const SERIES_TOL: f64 = 1e-16;

const MAX_SERIES_TERMS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub power: usize,
    pub vector: QVector,
}

/// One quasi-polynomial solution `(Σ vector_p t^p / p!) · e^{λt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisColumn {
    pub exponent: Quaternion,
    pub terms: Vec<Term>,
}

impl BasisColumn {
    pub fn eval(&self, n: usize, t: f64) -> QVector {
        let mut poly = QVector::zeros(n);
        for term in &self.terms {
            let c = t.powi(term.power as i32) / factorial(term.power);
            poly = &poly + &term.vector.scale(c);
        }
        poly.mul_right((self.exponent * t).exp())
    }
}

/// A symbolic fundamental matrix, one quasi-polynomial per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionBasis {
    pub columns: Vec<BasisColumn>,
}

impl SolutionBasis {
    /// Builds a basis, checking that every coefficient vector has the same length.
    pub fn new(columns: Vec<BasisColumn>) -> Result<Self> {
        let n = columns
            .iter()
            .flat_map(|c| c.terms.first())
            .map(|t| t.vector.len())
            .next()
            .unwrap_or(columns.len());
        for c in &columns {
            if let Some(bad) = c.terms.iter().find(|t| t.vector.len() != n) {
                return Err(mismatch(
                    format!("vectors of length {n}"),
                    format!("length {}", bad.vector.len()),
                ));
            }
        }
        Ok(Self { columns })
    }

    /// Length of the column vectors.
    pub fn dim(&self) -> usize {
        self.columns
            .iter()
            .flat_map(|c| c.terms.first())
            .map(|t| t.vector.len())
            .next()
            .unwrap_or(self.columns.len())
    }

    pub fn eval_column(&self, i: usize, t: f64) -> QVector {
        self.columns[i].eval(self.dim(), t)
    }

    /// The matrix `M(t)` whose columns are the evaluated solutions.
    pub fn eval(&self, t: f64) -> QMatrix {
        let n = self.dim();
        let cols: Vec<QVector> = self.columns.iter().map(|c| c.eval(n, t)).collect();
        QMatrix::from_columns(&cols).expect("columns share one length")
    }
}

fn factorial(p: usize) -> f64 {
    (1..=p).map(|k| k as f64).product()
}

/// One column per chain vector: `v_l` contributes `Σ_{m≤l} t^{l−m}/(l−m)! v_m`
/// times `e^{λt}`.
pub fn fundamental_matrix(a: &QMatrix) -> Result<SolutionBasis> {
    let spectrum = full_spectrum(a)?;
    let mut columns = Vec::new();
    for entry in &spectrum.entries {
        for chain in &entry.chains {
            for l in 0..chain.len() {
                let terms = (0..=l)
                    .map(|m| Term {
                        power: l - m,
                        vector: chain[m].clone(),
                    })
                    .collect();
                columns.push(BasisColumn {
                    exponent: entry.eigenvalue,
                    terms,
                });
            }
        }
    }
    SolutionBasis::new(columns)
}

/// A fundamental system with `M(0)⁻¹` cached, so `exp(At) = M(t) M(0)⁻¹` is
/// cheap to evaluate at many times.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub basis: SolutionBasis,
    pub m0_inv: QMatrix,
}

impl Propagator {
    pub fn new(a: &QMatrix) -> Result<Self> {
        Self::from_basis(fundamental_matrix(a)?)
    }

    pub fn from_basis(basis: SolutionBasis) -> Result<Self> {
        let m0 = basis.eval(0.0);
        let m0_inv = q_inverse(&m0).map_err(|_| Error::Degenerate("M(0) is singular".into()))?;
        Ok(Self { basis, m0_inv })
    }

    pub fn exp_at(&self, t: f64) -> QMatrix {
        &self.basis.eval(t) * &self.m0_inv
    }
}

/// `exp(At)` assembled as `M(t) M(0)⁻¹` from the eigen-structure of `A`.
pub fn exp_at(a: &QMatrix, t: f64) -> Result<QMatrix> {
    Ok(Propagator::new(a)?.exp_at(t))
}

/// Taylor series for `exp(At)` with scaling and squaring: `At` is scaled by
/// `2^{−k}` to norm `≤ ½`, summed until a term drops below `tol` times the
/// partial sum, then squared `k` times.
pub fn exp_series(a: &QMatrix, t: f64, tol: f64) -> Result<QMatrix> {
    let n = a.ensure_square()?;
    let at = a.scale(t);
    let norm = at.norm();
    let k = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = at.scale(0.5f64.powi(k));
    let mut sum = QMatrix::identity(n);
    let mut term = QMatrix::identity(n);
    for s in 1..MAX_SERIES_TERMS {
        term = (&term * &b).scale(1.0 / s as f64);
        sum = &sum + &term;
        if term.norm() <= tol * sum.norm() {
            break;
        }
    }
    for _ in 0..k {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// `exp((D+N)t) = exp(Dt) · Σ_{s<n} (Nt)^s/s!` for commuting `D` and nilpotent `N`.
pub fn commuting_split_exp(d: &QMatrix, nil: &QMatrix, t: f64) -> Result<QMatrix> {
    let n = d.ensure_square()?;
    if nil.rows() != n || nil.cols() != n {
        return Err(mismatch(
            format!("{n}x{n}"),
            format!("{}x{}", nil.rows(), nil.cols()),
        ));
    }
    let comm = (&(d * nil) - &(nil * d)).norm();
    if comm > SPLIT_TOL {
        return Err(Error::NonCommuting(comm));
    }
    let top = nil.pow(n)?.norm();
    if top > SPLIT_TOL {
        return Err(Error::NotNilpotent(top));
    }
    let exp_d = if d.is_diagonal(0.0) {
        QMatrix::diag(&(0..n).map(|i| (d[(i, i)] * t).exp()).collect::<Vec<_>>())
    } else {
        exp_series(d, t, SERIES_TOL)?
    };
    let nt = nil.scale(t);
    let mut series = QMatrix::identity(n);
    let mut power = QMatrix::identity(n);
    for s in 1..n {
        power = (&power * &nt).scale(1.0 / s as f64);
        series = &series + &power;
    }
    Ok(&exp_d * &series)
}

/// `x(t) = exp(A(t − t₀)) x⁰`.
pub fn solve_ivp(a: &QMatrix, t0: f64, x0: &QVector, t: f64) -> Result<QVector> {
    let n = a.ensure_square()?;
    if x0.len() != n {
        return Err(mismatch(
            format!("x0 of length {n}"),
            format!("length {}", x0.len()),
        ));
    }
    exp_at(a, t - t0)?.mat_vec(x0)
}

/// Polynomial `Σ c_p t^p` with quaternion coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QPoly {
    pub coeffs: Vec<Quaternion>,
}

impl QPoly {
    pub fn new(coeffs: Vec<Quaternion>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: Quaternion) -> Self {
        Self::new(vec![c])
    }

    pub fn eval(&self, t: f64) -> Quaternion {
        self.coeffs
            .iter()
            .rev()
            .fold(Quaternion::ZERO, |acc, c| acc * t + *c)
    }

    /// `∫_{t₀}^{t} p(s) ds` as a polynomial in `t`.
    pub fn integral_from(&self, t0: f64) -> QPoly {
        let mut c = vec![Quaternion::ZERO];
        c.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(p, q)| *q / (p + 1) as f64),
        );
        let mut out = QPoly::new(c);
        let at_t0 = out.eval(t0);
        out.coeffs[0] -= at_t0;
        out
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return QPoly::default();
        }
        let mut c = vec![Quaternion::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += *a * *b;
            }
        }
        QPoly::new(c)
    }

    /// Largest coefficient of `pq − qp`.
    pub fn commutator_norm(&self, other: &QPoly) -> f64 {
        let (pq, qp) = (self.mul(other), other.mul(self));
        pq.coeffs
            .iter()
            .zip(&qp.coeffs)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }

    fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Solves `ẋᵢ = aᵢ(t) xᵢ` with `xᵢ(t) = exp(∫_{t₀}^{t} aᵢ) xᵢ(t₀)`, after checking
/// that each `aᵢ(t)` commutes with its own integral coefficient by coefficient.
pub fn solve_diagonal(coeffs: &[QPoly], t0: f64, x0: &QVector, t: f64) -> Result<QVector> {
    if coeffs.len() != x0.len() {
        return Err(mismatch(
            format!("{} initial values", coeffs.len()),
            format!("{}", x0.len()),
        ));
    }
    let integrals = check_diagonal(coeffs, t0)?;
    Ok(QVector::new(
        integrals
            .iter()
            .zip(x0.iter())
            .map(|(int, x)| int.eval(t).exp() * *x)
            .collect(),
    ))
}

/// Returns the integrals `∫_{t₀}^{t} aᵢ` once every coefficient passes the
/// commutativity test.
pub fn check_diagonal(coeffs: &[QPoly], t0: f64) -> Result<Vec<QPoly>> {
    coeffs
        .iter()
        .enumerate()
        .map(|(index, a)| {
            let int = a.integral_from(t0);
            let residue = a.commutator_norm(&int);
            let scale = (a.scale() * int.scale()).max(1.0);
            if residue > 1e-12 * scale {
                Err(Error::CommutativityViolation { index, residue })
            } else {
                Ok(int)
            }
        })
        .collect()
}

/// `x(t) = Σ columnᵢ(t) rᵢ`, constants on the right.
#[derive(Debug, Clone)]
pub struct Superposition<'a> {
    basis: &'a SolutionBasis,
    constants: Vec<Quaternion>,
}

impl Superposition<'_> {
    pub fn eval(&self, t: f64) -> QVector {
        let n = self.basis.dim();
        self.basis
            .columns
            .iter()
            .zip(&self.constants)
            .fold(QVector::zeros(n), |acc, (c, r)| {
                &acc + &c.eval(n, t).mul_right(*r)
            })
    }
}

pub fn superpose<'a>(
    basis: &'a SolutionBasis,
    constants: &[Quaternion],
) -> Result<Superposition<'a>> {
    if constants.len() != basis.columns.len() {
        return Err(mismatch(
            format!("{} constants", basis.columns.len()),
            format!("{}", constants.len()),
        ));
    }
    Ok(Superposition {
        basis,
        constants: constants.to_vec(),
    })
}

/// Fit of `ln(W(t)/W(t₀)) ≈ factor · ℜ(tr A) · (t − t₀)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleReport {
    /// `None` when `ℜ(tr A)(t₁ − t₀)` is too small to identify a factor.
    pub factor: Option<f64>,
    /// Largest relative deviation of `W(t)/W(t₀)` from the fitted exponential.
    pub max_rel_err: f64,
    pub re_trace: f64,
    pub samples: Vec<(f64, f64)>,
}

pub const LIOUVILLE_GRID: usize = 21;

pub fn liouville_check(a: &QMatrix, t0: f64, t1: f64) -> Result<LiouvilleReport> {
    a.ensure_square()?;
    let basis = fundamental_matrix(a)?;
    let w0 = wronskian(&basis.eval(t0))?;
    if w0 <= 0.5 * INDEPENDENCE_TOL {
        return Err(Error::Degenerate(format!("W(t0) = {w0:e}")));
    }
    let re_trace = a.trace().re();
    let samples: Vec<(f64, f64)> = (0..LIOUVILLE_GRID)
        .map(|s| {
            let t = t0 + (t1 - t0) * s as f64 / (LIOUVILLE_GRID - 1) as f64;
            wronskian(&basis.eval(t)).map(|w| (t, w / w0))
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = samples.iter().map(|(t, _)| re_trace * (t - t0)).collect();
    let identifiable = xs.iter().any(|x| x.abs() > 1e-9);
    let factor = identifiable.then(|| {
        let sxy: f64 = xs.iter().zip(&samples).map(|(x, (_, r))| x * r.ln()).sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        sxy / sxx
    });
    let c = factor.unwrap_or(0.0);
    let max_rel_err = xs
        .iter()
        .zip(&samples)
        .map(|(x, (_, r))| {
            let model = (c * x).exp();
            (r - model).abs() / model
        })
        .fold(0.0, f64::max);
    Ok(LiouvilleReport {
        factor,
        max_rel_err,
        re_trace,
        samples,
    })
}

/// Numbers behind the fundamental-matrix acceptance gates.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisGates {
    pub ddet_at_zero: f64,
    pub ode_residual: f64,
    pub exp_zero_err: f64,
}

/// Evaluates `ddet(M(0))`, the finite-difference ODE residual over `ts` and
/// `‖M(0)M(0)⁻¹ − I‖` for a candidate basis of `ẋ = Ax`.
pub fn basis_gates(a: &QMatrix, basis: &SolutionBasis, ts: &[f64]) -> Result<BasisGates> {
    let n = a.ensure_square()?;
    if basis.dim() != n || basis.columns.len() != n {
        return Err(mismatch(
            format!("{n} columns of length {n}"),
            format!("{} of length {}", basis.columns.len(), basis.dim()),
        ));
    }
    let ddet_at_zero = ddet(&basis.eval(0.0))?;
    let ode_residual = fd_residual(|t| basis.eval(t), a, ts);
    let exp_zero_err = match Propagator::from_basis(basis.clone()) {
        Ok(p) => (&p.exp_at(0.0) - &QMatrix::identity(n)).norm(),
        Err(_) => f64::INFINITY,
    };
    Ok(BasisGates {
        ddet_at_zero,
        ode_residual,
        exp_zero_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::rk4_integrate;
    use crate::testutil::*;

    fn q(s: &str) -> Quaternion {
        s.parse().unwrap()
    }

    fn qm(rows: &[&[&str]]) -> QMatrix {
        QMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| q(s)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn qv(v: &[&str]) -> QVector {
        QVector::new(v.iter().map(|s| q(s)).collect())
    }

    fn grid() -> Vec<f64> {
        (0..10).map(|s| s as f64 / 9.0).collect()
    }

    fn jordan(lam: Quaternion, k: usize) -> QMatrix {
        let mut a = QMatrix::diag(&vec![lam; k]);
        for i in 0..k - 1 {
            a[(i, i + 1)] = Quaternion::ONE;
        }
        a
    }

    #[test]
    fn ex52_basis() {
        let a = qm(&[&["i", "1"], &["0", "1+i"]]);
        let b = fundamental_matrix(&a).unwrap();
        assert_eq!(b.columns.len(), 2);
        assert!(b.columns[0].exponent.approx_eq(q("i"), 1e-10));
        assert!(b.columns[0].terms[0]
            .vector
            .approx_eq(&qv(&["1", "0"]), 1e-10));
        assert!(b.columns[1].exponent.approx_eq(q("1+i"), 1e-10));
        assert!(b.columns[1].terms[0]
            .vector
            .approx_eq(&qv(&["1", "1"]), 1e-10));
        let g = basis_gates(&a, &b, &grid()).unwrap();
        assert!(g.ddet_at_zero > 1e-6 && g.ode_residual <= 1e-6 && g.exp_zero_err <= 1e-10);
    }

    #[test]
    fn ex61_basis_and_reference_matrix() {
        let a = qm(&[&["j", "i"], &["0", "j"]]);
        let b = fundamental_matrix(&a).unwrap();
        let g = basis_gates(&a, &b, &grid()).unwrap();
        assert!(g.ddet_at_zero > 1e-6 && g.ode_residual <= 1e-6 && g.exp_zero_err <= 1e-10);
        let reference = |t: f64| {
            let e = (Quaternion::J * t).exp();
            QMatrix::from_rows(vec![vec![e, q("-0.5k") * e], vec![Quaternion::ZERO, e]]).unwrap()
        };
        assert!(fd_residual(reference, &a, &grid()) <= 1e-6);
    }

    #[test]
    fn zero_matrix_basis_is_constant() {
        let b = fundamental_matrix(&QMatrix::zeros(3, 3)).unwrap();
        for t in [0.0, 1.0, 7.5] {
            assert!(b.eval(t).approx_eq(&QMatrix::identity(3), 0.0));
        }
        assert_eq!(
            exp_at(&QMatrix::zeros(3, 3), 5.0).unwrap(),
            QMatrix::identity(3)
        );
    }

    #[test]
    fn exp_at_diagonal() {
        let d = [q("0.5+j"), q("-1+i-k")];
        let e = exp_at(&QMatrix::diag(&d), 0.8).unwrap();
        let want = QMatrix::diag(&[(d[0] * 0.8).exp(), (d[1] * 0.8).exp()]);
        assert!(e.approx_eq(&want, 1e-12));
    }

    #[test]
    fn exp_at_matches_series_on_example_62() {
        let a = qm(&[&["i", "1"], &["0", "j"]]);
        let e = exp_at(&a, 0.5).unwrap();
        let s = exp_series(&a, 0.5, SERIES_TOL).unwrap();
        assert!(e.approx_eq(&s, 1e-8));
        assert!(exp_at(&a, 0.0)
            .unwrap()
            .approx_eq(&QMatrix::identity(2), 1e-10));
    }

    #[test]
    fn exp_at_properties_on_random_systems() {
        let mut r = rng(31);
        for n in 2..=4 {
            for _ in 0..5 {
                let a = rand_qmatrix(&mut r, n, n, 0.5);
                let p = Propagator::new(&a).unwrap();
                assert!(p.exp_at(0.0).approx_eq(&QMatrix::identity(n), 1e-10));
                assert!(fd_residual(|t| p.exp_at(t), &a, &grid()) <= 1e-6);
                let (s, t) = (0.3, 0.45);
                assert!(p
                    .exp_at(s + t)
                    .approx_eq(&(&p.exp_at(s) * &p.exp_at(t)), 1e-7));
                assert!(p
                    .exp_at(0.7)
                    .approx_eq(&exp_series(&a, 0.7, SERIES_TOL).unwrap(), 1e-8));
            }
        }
    }

    #[test]
    fn series_examples() {
        assert_eq!(
            exp_series(&QMatrix::zeros(2, 2), 3.0, SERIES_TOL).unwrap(),
            QMatrix::identity(2)
        );
        let lam = q("0.5+j");
        let t = 1.3;
        for k in 1..=5 {
            let e = exp_series(&jordan(lam, k), t, SERIES_TOL).unwrap();
            let el = (lam * t).exp();
            for i in 0..k {
                for j in 0..k {
                    let want = if j >= i {
                        el * (t.powi((j - i) as i32) / factorial(j - i))
                    } else {
                        Quaternion::ZERO
                    };
                    assert!(e[(i, j)].approx_eq(want, 1e-12), "k={k} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn commuting_split_examples() {
        let lam = q("0.5+j");
        for k in 1..=5 {
            let mut nil = QMatrix::zeros(k, k);
            for i in 0..k - 1 {
                nil[(i, i + 1)] = Quaternion::ONE;
            }
            let d = QMatrix::diag(&vec![lam; k]);
            let split = commuting_split_exp(&d, &nil, 0.9).unwrap();
            let series = exp_series(&jordan(lam, k), 0.9, SERIES_TOL).unwrap();
            assert!(split.approx_eq(&series, 1e-9));
        }
        let d = QMatrix::diag(&[q("i"), q("2-k")]);
        let e = commuting_split_exp(&d, &QMatrix::zeros(2, 2), 0.4).unwrap();
        assert!(e.approx_eq(
            &QMatrix::diag(&[(q("i") * 0.4).exp(), (q("2-k") * 0.4).exp()]),
            1e-15
        ));

        let trap = QMatrix::diag(&[q("i"), q("j")]);
        let nil = qm(&[&["0", "1"], &["0", "0"]]);
        assert!(
            matches!(commuting_split_exp(&trap, &nil, 1.0), Err(Error::NonCommuting(c)) if c > 0.5)
        );
        let not_nil = qm(&[&["1", "0"], &["0", "0"]]);
        assert!(matches!(
            commuting_split_exp(&QMatrix::identity(2), &not_nil, 1.0),
            Err(Error::NotNilpotent(_))
        ));
    }

    #[test]
    fn ivp_examples() {
        let a = qm(&[&["i", "1"], &["0", "1+i"]]);
        let x0 = qv(&["1", "1"]);
        assert!(solve_ivp(&a, 0.3, &x0, 0.3).unwrap().approx_eq(&x0, 1e-10));
        for t in [0.25, 1.0] {
            let x = solve_ivp(&a, 0.0, &x0, t).unwrap();
            assert!(x.approx_eq(&x0.mul_right((q("1+i") * t).exp()), 1e-10));
        }
        let mut r = rng(32);
        for _ in 0..5 {
            let a = rand_qmatrix(&mut r, 3, 3, 1.0);
            let x0 = rand_qvector(&mut r, 3, 1.0);
            let x = solve_ivp(&a, 0.0, &x0, 1.0).unwrap();
            let rk = rk4_integrate(&a, 0.0, &x0, 1.0, 1e-4).unwrap().state;
            assert!(x.approx_eq(&rk, 1e-6));
        }
    }

    #[test]
    fn diagonal_examples() {
        let c = [q("0.2+i"), q("-j")];
        let polys: Vec<QPoly> = c.iter().map(|x| QPoly::constant(*x)).collect();
        let x0 = qv(&["1+k", "2"]);
        let got = solve_diagonal(&polys, 0.0, &x0, 0.7).unwrap();
        let want = exp_at(&QMatrix::diag(&c), 0.7)
            .unwrap()
            .mat_vec(&x0)
            .unwrap();
        assert!(got.approx_eq(&want, 1e-12));

        let a = QPoly::new(vec![q("j"), q("j")]);
        let (t0, t) = (0.2, 1.0);
        let x0 = qv(&["1-i"]);
        let got = solve_diagonal(std::slice::from_ref(&a), t0, &x0, t).unwrap();
        let phase = t + t * t / 2.0 - t0 - t0 * t0 / 2.0;
        assert!(got[0].approx_eq((Quaternion::J * phase).exp() * x0[0], 1e-14));

        let bad = QPoly::new(vec![q("i"), q("j")]);
        let err = solve_diagonal(&[a, bad], 0.0, &qv(&["1", "1"]), 1.0).unwrap_err();
        assert!(matches!(
            err,
            Error::CommutativityViolation { index: 1, .. }
        ));
        assert!(err.to_string().contains("a_1"));
    }

    #[test]
    fn commutator_of_i_plus_jt_is_minus_k_t_squared() {
        let a = QPoly::new(vec![q("i"), q("j")]);
        let int = a.integral_from(0.0);
        let pq = a.mul(&int);
        let qp = int.mul(&a);
        let diff: Vec<Quaternion> = pq
            .coeffs
            .iter()
            .zip(&qp.coeffs)
            .map(|(x, y)| *x - *y)
            .collect();
        assert_eq!(
            diff,
            vec![
                Quaternion::ZERO,
                Quaternion::ZERO,
                -Quaternion::K,
                Quaternion::ZERO
            ]
        );
    }

    #[test]
    fn superposition_examples() {
        let a = qm(&[&["i", "1"], &["0", "j"]]);
        let b = fundamental_matrix(&a).unwrap();
        let zero = superpose(&b, &[Quaternion::ZERO; 2]).unwrap();
        assert_eq!(zero.eval(0.4), QVector::zeros(2));
        let unit = superpose(&b, &[Quaternion::ZERO, Quaternion::ONE]).unwrap();
        assert_eq!(unit.eval(0.4), b.eval_column(1, 0.4));
        assert!(superpose(&b, &[Quaternion::ONE]).is_err());

        let x0 = qv(&["1-j", "0.5k"]);
        let p = Propagator::from_basis(b.clone()).unwrap();
        let r = p.m0_inv.mat_vec(&x0).unwrap();
        let sol = superpose(&b, r.as_slice()).unwrap();
        for t in [0.0, 0.5, 1.0] {
            assert!(sol
                .eval(t)
                .approx_eq(&solve_ivp(&a, 0.0, &x0, t).unwrap(), 1e-10));
        }
    }

    #[test]
    fn constants_must_multiply_on_the_right() {
        let a = qm(&[&["i", "1"], &["0", "j"]]);
        let b = fundamental_matrix(&a).unwrap();
        let r = [q("j"), q("1+k")];
        let right = superpose(&b, &r).unwrap();
        let as_matrix = |x: QVector| QMatrix::from_columns(&[x]).unwrap();
        assert!(fd_residual(|t| as_matrix(right.eval(t)), &a, &grid()) <= 1e-6);
        let left = |t: f64| {
            let v = (0..2).fold(QVector::zeros(2), |acc, i| {
                &acc + &b.eval_column(i, t).mul_left(r[i])
            });
            as_matrix(v)
        };
        assert!(fd_residual(left, &a, &grid()) > 1e-2);
    }

    #[test]
    fn liouville_examples() {
        let rot = qm(&[&["i", "0"], &["0", "j"]]);
        let rep = liouville_check(&rot, 0.0, 1.0).unwrap();
        assert_eq!(rep.factor, None);
        assert!(rep.max_rel_err <= 1e-8);

        // Scalar brute force: W = ½|x|², x = e^{at} ⇒ W(t)/W(0) = e^{2at}.
        for a in [0.7, -1.3] {
            let x = |t: f64| (Quaternion::real(a) * t).exp();
            let measured = ((0.5 * x(1.0).norm_sqr()) / (0.5 * x(0.0).norm_sqr())).ln() / a;
            let rep = liouville_check(&QMatrix::diag(&[Quaternion::real(a)]), 0.0, 1.0).unwrap();
            assert!((rep.factor.unwrap() - measured).abs() < 1e-10);
            assert!((measured - 2.0).abs() < 1e-12);
            assert!(rep.max_rel_err < 1e-10);
        }
        let diag = QMatrix::diag(&[q("0.4"), q("-0.1"), q("1.2")]);
        let rep = liouville_check(&diag, 0.0, 1.0).unwrap();
        assert!((rep.factor.unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn liouville_factor_is_constant_across_random_systems() {
        let mut r = rng(33);
        let mut factors = Vec::new();
        for n in 1..=4 {
            for _ in 0..5 {
                let mut a = rand_qmatrix(&mut r, n, n, 1.0);
                a[(0, 0)] += Quaternion::real(0.5);
                let rep = liouville_check(&a, 0.0, 1.0).unwrap();
                factors.push(rep.factor.unwrap());
                assert!(rep.max_rel_err < 1e-8);
            }
        }
        let (lo, hi) = factors
            .iter()
            .fold((f64::MAX, f64::MIN), |(l, h), f| (l.min(*f), h.max(*f)));
        assert!(hi - lo <= 1e-5, "{factors:?}");
    }

    #[test]
    fn basis_dimension_checks() {
        let col = |len: usize| BasisColumn {
            exponent: Quaternion::ZERO,
            terms: vec![Term {
                power: 0,
                vector: QVector::zeros(len),
            }],
        };
        assert!(SolutionBasis::new(vec![col(2), col(3)]).is_err());
        let b = SolutionBasis::new(vec![col(2), col(2)]).unwrap();
        assert!(basis_gates(&QMatrix::zeros(3, 3), &b, &[0.0]).is_err());
        let g = basis_gates(&QMatrix::zeros(2, 2), &b, &[0.0]).unwrap();
        assert_eq!(g.exp_zero_err, f64::INFINITY);
    }
}
