//! The permutation determinant `det_P`, the double determinant and the
//! Wronskian of a quaternion solution matrix.
//!
//! `det_P(A) = Σ_σ ε(σ) ⟨σ₁⟩⋯⟨σ_r⟩` where `σ = σ₁⋯σ_r` is written in cycle
//! normal form: each cycle starts at its largest element and the leading
//! elements decrease. A cycle `(n₁ i₂ … i_s)` contributes the ordered product
//! `a_{n₁i₂} a_{i₂i₃} ⋯ a_{i_s n₁}`, and `ε(σ) = (−1)^{n−r}`.

use std::fmt;

use itertools::Itertools;

use crate::error::{mismatch, Error, Result};
use crate::linalg::{cdet, phi_mat, QMatrix, QVector};
use crate::quat::Quaternion;

/// Largest order for which `det_P` enumerates `S_n`.
pub const ENUMERATION_CAP: usize = 8;

/// Threshold on `ddet` separating right-independent from dependent sets.
pub const INDEPENDENCE_TOL: f64 = 1e-9;

/// Relative bound on the imaginary part of `det_P(A⁺A)`.
const RESIDUE_TOL: f64 = 1e-9;

/// A permutation of `{1, …, n}` in cycle normal form (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleNormalForm {
    pub cycles: Vec<Vec<usize>>,
    pub sign: i8,
}

impl fmt::Display for CycleNormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cycles {
            write!(f, "({})", c.iter().join(" "))?;
        }
        Ok(())
    }
}

/// Decomposes the permutation `i ↦ perm[i-1]` of `{1, …, n}`.
pub fn cycle_normal_form(perm: &[usize]) -> Result<CycleNormalForm> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p == 0 || p > n || std::mem::replace(&mut seen[p - 1], true) {
            return Err(Error::InvalidPermutation(format!(
                "{perm:?} is not a bijection on 1..={n}"
            )));
        }
    }
    let zero_based: Vec<usize> = perm.iter().map(|p| p - 1).collect();
    let cycles: Vec<Vec<usize>> = cycles_0(&zero_based)
        .into_iter()
        .map(|c| c.into_iter().map(|x| x + 1).collect())
        .collect();
    let sign = if (n - cycles.len()).is_multiple_of(2) {
        1
    } else {
        -1
    };
    Ok(CycleNormalForm { cycles, sign })
}

fn cycles_0(perm: &[usize]) -> Vec<Vec<usize>> {
    let n = perm.len();
    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    for start in (0..n).rev() {
        if visited[start] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start] = true;
        let mut x = perm[start];
        while x != start {
            visited[x] = true;
            cycle.push(x);
            x = perm[x];
        }
        cycles.push(cycle);
    }
    cycles
}

/// The ordered product `ε(σ)⟨σ₁⟩⋯⟨σ_r⟩` for one permutation (0-based).
fn term(a: &QMatrix, perm: &[usize]) -> Quaternion {
    let cycles = cycles_0(perm);
    let mut prod = Quaternion::ONE;
    for c in &cycles {
        for (idx, &row) in c.iter().enumerate() {
            let col = c[(idx + 1) % c.len()];
            prod *= a[(row, col)];
        }
    }
    if (perm.len() - cycles.len()).is_multiple_of(2) {
        prod
    } else {
        -prod
    }
}

/// Permutation determinant `det_P(A)` of a square matrix of order `≤ 8`.
pub fn det_p(a: &QMatrix) -> Result<Quaternion> {
    let n = a.ensure_square()?;
    if n > ENUMERATION_CAP {
        return Err(Error::SizeCap {
            size: n,
            cap: ENUMERATION_CAP,
        });
    }
    Ok((0..n).permutations(n).map(|p| term(a, &p)).sum())
}

/// Double determinant `ddet(A) = det_P(A⁺A)` of an `n×m` matrix.
///
/// For `m ≤ 8` this enumerates permutations. Larger `m` uses the identity
/// `ddet(A)² = det φ(A⁺A)`, which is exercised against the enumeration in tests.
pub fn ddet(a: &QMatrix) -> Result<f64> {
    let h = a.dagger().matmul(a)?;
    if h.rows() > ENUMERATION_CAP {
        return ddet_adjoint(a);
    }
    let d = det_p(&h)?;
    let magnitude = (0..h.rows())
        .map(|i| h[(i, i)].re())
        .product::<f64>()
        .max(1.0);
    let residue = d.im_norm();
    if residue > RESIDUE_TOL * magnitude {
        return Err(Error::ImaginaryResidue { residue, magnitude });
    }
    Ok(d.re())
}

/// `ddet(A)` through the complex adjoint: `sqrt(det φ(A⁺A))`.
pub fn ddet_adjoint(a: &QMatrix) -> Result<f64> {
    let h = a.dagger().matmul(a)?;
    let d = cdet(&phi_mat(&h))?;
    let magnitude = (0..h.rows())
        .map(|i| h[(i, i)].re())
        .product::<f64>()
        .powi(2)
        .max(1.0);
    if d.im.abs() > RESIDUE_TOL * magnitude {
        return Err(Error::ImaginaryResidue {
            residue: d.im.abs(),
            magnitude,
        });
    }
    Ok(d.re.max(0.0).sqrt())
}

/// Wronskian `W = ½ ddet(M)` of a square solution matrix.
pub fn wronskian(m: &QMatrix) -> Result<f64> {
    m.ensure_square()?;
    Ok(0.5 * ddet(m)?)
}

/// Right independence of a set of equal-length vectors: `ddet > 1e−9`.
pub fn right_independent(vectors: &[QVector]) -> Result<bool> {
    let Some(first) = vectors.first() else {
        return Ok(true);
    };
    if let Some(bad) = vectors.iter().find(|v| v.len() != first.len()) {
        return Err(mismatch(
            format!("vectors of length {}", first.len()),
            format!("length {}", bad.len()),
        ));
    }
    if vectors.len() > first.len() {
        return Ok(false);
    }
    Ok(ddet(&QMatrix::from_columns(vectors)?)? > INDEPENDENCE_TOL)
}
