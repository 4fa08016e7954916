//! Worked-example systems and their reference closed forms, shared by the
//! integration tests and the acceptance harness.
#![allow(dead_code)]

use qdekit::{QMatrix, QVector, Quaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GATE_TS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];

pub fn q(s: &str) -> Quaternion {
    s.parse().unwrap()
}

pub fn qm(rows: &[&[&str]]) -> QMatrix {
    QMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|s| q(s)).collect())
            .collect(),
    )
    .unwrap()
}

pub fn qv(v: &[&str]) -> QVector {
    QVector::new(v.iter().map(|s| q(s)).collect())
}

fn e(l: &str, t: f64) -> Quaternion {
    (q(l) * t).exp()
}

fn re(x: f64) -> Quaternion {
    Quaternion::real(x)
}

fn factorial(p: usize) -> f64 {
    (1..=p).map(|k| k as f64).product()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_quat(r: &mut impl Rng, scale: f64) -> Quaternion {
    Quaternion::new(
        r.gen_range(-scale..scale),
        r.gen_range(-scale..scale),
        r.gen_range(-scale..scale),
        r.gen_range(-scale..scale),
    )
}

pub fn rand_qmatrix(r: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> QMatrix {
    QMatrix::new(
        rows,
        cols,
        (0..rows * cols).map(|_| rand_quat(r, scale)).collect(),
    )
    .unwrap()
}

pub fn rand_qvector(r: &mut impl Rng, n: usize, scale: f64) -> QVector {
    QVector::new((0..n).map(|_| rand_quat(r, scale)).collect())
}

/// λ on the diagonal, ones on the superdiagonal.
pub fn ex51(lambda: Quaternion, k: usize) -> QMatrix {
    let mut a = QMatrix::diag(&vec![lambda; k]);
    for i in 0..k - 1 {
        a[(i, i + 1)] = Quaternion::ONE;
    }
    a
}

/// Reference closed form: upper-triangular `t^m/m!` times `exp(λt)`.
pub fn ex51_reference(lambda: Quaternion, k: usize, t: f64) -> QMatrix {
    let el = (lambda * t).exp();
    let mut m = QMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            m[(i, j)] = el * (t.powi((j - i) as i32) / factorial(j - i));
        }
    }
    m
}

pub const EX51_LAMBDA: &str = "0.5+j";
pub const EX51_K: usize = 3;

pub fn ex52() -> QMatrix {
    qm(&[&["i", "1"], &["0", "1+i"]])
}

pub fn ex52_reference(t: f64) -> QMatrix {
    QMatrix::from_rows(vec![
        vec![e("i", t), e("1+i", t)],
        vec![re(0.0), e("1+i", t)],
    ])
    .unwrap()
}

pub fn ex61() -> QMatrix {
    qm(&[&["j", "i"], &["0", "j"]])
}

pub fn ex61_reference(t: f64) -> QMatrix {
    let ej = e("j", t);
    QMatrix::from_rows(vec![vec![ej, q("-0.5k") * ej], vec![re(0.0), ej]]).unwrap()
}

pub fn ex62() -> QMatrix {
    qm(&[&["i", "1"], &["0", "j"]])
}

/// Reference `exp(At)`; its (2,2) entry at `t = 0` is `−i/2`, not `1`.
pub fn ex62_reference_exp(t: f64) -> QMatrix {
    let ei = e("i", t);
    let w = q("-0.25i+0.25j");
    QMatrix::from_rows(vec![
        vec![ei, ei * q("0.5-0.5k") - (q("0.5j") - re(t)) * ei * w],
        vec![re(0.0), q("1+k") * ei * w],
    ])
    .unwrap()
}

pub fn ex63() -> QMatrix {
    qm(&[&["i", "j", "j"], &["k", "1", "k"], &["0", "0", "1"]])
}

pub fn ex63_reference(t: f64) -> QMatrix {
    let a = e("1+i", t);
    let et = t.exp();
    QMatrix::from_rows(vec![
        vec![q("-j"), a, q("0.5+0.5i") * et],
        vec![q("-i"), q("-j") * a, (q("0.5+0.5i") - q("j")) * et],
        vec![re(0.0), re(0.0), q("-0.5-0.5i") * et],
    ])
    .unwrap()
}

/// Reference `exp(At)`; column 3 is off by a constant kernel vector.
pub fn ex63_reference_exp(t: f64) -> QMatrix {
    let alpha = e("1+i", t);
    let beta = alpha * q("0.5j-0.5k");
    let gamma = q("0.5+0.5i+0.5j-0.5k");
    let delta = alpha * q("0.5-0.5i+0.5j-0.5k");
    let et = t.exp();
    QMatrix::from_rows(vec![
        vec![
            q("0.5-0.5i") + q("0.5+0.5i") * alpha,
            q("-0.5j+0.5k") + beta,
            q("j") * gamma + delta - re(et),
        ],
        vec![
            q("0.5j-0.5k") - q("0.5j-0.5k") * alpha,
            q("0.5-0.5i") - q("j") * beta,
            q("i") * gamma - q("j") * delta - q("1-j-k") * et,
        ],
        vec![re(0.0), re(0.0), re(et)],
    ])
    .unwrap()
}

pub fn ex64() -> QMatrix {
    qm(&[&["j", "k", "i"], &["0", "1", "k"], &["0", "0", "1"]])
}

fn ex64_columns(u2: Quaternion, slope2: Quaternion, t: f64) -> QMatrix {
    let mid = QMatrix::from_rows(vec![
        vec![q("-i-j"), q("i"), q("1-i") + q("i") * t],
        vec![re(0.0), q("1-j"), u2 + slope2 * t],
        vec![re(0.0), re(0.0), q("-i-k")],
    ])
    .unwrap();
    &mid * &QMatrix::diag(&[e("i", t), re(t.exp()), re(t.exp())])
}

/// Reference solution matrix, with `1−2i−(i+k)t` in entry (2,3).
pub fn ex64_reference(t: f64) -> QMatrix {
    ex64_columns(q("1-2i"), q("-i-k"), t)
}

/// The same matrix rebuilt from the reference chain `v₂ = (i, 1−j, 0)`,
/// `u = (1−i, −1−2i, −i−k)`: column 3 is `(u + v₂t)eᵗ`.
pub fn ex64_from_chain(t: f64) -> QMatrix {
    ex64_columns(q("-1-2i"), q("1-j"), t)
}

/// Reference `exp(At)`; entry (1,3) at `t = 0` is `(−i−j+k)/2`, not `0`.
pub fn ex64_reference_exp(t: f64) -> QMatrix {
    let alpha = q("-i-j") * e("i", t);
    let et = t.exp();
    QMatrix::from_rows(vec![
        vec![
            alpha * q("0.5i+0.5j"),
            alpha * q("0.25-0.25i+0.25j+0.25k") + q("0.5i+0.5k") * et,
            alpha * q("1+0.5i-0.5j") + (q("0.5i+0.5j-0.5k") - q("0.5+0.5j") * t) * et,
        ],
        vec![re(0.0), re(et), q("k") * (t * et)],
        vec![re(0.0), re(0.0), re(et)],
    ])
    .unwrap()
}

/// `(name, A)` for the six worked systems.
pub fn worked_examples() -> Vec<(&'static str, QMatrix)> {
    vec![
        ("5.1", ex51(q(EX51_LAMBDA), EX51_K)),
        ("5.2", ex52()),
        ("6.1", ex61()),
        ("6.2", ex62()),
        ("6.3", ex63()),
        ("6.4", ex64()),
    ]
}

/// Random system with `|ℜ tr A| ≥ 0.1`, so the Wronskian growth rate is visible.
pub fn rand_growing_system(r: &mut impl Rng, n: usize) -> QMatrix {
    loop {
        let a = rand_qmatrix(r, n, n, 1.0);
        if a.trace().re().abs() >= 0.1 {
            return a;
        }
    }
}
