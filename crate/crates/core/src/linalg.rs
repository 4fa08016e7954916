//! Dense quaternion and complex matrices, the complex adjoint embedding, and
//! the elimination routines every solve goes through.
//!
//! Quaternion systems are never eliminated directly. `A = A₁ + A₂ j` is mapped
//! to `φ(A) = [[A₁, A₂], [−conj A₂, conj A₁]]`, solved over ℂ, and pulled back.
//! Vectors use `φ(v₁ + v₂ j) = (v₁; −conj v₂)`, which makes `φ(Av) = φ(A)φ(v)`
//! and `φ(vλ) = φ(v)λ` for complex `λ`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{mismatch, Error, Result};
use crate::quat::Quaternion;

/// Relative rank tolerance used by solves and inversion.
pub const SOLVE_RANK_TOL: f64 = 1e-10;

const CZERO: Complex64 = Complex64::new(0.0, 0.0);
const CONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QVector {
    data: Vec<Quaternion>,
}

impl QVector {
    pub fn new(data: Vec<Quaternion>) -> Self {
        Self { data }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![Quaternion::ZERO; n])
    }

    /// The `i`-th standard basis vector of length `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.data[i] = Quaternion::ONE;
        v
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Quaternion> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Quaternion> {
        self.data.iter()
    }

    /// `sqrt(Σ |vᵢ|²)`.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(α, β) = Σ conj(αᵢ) βᵢ`.
    pub fn inner(&self, other: &QVector) -> Quaternion {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * *b)
            .sum()
    }

    /// Right scalar multiplication `v·q`.
    pub fn mul_right(&self, q: Quaternion) -> QVector {
        QVector::new(self.data.iter().map(|a| *a * q).collect())
    }

    /// Left scalar multiplication `q·v`.
    pub fn mul_left(&self, q: Quaternion) -> QVector {
        QVector::new(self.data.iter().map(|a| q * *a).collect())
    }

    pub fn scale(&self, s: f64) -> QVector {
        QVector::new(self.data.iter().map(|a| *a * s).collect())
    }

    pub fn approx_eq(&self, other: &QVector, tol: f64) -> bool {
        self.len() == other.len() && (self - other).norm() <= tol
    }

    pub fn first_nonzero(&self, tol: f64) -> Option<usize> {
        self.data.iter().position(|q| q.norm() > tol)
    }
}

impl From<Vec<Quaternion>> for QVector {
    fn from(data: Vec<Quaternion>) -> Self {
        Self::new(data)
    }
}

impl Index<usize> for QVector {
    type Output = Quaternion;
    fn index(&self, i: usize) -> &Quaternion {
        &self.data[i]
    }
}

impl IndexMut<usize> for QVector {
    fn index_mut(&mut self, i: usize) -> &mut Quaternion {
        &mut self.data[i]
    }
}

impl Add for &QVector {
    type Output = QVector;
    fn add(self, o: &QVector) -> QVector {
        assert_eq!(self.len(), o.len(), "vector length mismatch");
        QVector::new(
            self.data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        )
    }
}

impl Sub for &QVector {
    type Output = QVector;
    fn sub(self, o: &QVector) -> QVector {
        assert_eq!(self.len(), o.len(), "vector length mismatch");
        QVector::new(
            self.data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| *a - *b)
                .collect(),
        )
    }
}

impl Neg for &QVector {
    type Output = QVector;
    fn neg(self) -> QVector {
        QVector::new(self.data.iter().map(|a| -*a).collect())
    }
}

impl fmt::Display for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, q) in self.data.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match f.precision() {
                Some(p) => write!(f, "{q:.p$}")?,
                None => write!(f, "{q}")?,
            }
        }
        write!(f, ")")
    }
}

/// Row-major dense quaternion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(mismatch(
                format!("{} entries", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(mismatch(
                format!("rows of length {c}"),
                format!("a row of length {}", bad.len()),
            ));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Stacks vectors as the columns of a matrix.
    pub fn from_columns(cols: &[QVector]) -> Result<Self> {
        let n = cols.first().map_or(0, |c| c.len());
        if let Some(bad) = cols.iter().find(|c| c.len() != n) {
            return Err(mismatch(
                format!("columns of length {n}"),
                format!("a column of length {}", bad.len()),
            ));
        }
        let mut m = Self::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn diag(d: &[Quaternion]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, q) in d.iter().enumerate() {
            m[(i, i)] = *q;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Quaternion] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> QVector {
        QVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn columns(&self) -> Vec<QVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Quaternion>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Conjugate transpose `A⁺`.
    pub fn dagger(&self) -> QMatrix {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(mismatch(
                format!("{} rows on the right factor", self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Quaternion::ZERO;
                for l in 0..self.cols {
                    acc += self[(i, l)] * other[(l, j)];
                }
                m[(i, j)] = acc;
            }
        }
        Ok(m)
    }

    pub fn mat_vec(&self, x: &QVector) -> Result<QVector> {
        if self.cols != x.len() {
            return Err(mismatch(
                format!("vector of length {}", self.cols),
                format!("length {}", x.len()),
            ));
        }
        Ok(QVector::new(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| *a * *b).sum())
                .collect(),
        ))
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        self.map(|q| q * s)
    }

    /// Entrywise `A·q` (scalar on the right).
    pub fn mul_right(&self, q: Quaternion) -> QMatrix {
        self.map(|a| a * q)
    }

    pub fn map(&self, f: impl Fn(Quaternion) -> Quaternion) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|q| f(*q)).collect(),
        }
    }

    /// `sqrt(Σ |aᵢⱼ|²)`.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Quaternion {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn approx_eq(&self, other: &QMatrix, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && (self - other).norm() <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].norm() <= tol))
    }

    pub fn pow(&self, p: usize) -> Result<QMatrix> {
        let n = self.ensure_square()?;
        let mut out = QMatrix::identity(n);
        for _ in 0..p {
            out = out.matmul(self)?;
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &QMatrix {
    type Output = QMatrix;
    fn add(self, o: &QMatrix) -> QMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (o.rows, o.cols),
            "matrix shape mismatch"
        );
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

impl Sub for &QMatrix {
    type Output = QMatrix;
    fn sub(self, o: &QMatrix) -> QMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (o.rows, o.cols),
            "matrix shape mismatch"
        );
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

/// Panics on non-conformable shapes; use [`QMatrix::matmul`] for a checked product.
impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, o: &QMatrix) -> QMatrix {
        self.matmul(o).expect("non-conformable matrix product")
    }
}

impl Mul<&QVector> for &QMatrix {
    type Output = QVector;
    fn mul(self, x: &QVector) -> QVector {
        self.mat_vec(x)
            .expect("non-conformable matrix-vector product")
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self
            .data
            .iter()
            .map(|q| match f.precision() {
                Some(p) => format!("{q:.p$}"),
                None => q.to_string(),
            })
            .collect();
        let width = cells.iter().map(|c| c.len()).max().unwrap_or(1);
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, "  ")?;
                }
                write!(f, "{:>width$}", cells[i * self.cols + j])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

pub type CVector = Vec<Complex64>;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(mismatch(
                format!("{} entries", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![CZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = CONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(mismatch("rectangular rows", "ragged rows"));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matmul(&self, o: &CMatrix) -> Result<CMatrix> {
        if self.cols != o.rows {
            return Err(mismatch(
                format!("{} rows", self.cols),
                format!("{} rows", o.rows),
            ));
        }
        let mut m = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == CZERO {
                    continue;
                }
                for j in 0..o.cols {
                    m.data[i * o.cols + j] += a * o[(l, j)];
                }
            }
        }
        Ok(m)
    }

    pub fn mat_vec(&self, x: &[Complex64]) -> Result<CVector> {
        if self.cols != x.len() {
            return Err(mismatch(
                format!("length {}", self.cols),
                format!("length {}", x.len()),
            ));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * x[j]).sum())
            .collect())
    }

    /// `self − λI`.
    pub fn shift(&self, lambda: Complex64) -> CMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= lambda;
        }
        m
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_row_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn pow(&self, p: usize) -> CMatrix {
        let mut out = CMatrix::identity(self.rows);
        for _ in 0..p {
            out = out.matmul(self).expect("square matrix power");
        }
        out
    }

    pub fn approx_eq(&self, o: &CMatrix, tol: f64) -> bool {
        self.rows == o.rows
            && self.cols == o.cols
            && self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                <= tol
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, o: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, o: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, o: &CMatrix) -> CMatrix {
        self.matmul(o).expect("non-conformable complex product")
    }
}

/// Complex adjoint `φ(A) = [[A₁, A₂], [−conj A₂, conj A₁]]` of an `n×m` matrix.
pub fn phi_mat(a: &QMatrix) -> CMatrix {
    let (n, m) = (a.rows(), a.cols());
    let mut c = CMatrix::zeros(2 * n, 2 * m);
    for i in 0..n {
        for j in 0..m {
            let (a1, a2) = a[(i, j)].complex_pair();
            c[(i, j)] = a1;
            c[(i, j + m)] = a2;
            c[(i + n, j)] = -a2.conj();
            c[(i + n, j + m)] = a1.conj();
        }
    }
    c
}

/// Inverse of [`phi_mat`], reading `A₁` and `A₂` from the top block row.
pub fn unphi_mat(c: &CMatrix) -> Result<QMatrix> {
    if !c.rows().is_multiple_of(2) || !c.cols().is_multiple_of(2) {
        return Err(mismatch(
            "even dimensions",
            format!("{}x{}", c.rows(), c.cols()),
        ));
    }
    let (n, m) = (c.rows() / 2, c.cols() / 2);
    let mut a = QMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            a[(i, j)] = Quaternion::from_complex_pair(c[(i, j)], c[(i, j + m)]);
        }
    }
    Ok(a)
}

/// `φ(v₁ + v₂ j) = (v₁; −conj v₂)`.
pub fn phi_vec(v: &QVector) -> CVector {
    let n = v.len();
    let mut c = vec![CZERO; 2 * n];
    for (i, q) in v.iter().enumerate() {
        let (v1, v2) = q.complex_pair();
        c[i] = v1;
        c[i + n] = -v2.conj();
    }
    c
}

/// Inverse of [`phi_vec`].
pub fn unphi_vec(c: &[Complex64]) -> Result<QVector> {
    if !c.len().is_multiple_of(2) {
        return Err(mismatch("even length", c.len()));
    }
    let n = c.len() / 2;
    Ok(QVector::new(
        (0..n)
            .map(|i| Quaternion::from_complex_pair(c[i], -c[i + n].conj()))
            .collect(),
    ))
}

/// The adjoint vector `φ(v)* = (v₂; conj v₁)`.
pub fn phi_vec_star(v: &QVector) -> CVector {
    let n = v.len();
    let mut c = vec![CZERO; 2 * n];
    for (i, q) in v.iter().enumerate() {
        let (v1, v2) = q.complex_pair();
        c[i] = v2;
        c[i + n] = v1.conj();
    }
    c
}

/// The antilinear map `(c₁; c₂) ↦ (−conj c₂; conj c₁)`. It sends `φ(v)` to
/// `φ(v)*`, commutes with every `φ(A)`, and squares to `−1`.
pub fn adjoint_pair(c: &[Complex64]) -> CVector {
    let n = c.len() / 2;
    let mut out = vec![CZERO; c.len()];
    for i in 0..n {
        out[i] = -c[i + n].conj();
        out[i + n] = c[i].conj();
    }
    out
}

pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Result of a row reduction: the reduced matrix and its pivot columns.
#[derive(Debug, Clone)]
pub struct Rref {
    pub reduced: CMatrix,
    pub pivots: Vec<usize>,
}

/// Reduced row echelon form with partial pivoting. Only the first `pivot_cols`
/// columns are eligible as pivots, so an augmented right-hand side rides along.
/// A column is treated as zero when its best pivot is `≤ tol · max-row-norm`.
pub fn rref(m: &CMatrix, pivot_cols: usize, tol: f64) -> Rref {
    let mut scale = 0.0f64;
    for i in 0..m.rows() {
        let r: f64 = (0..pivot_cols).map(|j| m[(i, j)].norm_sqr()).sum();
        scale = scale.max(r.sqrt());
    }
    rref_abs(m, pivot_cols, tol * scale.max(f64::MIN_POSITIVE))
}

/// [`rref`] with an absolute pivot threshold.
pub fn rref_abs(m: &CMatrix, pivot_cols: usize, thresh: f64) -> Rref {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows {
            break;
        }
        let (best, mag) = (r..rows)
            .map(|i| (i, a[(i, c)].norm()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= thresh {
            for i in r..rows {
                a[(i, c)] = CZERO;
            }
            continue;
        }
        if best != r {
            for j in 0..cols {
                let tmp = a[(r, j)];
                a[(r, j)] = a[(best, j)];
                a[(best, j)] = tmp;
            }
        }
        let p = a[(r, c)];
        for j in 0..cols {
            a[(r, j)] /= p;
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = a[(i, c)];
            if f == CZERO {
                continue;
            }
            for j in 0..cols {
                let v = a[(r, j)];
                a[(i, j)] -= f * v;
            }
            a[(i, c)] = CZERO;
        }
        pivots.push(c);
        r += 1;
    }
    Rref { reduced: a, pivots }
}

pub fn rank(m: &CMatrix, tol: f64) -> usize {
    rref(m, m.cols(), tol).pivots.len()
}

/// Rank with pivots below the absolute threshold `thresh` treated as zero.
pub fn rank_abs(m: &CMatrix, thresh: f64) -> usize {
    rref_abs(m, m.cols(), thresh).pivots.len()
}

/// Null-space basis read off the reduced echelon form (one vector per free column).
pub fn null_space(m: &CMatrix, tol: f64) -> Vec<CVector> {
    null_space_from(m, rref(m, m.cols(), tol))
}

/// [`null_space`] with an absolute pivot threshold.
pub fn null_space_abs(m: &CMatrix, thresh: f64) -> Vec<CVector> {
    null_space_from(m, rref_abs(m, m.cols(), thresh))
}

fn null_space_from(m: &CMatrix, red: Rref) -> Vec<CVector> {
    let Rref { reduced, pivots } = red;
    let n = m.cols();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![CZERO; n];
            x[f] = CONE;
            for (r, &p) in pivots.iter().enumerate() {
                x[p] = -reduced[(r, f)];
            }
            x
        })
        .collect()
}

/// Modified Gram–Schmidt with one reorthogonalisation pass; vectors whose
/// residual falls below `tol` times their original norm are dropped.
pub fn orthonormalize(vectors: &[CVector], tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::new();
    for v in vectors {
        let n0 = cnorm(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = cdot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n = cnorm(&w);
        if n > tol * n0 {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Solves `M x = b` by Gaussian elimination with partial pivoting.
pub fn csolve(m: &CMatrix, b: &[Complex64]) -> Result<CVector> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.cols(),
        });
    }
    if b.len() != n {
        return Err(mismatch(
            format!("length {n}"),
            format!("length {}", b.len()),
        ));
    }
    let mut aug = CMatrix::zeros(n, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)];
        }
        aug[(i, n)] = b[i];
    }
    let red = rref(&aug, n, SOLVE_RANK_TOL);
    if red.pivots.len() < n {
        return Err(Error::Singular);
    }
    Ok((0..n).map(|i| red.reduced[(i, n)]).collect())
}

/// Inverts `M` by Gauss–Jordan elimination with partial pivoting.
pub fn cinverse(m: &CMatrix) -> Result<CMatrix> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.cols(),
        });
    }
    let mut aug = CMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)];
        }
        aug[(i, n + i)] = CONE;
    }
    let red = rref(&aug, n, SOLVE_RANK_TOL);
    if red.pivots.len() < n {
        return Err(Error::Singular);
    }
    let mut inv = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] = red.reduced[(i, n + j)];
        }
    }
    Ok(inv)
}

/// Solves the possibly singular system `M x = b`, returning `None` when `b`
/// lies outside the range of `M` (relative residual above `tol`).
pub fn csolve_consistent(m: &CMatrix, b: &[Complex64], rank_tol: f64, tol: f64) -> Option<CVector> {
    let (rows, n) = (m.rows(), m.cols());
    if b.len() != rows {
        return None;
    }
    let mut aug = CMatrix::zeros(rows, n + 1);
    for i in 0..rows {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)];
        }
        aug[(i, n)] = b[i];
    }
    let red = rref(&aug, n, rank_tol);
    let mut x = vec![CZERO; n];
    for (r, &p) in red.pivots.iter().enumerate() {
        x[p] = red.reduced[(r, n)];
    }
    let mx = m.mat_vec(&x).ok()?;
    let res: f64 = mx
        .iter()
        .zip(b)
        .map(|(a, c)| (a - c).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = cnorm(b).max(1.0);
    (res <= tol * scale).then_some(x)
}

/// Determinant of a square complex matrix by LU with partial pivoting.
pub fn cdet(m: &CMatrix) -> Result<Complex64> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.cols(),
        });
    }
    let mut a = m.clone();
    let mut det = CONE;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[(x, c)].norm().total_cmp(&a[(y, c)].norm()))
            .unwrap();
        if a[(p, c)] == CZERO {
            return Ok(CZERO);
        }
        if p != c {
            for j in 0..n {
                let t = a[(p, j)];
                a[(p, j)] = a[(c, j)];
                a[(c, j)] = t;
            }
            det = -det;
        }
        let piv = a[(c, c)];
        det *= piv;
        for i in c + 1..n {
            let f = a[(i, c)] / piv;
            for j in c..n {
                let v = a[(c, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    Ok(det)
}

/// `M⁻¹`, computed as `unφ(φ(M)⁻¹)`.
pub fn q_inverse(m: &QMatrix) -> Result<QMatrix> {
    m.ensure_square()?;
    unphi_mat(&cinverse(&phi_mat(m))?)
}

/// Solves `A x = b` through the complex adjoint.
pub fn q_solve(a: &QMatrix, b: &QVector) -> Result<QVector> {
    let n = a.ensure_square()?;
    if b.len() != n {
        return Err(mismatch(
            format!("length {n}"),
            format!("length {}", b.len()),
        ));
    }
    unphi_vec(&csolve(&phi_mat(a), &phi_vec(b))?)
}
