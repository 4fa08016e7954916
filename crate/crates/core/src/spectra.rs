//! Right eigenvalues, eigenvectors and Jordan chains of quaternion matrices.
//!
//! Everything is computed on the complex adjoint `φ(A)`. Its spectrum is closed
//! under conjugation; a non-real pair `a ± bi` of multiplicity `k` yields the
//! standard eigenvalue `a + bi` with multiplicity `k`, and a real eigenvalue of
//! multiplicity `k` yields multiplicity `k/2`. Chains come from the kernels of
//! powers of `φ(A) − λI` and are pulled back with `unφ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint_pair, cdot, cnorm, csolve_consistent, null_space_abs, orthonormalize, phi_mat, phi_vec,
    rank_abs, unphi_vec, CMatrix, CVector, QMatrix, QVector,
};
use crate::pdet::{ddet, INDEPENDENCE_TOL};
use crate::quat::{similar, Quaternion};

/// Eigenvalues of `φ(A)` closer than this are one eigenvalue.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Rank tolerance for kernels of `(φ(A) − λI)^s`, relative to
/// `(‖φ(A)‖ + |λ|)^s` with the largest row norm as matrix norm.
pub const CHAIN_RANK_TOL: f64 = 1e-9;
/// Bound on `‖Av − vλ − v_prev‖` for produced eigenvectors and chain links.
pub const RESIDUAL_TOL: f64 = 1e-8;

const QR_ITERATIONS_PER_EIGENVALUE: usize = 30;

/// One standard eigenvalue with its multiplicity and Jordan chains `[v₁, …, v_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEntry {
    pub eigenvalue: Quaternion,
    pub multiplicity: usize,
    pub chains: Vec<Vec<QVector>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub entries: Vec<SpectralEntry>,
}

impl Spectrum {
    /// All chain vectors, eigenvalue by eigenvalue and chain by chain.
    pub fn chain_vectors(&self) -> Vec<QVector> {
        self.entries
            .iter()
            .flat_map(|e| e.chains.iter().flatten().cloned())
            .collect()
    }
}

/// Eigenvalues of a complex matrix with algebraic multiplicities, sorted by
/// real part and then imaginary part.
pub fn complex_eig(m: &CMatrix) -> Result<Vec<(Complex64, usize)>> {
    if m.rows() != m.cols() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let raw = hessenberg_qr(m)?;
    let mut clusters = cluster(&raw, m);
    clusters.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(clusters)
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(m: &CMatrix) -> CMatrix {
    let n = m.rows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let x: CVector = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = cnorm(&x);
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut v = x;
        v[0] += phase * alpha;
        let vn = cnorm(&v);
        for e in v.iter_mut() {
            *e /= vn;
        }
        // H ← (I − 2vv*) H
        for j in 0..n {
            let s: Complex64 = (0..v.len()).map(|r| v[r].conj() * h[(k + 1 + r, j)]).sum();
            for r in 0..v.len() {
                h[(k + 1 + r, j)] -= 2.0 * v[r] * s;
            }
        }
        // H ← H (I − 2vv*)
        for i in 0..n {
            let s: Complex64 = (0..v.len()).map(|r| h[(i, k + 1 + r)] * v[r]).sum();
            for r in 0..v.len() {
                h[(i, k + 1 + r)] -= 2.0 * s * v[r].conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Rotation `[[c, s], [−conj s, c]]` with real `c` that zeroes `b` in `(a, b)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

fn wilkinson_shift(h: &CMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (m1, m2) = (mid + disc, mid - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Single-shift complex QR iteration on the Hessenberg form.
fn hessenberg_qr(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(m);
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut iter = 0;
    let mut total = 0;
    let cap = QR_ITERATIONS_PER_EIGENVALUE * n;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            if sub <= f64::EPSILON * (h[(l, l)].norm() + h[(l - 1, l - 1)].norm())
                || sub < f64::MIN_POSITIVE
            {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > cap {
            let found = eig[hi + 1..].iter().map(|c| (c.re, c.im)).collect();
            return Err(Error::NoConvergence { found });
        }
        let mu = if iter == 10 || iter == 20 {
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };
        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Complex64::new(0.0, 0.0);
            rots.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rots[idx];
            for i in l..=(k + 1).min(hi) {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(eig)
}

/// Pivot threshold for `(M − μI)^p`. Scaling by the matrix rather than by the
/// power keeps a numerically nilpotent power from looking full rank.
fn kernel_threshold(m: &CMatrix, mu: Complex64, p: usize) -> f64 {
    CHAIN_RANK_TOL * (m.max_row_norm() + mu.norm()).powi(p as i32)
}

fn nullity_of_power(m: &CMatrix, mu: Complex64, p: usize) -> usize {
    let n = m.rows();
    n - rank_abs(&m.shift(mu).pow(p), kernel_threshold(m, mu, p))
}

/// Groups raw eigenvalues. Single linkage at [`CLUSTER_TOL`] first. Then
/// clusters linked within `1e−3·max(1, ‖M‖)` are merged as a whole when the
/// combined count `m` satisfies `nullity((M − μI)^m) ≥ m`; this reunites the
/// `ε^{1/m}` splitting of defective blocks.
fn cluster(raw: &[Complex64], m: &CMatrix) -> Vec<(Complex64, usize)> {
    let groups = single_linkage(raw.iter().map(|z| vec![*z]).collect(), CLUSTER_TOL);
    let mean = |g: &[Complex64]| g.iter().sum::<Complex64>() / g.len() as f64;
    let reach = 1e-3 * m.norm().max(1.0);
    let mut out = Vec::new();
    for component in linked_components(&groups, reach, &mean) {
        let size: usize = component.iter().map(|g| g.len()).sum();
        let all: Vec<Complex64> = component.iter().flatten().copied().collect();
        if component.len() > 1 && nullity_of_power(m, mean(&all), size) >= size {
            out.push(all);
        } else {
            out.extend(component);
        }
    }
    out.into_iter()
        .map(|g| {
            let mut mu = mean(&g);
            if mu.im.abs() <= CLUSTER_TOL {
                mu.im = 0.0;
            }
            (mu, g.len())
        })
        .collect()
}

fn single_linkage(mut groups: Vec<Vec<Complex64>>, tol: f64) -> Vec<Vec<Complex64>> {
    loop {
        let mut pair = None;
        'outer: for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                if groups[a]
                    .iter()
                    .any(|x| groups[b].iter().any(|y| (x - y).norm() <= tol))
                {
                    pair = Some((a, b));
                    break 'outer;
                }
            }
        }
        match pair {
            Some((a, b)) => {
                let g = groups.remove(b);
                groups[a].extend(g);
            }
            None => return groups,
        }
    }
}

/// Components of the graph joining clusters whose means are within `reach`.
fn linked_components(
    groups: &[Vec<Complex64>],
    reach: f64,
    mean: &impl Fn(&[Complex64]) -> Complex64,
) -> Vec<Vec<Vec<Complex64>>> {
    let means: Vec<Complex64> = groups.iter().map(|g| mean(g)).collect();
    let mut label: Vec<usize> = (0..groups.len()).collect();
    for a in 0..groups.len() {
        for b in a + 1..groups.len() {
            if (means[a] - means[b]).norm() <= reach {
                let (la, lb) = (label[a], label[b]);
                for l in label.iter_mut() {
                    if *l == lb {
                        *l = la;
                    }
                }
            }
        }
    }
    let mut comps: Vec<Vec<Vec<Complex64>>> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        match seen.iter().position(|&l| l == label[i]) {
            Some(p) => comps[p].push(g.clone()),
            None => {
                seen.push(label[i]);
                comps.push(vec![g.clone()]);
            }
        }
    }
    comps
}

/// Standard eigenvalues with their `φ`-multiplicities (`2k` for real ones).
fn standard_spectrum(a: &QMatrix) -> Result<Vec<(Complex64, usize)>> {
    let n = a.ensure_square()?;
    let pa = phi_mat(a);
    let eig = complex_eig(&pa)?;
    // Round-off below this floor is not a meaningful eigenvalue component.
    let floor = 1e-13 * pa.norm().max(1.0);
    let snap = |x: f64| if x.abs() <= floor { 0.0 } else { x };
    let mut out = Vec::new();
    for (z, k) in eig {
        let z = Complex64::new(snap(z.re), snap(z.im));
        if z.im.abs() <= CLUSTER_TOL {
            if k % 2 != 0 {
                return Err(Error::Clustering(format!(
                    "real eigenvalue {} of the adjoint has odd multiplicity {k}",
                    z.re
                )));
            }
            out.push((Complex64::new(z.re, 0.0), k));
        } else if z.im > 0.0 {
            out.push((z, k));
        }
    }
    let total: usize = out
        .iter()
        .map(|(z, k)| if z.im == 0.0 { k / 2 } else { *k })
        .sum();
    if total != n {
        return Err(Error::Clustering(format!(
            "multiplicities sum to {total}, expected {n}"
        )));
    }
    Ok(out)
}

/// Standard right eigenvalues `λ = a + bi` (`b ≥ 0`) with multiplicities summing to `n`.
pub fn right_eigenvalues(a: &QMatrix) -> Result<Vec<(Quaternion, usize)>> {
    Ok(standard_spectrum(a)?
        .into_iter()
        .map(|(z, k)| {
            let mult = if z.im == 0.0 { k / 2 } else { k };
            (Quaternion::from_complex(z), mult)
        })
        .collect())
}

/// Reduces an arbitrary eigenvalue to its standard form, returning `α` with
/// `λ = α⁻¹ λₛ α`.
fn to_standard(lambda: Quaternion) -> Result<(Complex64, Quaternion)> {
    let std = lambda.standardize();
    let sim = similar(std, lambda, 1e-12_f64.max(1e-12 * lambda.norm()));
    let alpha = sim
        .witness
        .ok_or_else(|| Error::Decomposition(format!("no similarity witness for {lambda}")))?;
    Ok((std.standard_complex(), alpha))
}

/// Pair-aware greedy selection: repeatedly take the candidate with the largest
/// component outside the current span, adding its adjoint partner as well when
/// `pair` is set. Stops once `target` vectors are chosen.
fn greedy_select(
    candidates: &[CVector],
    span: &mut Vec<CVector>,
    pair: bool,
    target: usize,
) -> Result<Vec<CVector>> {
    let mut chosen = Vec::new();
    while chosen.len() < target {
        let residual = |c: &CVector| {
            let mut r = c.clone();
            for _ in 0..2 {
                for b in span.iter() {
                    let p = cdot(b, &r);
                    for (ri, bi) in r.iter_mut().zip(b) {
                        *ri -= p * bi;
                    }
                }
            }
            r
        };
        // Ties go to the earliest candidate so exact kernels keep their natural order.
        let (best, rn) = candidates
            .iter()
            .map(residual)
            .map(|r| {
                let n = cnorm(&r);
                (r, n)
            })
            .reduce(|acc, cur| {
                if cur.1 > acc.1 * (1.0 + 1e-9) {
                    cur
                } else {
                    acc
                }
            })
            .ok_or_else(|| Error::Decomposition("no candidates".into()))?;
        if rn < 1e-6 {
            return Err(Error::Decomposition(format!(
                "kernel exhausted after {} of {target} vectors",
                chosen.len()
            )));
        }
        let w: CVector = best.iter().map(|x| x / rn).collect();
        span.push(w.clone());
        if pair {
            // The span is invariant under the antiunitary pairing map, so the
            // partner of w is already orthogonal to it.
            span.push(adjoint_pair(&w));
        }
        chosen.push(w);
    }
    Ok(chosen)
}

/// Right-multiplies a chain by one scalar so the first significant entry of
/// its head is `1` (real λ) or a unit with real nonnegative ℂ-part.
fn normalize_chain(chain: &mut [QVector], real: bool) {
    let head = &chain[0];
    let scale = head.iter().map(|q| q.norm()).fold(0.0, f64::max);
    let Some(p) = head.first_nonzero(1e-8 * scale) else {
        return;
    };
    let vp = head[p];
    let alpha = if real {
        vp.inv().unwrap_or(Quaternion::ONE)
    } else {
        let (c1, _) = vp.complex_pair();
        let c = if c1.norm() > 1e-14 * vp.norm() {
            c1.conj() / (c1.norm() * vp.norm())
        } else {
            Complex64::new(1.0 / vp.norm(), 0.0)
        };
        Quaternion::from_complex(c)
    };
    for v in chain.iter_mut() {
        *v = chop(&v.mul_right(alpha));
    }
}

/// Zeroes components below `1e−13` of the vector's largest entry.
fn chop(v: &QVector) -> QVector {
    let scale = v.iter().map(|q| q.norm()).fold(0.0, f64::max);
    let t = 1e-13 * scale;
    let c = |x: f64| if x.abs() <= t { 0.0 } else { x };
    QVector::new(
        v.iter()
            .map(|q| Quaternion::new(c(q.w), c(q.x), c(q.y), c(q.z)))
            .collect(),
    )
}

fn eigen_residual(a: &QMatrix, v: &QVector, lambda: Quaternion, prev: Option<&QVector>) -> f64 {
    let mut r = &(a * v) - &v.mul_right(lambda);
    if let Some(p) = prev {
        r = &r - p;
    }
    r.norm()
}

/// A maximal right-independent set of eigenvectors `Av = vλ`.
///
/// A non-standard `λ` is handled through the eigenline: if `v` belongs to the
/// standard form `λₛ = αλα⁻¹`, then `vα` belongs to `λ`.
pub fn eigenvectors(a: &QMatrix, lambda: Quaternion) -> Result<Vec<QVector>> {
    let n = a.ensure_square()?;
    let (lam, alpha) = to_standard(lambda)?;
    let real = lam.im == 0.0;
    let pa = phi_mat(a);
    let kernel = orthonormalize(
        &null_space_abs(&pa.shift(lam), kernel_threshold(&pa, lam, 1)),
        1e-8,
    );
    if kernel.is_empty() {
        return Err(Error::NotEigenvalue(lambda.to_string()));
    }
    let target = if real { kernel.len() / 2 } else { kernel.len() };
    let picked = greedy_select(&kernel, &mut Vec::new(), real, target.max(1))?;
    let mut out = Vec::new();
    for w in picked {
        let mut chain = [unphi_vec(&w)?];
        normalize_chain(&mut chain, real);
        let v = chain[0].mul_right(alpha);
        let res = eigen_residual(a, &v, lambda, None);
        if res > RESIDUAL_TOL * (1.0 + a.norm()) * v.norm().max(1.0) {
            return Err(Error::NotEigenvalue(format!("{lambda} (residual {res:e})")));
        }
        out.push(v);
    }
    debug_assert!(out.len() <= n);
    Ok(out)
}

/// Solves `A u − u λ = v` through `(φ(A) − λI) φ(u) = φ(v)`; `None` when
/// `φ(v)` is outside the range.
pub fn chain_extend(a: &QMatrix, lambda: Quaternion, v: &QVector) -> Result<Option<QVector>> {
    let n = a.ensure_square()?;
    if v.len() != n {
        return Err(crate::error::mismatch(
            format!("length {n}"),
            format!("length {}", v.len()),
        ));
    }
    let (lam, alpha) = to_standard(lambda)?;
    let alpha_inv = alpha.inv()?;
    let v_std = v.mul_right(alpha_inv);
    let n_mat = phi_mat(a).shift(lam);
    let Some(x) = csolve_consistent(&n_mat, &phi_vec(&v_std), CHAIN_RANK_TOL, 1e-7) else {
        return Ok(None);
    };
    let u = unphi_vec(&x)?.mul_right(alpha);
    let res = eigen_residual(a, &u, lambda, Some(v));
    Ok((res <= RESIDUAL_TOL * v.norm().max(1.0)).then_some(u))
}

/// Jordan chains of `φ(A)` at `λ` by the rank-sequence method; for real `λ`
/// only one chain of every adjoint pair is kept.
fn chains_at(pa: &CMatrix, lam: Complex64, k: usize, real: bool) -> Result<Vec<Vec<CVector>>> {
    let nm = pa.shift(lam);
    let mut kernels: Vec<Vec<CVector>> = vec![Vec::new()];
    let mut power = CMatrix::identity(pa.rows());
    for s in 1..=k {
        power = power.matmul(&nm)?;
        let ker = orthonormalize(&null_space_abs(&power, kernel_threshold(pa, lam, s)), 1e-8);
        let prev = kernels[s - 1].len();
        let dim = ker.len();
        kernels.push(ker);
        if dim == k {
            break;
        }
        if dim <= prev || dim > k {
            return Err(Error::Decomposition(format!(
                "kernel dimensions stalled at {dim} of {k} for eigenvalue {lam}"
            )));
        }
    }
    let levels = kernels.len() - 1;
    if kernels[levels].len() != k {
        return Err(Error::Decomposition(format!(
            "generalized eigenspace of {lam} has wrong size"
        )));
    }

    let apply = |w: &CVector, times: usize| -> CVector {
        let mut x = w.clone();
        for _ in 0..times {
            x = nm.mat_vec(&x).expect("square");
        }
        x
    };
    let mut tops: Vec<(usize, CVector)> = Vec::new();
    for s in (1..=levels).rev() {
        let mut seed = kernels[s - 1].clone();
        for (t, w) in &tops {
            let x = apply(w, t - s);
            if real {
                seed.push(adjoint_pair(&x));
            }
            seed.push(x);
        }
        let mut span = orthonormalize(&seed, 1e-8);
        let missing = kernels[s].len().saturating_sub(span.len());
        let target = if real { missing / 2 } else { missing };
        for w in greedy_select(&kernels[s], &mut span, real, target)? {
            tops.push((s, w));
        }
    }
    Ok(tops
        .into_iter()
        .map(|(s, w)| (0..s).map(|p| apply(&w, s - 1 - p)).collect())
        .collect())
}

/// Eigenvalues, multiplicities and Jordan chains whose vectors together form
/// a right-independent basis of ℍⁿ.
pub fn full_spectrum(a: &QMatrix) -> Result<Spectrum> {
    let n = a.ensure_square()?;
    let pa = phi_mat(a);
    let mut entries = Vec::new();
    for (lam, k) in standard_spectrum(a)? {
        let real = lam.im == 0.0;
        let multiplicity = if real { k / 2 } else { k };
        let lq = Quaternion::from_complex(lam);
        let mut chains = Vec::new();
        for raw in chains_at(&pa, lam, k, real)? {
            let mut chain: Vec<QVector> =
                raw.iter().map(|c| unphi_vec(c)).collect::<Result<_>>()?;
            normalize_chain(&mut chain, real);
            for (l, v) in chain.iter().enumerate() {
                let res = eigen_residual(a, v, lq, l.checked_sub(1).map(|p| &chain[p]));
                if res > 1e-6 * (1.0 + a.norm()) * v.norm().max(1.0) {
                    return Err(Error::Decomposition(format!(
                        "chain link {} at {lq} has residual {res:e}",
                        l + 1
                    )));
                }
            }
            chains.push(chain);
        }
        let len: usize = chains.iter().map(|c| c.len()).sum();
        if len != multiplicity {
            return Err(Error::Decomposition(format!(
                "chains at {lq} have total length {len}, expected {multiplicity}"
            )));
        }
        entries.push(SpectralEntry {
            eigenvalue: lq,
            multiplicity,
            chains,
        });
    }
    let spectrum = Spectrum { entries };
    let vectors = spectrum.chain_vectors();
    if vectors.len() != n {
        return Err(Error::Decomposition(format!(
            "{} chain vectors for n = {n}",
            vectors.len()
        )));
    }
    let d = ddet(&QMatrix::from_columns(&vectors)?)?;
    if d <= INDEPENDENCE_TOL {
        return Err(Error::Decomposition(format!(
            "chain vectors are right-dependent (ddet = {d:e})"
        )));
    }
    Ok(spectrum)
}
