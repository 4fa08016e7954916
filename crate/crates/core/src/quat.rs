//! Scalar quaternion arithmetic.
//!
//! A [`Quaternion`] is `w + x i + y j + z k` with the Hamilton multiplication
//! table `i² = j² = k² = ijk = −1`. Besides the field operations this module
//! carries the exponential, the standard (complex, nonnegative imaginary part)
//! representative of a similarity class, and the text literal grammar used by
//! every file format in the crate (`"1-0.5j+2k"`).

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance for zero tests on O(1) quantities.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Below this imaginary modulus `exp` switches to a Taylor expansion of
/// `sin|v|/|v|` and `cos|v|`.
const EXP_SERIES_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    #[inline]
    pub const fn real(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    /// Embeds `a + b i` as a quaternion.
    #[inline]
    pub fn from_complex(c: Complex64) -> Self {
        Self::new(c.re, c.im, 0.0, 0.0)
    }

    /// Builds `c1 + c2 j` from two complex numbers.
    ///
    /// `(y + z i) j = y j + z k`, so the j-part supplies the last two components.
    #[inline]
    pub fn from_complex_pair(c1: Complex64, c2: Complex64) -> Self {
        Self::new(c1.re, c1.im, c2.re, c2.im)
    }

    /// Splits `q = c1 + c2 j` into its complex parts `(c1, c2)`.
    #[inline]
    pub fn complex_pair(self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.w, self.x),
            Complex64::new(self.y, self.z),
        )
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Real part `ℜq`.
    #[inline]
    pub fn re(self) -> f64 {
        self.w
    }

    /// Imaginary part `ℑq = x i + y j + z k`.
    #[inline]
    pub fn im(self) -> Quaternion {
        Self::new(0.0, self.x, self.y, self.z)
    }

    #[inline]
    pub fn im_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `q⁻¹ = conj(q)/|q|²`, rejecting `|q| ≤ DEFAULT_TOL`.
    pub fn inv(self) -> Result<Self> {
        self.inv_with_tol(DEFAULT_TOL)
    }

    pub fn inv_with_tol(self, tol: f64) -> Result<Self> {
        let n = self.norm();
        if n <= tol {
            return Err(Error::DivisionByZero(n));
        }
        Ok(self.conj() / self.norm_sqr())
    }

    pub fn is_real(self, tol: f64) -> bool {
        self.im_norm() <= tol
    }

    pub fn is_zero(self, tol: f64) -> bool {
        self.norm() <= tol
    }

    /// Componentwise comparison within an absolute tolerance.
    pub fn approx_eq(self, other: Quaternion, tol: f64) -> bool {
        (self.w - other.w).abs() <= tol
            && (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && (self.z - other.z).abs() <= tol
    }

    /// Quaternion exponential `e^w (cos|v| + v/|v| sin|v|)`.
    pub fn exp(self) -> Self {
        let ew = self.w.exp();
        let r = self.im_norm();
        let (c, sinc) = if r < EXP_SERIES_CUTOFF {
            let r2 = r * r;
            (1.0 - r2 / 2.0, 1.0 - r2 / 6.0)
        } else {
            (r.cos(), r.sin() / r)
        };
        Self::new(
            ew * c,
            ew * sinc * self.x,
            ew * sinc * self.y,
            ew * sinc * self.z,
        )
    }

    /// The standard representative `ℜλ + |ℑλ| i` of the similarity class of `λ`.
    pub fn standardize(self) -> Self {
        Self::new(self.w, self.im_norm(), 0.0, 0.0)
    }

    /// The complex number `ℜλ + |ℑλ| i`.
    pub fn standard_complex(self) -> Complex64 {
        Complex64::new(self.w, self.im_norm())
    }

    /// Commutator `ab − ba`.
    pub fn commutator(self, other: Quaternion) -> Quaternion {
        self * other - other * self
    }

    /// Formats the value in the literal grammar with `sig` significant digits.
    pub fn to_literal(self, sig: Option<usize>) -> String {
        let parts = [(self.w, ""), (self.x, "i"), (self.y, "j"), (self.z, "k")];
        let mut out = String::new();
        for (v, unit) in parts {
            let text = format_real(v, sig);
            if text == "0" || text == "-0" {
                continue;
            }
            let (neg, mag) = match text.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, text),
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push(if neg { '-' } else { '+' });
            }
            if unit.is_empty() || mag != "1" {
                out.push_str(&mag);
            }
            out.push_str(unit);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// Result of a quaternion similarity test `θ = α⁻¹ λ α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub similar: bool,
    pub witness: Option<Quaternion>,
}

/// Decides whether `theta` is similar to `lambda` and, when it is, produces a
/// nonzero `α` with `θ = α⁻¹ λ α`, checked by direct multiplication.
pub fn similar(lambda: Quaternion, theta: Quaternion, tol: f64) -> Similarity {
    let no = Similarity {
        similar: false,
        witness: None,
    };
    if !lambda.standardize().approx_eq(theta.standardize(), tol) {
        return no;
    }
    let witness = if lambda.approx_eq(theta, tol) {
        Quaternion::ONE
    } else {
        // α v α⁻¹ = u where u, v are the unit imaginary directions of λ and θ.
        let u = lambda.im() / lambda.im_norm();
        let v = theta.im() / theta.im_norm();
        let dot = u.x * v.x + u.y * v.y + u.z * v.z;
        if dot < -1.0 + 1e-12 {
            perpendicular_unit(v)
        } else {
            let cross = v * u - Quaternion::real(-dot);
            let a = Quaternion::new(1.0 + dot, cross.x, cross.y, cross.z);
            a / a.norm()
        }
    };
    let check = witness.inv().map(|inv| inv * lambda * witness);
    match check {
        Ok(q) if q.approx_eq(theta, tol.max(1e-9 * lambda.norm())) => Similarity {
            similar: true,
            witness: Some(witness),
        },
        _ => no,
    }
}

fn perpendicular_unit(v: Quaternion) -> Quaternion {
    let trial = if v.x.abs() < 0.9 {
        Quaternion::I
    } else {
        Quaternion::J
    };
    // Pure part of v × trial.
    let c = v * trial;
    let p = Quaternion::new(0.0, c.x, c.y, c.z);
    p / p.norm()
}

/// Formats a real number; `sig` selects the number of significant digits,
/// `None` prints the shortest round-tripping representation.
pub(crate) fn format_real(v: f64, sig: Option<usize>) -> String {
    let sig = match sig {
        None => return format!("{v}"),
        Some(s) => s.max(1),
    };
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { format!("{v}") };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..sig as i32).contains(&exp) {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{:.*e}", sig - 1, v);
        match s.split_once('e') {
            Some((mant, e)) if mant.contains('.') => {
                format!("{}e{}", mant.trim_end_matches('0').trim_end_matches('.'), e)
            }
            _ => s,
        }
    }
}

impl fmt::Display for Quaternion {
    /// `{}` prints full precision, `{:.9}` prints nine significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal(f.precision()))
    }
}

impl FromStr for Quaternion {
    type Err = Error;

    /// Parses signed decimal terms with an optional `i|j|k` suffix,
    /// e.g. `"1-0.5j+2k"`, `"-i"`, `"2.5e-3+k"`.
    fn from_str(s: &str) -> Result<Self> {
        let raw: Vec<char> = s.chars().collect();
        for w in raw.windows(3) {
            if w[1].is_whitespace() && is_numeric(w[0]) && is_numeric(w[2]) {
                return Err(Error::Parse(format!("whitespace inside a number in {s:?}")));
            }
        }
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(Error::Parse("empty quaternion literal".into()));
        }
        let mut q = Quaternion::ZERO;
        let mut pos = 0;
        let mut first = true;
        while pos < chars.len() {
            let mut sign = 1.0;
            match chars[pos] {
                '+' => pos += 1,
                '-' => {
                    sign = -1.0;
                    pos += 1
                }
                _ if !first => {
                    return Err(Error::Parse(format!(
                        "expected '+' or '-' at offset {pos} in {s:?}"
                    )))
                }
                _ => {}
            }
            first = false;

            let start = pos;
            while pos < chars.len() && (chars[pos].is_ascii_digit() || chars[pos] == '.') {
                pos += 1;
            }
            let mantissa_end = pos;
            if pos > start && pos < chars.len() && matches!(chars[pos], 'e' | 'E') {
                let mut p = pos + 1;
                if p < chars.len() && matches!(chars[p], '+' | '-') {
                    p += 1;
                }
                let digits = p;
                while p < chars.len() && chars[p].is_ascii_digit() {
                    p += 1;
                }
                if p > digits {
                    pos = p;
                }
            }
            let number: String = chars[start..pos].iter().collect();
            let coeff = if number.is_empty() {
                None
            } else {
                if !chars[start..mantissa_end]
                    .iter()
                    .any(|c| c.is_ascii_digit())
                {
                    return Err(Error::Parse(format!("malformed number in {s:?}")));
                }
                Some(
                    number
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("{number:?}: {e}")))?,
                )
            };

            let unit = match chars.get(pos) {
                Some(&c @ ('i' | 'j' | 'k')) => {
                    pos += 1;
                    Some(c)
                }
                _ => None,
            };
            let value = match (coeff, unit) {
                (None, None) => {
                    return Err(Error::Parse(format!("empty term in {s:?}")));
                }
                (c, _) => sign * c.unwrap_or(1.0),
            };
            match unit {
                None => q.w += value,
                Some('i') => q.x += value,
                Some('j') => q.y += value,
                Some(_) => q.z += value,
            }
        }
        if ![q.w, q.x, q.y, q.z].iter().all(|v| v.is_finite()) {
            return Err(Error::Parse(format!("non-finite component in {s:?}")));
        }
        Ok(q)
    }
}

fn is_numeric(c: char) -> bool {
    c.is_ascii_digit() || c == '.'
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    /// Hamilton product.
    #[inline]
    fn mul(self, b: Quaternion) -> Quaternion {
        let a = self;
        Quaternion::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.w / s, self.x / s, self.y / s, self.z / s)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl MulAssign for Quaternion {
    #[inline]
    fn mul_assign(&mut self, o: Quaternion) {
        *self = *self * o;
    }
}

impl Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

impl From<f64> for Quaternion {
    fn from(w: f64) -> Self {
        Quaternion::real(w)
    }
}

impl From<Complex64> for Quaternion {
    fn from(c: Complex64) -> Self {
        Quaternion::from_complex(c)
    }
}
