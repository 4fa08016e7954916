//! JSON encodings for quaternions, vectors, matrices, solution bases and
//! problem files.
//!
//! A quaternion is read from a `[w, x, y, z]` array, a literal string such as
//! `"1-0.5j+2k"`, or a bare number. Output always uses the 4-array.

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{QMatrix, QVector};
use crate::qde::{BasisColumn, QPoly, SolutionBasis, Term};
use crate::quat::{format_real, Quaternion};

/// Significant digits used for text output.
pub const TEXT_DIGITS: usize = 9;

pub fn real_text(v: f64) -> String {
    format_real(v, Some(TEXT_DIGITS))
}

fn parse_err(what: &str, v: &Value) -> Error {
    Error::Parse(format!("expected {what}, found {v}"))
}

pub fn quat_to_json(q: Quaternion) -> Value {
    json!(q.to_array())
}

pub fn quat_from_json(v: &Value) -> Result<Quaternion> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(Quaternion::real)
            .ok_or_else(|| parse_err("a number", v)),
        Value::String(s) => s.parse(),
        Value::Array(a) if a.len() == 4 => {
            let mut c = [0.0; 4];
            for (slot, x) in c.iter_mut().zip(a) {
                *slot = x.as_f64().ok_or_else(|| parse_err("a number", x))?;
            }
            Ok(Quaternion::from_array(c))
        }
        _ => Err(parse_err("a quaternion ([w,x,y,z], literal or number)", v)),
    }
}

pub fn vector_to_json(v: &QVector) -> Value {
    Value::Array(v.iter().map(|q| quat_to_json(*q)).collect())
}

pub fn vector_from_json(v: &Value) -> Result<QVector> {
    let a = v
        .as_array()
        .ok_or_else(|| parse_err("an array of quaternions", v))?;
    Ok(QVector::new(
        a.iter().map(quat_from_json).collect::<Result<_>>()?,
    ))
}

/// `{"rows": [[q, ...], ...]}`.
pub fn matrix_to_json(m: &QMatrix) -> Value {
    json!({ "rows": m.to_rows().iter().map(|r| r.iter().map(|q| quat_to_json(*q)).collect::<Vec<_>>()).collect::<Vec<_>>() })
}

pub fn matrix_from_json(v: &Value) -> Result<QMatrix> {
    let rows = v
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("an object with \"rows\"", v))?;
    let rows: Vec<Vec<Quaternion>> = rows
        .iter()
        .map(|r| vector_from_json(r).map(QVector::into_vec))
        .collect::<Result<_>>()?;
    QMatrix::from_rows(rows).map_err(|e| Error::Parse(e.to_string()))
}

/// `{"columns": [{"exponent": q, "terms": [{"power": p, "vector": [...]}]}]}`.
pub fn basis_to_json(b: &SolutionBasis) -> Value {
    let columns: Vec<Value> = b
        .columns
        .iter()
        .map(|c| {
            let terms: Vec<Value> = c
                .terms
                .iter()
                .map(|t| json!({ "power": t.power, "vector": vector_to_json(&t.vector) }))
                .collect();
            json!({ "exponent": quat_to_json(c.exponent), "terms": terms })
        })
        .collect();
    json!({ "columns": columns })
}

pub fn basis_from_json(v: &Value) -> Result<SolutionBasis> {
    let cols = v
        .get("columns")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("an object with \"columns\"", v))?;
    let columns = cols
        .iter()
        .map(|c| {
            let exponent = quat_from_json(
                c.get("exponent")
                    .ok_or_else(|| parse_err("\"exponent\"", c))?,
            )?;
            let terms = c
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("\"terms\"", c))?
                .iter()
                .map(|t| {
                    let power = t
                        .get("power")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| parse_err("a nonnegative \"power\"", t))?;
                    let vector = vector_from_json(
                        t.get("vector").ok_or_else(|| parse_err("\"vector\"", t))?,
                    )?;
                    Ok(Term {
                        power: power as usize,
                        vector,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(BasisColumn { exponent, terms })
        })
        .collect::<Result<_>>()?;
    SolutionBasis::new(columns).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Deserialize)]
struct RawProblem {
    matrix: Option<Value>,
    rows: Option<Value>,
    x0: Option<Value>,
    t0: Option<f64>,
    t: Option<f64>,
    tol: Option<f64>,
    diagonal: Option<Vec<Value>>,
    basis: Option<Value>,
}

/// Input file for the command-line tool.
///
/// Either `{"matrix": {"rows": ...}, ...}` or a bare `{"rows": ...}`. The
/// optional `diagonal` field lists, per component, the polynomial
/// coefficients `[c_0, c_1, ...]` of `a_i(t)`; when present `matrix` may be
/// omitted. `basis` carries a candidate solution basis to be checked instead
/// of the computed one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProblemFile {
    pub matrix: Option<QMatrix>,
    pub x0: Option<QVector>,
    pub t0: Option<f64>,
    pub t: Option<f64>,
    pub tol: Option<f64>,
    pub diagonal: Option<Vec<QPoly>>,
    pub basis: Option<SolutionBasis>,
}

impl ProblemFile {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawProblem = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let matrix = match (&raw.matrix, &raw.rows) {
            (Some(m), None) => Some(matrix_from_json(m)?),
            (None, Some(r)) => Some(matrix_from_json(&json!({ "rows": r }))?),
            (None, None) => None,
            (Some(_), Some(_)) => {
                return Err(Error::Parse("both \"matrix\" and \"rows\" given".into()))
            }
        };
        let x0 = raw.x0.as_ref().map(vector_from_json).transpose()?;
        let diagonal = raw
            .diagonal
            .as_ref()
            .map(|d| {
                d.iter()
                    .map(|p| vector_from_json(p).map(|c| QPoly::new(c.into_vec())))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let basis = raw.basis.as_ref().map(basis_from_json).transpose()?;
        let file = Self {
            matrix,
            x0,
            t0: raw.t0,
            t: raw.t,
            tol: raw.tol,
            diagonal,
            basis,
        };
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<()> {
        let n = match (&self.matrix, &self.diagonal) {
            (Some(m), _) => {
                let needs_square =
                    self.x0.is_some() || self.basis.is_some() || self.diagonal.is_some();
                if needs_square && !m.is_square() {
                    return Err(Error::Parse(format!(
                        "matrix must be square, got {}x{}",
                        m.rows(),
                        m.cols()
                    )));
                }
                m.rows()
            }
            (None, Some(d)) => d.len(),
            (None, None) => {
                return Err(Error::Parse(
                    "no \"matrix\", \"rows\" or \"diagonal\" field".into(),
                ))
            }
        };
        if let Some(d) = &self.diagonal {
            if d.len() != n {
                return Err(Error::Parse(format!(
                    "{} diagonal coefficients for dimension {n}",
                    d.len()
                )));
            }
        }
        if let Some(x) = &self.x0 {
            if x.len() != n {
                return Err(Error::Parse(format!(
                    "x0 has length {}, expected {n}",
                    x.len()
                )));
            }
        }
        if let Some(b) = &self.basis {
            if b.columns.len() != n || b.dim() != n {
                return Err(Error::Parse(format!(
                    "basis must have {n} columns of length {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({});
        if let Some(m) = &self.matrix {
            v["matrix"] = matrix_to_json(m);
        }
        if let Some(x) = &self.x0 {
            v["x0"] = vector_to_json(x);
        }
        if let Some(t0) = self.t0 {
            v["t0"] = json!(t0);
        }
        if let Some(t) = self.t {
            v["t"] = json!(t);
        }
        if let Some(tol) = self.tol {
            v["tol"] = json!(tol);
        }
        if let Some(d) = &self.diagonal {
            v["diagonal"] = Value::Array(
                d.iter()
                    .map(|p| vector_to_json(&QVector::new(p.coeffs.clone())))
                    .collect(),
            );
        }
        if let Some(b) = &self.basis {
            v["basis"] = basis_to_json(b);
        }
        v
    }
}

/// Reads `x0` from either a bare array or an object with an `"x0"` field.
pub fn x0_from_json_str(s: &str) -> Result<QVector> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    match v.get("x0") {
        Some(x) => vector_from_json(x),
        None => vector_from_json(&v),
    }
}
