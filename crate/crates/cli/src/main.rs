//! `qde`: determinants, spectra, fundamental matrices, `exp(At)` and IVP
//! solutions for quaternion linear systems read from JSON problem files.
//!
//! Exit codes: 0 success, 1 a `check` gate failed, 2 unreadable or
//! inconsistent input, 3 numerical failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qdekit::format::{
    basis_to_json, matrix_to_json, quat_to_json, real_text, vector_to_json, x0_from_json_str,
    ProblemFile, TEXT_DIGITS,
};
use qdekit::oracle::{fd_residual, rk4_integrate};
use qdekit::pdet::{ddet, det_p};
use qdekit::qde::{
    exp_series, fundamental_matrix, liouville_check, solve_diagonal, solve_ivp, Propagator,
    SolutionBasis, SERIES_TOL,
};
use qdekit::spectra::full_spectrum;
use qdekit::{Error, QMatrix, QVector, Quaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const CHECK_EXP0_TOL: f64 = 1e-10;
const CHECK_ODE_TOL: f64 = 1e-6;
const CHECK_SERIES_TOL: f64 = 1e-8;
const CHECK_RK4_TOL: f64 = 1e-6;
const CHECK_DDET_MIN: f64 = 1e-6;
const RK4_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Permutation determinant of the matrix
    Det,
    /// Double determinant ddet(A) = det_P(A⁺A)
    Ddet,
    /// Standard right eigenvalues, multiplicities and Jordan chains
    Eig,
    /// Symbolic fundamental matrix, evaluated at --t when given
    Fundmat,
    /// exp(At) at --t
    Expat,
    /// x(t) for x(t0) = x0
    Solve,
    /// x(t) for a diagonal system with polynomial coefficients
    DiagSolve,
    /// Gate suite for the fundamental matrix; exits 1 on any failure
    Check,
    /// Measured Wronskian growth factor over [t0, t]
    Liouville,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Eigen,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Quaternion linear systems from JSON problem files.
///
/// The randomized initial vector used by `check` when the file has no x0 is
/// drawn from the QDE_SEED environment variable (default 0).
#[derive(Debug, Parser)]
#[command(name = "qde", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Problem file: {"matrix": {"rows": ...}, "x0", "t0", "t", "tol", "diagonal", "basis"}
    #[arg(long)]
    input: PathBuf,
    /// Evaluation time (overrides the file)
    #[arg(long)]
    t: Option<f64>,
    /// Initial time (overrides the file; default 0)
    #[arg(long)]
    t0: Option<f64>,
    /// File holding x0 as an array or {"x0": [...]}
    #[arg(long)]
    x0: Option<PathBuf>,
    /// exp(At) method for expat
    #[arg(long, value_enum, default_value_t = Method::Eigen)]
    method: Method,
    /// Relative term cutoff for the series method
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_)
            | Error::DimensionMismatch { .. }
            | Error::NotSquare { .. }
            | Error::SizeCap { .. } => 2,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

struct Problem {
    file: ProblemFile,
    t: Option<f64>,
    t0: f64,
    x0: Option<QVector>,
    tol: Option<f64>,
}

impl Problem {
    fn matrix(&self) -> Result<&QMatrix, Failure> {
        self.file
            .matrix
            .as_ref()
            .ok_or_else(|| input_error("the problem file has no matrix"))
    }

    fn square(&self) -> Result<&QMatrix, Failure> {
        let a = self.matrix()?;
        a.ensure_square()?;
        Ok(a)
    }

    fn t(&self) -> Result<f64, Failure> {
        self.t
            .ok_or_else(|| input_error("no evaluation time: pass --t or set \"t\" in the file"))
    }

    fn x0(&self) -> Result<&QVector, Failure> {
        self.x0
            .as_ref()
            .ok_or_else(|| input_error("no initial vector: pass --x0 or set \"x0\" in the file"))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load(cli: &Cli) -> Result<Problem, Failure> {
    let file = ProblemFile::from_json_str(&read(&cli.input)?)
        .map_err(|e| input_error(format!("{}: {e}", cli.input.display())))?;
    let x0 = match &cli.x0 {
        Some(p) => Some(
            x0_from_json_str(&read(p)?)
                .map_err(|e| input_error(format!("{}: {e}", p.display())))?,
        ),
        None => file.x0.clone(),
    };
    for (name, v) in [("t", cli.t), ("t0", cli.t0), ("tol", cli.tol)] {
        if v.is_some_and(|v| !v.is_finite()) {
            return Err(input_error(format!("--{name} must be finite")));
        }
    }
    Ok(Problem {
        t: cli.t.or(file.t),
        t0: cli.t0.or(file.t0).unwrap_or(0.0),
        tol: cli.tol.or(file.tol),
        x0,
        file,
    })
}

fn seed() -> u64 {
    std::env::var("QDE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn quat_text(q: Quaternion) -> String {
    q.to_literal(Some(TEXT_DIGITS))
}

fn vector_text(v: &QVector) -> String {
    format!("{v:.TEXT_DIGITS$}")
}

fn matrix_text(m: &QMatrix) -> String {
    format!("{m:.TEXT_DIGITS$}")
}

fn basis_text(b: &SolutionBasis) -> String {
    let mut out = String::new();
    for (i, c) in b.columns.iter().enumerate() {
        let _ = writeln!(out, "column {}: exponent {}", i + 1, quat_text(c.exponent));
        for term in &c.terms {
            let _ = writeln!(
                out,
                "  t^{}/{}!: {}",
                term.power,
                term.power,
                vector_text(&term.vector)
            );
        }
    }
    out
}

struct Gate {
    name: &'static str,
    value: f64,
    threshold: f64,
    lower_bound: bool,
}

impl Gate {
    fn pass(&self) -> bool {
        if self.lower_bound {
            self.value > self.threshold
        } else {
            self.value <= self.threshold
        }
    }
}

fn run_check(p: &Problem) -> Result<(Vec<Gate>, bool), Failure> {
    let a = p.square()?;
    let n = a.rows();
    let basis = match &p.file.basis {
        Some(b) => b.clone(),
        None => fundamental_matrix(a)?,
    };
    let t = p.t.unwrap_or(1.0);
    let x0 = match &p.x0 {
        Some(x) => x.clone(),
        None => {
            let mut r = ChaCha8Rng::seed_from_u64(seed());
            QVector::new(
                (0..n)
                    .map(|_| {
                        Quaternion::new(
                            r.gen_range(-1.0..1.0),
                            r.gen_range(-1.0..1.0),
                            r.gen_range(-1.0..1.0),
                            r.gen_range(-1.0..1.0),
                        )
                    })
                    .collect(),
            )
        }
    };
    let ts: Vec<f64> = (0..10).map(|s| s as f64 / 9.0).collect();
    let ddet0 = ddet(&basis.eval(0.0))?;
    let ode = fd_residual(|s| basis.eval(s), a, &ts);
    let (exp0, series, rk) = match Propagator::from_basis(basis) {
        Ok(prop) => {
            let e = prop.exp_at(t);
            let exp0 = (&prop.exp_at(0.0) - &QMatrix::identity(n)).norm();
            let series = (&e - &exp_series(a, t, p.tol.unwrap_or(SERIES_TOL))?).norm();
            let rk4 = rk4_integrate(a, 0.0, &x0, t, RK4_STEP)?.state;
            (exp0, series, (&e.mat_vec(&x0)? - &rk4).norm())
        }
        Err(_) => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
    };
    let gates = vec![
        Gate {
            name: "exp(0) = I",
            value: exp0,
            threshold: CHECK_EXP0_TOL,
            lower_bound: false,
        },
        Gate {
            name: "ODE residual",
            value: ode,
            threshold: CHECK_ODE_TOL,
            lower_bound: false,
        },
        Gate {
            name: "series agreement",
            value: series,
            threshold: CHECK_SERIES_TOL,
            lower_bound: false,
        },
        Gate {
            name: "RK4 agreement",
            value: rk,
            threshold: CHECK_RK4_TOL,
            lower_bound: false,
        },
        Gate {
            name: "ddet(M(0))",
            value: ddet0,
            threshold: CHECK_DDET_MIN,
            lower_bound: true,
        },
    ];
    let ok = gates.iter().all(Gate::pass);
    Ok((gates, ok))
}

fn run(cli: &Cli) -> Result<(String, ExitCode), Failure> {
    if cli.method == Method::Series && cli.command != Command::Expat {
        return Err(input_error("--method applies to expat only"));
    }
    let p = load(cli)?;
    let json = cli.format == Format::Json;
    let done = |s: String| Ok((s, ExitCode::SUCCESS));
    match cli.command {
        Command::Det => {
            let d = det_p(p.square()?)?;
            done(if json {
                quat_to_json(d).to_string()
            } else {
                quat_text(d)
            })
        }
        Command::Ddet => {
            let d = ddet(p.matrix()?)?;
            done(if json {
                json!(d).to_string()
            } else {
                real_text(d)
            })
        }
        Command::Eig => {
            let spec = full_spectrum(p.square()?)?;
            if json {
                let entries: Vec<Value> = spec
                    .entries
                    .iter()
                    .map(|e| {
                        let chains: Vec<Value> = e
                            .chains
                            .iter()
                            .map(|c| Value::Array(c.iter().map(vector_to_json).collect()))
                            .collect();
                        json!({ "eigenvalue": quat_to_json(e.eigenvalue), "multiplicity": e.multiplicity, "chains": chains })
                    })
                    .collect();
                done(json!({ "entries": entries }).to_string())
            } else {
                let mut out = String::new();
                for e in &spec.entries {
                    let _ = writeln!(
                        out,
                        "eigenvalue {} (multiplicity {})",
                        quat_text(e.eigenvalue),
                        e.multiplicity
                    );
                    for (i, chain) in e.chains.iter().enumerate() {
                        for (l, v) in chain.iter().enumerate() {
                            let _ =
                                writeln!(out, "  chain {} v{}: {}", i + 1, l + 1, vector_text(v));
                        }
                    }
                }
                done(out.trim_end().to_string())
            }
        }
        Command::Fundmat => {
            let basis = fundamental_matrix(p.square()?)?;
            let at = p.t.map(|t| basis.eval(t));
            if json {
                let mut v = json!({ "basis": basis_to_json(&basis) });
                if let Some(m) = &at {
                    v["matrix"] = matrix_to_json(m);
                }
                done(v.to_string())
            } else {
                let mut out = basis_text(&basis);
                if let (Some(m), Some(t)) = (&at, p.t) {
                    let _ = write!(out, "M({}) =\n{}", real_text(t), matrix_text(m));
                }
                done(out.trim_end().to_string())
            }
        }
        Command::Expat => {
            let a = p.square()?;
            let t = p.t()?;
            let e = match cli.method {
                Method::Eigen => Propagator::new(a)?.exp_at(t),
                Method::Series => exp_series(a, t, p.tol.unwrap_or(SERIES_TOL))?,
            };
            done(if json {
                matrix_to_json(&e).to_string()
            } else {
                matrix_text(&e).trim_end().to_string()
            })
        }
        Command::Solve => {
            let x = solve_ivp(p.square()?, p.t0, p.x0()?, p.t()?)?;
            done(if json {
                vector_to_json(&x).to_string()
            } else {
                vector_text(&x)
            })
        }
        Command::DiagSolve => {
            let coeffs = p
                .file
                .diagonal
                .as_ref()
                .ok_or_else(|| input_error("diag-solve needs a \"diagonal\" field"))?;
            let x = solve_diagonal(coeffs, p.t0, p.x0()?, p.t()?)?;
            done(if json {
                vector_to_json(&x).to_string()
            } else {
                vector_text(&x)
            })
        }
        Command::Check => {
            let (gates, ok) = run_check(&p)?;
            let code = if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
            let out = if json {
                let rows: Vec<Value> = gates
                    .iter()
                    .map(|g| json!({ "name": g.name, "value": g.value, "threshold": g.threshold, "pass": g.pass() }))
                    .collect();
                json!({ "checks": rows, "pass": ok }).to_string()
            } else {
                let mut out = format!(
                    "{:<18} {:>12} {:>14}  result\n",
                    "check", "value", "threshold"
                );
                for g in &gates {
                    let bound = if g.lower_bound { ">" } else { "<=" };
                    let _ = writeln!(
                        out,
                        "{:<18} {:>12.3e} {:>2} {:>11.1e}  {}",
                        g.name,
                        g.value,
                        bound,
                        g.threshold,
                        if g.pass() { "PASS" } else { "FAIL" }
                    );
                }
                out.push_str(if ok {
                    "all checks passed"
                } else {
                    "some checks FAILED"
                });
                out
            };
            Ok((out, code))
        }
        Command::Liouville => {
            let t1 = p.t.unwrap_or(p.t0 + 1.0);
            let rep = liouville_check(p.square()?, p.t0, t1)?;
            if json {
                done(json!({ "factor": rep.factor, "max_rel_err": rep.max_rel_err, "re_trace": rep.re_trace }).to_string())
            } else {
                let factor = match rep.factor {
                    Some(f) => real_text(f),
                    None => "undetermined (Re tr A is zero)".into(),
                };
                done(format!(
                    "factor: {factor}\nfit residual: {:.3e}\nRe tr A: {}",
                    rep.max_rel_err,
                    real_text(rep.re_trace)
                ))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, code)) => {
            println!("{out}");
            code
        }
        Err(f) => {
            eprintln!("qde: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
