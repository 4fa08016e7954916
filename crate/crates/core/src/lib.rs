//! Quaternion linear algebra and linear quaternion-valued differential equations.
//!
//! - [`quat`]: scalar quaternions, exponential, similarity, literal grammar.
//! - [`linalg`]: quaternion and complex matrices, the complex adjoint `φ`, solves.
//! - [`pdet`]: permutation determinant, double determinant, Wronskian.
//! - [`spectra`]: right eigenvalues, eigenvectors and Jordan chains via `φ`.
//! - [`qde`]: fundamental matrices, `exp(At)`, IVPs, diagonal time-varying systems.
//! - [`oracle`]: RK4, finite-difference residuals and a cofactor determinant
//!   used as independent ground truth.
//! - [`format`]: JSON representations shared with the command-line tool.

pub mod error;
pub mod format;
pub mod linalg;
pub mod oracle;
pub mod pdet;
pub mod qde;
pub mod quat;
pub mod spectra;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, QMatrix, QVector};
pub use quat::Quaternion;
