//! Exact tensor calculus and a finite-dimensional Hilbert-complex toolbox for
//! the elasticity complex
//!
//! ```text
//!   vector fields --symGrad--> sym. tensors --RotRot^T--> sym. tensors --Div--> vector fields
//! ```
//!
//! on the unit box with essential boundary conditions on an arbitrary subset
//! of its six faces.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor_algebra`]: pointwise algebra on 3-vectors and 3x3 tensors
//!   (`sym`, `skw`, `dev`, `tr`, `spn`, `spn^-1`), generic over the scalar.
//! - [`poly_calculus`]: exact trivariate polynomials over the rationals and the
//!   differential operators `grad`, `rot`, `div`, `Grad`, `Rot`, `Div`,
//!   `symGrad` and `RotRot^T`.
//! - [`identity_suite`]: randomized exact verification of the classical
//!   identities between these operators.
//! - [`fa_toolbox`]: adjoints, kernels, cohomology, Helmholtz decompositions,
//!   Friedrichs/Poincare constants and regular decomposition operators of a
//!   finite complex of weighted Euclidean spaces.
//! - [`elasticity_assembly`]: exact assembly of a conforming polynomial
//!   elasticity complex on the box.
//! - [`reports`]: configuration and report generation shared with the CLI.

pub mod elasticity_assembly;
pub mod error;
pub mod fa_toolbox;
pub mod identity_suite;
pub mod poly_calculus;
pub mod reports;
pub mod tensor_algebra;

pub use error::{Error, Result};

/// Exact rational scalar used by every verification path.
pub type Rational = num::BigRational;

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
