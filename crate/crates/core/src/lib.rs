//! Reproducing kernel Hilbert C*-modules over finite-dimensional C*-algebras.
//!
//! The coefficient algebra is `A = M_{n_1}(ℂ) ⊕ … ⊕ M_{n_K}(ℂ)` ([`cstar`]).
//! A positive definite kernel `K: S × S → A` on a finite set ([`kernel`])
//! generates a Hilbert `A`-module of `A`-valued functions on `S` spanned by
//! the sections `k_s = K(·, s)` ([`space`]). On top of it sit adjointable
//! operators, multiplication operators and Berezin transforms
//! ([`operators`]), frames and the Parseval/kernel identity ([`frames`]), and
//! the ψ-contraction multiplier construction ([`papadakis`]).
//!
//! ```
//! use rkhcm::{Element, Kernel, ModuleSpace};
//!
//! let space = ModuleSpace::new(Kernel::scalar(&[&[2.0, 1.0], &[1.0, 2.0]]), 1e-9).unwrap();
//! let fit = space
//!     .minimal_norm_interpolant(&[0], &[Element::real_diagonal(&[1.0])], 1e-8)
//!     .unwrap();
//! assert!((fit.norm - 0.5f64.sqrt()).abs() < 1e-12);
//! ```

pub mod cstar;
pub mod error;
pub mod frames;
pub mod kernel;
pub mod linalg;
pub mod operators;
pub mod papadakis;
pub mod random;
pub mod space;

pub use cstar::{block_psd, Element, Signature};
pub use error::{Error, Result};
pub use frames::{Frame, FrameBounds};
pub use kernel::{FeatureFamily, Kernel, KernelReport, PointSet};
pub use operators::{AdjointableOp, MultiplierSymbol};
pub use papadakis::PsiContractionInstance;
pub use space::{HilbertRealization, ModuleSpace, ModuleVector};

/// Default tolerances.
pub mod tol {
    pub const PSD: f64 = 1e-9;
    pub const RESIDUAL: f64 = 1e-8;
    pub const INVERT: f64 = 1e-8;
}
