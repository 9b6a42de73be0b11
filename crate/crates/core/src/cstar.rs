//! Finite-dimensional C*-algebras `A = M_{n_1}(ℂ) ⊕ … ⊕ M_{n_K}(ℂ)`.
//!
//! Every finite-dimensional C*-algebra is of this form, so elements are stored
//! as block-diagonal tuples of dense complex matrices. Positivity, moduli and
//! norms reduce to Hermitian eigenvalue problems on the individual blocks.
//! Tolerances are relative: a check with tolerance `tol` on an element `a`
//! accepts deviations up to `tol * (1 + ‖a‖)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Block sizes `(n_1, …, n_K)` of the direct summands.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature(Vec<usize>);

impl Signature {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidSignature("no summands".into()));
        }
        if blocks.contains(&0) {
            return Err(Error::InvalidSignature(format!("zero block size in {blocks:?}")));
        }
        Ok(Signature(blocks))
    }

    /// The complex numbers, signature `[1]`.
    pub fn scalar() -> Self {
        Signature(vec![1])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn size(&self, k: usize) -> usize {
        self.0[k]
    }

    /// True when every summand is one-dimensional (a commutative algebra).
    pub fn is_commutative(&self) -> bool {
        self.0.iter().all(|&n| n == 1)
    }

    /// Signature of `A ⊗ B`: summand pairs in lexicographic order.
    pub fn tensor(&self, other: &Signature) -> Signature {
        let mut blocks = Vec::with_capacity(self.len() * other.len());
        for &n in &self.0 {
            for &m in &other.0 {
                blocks.push(n * m);
            }
        }
        Signature(blocks)
    }

    pub(crate) fn check(&self, other: &Signature) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SignatureMismatch { left: self.0.clone(), right: other.0.clone() })
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Binary and unary operations accepted by [`arithmetic`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArithOp {
    Add,
    Multiply,
    Star,
    Scale(C64),
}

/// An element of `A`, one square complex block per summand.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    sig: Signature,
    blocks: Vec<CMatrix>,
}

impl Element {
    pub fn from_blocks(sig: Signature, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != sig.len() {
            return Err(Error::Shape(format!(
                "expected {} blocks for signature {sig}, got {}",
                sig.len(),
                blocks.len()
            )));
        }
        for (k, b) in blocks.iter().enumerate() {
            let n = sig.size(k);
            if b.shape() != (n, n) {
                return Err(Error::Shape(format!(
                    "block {k} has shape {:?}, expected ({n}, {n})",
                    b.shape()
                )));
            }
        }
        Ok(Element { sig, blocks })
    }

    pub fn zero(sig: &Signature) -> Self {
        let blocks = sig.blocks().iter().map(|&n| CMatrix::zeros(n, n)).collect();
        Element { sig: sig.clone(), blocks }
    }

    pub fn unit(sig: &Signature) -> Self {
        Self::scalar(sig, C64::new(1.0, 0.0))
    }

    /// `z · 1`.
    pub fn scalar(sig: &Signature, z: C64) -> Self {
        let blocks = sig.blocks().iter().map(|&n| CMatrix::identity(n, n) * z).collect();
        Element { sig: sig.clone(), blocks }
    }

    /// Element of the one-block algebra `M_n` from a row-major slice of reals.
    pub fn real_matrix(n: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), n * n, "expected {} entries", n * n);
        let m = CMatrix::from_row_iterator(n, n, rows.iter().map(|&x| linalg::c(x)));
        Element { sig: Signature(vec![n]), blocks: vec![m] }
    }

    /// Element of `ℂ ⊕ … ⊕ ℂ` (or `ℂ` when `values.len() == 1`).
    pub fn real_diagonal(values: &[f64]) -> Self {
        let blocks = values
            .iter()
            .map(|&x| CMatrix::from_element(1, 1, linalg::c(x)))
            .collect();
        Element { sig: Signature(vec![1; values.len()]), blocks }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    fn zip(&self, other: &Element, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Element> {
        self.sig.check(&other.sig)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect();
        Ok(Element { sig: self.sig.clone(), blocks })
    }

    fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Element {
        Element { sig: self.sig.clone(), blocks: self.blocks.iter().map(f).collect() }
    }

    pub fn checked_add(&self, other: &Element) -> Result<Element> {
        self.zip(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Element) -> Result<Element> {
        self.zip(other, |a, b| a - b)
    }

    pub fn checked_mul(&self, other: &Element) -> Result<Element> {
        self.zip(other, |a, b| a * b)
    }

    /// Conjugate transpose of every block.
    pub fn star(&self) -> Element {
        self.map(|b| b.adjoint())
    }

    pub fn scale(&self, z: C64) -> Element {
        self.map(|b| b * z)
    }

    /// C*-norm: largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(linalg::spectral_norm).fold(0.0, f64::max)
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        let slack = tol * (1.0 + self.norm());
        self.blocks.iter().all(|b| {
            let skew = linalg::spectral_norm(&(b - b.adjoint()));
            skew <= slack && linalg::min_eigenvalue(b) >= -slack
        })
    }

    /// `|a| = (a*a)^{1/2}`; tiny negative eigenvalues of `a*a` are clamped to zero.
    pub fn modulus(&self) -> Element {
        self.map(|b| linalg::hermitian_apply(&(b.adjoint() * b), |x| x.max(0.0).sqrt()))
    }

    /// Blockwise inverse; fails when some block's smallest singular value is
    /// below `eps * (1 + ‖a‖)`.
    pub fn invert(&self, eps: f64) -> Result<Element> {
        let threshold = eps * (1.0 + self.norm());
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (k, b) in self.blocks.iter().enumerate() {
            let sigma = linalg::singular_values(b).into_iter().fold(f64::INFINITY, f64::min);
            if sigma < threshold {
                return Err(Error::NotInvertible { block: k, sigma });
            }
            let inv = b.clone().try_inverse().ok_or(Error::NotInvertible { block: k, sigma })?;
            blocks.push(inv);
        }
        Ok(Element { sig: self.sig.clone(), blocks })
    }

    /// Every block lies within `tol` of a multiple of its identity.
    pub fn is_central(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| {
            let n = b.nrows();
            let mean = b.trace() / linalg::c(n as f64);
            linalg::spectral_norm(&(b - CMatrix::identity(n, n) * mean)) <= tol
        })
    }

    /// `a ⊗ b` in `A ⊗ B`; blocks are Kronecker products in lexicographic order.
    pub fn tensor(&self, other: &Element) -> Element {
        let mut blocks = Vec::with_capacity(self.blocks.len() * other.blocks.len());
        for a in &self.blocks {
            for b in &other.blocks {
                blocks.push(a.kronecker(b));
            }
        }
        Element { sig: self.sig.tensor(&other.sig), blocks }
    }

    pub fn approx_eq(&self, other: &Element, tol: f64) -> bool {
        match self.checked_sub(other) {
            Ok(d) => d.norm() <= tol,
            Err(_) => false,
        }
    }
}

/// Dispatches one of the basic algebra operations; `b` is ignored for
/// [`ArithOp::Star`] and [`ArithOp::Scale`].
pub fn arithmetic(a: &Element, b: &Element, op: ArithOp) -> Result<Element> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Multiply => a.checked_mul(b),
        ArithOp::Star => Ok(a.star()),
        ArithOp::Scale(z) => Ok(a.scale(z)),
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.checked_add(rhs).expect("signature mismatch in add")
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.checked_sub(rhs).expect("signature mismatch in sub")
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        self.checked_mul(rhs).expect("signature mismatch in mul")
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.map(|b| -b)
    }
}

/// Realizes summand `k` of an `rows × cols` array of elements as one dense
/// `(rows·n_k) × (cols·n_k)` complex matrix.
pub fn realize<'a>(
    rows: usize,
    cols: usize,
    k: usize,
    n: usize,
    entry: impl Fn(usize, usize) -> &'a Element,
) -> CMatrix {
    let mut m = CMatrix::zeros(rows * n, cols * n);
    for i in 0..rows {
        for j in 0..cols {
            m.view_mut((i * n, j * n), (n, n)).copy_from(entry(i, j).block(k));
        }
    }
    m
}

/// Positivity of a square array `(M_ij)` in `M_n(A)`, decided on the realized
/// complex matrix of every summand.
pub fn block_psd(array: &[Vec<Element>], tol: f64) -> Result<bool> {
    let n = array.len();
    if n == 0 {
        return Ok(true);
    }
    if array.iter().any(|row| row.len() != n) {
        return Err(Error::Shape("block array is not square".into()));
    }
    let sig = array[0][0].signature().clone();
    for row in array {
        for e in row {
            sig.check(e.signature())?;
        }
    }
    Ok((0..sig.len()).all(|k| {
        let m = realize(n, n, k, sig.size(k), |i, j| &array[i][j]);
        realized_psd(&m, tol)
    }))
}

/// Hermitian within `tol (1 + ‖m‖)` and no eigenvalue below `-tol (1 + ‖m‖)`.
pub(crate) fn realized_psd(m: &CMatrix, tol: f64) -> bool {
    let slack = tol * (1.0 + linalg::spectral_norm(m));
    linalg::spectral_norm(&(m - m.adjoint())) <= slack && linalg::min_eigenvalue(m) >= -slack
}
