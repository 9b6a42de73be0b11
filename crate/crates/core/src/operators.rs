//! Adjointable operators on the module, multiplication operators and the
//! Berezin transform.
//!
//! An operator is determined by its images `T(k_s)`. Internally, summand `k`
//! of `T` is the `(|S|·n_k)`-square matrix acting on stacked coefficients,
//! whose block column `s` holds the coefficients of `T(k_s)`.

use std::sync::Arc;

use crate::cstar::Element;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::space::{ModuleSpace, ModuleVector};

#[derive(Clone, Debug)]
pub struct AdjointableOp {
    space: Arc<ModuleSpace>,
    mats: Vec<CMatrix>,
}

impl AdjointableOp {
    /// Builds `T` from the images `T(k_s)`, one per point. The action must map
    /// null coefficient vectors to null vectors, within `tol`.
    pub fn from_action(space: &Arc<ModuleSpace>, images: &[ModuleVector], tol: f64) -> Result<Self> {
        if images.len() != space.len() {
            return Err(Error::Shape(format!("{} images for {} points", images.len(), space.len())));
        }
        if images.iter().any(|v| !Arc::ptr_eq(v.space(), space)) {
            return Err(Error::SpaceMismatch);
        }
        let sig = space.signature();
        let mats = (0..sig.len())
            .map(|k| {
                let n = sig.size(k);
                let mut m = CMatrix::zeros(space.len() * n, space.len() * n);
                for (s, v) in images.iter().enumerate() {
                    m.view_mut((0, s * n), (space.len() * n, n)).copy_from(v.coeffs(k));
                }
                m
            })
            .collect();
        let op = AdjointableOp { space: space.clone(), mats };
        let residual = op.null_leak();
        if residual > tol * (1.0 + op.scale_hint()) {
            return Err(Error::InconsistentOperator { residual });
        }
        Ok(op)
    }

    pub(crate) fn from_matrices(space: &Arc<ModuleSpace>, mats: Vec<CMatrix>) -> Self {
        AdjointableOp { space: space.clone(), mats }
    }

    fn null_leak(&self) -> f64 {
        let r = self.space.hilbert_realization();
        (0..self.mats.len())
            .map(|k| linalg::spectral_norm(&(self.space.gram(k) * &self.mats[k] * r.null_basis(k))))
            .fold(0.0, f64::max)
    }

    fn scale_hint(&self) -> f64 {
        (0..self.mats.len())
            .map(|k| linalg::spectral_norm(&(self.space.gram(k) * &self.mats[k])))
            .fold(0.0, f64::max)
    }

    pub fn identity(space: &Arc<ModuleSpace>) -> Self {
        let mats = space
            .signature()
            .blocks()
            .iter()
            .map(|&n| CMatrix::identity(space.len() * n, space.len() * n))
            .collect();
        AdjointableOp { space: space.clone(), mats }
    }

    pub fn zero(space: &Arc<ModuleSpace>) -> Self {
        Self::identity(space).scale(C64::new(0.0, 0.0))
    }

    /// `x ↦ u ⟨v, x⟩`.
    pub fn rank_one(u: &ModuleVector, v: &ModuleVector) -> Result<Self> {
        if !Arc::ptr_eq(u.space(), v.space()) {
            return Err(Error::SpaceMismatch);
        }
        let space = u.space();
        let mats = (0..space.signature().len())
            .map(|k| u.coeffs(k) * v.coeffs(k).adjoint() * space.gram(k))
            .collect();
        Ok(AdjointableOp { space: space.clone(), mats })
    }

    pub fn space(&self) -> &Arc<ModuleSpace> {
        &self.space
    }

    /// Coefficient-space matrix of summand `k`.
    pub fn matrix(&self, k: usize) -> &CMatrix {
        &self.mats[k]
    }

    /// `T(Σ k_s a_s) = Σ T(k_s) a_s`.
    pub fn apply(&self, xi: &ModuleVector) -> Result<ModuleVector> {
        if !Arc::ptr_eq(xi.space(), &self.space) {
            return Err(Error::SpaceMismatch);
        }
        let coeffs = self.mats.iter().enumerate().map(|(k, m)| m * xi.coeffs(k)).collect();
        Ok(self.space.from_coeffs(coeffs))
    }

    /// `T(k_s)`.
    pub fn action(&self, s: usize) -> ModuleVector {
        self.apply(&self.space.section(s)).expect("own space")
    }

    /// Matrix of summand `k` in orthonormal realization coordinates.
    pub fn realized(&self, k: usize) -> CMatrix {
        let r = self.space.hilbert_realization();
        r.coordinate_map(k) * &self.mats[k] * r.basis(k)
    }

    /// `T*` with `⟨T*ξ, η⟩ = ⟨ξ, Tη⟩`, computed through the trace realization.
    pub fn adjoint(&self) -> AdjointableOp {
        let r = self.space.hilbert_realization();
        let mats = (0..self.mats.len())
            .map(|k| r.basis(k) * self.realized(k).adjoint() * r.coordinate_map(k))
            .collect();
        AdjointableOp { space: self.space.clone(), mats }
    }

    fn zip(&self, other: &AdjointableOp, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<AdjointableOp> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        let mats = self.mats.iter().zip(&other.mats).map(|(a, b)| f(a, b)).collect();
        Ok(AdjointableOp { space: self.space.clone(), mats })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AdjointableOp) -> Result<AdjointableOp> {
        self.zip(other, |a, b| a * b)
    }

    pub fn add(&self, other: &AdjointableOp) -> Result<AdjointableOp> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &AdjointableOp) -> Result<AdjointableOp> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, z: C64) -> AdjointableOp {
        AdjointableOp { space: self.space.clone(), mats: self.mats.iter().map(|m| m * z).collect() }
    }

    /// Largest `‖T(k_s) − S(k_s)‖` over all points.
    pub fn distance(&self, other: &AdjointableOp) -> Result<f64> {
        let d = self.sub(other)?;
        Ok((0..self.space.len()).map(|s| d.action(s).norm()).fold(0.0, f64::max))
    }

    /// Operator norm, from the realized matrices.
    pub fn norm(&self) -> f64 {
        (0..self.mats.len()).map(|k| linalg::spectral_norm(&self.realized(k))).fold(0.0, f64::max)
    }
}

/// A function `f: S → A` considered as a candidate left multiplier.
#[derive(Clone, Debug)]
pub struct MultiplierSymbol {
    space: Arc<ModuleSpace>,
    values: Vec<Element>,
}

impl MultiplierSymbol {
    pub fn new(space: &Arc<ModuleSpace>, values: Vec<Element>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Shape(format!("symbol has {} values, expected {}", values.len(), space.len())));
        }
        for v in &values {
            space.signature().check(v.signature())?;
        }
        Ok(MultiplierSymbol { space: space.clone(), values })
    }

    pub fn constant(space: &Arc<ModuleSpace>, a: &Element) -> Result<Self> {
        Self::new(space, vec![a.clone(); space.len()])
    }

    pub fn space(&self) -> &Arc<ModuleSpace> {
        &self.space
    }

    pub fn values(&self) -> &[Element] {
        &self.values
    }

    pub fn value(&self, s: usize) -> &Element {
        &self.values[s]
    }

    /// `λ f + g`, pointwise.
    pub fn combine(&self, lambda: C64, other: &MultiplierSymbol) -> MultiplierSymbol {
        let values = self.values.iter().zip(&other.values).map(|(f, g)| &f.scale(lambda) + g).collect();
        MultiplierSymbol { space: self.space.clone(), values }
    }

    /// Pointwise product `f g`.
    pub fn product(&self, other: &MultiplierSymbol) -> MultiplierSymbol {
        let values = self.values.iter().zip(&other.values).map(|(f, g)| f * g).collect();
        MultiplierSymbol { space: self.space.clone(), values }
    }
}

/// `M_f`, obtained by resolving each `t ↦ f(t) K(t, s)` into the span.
pub fn multiplication_operator(f: &MultiplierSymbol, tol: f64) -> Result<AdjointableOp> {
    let space = f.space();
    let all: Vec<usize> = (0..space.len()).collect();
    let mut images = Vec::with_capacity(space.len());
    let mut worst: Option<(usize, f64)> = None;
    for s in 0..space.len() {
        let values: Vec<Element> = all.iter().map(|&t| f.value(t) * space.kernel().get(t, s)).collect();
        let m = space.membership(&all, &values, &all, tol)?;
        if !m.member && worst.is_none_or(|(_, r)| m.residual > r) {
            worst = Some((s, m.residual));
        }
        images.push(space.vector(&m.coefficients)?);
    }
    if let Some(worst) = worst {
        return Err(Error::NotAMultiplier {
            point: space.kernel().points().label(worst.0).to_string(),
            residual: worst.1,
        });
    }
    let sig = space.signature();
    let mats = (0..sig.len())
        .map(|k| {
            let n = sig.size(k);
            let mut m = CMatrix::zeros(space.len() * n, space.len() * n);
            for (s, v) in images.iter().enumerate() {
                m.view_mut((0, s * n), (space.len() * n, n)).copy_from(v.coeffs(k));
            }
            m
        })
        .collect();
    Ok(AdjointableOp::from_matrices(space, mats))
}

/// Checks `M_f*(k_s) = k_s f(s)*` at every point.
pub fn multiplier_adjoint_check(f: &MultiplierSymbol, tol: f64) -> Result<bool> {
    let adj = multiplication_operator(f, tol)?.adjoint();
    let space = f.space();
    for s in 0..space.len() {
        let expected = space.section(s).mul_right(&f.value(s).star())?;
        if adj.action(s).sub(&expected)?.norm() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `B_T(s) = ⟨k_s, T(k_s)⟩ K(s, s)⁻¹`.
pub fn berezin(t: &AdjointableOp, s: usize, eps: f64) -> Result<Element> {
    let space = t.space();
    if s >= space.len() {
        return Err(Error::UnknownPoint(format!("#{s}")));
    }
    let inv = space.kernel().get(s, s).invert(eps)?;
    let ks = space.section(s);
    Ok(&ks.inner_product(&t.apply(&ks)?)? * &inv)
}

#[derive(Clone, Debug)]
pub struct SymbolRecovery {
    pub symbol: MultiplierSymbol,
    pub is_multiplication: bool,
    /// Largest `‖T(k_s) − M_f(k_s)‖`, or `None` when `f` is not a multiplier.
    pub residual: Option<f64>,
}

/// Candidate symbol `f(s) = B_T(s)` (zero where `K(s, s)` is not invertible
/// within `eps`), together with a check that `T = M_f`.
pub fn recover_symbol(t: &AdjointableOp, eps: f64, tol: f64) -> Result<SymbolRecovery> {
    let space = t.space();
    let zero = Element::zero(space.signature());
    let mut values = Vec::with_capacity(space.len());
    for s in 0..space.len() {
        match berezin(t, s, eps) {
            Ok(v) => values.push(v),
            Err(Error::NotInvertible { .. }) => values.push(zero.clone()),
            Err(e) => return Err(e),
        }
    }
    let symbol = MultiplierSymbol::new(space, values)?;
    let residual = match multiplication_operator(&symbol, tol) {
        Ok(m) => Some(t.distance(&m)?),
        Err(Error::NotAMultiplier { .. }) => None,
        Err(e) => return Err(e),
    };
    let is_multiplication = residual.is_some_and(|r| r <= tol);
    Ok(SymbolRecovery { symbol, is_multiplication, residual })
}
