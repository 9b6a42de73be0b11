//! Frames in the module: frame operator, sharp bounds and the Parseval
//! (normalized tight) property, together with its kernel-side characterization
//! `K(s, t) = Σ_j f_j(s) f_j(t)*`. The product order matters off the
//! commutative case: `⟨k_s, f_j⟩⟨f_j, k_t⟩ = f_j(s) f_j(t)*`.
//!
//! Bounds are spectral: `C⟨x,x⟩ ≤ Σ_j ⟨x,x_j⟩⟨x_j,x⟩ ≤ D⟨x,x⟩` for all `x`
//! exactly when `C ≤ T ≤ D` for the frame operator `T`, and the trace
//! realization preserves the spectrum of `T`.

use std::sync::Arc;

use crate::cstar::Element;
use crate::error::{Error, Result};
use crate::kernel::FeatureFamily;
use crate::linalg::{self, CMatrix};
use crate::operators::AdjointableOp;
use crate::space::{ModuleSpace, ModuleVector};

#[derive(Clone, Debug)]
pub struct Frame {
    space: Arc<ModuleSpace>,
    members: Vec<ModuleVector>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl Frame {
    pub fn new(space: &Arc<ModuleSpace>, members: Vec<ModuleVector>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Shape("frame has no members".into()));
        }
        if members.iter().any(|m| !Arc::ptr_eq(m.space(), space)) {
            return Err(Error::SpaceMismatch);
        }
        Ok(Frame { space: space.clone(), members })
    }

    pub fn space(&self) -> &Arc<ModuleSpace> {
        &self.space
    }

    pub fn members(&self) -> &[ModuleVector] {
        &self.members
    }

    /// Pointwise adjoints `s ↦ f_j(s)*` of the members, so that the feature
    /// kernel `Σ_j e_j(s)* e_j(t)` is `Σ_j f_j(s) f_j(t)*`.
    pub fn as_features(&self) -> FeatureFamily {
        let k = self.space.kernel();
        FeatureFamily::new(
            k.points().clone(),
            k.signature().clone(),
            self.members.iter().map(|m| m.values().iter().map(Element::star).collect()).collect(),
        )
        .expect("member values are complete")
    }
}

/// `x ↦ Σ_j x_j ⟨x_j, x⟩`.
pub fn frame_operator(frame: &Frame) -> AdjointableOp {
    frame.members.iter().fold(AdjointableOp::zero(&frame.space), |acc, x| {
        acc.add(&AdjointableOp::rank_one(x, x).expect("same space")).expect("same space")
    })
}

fn realized_spectrum(frame: &Frame) -> Vec<(usize, Vec<f64>, CMatrix)> {
    let t = frame_operator(frame);
    (0..frame.space.signature().len())
        .map(|k| {
            let (vals, vecs) = linalg::hermitian_eigen(&t.realized(k));
            (k, vals, vecs)
        })
        .collect()
}

/// Sharp bounds: extreme eigenvalues of the realized frame operator.
pub fn frame_bounds(frame: &Frame) -> Result<FrameBounds> {
    if frame.space.hilbert_realization().dimension() == 0 {
        return Err(Error::EmptyRealization);
    }
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for (_, vals, _) in realized_spectrum(frame) {
        if let (Some(&lo), Some(&hi)) = (vals.first(), vals.last()) {
            lower = lower.min(lo);
            upper = upper.max(hi);
        }
    }
    Ok(FrameBounds { lower, upper })
}

/// A module element attaining the lower frame bound: the realization
/// eigenvector of the smallest eigenvalue pulled back to coefficients.
pub fn lower_bound_witness(frame: &Frame) -> Result<ModuleVector> {
    let spectrum = realized_spectrum(frame);
    let (k, _, vecs) = spectrum
        .iter()
        .filter(|(_, vals, _)| !vals.is_empty())
        .min_by(|a, b| a.1[0].total_cmp(&b.1[0]))
        .ok_or(Error::EmptyRealization)?;
    let r = frame.space.hilbert_realization();
    let column = r.basis(*k) * vecs.column(0);
    let mut coeffs: Vec<CMatrix> = (0..frame.space.signature().len())
        .map(|j| frame.members[0].coeffs(j) * linalg::c(0.0))
        .collect();
    coeffs[*k].set_column(0, &column);
    Ok(frame.space.from_coeffs(coeffs))
}

/// Frame operator equals the identity on the realization within `tol`.
pub fn is_parseval(frame: &Frame, tol: f64) -> bool {
    let t = frame_operator(frame);
    (0..frame.space.signature().len()).all(|k| {
        let m = t.realized(k);
        let n = m.nrows();
        linalg::spectral_norm(&(m - CMatrix::identity(n, n))) <= tol
    })
}

/// `‖K(s, t) − Σ_j f_j(s) f_j(t)*‖ ≤ tol (1 + ‖K‖)` for all `s, t`.
pub fn papadakis_identity_check(frame: &Frame, tol: f64) -> bool {
    let kernel = frame.space.kernel();
    let slack = tol * (1.0 + kernel.gram_norm());
    let values: Vec<Vec<Element>> = frame.members.iter().map(ModuleVector::values).collect();
    let n = kernel.len();
    (0..n).all(|s| {
        (0..n).all(|t| {
            let sum = values
                .iter()
                .fold(Element::zero(kernel.signature()), |acc, f| &acc + &(&f[s] * &f[t].star()));
            (kernel.get(s, t) - &sum).norm() <= slack
        })
    })
}

/// `{T^{-1/2} x_j}`; requires the lower bound to exceed `tol`.
pub fn canonical_tight(frame: &Frame, tol: f64) -> Result<Frame> {
    let bounds = frame_bounds(frame)?;
    if bounds.lower <= tol {
        return Err(Error::NotAFrame { lower: bounds.lower });
    }
    let t = frame_operator(frame);
    let r = frame.space.hilbert_realization();
    let mats = (0..frame.space.signature().len())
        .map(|k| {
            let inv_root = linalg::hermitian_apply(&t.realized(k), |x| 1.0 / x.sqrt());
            r.basis(k) * inv_root * r.coordinate_map(k)
        })
        .collect();
    let root = AdjointableOp::from_matrices(&frame.space, mats);
    let members = frame.members.iter().map(|x| root.apply(x)).collect::<Result<_>>()?;
    Frame::new(&frame.space, members)
}
