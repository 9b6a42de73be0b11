//! The reproducing kernel Hilbert module spanned by the kernel sections `k_s`.
//!
//! Over a finite point set the `A`-linear span of `{k_s}` is already complete,
//! so a module element is stored as a coefficient table `ξ = Σ_s k_s a_s`.
//! Every computation splits over the summands `M_{n_k}` of `A`: the
//! coefficients of summand `k` form a `(|S|·n_k) × n_k` complex matrix `B_k`
//! and the inner product is `⟨ξ, η⟩_k = A_k* G_k B_k` with `G_k` the realized
//! Gram matrix. Coefficient vectors in the null space of `G_k` represent the
//! zero element.

use std::sync::Arc;

use crate::cstar::{Element, Signature};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{self, CMatrix, C64};

#[derive(Debug)]
pub struct ModuleSpace {
    kernel: Kernel,
    grams: Vec<CMatrix>,
    realization: HilbertRealization,
}

/// Orthonormal coordinates for the quotient of the coefficient space by the
/// null space, with scalar product `(ξ, η) = Σ_k tr ⟨ξ, η⟩_k`.
#[derive(Clone, Debug)]
pub struct HilbertRealization {
    summands: Vec<SummandBasis>,
}

#[derive(Clone, Debug)]
struct SummandBasis {
    multiplicity: usize,
    /// Columns are coefficient vectors with orthonormal images.
    basis: CMatrix,
    /// Coefficient vector → coordinates.
    coords: CMatrix,
    null: CMatrix,
}

impl HilbertRealization {
    fn new(grams: &[CMatrix], sig: &Signature) -> Self {
        let summands = grams
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let (values, vectors) = linalg::hermitian_eigen(g);
                let lmax = values.iter().copied().fold(0.0, f64::max);
                let cut = linalg::RANK_CUTOFF * lmax;
                let keep: Vec<usize> = (0..values.len()).filter(|&i| lmax > 0.0 && values[i] > cut).collect();
                let drop: Vec<usize> = (0..values.len()).filter(|i| !keep.contains(i)).collect();
                let n = g.nrows();
                let mut basis = CMatrix::zeros(n, keep.len());
                let mut coords = CMatrix::zeros(keep.len(), n);
                for (c, &i) in keep.iter().enumerate() {
                    let root = values[i].sqrt();
                    basis.set_column(c, &(vectors.column(i) / linalg::c(root)));
                    coords.set_row(c, &(vectors.column(i).adjoint() * linalg::c(root)));
                }
                let mut null = CMatrix::zeros(n, drop.len());
                for (c, &i) in drop.iter().enumerate() {
                    null.set_column(c, &vectors.column(i));
                }
                SummandBasis { multiplicity: sig.size(k), basis, coords, null }
            })
            .collect();
        HilbertRealization { summands }
    }

    /// Real dimension count `Σ_k n_k · rank(G_k)`.
    pub fn dimension(&self) -> usize {
        self.summands.iter().map(|s| s.multiplicity * s.basis.ncols()).sum()
    }

    pub fn rank(&self, k: usize) -> usize {
        self.summands[k].basis.ncols()
    }

    /// Basis of summand `k` as coefficient columns.
    pub fn basis(&self, k: usize) -> &CMatrix {
        &self.summands[k].basis
    }

    /// Maps coefficient vectors of summand `k` to orthonormal coordinates.
    pub fn coordinate_map(&self, k: usize) -> &CMatrix {
        &self.summands[k].coords
    }

    /// Coefficient vectors `b` with `G_k b = 0`.
    pub fn null_basis(&self, k: usize) -> &CMatrix {
        &self.summands[k].null
    }

    /// Coordinates of `ξ`, one `rank_k × n_k` matrix per summand.
    pub fn coordinates(&self, xi: &ModuleVector) -> Vec<CMatrix> {
        self.summands.iter().zip(&xi.coeffs).map(|(s, b)| &s.coords * b).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ModuleVector {
    space: Arc<ModuleSpace>,
    coeffs: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
pub struct Membership {
    /// Coefficients over the basis points, in the order given.
    pub coefficients: Vec<Element>,
    pub residual: f64,
    pub member: bool,
}

#[derive(Clone, Debug)]
pub struct Interpolant {
    pub f: ModuleVector,
    /// `‖⟨b̄, ā⟩‖^{1/2}`.
    pub norm: f64,
    pub coefficients: Vec<Element>,
    pub residual: f64,
}

impl ModuleSpace {
    /// Builds the module of a positive definite kernel.
    pub fn new(kernel: Kernel, tol: f64) -> Result<Arc<Self>> {
        if !kernel.validate(tol).positive_definite {
            return Err(Error::NotPositiveDefinite);
        }
        let grams: Vec<CMatrix> = (0..kernel.signature().len()).map(|k| kernel.gram(k)).collect();
        let realization = HilbertRealization::new(&grams, kernel.signature());
        Ok(Arc::new(ModuleSpace { kernel, grams, realization }))
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn signature(&self) -> &Signature {
        self.kernel.signature()
    }

    pub fn len(&self) -> usize {
        self.kernel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernel.is_empty()
    }

    pub fn gram(&self, k: usize) -> &CMatrix {
        &self.grams[k]
    }

    pub fn hilbert_realization(&self) -> &HilbertRealization {
        &self.realization
    }

    fn summands(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.signature().blocks().iter().copied().enumerate()
    }

    pub fn zero(self: &Arc<Self>) -> ModuleVector {
        let coeffs = self.summands().map(|(_, n)| CMatrix::zeros(self.len() * n, n)).collect();
        ModuleVector { space: self.clone(), coeffs }
    }

    /// The kernel section `k_s`.
    pub fn section(self: &Arc<Self>, s: usize) -> ModuleVector {
        let mut v = self.zero();
        for (k, n) in self.summands() {
            v.coeffs[k].view_mut((s * n, 0), (n, n)).fill_with_identity();
        }
        v
    }

    /// `Σ_s k_s a_s` from a full coefficient table.
    pub fn vector(self: &Arc<Self>, coefficients: &[Element]) -> Result<ModuleVector> {
        let all: Vec<usize> = (0..self.len()).collect();
        self.vector_on(&all, coefficients)
    }

    /// `Σ_i k_{p_i} a_i`; repeated points accumulate.
    pub fn vector_on(self: &Arc<Self>, points: &[usize], coefficients: &[Element]) -> Result<ModuleVector> {
        if points.len() != coefficients.len() {
            return Err(Error::Shape("points and coefficients differ in length".into()));
        }
        let mut v = self.zero();
        for (&p, a) in points.iter().zip(coefficients) {
            if p >= self.len() {
                return Err(Error::UnknownPoint(format!("#{p}")));
            }
            self.signature().check(a.signature())?;
            for (k, n) in self.summands() {
                let mut view = v.coeffs[k].view_mut((p * n, 0), (n, n));
                view += a.block(k);
            }
        }
        Ok(v)
    }

    pub(crate) fn from_coeffs(self: &Arc<Self>, coeffs: Vec<CMatrix>) -> ModuleVector {
        ModuleVector { space: self.clone(), coeffs }
    }

    fn split(&self, stacked: &[CMatrix], count: usize) -> Vec<Element> {
        (0..count)
            .map(|i| {
                let blocks = self.summands().map(|(k, n)| linalg::block(&stacked[k], i, 0, n)).collect();
                Element::from_blocks(self.signature().clone(), blocks).expect("block shapes match")
            })
            .collect()
    }

    fn stack(&self, values: &[Element], k: usize) -> CMatrix {
        let n = self.signature().size(k);
        let mut m = CMatrix::zeros(values.len() * n, n);
        for (i, v) in values.iter().enumerate() {
            m.view_mut((i * n, 0), (n, n)).copy_from(v.block(k));
        }
        m
    }

    /// Least-squares solve `Σ_{p'} K(p, p') b_{p'} ≈ values(p)`; membership holds
    /// when the worst realized misfit is at most `tol (1 + ‖values‖)`.
    pub fn membership(&self, points: &[usize], values: &[Element], basis: &[usize], tol: f64) -> Result<Membership> {
        if points.len() != values.len() {
            return Err(Error::Shape("points and values differ in length".into()));
        }
        for v in values {
            self.signature().check(v.signature())?;
        }
        let mut residual: f64 = 0.0;
        let mut scale: f64 = 0.0;
        let mut solved = Vec::with_capacity(self.signature().len());
        for (k, _) in self.summands() {
            let a = self.kernel.gram_sub(points, basis, k);
            let rhs = self.stack(values, k);
            let b = linalg::pinv_solve(&a, &rhs);
            residual = residual.max(linalg::spectral_norm(&(&a * &b - &rhs)));
            scale = scale.max(linalg::spectral_norm(&rhs));
            solved.push(b);
        }
        Ok(Membership {
            coefficients: self.split(&solved, basis.len()),
            residual,
            member: residual <= tol * (1.0 + scale),
        })
    }

    /// Orthogonal projection onto the submodule spanned by `{k_s : s ∈ F}`.
    pub fn projection(self: &Arc<Self>, xi: &ModuleVector, subset: &[usize]) -> Result<ModuleVector> {
        self.check(xi)?;
        if subset.is_empty() {
            return Ok(self.zero());
        }
        let values: Vec<Element> = subset.iter().map(|&s| xi.evaluate(s)).collect::<Result<_>>()?;
        let m = self.membership(subset, &values, subset, f64::INFINITY)?;
        self.vector_on(subset, &m.coefficients)
    }

    /// Minimal-norm `f` supported on `F` with `f(s_i) = a_i`.
    pub fn minimal_norm_interpolant(self: &Arc<Self>, subset: &[usize], targets: &[Element], tol: f64) -> Result<Interpolant> {
        for (i, s) in subset.iter().enumerate() {
            if subset[..i].contains(s) {
                return Err(Error::DuplicateLabel(self.kernel.points().label(*s).to_string()));
            }
        }
        let m = self.membership(subset, targets, subset, tol)?;
        if !m.member {
            return Err(Error::NotInRange { residual: m.residual });
        }
        let f = self.vector_on(subset, &m.coefficients)?;
        let pairing = m
            .coefficients
            .iter()
            .zip(targets)
            .fold(Element::zero(self.signature()), |acc, (b, a)| &acc + &(&b.star() * a));
        Ok(Interpolant { f, norm: pairing.norm().sqrt(), coefficients: m.coefficients, residual: m.residual })
    }

    /// Whether `{k_x : x ∈ X}` spans the module.
    pub fn is_set_of_uniqueness(&self, subset: &[usize], tol: f64) -> bool {
        let all: Vec<usize> = (0..self.len()).collect();
        (0..self.len()).all(|s| {
            let column: Vec<Element> = all.iter().map(|&t| self.kernel.get(t, s).clone()).collect();
            self.membership(&all, &column, subset, tol).map(|m| m.member).unwrap_or(false)
        })
    }

    fn check(self: &Arc<Self>, xi: &ModuleVector) -> Result<()> {
        if Arc::ptr_eq(self, &xi.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

impl ModuleVector {
    pub fn space(&self) -> &Arc<ModuleSpace> {
        &self.space
    }

    /// Stacked coefficients of summand `k`.
    pub fn coeffs(&self, k: usize) -> &CMatrix {
        &self.coeffs[k]
    }

    pub fn coefficient(&self, s: usize) -> Element {
        let blocks = self
            .space
            .summands()
            .map(|(k, n)| linalg::block(&self.coeffs[k], s, 0, n))
            .collect();
        Element::from_blocks(self.space.signature().clone(), blocks).expect("block shapes match")
    }

    pub fn coefficients(&self) -> Vec<Element> {
        (0..self.space.len()).map(|s| self.coefficient(s)).collect()
    }

    fn same_space(&self, other: &ModuleVector) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    fn zip(&self, other: &ModuleVector, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<ModuleVector> {
        self.same_space(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect();
        Ok(self.space.from_coeffs(coeffs))
    }

    pub fn add(&self, other: &ModuleVector) -> Result<ModuleVector> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ModuleVector) -> Result<ModuleVector> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, z: C64) -> ModuleVector {
        self.space.from_coeffs(self.coeffs.iter().map(|b| b * z).collect())
    }

    /// Right module action `ξ · a`.
    pub fn mul_right(&self, a: &Element) -> Result<ModuleVector> {
        self.space.signature().check(a.signature())?;
        Ok(self.space.from_coeffs(self.coeffs.iter().enumerate().map(|(k, b)| b * a.block(k)).collect()))
    }

    /// `⟨ξ, η⟩ = Σ a_s* K(s, t) b_t`.
    pub fn inner_product(&self, other: &ModuleVector) -> Result<Element> {
        self.same_space(other)?;
        let blocks = (0..self.coeffs.len())
            .map(|k| self.coeffs[k].adjoint() * self.space.gram(k) * &other.coeffs[k])
            .collect();
        Element::from_blocks(self.space.signature().clone(), blocks)
    }

    /// `‖⟨ξ, ξ⟩‖^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.inner_product(self).expect("same space").norm().max(0.0).sqrt()
    }

    /// `ξ(t) = ⟨k_t, ξ⟩ = Σ_s K(t, s) a_s`.
    pub fn evaluate(&self, t: usize) -> Result<Element> {
        if t >= self.space.len() {
            return Err(Error::UnknownPoint(format!("#{t}")));
        }
        let blocks = self
            .space
            .summands()
            .map(|(k, n)| self.space.gram(k).rows(t * n, n) * &self.coeffs[k])
            .collect();
        Element::from_blocks(self.space.signature().clone(), blocks)
    }

    /// Values of `ξ` at every point of `S`.
    pub fn values(&self) -> Vec<Element> {
        (0..self.space.len()).map(|t| self.evaluate(t).expect("point in range")).collect()
    }

    /// Equality in the module: the difference has norm at most `tol`.
    pub fn approx_eq(&self, other: &ModuleVector, tol: f64) -> bool {
        self.sub(other).map(|d| d.norm() <= tol).unwrap_or(false)
    }
}

/// `‖u‖` for `u = Σ_i f_i ⊗ g_i` in the exterior tensor product:
/// `‖Σ_{ij} ⟨f_i, f_j⟩ ⊗ ⟨g_i, g_j⟩‖^{1/2}`.
pub fn tensor_norm(u: &[(ModuleVector, ModuleVector)]) -> Result<f64> {
    let Some((f0, g0)) = u.first() else {
        return Ok(0.0);
    };
    let sig = f0.space().signature().tensor(g0.space().signature());
    let mut total = Element::zero(&sig);
    for (fi, gi) in u {
        for (fj, gj) in u {
            total = &total + &fi.inner_product(fj)?.tensor(&gi.inner_product(gj)?);
        }
    }
    Ok(total.norm().sqrt())
}

/// `Φ(Σ_i f_i ⊗ g_i)` with coefficient `Σ_i a^i_x ⊗ b^i_s` at `(x, s)`.
/// `product` must be the module of `K1 ⊗ K2`.
pub fn tensor_embed(
    first: &Arc<ModuleSpace>,
    second: &Arc<ModuleSpace>,
    product: &Arc<ModuleSpace>,
    u: &[(ModuleVector, ModuleVector)],
) -> Result<ModuleVector> {
    let m = second.len();
    if product.len() != first.len() * m
        || product.signature() != &first.signature().tensor(second.signature())
    {
        return Err(Error::SpaceMismatch);
    }
    let mut coefficients = vec![Element::zero(product.signature()); product.len()];
    for (f, g) in u {
        if !Arc::ptr_eq(f.space(), first) || !Arc::ptr_eq(g.space(), second) {
            return Err(Error::SpaceMismatch);
        }
        let a = f.coefficients();
        let b = g.coefficients();
        for (x, ax) in a.iter().enumerate() {
            for (s, bs) in b.iter().enumerate() {
                let p = x * m + s;
                coefficients[p] = &coefficients[p] + &ax.tensor(bs);
            }
        }
    }
    product.vector(&coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::PointSet;

    fn s(x: f64) -> Element {
        Element::real_diagonal(&[x])
    }

    fn example() -> Arc<ModuleSpace> {
        ModuleSpace::new(Kernel::scalar(&[&[2.0, 1.0], &[1.0, 2.0]]), 1e-9).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let e = example();
        for a in 0..2 {
            for b in 0..2 {
                let ip = e.section(a).inner_product(&e.section(b)).unwrap();
                assert_eq!(&ip, e.kernel().get(a, b));
            }
        }
        let xi = e.section(0).add(&e.section(1)).unwrap();
        assert!(xi.inner_product(&xi).unwrap().approx_eq(&s(6.0), 1e-14));
        assert_eq!(xi.inner_product(&e.zero()).unwrap(), s(0.0));
    }

    #[test]
    fn norm_and_evaluation_examples() {
        let e = example();
        assert!((e.section(0).norm() - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(e.zero().norm(), 0.0);
        let xi = e.section(0).mul_right(&s(0.5)).unwrap();
        assert!((xi.norm() - 0.5f64.sqrt()).abs() < 1e-14);
        assert_eq!(xi.evaluate(0).unwrap(), s(1.0));
        assert_eq!(xi.evaluate(1).unwrap(), s(0.5));
        assert_eq!(e.section(1).evaluate(0).unwrap(), *e.kernel().get(0, 1));
        assert_eq!(e.zero().evaluate(1).unwrap(), s(0.0));
        assert!(matches!(xi.evaluate(2), Err(Error::UnknownPoint(_))));
    }

    #[test]
    fn membership_examples() {
        let e = example();
        let m = e.membership(&[0, 1], &[s(1.0), s(0.5)], &[0], 1e-8).unwrap();
        assert!(m.member);
        assert!(m.coefficients[0].approx_eq(&s(0.5), 1e-14));
        let m = e.membership(&[0, 1], &[s(1.0), s(1.0)], &[0], 1e-8).unwrap();
        assert!(!m.member);
        assert!(m.residual > 0.1);
    }

    #[test]
    fn projection_examples() {
        let e = example();
        let xi = e.section(1);
        let p = e.projection(&xi, &[0]).unwrap();
        assert!(p.approx_eq(&e.section(0).mul_right(&s(0.5)).unwrap(), 1e-14));
        assert!(e.projection(&xi, &[0, 1]).unwrap().approx_eq(&xi, 1e-14));
        assert_eq!(e.projection(&xi, &[]).unwrap().norm(), 0.0);
    }

    #[test]
    fn interpolant_examples() {
        let e = example();
        let r = e.minimal_norm_interpolant(&[0], &[s(1.0)], 1e-8).unwrap();
        assert!(r.coefficients[0].approx_eq(&s(0.5), 1e-14));
        assert!(r.f.evaluate(1).unwrap().approx_eq(&s(0.5), 1e-14));
        assert!((r.norm - 0.5f64.sqrt()).abs() < 1e-14);

        let r = e.minimal_norm_interpolant(&[0, 1], &[s(0.0), s(0.0)], 1e-8).unwrap();
        assert_eq!(r.norm, 0.0);
        assert_eq!(r.f.norm(), 0.0);

        let z = ModuleSpace::new(Kernel::zero(PointSet::numbered(2), Signature::scalar()), 1e-9).unwrap();
        assert!(matches!(
            z.minimal_norm_interpolant(&[0], &[s(1.0)], 1e-8),
            Err(Error::NotInRange { .. })
        ));
        assert!(e.minimal_norm_interpolant(&[0, 0], &[s(1.0), s(1.0)], 1e-8).is_err());
    }

    #[test]
    fn uniqueness_examples() {
        let e = example();
        assert!(e.is_set_of_uniqueness(&[0, 1], 1e-8));
        assert!(!e.is_set_of_uniqueness(&[0], 1e-8));
        let ones = ModuleSpace::new(Kernel::scalar(&[&[1.0, 1.0], &[1.0, 1.0]]), 1e-9).unwrap();
        assert!(ones.is_set_of_uniqueness(&[0], 1e-8));
    }

    #[test]
    fn realization_dimensions() {
        assert_eq!(example().hilbert_realization().dimension(), 2);
        let ones = Kernel::scalar(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        assert_eq!(ModuleSpace::new(ones, 1e-9).unwrap().hilbert_realization().dimension(), 1);
        let z = ModuleSpace::new(Kernel::zero(PointSet::numbered(3), Signature::scalar()), 1e-9).unwrap();
        assert_eq!(z.hilbert_realization().dimension(), 0);
        let sig = Signature::new(vec![1, 2]).unwrap();
        let id = ModuleSpace::new(Kernel::identity(PointSet::numbered(2), sig), 1e-9).unwrap();
        assert_eq!(id.hilbert_realization().dimension(), 2 + 2 * 4);
    }

    #[test]
    fn realization_basis_is_orthonormal() {
        let e = example();
        let r = e.hilbert_realization();
        let b = r.basis(0);
        let gram = b.adjoint() * e.gram(0) * b;
        assert!(linalg::spectral_norm(&(gram - CMatrix::identity(2, 2))) < 1e-10);
    }

    #[test]
    fn not_pd_is_rejected() {
        assert!(matches!(
            ModuleSpace::new(Kernel::scalar(&[&[1.0, 2.0], &[2.0, 1.0]]), 1e-9),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn tensor_embed_examples() {
        let e1 = ModuleSpace::new(Kernel::scalar(&[&[1.0]]), 1e-9).unwrap();
        let e2 = ModuleSpace::new(Kernel::scalar(&[&[4.0]]), 1e-9).unwrap();
        let prod = ModuleSpace::new(e1.kernel().tensor(e2.kernel()), 1e-9).unwrap();
        let u = vec![(e1.section(0), e2.section(0))];
        let phi = tensor_embed(&e1, &e2, &prod, &u).unwrap();
        assert!(phi.approx_eq(&prod.section(0), 1e-15));
        assert!((phi.norm() - 2.0).abs() < 1e-14);
        assert!((tensor_norm(&u).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(tensor_embed(&e1, &e2, &prod, &[]).unwrap().norm(), 0.0);
        assert!(tensor_embed(&e1, &e2, &example(), &u).is_err());
    }
}
