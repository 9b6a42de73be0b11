//! Multipliers of a Papadakis module from a ψ-contraction condition.
//!
//! Given features `{e_α}` with kernel `K(s,t) = Σ_α e_α(s)* e_α(t)`, a set of
//! uniqueness `X`, a central-valued `ψ` on `X` and `c > 0` with
//! `Σ_ij a_i* K(x_i,x_j)(c² − ψ(x_i)*ψ(x_j)) a_j ≥ 0`, each `e_α ψ` (prescribed
//! on `X`) extends to a unique module element `φ_α`.

use std::sync::Arc;

use crate::cstar::{self, Element};
use crate::error::{Error, Result};
use crate::kernel::{FeatureFamily, Kernel};
use crate::linalg;
use crate::operators::{multiplication_operator, MultiplierSymbol};
use crate::space::{ModuleSpace, ModuleVector};

#[derive(Clone, Debug)]
pub struct PsiContractionInstance {
    space: Arc<ModuleSpace>,
    features: FeatureFamily,
    uniqueness_set: Vec<usize>,
    psi: Vec<Element>,
    c: f64,
}

impl PsiContractionInstance {
    /// `psi[i]` is the value of ψ at `uniqueness_set[i]`. Centrality of ψ and
    /// the uniqueness property of the subset are checked here.
    pub fn new(features: FeatureFamily, uniqueness_set: Vec<usize>, psi: Vec<Element>, c: f64, tol: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Shape(format!("c must be positive, got {c}")));
        }
        if psi.len() != uniqueness_set.len() {
            return Err(Error::Shape("psi must have one value per point of the uniqueness set".into()));
        }
        let points = features.points().clone();
        for (&x, v) in uniqueness_set.iter().zip(&psi) {
            if x >= points.len() {
                return Err(Error::UnknownPoint(format!("#{x}")));
            }
            features.signature().check(v.signature())?;
            if !v.is_central(tol) {
                return Err(Error::NonCentral { point: points.label(x).to_string() });
            }
        }
        let space = ModuleSpace::new(Kernel::from_features(&features), tol)?;
        if !space.is_set_of_uniqueness(&uniqueness_set, tol) {
            return Err(Error::NotSetOfUniqueness);
        }
        Ok(PsiContractionInstance { space, features, uniqueness_set, psi, c })
    }

    pub fn space(&self) -> &Arc<ModuleSpace> {
        &self.space
    }

    pub fn features(&self) -> &FeatureFamily {
        &self.features
    }

    pub fn uniqueness_set(&self) -> &[usize] {
        &self.uniqueness_set
    }

    pub fn psi(&self) -> &[Element] {
        &self.psi
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Block array `K(x_i, x_j)(c²·1 − ψ(x_i)* ψ(x_j))` over the uniqueness set.
    pub fn contraction_array(&self) -> Vec<Vec<Element>> {
        let sig = self.space.signature();
        let c2 = Element::scalar(sig, linalg::c(self.c * self.c));
        let k = self.space.kernel();
        self.uniqueness_set
            .iter()
            .zip(&self.psi)
            .map(|(&xi, pi)| {
                self.uniqueness_set
                    .iter()
                    .zip(&self.psi)
                    .map(|(&xj, pj)| k.get(xi, xj) * &(&c2 - &(&pi.star() * pj)))
                    .collect()
            })
            .collect()
    }

    pub fn contraction_check(&self, tol: f64) -> bool {
        cstar::block_psd(&self.contraction_array(), tol).expect("square array of uniform signature")
    }

    fn feature(&self, alpha: usize) -> Result<&[Element]> {
        self.features.members().get(alpha).map(Vec::as_slice).ok_or(Error::UnknownFeature(alpha))
    }

    /// The module element with `φ_α(x) = e_α(x) ψ(x)` on the uniqueness set.
    pub fn construct_phi(&self, alpha: usize, tol: f64) -> Result<ModuleVector> {
        let e = self.feature(alpha)?;
        let values: Vec<Element> = self.uniqueness_set.iter().zip(&self.psi).map(|(&x, p)| &e[x] * p).collect();
        let m = self.space.membership(&self.uniqueness_set, &values, &self.uniqueness_set, tol)?;
        if !m.member {
            return Err(Error::NoExtension { residual: m.residual });
        }
        self.space.vector_on(&self.uniqueness_set, &m.coefficients)
    }

    /// `e_α φ_β = e_β φ_α` pointwise on all of `S`.
    pub fn intertwining_check(&self, alpha: usize, beta: usize, tol: f64) -> Result<bool> {
        let (ea, eb) = (self.feature(alpha)?, self.feature(beta)?);
        let phi_a = self.construct_phi(alpha, tol)?.values();
        let phi_b = self.construct_phi(beta, tol)?.values();
        Ok((0..self.space.len()).all(|s| (&(&ea[s] * &phi_b[s]) - &(&eb[s] * &phi_a[s])).norm() <= tol))
    }

    /// `|φ_α(s)| ≤ c |e_α(s)|` on all of `S`. Requires central feature values
    /// and invertible `K(s, s)`.
    pub fn modulus_bound_check(&self, alpha: usize, eps: f64, tol: f64) -> Result<bool> {
        let e = self.feature(alpha)?;
        let points = self.space.kernel().points();
        for (s, v) in e.iter().enumerate() {
            if !v.is_central(tol) {
                return Err(Error::NonCentral { point: points.label(s).to_string() });
            }
            if self.space.kernel().get(s, s).invert(eps).is_err() {
                return Err(Error::DiagonalNotInvertible { point: points.label(s).to_string() });
            }
        }
        let phi = self.construct_phi(alpha, tol)?.values();
        Ok(e.iter().zip(&phi).all(|(es, ps)| {
            (&es.modulus().scale(linalg::c(self.c)) - &ps.modulus()).is_positive(tol)
        }))
    }

    /// `Σ_α |⟨φ_α, g⟩|² ≤ c² ⟨g, g⟩`.
    pub fn functional_bound_check(&self, g: &ModuleVector, tol: f64) -> Result<bool> {
        let sig = self.space.signature();
        let mut sum = Element::zero(sig);
        for alpha in 0..self.features.len() {
            let y = self.construct_phi(alpha, tol)?.inner_product(g)?;
            sum = &sum + &(&y.star() * &y);
        }
        let bound = g.inner_product(g)?.scale(linalg::c(self.c * self.c));
        Ok((&bound - &sum).is_positive(tol))
    }

    /// Whether every feature is a left multiplier of the module.
    pub fn features_are_multipliers(&self, tol: f64) -> Result<bool> {
        for e in self.features.members() {
            let symbol = MultiplierSymbol::new(&self.space, e.clone())?;
            match multiplication_operator(&symbol, tol) {
                Ok(_) => {}
                Err(Error::NotAMultiplier { .. }) => return Ok(false),
                Err(err) => return Err(err),
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cstar::Signature;
    use crate::kernel::PointSet;

    fn s(x: f64) -> Element {
        Element::real_diagonal(&[x])
    }

    /// Two features whose kernel is `[[2,1],[1,2]]`.
    fn example_features() -> FeatureFamily {
        let a = (1.5f64).sqrt();
        let b = (0.5f64).sqrt();
        FeatureFamily::new(
            PointSet::numbered(2),
            Signature::scalar(),
            vec![vec![s(a), s(a)], vec![s(b), s(-b)]],
        )
        .unwrap()
    }

    fn instance(psi: &[f64], c: f64) -> PsiContractionInstance {
        PsiContractionInstance::new(example_features(), vec![0, 1], psi.iter().map(|&x| s(x)).collect(), c, 1e-9)
            .unwrap()
    }

    #[test]
    fn example_kernel() {
        let k = Kernel::from_features(&example_features());
        for (a, b) in k.values().iter().zip(Kernel::scalar(&[&[2.0, 1.0], &[1.0, 2.0]]).values()) {
            assert!(a.approx_eq(b, 1e-14));
        }
    }

    #[test]
    fn contraction_examples() {
        assert!(instance(&[0.0, 0.0], 0.3).contraction_check(1e-9));
        assert!(instance(&[0.5, 0.5], 0.5).contraction_check(1e-9));
        assert!(!instance(&[1.0, 0.0], 0.5).contraction_check(1e-9));
    }

    #[test]
    fn phi_examples() {
        let inst = instance(&[0.0, 0.0], 1.0);
        assert_eq!(inst.construct_phi(0, 1e-8).unwrap().norm(), 0.0);

        let one = FeatureFamily::new(PointSet::numbered(1), Signature::scalar(), vec![vec![s(1.0)]]).unwrap();
        let inst = PsiContractionInstance::new(one, vec![0], vec![s(0.5)], 0.5, 1e-9).unwrap();
        let phi = inst.construct_phi(0, 1e-8).unwrap();
        assert!(phi.approx_eq(&inst.space().section(0).mul_right(&s(0.5)).unwrap(), 1e-14));

        let inst = instance(&[1.0, 1.0], 1.0);
        let phi = inst.construct_phi(1, 1e-8).unwrap();
        for x in 0..2 {
            assert!(phi.evaluate(x).unwrap().approx_eq(inst.features().value(1, x), 1e-12));
        }
        assert!(matches!(inst.construct_phi(5, 1e-8), Err(Error::UnknownFeature(5))));
    }

    #[test]
    fn intertwining_examples() {
        let inst = instance(&[0.3, -0.2], 0.5);
        assert!(inst.intertwining_check(0, 0, 1e-9).unwrap());
        assert!(inst.intertwining_check(0, 1, 1e-9).unwrap());
        assert!(instance(&[0.0, 0.0], 0.5).intertwining_check(0, 1, 1e-9).unwrap());
    }

    #[test]
    fn modulus_examples() {
        let inst = instance(&[0.5, 0.5], 0.5);
        assert!(inst.modulus_bound_check(0, 1e-8, 1e-9).unwrap());
        let phi = inst.construct_phi(1, 1e-8).unwrap();
        for x in 0..2 {
            let lhs = phi.evaluate(x).unwrap().modulus();
            let rhs = inst.features().value(1, x).modulus().scale(linalg::c(0.5));
            assert!(lhs.approx_eq(&rhs, 1e-12));
        }
        assert!(instance(&[0.0, 0.0], 0.5).modulus_bound_check(1, 1e-8, 1e-9).unwrap());
        assert!(instance(&[0.5, 0.5], 1.0).modulus_bound_check(0, 1e-8, 1e-9).unwrap());
    }

    #[test]
    fn instance_validation() {
        let f = example_features();
        let nc = Element::real_matrix(2, &[1.0, 0.0, 0.0, 2.0]);
        let sig2 = Signature::new(vec![2]).unwrap();
        let f2 = FeatureFamily::new(
            PointSet::numbered(1),
            sig2.clone(),
            vec![vec![Element::unit(&sig2)]],
        )
        .unwrap();
        assert!(matches!(
            PsiContractionInstance::new(f2, vec![0], vec![nc], 1.0, 1e-9),
            Err(Error::NonCentral { .. })
        ));
        assert!(matches!(
            PsiContractionInstance::new(f.clone(), vec![0], vec![s(1.0)], 1.0, 1e-9),
            Err(Error::NotSetOfUniqueness)
        ));
        assert!(PsiContractionInstance::new(f, vec![0, 1], vec![s(1.0), s(1.0)], 0.0, 1e-9).is_err());
    }

    #[test]
    fn modulus_preconditions() {
        let sig2 = Signature::new(vec![2]).unwrap();
        let e = Element::real_matrix(2, &[1.0, 1.0, 0.0, 1.0]);
        let f = FeatureFamily::new(PointSet::numbered(1), sig2.clone(), vec![vec![e]]).unwrap();
        let inst = PsiContractionInstance::new(f, vec![0], vec![Element::unit(&sig2)], 1.0, 1e-9).unwrap();
        assert!(matches!(inst.modulus_bound_check(0, 1e-8, 1e-9), Err(Error::NonCentral { .. })));

        let f = FeatureFamily::new(
            PointSet::numbered(2),
            Signature::scalar(),
            vec![vec![s(1.0), s(0.0)]],
        )
        .unwrap();
        let inst = PsiContractionInstance::new(f, vec![0], vec![s(0.5)], 1.0, 1e-9).unwrap();
        assert!(matches!(
            inst.modulus_bound_check(0, 1e-8, 1e-9),
            Err(Error::DiagonalNotInvertible { .. })
        ));
    }
}
