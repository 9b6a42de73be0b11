//! Seeded generators for random algebra elements, kernels and feature families.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cstar::{Element, Signature};
use crate::kernel::{FeatureFamily, Kernel, PointSet};
use crate::linalg::{CMatrix, C64};

pub fn complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Element with independent standard complex Gaussian entries.
pub fn element<R: Rng + ?Sized>(sig: &Signature, rng: &mut R) -> Element {
    let blocks = sig
        .blocks()
        .iter()
        .map(|&n| CMatrix::from_fn(n, n, |_, _| complex(rng)))
        .collect();
    Element::from_blocks(sig.clone(), blocks).expect("shapes follow the signature")
}

/// Hermitian element: `(a + a*) / 2` for Gaussian `a`.
pub fn hermitian<R: Rng + ?Sized>(sig: &Signature, rng: &mut R) -> Element {
    let a = element(sig, rng);
    (&a + &a.star()).scale(C64::new(0.5, 0.0))
}

/// Central element with real per-block scalars drawn uniformly from `[-1, 1]`.
pub fn real_central<R: Rng + ?Sized>(sig: &Signature, rng: &mut R) -> Element {
    let blocks = sig
        .blocks()
        .iter()
        .map(|&n| CMatrix::identity(n, n) * C64::new(rng.random_range(-1.0..=1.0), 0.0))
        .collect();
    Element::from_blocks(sig.clone(), blocks).expect("shapes follow the signature")
}

/// `count` features with Gaussian values.
pub fn features<R: Rng + ?Sized>(points: &PointSet, sig: &Signature, count: usize, rng: &mut R) -> FeatureFamily {
    let members = (0..count).map(|_| (0..points.len()).map(|_| element(sig, rng)).collect()).collect();
    FeatureFamily::new(points.clone(), sig.clone(), members).expect("complete tables")
}

/// A strictly positive kernel: a Gaussian feature kernel plus `floor · δ_{st}`,
/// so the smallest realized eigenvalue is at least `floor`.
pub fn strictly_pd_kernel<R: Rng + ?Sized>(points: &PointSet, sig: &Signature, floor: f64, rng: &mut R) -> Kernel {
    let count = points.len() * sig.blocks().iter().max().copied().unwrap_or(1);
    let base = Kernel::from_features(&features(points, sig, count, rng));
    let lift = Element::scalar(sig, C64::new(floor, 0.0));
    Kernel::from_fn(points.clone(), sig.clone(), |s, t| {
        if s == t {
            base.get(s, t) + &lift
        } else {
            base.get(s, t).clone()
        }
    })
    .expect("complete table")
}

/// A positive kernel of realized rank at most `rank · n_k` per summand.
pub fn low_rank_kernel<R: Rng + ?Sized>(points: &PointSet, sig: &Signature, rank: usize, rng: &mut R) -> Kernel {
    Kernel::from_features(&features(points, sig, rank, rng))
}

/// Ingredients of a ψ-contraction instance on a commutative signature.
#[derive(Clone, Debug)]
pub struct PsiSetup {
    pub features: FeatureFamily,
    pub uniqueness_set: Vec<usize>,
    pub psi: Vec<Element>,
    /// Smallest `c` satisfying the contraction condition for `psi`.
    pub c_min: f64,
}

/// Real central features on `base + duplicates` points, where each duplicate
/// copies the values of a random base point; the base points form the
/// uniqueness set. `count >= base` keeps the Gram over the base invertible.
pub fn psi_setup<R: Rng + ?Sized>(sig: &Signature, base: usize, duplicates: usize, count: usize, rng: &mut R) -> PsiSetup {
    assert!(sig.is_commutative() && count >= base && base > 0);
    let points = PointSet::numbered(base + duplicates);
    let copies: Vec<usize> = (0..duplicates).map(|_| rng.random_range(0..base)).collect();
    let members = (0..count)
        .map(|_| {
            let mut row: Vec<Element> = (0..base)
                .map(|_| {
                    let blocks = sig
                        .blocks()
                        .iter()
                        .map(|_| CMatrix::from_element(1, 1, C64::new(rng.sample(StandardNormal), 0.0)))
                        .collect();
                    Element::from_blocks(sig.clone(), blocks).expect("commutative signature")
                })
                .collect();
            let extra: Vec<Element> = copies.iter().map(|&b| row[b].clone()).collect();
            row.extend(extra);
            row
        })
        .collect();
    let features = FeatureFamily::new(points, sig.clone(), members).expect("complete tables");
    let uniqueness_set: Vec<usize> = (0..base).collect();
    let psi: Vec<Element> = (0..base).map(|_| real_central(sig, rng)).collect();
    let c_min = contraction_threshold(&Kernel::from_features(&features), &uniqueness_set, &psi);
    PsiSetup { features, uniqueness_set, psi, c_min }
}

/// `min c` with `c² G_X ≥ D_ψ* G_X D_ψ` in every summand, for central `ψ` and
/// invertible Gram over `X`.
pub fn contraction_threshold(kernel: &Kernel, subset: &[usize], psi: &[Element]) -> f64 {
    let mut c2: f64 = 0.0;
    for k in 0..kernel.signature().len() {
        let n = kernel.signature().size(k);
        let g = kernel.gram_sub(subset, subset, k);
        let mut d = CMatrix::zeros(subset.len() * n, subset.len() * n);
        for (i, p) in psi.iter().enumerate() {
            d.view_mut((i * n, i * n), (n, n)).copy_from(p.block(k));
        }
        let root = crate::linalg::hermitian_apply(&g, |x| 1.0 / x.sqrt());
        let m = &root * d.adjoint() * &g * &d * &root;
        let (vals, _) = crate::linalg::hermitian_eigen(&m);
        c2 = c2.max(vals.last().copied().unwrap_or(0.0));
    }
    c2.max(0.0).sqrt()
}
