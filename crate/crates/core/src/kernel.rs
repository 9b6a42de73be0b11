//! `A`-valued kernels on finite point sets and the standard constructions on them.

use std::collections::HashMap;

use crate::cstar::{self, Element, Signature};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Separator used for labels of product point sets.
pub const PRODUCT_SEPARATOR: &str = "⋈";
/// Separator used in `"s|t"` keys of serialized kernel tables.
pub const KEY_SEPARATOR: &str = "|";

/// An ordered set of distinct point labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl PointSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        for l in &labels {
            if l.is_empty() || l.contains(PRODUCT_SEPARATOR) || l.contains(KEY_SEPARATOR) {
                return Err(Error::InvalidLabel(l.clone()));
            }
        }
        Self::build(labels)
    }

    fn build(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Shape("point set is empty".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(PointSet { labels, index })
    }

    /// Labels `s1, …, sn`.
    pub fn numbered(n: usize) -> Self {
        Self::new((1..=n).map(|i| format!("s{i}"))).expect("numbered labels are valid")
    }

    /// `X × S` with labels `"x⋈s"`, `x` varying slowest.
    pub fn product(&self, other: &PointSet) -> PointSet {
        let labels = self
            .labels
            .iter()
            .flat_map(|x| other.labels.iter().map(move |s| format!("{x}{PRODUCT_SEPARATOR}{s}")))
            .collect();
        Self::build(labels).expect("product of distinct labels is distinct")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index.get(label).copied().ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(l.as_ref())).collect()
    }
}

/// A complete table `K(s, t)` over a finite point set.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    points: PointSet,
    sig: Signature,
    values: Vec<Element>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelReport {
    pub hermitian: bool,
    pub positive_definite: bool,
    pub strictly_positive: bool,
    pub schwarz_ok: bool,
}

impl KernelReport {
    pub fn all(&self) -> bool {
        self.hermitian && self.positive_definite && self.strictly_positive && self.schwarz_ok
    }
}

impl Kernel {
    /// `values` is row-major: entry `i * n + j` is `K(s_i, s_j)`.
    pub fn new(points: PointSet, sig: Signature, values: Vec<Element>) -> Result<Self> {
        let n = points.len();
        if values.len() != n * n {
            return Err(Error::Shape(format!("kernel table has {} entries, expected {}", values.len(), n * n)));
        }
        for v in &values {
            sig.check(v.signature())?;
        }
        Ok(Kernel { points, sig, values })
    }

    pub fn from_fn(points: PointSet, sig: Signature, mut f: impl FnMut(usize, usize) -> Element) -> Result<Self> {
        let n = points.len();
        let values = (0..n * n).map(|idx| f(idx / n, idx % n)).collect();
        Self::new(points, sig, values)
    }

    /// Scalar kernel from real rows, on points `s1, …, sn`.
    pub fn scalar(rows: &[&[f64]]) -> Self {
        let points = PointSet::numbered(rows.len());
        Self::from_fn(points, Signature::scalar(), |i, j| Element::real_diagonal(&[rows[i][j]]))
            .expect("square scalar table")
    }

    pub fn identity(points: PointSet, sig: Signature) -> Self {
        let unit = Element::unit(&sig);
        let zero = Element::zero(&sig);
        Self::from_fn(points, sig, |i, j| if i == j { unit.clone() } else { zero.clone() })
            .expect("identity table is complete")
    }

    pub fn zero(points: PointSet, sig: Signature) -> Self {
        let zero = Element::zero(&sig);
        Self::from_fn(points, sig, |_, _| zero.clone()).expect("zero table is complete")
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, s: usize, t: usize) -> &Element {
        &self.values[s * self.len() + t]
    }

    pub fn values(&self) -> &[Element] {
        &self.values
    }

    /// Realized Gram matrix of summand `k` restricted to `rows × cols`.
    pub fn gram_sub(&self, rows: &[usize], cols: &[usize], k: usize) -> CMatrix {
        cstar::realize(rows.len(), cols.len(), k, self.sig.size(k), |i, j| self.get(rows[i], cols[j]))
    }

    /// Realized Gram matrix of summand `k` over all of `S`.
    pub fn gram(&self, k: usize) -> CMatrix {
        let n = self.len();
        cstar::realize(n, n, k, self.sig.size(k), |i, j| self.get(i, j))
    }

    /// Largest realized Gram norm over all summands.
    pub fn gram_norm(&self) -> f64 {
        (0..self.sig.len()).map(|k| linalg::spectral_norm(&self.gram(k))).fold(0.0, f64::max)
    }

    /// Gram array `(K(s_i, s_j))` as nested rows.
    pub fn array(&self) -> Vec<Vec<Element>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect()
    }

    pub fn validate(&self, tol: f64) -> KernelReport {
        let n = self.len();
        let gnorm = self.gram_norm();
        let slack = tol * (1.0 + gnorm);
        let mut hermitian = true;
        let mut schwarz_ok = true;
        for s in 0..n {
            for t in 0..n {
                let d = self.get(s, t) - &self.get(t, s).star();
                if d.norm() > slack {
                    hermitian = false;
                }
                let lhs = self.get(s, t).norm().powi(2);
                let rhs = self.get(s, s).norm() * self.get(t, t).norm();
                if lhs > rhs + tol * (1.0 + rhs) {
                    schwarz_ok = false;
                }
            }
        }
        let grams: Vec<CMatrix> = (0..self.sig.len()).map(|k| self.gram(k)).collect();
        let positive_definite = grams.iter().all(|g| cstar::realized_psd(g, tol));
        let strictly_positive =
            positive_definite && grams.iter().all(|g| linalg::min_eigenvalue(g) >= slack);
        KernelReport { hermitian, positive_definite, strictly_positive, schwarz_ok }
    }

    /// `K(s, t) = Σ_α e_α(s)* e_α(t)`.
    pub fn from_features(features: &FeatureFamily) -> Kernel {
        let sig = features.sig.clone();
        let zero = Element::zero(&sig);
        Kernel::from_fn(features.points.clone(), sig, |s, t| {
            features
                .members
                .iter()
                .fold(zero.clone(), |acc, e| &acc + &(&e[s].star() * &e[t]))
        })
        .expect("feature kernel table is complete")
    }

    /// `K((x,s),(y,t)) = K1(x,y) ⊗ K2(s,t)` on `X × S`.
    pub fn tensor(&self, other: &Kernel) -> Kernel {
        let points = self.points.product(&other.points);
        let sig = self.sig.tensor(&other.sig);
        let m = other.len();
        Kernel::from_fn(points, sig, |p, q| {
            self.get(p / m, q / m).tensor(other.get(p % m, q % m))
        })
        .expect("tensor table is complete")
    }

    /// `K'(s, t) = g(s) K(s, t) g(t)*`.
    pub fn conjugate(&self, g: &[Element]) -> Result<Kernel> {
        if g.len() != self.len() {
            return Err(Error::Shape(format!("g has {} values, expected {}", g.len(), self.len())));
        }
        for v in g {
            self.sig.check(v.signature())?;
        }
        Kernel::from_fn(self.points.clone(), self.sig.clone(), |s, t| {
            &(&g[s] * self.get(s, t)) * &g[t].star()
        })
    }

    /// Schur complement at `s0`: `K(s,t) − K(s,s0) K(s0,s0)⁻¹ K(s0,t)`.
    /// The point `s0` stays in the point set with a vanishing row and column.
    pub fn deflate(&self, s0: usize, eps: f64) -> Result<Kernel> {
        if s0 >= self.len() {
            return Err(Error::UnknownPoint(format!("#{s0}")));
        }
        let inv = self.get(s0, s0).invert(eps)?;
        Kernel::from_fn(self.points.clone(), self.sig.clone(), |s, t| {
            self.get(s, t) - &(&(self.get(s, s0) * &inv) * self.get(s0, t))
        })
    }
}

/// A finite family `{e_α}` of functions `S → A`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureFamily {
    points: PointSet,
    sig: Signature,
    members: Vec<Vec<Element>>,
}

impl FeatureFamily {
    pub fn new(points: PointSet, sig: Signature, members: Vec<Vec<Element>>) -> Result<Self> {
        for (a, m) in members.iter().enumerate() {
            if m.len() != points.len() {
                return Err(Error::Shape(format!(
                    "feature {a} has {} values, expected {}",
                    m.len(),
                    points.len()
                )));
            }
            for v in m {
                sig.check(v.signature())?;
            }
        }
        Ok(FeatureFamily { points, sig, members })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn members(&self) -> &[Vec<Element>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn value(&self, alpha: usize, s: usize) -> &Element {
        &self.members[alpha][s]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> Element {
        Element::real_diagonal(&[x])
    }

    #[test]
    fn labels_are_checked() {
        assert!(matches!(PointSet::new(["a", "a"]), Err(Error::DuplicateLabel(_))));
        assert!(matches!(PointSet::new(["a⋈b"]), Err(Error::InvalidLabel(_))));
        assert!(matches!(PointSet::new(["a|b"]), Err(Error::InvalidLabel(_))));
        assert!(PointSet::new(Vec::<String>::new()).is_err());
        let p = PointSet::new(["x", "y"]).unwrap().product(&PointSet::new(["s"]).unwrap());
        assert_eq!(p.labels(), &["x⋈s", "y⋈s"]);
    }

    #[test]
    fn validate_examples() {
        let id = Kernel::identity(PointSet::numbered(3), Signature::scalar());
        assert!(id.validate(1e-9).all());

        let r = Kernel::scalar(&[&[2.0, 1.0], &[1.0, 2.0]]).validate(1e-9);
        assert!(r.positive_definite && r.strictly_positive);

        let r = Kernel::scalar(&[&[1.0, 2.0], &[2.0, 1.0]]).validate(1e-9);
        assert!(!r.positive_definite);
        assert!(!r.schwarz_ok);
        assert!(r.hermitian);
    }

    #[test]
    fn non_hermitian_kernel() {
        let r = Kernel::scalar(&[&[2.0, 1.0], &[0.0, 2.0]]).validate(1e-9);
        assert!(!r.hermitian);
        assert!(!r.positive_definite);
    }

    #[test]
    fn features_examples() {
        let pts = PointSet::numbered(2);
        let f = FeatureFamily::new(pts.clone(), Signature::scalar(), vec![vec![s(1.0), s(1.0)]]).unwrap();
        assert_eq!(Kernel::from_features(&f), Kernel::scalar(&[&[1.0, 1.0], &[1.0, 1.0]]));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let one = PointSet::numbered(1);
        let f = FeatureFamily::new(one, Signature::scalar(), vec![vec![s(h)], vec![s(h)]]).unwrap();
        assert!(Kernel::from_features(&f).get(0, 0).approx_eq(&s(1.0), 1e-15));

        let f = FeatureFamily::new(pts.clone(), Signature::scalar(), vec![]).unwrap();
        assert_eq!(Kernel::from_features(&f), Kernel::zero(pts, Signature::scalar()));
    }

    #[test]
    fn tensor_examples() {
        let k = Kernel::scalar(&[&[1.0]]).tensor(&Kernel::scalar(&[&[4.0]]));
        assert_eq!(k.get(0, 0), &s(4.0));

        let id = Kernel::identity(PointSet::numbered(2), Signature::scalar());
        let id2 = Kernel::identity(PointSet::numbered(3), Signature::scalar());
        let t = id.tensor(&id2);
        assert_eq!(t, Kernel::identity(t.points().clone(), Signature::scalar()));

        let t = Kernel::scalar(&[&[2.0, 1.0], &[1.0, 2.0]]).tensor(&Kernel::scalar(&[&[3.0]]));
        assert_eq!(t.values(), Kernel::scalar(&[&[6.0, 3.0], &[3.0, 6.0]]).values());
        assert_eq!(t.points().labels(), &["s1⋈s1", "s2⋈s1"]);
    }

    #[test]
    fn conjugate_examples() {
        let k = Kernel::scalar(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert_eq!(k.conjugate(&[s(1.0), s(1.0)]).unwrap(), k);
        let z = k.conjugate(&[s(0.0), s(0.0)]).unwrap();
        assert!(z.values().iter().all(|v| v.norm() == 0.0));
        let c = k.conjugate(&[s(1.0), s(2.0)]).unwrap();
        assert_eq!(c.values(), Kernel::scalar(&[&[2.0, 2.0], &[2.0, 8.0]]).values());
        assert!(k.conjugate(&[s(1.0)]).is_err());
    }

    #[test]
    fn deflate_examples() {
        let k = Kernel::scalar(&[&[2.0, 1.0], &[1.0, 2.0]]).deflate(0, 1e-8).unwrap();
        let expected = Kernel::scalar(&[&[0.0, 0.0], &[0.0, 1.5]]);
        for (a, b) in k.values().iter().zip(expected.values()) {
            assert!(a.approx_eq(b, 1e-15));
        }

        let id = Kernel::identity(PointSet::numbered(3), Signature::new(vec![1, 2]).unwrap());
        let d = id.deflate(1, 1e-8).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j && i != 1 { 1.0 } else { 0.0 };
                assert!((d.get(i, j).norm() - expect).abs() < 1e-15);
            }
        }

        let k = Kernel::scalar(&[&[0.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(k.deflate(0, 1e-8), Err(Error::NotInvertible { .. })));
    }
}
