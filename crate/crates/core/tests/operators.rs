mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use rkhcm::linalg::C64;
use rkhcm::operators::{berezin, multiplication_operator, multiplier_adjoint_check, recover_symbol};
use rkhcm::{random, AdjointableOp, Element, ModuleSpace, ModuleVector, MultiplierSymbol, PointSet, Signature};

fn strict<R: Rng>(sig: &Signature, n: usize, r: &mut R) -> Arc<ModuleSpace> {
    ModuleSpace::new(random::strictly_pd_kernel(&PointSet::numbered(n), sig, 0.3, r), 1e-9).unwrap()
}

fn vector<R: Rng>(e: &Arc<ModuleSpace>, r: &mut R) -> ModuleVector {
    let coeffs: Vec<Element> = (0..e.len()).map(|_| random::element(e.signature(), r)).collect();
    e.vector(&coeffs).unwrap()
}

fn symbol<R: Rng>(e: &Arc<ModuleSpace>, r: &mut R) -> MultiplierSymbol {
    MultiplierSymbol::new(e, (0..e.len()).map(|_| random::element(e.signature(), r)).collect()).unwrap()
}

fn random_op<R: Rng>(e: &Arc<ModuleSpace>, r: &mut R) -> AdjointableOp {
    let images: Vec<ModuleVector> = (0..e.len()).map(|_| vector(e, r)).collect();
    AdjointableOp::from_action(e, &images, 1e-8).unwrap()
}

fn close(a: &Element, b: &Element, tol: f64) -> bool {
    a.approx_eq(b, tol * (1.0 + a.norm().max(b.norm())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn adjoint_pairs_inner_products(sig in common::signature(), n in 1usize..6, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let e = strict(&sig, n, &mut r);
        let t = random_op(&e, &mut r);
        let s = random_op(&e, &mut r);
        let (x, y) = (vector(&e, &mut r), vector(&e, &mut r));
        let lhs = t.apply(&x).unwrap().inner_product(&y).unwrap();
        let rhs = x.inner_product(&t.adjoint().apply(&y).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-8));
        prop_assert!(t.adjoint().adjoint().distance(&t).unwrap() <= 1e-8 * (1.0 + t.norm()));
        let st = s.compose(&t).unwrap();
        let ts = t.adjoint().compose(&s.adjoint()).unwrap();
        prop_assert!(st.adjoint().distance(&ts).unwrap() <= 1e-8 * (1.0 + st.norm()));
        let a = random::element(&sig, &mut r);
        prop_assert!(t.apply(&x.mul_right(&a).unwrap()).unwrap().approx_eq(&t.apply(&x).unwrap().mul_right(&a).unwrap(), 1e-8 * (1.0 + t.norm() * x.norm() * a.norm())));
    }

    /// Rank-one operators on possibly degenerate kernels.
    #[test]
    fn rank_one_adjoint(sig in common::signature(), n in 1usize..6, q in 1usize..3, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let e = ModuleSpace::new(random::low_rank_kernel(&PointSet::numbered(n), &sig, q, &mut r), 1e-9).unwrap();
        let (u, v, x, y) = (vector(&e, &mut r), vector(&e, &mut r), vector(&e, &mut r), vector(&e, &mut r));
        let t = AdjointableOp::rank_one(&u, &v).unwrap();
        let expected = u.mul_right(&v.inner_product(&x).unwrap()).unwrap();
        prop_assert!(t.apply(&x).unwrap().approx_eq(&expected, 1e-8 * (1.0 + u.norm() * v.norm() * x.norm())));
        let lhs = t.apply(&x).unwrap().inner_product(&y).unwrap();
        let rhs = x.inner_product(&t.adjoint().apply(&y).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-8));
    }

    #[test]
    fn multiplication_is_a_homomorphism(sig in common::signature(), n in 1usize..6, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let e = strict(&sig, n, &mut r);
        let (f, g) = (symbol(&e, &mut r), symbol(&e, &mut r));
        let lambda = random::complex(&mut r);
        let mf = multiplication_operator(&f, 1e-8).unwrap();
        let mg = multiplication_operator(&g, 1e-8).unwrap();
        let mfg = multiplication_operator(&f.product(&g), 1e-8).unwrap();
        let scale = 1.0 + mf.norm() * mg.norm();
        prop_assert!(mf.compose(&mg).unwrap().distance(&mfg).unwrap() <= 1e-8 * scale);
        let lin = multiplication_operator(&f.combine(lambda, &g), 1e-8).unwrap();
        let sum = mf.scale(lambda).add(&mg).unwrap();
        prop_assert!(lin.distance(&sum).unwrap() <= 1e-8 * (1.0 + lin.norm()));
        let one = MultiplierSymbol::constant(&e, &Element::unit(&sig)).unwrap();
        prop_assert!(multiplication_operator(&one, 1e-8).unwrap().distance(&AdjointableOp::identity(&e)).unwrap() <= 1e-8);
    }

    /// `(M_f ξ)(t) = f(t) ξ(t)` and `M_f*(k_s) = k_s f(s)*`.
    #[test]
    fn multiplier_acts_pointwise(sig in common::signature(), n in 1usize..6, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let e = strict(&sig, n, &mut r);
        let f = symbol(&e, &mut r);
        let xi = vector(&e, &mut r);
        let image = multiplication_operator(&f, 1e-8).unwrap().apply(&xi).unwrap();
        for t in 0..n {
            prop_assert!(close(&image.evaluate(t).unwrap(), &(f.value(t) * &xi.evaluate(t).unwrap()), 1e-8));
        }
        prop_assert!(multiplier_adjoint_check(&f, 1e-9).unwrap());
    }

    #[test]
    fn berezin_recovers_symbols(sig in common::signature(), n in 1usize..6, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let e = strict(&sig, n, &mut r);
        let f = symbol(&e, &mut r);
        let mf = multiplication_operator(&f, 1e-8).unwrap();
        let rec = recover_symbol(&mf, 1e-8, 1e-8).unwrap();
        prop_assert!(rec.is_multiplication);
        for s in 0..n {
            prop_assert!(close(rec.symbol.value(s), f.value(s), 1e-9));
        }
        let id = AdjointableOp::identity(&e);
        for s in 0..n {
            prop_assert!(berezin(&id, s, 1e-8).unwrap().approx_eq(&Element::unit(&sig), 1e-10));
        }
    }

    /// A scaled rank-one map onto a single section is not a multiplication
    /// operator once there are two or more points.
    #[test]
    fn rank_one_is_not_multiplication(n in 2usize..6, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let sig = Signature::scalar();
        let e = strict(&sig, n, &mut r);
        let t = AdjointableOp::rank_one(&e.section(0), &e.section(1)).unwrap().scale(C64::new(2.0, 0.0));
        let rec = recover_symbol(&t, 1e-8, 1e-8).unwrap();
        prop_assert!(!rec.is_multiplication);
    }
}
