mod common;

use proptest::prelude::*;
use rand::Rng;
use rkhcm::linalg::C64;
use rkhcm::random::{self, PsiSetup};
use rkhcm::{Element, Error, PsiContractionInstance, Signature};

fn commutative() -> impl Strategy<Value = Signature> {
    prop_oneof![Just(vec![1]), Just(vec![1, 1]), Just(vec![1, 1, 1])].prop_map(|b| Signature::new(b).unwrap())
}

fn setup(sig: &Signature, base: usize, dup: usize, extra: usize, seed: u64) -> PsiSetup {
    random::psi_setup(sig, base, dup, base + extra, &mut common::rng(seed))
}

fn instance(s: &PsiSetup, psi: Vec<Element>, c: f64) -> PsiContractionInstance {
    PsiContractionInstance::new(s.features.clone(), s.uniqueness_set.clone(), psi, c, 1e-9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn contraction_pipeline(sig in commutative(), base in 1usize..5, dup in 0usize..3, extra in 0usize..3, seed in any::<u64>()) {
        let s = setup(&sig, base, dup, extra, seed);
        let inst = instance(&s, s.psi.clone(), s.c_min * 1.05 + 1e-6);
        prop_assert!(inst.contraction_check(1e-9));
        prop_assert!(inst.features_are_multipliers(1e-8).unwrap());
        let count = inst.features().len();
        for a in 0..count {
            let phi = inst.construct_phi(a, 1e-8).unwrap();
            for (&x, p) in inst.uniqueness_set().iter().zip(inst.psi()) {
                let want = inst.features().value(a, x) * p;
                prop_assert!(phi.evaluate(x).unwrap().approx_eq(&want, 1e-8 * (1.0 + want.norm())));
            }
            prop_assert!(inst.modulus_bound_check(a, 1e-8, 1e-8).unwrap());
            for b in 0..count {
                prop_assert!(inst.intertwining_check(a, b, 1e-8).unwrap());
            }
        }
        let mut r = common::rng(seed ^ 0x5eed);
        let coeffs: Vec<Element> = (0..inst.space().len()).map(|_| random::element(&sig, &mut r)).collect();
        let g = inst.space().vector(&coeffs).unwrap();
        prop_assert!(inst.functional_bound_check(&g, 1e-8).unwrap());
    }

    /// Scaling ψ past the threshold breaks the contraction condition.
    #[test]
    fn scaled_psi_violates(sig in commutative(), base in 2usize..5, dup in 0usize..2, seed in any::<u64>()) {
        let s = setup(&sig, base, dup, 1, seed);
        prop_assume!(s.c_min > 1e-3);
        let c = s.c_min * 1.05;
        let scaled: Vec<Element> = s.psi.iter().map(|p| p.scale(C64::new(1.5, 0.0))).collect();
        prop_assert!(!instance(&s, scaled, c).contraction_check(1e-9));
        prop_assert!(!instance(&s, s.psi.clone(), s.c_min * 0.95).contraction_check(1e-9));
    }

    /// The threshold agrees with a brute-force search over random coefficient
    /// vectors: no quadratic form exceeds it.
    #[test]
    fn threshold_dominates_sampled_ratios(base in 1usize..5, seed in any::<u64>()) {
        let sig = Signature::scalar();
        let s = setup(&sig, base, 0, 1, seed);
        let k = rkhcm::Kernel::from_features(&s.features);
        let psi: Vec<f64> = s.psi.iter().map(|p| p.block(0)[(0, 0)].re).collect();
        let mut r = common::rng(seed);
        for _ in 0..200 {
            let a: Vec<f64> = (0..base).map(|_| r.random_range(-1.0..1.0)).collect();
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..base {
                for j in 0..base {
                    let kij = k.get(i, j).block(0)[(0, 0)].re;
                    num += a[i] * a[j] * kij * psi[i] * psi[j];
                    den += a[i] * a[j] * kij;
                }
            }
            prop_assert!(num <= s.c_min * s.c_min * den * (1.0 + 1e-9) + 1e-12);
        }
    }
}

#[test]
fn rejects_non_uniqueness_sets() {
    let sig = Signature::scalar();
    let s = random::psi_setup(&sig, 3, 0, 3, &mut common::rng(3));
    let err = PsiContractionInstance::new(s.features, vec![0, 1], s.psi[..2].to_vec(), 1.0, 1e-9).unwrap_err();
    assert!(matches!(err, Error::NotSetOfUniqueness));
}
