//! Built-in oracle suite: library results against closed forms and worked
//! examples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rkhcm::frames::{canonical_tight, frame_bounds, is_parseval, papadakis_identity_check};
use rkhcm::linalg::{self, CMatrix, C64};
use rkhcm::operators::{multiplication_operator, recover_symbol};
use rkhcm::{random, AdjointableOp, Element, Frame, Kernel, ModuleSpace, PointSet, PsiContractionInstance, Signature};
use serde_json::Value;

use crate::report::{num, Check, Outcome};
use crate::Tolerances;

type Case = fn(Tolerances) -> Result<f64, String>;

const CASES: [(&str, Case, f64); 10] = [
    ("eigen_closed_form_2x2", eigen_closed_form, 1e-12),
    ("reconstruction", reconstruction, 1e-12),
    ("worked_frame_bounds", worked_frame_bounds, 1e-10),
    ("worked_interpolation_norm", worked_interpolation, 1e-12),
    ("worked_deflation", worked_deflation, 1e-12),
    ("kronecker_spectrum", kronecker_spectrum, 1e-10),
    ("berezin_recovery", berezin_recovery, 1e-9),
    ("non_multiplication_flagged", non_multiplication, 0.5),
    ("canonical_tight_parseval", canonical_tight_parseval, 1e-8),
    ("psi_contraction", psi_contraction, 1e-8),
];

pub fn run(tol: Tolerances) -> Outcome {
    let mut out = Outcome::default();
    for (name, case, limit) in CASES {
        let check = match case(tol) {
            Ok(err) => Check::new(name, err <= limit).value(num(err)),
            Err(msg) => Check::new(name, false).detail(msg),
        };
        out.check(check);
    }
    let passed = out.checks.iter().filter(|c| c.passed).count();
    out.result("total", Value::from(out.checks.len()));
    out.result("passed", Value::from(passed));
    out
}

fn s(x: f64) -> Element {
    Element::real_diagonal(&[x])
}

fn example(tol: Tolerances) -> Result<std::sync::Arc<ModuleSpace>, String> {
    ModuleSpace::new(Kernel::scalar(&[&[2.0, 1.0], &[1.0, 2.0]]), tol.psd).map_err(|e| e.to_string())
}

/// Hermitian 2×2 spectra against the characteristic polynomial.
fn eigen_closed_form(_: Tolerances) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sig = Signature::new(vec![2]).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let h = random::hermitian(&sig, &mut rng);
        let m = h.block(0);
        let (a, d, b) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)].norm());
        let mid = (a + d) / 2.0;
        let rad = (((a - d) / 2.0).powi(2) + b * b).sqrt();
        let (vals, vecs) = linalg::hermitian_eigen(m);
        worst = worst.max((vals[0] - (mid - rad)).abs()).max((vals[1] - (mid + rad)).abs());
        let back = &vecs * CMatrix::from_diagonal(&vals.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>().into()) * vecs.adjoint();
        worst = worst.max(linalg::spectral_norm(&(back - m)) / (1.0 + h.norm()));
    }
    Ok(worst)
}

/// `⟨k_s, k_t⟩ = K(s, t)` on seeded strictly positive kernels.
fn reconstruction(tol: Tolerances) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for blocks in [vec![1], vec![2], vec![1, 2]] {
        let sig = Signature::new(blocks).map_err(|e| e.to_string())?;
        for n in 1..=6 {
            let k = random::strictly_pd_kernel(&PointSet::numbered(n), &sig, 0.5, &mut rng);
            let e = ModuleSpace::new(k, tol.psd).map_err(|e| e.to_string())?;
            for a in 0..n {
                for b in 0..n {
                    let ip = e.section(a).inner_product(&e.section(b)).map_err(|e| e.to_string())?;
                    worst = worst.max((&ip - e.kernel().get(a, b)).norm() / (1.0 + e.kernel().get(a, b).norm()));
                }
            }
        }
    }
    Ok(worst)
}

/// Frame `{k_s1, k_s2}` on `[[2,1],[1,2]]` has bounds `(1, 3)`.
fn worked_frame_bounds(tol: Tolerances) -> Result<f64, String> {
    let e = example(tol)?;
    let f = Frame::new(&e, vec![e.section(0), e.section(1)]).map_err(|e| e.to_string())?;
    let b = frame_bounds(&f).map_err(|e| e.to_string())?;
    Ok((b.lower - 1.0).abs().max((b.upper - 3.0).abs()))
}

/// Target 1 at `s1` of `[[2,1],[1,2]]`: `f = k_s1 / 2` with norm `√0.5`.
fn worked_interpolation(tol: Tolerances) -> Result<f64, String> {
    let e = example(tol)?;
    let it = e.minimal_norm_interpolant(&[0], &[s(1.0)], tol.residual).map_err(|e| e.to_string())?;
    Ok((it.norm - 0.5f64.sqrt()).abs().max((it.coefficients[0].norm() - 0.5).abs()))
}

/// Deflating `[[2,1],[1,2]]` at `s1` leaves `[[0,0],[0,3/2]]`.
fn worked_deflation(tol: Tolerances) -> Result<f64, String> {
    let k0 = example(tol)?.kernel().deflate(0, tol.invert).map_err(|e| e.to_string())?;
    let expected = [[0.0, 0.0], [0.0, 1.5]];
    let mut worst: f64 = 0.0;
    for (a, row) in expected.iter().enumerate() {
        for (b, &x) in row.iter().enumerate() {
            worst = worst.max((k0.get(a, b) - &s(x)).norm());
        }
    }
    Ok(worst)
}

/// `[[2,1],[1,2]] ⊗ [[2,1],[1,2]]` has spectrum `{1, 3, 3, 9}`.
fn kronecker_spectrum(_: Tolerances) -> Result<f64, String> {
    let k = Kernel::scalar(&[&[2.0, 1.0], &[1.0, 2.0]]);
    let (vals, _) = linalg::hermitian_eigen(&k.tensor(&k).gram(0));
    Ok(vals.iter().zip([1.0, 3.0, 3.0, 9.0]).map(|(v, e)| (v - e).abs()).fold(0.0, f64::max))
}

/// The Berezin symbol of `M_f` is `f`.
fn berezin_recovery(tol: Tolerances) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sig = Signature::new(vec![1, 2]).map_err(|e| e.to_string())?;
    let e = ModuleSpace::new(random::strictly_pd_kernel(&PointSet::numbered(4), &sig, 0.5, &mut rng), tol.psd)
        .map_err(|e| e.to_string())?;
    let values: Vec<Element> = (0..4).map(|_| random::element(&sig, &mut rng)).collect();
    let f = rkhcm::MultiplierSymbol::new(&e, values).map_err(|e| e.to_string())?;
    let m = multiplication_operator(&f, tol.residual).map_err(|e| e.to_string())?;
    let rec = recover_symbol(&m, tol.invert, tol.residual).map_err(|e| e.to_string())?;
    if !rec.is_multiplication {
        return Err("M_f was not recognized as a multiplication operator".into());
    }
    Ok((0..4).map(|t| (rec.symbol.value(t) - f.value(t)).norm()).fold(0.0, f64::max))
}

/// `x ↦ k_s1 ⟨k_s2, x⟩` has Berezin symbol 1 on `[[2,1],[1,2]]` but is not
/// the identity. Returns 0 when flagged correctly.
fn non_multiplication(tol: Tolerances) -> Result<f64, String> {
    let e = example(tol)?;
    let t = AdjointableOp::rank_one(&e.section(0), &e.section(1)).map_err(|e| e.to_string())?;
    let rec = recover_symbol(&t, tol.invert, tol.residual).map_err(|e| e.to_string())?;
    Ok(if rec.is_multiplication { 1.0 } else { 0.0 })
}

/// `canonical_tight` output is Parseval and satisfies the kernel identity.
fn canonical_tight_parseval(tol: Tolerances) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sig = Signature::new(vec![2]).map_err(|e| e.to_string())?;
    let e = ModuleSpace::new(random::strictly_pd_kernel(&PointSet::numbered(3), &sig, 0.5, &mut rng), tol.psd)
        .map_err(|e| e.to_string())?;
    let members = (0..3).map(|s| e.section(s)).collect();
    let tight = canonical_tight(&Frame::new(&e, members).map_err(|e| e.to_string())?, tol.psd).map_err(|e| e.to_string())?;
    if !is_parseval(&tight, tol.residual) || !papadakis_identity_check(&tight, tol.residual) {
        return Err("canonical tight frame failed the Parseval or kernel identity check".into());
    }
    let b = frame_bounds(&tight).map_err(|e| e.to_string())?;
    Ok((b.lower - 1.0).abs().max((b.upper - 1.0).abs()))
}

/// A seeded ψ-instance at 1.05× the sharp constant passes every check; the
/// same ψ scaled by 1.5 violates the contraction condition.
fn psi_contraction(tol: Tolerances) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sig = Signature::new(vec![1, 1]).map_err(|e| e.to_string())?;
    let setup = random::psi_setup(&sig, 3, 2, 4, &mut rng);
    let c = setup.c_min * 1.05;
    let inst = PsiContractionInstance::new(setup.features.clone(), setup.uniqueness_set.clone(), setup.psi.clone(), c, tol.psd)
        .map_err(|e| e.to_string())?;
    if !inst.contraction_check(tol.psd) {
        return Err("contraction condition rejected a satisfying instance".into());
    }
    let mut worst: f64 = 0.0;
    for a in 0..inst.features().len() {
        let phi = inst.construct_phi(a, tol.residual).map_err(|e| e.to_string())?;
        for (&x, p) in inst.uniqueness_set().iter().zip(inst.psi()) {
            let want = inst.features().value(a, x) * p;
            worst = worst.max((&phi.evaluate(x).map_err(|e| e.to_string())? - &want).norm());
        }
        if !inst.modulus_bound_check(a, tol.invert, tol.residual).map_err(|e| e.to_string())? {
            return Err(format!("modulus bound failed for feature {a}"));
        }
        for b in 0..inst.features().len() {
            if !inst.intertwining_check(a, b, tol.residual).map_err(|e| e.to_string())? {
                return Err(format!("intertwining failed for features {a}, {b}"));
            }
        }
    }
    let scaled: Vec<Element> = setup.psi.iter().map(|p| p.scale(C64::new(1.5, 0.0))).collect();
    let violated = PsiContractionInstance::new(setup.features, setup.uniqueness_set, scaled, c, tol.psd).map_err(|e| e.to_string())?;
    if violated.contraction_check(tol.psd) {
        return Err("contraction condition accepted a scaled ψ".into());
    }
    Ok(worst)
}
