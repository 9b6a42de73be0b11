//! One function per subcommand, each turning an instance into checks and results.

use std::sync::Arc;

use rkhcm::cstar::block_psd;
use rkhcm::frames::{frame_bounds, is_parseval, papadakis_identity_check};
use rkhcm::kernel::KEY_SEPARATOR;
use rkhcm::linalg;
use rkhcm::operators::{multiplication_operator, multiplier_adjoint_check, recover_symbol};
use rkhcm::space::{tensor_embed, tensor_norm};
use rkhcm::{AdjointableOp, Element, Error, Frame, Kernel, ModuleSpace, MultiplierSymbol, PsiContractionInstance};
use serde_json::{Map, Value};

use crate::instance::{InputError, Instance, Parser, Source};
use crate::report::{element as element_value, num, Check, Outcome};
use crate::{read_instance, Command, Tolerances, UsageError};

pub fn echo_args(cmd: &Command) -> Map<String, Value> {
    let mut m = Map::new();
    match cmd {
        Command::Interpolate { points: Some(p), targets: Some(t) } => {
            m.insert("points".into(), Value::from(p.clone()));
            m.insert("targets".into(), Value::String(t.clone()));
        }
        Command::Deflate { point } => {
            m.insert("point".into(), Value::String(point.clone()));
        }
        Command::Tensor { with } => {
            m.insert("with".into(), Value::String(with.display().to_string()));
        }
        _ => {}
    }
    m
}

pub fn dispatch(cmd: &Command, inst: &Instance, tol: Tolerances) -> Result<Outcome, UsageError> {
    match cmd {
        Command::CheckKernel => Ok(check_kernel(inst, tol)),
        Command::Interpolate { points, targets } => interpolate(inst, tol, points.as_deref(), targets.as_deref()),
        Command::Deflate { point } => deflate(inst, tol, point),
        Command::Tensor { with } => tensor(inst, tol, &read_instance(with)?),
        Command::Multiplier => multiplier(inst, tol),
        Command::Berezin => berezin(inst, tol),
        Command::FrameBounds => frame_command(inst, tol, FrameMode::Bounds),
        Command::Parseval => frame_command(inst, tol, FrameMode::Parseval),
        Command::Papadakis => frame_command(inst, tol, FrameMode::Papadakis),
        Command::PsiMultiplier => psi_multiplier(inst, tol),
        Command::Selftest => unreachable!("selftest needs no instance"),
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError::Usage(msg.into())
}

fn internal(e: Error) -> UsageError {
    UsageError::Usage(format!("unexpected failure: {e}"))
}

fn table(inst: &Instance, idx: impl IntoIterator<Item = usize>, values: &[Element]) -> Value {
    let labels = inst.points.labels();
    Value::Object(idx.into_iter().zip(values).map(|(i, v)| (labels[i].clone(), element_value(v))).collect())
}

fn kernel_table(k: &Kernel) -> Value {
    let labels = k.points().labels();
    let mut m = Map::new();
    for (s, ls) in labels.iter().enumerate() {
        for (t, lt) in labels.iter().enumerate() {
            m.insert(format!("{ls}{KEY_SEPARATOR}{lt}"), element_value(k.get(s, t)));
        }
    }
    Value::Object(m)
}

fn min_eigenvalues(k: &Kernel) -> Value {
    Value::Array(
        (0..k.signature().len())
            .map(|i| num(linalg::min_eigenvalue(&linalg::hermitian_part(&k.gram(i)))))
            .collect(),
    )
}

/// The module of the instance kernel, or a failing positivity check.
fn module(inst: &Instance, tol: Tolerances, out: &mut Outcome) -> Option<Arc<ModuleSpace>> {
    match ModuleSpace::new(inst.kernel(), tol.psd) {
        Ok(e) => Some(e),
        Err(_) => {
            out.check(Check::new("kernel_positive_definite", false).detail("the kernel is not positive definite"));
            None
        }
    }
}

fn check_kernel(inst: &Instance, tol: Tolerances) -> Outcome {
    let k = inst.kernel();
    let r = k.validate(tol.psd);
    let mut out = Outcome::default();
    out.check(Check::new("hermitian", r.hermitian));
    out.check(Check::new("positive_definite", r.positive_definite));
    out.check(Check::new("schwarz", r.schwarz_ok));
    out.result("strictly_positive", Value::Bool(r.strictly_positive));
    out.result("min_eigenvalues", min_eigenvalues(&k));
    if let Ok(e) = ModuleSpace::new(k, tol.psd) {
        out.result("realization_dimension", Value::from(e.hilbert_realization().dimension()));
    }
    out
}

fn interpolate(inst: &Instance, tol: Tolerances, points: Option<&[String]>, targets: Option<&str>) -> Result<Outcome, UsageError> {
    let (idx, values) = match (points, targets, &inst.interpolation) {
        (Some(p), Some(t), _) => {
            let mut idx = Vec::with_capacity(p.len());
            for label in p {
                let i = inst.points.index_of(label).map_err(|_| usage(format!("--points: unknown point {label:?}")))?;
                if idx.contains(&i) {
                    return Err(usage(format!("--points: point {label:?} listed twice")));
                }
                idx.push(i);
            }
            let parsed: Value = serde_json::from_str(t).map_err(|e| usage(format!("--targets: invalid JSON: {e}")))?;
            let values = Parser::with(inst.signature.clone(), inst.points.clone())
                .elements(&parsed, "--targets")
                .map_err(|source| UsageError::Input { path: "<args>".into(), source })?;
            if values.len() != idx.len() {
                return Err(usage(format!("--targets: {} points but {} targets", idx.len(), values.len())));
            }
            (idx, values)
        }
        (None, None, Some(i)) => (i.points.clone(), i.targets.clone()),
        _ => return Err(usage("interpolate needs --points and --targets or an \"interpolation\" block")),
    };
    let mut out = Outcome::default();
    let Some(e) = module(inst, tol, &mut out) else {
        return Ok(out);
    };
    out.result("points", Value::from(idx.iter().map(|&i| inst.points.label(i).to_string()).collect::<Vec<_>>()));
    match e.minimal_norm_interpolant(&idx, &values, tol.residual) {
        Ok(it) => {
            out.check(Check::new("in_range", true).value(num(it.residual)));
            out.result("norm", num(it.norm));
            out.result("vector_norm", num(it.f.norm()));
            out.result("coefficients", table(inst, idx.iter().copied(), &it.coefficients));
            out.result("values", table(inst, 0..inst.points.len(), &it.f.values()));
        }
        Err(Error::NotInRange { residual }) => {
            out.check(Check::new("in_range", false).value(num(residual)).detail("targets are not in the range of the Gram matrix"));
        }
        Err(err) => return Err(internal(err)),
    }
    Ok(out)
}

fn deflate(inst: &Instance, tol: Tolerances, point: &str) -> Result<Outcome, UsageError> {
    let s0 = inst.points.index_of(point).map_err(|_| usage(format!("--point: unknown point {point:?}")))?;
    let k = inst.kernel();
    let mut out = Outcome::default();
    let k0 = match k.deflate(s0, tol.invert) {
        Ok(k0) => k0,
        Err(Error::NotInvertible { sigma, .. }) => {
            out.check(Check::new("diagonal_invertible", false).value(num(sigma)));
            return Ok(out);
        }
        Err(err) => return Err(internal(err)),
    };
    out.check(Check::new("diagonal_invertible", true));
    out.check(Check::new("positive_semidefinite", block_psd(&k0.array(), tol.psd).map_err(internal)?));
    let leak = (0..k.len()).map(|t| k0.get(s0, t).norm().max(k0.get(t, s0).norm())).fold(0.0, f64::max);
    out.check(Check::new("vanishes_at_point", leak <= tol.psd).value(num(leak)));
    if let Some(e) = module(inst, tol, &mut out) {
        let rest = (0..k.len())
            .map(|s| e.section(s).sub(&e.projection(&e.section(s), &[s0])?))
            .collect::<rkhcm::Result<Vec<_>>>()
            .map_err(internal)?;
        let mut gap: f64 = 0.0;
        for s in 0..k.len() {
            for t in 0..k.len() {
                let ip = rest[s].inner_product(&rest[t]).map_err(internal)?;
                gap = gap.max((k0.get(s, t) - &ip).norm());
            }
        }
        out.check(Check::new("matches_projection", gap <= tol.residual * (1.0 + k.gram_norm())).value(num(gap)));
    }
    out.result("point", Value::String(point.to_string()));
    out.result("kernel", kernel_table(&k0));
    Ok(out)
}

fn tensor(inst: &Instance, tol: Tolerances, other: &Instance) -> Result<Outcome, UsageError> {
    let (k1, k2) = (inst.kernel(), other.kernel());
    let product = k1.tensor(&k2);
    let mut out = Outcome::default();
    let report = product.validate(tol.psd);
    out.check(Check::new("positive_definite", report.positive_definite));
    if let (Ok(e1), Ok(e2), Ok(ep)) = (
        ModuleSpace::new(k1.clone(), tol.psd),
        ModuleSpace::new(k2.clone(), tol.psd),
        ModuleSpace::new(product.clone(), tol.psd),
    ) {
        let mut pairs = Vec::new();
        let mut worst: f64 = 0.0;
        for x in 0..e1.len() {
            for s in 0..e2.len() {
                let pair = (e1.section(x), e2.section(s));
                let u = [pair.clone()];
                let norm = tensor_norm(&u).map_err(internal)?;
                let embedded = tensor_embed(&e1, &e2, &ep, &u).map_err(internal)?.norm();
                worst = worst.max((embedded - norm).abs() / (1.0 + norm));
                pairs.push(pair);
            }
        }
        let norm = tensor_norm(&pairs).map_err(internal)?;
        let embedded = tensor_embed(&e1, &e2, &ep, &pairs).map_err(internal)?.norm();
        worst = worst.max((embedded - norm).abs() / (1.0 + norm));
        out.check(Check::new("isometry", worst <= tol.residual).value(num(worst)));
    }
    if k1.signature().blocks() == [1] && k2.signature().blocks() == [1] {
        let (e1, _) = linalg::hermitian_eigen(&linalg::hermitian_part(&k1.gram(0)));
        let (e2, _) = linalg::hermitian_eigen(&linalg::hermitian_part(&k2.gram(0)));
        let mut expected: Vec<f64> = e1.iter().flat_map(|a| e2.iter().map(move |b| a * b)).collect();
        expected.sort_by(f64::total_cmp);
        let (got, _) = linalg::hermitian_eigen(&linalg::hermitian_part(&product.gram(0)));
        let scale = expected.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let gap = got.iter().zip(&expected).map(|(g, e)| (g - e).abs()).fold(0.0, f64::max);
        out.check(Check::new("kronecker_spectrum", gap <= tol.residual * scale.max(1e-300)).value(num(gap)));
    }
    out.result("signature", Value::from(product.signature().blocks().to_vec()));
    out.result("points", Value::from(product.points().labels().to_vec()));
    out.result("min_eigenvalues", min_eigenvalues(&product));
    out.result("kernel", kernel_table(&product));
    Ok(out)
}

fn multiplier(inst: &Instance, tol: Tolerances) -> Result<Outcome, UsageError> {
    if inst.symbols.is_empty() {
        return Err(usage("multiplier needs a \"symbols\" block"));
    }
    let mut out = Outcome::default();
    let Some(e) = module(inst, tol, &mut out) else {
        return Ok(out);
    };
    let mut summary = Map::new();
    for (name, values) in &inst.symbols {
        let f = MultiplierSymbol::new(&e, values.clone()).map_err(internal)?;
        let mut entry = Map::new();
        match multiplication_operator(&f, tol.residual) {
            Ok(m) => {
                out.check(Check::new(format!("{name}.multiplier"), true));
                let adjoint = multiplier_adjoint_check(&f, tol.residual).map_err(internal)?;
                out.check(Check::new(format!("{name}.adjoint"), adjoint));
                entry.insert("norm".into(), num(m.norm()));
            }
            Err(Error::NotAMultiplier { point, residual }) => {
                out.check(
                    Check::new(format!("{name}.multiplier"), false)
                        .value(num(residual))
                        .detail(format!("f·k_{point} is not in the module")),
                );
            }
            Err(err) => return Err(internal(err)),
        }
        summary.insert(name.clone(), Value::Object(entry));
    }
    out.result("symbols", Value::Object(summary));
    Ok(out)
}

fn berezin(inst: &Instance, tol: Tolerances) -> Result<Outcome, UsageError> {
    if inst.operator.is_none() && inst.symbols.is_empty() {
        return Err(usage("berezin needs an \"operator\" or a \"symbols\" block"));
    }
    let mut out = Outcome::default();
    let Some(e) = module(inst, tol, &mut out) else {
        return Ok(out);
    };
    let k = e.kernel();
    let admissible: Vec<bool> = (0..e.len()).map(|s| k.get(s, s).invert(tol.invert).is_ok()).collect();
    let recovered_table = |values: &[Element]| -> Value {
        Value::Object(
            (0..e.len())
                .map(|s| {
                    let v = if admissible[s] { element_value(&values[s]) } else { Value::Null };
                    (inst.points.label(s).to_string(), v)
                })
                .collect(),
        )
    };
    if let Some(images) = &inst.operator {
        let images = images.iter().map(|c| e.vector(c)).collect::<rkhcm::Result<Vec<_>>>().map_err(internal)?;
        match AdjointableOp::from_action(&e, &images, tol.residual) {
            Ok(t) => {
                out.check(Check::new("operator_consistent", true));
                let rec = recover_symbol(&t, tol.invert, tol.residual).map_err(internal)?;
                let mut check = Check::new("operator.is_multiplication", rec.is_multiplication);
                if let Some(r) = rec.residual {
                    check = check.value(num(r));
                } else {
                    check = check.detail("the Berezin symbol is not a multiplier");
                }
                out.check(check);
                out.result("operator", recovered_table(rec.symbol.values()));
            }
            Err(Error::InconsistentOperator { residual }) => {
                out.check(Check::new("operator_consistent", false).value(num(residual)));
            }
            Err(err) => return Err(internal(err)),
        }
    }
    let mut symbols = Map::new();
    for (name, values) in &inst.symbols {
        let f = MultiplierSymbol::new(&e, values.clone()).map_err(internal)?;
        let m = match multiplication_operator(&f, tol.residual) {
            Ok(m) => m,
            Err(Error::NotAMultiplier { point, residual }) => {
                out.check(Check::new(format!("{name}.multiplier"), false).value(num(residual)).detail(format!("f·k_{point} is not in the module")));
                continue;
            }
            Err(err) => return Err(internal(err)),
        };
        let rec = recover_symbol(&m, tol.invert, tol.residual).map_err(internal)?;
        let gap = (0..e.len())
            .filter(|&s| admissible[s])
            .map(|s| (rec.symbol.value(s) - f.value(s)).norm() / (1.0 + f.value(s).norm()))
            .fold(0.0, f64::max);
        out.check(Check::new(format!("{name}.recovered"), gap <= tol.residual).value(num(gap)));
        out.check(Check::new(format!("{name}.is_multiplication"), rec.is_multiplication));
        symbols.insert(name.clone(), recovered_table(rec.symbol.values()));
    }
    if !symbols.is_empty() {
        out.result("symbols", Value::Object(symbols));
    }
    out.result(
        "admissible",
        Value::from(admissible.iter().enumerate().filter(|(_, a)| **a).map(|(s, _)| inst.points.label(s).to_string()).collect::<Vec<_>>()),
    );
    Ok(out)
}

enum FrameMode {
    Bounds,
    Parseval,
    Papadakis,
}

fn frame_command(inst: &Instance, tol: Tolerances, mode: FrameMode) -> Result<Outcome, UsageError> {
    let Some(coeffs) = &inst.frame else {
        return Err(usage("this command needs a \"frame\" block"));
    };
    let mut out = Outcome::default();
    let Some(e) = module(inst, tol, &mut out) else {
        return Ok(out);
    };
    let members = coeffs.iter().map(|c| e.vector(c)).collect::<rkhcm::Result<Vec<_>>>().map_err(internal)?;
    let frame = Frame::new(&e, members).map_err(internal)?;
    let bounds = frame_bounds(&frame);
    out.result("realization_dimension", Value::from(e.hilbert_realization().dimension()));
    if let Ok(b) = bounds {
        out.result("lower", num(b.lower));
        out.result("upper", num(b.upper));
    }
    match mode {
        FrameMode::Bounds => match bounds {
            Ok(b) => out.check(Check::new("is_frame", b.lower > tol.psd).value(num(b.lower))),
            Err(Error::EmptyRealization) => out.check(Check::new("is_frame", false).detail("the module is zero-dimensional")),
            Err(err) => return Err(internal(err)),
        },
        FrameMode::Parseval => {
            out.check(Check::new("parseval", is_parseval(&frame, tol.residual)));
            out.result("papadakis_identity", Value::Bool(papadakis_identity_check(&frame, tol.residual)));
        }
        FrameMode::Papadakis => {
            let identity = papadakis_identity_check(&frame, tol.residual);
            let parseval = is_parseval(&frame, tol.residual);
            out.check(Check::new("papadakis_identity", identity));
            out.check(Check::new("equivalence", identity == parseval));
            out.result("parseval", Value::Bool(parseval));
        }
    }
    Ok(out)
}

fn psi_multiplier(inst: &Instance, tol: Tolerances) -> Result<Outcome, UsageError> {
    let Source::Features(features) = &inst.source else {
        return Err(usage("psi-multiplier needs a \"features\" block"));
    };
    let Some(psi) = &inst.psi else {
        return Err(usage("psi-multiplier needs a \"psi\" block"));
    };
    let mut out = Outcome::default();
    let pi = match PsiContractionInstance::new(features.clone(), psi.uniqueness_set.clone(), psi.values.clone(), psi.c, tol.psd) {
        Ok(pi) => pi,
        Err(Error::NonCentral { point }) => {
            return Err(UsageError::Input {
                path: "<input>".into(),
                source: InputError { location: format!("psi.values.{point}"), message: "ψ must take central values".into() },
            })
        }
        Err(Error::NotSetOfUniqueness) => {
            out.check(Check::new("uniqueness_set", false).detail("the sections over the set do not span the module"));
            return Ok(out);
        }
        Err(err) => return Err(internal(err)),
    };
    out.check(Check::new("uniqueness_set", true));
    out.check(Check::new("contraction", pi.contraction_check(tol.psd)));
    let count = features.len();
    let mut phis = Vec::with_capacity(count);
    let mut all_phi = true;
    for a in 0..count {
        match pi.construct_phi(a, tol.residual) {
            Ok(phi) => {
                out.check(Check::new(format!("phi[{a}]"), true));
                phis.push(table(inst, 0..inst.points.len(), &phi.values()));
            }
            Err(Error::NoExtension { residual }) => {
                all_phi = false;
                out.check(Check::new(format!("phi[{a}]"), false).value(num(residual)).detail("no module element takes these values"));
                phis.push(Value::Null);
            }
            Err(err) => return Err(internal(err)),
        }
    }
    if all_phi {
        let mut failing = 0usize;
        for a in 0..count {
            for b in a + 1..count {
                if !pi.intertwining_check(a, b, tol.residual).map_err(internal)? {
                    failing += 1;
                }
            }
        }
        out.check(Check::new("intertwining", failing == 0).value(Value::from(failing)));
        let mut modulus = Map::new();
        let mut applicable = true;
        let mut holds = true;
        for a in 0..count {
            match pi.modulus_bound_check(a, tol.invert, tol.residual) {
                Ok(ok) => holds &= ok,
                Err(err @ (Error::NonCentral { .. } | Error::DiagonalNotInvertible { .. })) => {
                    applicable = false;
                    modulus.insert("detail".into(), Value::String(err.to_string()));
                    break;
                }
                Err(err) => return Err(internal(err)),
            }
        }
        if applicable {
            out.check(Check::new("modulus_bound", holds));
        }
        modulus.insert("applicable".into(), Value::Bool(applicable));
        out.result("modulus_bound", Value::Object(modulus));
    }
    out.result("c", num(psi.c));
    out.result("features", Value::from(count));
    out.result("features_are_multipliers", Value::Bool(pi.features_are_multipliers(tol.residual).map_err(internal)?));
    out.result("phi", Value::Array(phis));
    Ok(out)
}
