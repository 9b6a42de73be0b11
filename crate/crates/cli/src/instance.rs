//! Instance files.
//!
//! ```json
//! {
//!   "signature": [1],
//!   "points": ["s1", "s2"],
//!   "kernel": {"s1|s1": [[[2]]], "s1|s2": [[[1]]], "s2|s1": [[[1]]], "s2|s2": [[[2]]]},
//!   "symbols": {"f": {"s1": [[[1]]], "s2": [[[[0, 1]]]]}},
//!   "operator": {"s1": {"s2": [[[1]]]}, "s2": {}},
//!   "frame": [{"s1": [[[1]]]}, {"s2": [[[1]]]}],
//!   "interpolation": {"points": ["s1"], "targets": [[[[1]]]]},
//!   "psi": {"uniqueness_set": ["s1", "s2"], "c": 1.5, "values": {"s1": [[[0.5]]], "s2": [[[0.5]]]}},
//!   "tolerances": {"psd": 1e-9, "residual": 1e-8, "invert": 1e-8}
//! }
//! ```
//!
//! An algebra element is a list of square row-major blocks following the
//! signature; a complex entry is `[re, im]`, and a bare number is read as
//! `[re, 0]`. Exactly one of `kernel` (every `"s|t"` pair) or `features`
//! (a list of tables over all points) is required. Tables under `frame` and
//! `operator` are sparse coefficient maps: `{"t": a}` stands for `Σ_t k_t a`
//! and missing points contribute zero. `operator` lists the image of every
//! `k_s`. The `psi` values cover the uniqueness set exactly.

use std::fmt;

use rkhcm::kernel::KEY_SEPARATOR;
use rkhcm::linalg::{CMatrix, C64};
use rkhcm::{Element, FeatureFamily, Kernel, PointSet, Signature};
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct InputError {
    pub location: String,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.location.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.location, self.message)
        }
    }
}

fn fail<T>(location: &str, message: impl Into<String>) -> Result<T, InputError> {
    Err(InputError { location: location.to_string(), message: message.into() })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Kernel(Kernel),
    Features(FeatureFamily),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interpolation {
    pub points: Vec<usize>,
    pub targets: Vec<Element>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiBlock {
    pub uniqueness_set: Vec<usize>,
    pub c: f64,
    pub values: Vec<Element>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tolerances {
    pub psd: Option<f64>,
    pub residual: Option<f64>,
    pub invert: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub signature: Signature,
    pub points: PointSet,
    pub source: Source,
    pub symbols: Vec<(String, Vec<Element>)>,
    /// Dense coefficients of `T(k_s)` for each `s`.
    pub operator: Option<Vec<Vec<Element>>>,
    /// Dense coefficients of each frame member.
    pub frame: Option<Vec<Vec<Element>>>,
    pub interpolation: Option<Interpolation>,
    pub psi: Option<PsiBlock>,
    pub tolerances: Tolerances,
}

const FIELDS: [&str; 10] = [
    "signature",
    "points",
    "kernel",
    "features",
    "symbols",
    "operator",
    "frame",
    "interpolation",
    "psi",
    "tolerances",
];

impl Instance {
    pub fn kernel(&self) -> Kernel {
        match &self.source {
            Source::Kernel(k) => k.clone(),
            Source::Features(f) => Kernel::from_features(f),
        }
    }

    pub fn parse_str(text: &str) -> Result<Instance, InputError> {
        let value: Value = serde_json::from_str(text).map_err(|e| InputError {
            location: format!("line {} column {}", e.line(), e.column()),
            message: format!("invalid JSON: {e}"),
        })?;
        Parser::new().instance(&value)
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        let labels = self.points.labels();
        m.insert("signature".into(), Value::from(self.signature.blocks().to_vec()));
        m.insert("points".into(), Value::from(labels.to_vec()));
        match &self.source {
            Source::Kernel(k) => {
                let mut table = Map::new();
                for (s, ls) in labels.iter().enumerate() {
                    for (t, lt) in labels.iter().enumerate() {
                        table.insert(format!("{ls}{KEY_SEPARATOR}{lt}"), element_value(k.get(s, t)));
                    }
                }
                m.insert("kernel".into(), Value::Object(table));
            }
            Source::Features(f) => {
                let members = f.members().iter().map(|e| dense_table(labels, e)).collect();
                m.insert("features".into(), Value::Array(members));
            }
        }
        if !self.symbols.is_empty() {
            let symbols = self.symbols.iter().map(|(name, v)| (name.clone(), dense_table(labels, v))).collect();
            m.insert("symbols".into(), Value::Object(symbols));
        }
        if let Some(op) = &self.operator {
            let images = labels.iter().zip(op).map(|(l, c)| (l.clone(), sparse_table(labels, c))).collect();
            m.insert("operator".into(), Value::Object(images));
        }
        if let Some(frame) = &self.frame {
            m.insert("frame".into(), Value::Array(frame.iter().map(|c| sparse_table(labels, c)).collect()));
        }
        if let Some(interp) = &self.interpolation {
            let mut i = Map::new();
            i.insert("points".into(), label_list(labels, &interp.points));
            i.insert("targets".into(), Value::Array(interp.targets.iter().map(element_value).collect()));
            m.insert("interpolation".into(), Value::Object(i));
        }
        if let Some(psi) = &self.psi {
            let mut p = Map::new();
            p.insert("uniqueness_set".into(), label_list(labels, &psi.uniqueness_set));
            p.insert("c".into(), number(psi.c));
            let values = psi.uniqueness_set.iter().zip(&psi.values).map(|(&x, v)| (labels[x].clone(), element_value(v)));
            p.insert("values".into(), Value::Object(values.collect()));
            m.insert("psi".into(), Value::Object(p));
        }
        let t = self.tolerances;
        if t != Tolerances::default() {
            let mut tol = Map::new();
            for (name, v) in [("psd", t.psd), ("residual", t.residual), ("invert", t.invert)] {
                if let Some(v) = v {
                    tol.insert(name.into(), number(v));
                }
            }
            m.insert("tolerances".into(), Value::Object(tol));
        }
        Value::Object(m)
    }

    pub fn to_canonical_string(&self) -> String {
        crate::json::to_canonical_string(&self.to_value())
    }
}

pub fn number(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn element_value(a: &Element) -> Value {
    Value::Array(
        a.blocks()
            .iter()
            .map(|b| {
                Value::Array(
                    (0..b.nrows())
                        .map(|i| {
                            Value::Array((0..b.ncols()).map(|j| Value::Array(vec![number(b[(i, j)].re), number(b[(i, j)].im)])).collect())
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn label_list(labels: &[String], idx: &[usize]) -> Value {
    Value::Array(idx.iter().map(|&i| Value::String(labels[i].clone())).collect())
}

fn dense_table(labels: &[String], values: &[Element]) -> Value {
    Value::Object(labels.iter().zip(values).map(|(l, v)| (l.clone(), element_value(v))).collect())
}

fn sparse_table(labels: &[String], values: &[Element]) -> Value {
    Value::Object(
        labels
            .iter()
            .zip(values)
            .filter(|(_, v)| v.norm() != 0.0)
            .map(|(l, v)| (l.clone(), element_value(v)))
            .collect(),
    )
}

/// Parser state: the signature and points once known.
pub struct Parser {
    sig: Option<Signature>,
    points: Option<PointSet>,
}

impl Default for Parser {
    fn default() -> Self {
        Self::new()
    }
}

impl Parser {
    pub fn new() -> Self {
        Parser { sig: None, points: None }
    }

    /// A parser for standalone values (e.g. command-line targets).
    pub fn with(sig: Signature, points: PointSet) -> Self {
        Parser { sig: Some(sig), points: Some(points) }
    }

    fn sig(&self) -> &Signature {
        self.sig.as_ref().expect("signature parsed first")
    }

    fn points(&self) -> &PointSet {
        self.points.as_ref().expect("points parsed first")
    }

    pub fn instance(&mut self, v: &Value) -> Result<Instance, InputError> {
        let obj = object(v, "")?;
        for key in obj.keys() {
            if !FIELDS.contains(&key.as_str()) {
                return fail(key, "unknown field");
            }
        }
        let sig = self.signature(required(obj, "signature", "")?)?;
        self.sig = Some(sig.clone());
        let points = self.point_set(required(obj, "points", "")?)?;
        self.points = Some(points.clone());
        let source = match (obj.get("kernel"), obj.get("features")) {
            (Some(_), Some(_)) => return fail("", "exactly one of \"kernel\" and \"features\" is allowed, found both"),
            (None, None) => return fail("", "missing field \"kernel\" (or \"features\")"),
            (Some(k), None) => Source::Kernel(self.kernel_table(k, "kernel")?),
            (None, Some(f)) => Source::Features(self.features(f, "features")?),
        };
        let symbols = match obj.get("symbols") {
            None => Vec::new(),
            Some(s) => object(s, "symbols")?
                .iter()
                .map(|(name, t)| Ok((name.clone(), self.dense_table(t, &format!("symbols.{name}"))?)))
                .collect::<Result<_, InputError>>()?,
        };
        let operator = obj.get("operator").map(|v| self.operator(v, "operator")).transpose()?;
        let frame = obj
            .get("frame")
            .map(|v| {
                let items = array(v, "frame")?;
                if items.is_empty() {
                    return fail("frame", "a frame needs at least one member");
                }
                items.iter().enumerate().map(|(j, m)| self.sparse_table(m, &format!("frame[{j}]"))).collect()
            })
            .transpose()?;
        let interpolation = obj.get("interpolation").map(|v| self.interpolation(v, "interpolation")).transpose()?;
        let psi = obj.get("psi").map(|v| self.psi(v, "psi")).transpose()?;
        let tolerances = obj.get("tolerances").map(|v| tolerances(v, "tolerances")).transpose()?.unwrap_or_default();
        Ok(Instance { signature: sig, points, source, symbols, operator, frame, interpolation, psi, tolerances })
    }

    fn signature(&self, v: &Value) -> Result<Signature, InputError> {
        let items = array(v, "signature")?;
        let blocks = items
            .iter()
            .enumerate()
            .map(|(i, b)| match b.as_u64() {
                Some(n) if n > 0 => Ok(n as usize),
                _ => fail(&format!("signature[{i}]"), "expected a positive integer"),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Signature::new(blocks).or_else(|e| fail("signature", e.to_string()))
    }

    fn point_set(&self, v: &Value) -> Result<PointSet, InputError> {
        let items = array(v, "points")?;
        let mut labels = Vec::with_capacity(items.len());
        for (i, p) in items.iter().enumerate() {
            let here = format!("points[{i}]");
            let Some(label) = p.as_str() else {
                return fail(&here, "expected a string label");
            };
            if let Err(e) = PointSet::new([label]) {
                return fail(&here, e.to_string());
            }
            if labels.iter().any(|l| l == label) {
                return fail(&here, format!("duplicate point label {label:?}"));
            }
            labels.push(label.to_string());
        }
        PointSet::new(labels).or_else(|e| fail("points", e.to_string()))
    }

    fn label(&self, v: &Value, here: &str) -> Result<usize, InputError> {
        let Some(label) = v.as_str() else {
            return fail(here, "expected a point label");
        };
        self.lookup(label, here)
    }

    fn lookup(&self, label: &str, here: &str) -> Result<usize, InputError> {
        self.points().index_of(label).or_else(|_| fail(here, format!("unknown point {label:?}")))
    }

    pub fn element(&self, v: &Value, here: &str) -> Result<Element, InputError> {
        let sig = self.sig();
        let blocks = array(v, here)?;
        if blocks.len() != sig.len() {
            return fail(here, format!("expected {} blocks for signature {:?}, found {}", sig.len(), sig.blocks(), blocks.len()));
        }
        let mut out = Vec::with_capacity(blocks.len());
        for (k, b) in blocks.iter().enumerate() {
            let n = sig.size(k);
            let bhere = format!("{here}[{k}]");
            let rows = array(b, &bhere)?;
            if rows.len() != n {
                return fail(&bhere, format!("expected {n} rows, found {}", rows.len()));
            }
            let mut m = CMatrix::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                let rhere = format!("{bhere}[{i}]");
                let entries = array(row, &rhere)?;
                if entries.len() != n {
                    return fail(&rhere, format!("expected {n} entries, found {}", entries.len()));
                }
                for (j, z) in entries.iter().enumerate() {
                    m[(i, j)] = complex(z, &format!("{rhere}[{j}]"))?;
                }
            }
            out.push(m);
        }
        Element::from_blocks(sig.clone(), out).or_else(|e| fail(here, e.to_string()))
    }

    pub fn elements(&self, v: &Value, here: &str) -> Result<Vec<Element>, InputError> {
        array(v, here)?.iter().enumerate().map(|(i, e)| self.element(e, &format!("{here}[{i}]"))).collect()
    }

    fn kernel_table(&self, v: &Value, here: &str) -> Result<Kernel, InputError> {
        let obj = object(v, here)?;
        let n = self.points().len();
        let mut values: Vec<Option<Element>> = vec![None; n * n];
        for (key, e) in obj {
            let khere = format!("{here}[{key:?}]");
            let Some((s, t)) = key.split_once(KEY_SEPARATOR) else {
                return fail(&khere, "expected a key of the form \"s|t\"");
            };
            let (s, t) = (self.lookup(s, &khere)?, self.lookup(t, &khere)?);
            values[s * n + t] = Some(self.element(e, &khere)?);
        }
        let labels = self.points().labels();
        let mut table = Vec::with_capacity(n * n);
        for (i, v) in values.into_iter().enumerate() {
            match v {
                Some(e) => table.push(e),
                None => return fail(here, format!("missing entry \"{}|{}\"", labels[i / n], labels[i % n])),
            }
        }
        Kernel::new(self.points().clone(), self.sig().clone(), table).or_else(|e| fail(here, e.to_string()))
    }

    fn dense_table(&self, v: &Value, here: &str) -> Result<Vec<Element>, InputError> {
        let obj = object(v, here)?;
        let mut values: Vec<Option<Element>> = vec![None; self.points().len()];
        for (label, e) in obj {
            let ehere = format!("{here}.{label}");
            values[self.lookup(label, &ehere)?] = Some(self.element(e, &ehere)?);
        }
        values
            .into_iter()
            .enumerate()
            .map(|(s, v)| v.map_or_else(|| fail(here, format!("missing value at point {:?}", self.points().label(s))), Ok))
            .collect()
    }

    fn sparse_table(&self, v: &Value, here: &str) -> Result<Vec<Element>, InputError> {
        let obj = object(v, here)?;
        let mut values = vec![Element::zero(self.sig()); self.points().len()];
        for (label, e) in obj {
            let ehere = format!("{here}.{label}");
            values[self.lookup(label, &ehere)?] = self.element(e, &ehere)?;
        }
        Ok(values)
    }

    fn features(&self, v: &Value, here: &str) -> Result<FeatureFamily, InputError> {
        let items = array(v, here)?;
        if items.is_empty() {
            return fail(here, "at least one feature is required");
        }
        let members = items
            .iter()
            .enumerate()
            .map(|(a, t)| self.dense_table(t, &format!("{here}[{a}]")))
            .collect::<Result<_, _>>()?;
        FeatureFamily::new(self.points().clone(), self.sig().clone(), members).or_else(|e| fail(here, e.to_string()))
    }

    fn operator(&self, v: &Value, here: &str) -> Result<Vec<Vec<Element>>, InputError> {
        let obj = object(v, here)?;
        let mut images: Vec<Option<Vec<Element>>> = vec![None; self.points().len()];
        for (label, t) in obj {
            let ohere = format!("{here}.{label}");
            images[self.lookup(label, &ohere)?] = Some(self.sparse_table(t, &ohere)?);
        }
        images
            .into_iter()
            .enumerate()
            .map(|(s, v)| v.map_or_else(|| fail(here, format!("missing image of k_{}", self.points().label(s))), Ok))
            .collect()
    }

    fn label_list(&self, v: &Value, here: &str) -> Result<Vec<usize>, InputError> {
        let items = array(v, here)?;
        let mut out = Vec::with_capacity(items.len());
        for (i, p) in items.iter().enumerate() {
            let phere = format!("{here}[{i}]");
            let idx = self.label(p, &phere)?;
            if out.contains(&idx) {
                return fail(&phere, "point listed twice");
            }
            out.push(idx);
        }
        Ok(out)
    }

    fn interpolation(&self, v: &Value, here: &str) -> Result<Interpolation, InputError> {
        let obj = object(v, here)?;
        only(obj, &["points", "targets"], here)?;
        let points = self.label_list(required(obj, "points", here)?, &format!("{here}.points"))?;
        let targets = self.elements(required(obj, "targets", here)?, &format!("{here}.targets"))?;
        if points.len() != targets.len() {
            return fail(here, format!("{} points but {} targets", points.len(), targets.len()));
        }
        Ok(Interpolation { points, targets })
    }

    fn psi(&self, v: &Value, here: &str) -> Result<PsiBlock, InputError> {
        let obj = object(v, here)?;
        only(obj, &["uniqueness_set", "c", "values"], here)?;
        let uniqueness_set = self.label_list(required(obj, "uniqueness_set", here)?, &format!("{here}.uniqueness_set"))?;
        let c = positive(required(obj, "c", here)?, &format!("{here}.c"))?;
        let vhere = format!("{here}.values");
        let table = object(required(obj, "values", here)?, &vhere)?;
        let mut values = Vec::with_capacity(uniqueness_set.len());
        for &x in &uniqueness_set {
            let label = self.points().label(x);
            match table.get(label) {
                Some(e) => values.push(self.element(e, &format!("{vhere}.{label}"))?),
                None => return fail(&vhere, format!("missing value at {label:?}")),
            }
        }
        if let Some(extra) = table.keys().find(|k| !uniqueness_set.iter().any(|&x| self.points().label(x) == k.as_str())) {
            return fail(&format!("{vhere}.{extra}"), "point is not in the uniqueness set");
        }
        Ok(PsiBlock { uniqueness_set, c, values })
    }
}

fn object<'a>(v: &'a Value, here: &str) -> Result<&'a Map<String, Value>, InputError> {
    v.as_object().map_or_else(|| fail(here, "expected an object"), Ok)
}

fn array<'a>(v: &'a Value, here: &str) -> Result<&'a Vec<Value>, InputError> {
    v.as_array().map_or_else(|| fail(here, "expected an array"), Ok)
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, here: &str) -> Result<&'a Value, InputError> {
    obj.get(key).map_or_else(|| fail(here, format!("missing field {key:?}")), Ok)
}

fn only(obj: &Map<String, Value>, keys: &[&str], here: &str) -> Result<(), InputError> {
    match obj.keys().find(|k| !keys.contains(&k.as_str())) {
        Some(k) => fail(&format!("{here}.{k}"), "unknown field"),
        None => Ok(()),
    }
}

fn finite(v: &Value, here: &str) -> Result<f64, InputError> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => fail(here, "expected a finite number"),
    }
}

fn positive(v: &Value, here: &str) -> Result<f64, InputError> {
    let x = finite(v, here)?;
    if x > 0.0 {
        Ok(x)
    } else {
        fail(here, "expected a positive number")
    }
}

fn complex(v: &Value, here: &str) -> Result<C64, InputError> {
    match v {
        Value::Number(_) => Ok(C64::new(finite(v, here)?, 0.0)),
        Value::Array(parts) if parts.len() == 2 => {
            Ok(C64::new(finite(&parts[0], &format!("{here}[0]"))?, finite(&parts[1], &format!("{here}[1]"))?))
        }
        _ => fail(here, "expected a complex number [re, im] or a real number"),
    }
}

fn tolerances(v: &Value, here: &str) -> Result<Tolerances, InputError> {
    let obj = object(v, here)?;
    only(obj, &["psd", "residual", "invert"], here)?;
    let get = |k: &str| obj.get(k).map(|x| positive(x, &format!("{here}.{k}"))).transpose();
    Ok(Tolerances { psd: get("psd")?, residual: get("residual")?, invert: get("invert")? })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"signature": [1], "points": ["s1", "s2"],
        "kernel": {"s1|s1": [[[2]]], "s1|s2": [[[1]]], "s2|s1": [[[1]]], "s2|s2": [[[[2, 0]]]]}}"#;

    #[test]
    fn minimal_scalar_file() {
        let inst = Instance::parse_str(MINIMAL).unwrap();
        assert_eq!(inst.kernel(), Kernel::scalar(&[&[2.0, 1.0], &[1.0, 2.0]]));
        let canonical = inst.to_canonical_string();
        let again = Instance::parse_str(&canonical).unwrap();
        assert_eq!(again, inst);
        assert_eq!(again.to_canonical_string(), canonical);
        assert!(canonical.contains("\"s1|s2\": [[[[1.0, 0.0]]]]"));
    }

    #[test]
    fn both_kernel_and_features() {
        let text = MINIMAL.replace("\"kernel\"", "\"features\": [{\"s1\": [[[1]]], \"s2\": [[[1]]]}], \"kernel\"");
        let err = Instance::parse_str(&text).unwrap_err();
        assert!(err.message.contains("exactly one"));
    }

    #[test]
    fn locations() {
        let err = Instance::parse_str(&MINIMAL.replace("[[[[2, 0]]]]", "[[[[2, \"x\"]]]]")).unwrap_err();
        assert_eq!(err.location, "kernel[\"s2|s2\"][0][0][0][1]");
        let err = Instance::parse_str(&MINIMAL.replace("\"s2\"]", "\"s1\"]")).unwrap_err();
        assert_eq!(err.location, "points[1]");
        let err = Instance::parse_str(&MINIMAL.replace("\"s2|s1\": [[[1]]], ", "")).unwrap_err();
        assert!(err.message.contains("missing entry \"s2|s1\""));
        let err = Instance::parse_str(&MINIMAL.replace("[[[1]]], \"s2|s1\"", "[[[1]], [[1]]], \"s2|s1\"")).unwrap_err();
        assert!(err.message.contains("expected 1 blocks"));
        let err = Instance::parse_str("{\"signature\": [1],\n \"points\": [}").unwrap_err();
        assert!(err.location.starts_with("line 2"));
        let err = Instance::parse_str(&MINIMAL.replace("\"signature\"", "\"extra\": 1, \"signature\"")).unwrap_err();
        assert_eq!(err.location, "extra");
    }

    #[test]
    fn optional_blocks_round_trip() {
        let text = MINIMAL.replace(
            "\"kernel\"",
            r#""symbols": {"f": {"s1": [[[1]]], "s2": [[[[0, 1]]]]}},
               "operator": {"s1": {"s2": [[[1]]]}, "s2": {}},
               "frame": [{"s1": [[[1]]]}, {"s2": [[[1]]], "s1": [[[0]]]}],
               "interpolation": {"points": ["s1"], "targets": [[[[1]]]]},
               "psi": {"uniqueness_set": ["s1", "s2"], "c": 2, "values": {"s2": [[[0.5]]], "s1": [[[1]]]}},
               "tolerances": {"psd": 1e-7},
               "kernel""#,
        );
        let inst = Instance::parse_str(&text).unwrap();
        assert_eq!(inst.frame.as_ref().unwrap()[1][0], Element::zero(&inst.signature));
        assert_eq!(inst.psi.as_ref().unwrap().values[1], Element::real_diagonal(&[0.5]));
        assert_eq!(inst.tolerances.psd, Some(1e-7));
        let canonical = inst.to_canonical_string();
        assert_eq!(Instance::parse_str(&canonical).unwrap().to_canonical_string(), canonical);
        assert!(!canonical.contains("\"s1\": [[[[0.0, 0.0]]]]"));
    }
}
