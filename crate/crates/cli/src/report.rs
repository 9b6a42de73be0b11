//! Machine-readable reports.

use rkhcm::Element;
use serde_json::{Map, Value};

use crate::instance::number;

/// Magnitudes below this are reported as zero.
pub const ZERO_FLOOR: f64 = 1e-13;

/// Rounds to 12 significant digits and flushes values below [`ZERO_FLOOR`],
/// so reports do not carry last-bit noise.
pub fn num(x: f64) -> Value {
    if x.abs() < ZERO_FLOOR {
        return number(0.0);
    }
    if !x.is_finite() {
        return number(x);
    }
    number(format!("{x:.11e}").parse().unwrap_or(x))
}

/// An algebra element in instance layout with rounded entries.
pub fn element(a: &Element) -> Value {
    Value::Array(
        a.blocks()
            .iter()
            .map(|b| {
                Value::Array(
                    (0..b.nrows())
                        .map(|i| Value::Array((0..b.ncols()).map(|j| Value::Array(vec![num(b[(i, j)].re), num(b[(i, j)].im)])).collect()))
                        .collect(),
                )
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<Value>,
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool) -> Self {
        Check { name: name.into(), passed, value: None, detail: None }
    }

    pub fn value(mut self, v: Value) -> Self {
        self.value = Some(v);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), Value::String(self.name.clone()));
        m.insert("passed".into(), Value::Bool(self.passed));
        if let Some(v) = &self.value {
            m.insert("value".into(), v.clone());
        }
        if let Some(d) = &self.detail {
            m.insert("detail".into(), Value::String(d.clone()));
        }
        Value::Object(m)
    }
}

/// Checks and command-specific results of one run.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Map<String, Value>,
}

impl Outcome {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn result(&mut self, key: &str, v: Value) {
        self.results.insert(key.into(), v);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: Map<String, Value>,
    pub outcome: Outcome,
    pub elapsed_ms: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.outcome.passed()
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("tool".into(), Value::String("rkhcm".into()));
        m.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        m.insert("command".into(), Value::Object(self.command.clone()));
        m.insert("passed".into(), Value::Bool(self.passed()));
        m.insert("checks".into(), Value::Array(self.outcome.checks.iter().map(Check::to_value).collect()));
        m.insert("results".into(), Value::Object(self.outcome.results.clone()));
        m.insert("elapsed_ms".into(), number((self.elapsed_ms * 1000.0).round() / 1000.0));
        Value::Object(m)
    }

    pub fn to_canonical_string(&self) -> String {
        crate::json::to_canonical_string(&self.to_value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn rounding() {
        assert_eq!(num(0.1 + 0.2), number(0.3));
        assert_eq!(num(-0.0), number(0.0));
        assert_eq!(num(std::f64::consts::FRAC_1_SQRT_2), number(0.707106781187));
        assert_eq!(num(3.0000000000000004), number(3.0));
        assert_eq!(num(-1.1e-16), number(0.0));
        assert_eq!(num(2e-12), number(2e-12));
    }

    #[test]
    fn passed_reflects_checks() {
        let mut o = Outcome::default();
        assert!(o.passed());
        o.check(Check::new("a", true));
        o.check(Check::new("b", false).detail("why"));
        assert!(!o.passed());
        let r = Report { command: Map::new(), outcome: o, elapsed_ms: 1.23456 };
        let v = r.to_value();
        assert_eq!(v["passed"], Value::Bool(false));
        assert_eq!(v["checks"][1]["detail"], Value::String("why".into()));
        assert_eq!(v["elapsed_ms"], number(1.235));
    }
}
