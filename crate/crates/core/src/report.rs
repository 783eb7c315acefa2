//! JSON certificates with fixed scientific float formatting.

use std::collections::BTreeMap;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::Error;
use crate::expr::Params;

pub const SCHEMA: u32 = 1;

/// A float written as `d.dddddddddddddddde±x` (17 significant digits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sci(pub f64);

pub fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "\"NaN\"".into()
    } else if x > 0.0 {
        "\"Infinity\"".into()
    } else {
        "\"-Infinity\"".into()
    }
}

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(sci(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when `value <= tol`.
    AtMost,
    /// Passes when `value >= tol`.
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Sci,
    pub tol: Sci,
    pub bound: Bound,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_point: Option<Vec<Sci>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value: Sci(value),
            tol: Sci(tol),
            bound: Bound::AtMost,
            pass: value <= tol,
            worst_point: None,
            detail: None,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { bound: Bound::AtLeast, pass: value >= tol, ..Self::at_most(name, value, tol) }
    }

    /// A pass/fail fact with no numeric margin.
    pub fn flag(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        let v = if ok { 0.0 } else { 1.0 };
        Self { detail: Some(detail.into()), ..Self::at_most(name, v, 0.0) }
    }

    pub fn at(mut self, p: Vec<f64>) -> Self {
        self.worst_point = Some(p.into_iter().map(Sci).collect());
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        Self { kind: e.kind(), message: e.to_string() }
    }
}

/// Parameter bindings; complex values with a nonzero imaginary part are
/// written as `[re, im]`.
#[derive(Debug, Clone, Default)]
pub struct ParamMap(pub Params);

impl Serialize for ParamMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            if v.im == 0.0 {
                m.serialize_entry(k, &Sci(v.re))?;
            } else {
                m.serialize_entry(k, &[Sci(v.re), Sci(v.im)])?;
            }
        }
        m.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub params: ParamMap,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, Box<RawValue>>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, family: Option<&str>, params: &Params) -> Self {
        Self {
            schema: SCHEMA,
            command: command.to_string(),
            family: family.map(String::from),
            params: ParamMap(params.clone()),
            checks: Vec::new(),
            tags: Vec::new(),
            error: None,
            extra: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn fail_with(&mut self, e: &Error) {
        self.error = Some(e.into());
        self.pass = false;
    }

    /// Attaches a serializable section; float fields should already be [`Sci`].
    pub fn section<T: Serialize>(&mut self, key: &str, value: &T) {
        let raw = serde_json::value::to_raw_value(value).expect("serializable section");
        self.extra.insert(key.to_string(), raw);
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
