//! Experiment records and their CSV/JSON encodings.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{HeatError, Result};
use crate::format::fmt_g17;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

impl Verdict {
    pub fn from_pass(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Whether a run with this verdict should exit successfully.
    pub fn is_ok(self) -> bool {
        !matches!(self, Verdict::Fail)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Informational => "informational",
        })
    }
}

/// Direction in which a row's `bound` constrains its `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundSense {
    /// `value <= bound`.
    Upper,
    /// `value >= bound`.
    Lower,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Param {
    Number(f64),
    Text(String),
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Number(v)
    }
}

impl From<usize> for Param {
    fn from(v: usize) -> Self {
        Param::Number(v as f64)
    }
}

impl From<bool> for Param {
    fn from(v: bool) -> Self {
        Param::Text(v.to_string())
    }
}

impl From<&str> for Param {
    fn from(v: &str) -> Self {
        Param::Text(v.to_string())
    }
}

impl From<String> for Param {
    fn from(v: String) -> Self {
        Param::Text(v)
    }
}

impl Param {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Param::Number(v) => Some(*v),
            Param::Text(_) => None,
        }
    }

    fn to_json(&self) -> String {
        match self {
            Param::Number(v) if v.is_finite() => fmt_g17(*v),
            Param::Number(v) => json_string(&fmt_g17(*v)),
            Param::Text(s) => json_string(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub x: f64,
    pub value: f64,
    pub bound: Option<f64>,
}

impl Row {
    pub fn new(x: f64, value: f64, bound: Option<f64>) -> Self {
        Row { x, value, bound }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub name: String,
    pub params: BTreeMap<String, Param>,
    pub rows: Vec<Row>,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub bound_sense: BoundSense,
}

impl ExperimentRecord {
    /// Rows are sorted by abscissa; duplicates are rejected.
    pub fn new(name: impl Into<String>, tolerance: f64, mut rows: Vec<Row>) -> Result<Self> {
        let name = name.into();
        if rows.is_empty() {
            return Err(HeatError::InvalidRecord(format!("{name}: no rows")));
        }
        rows.sort_by(|a, b| a.x.total_cmp(&b.x));
        if rows.windows(2).any(|w| !(w[1].x > w[0].x)) {
            return Err(HeatError::InvalidRecord(format!("{name}: abscissae are not distinct")));
        }
        Ok(ExperimentRecord {
            name,
            params: BTreeMap::new(),
            rows,
            verdict: Verdict::Informational,
            tolerance,
            bound_sense: BoundSense::Upper,
        })
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Param>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn with_sense(mut self, sense: BoundSense) -> Self {
        self.bound_sense = sense;
        self
    }

    pub fn param(&self, key: &str) -> Option<&Param> {
        self.params.get(key)
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.param(key).and_then(Param::as_number)
    }

    /// Every bounded row respects its bound up to the relative tolerance.
    pub fn bounds_hold(&self) -> bool {
        self.rows.iter().all(|r| match r.bound {
            None => true,
            Some(b) => {
                let slack = self.tolerance * b.abs();
                match self.bound_sense {
                    BoundSense::Upper => r.value <= b + slack,
                    BoundSense::Lower => r.value >= b - slack,
                }
            }
        })
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn abscissae(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn to_json(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{}:{}", json_string(k), v.to_json()))
            .collect();
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{{\"x\":{},\"value\":{},\"bound\":{}}}",
                    json_number(r.x),
                    json_number(r.value),
                    r.bound.map_or("null".to_string(), json_number)
                )
            })
            .collect();
        format!(
            "{{\"name\":{},\"params\":{{{}}},\"tolerance\":{},\"verdict\":\"{}\",\"bound_sense\":\"{}\",\"rows\":[{}]}}",
            json_string(&self.name),
            params.join(","),
            json_number(self.tolerance),
            self.verdict,
            match self.bound_sense {
                BoundSense::Upper => "upper",
                BoundSense::Lower => "lower",
            },
            rows.join(",")
        )
    }

    /// CSV with header `abscissa,value,bound`; missing bounds are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("abscissa,value,bound\n");
        for r in &self.rows {
            out.push_str(&fmt_g17(r.x));
            out.push(',');
            out.push_str(&fmt_g17(r.value));
            out.push(',');
            if let Some(b) = r.bound {
                out.push_str(&fmt_g17(b));
            }
            out.push('\n');
        }
        out
    }
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        fmt_g17(v)
    } else {
        json_string(&fmt_g17(v))
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}
