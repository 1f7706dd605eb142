//! The run report written by the `cpscan` binary.
//!
//! One JSON object per run:
//!
//! ```text
//! {
//!   "command": "pvalue",
//!   "version": "0.1.0",
//!   "seed":    null | u64,
//!   "inputs":  { echoed parameters },
//!   "results": { "type": "pvalue" | "stat" | "constants" | "simulate" | "curve", ... },
//!   "flags":   [ "pre-asymptotic: value > 1", ... ]
//! }
//! ```
//!
//! Field names are stable. Non-finite floats are written as the strings
//! `"inf"`, `"-inf"` and `"nan"`. Serializing, parsing and serializing again
//! yields the same bytes.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{ContinuousProblemParams, TailApprox};
use crate::error::{Error, Result};
use crate::fieldsim::{StudyRow, TailEstimate};
use crate::pickands::ConstantEstimate;
use crate::stats::StatReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub inputs: serde_json::Value,
    pub results: Results,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Results {
    Stat { entries: Vec<StatEntry> },
    Pvalue { kind: String, approx: TailApprox, params: Option<ContinuousProblemParams> },
    Constants { coarse: ConstantEstimate, fine: ConstantEstimate },
    Simulate { estimate: TailEstimate, refined: TailEstimate, analytic: Option<TailApprox> },
    Curve { rows: Vec<CurveRow> },
    Study { rows: Vec<StudyRow> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatEntry {
    pub report: StatReport,
    pub pvalue: Option<TailApprox>,
    pub continuous: Option<ContinuousProblemParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub u: f64,
    #[serde(with = "float_repr")]
    pub analytic: f64,
    pub empirical: Option<TailEstimate>,
}

impl RunReport {
    pub fn new(command: &str, seed: Option<u64>, inputs: serde_json::Value, results: Results) -> Self {
        Self { command: command.to_string(), version: VERSION.to_string(), seed, inputs, results, flags: Vec::new() }
    }

    pub fn flag(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.flags.contains(&msg) {
            self.flags.push(msg);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Input(format!("malformed report: {e}")))
    }
}

/// Serde adapter for `f64` that keeps infinities and NaN representable in JSON.
pub mod float_repr {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("not a float: {other}"))),
            },
        }
    }
}
