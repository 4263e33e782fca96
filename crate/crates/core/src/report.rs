//! Report schema primitives.
//!
//! Reports are JSON documents carrying a `schema_version`, the pipeline
//! config that produced them, and a payload. JSON has no NaN/∞, so every
//! statistic that may be non-finite is wrapped in [`Real`], which encodes as
//! `{"value": <number|null>, "non_finite": <bool>}`.

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const SCHEMA_VERSION: u32 = 1;

/// A real-valued statistic; non-finite values serialize as null plus a flag.
#[derive(Debug, Clone, Copy)]
pub struct Real(pub f64);

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real(v)
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Real", 2)?;
        if self.0.is_finite() {
            s.serialize_field("value", &self.0)?;
            s.serialize_field("non_finite", &false)?;
        } else {
            s.serialize_field("value", &Option::<f64>::None)?;
            s.serialize_field("non_finite", &true)?;
        }
        s.end()
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            value: Option<f64>,
            non_finite: bool,
        }
        let r = Repr::deserialize(deserializer)?;
        match (r.value, r.non_finite) {
            (Some(v), false) => Ok(Real(v)),
            (None, true) => Ok(Real(f64::NAN)),
            _ => Err(D::Error::custom("inconsistent Real encoding")),
        }
    }
}

/// Equality for round-trip checks: finite values compare by value, all
/// non-finite values compare equal (they share one encoding).
impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        if self.0.is_finite() && other.0.is_finite() {
            self.0 == other.0
        } else {
            !self.0.is_finite() && !other.0.is_finite()
        }
    }
}

/// Envelope shared by every report the pipeline writes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportEnvelope<T> {
    pub schema_version: u32,
    pub kind: String,
    pub config: serde_json::Value,
    pub payload: T,
}

impl<T> ReportEnvelope<T> {
    pub fn new(kind: impl Into<String>, config: serde_json::Value, payload: T) -> Self {
        ReportEnvelope {
            schema_version: SCHEMA_VERSION,
            kind: kind.into(),
            config,
            payload,
        }
    }
}

/// An empty payload; `ReportEnvelope<Empty>` is the smallest valid report.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct Empty {}
