//! Versioned JSON report shared by every subcommand.
//!
//! Top-level keys:
//!
//! | key            | content                                                  |
//! |----------------|----------------------------------------------------------|
//! | `schema`       | always `"ckns-report"`                                   |
//! | `version`      | schema version, currently 1                              |
//! | `generator`    | producing crate and version                              |
//! | `command`      | subcommand that wrote the report                         |
//! | `source`       | input run directory, if any                              |
//! | `constants`    | `Λ0`, `Λ1`, `α`, `α0`, `‖c̃‖∞` of the run                |
//! | `cylinders`    | per-cylinder `A_u … D` with resolution flags             |
//! | `energy`       | local energy inequality records with terms `L1 … I11`    |
//! | `entropy`      | entropy norms per ball                                   |
//! | `pressure`     | local decomposition summaries and `D`-decay tables       |
//! | `verdicts`     | regularity verdicts                                      |
//! | `singular_set` | Vitali cover and premeasure                              |
//! | `checks`       | property checks of `verify`                              |
//!
//! Empty sections are omitted. Non-finite numbers are written as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::constants::Constants;
use crate::diagnostics::energy::EnergyResidual;
use crate::diagnostics::entropy::EntropyNorms;
use crate::diagnostics::quantities::QuantityReport;
use crate::error::{Error, Result};
use crate::pressure::{DecayTable, DecompositionSummary};
use crate::regularity::{RegularityVerdict, SingularSetEstimate};

pub const SCHEMA: &str = "ckns-report";
pub const SCHEMA_VERSION: u32 = 1;

/// Serde adapter writing non-finite floats as strings.
pub mod nonfinite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else if v.is_nan() {
            Repr::Text("nan".into())
        } else if v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(E::custom(format!(
                    "expected a number, \"inf\", \"-inf\" or \"nan\", got `{s}`"
                ))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.map(to_repr).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderEntry {
    pub center: [f64; 3],
    pub t0: f64,
    pub r: f64,
    pub quantities: Option<QuantityReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEntry {
    pub center: [f64; 3],
    pub t0: f64,
    /// Level `n` of the test function `φ_n`.
    pub level: i32,
    /// `min margin / |rhs|` over the records.
    #[serde(with = "nonfinite")]
    pub worst_ratio: f64,
    pub records: Vec<EnergyResidual>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEntry {
    pub center: [f64; 3],
    pub t: f64,
    pub r: f64,
    pub norms: EntropyNorms,
    /// `‖n‖_{L log L}` on the whole box.
    pub luxemburg: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PressureSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decompositions: Vec<DecompositionSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decay: Vec<DecayTable>,
}

impl PressureSection {
    fn is_empty(&self) -> bool {
        self.decompositions.is_empty() && self.decay.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSetEntry {
    /// Exponent `s` of `Σ r^s`.
    pub exponent: f64,
    pub premeasure: f64,
    pub estimate: SingularSetEstimate,
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    #[serde(with = "nonfinite")]
    pub value: f64,
    #[serde(with = "nonfinite")]
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: value <= tolerance,
            value,
            tolerance,
            detail: detail.into(),
        }
    }

    pub fn failed(name: &str, err: &Error) -> Self {
        Self {
            name: name.into(),
            passed: false,
            value: f64::NAN,
            tolerance: f64::NAN,
            detail: format!("error: {err}"),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} (value {:.3e}, tolerance {:.3e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.value,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: u32,
    pub generator: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cylinders: Vec<CylinderEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energy: Vec<EnergyEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entropy: Vec<EntropyEntry>,
    #[serde(default, skip_serializing_if = "PressureSection::is_empty")]
    pub pressure: PressureSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<RegularityVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular_set: Option<SingularSetEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            schema: SCHEMA.into(),
            version: SCHEMA_VERSION,
            generator: concat!("ckns ", env!("CARGO_PKG_VERSION")).into(),
            command: command.into(),
            source: None,
            constants: None,
            cylinders: Vec::new(),
            energy: Vec::new(),
            entropy: Vec::new(),
            pressure: PressureSection::default(),
            verdicts: Vec::new(),
            singular_set: None,
            checks: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text)?;
        if r.schema != SCHEMA {
            return Err(Error::Format(format!(
                "not a {SCHEMA} document (schema `{}`)",
                r.schema
            )));
        }
        if r.version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "report version {} unsupported, expected {SCHEMA_VERSION}",
                r.version
            )));
        }
        Ok(r)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
