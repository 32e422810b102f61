//! Spectrum JSON files.
//!
//! ```json
//! { "mode": "exact", "beta": "1", "log_base": "1/2",
//!   "levels": [{"energy": "0", "degeneracy": 1}, {"energy": "1", "degeneracy": 2}] }
//! { "mode": "logfloat", "weights": ["1/2", 0.25, {"log": true, "value": -1.5}] }
//! ```

use std::path::Path;
use std::str::FromStr;

use bosecanon_core::numerics::{Backend, LogFloat, Mode, Rational};
use bosecanon_core::spectrum::{InverseTemperature, LevelSet, WeightVector};
use num_bigint::BigInt;
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] bosecanon_core::Error),
}

fn schema<T>(msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Schema(msg.into()))
}

/// A number as written in the file, before a backend is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Rational(Rational),
    Float(f64),
    Log(LogFloat),
}

impl Number {
    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            Number::Rational(q) => Some(q.clone()),
            Number::Float(x) => Rational::from_float(*x),
            Number::Log(_) => None,
        }
    }

    fn to_backend<S: Backend>(&self, what: &str) -> Result<S, FormatError> {
        match (S::MODE, self) {
            (_, Number::Rational(q)) => Ok(S::from_rational(q)?),
            (Mode::LogFloat, Number::Float(x)) => {
                let lf = LogFloat::from_linear(*x).ok_or_else(|| {
                    FormatError::Schema(format!("{what}: {x} is not a finite nonnegative number"))
                })?;
                Ok(S::from_scalar(&bosecanon_core::numerics::Scalar::Log(lf))?)
            }
            (Mode::LogFloat, Number::Log(lf)) => {
                Ok(S::from_scalar(&bosecanon_core::numerics::Scalar::Log(*lf))?)
            }
            (Mode::Exact, _) => schema(format!(
                "{what}: exact mode needs rationals written as \"p/q\" strings"
            )),
        }
    }
}

/// Parses `"p/q"`, `"p"`, an integer, a float or a `{"log": true, "value": v}` object.
pub fn parse_number(v: &Value) -> Result<Number, FormatError> {
    match v {
        Value::String(s) => parse_rational(s).map(Number::Rational),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Number::Rational(Rational::from_integer(BigInt::from(i))))
            } else {
                Ok(Number::Float(n.as_f64().unwrap_or(f64::NAN)))
            }
        }
        Value::Object(o) if o.get("log") == Some(&Value::Bool(true)) => match o.get("value") {
            Some(Value::Null) => Ok(Number::Log(LogFloat::ZERO)),
            Some(Value::Number(n)) => n
                .as_f64()
                .and_then(LogFloat::from_ln)
                .map(Number::Log)
                .ok_or_else(|| FormatError::Schema(format!("bad log value {n}"))),
            _ => schema("log-value object needs a numeric \"value\""),
        },
        other => schema(format!("expected a number, got {other}")),
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, FormatError> {
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim())
            .map_err(|_| FormatError::Schema(format!("bad rational {s:?}")))?;
        let d = BigInt::from_str(d.trim())
            .map_err(|_| FormatError::Schema(format!("bad rational {s:?}")))?;
        if d == BigInt::from(0) {
            return schema(format!("zero denominator in {s:?}"));
        }
        Ok(Rational::new(n, d))
    } else {
        BigInt::from_str(t)
            .map(Rational::from_integer)
            .map_err(|_| FormatError::Schema(format!("bad rational {s:?}")))
    }
}

pub fn parse_mode(s: &str) -> Option<Mode> {
    match s {
        "exact" => Some(Mode::Exact),
        "logfloat" => Some(Mode::LogFloat),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Content {
    Levels {
        energies: Vec<Number>,
        degeneracies: Vec<u32>,
    },
    Weights(Vec<Number>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFile {
    pub mode: Mode,
    pub beta: Option<Number>,
    pub log_base: Option<Rational>,
    pub content: Content,
}

impl SpectrumFile {
    pub fn read(path: &Path) -> Result<Self, FormatError> {
        let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let value: Value = serde_json::from_str(text)?;
        let Value::Object(obj) = value else {
            return schema("spectrum file must be a JSON object");
        };
        Self::from_object(&obj)
    }

    fn from_object(obj: &Map<String, Value>) -> Result<Self, FormatError> {
        for key in obj.keys() {
            if !matches!(
                key.as_str(),
                "mode" | "beta" | "log_base" | "levels" | "weights"
            ) {
                return schema(format!("unknown key {key:?}"));
            }
        }
        let mode = match obj.get("mode") {
            Some(Value::String(s)) => {
                parse_mode(s).ok_or_else(|| FormatError::Schema(format!("unknown mode {s:?}")))?
            }
            Some(_) => return schema("\"mode\" must be \"exact\" or \"logfloat\""),
            None => return schema("missing \"mode\""),
        };
        let beta = obj.get("beta").map(parse_number).transpose()?;
        let log_base = match obj.get("log_base") {
            None => None,
            Some(v) => match parse_number(v)? {
                Number::Rational(q) => Some(q),
                _ => return schema("\"log_base\" must be a rational string"),
            },
        };
        let content = match (obj.get("levels"), obj.get("weights")) {
            (Some(levels), None) => parse_levels(levels)?,
            (None, Some(Value::Array(ws))) => {
                Content::Weights(ws.iter().map(parse_number).collect::<Result<_, _>>()?)
            }
            (None, Some(_)) => return schema("\"weights\" must be an array"),
            (Some(_), Some(_)) => {
                return schema("give exactly one of \"levels\" and \"weights\", not both")
            }
            (None, None) => return schema("give exactly one of \"levels\" and \"weights\""),
        };
        let file = SpectrumFile {
            mode,
            beta,
            log_base,
            content,
        };
        file.check(mode)?;
        Ok(file)
    }

    /// Rejects data the given mode cannot represent.
    pub fn check(&self, mode: Mode) -> Result<(), FormatError> {
        if let Content::Levels { .. } = self.content {
            if self.beta.is_none() {
                return schema("a level list needs \"beta\"");
            }
            if mode == Mode::Exact && self.log_base.is_none() {
                return schema("exact mode with levels needs \"log_base\"");
            }
        }
        if mode == Mode::Exact {
            let numbers: Vec<&Number> = match &self.content {
                Content::Levels { energies, .. } => {
                    energies.iter().chain(self.beta.as_ref()).collect()
                }
                Content::Weights(ws) => ws.iter().collect(),
            };
            if numbers.iter().any(|n| !matches!(n, Number::Rational(_))) {
                return schema("exact mode needs every number written as a rational (\"p/q\" string or integer)");
            }
        }
        Ok(())
    }

    pub fn has_levels(&self) -> bool {
        matches!(self.content, Content::Levels { .. })
    }

    /// The inverse temperature with `beta` replaced.
    pub fn inverse_temperature_at(
        &self,
        mode: Mode,
        beta: &Number,
    ) -> Result<InverseTemperature, FormatError> {
        match (&self.log_base, mode) {
            (Some(base), _) => {
                let b = beta.to_rational().ok_or_else(|| {
                    FormatError::Schema("beta must be rational when a log base is given".into())
                })?;
                Ok(InverseTemperature::rational(b, base.clone())?)
            }
            (None, Mode::Exact) => Err(bosecanon_core::Error::ExactBetaRequired.into()),
            (None, Mode::LogFloat) => {
                let b = match beta {
                    Number::Rational(q) => num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN),
                    Number::Float(x) => *x,
                    Number::Log(lf) => lf.to_linear(),
                };
                Ok(InverseTemperature::float(b)?)
            }
        }
    }

    pub fn level_set(&self, mode: Mode) -> Result<LevelSet, FormatError> {
        self.check(mode)?;
        let Content::Levels {
            energies,
            degeneracies,
        } = &self.content
        else {
            return Err(bosecanon_core::Error::EnergiesRequired.into());
        };
        let beta = self.inverse_temperature_at(mode, self.beta.as_ref().expect("checked"))?;
        let energies = energies
            .iter()
            .map(|e| {
                e.to_rational()
                    .ok_or_else(|| FormatError::Schema("energies must be finite numbers".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LevelSet::new(energies, degeneracies.clone(), beta)?)
    }

    pub fn weights<S: Backend>(&self) -> Result<WeightVector<S>, FormatError> {
        self.check(S::MODE)?;
        match &self.content {
            Content::Weights(ws) => {
                let values = ws
                    .iter()
                    .map(|n| n.to_backend::<S>("weight"))
                    .collect::<Result<Vec<S>, _>>()?;
                Ok(WeightVector::new(values)?)
            }
            Content::Levels { .. } => Ok(bosecanon_core::spectrum::weights_from_spectrum(
                &self.level_set(S::MODE)?,
            )?),
        }
    }
}

fn parse_levels(v: &Value) -> Result<Content, FormatError> {
    let Value::Array(items) = v else {
        return schema("\"levels\" must be an array");
    };
    let mut energies = Vec::with_capacity(items.len());
    let mut degeneracies = Vec::with_capacity(items.len());
    for item in items {
        let Value::Object(o) = item else {
            return schema("each level must be an object with \"energy\" and \"degeneracy\"");
        };
        for key in o.keys() {
            if key != "energy" && key != "degeneracy" {
                return schema(format!("unknown level key {key:?}"));
            }
        }
        let energy = o
            .get("energy")
            .ok_or_else(|| FormatError::Schema("level without \"energy\"".into()))?;
        energies.push(parse_number(energy)?);
        let d = match o.get("degeneracy") {
            None => 1,
            Some(Value::Number(n)) => n
                .as_u64()
                .and_then(|d| u32::try_from(d).ok())
                .filter(|&d| d >= 1)
                .ok_or_else(|| {
                    FormatError::Schema(format!("degeneracy must be a positive integer, got {n}"))
                })?,
            Some(other) => {
                return schema(format!(
                    "degeneracy must be a positive integer, got {other}"
                ))
            }
        };
        degeneracies.push(d);
    }
    Ok(Content::Levels {
        energies,
        degeneracies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn weights_file() {
        let f = SpectrumFile::parse(r#"{"mode": "exact", "weights": ["1/2", "1/4"]}"#).unwrap();
        let w = f.weights::<Rational>().unwrap();
        assert_eq!(w.as_slice(), &[q(1, 2), q(1, 4)]);
    }

    #[test]
    fn ladder_file() {
        let f = SpectrumFile::parse(
            r#"{"mode": "exact", "beta": "1", "log_base": "1/2",
                "levels": [{"energy": "0", "degeneracy": 1}, {"energy": 1, "degeneracy": 2}]}"#,
        )
        .unwrap();
        let w = f.weights::<Rational>().unwrap();
        assert_eq!(w.as_slice(), &[q(1, 1), q(1, 2), q(1, 2)]);
    }

    #[test]
    fn logfloat_values() {
        let f = SpectrumFile::parse(
            r#"{"mode": "logfloat", "weights": ["1/2", 0.25, {"log": true, "value": 0.0}]}"#,
        )
        .unwrap();
        let w = f.weights::<LogFloat>().unwrap();
        let linear: Vec<f64> = w.iter().map(|x| x.to_linear()).collect();
        assert!(
            (linear[0] - 0.5).abs() < 1e-15
                && (linear[1] - 0.25).abs() < 1e-15
                && (linear[2] - 1.0).abs() < 1e-15
        );
    }

    #[test]
    fn rejects_bad_files() {
        for text in [
            r#"{"mode": "exact"}"#,
            r#"{"mode": "exact", "weights": [0.5]}"#,
            r#"{"mode": "exact", "weights": ["1/0"]}"#,
            r#"{"mode": "quantum", "weights": ["1"]}"#,
            r#"{"mode": "exact", "weights": ["1"], "levels": []}"#,
            r#"{"mode": "exact", "beta": "1", "levels": [{"energy": "0"}]}"#,
            r#"{"mode": "exact", "weights": ["1"], "extra": 1}"#,
            r#"[1, 2]"#,
        ] {
            assert!(SpectrumFile::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn nonpositive_weight_is_core_error() {
        let f = SpectrumFile::parse(r#"{"mode": "exact", "weights": ["0", "1/2"]}"#).unwrap();
        assert!(matches!(f.weights::<Rational>(), Err(FormatError::Core(_))));
    }
}
