//! JSON file formats for sequences, weight functions, matrices, jets and
//! certificates.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use ultradiff_core::bounds::BoundCertificate;
use ultradiff_core::jet::Jet;
use ultradiff_core::matrix::WeightMatrix;
use ultradiff_core::seq::SparseForm;
use ultradiff_core::weight_fn::{Family, WeightFunction};
use ultradiff_core::{Scalar, SeqIndex, Verdict, WeightSequence};

use crate::error::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(&text, path)
}

pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Finite floats as numbers, the rest as the strings `inf`, `-inf`, `nan`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn index_str(k: SeqIndex) -> String {
    k.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseFormFile {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFlags {
    #[serde(default)]
    pub weakly_log_convex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub label: String,
    pub log_terms: Vec<f64>,
    #[serde(default)]
    pub sparse_form: Option<SparseFormFile>,
    #[serde(default)]
    pub flags: SequenceFlags,
}

impl SequenceFile {
    pub fn from_sequence(w: &WeightSequence) -> Self {
        let sparse_form = Some(match w.sparse_form() {
            Some(SparseForm::Gevrey { s }) => SparseFormFile {
                family: "gevrey".into(),
                params: BTreeMap::from([("s".to_string(), s)]),
            },
            Some(SparseForm::AppendixA) => SparseFormFile {
                family: "appendix_a".into(),
                params: BTreeMap::new(),
            },
            None => SparseFormFile {
                family: "none".into(),
                params: BTreeMap::new(),
            },
        });
        SequenceFile {
            label: w.label().to_string(),
            log_terms: w.log_terms().to_vec(),
            sparse_form,
            flags: SequenceFlags {
                weakly_log_convex: w.is_weakly_log_convex(),
            },
        }
    }

    pub fn to_sequence(&self) -> Result<WeightSequence, CliError> {
        let w = WeightSequence::from_log_terms(
            self.label.clone(),
            self.log_terms.clone(),
            self.flags.weakly_log_convex,
        )?;
        let form = match &self.sparse_form {
            None => None,
            Some(f) => match f.family.as_str() {
                "none" => None,
                "appendix_a" => Some(SparseForm::AppendixA),
                "gevrey" => {
                    let s = *f.params.get("s").ok_or_else(|| {
                        CliError::Usage("sparse_form gevrey needs params.s".into())
                    })?;
                    if !(s >= 0.0 && s.is_finite()) {
                        return Err(CliError::Usage("gevrey s must be finite and >= 0".into()));
                    }
                    Some(SparseForm::Gevrey { s })
                }
                other => return Err(CliError::Usage(format!("unknown sparse family `{other}`"))),
            },
        };
        Ok(match form {
            Some(f) => w.with_sparse_form(f),
            None => w,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyFile {
    Power { s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightFunctionFile {
    pub knots: Vec<(f64, f64)>,
    pub tail_slope: f64,
    #[serde(default)]
    pub family: Option<FamilyFile>,
}

impl WeightFunctionFile {
    pub fn from_weight_function(w: &WeightFunction) -> Self {
        WeightFunctionFile {
            knots: w.phi.knots().to_vec(),
            tail_slope: *w.phi.tail_slope(),
            family: w.family.map(|f| match f {
                Family::Power { s } => FamilyFile::Power { s },
            }),
        }
    }

    pub fn to_weight_function(&self) -> Result<WeightFunction, CliError> {
        let family = self.family.as_ref().map(|f| match *f {
            FamilyFile::Power { s } => Family::Power { s },
        });
        Ok(WeightFunction::from_knots(self.knots.clone(), self.tail_slope, family)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub lambdas: Vec<f64>,
    pub rows: Vec<SequenceFile>,
}

impl MatrixFile {
    pub fn from_matrix(m: &WeightMatrix) -> Self {
        MatrixFile {
            lambdas: m.lambdas().to_vec(),
            rows: m.rows().iter().map(SequenceFile::from_sequence).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<WeightMatrix, CliError> {
        let rows = self
            .rows
            .iter()
            .map(SequenceFile::to_sequence)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WeightMatrix::new(self.lambdas.clone(), rows)?)
    }
}

/// A rational entry: `[num, den]` with integers or decimal-integer strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntText {
    Int(i64),
    Text(String),
}

impl IntText {
    fn to_bigint(&self) -> Result<BigInt, CliError> {
        match self {
            IntText::Int(n) => Ok(BigInt::from(*n)),
            IntText::Text(s) => BigInt::from_str(s.trim())
                .map_err(|_| CliError::Usage(format!("`{s}` is not an integer"))),
        }
    }

    fn from_bigint(n: &BigInt) -> Self {
        match i64::try_from(n) {
            Ok(v) => IntText::Int(v),
            Err(_) => IntText::Text(n.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    Rational(Vec<(IntText, IntText)>),
    Float(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetFile {
    pub mode: String,
    pub coefficients: Coefficients,
}

/// A jet in either arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyJet {
    Exact(Jet<BigRational>),
    Float(Jet<f64>),
}

impl JetFile {
    pub fn from_exact(j: &Jet<BigRational>) -> Self {
        JetFile {
            mode: "exact_rational".into(),
            coefficients: Coefficients::Rational(
                j.coefficients()
                    .iter()
                    .map(|c| (IntText::from_bigint(c.numer()), IntText::from_bigint(c.denom())))
                    .collect(),
            ),
        }
    }

    pub fn from_float(j: &Jet<f64>) -> Self {
        JetFile {
            mode: "float".into(),
            coefficients: Coefficients::Float(j.coefficients().to_vec()),
        }
    }

    pub fn to_jet(&self) -> Result<AnyJet, CliError> {
        match (self.mode.as_str(), &self.coefficients) {
            ("exact_rational", Coefficients::Rational(c)) => {
                let mut out = Vec::with_capacity(c.len());
                for (n, d) in c {
                    let d = d.to_bigint()?;
                    if d.is_zero() {
                        return Err(CliError::Usage("zero denominator in jet".into()));
                    }
                    out.push(BigRational::new(n.to_bigint()?, d));
                }
                Ok(AnyJet::Exact(Jet::new(out)?))
            }
            ("float", Coefficients::Float(c)) => {
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::Usage("jet coefficients must be finite".into()));
                }
                Ok(AnyJet::Float(Jet::new(c.clone())?))
            }
            ("exact_rational", Coefficients::Float(c)) => {
                // integer-valued numbers are accepted as exact
                let mut out = Vec::with_capacity(c.len());
                for &x in c {
                    if x.fract() != 0.0 || !x.is_finite() {
                        return Err(CliError::Usage(
                            "exact jets need [num, den] pairs for non-integer coefficients".into(),
                        ));
                    }
                    out.push(BigRational::from_f64(x).expect("finite"));
                }
                Ok(AnyJet::Exact(Jet::new(out)?))
            }
            (m, _) => Err(CliError::Usage(format!(
                "jet mode `{m}` does not match its coefficients (expected exact_rational or float)"
            ))),
        }
    }
}

impl AnyJet {
    pub fn to_file(&self) -> JetFile {
        match self {
            AnyJet::Exact(j) => JetFile::from_exact(j),
            AnyJet::Float(j) => JetFile::from_float(j),
        }
    }
}

pub fn certificate_json(c: &BoundCertificate) -> Value {
    json!({
        "kind": c.kind.as_str(),
        "C": num(c.c),
        "rho": num(c.rho),
        "sequence_label": c.sequence.label(),
        "shift": c.shift.as_str(),
    })
}

pub fn verdict_json(v: &Verdict) -> Value {
    json!({
        "status": v.status.as_str(),
        "truncation": v.truncation,
        "log_constant": num(v.constant_estimate),
        "witness": v.witness.map(|w| json!({
            "j": index_str(w.j),
            "k": index_str(w.k),
            "log_value": num(w.value),
        })),
        "checkpoints": v.checkpoints.iter().map(|c| json!({
            "index": index_str(c.index),
            "stat": num(c.stat),
        })).collect::<Vec<_>>(),
        "note": v.note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn sequence_roundtrip() {
        let g = WeightSequence::gevrey(0.5, 20).unwrap();
        let f = SequenceFile::from_sequence(&g);
        let text = serde_json::to_string(&f).unwrap();
        let back: SequenceFile = serde_json::from_str(&text).unwrap();
        let w = back.to_sequence().unwrap();
        assert_eq!(w.log_terms(), g.log_terms());
        assert_eq!(w.sparse_form(), g.sparse_form());
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_json::<SequenceFile>("{\n  \"label\": \"x\",\n  \"log_terms\": [0, oops]\n}", &PathBuf::from("x.json"))
            .unwrap_err();
        match err {
            CliError::Json { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn log_terms_must_be_numbers() {
        let err = parse_json::<SequenceFile>(r#"{"label": "x", "log_terms": [0, "1"]}"#, &PathBuf::from("x.json"));
        assert!(matches!(err, Err(CliError::Json { .. })));
    }

    #[test]
    fn exact_jet_roundtrip_with_big_entries() {
        let text = r#"{"mode": "exact_rational", "coefficients": [[1, 1], ["123456789012345678901234567890", 7]]}"#;
        let f: JetFile = serde_json::from_str(text).unwrap();
        let AnyJet::Exact(j) = f.to_jet().unwrap() else { panic!() };
        let again = JetFile::from_exact(&j).to_jet().unwrap();
        assert_eq!(again, AnyJet::Exact(j));
    }

    #[test]
    fn weight_function_roundtrip() {
        let w = WeightFunction::power(2.0, 4.0, 8).unwrap();
        let f = WeightFunctionFile::from_weight_function(&w);
        let back: WeightFunctionFile = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back.to_weight_function().unwrap(), w);
    }
}
