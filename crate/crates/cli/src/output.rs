use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Serializes `f64` as a JSON number, or as `"inf"`, `"-inf"`, `"nan"` when not finite.
pub mod extended {
    use super::*;

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

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UqRecord {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(with = "extended")]
    pub value: f64,
    pub status: String,
    pub n_vars: usize,
    pub n_rows: usize,
    pub iterations: usize,
    #[serde(default)]
    pub solve_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRecord {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(with = "extended")]
    pub unstructured: f64,
    #[serde(with = "extended")]
    pub symmetrized: f64,
    #[serde(with = "extended")]
    pub multitransport: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WassersteinRecord {
    #[serde(with = "extended")]
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub case: String,
    pub rho: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(with = "extended")]
    pub value: f64,
}

pub fn fmt_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}
