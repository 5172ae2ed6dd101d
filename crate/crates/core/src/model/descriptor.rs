//! Canonical JSON form of a model: `{family, params, coefficients: [{j, i, theta}]}`.
//!
//! Coefficients are written as the exact decimal expansion of their binary
//! value, so a descriptor reproduces the model bit for bit.

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use super::density::{build_density, AlternativeDensity, ModelFamily};
use super::families::{gen_endpoint_bump, gen_interior_bump, gen_single_coefficient};
use super::field::CoefficientField;
use crate::error::{Error, Result};
use crate::wavelet::WaveletIndex;

/// Exact decimal expansion of a finite `f64`.
pub fn exact_decimal(x: f64) -> String {
    assert!(x.is_finite(), "exact_decimal of non-finite value");
    if x == 0.0 {
        return "0".to_string();
    }
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exponent) = if exp_bits == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp_bits - 1075) };
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exponent >= 0 {
        out.push_str(&(BigUint::from(mantissa) << exponent as usize).to_string());
        return out;
    }
    // m / 2^k = m * 5^k / 10^k
    let k = (-exponent) as usize;
    let digits = (BigUint::from(mantissa) * BigUint::from(5u32).pow(k as u32)).to_string();
    let (int_part, frac_part) = if digits.len() > k {
        (digits[..digits.len() - k].to_string(), digits[digits.len() - k..].to_string())
    } else {
        ("0".to_string(), format!("{}{}", "0".repeat(k - digits.len()), digits))
    };
    out.push_str(&int_part);
    let frac_part = frac_part.trim_end_matches('0');
    if !frac_part.is_empty() {
        out.push('.');
        out.push_str(frac_part);
    }
    out
}

/// `f64` serialized as its exact decimal string; numbers are accepted on input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactReal(pub f64);

impl Serialize for ExactReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&exact_decimal(self.0))
    }
}

impl<'de> Deserialize<'de> for ExactReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.trim().parse::<f64>().map(ExactReal).map_err(serde::de::Error::custom),
            Value::Number(n) => n.as_f64().map(ExactReal).ok_or_else(|| serde::de::Error::custom("bad number")),
            other => Err(serde::de::Error::custom(format!("expected real, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub j: u32,
    pub i: u64,
    pub theta: ExactReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub family: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub coefficients: Vec<CoefficientRecord>,
}

fn records(coeffs: Option<&CoefficientField>) -> Vec<CoefficientRecord> {
    coeffs
        .map(|c| {
            c.iter()
                .map(|(idx, theta)| CoefficientRecord { j: idx.scale(), i: idx.position(), theta: ExactReal(theta) })
                .collect()
        })
        .unwrap_or_default()
}

impl Serialize for CoefficientField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        records(Some(self)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefficientField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let recs = Vec::<CoefficientRecord>::deserialize(d)?;
        let triples: Vec<(u32, u64, f64)> = recs.iter().map(|r| (r.j, r.i, r.theta.0)).collect();
        CoefficientField::from_triples(&triples).map_err(serde::de::Error::custom)
    }
}

fn params(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

impl AlternativeDensity {
    pub fn descriptor(&self) -> ModelDescriptor {
        let params = match self.family() {
            ModelFamily::Uniform | ModelFamily::Wavelet => Map::new(),
            ModelFamily::SingleCoefficient { n, r, amplitude, scale_offset, position_fraction } => params(json!({
                "n": n, "r": r, "amplitude": amplitude,
                "scale_offset": scale_offset, "position_fraction": position_fraction,
            })),
            ModelFamily::InteriorBump { n, a, center, width } => {
                params(json!({ "n": n, "a": a, "center": center, "width": width }))
            }
            ModelFamily::EndpointBump { n, a, width, mirrored } => {
                params(json!({ "n": n, "a": a, "width": width, "mirrored": mirrored }))
            }
            ModelFamily::Sum(a, b) => params(json!({
                "components": [
                    serde_json::to_value(a.descriptor()).expect("descriptor serializes"),
                    serde_json::to_value(b.descriptor()).expect("descriptor serializes"),
                ]
            })),
        };
        ModelDescriptor { family: self.family().name().to_string(), params, coefficients: records(self.coefficients()) }
    }

    pub fn from_descriptor(desc: &ModelDescriptor) -> Result<Self> {
        let bad = |m: &str| Error::Descriptor(format!("{}: {m}", desc.family));
        let num = |key: &str| -> Result<f64> {
            desc.params.get(key).and_then(Value::as_f64).ok_or_else(|| bad(&format!("missing numeric param `{key}`")))
        };
        let count = |key: &str| -> Result<usize> {
            desc.params
                .get(key)
                .and_then(Value::as_u64)
                .map(|v| v as usize)
                .ok_or_else(|| bad(&format!("missing integer param `{key}`")))
        };
        match desc.family.as_str() {
            "uniform" | "wavelet" => {
                let mut field = CoefficientField::new();
                for rec in &desc.coefficients {
                    field.insert(WaveletIndex::new(rec.j, rec.i)?, rec.theta.0)?;
                }
                build_density(field)
            }
            "single-coefficient" => {
                let offset = desc
                    .params
                    .get("scale_offset")
                    .and_then(Value::as_i64)
                    .ok_or_else(|| bad("missing integer param `scale_offset`"))?;
                gen_single_coefficient(
                    count("n")?,
                    num("r")?,
                    num("amplitude")?,
                    offset as i32,
                    num("position_fraction")?,
                )
            }
            "interior-bump" => gen_interior_bump(count("n")?, num("a")?, num("center")?, num("width")?),
            "endpoint-bump" => {
                let mirrored = desc.params.get("mirrored").and_then(Value::as_bool).unwrap_or(false);
                gen_endpoint_bump(count("n")?, num("a")?, num("width")?, mirrored)
            }
            "sum" => {
                let parts = desc
                    .params
                    .get("components")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| bad("`components` must hold two descriptors"))?;
                let parse = |v: &Value| -> Result<AlternativeDensity> {
                    let d: ModelDescriptor =
                        serde_json::from_value(v.clone()).map_err(|e| Error::Descriptor(e.to_string()))?;
                    AlternativeDensity::from_descriptor(&d)
                };
                AlternativeDensity::sum(&parse(&parts[0])?, &parse(&parts[1])?)
            }
            other => Err(Error::Descriptor(format!("unknown family `{other}`"))),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.descriptor()).expect("descriptor serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let desc: ModelDescriptor = serde_json::from_str(s).map_err(|e| Error::Descriptor(e.to_string()))?;
        Self::from_descriptor(&desc)
    }
}
