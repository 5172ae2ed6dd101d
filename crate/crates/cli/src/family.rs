use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ksgof::model::{AlternativeDensity, CoefficientField, ModelDescriptor};
use ksgof::power::{FamilySpec, Rate};
use serde_json::{json, Value};

use crate::Usage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Null,
    InteriorBump,
    EndpointBump,
    SingleCoefficient,
}

/// Alternative selection shared by `simulate`, `test` and `power`.
#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Built-in family, rebuilt at every sample size.
    #[arg(long, value_enum, conflicts_with = "model")]
    pub family: Option<Family>,
    /// Model file in the descriptor JSON format; used unchanged at every sample size.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Bump amplitude: a number or a rate such as `2*n^-0.25`.
    #[arg(long, value_parser = parse_rate, allow_hyphen_values = true)]
    pub a: Option<Rate>,
    #[arg(long, default_value_t = 0.5)]
    pub center: f64,
    /// Bump width: a number or a rate such as `n^-0.25`.
    #[arg(long, value_parser = parse_rate, allow_hyphen_values = true)]
    pub width: Option<Rate>,
    /// Put the endpoint bump at 1 instead of 0.
    #[arg(long)]
    pub mirrored: bool,
    /// Rate exponent of the single-coefficient family.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub amplitude: Option<f64>,
    /// Scale offset from the critical scale.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub offset: i32,
    /// Position of the coefficient as a fraction of [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub position: f64,
}

/// Accepts `3`, `n^-0.25`, `2*n^-0.25` and `2n^-0.25`.
pub fn parse_rate(s: &str) -> Result<Rate, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(pos) = t.find("n^") else {
        return t.parse::<f64>().map(Rate::Constant).map_err(|_| format!("`{s}` is neither a number nor c*n^e"));
    };
    let coef = match t[..pos].trim_end_matches('*') {
        "" => 1.0,
        c => c.parse::<f64>().map_err(|_| format!("bad coefficient in `{s}`"))?,
    };
    let exponent = t[pos + 2..].parse::<f64>().map_err(|_| format!("bad exponent in `{s}`"))?;
    Ok(Rate::Power { coef, exponent })
}

fn need<T: Copy>(v: Option<T>, key: &str, family: &str) -> Result<T, Usage> {
    v.ok_or_else(|| Usage::new(key, format!("required by --family {family}")))
}

pub fn read_descriptor(path: &Path) -> anyhow::Result<ModelDescriptor> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage::new("model", format!("{}: {e}", path.display())))?;
    let desc = serde_json::from_str(&text).map_err(|e| Usage::new("model", format!("{}: {e}", path.display())))?;
    Ok(desc)
}

/// Raw coefficients of a model file, without density validation when the file lists them.
pub fn read_coefficients(path: &Path) -> anyhow::Result<CoefficientField> {
    let desc = read_descriptor(path)?;
    if !desc.coefficients.is_empty() {
        let triples: Vec<_> = desc.coefficients.iter().map(|c| (c.j, c.i, c.theta.0)).collect();
        return Ok(CoefficientField::from_triples(&triples).map_err(|e| Usage::new("model", e))?);
    }
    let model = AlternativeDensity::from_descriptor(&desc).map_err(|e| Usage::new("model", e))?;
    match model.coefficients() {
        Some(c) => Ok(c.clone()),
        None => Err(Usage::new("model", format!("family `{}` has no wavelet coefficients", desc.family)).into()),
    }
}

impl FamilyArgs {
    pub fn spec(&self) -> anyhow::Result<FamilySpec> {
        if let Some(path) = &self.model {
            let model = read_descriptor(path)?;
            AlternativeDensity::from_descriptor(&model).map_err(|e| Usage::new("model", e))?;
            return Ok(FamilySpec::Fixed { label: path.display().to_string(), model });
        }
        let family = self.family.ok_or_else(|| Usage::new("family", "one of --family or --model is required"))?;
        let spec = match family {
            Family::Null => FamilySpec::Null,
            Family::InteriorBump => {
                if !(self.center > 0.0 && self.center < 1.0) {
                    return Err(Usage::new("center", format!("{} outside (0, 1)", self.center)).into());
                }
                FamilySpec::InteriorBump {
                    a: need(self.a, "a", "interior-bump")?,
                    center: self.center,
                    width: need(self.width, "width", "interior-bump")?,
                }
            }
            Family::EndpointBump => FamilySpec::EndpointBump {
                a: need(self.a, "a", "endpoint-bump")?,
                width: need(self.width, "width", "endpoint-bump")?,
                mirrored: self.mirrored,
            },
            Family::SingleCoefficient => FamilySpec::SingleCoefficient {
                r: need(self.r, "r", "single-coefficient")?,
                amplitude: need(self.amplitude, "amplitude", "single-coefficient")?,
                scale_offset: self.offset,
                position_fraction: self.position,
            },
        };
        Ok(spec)
    }
}

pub fn spec_json(spec: &FamilySpec) -> Value {
    match spec {
        FamilySpec::Fixed { label, .. } => json!({ "family": "fixed", "model": label }),
        other => serde_json::to_value(other).expect("family spec serializes"),
    }
}
