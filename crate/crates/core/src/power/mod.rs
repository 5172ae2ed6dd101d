//! Monte Carlo size and power of the Kolmogorov test over alternative families.
//!
//! For sample size `n` every family in one run sees the same uniforms: replicate
//! `k` draws the order statistics `U_(1) ≤ … ≤ U_(n)` from
//! `stream_rng(derive_seed(master_seed, n), k)`, the null statistic is computed on
//! them directly and each alternative on `F⁻¹(U_(i))`. Rejections are counted, so
//! tables are identical for any number of rayon workers.

mod suites;

pub use suites::{run_suite, suite_catalog, SuiteInfo, SuiteOptions, SuiteReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ks::{critical_value, statistic_unchecked, CriticalValue};
use crate::model::{
    gen_endpoint_bump, gen_interior_bump, gen_single_coefficient, AlternativeDensity, ModelDescriptor,
};
use crate::rng::{derive_seed, fill_sorted_uniforms, stream_rng};

/// Grid of sample sizes, level, replicate count, seed and restriction interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub alpha: f64,
    pub reps: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub e1: f64,
    #[serde(default = "one")]
    pub e2: f64,
}

fn one() -> f64 {
    1.0
}

pub const MIN_REPS: usize = 100;

impl ExperimentConfig {
    pub fn new(n_grid: Vec<usize>, alpha: f64, reps: usize, master_seed: u64) -> Result<Self> {
        let cfg = Self { n_grid, alpha, reps, master_seed, e1: 0.0, e2: 1.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_interval(mut self, e1: f64, e2: f64) -> Result<Self> {
        self.e1 = e1;
        self.e2 = e2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return domain(format!("n grid {:?} must be nonempty, positive and strictly ascending", self.n_grid));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return domain(format!("alpha = {} outside (0, 1)", self.alpha));
        }
        if self.reps < MIN_REPS {
            return domain(format!("reps = {} below {MIN_REPS}", self.reps));
        }
        if !(0.0 <= self.e1 && self.e1 < self.e2 && self.e2 <= 1.0) {
            return domain(format!("interval [{}, {}] is not a proper subinterval of [0, 1]", self.e1, self.e2));
        }
        Ok(())
    }
}

/// `coef · n^exponent`; a bare number is a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rate {
    Constant(f64),
    Power { coef: f64, exponent: f64 },
}

impl Rate {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            Rate::Constant(v) => v,
            Rate::Power { coef, exponent } => coef * (n as f64).powf(exponent),
        }
    }

    fn label(&self) -> String {
        match *self {
            Rate::Constant(v) => format!("{v}"),
            Rate::Power { coef, exponent } if coef == 1.0 => format!("n^{exponent}"),
            Rate::Power { coef, exponent } => format!("{coef}*n^{exponent}"),
        }
    }
}

impl From<f64> for Rate {
    fn from(v: f64) -> Self {
        Rate::Constant(v)
    }
}

fn default_position() -> f64 {
    0.5
}

/// Recipe for the alternative used at each `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    Null,
    InteriorBump {
        a: Rate,
        center: f64,
        width: Rate,
    },
    EndpointBump {
        a: Rate,
        width: Rate,
        #[serde(default)]
        mirrored: bool,
    },
    SingleCoefficient {
        r: f64,
        amplitude: f64,
        #[serde(default)]
        scale_offset: i32,
        #[serde(default = "default_position")]
        position_fraction: f64,
    },
    /// The same model at every `n`.
    Fixed {
        label: String,
        model: ModelDescriptor,
    },
    /// CDF `F_first + F_second − x`.
    Sum {
        first: Box<FamilySpec>,
        second: Box<FamilySpec>,
    },
}

impl FamilySpec {
    pub fn build(&self, n: usize) -> Result<AlternativeDensity> {
        match self {
            FamilySpec::Null => Ok(AlternativeDensity::uniform()),
            FamilySpec::InteriorBump { a, center, width } => gen_interior_bump(n, a.at(n), *center, width.at(n)),
            FamilySpec::EndpointBump { a, width, mirrored } => gen_endpoint_bump(n, a.at(n), width.at(n), *mirrored),
            FamilySpec::SingleCoefficient { r, amplitude, scale_offset, position_fraction } => {
                gen_single_coefficient(n, *r, *amplitude, *scale_offset, *position_fraction)
            }
            FamilySpec::Fixed { model, .. } => AlternativeDensity::from_descriptor(model),
            FamilySpec::Sum { first, second } => {
                let (a, b) = (first.build(n)?, second.build(n)?);
                AlternativeDensity::sum(&a, &b)
                    .map_err(|e| Error::Domain(format!("summed CDF {} is not valid: {e}", self.id())))
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            FamilySpec::Null => "null".into(),
            FamilySpec::InteriorBump { a, center, width } => {
                format!("interior-bump(a={},center={center},width={})", a.label(), width.label())
            }
            FamilySpec::EndpointBump { a, width, mirrored } => {
                let side = if *mirrored { ",mirrored" } else { "" };
                format!("endpoint-bump(a={},width={}{side})", a.label(), width.label())
            }
            FamilySpec::SingleCoefficient { r, amplitude, scale_offset, position_fraction } => format!(
                "single-coefficient(r={r},amplitude={amplitude},offset={scale_offset},position={position_fraction})"
            ),
            FamilySpec::Fixed { label, .. } => label.clone(),
            FamilySpec::Sum { first, second } => format!("sum({}+{})", first.id(), second.id()),
        }
    }
}

/// One `(family, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub family: String,
    pub n: usize,
    pub alpha: f64,
    /// Null rejection rate on the same uniforms.
    pub achieved_size: f64,
    pub power: f64,
    /// `√(p̂(1 − p̂)/reps)` of the power.
    pub stderr: f64,
    /// Critical value of `T` (not scaled by `√n`).
    pub critical: f64,
    /// Size of the critical value under the null law used to compute it.
    pub nominal_size: f64,
    pub size_stderr: f64,
    pub reps: usize,
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    family: &'a str,
    n: usize,
    alpha: f64,
    achieved_size: f64,
    power: f64,
    stderr: f64,
    critical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub config: ExperimentConfig,
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    /// Columns `family,n,alpha,achieved_size,power,stderr,critical`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(CsvRow {
                family: &r.family,
                n: r.n,
                alpha: r.alpha,
                achieved_size: r.achieved_size,
                power: r.power,
                stderr: r.stderr,
                critical: r.critical,
            })
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn row(&self, n: usize) -> Option<&PowerRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

fn binomial_stderr(p: f64, reps: usize) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

/// Per-replicate rejection bits: bit 0 is the null sample, bit `m + 1` is `models[m]`.
pub(crate) fn rejection_masks(
    models: &[AlternativeDensity],
    n: usize,
    critical: f64,
    seed: u64,
    reps: usize,
    e1: f64,
    e2: f64,
) -> Vec<u64> {
    assert!(models.len() < 64, "at most 63 models per pass");
    (0..reps)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(u, x), rep| {
                fill_sorted_uniforms(&mut stream_rng(seed, rep as u64), u);
                let mut mask = (statistic_unchecked(u, e1, e2) > critical) as u64;
                for (m, model) in models.iter().enumerate() {
                    for (dst, &v) in x.iter_mut().zip(u.iter()) {
                        *dst = model.quantile_unchecked(v);
                    }
                    mask |= ((statistic_unchecked(x, e1, e2) > critical) as u64) << (m + 1);
                }
                mask
            },
        )
        .collect()
}

/// Models for every `n`, with errors tagged by the offending `n`.
fn build_models(families: &[FamilySpec], n: usize) -> Result<Vec<AlternativeDensity>> {
    families
        .iter()
        .map(|f| {
            let m = f.build(n).map_err(|e| Error::AtSampleSize { n, source: Box::new(e) })?;
            if m.is_strictly_positive() {
                Ok(m)
            } else {
                Err(Error::AtSampleSize { n, source: Box::new(Error::NonInvertible { floor: m.density_floor() }) })
            }
        })
        .collect()
}

pub(crate) struct Cell {
    pub critical: CriticalValue,
    pub masks: Vec<u64>,
}

impl Cell {
    fn rate(&self, bit: usize) -> f64 {
        self.masks.iter().filter(|&&m| m >> bit & 1 == 1).count() as f64 / self.masks.len() as f64
    }

    fn row(&self, family: String, n: usize, bit: usize) -> PowerRow {
        let reps = self.masks.len();
        let (size, power) = (self.rate(0), self.rate(bit));
        PowerRow {
            family,
            n,
            alpha: self.critical.alpha,
            achieved_size: size,
            power,
            stderr: binomial_stderr(power, reps),
            critical: self.critical.value,
            nominal_size: self.critical.achieved_size,
            size_stderr: binomial_stderr(size, reps),
            reps,
        }
    }

    /// `p̂_a − p̂_b` and its paired standard error.
    fn paired(&self, a: usize, b: usize) -> (f64, f64) {
        let reps = self.masks.len() as f64;
        let (mut diff, mut discord) = (0i64, 0usize);
        for &m in &self.masks {
            let (x, y) = ((m >> a & 1) as i64, (m >> b & 1) as i64);
            diff += x - y;
            discord += (x != y) as usize;
        }
        let d = diff as f64 / reps;
        let var = (discord as f64 / reps - d * d).max(0.0);
        (d, (var / reps).sqrt())
    }
}

pub(crate) fn run_cell(models: &[AlternativeDensity], n: usize, cfg: &ExperimentConfig) -> Result<Cell> {
    let critical = critical_value(n, cfg.alpha)?;
    let seed = derive_seed(cfg.master_seed, n as u64);
    let masks = rejection_masks(models, n, critical.value, seed, cfg.reps, cfg.e1, cfg.e2);
    Ok(Cell { critical, masks })
}

/// Power tables for several families on common random numbers.
pub fn estimate_power_set(families: &[FamilySpec], cfg: &ExperimentConfig) -> Result<Vec<PowerTable>> {
    cfg.validate()?;
    let mut tables: Vec<PowerTable> =
        families.iter().map(|_| PowerTable { config: cfg.clone(), rows: Vec::new() }).collect();
    for &n in &cfg.n_grid {
        let models = build_models(families, n)?;
        let cell = run_cell(&models, n, cfg)?;
        for (k, f) in families.iter().enumerate() {
            tables[k].rows.push(cell.row(f.id(), n, k + 1));
        }
    }
    Ok(tables)
}

pub fn estimate_power(family: &FamilySpec, cfg: &ExperimentConfig) -> Result<PowerTable> {
    Ok(estimate_power_set(std::slice::from_ref(family), cfg)?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    /// Per `n`, the row of the member with the smallest power.
    pub worst: PowerTable,
    pub members: Vec<PowerTable>,
}

/// Member-wise minimum power over a finite list of families.
pub fn uniform_consistency_probe(families: &[FamilySpec], cfg: &ExperimentConfig) -> Result<ProbeResult> {
    if families.is_empty() {
        return domain("uniform consistency probe needs at least one family");
    }
    let members = estimate_power_set(families, cfg)?;
    let rows = (0..cfg.n_grid.len())
        .map(|k| {
            members
                .iter()
                .map(|t| &t.rows[k])
                .min_by(|a, b| a.power.total_cmp(&b.power))
                .expect("nonempty")
                .clone()
        })
        .collect();
    Ok(ProbeResult { worst: PowerTable { config: cfg.clone(), rows }, members })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixRow {
    pub n: usize,
    pub power_consistent: f64,
    pub power_mixed: f64,
    /// `|p̂(F_n) − p̂(F_n + F_{1n} − F_0)|`.
    pub difference: f64,
    /// Paired standard error of the difference.
    pub stderr: f64,
    pub achieved_size: f64,
    pub critical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixTable {
    pub config: ExperimentConfig,
    pub consistent: String,
    pub inconsistent: String,
    pub rows: Vec<MixRow>,
}

/// Power of `consistent` against power of its sum with `inconsistent`, on common uniforms.
pub fn additive_mix_experiment(
    consistent: &FamilySpec,
    inconsistent: &FamilySpec,
    cfg: &ExperimentConfig,
) -> Result<MixTable> {
    cfg.validate()?;
    let mixed = FamilySpec::Sum { first: Box::new(consistent.clone()), second: Box::new(inconsistent.clone()) };
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let models = build_models(&[consistent.clone(), mixed.clone()], n)?;
        let cell = run_cell(&models, n, cfg)?;
        let (d, se) = cell.paired(1, 2);
        rows.push(MixRow {
            n,
            power_consistent: cell.rate(1),
            power_mixed: cell.rate(2),
            difference: d.abs(),
            stderr: se,
            achieved_size: cell.rate(0),
            critical: cell.critical.value,
        });
    }
    Ok(MixTable { config: cfg.clone(), consistent: consistent.id(), inconsistent: inconsistent.id(), rows })
}
