//! Registered experiment suites, one per acceptance check, each with fixed
//! tolerances and a machine-readable report.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{additive_mix_experiment, estimate_power, run_cell, uniform_consistency_probe};
use super::{ExperimentConfig, FamilySpec, Rate};
use crate::besov::{besov_norm, maxiset_smoothness, orientation};
use crate::classifier::{classify_r_half, classify_tp1, decompose_tp3, s_consistency_margin, Tp1Options, VerdictKind};
use crate::error::{Error, Result};
use crate::gaussian::{anderson_gap, coupling_distance, shifted_maxima, PathConfig, ShiftFunction};
use crate::ks::{
    critical_value, dkw_bound, empirical_statistic, exact_null_cdf, kolmogorov_cdf_asymptotic, statistic_unchecked,
};
use crate::model::{
    build_density, check_condition_g, critical_scale, gen_endpoint_bump, gen_interior_bump, single_coefficient_field,
    AlternativeDensity, CoefficientField, DEFAULT_C_EPS,
};
use crate::rng::{derive_seed, fill_sorted_uniforms, stream_rng};
use crate::wavelet::{eval_phi, eval_psi, gram_check, WaveletIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteInfo {
    pub id: &'static str,
    pub criterion: u8,
    pub title: &'static str,
}

const CATALOG: [SuiteInfo; 12] = [
    SuiteInfo { id: "null-calibration", criterion: 1, title: "null rejection rate matches the exact size" },
    SuiteInfo { id: "exact-law-oracle", criterion: 2, title: "exact null law agrees with Monte Carlo" },
    SuiteInfo { id: "vanishing-deviation", criterion: 3, title: "no power when sqrt(n) T -> 0" },
    SuiteInfo { id: "massey-endpoint", criterion: 4, title: "endpoint bumps are not detected" },
    SuiteInfo { id: "interior-uniform-consistency", criterion: 5, title: "interior bumps with sqrt(n) T = 3 are detected" },
    SuiteInfo { id: "threshold-dichotomy", criterion: 6, title: "single-coefficient threshold at the critical scale" },
    SuiteInfo { id: "anderson-gap", criterion: 7, title: "shifting the bridge strictly lowers non-crossing" },
    SuiteInfo { id: "coupling", criterion: 8, title: "empirical process and bridge sup laws agree" },
    SuiteInfo { id: "dkw-domination", criterion: 9, title: "exceedance frequencies respect the DKW bound" },
    SuiteInfo { id: "additive-mixing", criterion: 10, title: "adding an undetectable component leaves power unchanged" },
    SuiteInfo { id: "decomposition-certificate", criterion: 11, title: "head/tail splits with certificates" },
    SuiteInfo { id: "exact-values", criterion: 12, title: "closed-form example values" },
];

pub fn suite_catalog() -> &'static [SuiteInfo] {
    &CATALOG
}

/// Seed and an optional override of the suite's main replicate count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    #[serde(default)]
    pub reps: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 42, reps: None }
    }
}

impl SuiteOptions {
    fn reps_or(&self, default: usize) -> usize {
        self.reps.unwrap_or(default)
    }

    fn seed_for(&self, label: u64) -> u64 {
        derive_seed(self.seed, label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub id: String,
    pub criterion: u8,
    pub title: String,
    pub passed: bool,
    pub measured: Value,
    pub notes: Vec<String>,
    pub options: SuiteOptions,
    pub elapsed_secs: f64,
}

impl SuiteReport {
    pub fn summary_line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("[{verdict}] {:>2} {} ({:.1}s): {}", self.criterion, self.id, self.elapsed_secs, self.title)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Outcome {
    passed: bool,
    measured: Value,
    notes: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, measured: Value) -> Self {
        Self { passed, measured, notes: Vec::new() }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }
}

pub fn run_suite(id: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    let info = CATALOG.iter().find(|s| s.id == id).ok_or_else(|| Error::UnknownSuite(id.to_string()))?;
    if let Some(r) = opts.reps {
        if r < super::MIN_REPS {
            return Err(Error::Domain(format!("reps = {r} below {}", super::MIN_REPS)));
        }
    }
    let start = Instant::now();
    let out = match info.criterion {
        1 => null_calibration(opts),
        2 => exact_law_oracle(opts),
        3 => vanishing_deviation(opts),
        4 => massey_endpoint(opts),
        5 => interior_uniform_consistency(opts),
        6 => threshold_dichotomy(opts),
        7 => anderson(opts),
        8 => coupling(opts),
        9 => dkw_domination(opts),
        10 => additive_mixing(opts),
        11 => decomposition_certificate(opts),
        _ => exact_values(opts),
    }?;
    Ok(SuiteReport {
        id: info.id.to_string(),
        criterion: info.criterion,
        title: info.title.to_string(),
        passed: out.passed,
        measured: out.measured,
        notes: out.notes,
        options: *opts,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// `T` of `reps` uniform samples of size `n`, replicate `k` from stream `k` of `seed`.
fn null_statistics(n: usize, reps: usize, seed: u64) -> Vec<f64> {
    (0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |u, rep| {
                fill_sorted_uniforms(&mut stream_rng(seed, rep as u64), u);
                statistic_unchecked(u, 0.0, 1.0)
            },
        )
        .collect()
}

fn null_calibration(opts: &SuiteOptions) -> Result<Outcome> {
    let reps = opts.reps_or(100_000);
    let mut cells = Vec::new();
    let mut passed = true;
    for alpha in [0.01, 0.05, 0.1] {
        let cfg = ExperimentConfig::new(vec![10, 50, 200], alpha, reps, opts.seed_for(1))?;
        for row in estimate_power(&FamilySpec::Null, &cfg)?.rows {
            let tol = 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt();
            let ok = (row.achieved_size - row.nominal_size).abs() <= tol;
            passed &= ok;
            cells.push(json!({
                "n": row.n, "alpha": alpha, "rejection_rate": row.achieved_size,
                "achieved_size": row.nominal_size, "tolerance": tol, "pass": ok,
            }));
        }
    }
    Ok(Outcome::new(passed, json!({ "reps": reps, "cells": cells })))
}

fn exact_law_oracle(opts: &SuiteOptions) -> Result<Outcome> {
    let reps = opts.reps_or(1_000_000);
    let mut cells = Vec::new();
    let mut passed = true;
    for n in 1..=10usize {
        let stats = null_statistics(n, reps, opts.seed_for(200 + n as u64));
        // Deciles of the exact law keep every cell away from p ≈ 0 or 1, where a
        // binomial standard error is meaningless at this replicate count.
        let t_points: Vec<f64> = (1..=9).map(|k| exact_quantile(n, k as f64 / 10.0)).collect::<Result<_>>()?;
        for &t in &t_points {
            let exact = exact_null_cdf(n, t)?;
            let mc = stats.iter().filter(|&&s| s <= t).count() as f64 / reps as f64;
            let se = (exact * (1.0 - exact) / reps as f64).sqrt();
            let ok = (mc - exact).abs() <= 3.0 * se + 1e-12;
            passed &= ok;
            cells.push(json!({ "n": n, "t": t, "exact": exact, "monte_carlo": mc, "stderr": se, "pass": ok }));
        }
    }
    let mut closed_form_err = 0.0f64;
    for k in 0..=1000 {
        let t = 0.5 + 0.5 * k as f64 / 1000.0;
        closed_form_err = closed_form_err.max((exact_null_cdf(1, t)? - (2.0 * t - 1.0)).abs());
    }
    let closed_ok = closed_form_err <= 1e-12;
    Ok(Outcome::new(
        passed && closed_ok,
        json!({ "reps": reps, "cells": cells, "n1_closed_form_max_error": closed_form_err }),
    ))
}

/// Smallest `t` with `P(T ≤ t) ≥ p`, to 1e−12.
fn exact_quantile(n: usize, p: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.5 / n as f64, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if exact_null_cdf(n, mid)? >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn vanishing_deviation(opts: &SuiteOptions) -> Result<Outcome> {
    let reps = opts.reps_or(20_000);
    let n = 10_000;
    let family = FamilySpec::InteriorBump {
        a: Rate::Power { coef: 1.0, exponent: -0.25 },
        center: 0.5,
        width: Rate::Constant(0.2),
    };
    let cfg = ExperimentConfig::new(vec![n], 0.05, reps, opts.seed_for(3))?;
    let row = estimate_power(&family, &cfg)?.rows.remove(0);
    let gap = (row.power - row.achieved_size).abs();
    let scaled_t = (n as f64).sqrt() * family.build(n)?.kolmogorov_distance();
    Ok(Outcome::new(
        gap <= 0.02,
        json!({ "row": row, "abs_power_minus_size": gap, "tolerance": 0.02, "sqrt_n_T": scaled_t }),
    ))
}

fn massey_endpoint(opts: &SuiteOptions) -> Result<Outcome> {
    let reps = opts.reps_or(20_000);
    let family = FamilySpec::EndpointBump {
        a: Rate::Constant(1.0),
        width: Rate::Power { coef: 1.0, exponent: -0.25 },
        mirrored: false,
    };
    let cfg = ExperimentConfig::new(vec![1_000, 10_000], 0.05, reps, opts.seed_for(4))?;
    let table = estimate_power(&family, &cfg)?;
    let excess: Vec<f64> = table.rows.iter().map(|r| r.power - r.achieved_size).collect();
    let decreasing = excess[1] < excess[0];
    let small = excess[1] <= 0.03;
    let mut out = Outcome::new(
        decreasing && small,
        json!({
            "rows": table.rows, "power_minus_size": excess,
            "decreasing": decreasing, "tolerance_at_largest_n": 0.03,
        }),
    );
    if !small {
        out = out.note(
            "the bump has sqrt(n) T = 1 at every n and width n^(-1/4); the excess power decays \
             only as the width shrinks, about halving per decade of n, and stays above 0.03 at n = 10^4",
        );
    }
    Ok(out)
}

fn interior_uniform_consistency(opts: &SuiteOptions) -> Result<Outcome> {
    let reps = opts.reps_or(100_000);
    let n = 2500;
    let (a, width) = (3.0, 0.15);
    let members: Vec<FamilySpec> = [0.1, 0.5, 0.9]
        .iter()
        .map(|&center| FamilySpec::InteriorBump { a: Rate::Constant(a), center, width: Rate::Constant(width) })
        .collect();
    let cfg = ExperimentConfig::new(vec![n], 0.05, reps, opts.seed_for(5))?;
    let probe = uniform_consistency_probe(&members, &cfg)?;
    let critical = probe.worst.rows[0].critical;
    let boundary = (n as f64).sqrt() * critical;
    let models: Vec<AlternativeDensity> = members.iter().map(|m| m.build(n)).collect::<Result<_>>()?;
    let shifts: Vec<ShiftFunction> = models.iter().map(|m| ShiftFunction::from_model(m, n)).collect::<Result<_>>()?;
    let path_cfg = PathConfig::new(reps, crate::gaussian::DEFAULT_GRID, opts.seed_for(50))?;
    let maxima = shifted_maxima(&shifts, &path_cfg)?;
    let mut rows = Vec::new();
    let mut passed = probe.worst.rows[0].power >= 0.8;
    for (k, member) in probe.members.iter().enumerate() {
        let oracle = maxima.iter().filter(|m| m[k] >= boundary).count() as f64 / reps as f64;
        let power = member.rows[0].power;
        let restricted = (n as f64).sqrt() * models[k].deviation_functional(0.1, 0.9)?;
        let ok = (power - oracle).abs() <= 0.05;
        passed &= ok;
        rows.push(json!({
            "family": member.rows[0].family, "power": power, "oracle": oracle,
            "restricted_sqrt_n_T": restricted, "pass": ok,
        }));
    }
    Ok(Outcome::new(
        passed,
        json!({ "min_power": probe.worst.rows[0].power, "members": rows, "critical_sqrt_n": boundary }),
    )
    .note(format!("bump width {width}: members at 0.1 and 0.9 stay inside [0, 1] and p = 1 + f stays positive")))
}

fn nondecreasing_within_noise(rows: &[super::PowerRow]) -> bool {
    rows.windows(2).all(|w| w[1].power >= w[0].power - 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt())
}

fn threshold_dichotomy(opts: &SuiteOptions) -> Result<Outcome> {
    let reps = opts.reps_or(10_000);
    let r = 0.25;
    let grid = vec![1 << 8, 1 << 10, 1 << 12, 1 << 14];
    let largest = *grid.last().expect("grid");
    let strong = FamilySpec::SingleCoefficient { r, amplitude: 6.0, scale_offset: 0, position_fraction: 0.5 };
    let weak = FamilySpec::SingleCoefficient { r, amplitude: 1.0, scale_offset: 10, position_fraction: 0.5 };
    let cfg = ExperimentConfig::new(grid.clone(), 0.05, reps, opts.seed_for(6))?;
    let mut notes = Vec::new();

    let verdicts: Vec<Value> = grid
        .iter()
        .map(|&n| {
            let f = single_coefficient_field(n, r, 6.0, 0, 0.5)?;
            let v = classify_tp1(&f, n, r, &Tp1Options::default())?;
            let sup = 6.0 * (n as f64).powf(-r);
            Ok(json!({ "n": n, "verdict": v.kind, "sup_norm_f": sup, "valid_density": sup < 1.0 }))
        })
        .collect::<Result<_>>()?;

    let strong_part = match estimate_power(&strong, &cfg) {
        Ok(t) => {
            let mono = nondecreasing_within_noise(&t.rows);
            let top = t.rows.last().expect("rows").power;
            json!({ "pass": mono && top >= 0.5, "rows": t.rows, "nondecreasing": mono, "power_at_largest_n": top })
        }
        Err(e) => {
            notes.push(format!(
                "amplitude 6 family cannot be sampled on the full grid: {e}; \
                 ||f|| = 6 n^(-1/4) >= 1 for n <= 2^10, so p = 1 + f is negative on part of [0, 1]"
            ));
            let valid: Vec<usize> = grid.iter().copied().filter(|&n| 6.0 * (n as f64).powf(-r) < 1.0).collect();
            let diag = ExperimentConfig::new(valid, 0.05, reps, opts.seed_for(6))?;
            let t = estimate_power(&strong, &diag)?;
            json!({
                "pass": false, "error": e.to_string(), "valid_n_rows": t.rows,
                "valid_n_nondecreasing": nondecreasing_within_noise(&t.rows),
            })
        }
    };
    let weak_table = estimate_power(&weak, &cfg)?;
    let weak_row = weak_table.row(largest).expect("largest n").clone();
    let excess = weak_row.power - weak_row.achieved_size;
    let weak_ok = excess <= 0.03;
    let passed = strong_part["pass"].as_bool().unwrap_or(false) && weak_ok;
    let mut out = Outcome::new(
        passed,
        json!({
            "amplitude_6_offset_0": strong_part,
            "amplitude_1_offset_10": { "rows": weak_table.rows, "power_minus_size_at_largest_n": excess, "pass": weak_ok },
            "classifier": verdicts,
        }),
    );
    out.notes = notes;
    Ok(out)
}

fn anderson(opts: &SuiteOptions) -> Result<Outcome> {
    let cfg = PathConfig::new(opts.reps_or(100_000), 4096, opts.seed_for(7))?;
    let c = 1.3581;
    let tent = anderson_gap(&ShiftFunction::triangle(0.3, 0.7, 0.5)?, c, &cfg)?;
    let zero = anderson_gap(&ShiftFunction::zero(), c, &cfg)?;
    let passed = tent.gap > 0.0 && tent.z >= 3.0 && zero.gap == 0.0;
    Ok(Outcome::new(passed, json!({ "triangle": tent, "zero": zero, "c": c })))
}

fn coupling(opts: &SuiteOptions) -> Result<Outcome> {
    let cfg = PathConfig::new(opts.reps_or(20_000), 4096, opts.seed_for(8))?;
    let uniform = AlternativeDensity::uniform();
    let large = coupling_distance(&uniform, 5000, &cfg)?;
    let small = coupling_distance(&uniform, 10, &cfg)?;
    Ok(Outcome::new(
        large.distance <= 0.02,
        json!({ "n5000": large, "n10_reported": small, "tolerance": 0.02 }),
    ))
}

fn dkw_domination(opts: &SuiteOptions) -> Result<Outcome> {
    let reps = opts.reps_or(100_000);
    let mut cells = Vec::new();
    let mut passed = true;
    for n in [20usize, 100, 500] {
        let stats = null_statistics(n, reps, opts.seed_for(900 + n as u64));
        for c in [0.5, 0.8, 1.0, 1.3581, 1.6] {
            let eps = c / (n as f64).sqrt();
            let p = stats.iter().filter(|&&s| s > eps).count() as f64 / reps as f64;
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            let bound = dkw_bound(n, eps);
            let ok = p <= bound + 3.0 * se;
            passed &= ok;
            cells.push(json!({ "n": n, "eps": eps, "exceedance": p, "bound": bound, "stderr": se, "pass": ok }));
        }
    }
    Ok(Outcome::new(passed, json!({ "reps": reps, "cells": cells })))
}

fn additive_mixing(opts: &SuiteOptions) -> Result<Outcome> {
    let reps = opts.reps_or(20_000);
    let consistent = FamilySpec::InteriorBump { a: Rate::Constant(3.0), center: 0.5, width: Rate::Constant(0.2) };
    let inconsistent = FamilySpec::EndpointBump {
        a: Rate::Constant(1.0),
        width: Rate::Power { coef: 1.0, exponent: -0.25 },
        mirrored: false,
    };
    let cfg = ExperimentConfig::new(vec![10_000], 0.05, reps, opts.seed_for(10))?;
    let table = additive_mix_experiment(&consistent, &inconsistent, &cfg)?;
    let d = table.rows[0].difference;
    Ok(Outcome::new(d <= 0.03, json!({ "table": table, "tolerance": 0.03 })))
}

/// Random field on scales 2..=12 with `‖f‖_∞ ≤ 0.9`.
fn random_field(seed: u64, k: u64) -> CoefficientField {
    use rand::Rng;
    let mut rng = stream_rng(seed, k);
    let entries = rng.gen_range(2..=6);
    let mut f = CoefficientField::new();
    for _ in 0..entries {
        let j: u32 = rng.gen_range(2..=12);
        let i: u64 = rng.gen_range(1..=1u64 << j);
        let theta = rng.gen_range(-0.15..0.15) * (-0.5 * j as f64).exp2();
        f.insert(WaveletIndex::new(j, i).expect("index in range"), theta).expect("finite");
    }
    f
}

fn decomposition_certificate(opts: &SuiteOptions) -> Result<Outcome> {
    let n = 1 << 12;
    let (r, eps) = (0.05, 0.05);
    let seed = opts.seed_for(11);
    let mut fields = Vec::new();
    let mut draws = 0u64;
    while fields.len() < 100 {
        let f = random_field(seed, draws);
        draws += 1;
        if check_condition_g(&f, n, r, eps, DEFAULT_C_EPS)?.holds && build_density(f.clone()).is_ok() {
            fields.push(f);
        }
    }
    let mut structural_ok = true;
    let mut splits = Vec::new();
    for f in &fields {
        let d = decompose_tp3(f, n, r, eps, DEFAULT_C_EPS, 30)?;
        let ok = d.head.add(&d.tail) == *f
            && orientation(f, &d.head)
            && orientation(f, &d.tail)
            && orientation(&d.head, &d.tail)
            && d.certificate.tail_scaled_distance < eps
            && d.p0.is_finite();
        structural_ok &= ok;
        splits.push(d);
    }
    let reps = opts.reps_or(10_000);
    let cfg = ExperimentConfig::new(vec![n], 0.05, reps, opts.seed_for(110))?;
    let mut power_rows = Vec::new();
    let mut power_ok = true;
    for (k, d) in splits.iter().take(10).enumerate() {
        let full = build_density(fields[k].clone())?;
        let head = build_density(d.head.clone())?;
        let cell = run_cell(&[full, head], n, &cfg)?;
        let (diff, se) = cell.paired(1, 2);
        let ok = diff.abs() <= 0.05;
        power_ok &= ok;
        power_rows.push(json!({
            "field": k, "power_full": cell.rate(1), "power_head": cell.rate(2),
            "difference": diff, "stderr": se, "extra_scales": d.certificate.extra_scales, "pass": ok,
        }));
    }
    let summary: Vec<Value> = splits
        .iter()
        .map(|d| json!({ "extra_scales": d.certificate.extra_scales, "tail_sqrt_n_T": d.certificate.tail_scaled_distance, "p0": d.p0 }))
        .collect();
    Ok(Outcome::new(
        structural_ok && power_ok,
        json!({
            "n": n, "r": r, "eps": eps, "fields": fields.len(), "draws": draws,
            "structural_pass": structural_ok, "splits": summary, "power": power_rows,
        }),
    ))
}

struct Check {
    name: &'static str,
    value: f64,
    expected: f64,
    tol: f64,
}

fn exact_values(opts: &SuiteOptions) -> Result<Outcome> {
    let idx = |j, i| WaveletIndex::new(j, i).expect("index");
    let field = |t: &[(u32, u64, f64)]| CoefficientField::from_triples(t).expect("field");
    let half = build_density(field(&[(1, 1, 0.5)]))?;
    let mut checks = vec![
        Check { name: "phi(1,1) at 0.1", value: eval_phi(idx(1, 1), 0.1)?, expected: SQRT_2, tol: 1e-15 },
        Check { name: "phi(1,2) at 0.8", value: eval_phi(idx(1, 2), 0.8)?, expected: -SQRT_2, tol: 1e-15 },
        Check { name: "phi(3,2) outside cell", value: eval_phi(idx(3, 2), 0.9)?, expected: 0.0, tol: 0.0 },
        Check { name: "psi(1,1) at 0.25", value: eval_psi(idx(1, 1), 0.25)?, expected: SQRT_2 / 4.0, tol: 1e-15 },
        Check { name: "psi(1,1) at 0.5", value: eval_psi(idx(1, 1), 0.5)?, expected: 0.0, tol: 1e-15 },
        Check { name: "psi(4,3) at 0", value: eval_psi(idx(4, 3), 0.0)?, expected: 0.0, tol: 0.0 },
        Check { name: "gram_check(1)", value: gram_check(1)?, expected: 0.0, tol: 1e-12 },
        Check { name: "gram_check(3)", value: gram_check(3)?, expected: 0.0, tol: 1e-12 },
        Check { name: "gram_check(8)", value: gram_check(8)?, expected: 0.0, tol: 1e-10 },
        Check { name: "floor {(1,1): 0.5}", value: half.density_floor(), expected: 1.0 - 0.5 * SQRT_2, tol: 1e-15 },
        Check {
            name: "{(1,1): 0.8} invalid",
            value: build_density(field(&[(1, 1, 0.8)])).is_err() as u8 as f64,
            expected: 1.0,
            tol: 0.0,
        },
        Check { name: "cdf {(1,1): 0.5} at 0.25", value: half.cdf(0.25)?, expected: 0.25 + 0.5 * SQRT_2 / 4.0, tol: 1e-15 },
        Check { name: "cdf at 1", value: half.cdf(1.0)?, expected: 1.0, tol: 0.0 },
        Check { name: "T {(1,1): 0.5}", value: half.deviation_functional(0.0, 1.0)?, expected: 0.5 * SQRT_2 / 4.0, tol: 1e-15 },
        Check {
            name: "T on [0.4, 0.6]",
            value: half.deviation_functional(0.4, 0.6)?,
            expected: 0.5 * SQRT_2 * 0.1,
            tol: 1e-15,
        },
        Check {
            name: "interior bump T",
            value: gen_interior_bump(2500, 3.0, 0.5, 0.2)?.kolmogorov_distance(),
            expected: 0.06,
            tol: 1e-15,
        },
        Check {
            name: "interior bump deviation",
            value: gen_interior_bump(2500, 3.0, 0.5, 0.2)?.sup_norm_f(),
            expected: 0.6,
            tol: 1e-12,
        },
        Check {
            name: "endpoint bump T",
            value: gen_endpoint_bump(10_000, 1.0, 0.1, false)?.kolmogorov_distance(),
            expected: 0.01,
            tol: 1e-15,
        },
        Check {
            name: "endpoint bump argmax",
            value: gen_endpoint_bump(10_000, 1.0, 0.1, false)?.deviation_argmax(0.0, 1.0)?.0,
            expected: 0.05,
            tol: 1e-15,
        },
        Check { name: "k_256 at r = 1/4", value: critical_scale(256, 0.25) as f64, expected: 2.0, tol: 0.0 },
        Check {
            name: "single coefficient theta",
            value: single_coefficient_field(256, 0.25, 1.0, 0, 0.5)?.iter().next().expect("entry").1,
            expected: 0.125,
            tol: 1e-15,
        },
        Check {
            name: "offset 10 theta",
            value: single_coefficient_field(256, 0.25, 1.0, 10, 0.5)?.iter().next().expect("entry").1,
            expected: 0.25 / 64.0,
            tol: 1e-17,
        },
        Check {
            name: "statistic {0.2, 0.8}",
            value: empirical_statistic(&[0.2, 0.8], 0.0, 1.0)?,
            expected: 0.3,
            tol: 1e-15,
        },
        Check {
            name: "statistic {0.2, 0.8} on [0.45, 0.55]",
            value: empirical_statistic(&[0.2, 0.8], 0.45, 0.55)?,
            expected: 0.05,
            tol: 1e-15,
        },
        Check { name: "statistic {0.5}", value: empirical_statistic(&[0.5], 0.0, 1.0)?, expected: 0.5, tol: 0.0 },
        Check { name: "exact cdf n=1 t=0.75", value: exact_null_cdf(1, 0.75)?, expected: 0.5, tol: 1e-12 },
        Check { name: "exact cdf t=1", value: exact_null_cdf(7, 1.0)?, expected: 1.0, tol: 0.0 },
        Check { name: "critical n=1", value: critical_value(1, 0.05)?.value, expected: 0.975, tol: 1e-9 },
        Check {
            name: "critical n=5000 (relative)",
            value: critical_value(5000, 0.05)?.value * 5000f64.sqrt() / 1.3581,
            expected: 1.0,
            tol: 0.02,
        },
        Check { name: "dkw n=50 eps=0.2", value: dkw_bound(50, 0.2), expected: 2.0 * (-4.0f64).exp(), tol: 1e-15 },
        Check { name: "dkw eps=0", value: dkw_bound(50, 0.0), expected: 1.0, tol: 0.0 },
        Check { name: "K(1.3581)", value: kolmogorov_cdf_asymptotic(1.3581), expected: 0.95, tol: 5e-4 },
        Check { name: "K(0.82757)", value: kolmogorov_cdf_asymptotic(0.82757), expected: 0.5, tol: 1e-3 },
        Check { name: "K(0)", value: kolmogorov_cdf_asymptotic(0.0), expected: 0.0, tol: 0.0 },
        Check {
            name: "besov {(2,1): 0.1}",
            value: besov_norm(&field(&[(2, 1, 0.1)]), 1.0),
            expected: 0.8,
            tol: 1e-15,
        },
        Check {
            name: "besov two-term",
            value: besov_norm(&field(&[(1, 1, 0.2), (3, 5, 0.01)]), 1.0),
            expected: 2f64.powf(1.5) * 0.2,
            tol: 1e-15,
        },
        Check { name: "s(1/4)", value: maxiset_smoothness(0.25)?, expected: 1.0, tol: 0.0 },
        Check { name: "s(1/3)", value: maxiset_smoothness(1.0 / 3.0)?, expected: 2.0, tol: 1e-14 },
        Check {
            name: "s-margin {(2,1): 0.1} n=400",
            value: s_consistency_margin(&field(&[(2, 1, 0.1)]), 400),
            expected: 1.0,
            tol: 1e-15,
        },
        Check {
            name: "tp1 amplitude 6 consistent",
            value: (classify_tp1(&single_coefficient_field(256, 0.25, 6.0, 0, 0.5)?, 256, 0.25, &Tp1Options::default())?
                .kind
                == VerdictKind::Consistent) as u8 as f64,
            expected: 1.0,
            tol: 0.0,
        },
        Check {
            name: "tp1 offset 10 inconsistent",
            value: (classify_tp1(&single_coefficient_field(256, 0.25, 1.0, 10, 0.5)?, 256, 0.25, &Tp1Options::default())?
                .kind
                == VerdictKind::Inconsistent) as u8 as f64,
            expected: 1.0,
            tol: 0.0,
        },
        Check {
            name: "r = 1/2 consistent",
            value: (classify_r_half(&field(&[(1, 1, 0.02)]), 10_000, 5, 1.0, 0.0, 1.0)?.kind == VerdictKind::Consistent)
                as u8 as f64,
            expected: 1.0,
            tol: 0.0,
        },
    ];
    // Monte Carlo oracle for one exact-law value.
    let reps = 1_000_000;
    let stats = null_statistics(3, reps, opts.seed_for(12));
    let exact = exact_null_cdf(3, 0.5)?;
    let mc = stats.iter().filter(|&&s| s <= 0.5).count() as f64 / reps as f64;
    checks.push(Check {
        name: "exact cdf n=3 t=0.5 vs Monte Carlo",
        value: exact,
        expected: mc,
        tol: 3.0 * (exact * (1.0 - exact) / reps as f64).sqrt(),
    });
    let results: Vec<Value> = checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name, "value": c.value, "expected": c.expected, "tolerance": c.tol,
                "pass": (c.value - c.expected).abs() <= c.tol,
            })
        })
        .collect();
    let passed = checks.iter().all(|c| (c.value - c.expected).abs() <= c.tol);
    Ok(Outcome::new(passed, json!({ "checks": results })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_suite("no-such-suite", &SuiteOptions::default()), Err(Error::UnknownSuite(_))));
        assert!(run_suite("exact-values", &SuiteOptions { seed: 1, reps: Some(10) }).is_err());
    }

    #[test]
    fn catalog_is_complete() {
        let ids: Vec<u8> = suite_catalog().iter().map(|s| s.criterion).collect();
        assert_eq!(ids, (1..=12).collect::<Vec<u8>>());
    }

    #[test]
    fn exact_values_suite_passes() {
        let report = run_suite("exact-values", &SuiteOptions::default()).unwrap();
        assert!(report.passed, "{}", report.to_json());
        assert!(report.summary_line().starts_with("[PASS] 12 exact-values"));
    }
}
