//! Brownian-bridge Monte Carlo: non-crossing probabilities of shifted bridges,
//! paired gaps between shifts, and the empirical-process coupling.
//!
//! Replicate `k` of an experiment seeded with `seed` draws from
//! `stream_rng(seed, k)`, so every estimate is independent of the rayon schedule.
//! Suprema are taken over the grid nodes `k / G`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::ks::two_sample_statistic;
use crate::model::AlternativeDensity;
use crate::rng::{derive_seed, fill_sorted_uniforms, stream_rng};

pub const MAX_GRID: usize = 1_000_000;
pub const DEFAULT_GRID: usize = 4096;
pub const DEFAULT_PATH_REPS: usize = 100_000;

/// Brownian bridge sampled at `k / G`, `k = 0..=G`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePath {
    values: Vec<f64>,
}

impl BridgePath {
    pub fn grid(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let g = self.grid() as f64;
        (0..self.values.len()).map(move |k| k as f64 / g)
    }
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < 2 {
        return domain(format!("grid size {grid} below 2"));
    }
    if grid > MAX_GRID {
        return Err(Error::Capacity(format!("grid size {grid} exceeds {MAX_GRID}")));
    }
    Ok(())
}

/// Writes a bridge on `buf.len() - 1` cells: Wiener increments of variance `1/G`,
/// then `b(t) = W(t) − t W(1)`.
fn fill_bridge<R: Rng + ?Sized>(rng: &mut R, buf: &mut [f64]) {
    let grid = buf.len() - 1;
    let step = (1.0 / grid as f64).sqrt();
    buf[0] = 0.0;
    for k in 1..=grid {
        let z: f64 = rng.sample(StandardNormal);
        buf[k] = buf[k - 1] + step * z;
    }
    let end = buf[grid];
    for (k, v) in buf.iter_mut().enumerate() {
        *v -= k as f64 / grid as f64 * end;
    }
    buf[grid] = 0.0;
}

/// One bridge path from stream 0 of `seed`.
pub fn simulate_bridge(grid: usize, seed: u64) -> Result<BridgePath> {
    check_grid(grid)?;
    let mut values = vec![0.0; grid + 1];
    fill_bridge(&mut stream_rng(seed, 0), &mut values);
    Ok(BridgePath { values })
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Bounded shift `u(t)` on [0, 1].
#[derive(Clone)]
pub struct ShiftFunction {
    eval: Evaluator,
    sup_norm: f64,
    label: String,
}

impl fmt::Debug for ShiftFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShiftFunction").field("label", &self.label).field("sup_norm", &self.sup_norm).finish()
    }
}

impl ShiftFunction {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self { eval: Arc::new(move |_| value), sup_norm: value.abs(), label: format!("constant({value})") }
    }

    /// Tent of height `height` on `[lo, hi]`, zero elsewhere.
    pub fn triangle(lo: f64, hi: f64, height: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) || !height.is_finite() {
            return domain(format!("triangle support [{lo}, {hi}] or height {height} invalid"));
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        Ok(Self {
            eval: Arc::new(move |t| {
                let d = (t - mid).abs();
                if d >= half {
                    0.0
                } else {
                    height * (1.0 - d / half)
                }
            }),
            sup_norm: height.abs(),
            label: format!("triangle({lo}, {hi}, {height})"),
        })
    }

    /// `u(s) = √n · D(F⁻¹(s))`, the limiting drift of `√n(F̂_n − F₀)` under `model`
    /// after the time change `s = F(x)`.
    pub fn from_model(model: &AlternativeDensity, n: usize) -> Result<Self> {
        if !model.is_strictly_positive() {
            return Err(Error::NonInvertible { floor: model.density_floor() });
        }
        let scale = (n as f64).sqrt();
        let sup_norm = scale * model.kolmogorov_distance();
        let label = format!("model({}, n={n})", model.family().name());
        let model = model.clone();
        Ok(Self {
            eval: Arc::new(move |s| {
                let x = model.quantile_unchecked(s.clamp(0.0, 1.0));
                scale * (model.cdf_unchecked(x) - x)
            }),
            sup_norm,
            label,
        })
    }

    /// Arbitrary bounded shift; the reported sup norm is taken over 65 537 equispaced points.
    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let points = 1 << 16;
        let mut sup_norm = 0.0f64;
        for k in 0..=points {
            let v = f(k as f64 / points as f64);
            if !v.is_finite() {
                return domain("shift function is not finite on [0, 1]");
            }
            sup_norm = sup_norm.max(v.abs());
        }
        Ok(Self { eval: Arc::new(f), sup_norm, label: label.into() })
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Values at `k / G`, `k = 0..=G`.
    pub fn on_grid(&self, grid: usize) -> Vec<f64> {
        (0..=grid).map(|k| self.eval(k as f64 / grid as f64)).collect()
    }
}

/// Replicate count, grid size and seed for a path experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathConfig {
    pub reps: usize,
    pub grid: usize,
    pub seed: u64,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self { reps: DEFAULT_PATH_REPS, grid: DEFAULT_GRID, seed: 0 }
    }
}

impl PathConfig {
    pub fn new(reps: usize, grid: usize, seed: u64) -> Result<Self> {
        let cfg = Self { reps, grid, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return domain("reps must be at least 1");
        }
        check_grid(self.grid)
    }
}

/// `max_k |b(k/G) + u_m(k/G)|` for every replicate (outer index) and shift (inner index).
/// All shifts of one replicate see the same path.
pub fn shifted_maxima(shifts: &[ShiftFunction], cfg: &PathConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let grids: Vec<Vec<f64>> = shifts.iter().map(|u| u.on_grid(cfg.grid)).collect();
    let maxima = (0..cfg.reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; cfg.grid + 1],
            |buf, rep| {
                fill_bridge(&mut stream_rng(cfg.seed, rep as u64), buf);
                grids
                    .iter()
                    .map(|u| buf.iter().zip(u).fold(0.0f64, |m, (b, s)| m.max((b + s).abs())))
                    .collect()
            },
        )
        .collect();
    Ok(maxima)
}

/// Monte Carlo estimate of a probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub p: f64,
    pub stderr: f64,
    pub reps: usize,
    pub grid: usize,
}

fn estimate(hits: usize, cfg: &PathConfig) -> Estimate {
    let p = hits as f64 / cfg.reps as f64;
    Estimate { p, stderr: (p * (1.0 - p) / cfg.reps as f64).sqrt(), reps: cfg.reps, grid: cfg.grid }
}

fn check_level(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        domain(format!("boundary c = {c} must be positive"))
    }
}

/// `P(max_t |b(t) + u(t)| < c)`.
pub fn noncrossing_prob(u: &ShiftFunction, c: f64, cfg: &PathConfig) -> Result<Estimate> {
    check_level(c)?;
    let maxima = shifted_maxima(std::slice::from_ref(u), cfg)?;
    Ok(estimate(maxima.iter().filter(|m| m[0] < c).count(), cfg))
}

/// Paired difference of two non-crossing probabilities estimated on common paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedGap {
    pub p_first: f64,
    pub p_second: f64,
    /// `p_first − p_second`.
    pub gap: f64,
    pub stderr: f64,
    /// `gap / stderr`; 0 when both are 0.
    pub z: f64,
    pub reps: usize,
    pub grid: usize,
}

fn paired_gap(first: &ShiftFunction, second: &ShiftFunction, c: f64, cfg: &PathConfig) -> Result<PairedGap> {
    check_level(c)?;
    let maxima = shifted_maxima(&[first.clone(), second.clone()], cfg)?;
    let (mut a, mut b, mut sq) = (0usize, 0usize, 0usize);
    for m in &maxima {
        let (ia, ib) = ((m[0] < c) as i64, (m[1] < c) as i64);
        a += ia as usize;
        b += ib as usize;
        sq += ((ia - ib) * (ia - ib)) as usize;
    }
    let reps = cfg.reps as f64;
    let gap = (a as f64 - b as f64) / reps;
    let var = (sq as f64 / reps - gap * gap).max(0.0);
    let stderr = (var / reps).sqrt();
    let z = if stderr > 0.0 {
        gap / stderr
    } else if gap == 0.0 {
        0.0
    } else {
        gap.signum() * f64::INFINITY
    };
    Ok(PairedGap { p_first: a as f64 / reps, p_second: b as f64 / reps, gap, stderr, z, reps: cfg.reps, grid: cfg.grid })
}

/// `P(max|b| < c) − P(max|b + u| < c)` on common paths.
pub fn anderson_gap(u: &ShiftFunction, c: f64, cfg: &PathConfig) -> Result<PairedGap> {
    paired_gap(&ShiftFunction::zero(), u, c, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuityCheck {
    /// `|p̂(h1) − p̂(h2)|` on common paths.
    pub lhs: f64,
    /// `max_k |h1(k/G) − h2(k/G)|`.
    pub delta: f64,
    pub stderr: f64,
}

pub fn shift_continuity_check(
    h1: &ShiftFunction,
    h2: &ShiftFunction,
    c: f64,
    cfg: &PathConfig,
) -> Result<ContinuityCheck> {
    let delta = h1.on_grid(cfg.grid).iter().zip(h2.on_grid(cfg.grid)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let g = paired_gap(h1, h2, c, cfg)?;
    Ok(ContinuityCheck { lhs: g.gap.abs(), delta, stderr: g.stderr })
}

/// Largest `|p̂(0) − p̂(δ)| / δ` over constant shifts `δ ∈ deltas`, an empirical
/// constant for `lhs ≤ C δ`.
pub fn calibrate_continuity_constant(c: f64, deltas: &[f64], cfg: &PathConfig) -> Result<f64> {
    check_level(c)?;
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) {
        return domain("calibration needs positive shifts");
    }
    let mut shifts = vec![ShiftFunction::zero()];
    shifts.extend(deltas.iter().map(|&d| ShiftFunction::constant(d)));
    let maxima = shifted_maxima(&shifts, cfg)?;
    let base = maxima.iter().filter(|m| m[0] < c).count() as f64;
    Ok(deltas
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let hits = maxima.iter().filter(|m| m[k + 1] < c).count() as f64;
            (base - hits).abs() / cfg.reps as f64 / d
        })
        .fold(0.0, f64::max))
}

/// Two ensembles of the sup functional and their two-sample distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub distance: f64,
    pub n: usize,
    pub reps: usize,
    pub grid: usize,
    /// Sorted `√n sup|F̂_n − F_n|` values.
    #[serde(skip)]
    pub empirical: Vec<f64>,
    /// Sorted `max_k |b(k/G)|` values.
    #[serde(skip)]
    pub bridge: Vec<f64>,
}

/// Largest `√n T(F_n)` accepted by [`coupling_distance`].
pub const COUPLING_SHIFT_BOUND: f64 = 100.0;

/// Two-sample Kolmogorov distance between the laws of `√n sup_t |F̂_n(t) − F_n(t)|`
/// (samples of size `n` from `model`) and `sup_t |b(F_n(t))| = sup_s |b(s)|`.
pub fn coupling_distance(model: &AlternativeDensity, n: usize, cfg: &PathConfig) -> Result<CouplingReport> {
    cfg.validate()?;
    if n == 0 {
        return domain("n must be positive");
    }
    if !model.is_strictly_positive() {
        return domain(format!("model CDF is not strictly increasing (density floor {})", model.density_floor()));
    }
    let shift = (n as f64).sqrt() * model.kolmogorov_distance();
    if shift > COUPLING_SHIFT_BOUND {
        return domain(format!("sqrt(n) T(F_n) = {shift} exceeds {COUPLING_SHIFT_BOUND}"));
    }
    let sample_seed = derive_seed(cfg.seed, 1);
    let root_n = (n as f64).sqrt();
    let mut empirical: Vec<f64> = (0..cfg.reps)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(u, fx), rep| {
                fill_sorted_uniforms(&mut stream_rng(sample_seed, rep as u64), u);
                for (dst, &v) in fx.iter_mut().zip(u.iter()) {
                    *dst = model.cdf_unchecked(model.quantile_unchecked(v));
                }
                root_n * crate::ks::statistic_unchecked(fx, 0.0, 1.0)
            },
        )
        .collect();
    let bridge_cfg = PathConfig { seed: derive_seed(cfg.seed, 2), ..*cfg };
    let mut bridge: Vec<f64> = shifted_maxima(&[ShiftFunction::zero()], &bridge_cfg)?.into_iter().map(|m| m[0]).collect();
    empirical.sort_by(f64::total_cmp);
    bridge.sort_by(f64::total_cmp);
    let distance = two_sample_statistic(&empirical, &bridge)?;
    Ok(CouplingReport { distance, n, reps: cfg.reps, grid: cfg.grid, empirical, bridge })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ks::kolmogorov_cdf_asymptotic;
    use crate::model::gen_interior_bump;

    #[test]
    fn bridge_is_pinned_and_reproducible() {
        for seed in [0, 1, 99] {
            let p = simulate_bridge(64, seed).unwrap();
            assert_eq!(p.values()[0], 0.0);
            assert_eq!(p.values()[64], 0.0);
            assert_eq!(p, simulate_bridge(64, seed).unwrap());
        }
        assert_ne!(simulate_bridge(64, 1).unwrap(), simulate_bridge(64, 2).unwrap());
        assert!(simulate_bridge(1, 0).is_err());
        assert!(matches!(simulate_bridge(MAX_GRID + 1, 0), Err(Error::Capacity(_))));
    }

    #[test]
    fn bridge_covariance() {
        let reps = 100_000;
        let grid = 1024;
        let nodes = [256usize, 512, 768];
        let rows: Vec<[f64; 3]> = (0..reps)
            .into_par_iter()
            .map_init(
                || vec![0.0; grid + 1],
                |buf, rep| {
                    fill_bridge(&mut stream_rng(5, rep as u64), buf);
                    [buf[nodes[0]], buf[nodes[1]], buf[nodes[2]]]
                },
            )
            .collect();
        let times = [0.25, 0.5, 0.75];
        for a in 0..3 {
            for b in a..3 {
                let (s, t) = (times[a], times[b]);
                let cov = rows.iter().map(|r| r[a] * r[b]).sum::<f64>() / reps as f64;
                let expect = s * (1.0 - t);
                // Var(XY) = Var X Var Y + Cov² for centered Gaussians.
                let var_xy = times[a] * (1.0 - times[a]) * times[b] * (1.0 - times[b]) + expect * expect;
                let se = (var_xy / reps as f64).sqrt();
                assert!((cov - expect).abs() <= 3.0 * se, "({s}, {t}): {cov} vs {expect}");
            }
        }
        let var = rows.iter().map(|r| r[1] * r[1]).sum::<f64>() / reps as f64;
        assert!((var - 0.25).abs() <= 3.0 * (2.0 * 0.25f64.powi(2) / reps as f64).sqrt());
    }

    #[test]
    fn unshifted_noncrossing_matches_limit() {
        let c = 1.3581;
        let fine = PathConfig::new(100_000, 4096, 3).unwrap();
        let coarse = PathConfig { grid: 1024, ..fine };
        let p_fine = noncrossing_prob(&ShiftFunction::zero(), c, &fine).unwrap();
        let p_coarse = noncrossing_prob(&ShiftFunction::zero(), c, &coarse).unwrap();
        let bias = (p_coarse.p - p_fine.p).abs();
        let limit = kolmogorov_cdf_asymptotic(c);
        assert!((limit - 0.95).abs() < 1e-4);
        let slack = bias + 3.0 * (p_fine.stderr + p_coarse.stderr);
        assert!((p_fine.p - limit).abs() <= slack, "{} vs {limit}, slack {slack}", p_fine.p);
    }

    #[test]
    fn grid_refinement_is_stable() {
        // A bridge on G = 4096 restricted to even nodes is a bridge on G = 2048,
        // so the two grids can be compared on the same paths.
        let cfg = PathConfig::new(100_000, 4096, 8).unwrap();
        let c = 1.3581;
        let (fine, coarse) = (0..cfg.reps)
            .into_par_iter()
            .map_init(
                || vec![0.0; cfg.grid + 1],
                |buf, rep| {
                    fill_bridge(&mut stream_rng(cfg.seed, rep as u64), buf);
                    let all = buf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    let even = buf.iter().step_by(2).fold(0.0f64, |m, v| m.max(v.abs()));
                    ((all < c) as usize, (even < c) as usize)
                },
            )
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let diff = (coarse as f64 - fine as f64) / cfg.reps as f64;
        assert!((0.0..0.003).contains(&diff), "{diff}");
    }

    #[test]
    fn noncrossing_edge_cases() {
        let cfg = PathConfig::new(2000, 256, 1).unwrap();
        assert_eq!(noncrossing_prob(&ShiftFunction::constant(10.0), 1.0, &cfg).unwrap().p, 0.0);
        assert!(noncrossing_prob(&ShiftFunction::zero(), 10.0, &cfg).unwrap().p >= 0.9999);
        assert!(noncrossing_prob(&ShiftFunction::zero(), 0.0, &cfg).is_err());
        assert!(PathConfig::new(0, 256, 1).is_err());
    }

    #[test]
    fn noncrossing_is_monotone_in_c() {
        let cfg = PathConfig::new(5000, 512, 2).unwrap();
        let maxima = shifted_maxima(&[ShiftFunction::zero()], &cfg).unwrap();
        let mut last = 0;
        for k in 1..=40 {
            let c = k as f64 * 0.05;
            let hits = maxima.iter().filter(|m| m[0] < c).count();
            assert!(hits >= last);
            last = hits;
        }
    }

    #[test]
    fn anderson_gap_signs() {
        let cfg = PathConfig::new(100_000, 4096, 17).unwrap();
        let zero = anderson_gap(&ShiftFunction::zero(), 1.3581, &cfg).unwrap();
        assert_eq!(zero.gap, 0.0);
        assert_eq!(zero.z, 0.0);
        let tent = ShiftFunction::triangle(0.3, 0.7, 0.5).unwrap();
        let g = anderson_gap(&tent, 1.3581, &cfg).unwrap();
        assert!(g.gap > 0.0 && g.z >= 3.0, "{g:?}");
        let tiny = anderson_gap(&ShiftFunction::constant(1e-6), 1.3581, &cfg).unwrap();
        assert!(tiny.gap.abs() <= 3.0 * tiny.stderr.max(1.0 / cfg.reps as f64), "{tiny:?}");
    }

    #[test]
    fn anderson_gap_never_significantly_negative() {
        let cfg = PathConfig::new(20_000, 1024, 23).unwrap();
        let shifts = [
            ShiftFunction::constant(0.2),
            ShiftFunction::triangle(0.0, 1.0, -0.4).unwrap(),
            ShiftFunction::triangle(0.8, 1.0, 1.0).unwrap(),
            ShiftFunction::custom("sine", |t| 0.3 * (6.0 * t).sin()).unwrap(),
        ];
        for u in &shifts {
            for c in [0.8, 1.3581, 1.8] {
                let g = anderson_gap(u, c, &cfg).unwrap();
                assert!(g.gap >= -3.0 * g.stderr, "{} at c = {c}: {g:?}", u.label());
            }
        }
    }

    #[test]
    fn continuity_checks() {
        let cfg = PathConfig::new(20_000, 1024, 31).unwrap();
        let c = 1.3581;
        let h = ShiftFunction::triangle(0.2, 0.6, 0.3).unwrap();
        let same = shift_continuity_check(&h, &h, c, &cfg).unwrap();
        assert_eq!((same.lhs, same.delta), (0.0, 0.0));

        let constant = calibrate_continuity_constant(c, &[0.02, 0.05, 0.1], &cfg).unwrap();
        let full = shift_continuity_check(&ShiftFunction::zero(), &ShiftFunction::constant(0.05), c, &cfg).unwrap();
        assert!((full.delta - 0.05).abs() < 1e-15);
        assert!(full.lhs <= constant * full.delta + 3.0 * full.stderr);
        let half = shift_continuity_check(&ShiftFunction::zero(), &ShiftFunction::constant(0.025), c, &cfg).unwrap();
        assert!(half.lhs <= full.lhs + 3.0 * (half.stderr + full.stderr));
    }

    #[test]
    fn model_shift_matches_deviation() {
        let m = gen_interior_bump(400, 1.0, 0.5, 0.4).unwrap();
        let u = ShiftFunction::from_model(&m, 400).unwrap();
        assert!((u.sup_norm() - 1.0).abs() < 1e-12);
        let peak_s = m.cdf(0.5).unwrap();
        assert!((u.eval(peak_s) - 1.0).abs() < 1e-9);
        assert_eq!(u.eval(0.0), 0.0);
        assert!(u.eval(1.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_is_reproducible_and_validated() {
        let cfg = PathConfig::new(500, 256, 4).unwrap();
        let m = AlternativeDensity::uniform();
        let a = coupling_distance(&m, 50, &cfg).unwrap();
        let b = coupling_distance(&m, 50, &cfg).unwrap();
        assert_eq!(a.distance, b.distance);
        assert!(a.empirical.windows(2).all(|w| w[0] <= w[1]));
        let flat = crate::model::build_density(crate::model::CoefficientField::from_triples(&[(2, 1, 0.5)]).unwrap())
            .unwrap();
        assert!(coupling_distance(&flat, 50, &cfg).is_err());
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let cfg = PathConfig::new(300, 128, 12).unwrap();
        let u = ShiftFunction::triangle(0.1, 0.5, 0.7).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| shifted_maxima(std::slice::from_ref(&u), &cfg).unwrap());
        let b = three.install(|| shifted_maxima(std::slice::from_ref(&u), &cfg).unwrap());
        assert_eq!(a, b);
    }
}
