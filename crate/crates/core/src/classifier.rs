//! Pointwise consistency verdicts for coefficient-field alternatives at a single `n`.
//!
//! Asymptotic conditions are finitized: `j_n − k_n = O(1)` becomes
//! `|j − k_n| ≤ window`, `o(·)` becomes a ratio `≤ tol`. Every parameter used
//! appears in the verdict diagnostics.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::besov::{besov_norm, maxiset_smoothness, orientation, truncate_decompose};
use crate::error::{domain, Error, Result};
use crate::model::{check_condition_g, critical_scale, field_kolmogorov_distance, CoefficientField, ConditionG, DEFAULT_C_EPS};
use crate::wavelet::WaveletIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    Consistent,
    AlphaConsistentOnly,
    Inconsistent,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub j: u32,
    pub i: u64,
    pub theta: f64,
}

const LIMITATIONS: &str = "Haar basis only: piecewise-constant wavelets with one vanishing moment; \
the centered first moment of the mother wavelet is -1/4, so smoothness classes above s = 1 are not characterized";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyVerdict {
    pub kind: VerdictKind,
    pub witness: Option<Witness>,
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub basis: &'static str,
    pub limitations: &'static str,
}

impl ConsistencyVerdict {
    fn new(kind: VerdictKind, witness: Option<Witness>, diagnostics: BTreeMap<String, f64>, reason: Option<String>) -> Self {
        debug_assert_eq!(
            witness.is_some(),
            matches!(kind, VerdictKind::Consistent | VerdictKind::AlphaConsistentOnly)
        );
        Self { kind, witness, diagnostics, reason, basis: "haar", limitations: LIMITATIONS }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

/// Finitization parameters for [`classify_tp1`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tp1Options {
    pub window: i64,
    pub c_small: f64,
    pub tol: f64,
    pub e1: f64,
    pub e2: f64,
    /// `ε` of the coarse-scale check.
    pub g_eps: f64,
    pub c_eps: i64,
}

impl Default for Tp1Options {
    fn default() -> Self {
        Self { window: 3, c_small: 1.0, tol: 0.1, e1: 0.0, e2: 1.0, g_eps: 0.1, c_eps: DEFAULT_C_EPS }
    }
}

fn check_rate(r: f64) -> Result<()> {
    if r > 0.0 && r < 0.5 {
        Ok(())
    } else {
        domain(format!("r = {r} outside (0, 1/2)"))
    }
}

fn check_interval(e1: f64, e2: f64) -> Result<()> {
    if 0.0 <= e1 && e1 < e2 && e2 <= 1.0 {
        Ok(())
    } else {
        domain(format!("interval [{e1}, {e2}] is not a proper subinterval of [0, 1]"))
    }
}

fn interior(idx: WaveletIndex, e1: f64, e2: f64) -> bool {
    let x = idx.location();
    e1 < x && x < e2
}

/// Largest entry (by `|θ|`) among `candidates`, split into interior and boundary positions.
fn pick_witness(
    candidates: impl Iterator<Item = (WaveletIndex, f64)>,
    e1: f64,
    e2: f64,
) -> (Option<Witness>, Option<Witness>) {
    let mut inner: Option<Witness> = None;
    let mut edge: Option<Witness> = None;
    for (idx, theta) in candidates {
        let w = Witness { j: idx.scale(), i: idx.position(), theta };
        let slot = if interior(idx, e1, e2) { &mut inner } else { &mut edge };
        if slot.is_none_or(|s| theta.abs() > s.theta.abs()) {
            *slot = Some(w);
        }
    }
    (inner, edge)
}

fn g_diagnostics(d: &mut BTreeMap<String, f64>, g: &ConditionG) {
    d.insert("condition_g_holds".into(), g.holds as u8 as f64);
    d.insert("condition_g_worst".into(), g.worst_value);
}

/// Threshold dichotomy at the critical scale: a coefficient with
/// `|θ| > c n^{-1/4-r/2}` within `window` scales of `k_n` makes the alternative detectable.
pub fn classify_tp1(coeffs: &CoefficientField, n: usize, r: f64, opts: &Tp1Options) -> Result<ConsistencyVerdict> {
    check_rate(r)?;
    check_interval(opts.e1, opts.e2)?;
    if n == 0 || opts.window < 0 || !(opts.c_small > 0.0) || !(opts.tol > 0.0) {
        return domain("classify_tp1 needs n >= 1, window >= 0, c_small > 0, tol > 0");
    }
    let k = critical_scale(n, r);
    let unit = (n as f64).powf(-0.25 - r / 2.0);
    let threshold = opts.c_small * unit;
    let mut d = BTreeMap::new();
    d.insert("n".into(), n as f64);
    d.insert("r".into(), r);
    d.insert("k_n".into(), k as f64);
    d.insert("threshold".into(), threshold);
    d.insert("window".into(), opts.window as f64);
    d.insert("c_small".into(), opts.c_small);
    d.insert("tol".into(), opts.tol);
    d.insert("e1".into(), opts.e1);
    d.insert("e2".into(), opts.e2);
    d.insert("g_eps".into(), opts.g_eps);
    d.insert("c_eps".into(), opts.c_eps as f64);
    let max_ratio = coeffs.iter().map(|(_, t)| t.abs() / threshold).fold(0.0, f64::max);
    d.insert("margin".into(), max_ratio);

    let g = check_condition_g(coeffs, n, r, opts.g_eps, opts.c_eps)?;
    g_diagnostics(&mut d, &g);
    if !g.holds {
        let reason = format!(
            "condition G fails: sqrt(n) T = {} at level {:?} is not below {}",
            g.worst_value, g.worst_level, opts.g_eps
        );
        return Ok(ConsistencyVerdict::new(VerdictKind::Undetermined, None, d, Some(reason)));
    }

    let in_window = |idx: WaveletIndex| (idx.scale() as i64 - k).abs() <= opts.window;
    let (inner, edge) =
        pick_witness(coeffs.iter().filter(|&(idx, t)| in_window(idx) && t.abs() > threshold), opts.e1, opts.e2);
    if let Some(w) = inner {
        d.insert("witness_ratio".into(), w.theta.abs() / threshold);
        return Ok(ConsistencyVerdict::new(VerdictKind::Consistent, Some(w), d, None));
    }
    if let Some(w) = edge {
        d.insert("witness_ratio".into(), w.theta.abs() / threshold);
        let reason = "detectable coefficient only at boundary positions of the interval".to_string();
        return Ok(ConsistencyVerdict::new(VerdictKind::AlphaConsistentOnly, Some(w), d, Some(reason)));
    }
    let small = opts.tol * threshold;
    let coarse_max = coeffs
        .iter()
        .filter(|(idx, _)| idx.scale() as i64 <= k + opts.window)
        .map(|(_, t)| t.abs())
        .fold(0.0, f64::max);
    d.insert("coarse_ratio".into(), coarse_max / threshold);
    if coarse_max <= small {
        Ok(ConsistencyVerdict::new(VerdictKind::Inconsistent, None, d, None))
    } else {
        let reason = format!(
            "coefficients on scales <= k_n + window reach {} x threshold: neither above 1 nor below tol",
            coarse_max / threshold
        );
        Ok(ConsistencyVerdict::new(VerdictKind::Undetermined, None, d, Some(reason)))
    }
}

/// Deep-tail criterion `sup_{j > k_n + N1} 2^{j/2}|θ| ≤ ε n^{-r}` for pure consistency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PureVerdict {
    pub holds: bool,
    /// Achieved supremum over the bound.
    pub margin: f64,
    pub sup: f64,
    pub bound: f64,
    pub literal: bool,
}

/// With `literal` set, the supremum is multiplied by `n^r` as in the display it is
/// taken from; by default it is compared to `ε n^{-r}` directly.
pub fn classify_pure(coeffs: &CoefficientField, n: usize, r: f64, eps: f64, n1: i64, literal: bool) -> Result<PureVerdict> {
    if !(eps > 0.0) || n == 0 {
        return domain("classify_pure needs eps > 0 and n >= 1");
    }
    let cut = critical_scale(n, r) + n1;
    let raw = coeffs
        .iter()
        .filter(|(idx, _)| idx.scale() as i64 > cut)
        .map(|(idx, t)| (0.5 * idx.scale() as f64).exp2() * t.abs())
        .fold(0.0, f64::max);
    let sup = if literal { raw * (n as f64).powf(r) } else { raw };
    let bound = eps * (n as f64).powf(-r);
    Ok(PureVerdict { holds: sup <= bound, margin: sup / bound, sup, bound, literal })
}

/// `max √n 2^{-j/2}|θ_{ji}|`.
pub fn s_consistency_margin(coeffs: &CoefficientField, n: usize) -> f64 {
    let root_n = (n as f64).sqrt();
    coeffs.iter().map(|(idx, t)| root_n * (-0.5 * idx.scale() as f64).exp2() * t.abs()).fold(0.0, f64::max)
}

/// Boundary case `r = 1/2`: scales `j ≤ C` with `√n|θ| > c` make the alternative detectable.
pub fn classify_r_half(
    coeffs: &CoefficientField,
    n: usize,
    c_scale: u32,
    c_small: f64,
    e1: f64,
    e2: f64,
) -> Result<ConsistencyVerdict> {
    check_interval(e1, e2)?;
    if n == 0 || c_scale == 0 || !(c_small > 0.0) {
        return domain("classify_r_half needs n >= 1, C >= 1, c > 0");
    }
    let root_n = (n as f64).sqrt();
    let mut d = BTreeMap::new();
    d.insert("n".into(), n as f64);
    d.insert("c_scale".into(), c_scale as f64);
    d.insert("c_small".into(), c_small);
    d.insert("e1".into(), e1);
    d.insert("e2".into(), e2);
    let band_max = coeffs.iter().filter(|(idx, _)| idx.scale() <= c_scale).map(|(_, t)| root_n * t.abs()).fold(0.0, f64::max);
    d.insert("margin".into(), band_max / c_small);
    let (inner, edge) = pick_witness(
        coeffs.iter().filter(|&(idx, t)| idx.scale() <= c_scale && root_n * t.abs() > c_small),
        e1,
        e2,
    );
    if let Some(w) = inner {
        return Ok(ConsistencyVerdict::new(VerdictKind::Consistent, Some(w), d, None));
    }
    if let Some(w) = edge {
        let reason = "detectable coefficient only at boundary positions of the interval".to_string();
        return Ok(ConsistencyVerdict::new(VerdictKind::AlphaConsistentOnly, Some(w), d, Some(reason)));
    }
    let beyond = coeffs.iter().filter(|(idx, _)| idx.scale() > c_scale).count();
    d.insert("entries_beyond_band".into(), beyond as f64);
    let reason = format!(
        "no coefficient on scales <= {c_scale} has sqrt(n)|theta| > {c_small}; \
         {beyond} entries lie beyond the band, where mass of this size is undetectable"
    );
    Ok(ConsistencyVerdict::new(VerdictKind::Inconsistent, None, d, Some(reason)))
}

/// Evidence attached to a head/tail split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tp3Certificate {
    pub extra_scales: u32,
    pub cut_scale: i64,
    /// `√n T` of the CDF built from the tail alone.
    pub tail_scaled_distance: f64,
    pub eps: f64,
    pub orientation_head: bool,
    pub orientation_tail: bool,
    pub reconstruction_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tp3Decomposition {
    pub head: CoefficientField,
    pub tail: CoefficientField,
    /// `besov_norm(head, 2r/(1 − 2r))`.
    pub p0: f64,
    pub smoothness: f64,
    pub certificate: Tp3Certificate,
}

/// Default number of scales above `k_n` searched by [`decompose_tp3`].
pub const DEFAULT_SCALE_BUDGET: u32 = 12;

/// Splits `coeffs` at the smallest `k_n + C` whose tail has `√n T < eps`.
///
/// The field must pass the coarse-scale check at the same `eps` (and `c_eps`).
pub fn decompose_tp3(
    coeffs: &CoefficientField,
    n: usize,
    r: f64,
    eps: f64,
    c_eps: i64,
    budget: u32,
) -> Result<Tp3Decomposition> {
    check_rate(r)?;
    let g = check_condition_g(coeffs, n, r, eps, c_eps)?;
    if !g.holds {
        return domain(format!("condition G fails: sqrt(n) T = {} at level {:?}", g.worst_value, g.worst_level));
    }
    let s = maxiset_smoothness(r)?;
    let root_n = (n as f64).sqrt();
    for c in 0..=budget {
        let (head, tail) = truncate_decompose(coeffs, n, r, c);
        let tail_scaled = root_n * field_kolmogorov_distance(&tail);
        if tail_scaled < eps {
            let certificate = Tp3Certificate {
                extra_scales: c,
                cut_scale: critical_scale(n, r) + c as i64,
                tail_scaled_distance: tail_scaled,
                eps,
                orientation_head: orientation(coeffs, &head),
                orientation_tail: orientation(coeffs, &tail),
                reconstruction_exact: head.add(&tail) == *coeffs,
            };
            let p0 = besov_norm(&head, s);
            return Ok(Tp3Decomposition { head, tail, p0, smoothness: s, certificate });
        }
    }
    Err(Error::Capacity(format!("no split within {budget} scales above k_n leaves a tail with sqrt(n) T < {eps}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::single_coefficient_field;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn field(t: &[(u32, u64, f64)]) -> CoefficientField {
        CoefficientField::from_triples(t).unwrap()
    }

    #[test]
    fn tp1_consistent_example() {
        let f = single_coefficient_field(256, 0.25, 6.0, 0, 0.5).unwrap();
        let v = classify_tp1(&f, 256, 0.25, &Tp1Options::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Consistent);
        let w = v.witness.unwrap();
        assert_eq!(w.j, 2);
        assert_abs_diff_eq!(w.theta, 0.75, epsilon = 1e-15);
        assert_eq!(v.diagnostics["k_n"], 2.0);
        assert_abs_diff_eq!(v.diagnostics["threshold"], 0.125, epsilon = 1e-15);
    }

    #[test]
    fn tp1_inconsistent_example() {
        let f = single_coefficient_field(256, 0.25, 1.0, 10, 0.5).unwrap();
        let (idx, theta) = f.iter().next().unwrap();
        assert_eq!(idx.scale(), 12);
        assert_abs_diff_eq!(theta, 0.25 * 2f64.powi(-6), epsilon = 1e-18);
        let v = classify_tp1(&f, 256, 0.25, &Tp1Options::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Inconsistent);
        assert!(v.witness.is_none());
        assert_abs_diff_eq!(v.diagnostics["margin"], theta / 0.125, epsilon = 1e-15);
    }

    #[test]
    fn tp1_boundary_witness() {
        // n = 2^16, r = 1/4: k_n = 4 and the first cell ends at 1/16 < 0.1.
        let n = 1 << 16;
        let f = field(&[(4, 1, 0.05)]);
        let opts = Tp1Options { e1: 0.1, e2: 0.9, ..Tp1Options::default() };
        let v = classify_tp1(&f, n, 0.25, &opts).unwrap();
        assert_eq!(v.kind, VerdictKind::AlphaConsistentOnly);
        assert_eq!(v.witness.unwrap().i, 1);
        let full = classify_tp1(&f, n, 0.25, &Tp1Options::default()).unwrap();
        assert_eq!(full.kind, VerdictKind::Consistent);
    }

    #[test]
    fn tp1_undetermined_cases() {
        // Coarse mass: √n T at level 1 is far above ε.
        let f = field(&[(1, 1, 0.3), (5, 3, 0.2)]);
        let v = classify_tp1(&f, 10_000, 0.1, &Tp1Options::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Undetermined);
        assert!(v.reason.unwrap().contains("condition G"));
        // In-window coefficient between tol and 1 times the threshold.
        let mid = field(&[(2, 2, 0.5 * 0.125)]);
        let v = classify_tp1(&mid, 256, 0.25, &Tp1Options::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Undetermined);
        assert!(classify_tp1(&mid, 256, 0.5, &Tp1Options::default()).is_err());
    }

    #[test]
    fn verdict_json_shape() {
        let f = single_coefficient_field(256, 0.25, 6.0, 0, 0.5).unwrap();
        let v = classify_tp1(&f, 256, 0.25, &Tp1Options::default()).unwrap();
        let json: serde_json::Value = serde_json::from_str(&v.to_json()).unwrap();
        assert_eq!(json["kind"], "consistent");
        assert_eq!(json["witness"]["j"], 2);
        assert_eq!(json["basis"], "haar");
        assert!(json["diagnostics"]["k_n"].is_number());
    }

    #[test]
    fn pure_examples() {
        let n = 256;
        let r = 0.25;
        let k = critical_scale(n, r) as u32;
        let base = field(&[(k, 1, 0.1)]);
        let v = classify_pure(&base, n, r, 0.1, 2, false).unwrap();
        assert!(v.holds);
        assert_eq!(v.margin, 0.0);
        let j = k + 2 + 5;
        let theta = 0.5 * (n as f64).powf(-r) * (-0.5 * j as f64).exp2();
        let tailed = base.add(&field(&[(j, 3, theta)]));
        let v = classify_pure(&tailed, n, r, 0.1, 2, false).unwrap();
        assert!(!v.holds);
        assert_abs_diff_eq!(v.margin, 5.0, epsilon = 1e-12);
        let lit = classify_pure(&tailed, n, r, 0.1, 2, true).unwrap();
        assert_abs_diff_eq!(lit.margin, 5.0 * 4.0, epsilon = 1e-11);
        assert!(classify_pure(&CoefficientField::new(), n, r, 0.1, 2, false).unwrap().holds);
    }

    #[test]
    fn s_margin_examples() {
        assert_abs_diff_eq!(s_consistency_margin(&field(&[(2, 1, 0.1)]), 400), 1.0, epsilon = 1e-15);
        assert_eq!(s_consistency_margin(&CoefficientField::new(), 400), 0.0);
    }

    #[test]
    fn r_half_examples() {
        let n = 10_000;
        let f = field(&[(1, 1, 2.0 / 100.0)]);
        let v = classify_r_half(&f, n, 5, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(v.kind, VerdictKind::Consistent);
        assert_abs_diff_eq!(v.diagnostics["margin"], 2.0, epsilon = 1e-12);
        let deep = field(&[(14, 5000, 0.5)]);
        let v = classify_r_half(&deep, n, 5, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(v.kind, VerdictKind::Inconsistent);
        assert_eq!(v.diagnostics["entries_beyond_band"], 1.0);
        let v = classify_r_half(&CoefficientField::new(), n, 5, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(v.kind, VerdictKind::Inconsistent);
    }

    #[test]
    fn tp3_examples() {
        let n = 1 << 12;
        let r = 0.25;
        let k = critical_scale(n, r) as u32;
        let single = field(&[(k, 2, 0.05)]);
        let d = decompose_tp3(&single, n, r, 0.5, DEFAULT_C_EPS, DEFAULT_SCALE_BUDGET).unwrap();
        assert_eq!(d.head, single);
        assert!(d.tail.is_empty());
        assert_eq!(d.certificate.tail_scaled_distance, 0.0);

        let with_tail = single.add(&field(&[(k + 6, 40, 1e-4), (k + 8, 100, -5e-5)]));
        let d = decompose_tp3(&with_tail, n, r, 0.5, DEFAULT_C_EPS, DEFAULT_SCALE_BUDGET).unwrap();
        assert!(d.certificate.tail_scaled_distance < 0.5);
        assert!(d.certificate.reconstruction_exact && d.certificate.orientation_head && d.certificate.orientation_tail);
        assert!(d.head.add(&d.tail) == with_tail);
        assert!(d.p0.is_finite());

        let heavy = single.add(&field(&[(k + 10, 7, 0.002)]));
        let e = decompose_tp3(&heavy, n, r, 1e-9, DEFAULT_C_EPS, 4).unwrap_err();
        assert!(matches!(e, Error::Capacity(_)));
    }

    fn arb_field() -> impl Strategy<Value = CoefficientField> {
        proptest::collection::vec((1u32..10, 0.0f64..1.0, -0.05f64..0.05), 0..10).prop_map(|v| {
            let mut f = CoefficientField::new();
            for (j, pos, theta) in v {
                let i = ((pos * (1u64 << j) as f64) as u64 + 1).min(1u64 << j);
                f.insert(WaveletIndex::new(j, i).unwrap(), theta).unwrap();
            }
            f
        })
    }

    proptest! {
        #[test]
        fn tp1_threshold_relative(f in arb_field(), lambda in 0.01f64..50.0, logn in 6u32..20) {
            let n = 1usize << logn;
            let base = Tp1Options { g_eps: 1e6, ..Tp1Options::default() };
            let scaled_opts = Tp1Options { c_small: lambda * base.c_small, g_eps: lambda * base.g_eps, ..base };
            let a = classify_tp1(&f, n, 0.25, &base).unwrap();
            let b = classify_tp1(&f.scaled(lambda), n, 0.25, &scaled_opts).unwrap();
            prop_assert_eq!(a.kind, b.kind);
        }

        #[test]
        fn s_margin_homogeneous(f in arb_field(), lambda in -10.0f64..10.0, n in 1usize..100_000) {
            let a = s_consistency_margin(&f.scaled(lambda), n);
            let b = lambda.abs() * s_consistency_margin(&f, n);
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }

        #[test]
        fn tp3_split_is_exact(f in arb_field(), logn in 8u32..16) {
            let n = 1usize << logn;
            if let Ok(d) = decompose_tp3(&f, n, 0.25, 0.5, DEFAULT_C_EPS, 30) {
                prop_assert_eq!(d.head.add(&d.tail), f.clone());
                prop_assert!(orientation(&f, &d.head) && orientation(&f, &d.tail));
                prop_assert!(d.certificate.tail_scaled_distance < 0.5);
            }
        }
    }
}
