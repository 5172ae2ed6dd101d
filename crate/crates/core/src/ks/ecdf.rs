use serde::Serialize;

use crate::error::{domain, Result};

/// Sorted sample on [0, 1] with order-statistic access.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return domain(format!("sample value {bad} outside [0, 1]"));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    /// Wraps values already known to be sorted and inside [0, 1].
    pub fn from_sorted(sorted: Vec<f64>) -> Result<Self> {
        if sorted.windows(2).any(|w| w[1] < w[0]) {
            return domain("values are not sorted");
        }
        Self::new(sorted)
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// `F̂_n(x) = #{X_k ≤ x} / n`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// `sup_{e1 ≤ x ≤ e2} |F̂_n(x) − x|`.
    pub fn statistic(&self, e1: f64, e2: f64) -> Result<f64> {
        empirical_statistic(&self.sorted, e1, e2)
    }
}

/// Exact `sup_{e1 ≤ x ≤ e2} |F̂_n(x) − x|` of a sorted sample.
///
/// Between jumps `F̂_n(x) − x` decreases linearly, so the supremum is attained at
/// `e1`, `e2`, or one of the one-sided limits at a jump inside `(e1, e2]`.
pub fn empirical_statistic(sorted: &[f64], e1: f64, e2: f64) -> Result<f64> {
    if !(0.0 <= e1 && e1 < e2 && e2 <= 1.0) {
        return domain(format!("interval [{e1}, {e2}] is not a proper subinterval of [0, 1]"));
    }
    if sorted.is_empty() {
        return domain("empty sample");
    }
    Ok(statistic_unchecked(sorted, e1, e2))
}

pub(crate) fn statistic_unchecked(sorted: &[f64], e1: f64, e2: f64) -> f64 {
    if e1 == 0.0 && e2 == 1.0 {
        full_statistic(sorted)
    } else {
        restricted_statistic(sorted, e1, e2)
    }
}

/// Every jump is a candidate; `F̂(0) − 0` is covered by the first one.
fn full_statistic(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0f64, |acc, (k, &x)| {
        let below = x - k as f64 / n;
        let above = (k + 1) as f64 / n - x;
        acc.max(below).max(above)
    })
}

fn restricted_statistic(sorted: &[f64], e1: f64, e2: f64) -> f64 {
    let n = sorted.len() as f64;
    let start = sorted.partition_point(|&v| v <= e1);
    let at_e1 = start as f64 / n;
    let mut best = (at_e1 - e1).abs();
    let mut k = start;
    while k < sorted.len() && sorted[k] <= e2 {
        let x = sorted[k];
        best = best.max((x - k as f64 / n).abs()).max(((k + 1) as f64 / n - x).abs());
        k += 1;
    }
    best.max((k as f64 / n - e2).abs())
}

/// Two-sample Kolmogorov distance `sup_x |F̂_a(x) − F̂_b(x)|` of two sorted samples.
pub fn two_sample_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return domain("empty sample");
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut k) = (0, 0);
    let mut best = 0.0f64;
    while i < a.len() && k < b.len() {
        let x = a[i].min(b[k]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while k < b.len() && b[k] <= x {
            k += 1;
        }
        best = best.max((i as f64 / na - k as f64 / nb).abs());
    }
    Ok(best)
}

/// Outcome of one Kolmogorov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestDecision {
    pub statistic: f64,
    pub critical: f64,
    pub alpha: f64,
    pub reject: bool,
}

impl TestDecision {
    pub fn new(statistic: f64, critical: f64, alpha: f64) -> Self {
        Self { statistic, critical, alpha, reject: statistic > critical }
    }
}
