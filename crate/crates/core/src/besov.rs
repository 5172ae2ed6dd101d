//! Besov-body norms, maxiset smoothness, orientation and head/tail splits.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{critical_scale, field_kolmogorov_distance, CoefficientField};

/// Ball `{f : sup_k 2^{(s+1/2)k} max_i |θ_{k,i}| ≤ P₀}` in `B^s_{∞,∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesovBody {
    smoothness: f64,
    radius: f64,
}

impl BesovBody {
    pub fn new(smoothness: f64, radius: f64) -> Result<Self> {
        if !(smoothness > 0.0 && radius > 0.0) {
            return domain("Besov smoothness and radius must be positive");
        }
        Ok(Self { smoothness, radius })
    }

    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, coeffs: &CoefficientField) -> bool {
        besov_norm(coeffs, self.smoothness) <= self.radius
    }
}

/// Span of scales `1..=m` with `‖f‖_∞ < P₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteBand {
    max_scale: u32,
    radius: f64,
}

impl FiniteBand {
    pub fn new(max_scale: u32, radius: f64) -> Result<Self> {
        if max_scale == 0 || !(radius > 0.0) {
            return domain("band needs m >= 1 and P0 > 0");
        }
        Ok(Self { max_scale, radius })
    }

    pub fn contains(&self, coeffs: &CoefficientField) -> bool {
        finite_band_membership(coeffs, self.max_scale, self.radius).unwrap_or(false)
    }
}

/// `sup_k 2^{(s+1/2)k} max_i |θ_{k,i}|`.
pub fn besov_norm(coeffs: &CoefficientField, s: f64) -> f64 {
    coeffs
        .iter()
        .map(|(idx, theta)| ((s + 0.5) * idx.scale() as f64).exp2() * theta.abs())
        .fold(0.0, f64::max)
}

/// `s = 2r/(1 − 2r)` for `0 < r < 1/2`.
pub fn maxiset_smoothness(r: f64) -> Result<f64> {
    if r == 0.5 {
        return Err(Error::Boundary(
            "r = 1/2 has no Besov maxiset; use the finite band U(m, P0) instead".into(),
        ));
    }
    if !(r > 0.0 && r < 0.5) {
        return domain(format!("r = {r} outside (0, 1/2)"));
    }
    Ok(2.0 * r / (1.0 - 2.0 * r))
}

/// `r = s/(2 + 2s)`, inverse of [`maxiset_smoothness`].
pub fn rate_for_smoothness(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return domain(format!("s = {s} must be positive and finite"));
    }
    Ok(s / (2.0 + 2.0 * s))
}

/// True iff `θ_a θ_b ≥ 0` at every index.
pub fn orientation(a: &CoefficientField, b: &CoefficientField) -> bool {
    a.iter().all(|(idx, theta)| theta * b.get(idx) >= 0.0)
}

/// Scales `≤ k_n + C` go to the head, the rest to the tail.
pub fn truncate_decompose(
    coeffs: &CoefficientField,
    n: usize,
    r: f64,
    extra_scales: u32,
) -> (CoefficientField, CoefficientField) {
    let cut = critical_scale(n, r) + extra_scales as i64;
    let head = coeffs.filter_scales(|j| (j as i64) <= cut);
    let tail = coeffs.filter_scales(|j| (j as i64) > cut);
    (head, tail)
}

/// Exact `sup |Σ θ φ|` of the reconstructed function.
pub fn sup_norm(coeffs: &CoefficientField) -> f64 {
    let pts = coeffs.breakpoints();
    pts.windows(2).map(|w| coeffs.eval_f(0.5 * (w[0] + w[1])).abs()).fold(0.0, f64::max)
}

/// Membership in `U(m, P₀)`: all scales `≤ m` and `‖f‖_∞ < P₀`.
pub fn finite_band_membership(coeffs: &CoefficientField, m: u32, p0: f64) -> Result<bool> {
    if m == 0 || !(p0 > 0.0) {
        return domain("band needs m >= 1 and P0 > 0");
    }
    Ok(coeffs.max_scale().is_none_or(|j| j <= m) && sup_norm(coeffs) < p0)
}

/// `√n · T` of the CDF built from `coeffs`.
pub fn scaled_distance(coeffs: &CoefficientField, n: usize) -> f64 {
    (n as f64).sqrt() * field_kolmogorov_distance(coeffs)
}

/// Radius `A · 2^{(s+1/2)C + 1}` bounding the Besov norm of any field with scales
/// `≤ k_n + C` and `‖f‖_∞ ≤ A n^{-r}`.
pub fn truncated_besov_radius(amplitude: f64, s: f64, extra_scales: u32) -> f64 {
    amplitude * ((s + 0.5) * extra_scales as f64 + 1.0).exp2()
}
