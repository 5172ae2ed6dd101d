//! Orthonormal Haar system on [0, 1] and its antiderivatives.
//!
//! `φ_{j,i}(x) = 2^{j/2} h(2^j x − (i − 1))` for scales `j ≥ 1` and positions
//! `1 ≤ i ≤ 2^j`, where `h` is `+1` on `[0, 1/2)`, `−1` on `[1/2, 1)` and zero
//! elsewhere. `ψ_{j,i}(x) = ∫_0^x φ_{j,i}` is a tent of height `2^{-j/2}/2`
//! over the cell `[(i−1)2^{-j}, i 2^{-j}]`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Largest supported scale. Keeps `2^j` exact in both `u64` and `f64`.
pub const MAX_SCALE: u32 = 30;

/// Scale/position pair `(j, i)` with `1 ≤ i ≤ 2^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveletIndex {
    scale: u32,
    position: u64,
}

impl WaveletIndex {
    pub fn new(scale: u32, position: u64) -> Result<Self> {
        if scale == 0 || scale > MAX_SCALE {
            return domain(format!("scale {scale} outside 1..={MAX_SCALE}"));
        }
        if position == 0 || position > 1u64 << scale {
            return domain(format!("position {position} outside 1..={} at scale {scale}", 1u64 << scale));
        }
        Ok(Self { scale, position })
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    /// Support cell `[(i−1)2^{-j}, i 2^{-j}]`.
    pub fn cell(&self) -> (f64, f64) {
        let w = cell_width(self.scale);
        ((self.position - 1) as f64 * w, self.position as f64 * w)
    }

    pub fn midpoint(&self) -> f64 {
        let (lo, hi) = self.cell();
        0.5 * (lo + hi)
    }

    /// Right end of the cell, `i 2^{-j}`, the location used by position rules.
    pub fn location(&self) -> f64 {
        self.position as f64 * cell_width(self.scale)
    }

    /// Index of the scale-`j` cell containing `x` (right-continuous, last cell closed).
    pub fn containing(scale: u32, x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return domain(format!("x = {x} outside [0, 1]"));
        }
        Self::new(scale, position_of(scale, x))
    }
}

pub(crate) fn cell_width(scale: u32) -> f64 {
    (-(scale as f64)).exp2()
}

pub(crate) fn position_of(scale: u32, x: f64) -> u64 {
    let count = 1u64 << scale;
    ((x * count as f64).floor() as u64 + 1).min(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveletKind {
    Haar,
}

/// Mother wavelet description. Only the Haar wavelet is provided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotherWavelet {
    pub kind: WaveletKind,
    pub support: (f64, f64),
}

impl MotherWavelet {
    pub const HAAR: MotherWavelet = MotherWavelet { kind: WaveletKind::Haar, support: (0.0, 1.0) };

    pub fn eval(&self, t: f64) -> f64 {
        haar(t)
    }

    /// `∫ h(t) dt` over the support.
    pub fn integral(&self) -> f64 {
        0.0
    }

    /// `∫ h(t)^2 dt` over the support.
    pub fn l2_norm_sq(&self) -> f64 {
        0.5 + 0.5
    }

    /// First moment about the support centre, `∫ t h(t + c) dt` with `c = (a1 + a2)/2`.
    ///
    /// For Haar the integrand is even, so this is `−2·∫_0^{1/2} t dt = −1/4`,
    /// not zero: the vanishing-moment requirement holds only for symmetric
    /// mother wavelets.
    pub fn centered_first_moment(&self) -> f64 {
        let (a1, a2) = self.support;
        let c = 0.5 * (a1 + a2);
        // h(t + c) is +1 on [a1 - c, 0) and -1 on [0, a2 - c).
        let left = -(a1 - c) * (a1 - c) / 2.0;
        let right = (a2 - c) * (a2 - c) / 2.0;
        left - right
    }
}

#[inline]
fn haar(t: f64) -> f64 {
    if (0.0..0.5).contains(&t) {
        1.0
    } else if (0.5..1.0).contains(&t) {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn local_coordinate(idx: WaveletIndex, x: f64) -> f64 {
    x * (idx.scale as f64).exp2() - (idx.position - 1) as f64
}

#[inline]
pub(crate) fn phi_unchecked(idx: WaveletIndex, x: f64) -> f64 {
    (0.5 * idx.scale as f64).exp2() * haar(local_coordinate(idx, x))
}

#[inline]
pub(crate) fn psi_unchecked(idx: WaveletIndex, x: f64) -> f64 {
    let t = local_coordinate(idx, x);
    let amp = (-0.5 * idx.scale as f64).exp2();
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else if t <= 0.5 {
        amp * t
    } else {
        amp * (1.0 - t)
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        domain(format!("x = {x} outside [0, 1]"))
    }
}

/// `φ_{j,i}(x)`.
pub fn eval_phi(idx: WaveletIndex, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(phi_unchecked(idx, x))
}

/// `ψ_{j,i}(x) = ∫_0^x φ_{j,i}(t) dt`.
pub fn eval_psi(idx: WaveletIndex, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(psi_unchecked(idx, x))
}

/// `‖ψ_{j,i}‖_∞ = 2^{-j/2}/2`.
pub fn psi_sup_norm(scale: u32) -> f64 {
    0.5 * (-0.5 * scale as f64).exp2()
}

/// `‖φ_{j,i}‖_∞ = 2^{j/2}`.
pub fn phi_sup_norm(scale: u32) -> f64 {
    (0.5 * scale as f64).exp2()
}

/// Exact `⟨φ_a, φ_b⟩`.
///
/// The coarser function is constant on each half of the finer cell, so the
/// product is integrated exactly from two midpoint evaluations.
pub fn inner_product(a: WaveletIndex, b: WaveletIndex) -> f64 {
    let (lo_a, hi_a) = a.cell();
    let (lo_b, hi_b) = b.cell();
    if hi_a <= lo_b || hi_b <= lo_a {
        return 0.0;
    }
    let fine = if a.scale >= b.scale { a } else { b };
    let (lo, hi) = fine.cell();
    let half = 0.5 * (hi - lo);
    [lo + 0.5 * half, lo + 1.5 * half]
        .iter()
        .map(|&m| phi_unchecked(a, m) * phi_unchecked(b, m) * half)
        .sum()
}

/// Maximum of `|⟨φ_a, φ_b⟩ − δ_{ab}|` over all index pairs with scales up to `max_scale`.
///
/// Pairs with disjoint supports are exactly orthogonal and skipped; every
/// other pair is an index together with one of its ancestors (or itself).
pub fn gram_check(max_scale: u32) -> Result<f64> {
    if !(1..=12).contains(&max_scale) {
        return domain(format!("max_scale {max_scale} outside 1..=12"));
    }
    let mut worst = 0.0f64;
    for j in 1..=max_scale {
        for i in 1..=(1u64 << j) {
            let b = WaveletIndex { scale: j, position: i };
            for ja in 1..=j {
                let a = WaveletIndex { scale: ja, position: ((i - 1) >> (j - ja)) + 1 };
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((inner_product(a, b) - target).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn idx(j: u32, i: u64) -> WaveletIndex {
        WaveletIndex::new(j, i).unwrap()
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(WaveletIndex::new(0, 1).is_err());
        assert!(WaveletIndex::new(2, 0).is_err());
        assert!(WaveletIndex::new(2, 5).is_err());
        assert!(WaveletIndex::new(2, 4).is_ok());
    }

    #[test]
    fn phi_examples() {
        assert_abs_diff_eq!(eval_phi(idx(1, 1), 0.1).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(eval_phi(idx(1, 2), 0.8).unwrap(), -(2f64.sqrt()), epsilon = 1e-15);
        assert_eq!(eval_phi(idx(3, 2), 0.9).unwrap(), 0.0);
        assert!(eval_phi(idx(1, 1), 1.5).is_err());
        assert!(eval_phi(idx(1, 1), -0.1).is_err());
    }

    #[test]
    fn psi_examples() {
        assert_abs_diff_eq!(eval_psi(idx(1, 1), 0.25).unwrap(), 2f64.sqrt() / 4.0, epsilon = 1e-15);
        assert_eq!(eval_psi(idx(1, 1), 0.5).unwrap(), 0.0);
        assert_eq!(eval_psi(idx(5, 1), 0.0).unwrap(), 0.0);
        assert!(eval_psi(idx(1, 1), 1.01).is_err());
    }

    #[test]
    fn psi_vanishes_at_one_and_peaks_at_midpoint() {
        for j in 1..=10u32 {
            for i in [1, (1u64 << j) / 2 + 1, 1u64 << j] {
                let k = idx(j, i);
                assert_eq!(eval_psi(k, 1.0).unwrap(), 0.0);
                assert_eq!(eval_psi(k, k.midpoint()).unwrap(), psi_sup_norm(j));
                assert_eq!(eval_phi(k, k.cell().0).unwrap(), phi_sup_norm(j));
            }
        }
    }

    #[test]
    fn haar_moments() {
        let h = MotherWavelet::HAAR;
        assert_eq!(h.integral(), 0.0);
        assert_eq!(h.l2_norm_sq(), 1.0);
        assert_eq!(h.centered_first_moment(), -0.25);
        assert_eq!(h.eval(0.25), 1.0);
        assert_eq!(h.eval(0.75), -1.0);
    }

    #[test]
    fn gram_examples() {
        assert!(gram_check(1).unwrap() <= 1e-12);
        assert!(gram_check(3).unwrap() <= 1e-12);
        assert!(gram_check(8).unwrap() <= 1e-10);
        assert!(gram_check(0).is_err());
        assert!(gram_check(13).is_err());
    }

    #[test]
    fn inner_product_of_disjoint_and_nested() {
        assert_eq!(inner_product(idx(2, 1), idx(2, 3)), 0.0);
        assert_eq!(inner_product(idx(1, 1), idx(3, 2)), 0.0);
        assert_abs_diff_eq!(inner_product(idx(4, 7), idx(4, 7)), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn containing_cell() {
        assert_eq!(WaveletIndex::containing(2, 0.3).unwrap(), idx(2, 2));
        assert_eq!(WaveletIndex::containing(2, 1.0).unwrap(), idx(2, 4));
        assert_eq!(WaveletIndex::containing(2, 0.0).unwrap(), idx(2, 1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sup_norms_hold_on_random_points(j in 1u32..=10, frac in 0.0f64..1.0, x in 0.0f64..=1.0) {
                let i = ((frac * (1u64 << j) as f64) as u64 + 1).min(1u64 << j);
                let k = idx(j, i);
                prop_assert!(eval_psi(k, x).unwrap().abs() <= psi_sup_norm(j));
                let p = eval_phi(k, x).unwrap().abs();
                prop_assert!(p == 0.0 || p == phi_sup_norm(j));
            }

            #[test]
            fn psi_is_lipschitz(j in 1u32..=10, i_frac in 0.0f64..1.0, x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
                let i = ((i_frac * (1u64 << j) as f64) as u64 + 1).min(1u64 << j);
                let k = idx(j, i);
                let lhs = (eval_psi(k, x).unwrap() - eval_psi(k, y).unwrap()).abs();
                prop_assert!(lhs <= phi_sup_norm(j) * (x - y).abs() + 1e-15);
            }
        }
    }
}
