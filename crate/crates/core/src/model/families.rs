//! Named alternative families and the coarse-scale admissibility check.

use super::density::{field_kolmogorov_distance, AlternativeDensity, ModelFamily};
use super::field::CoefficientField;
use super::piecewise::PiecewiseDeviation;
use crate::error::{domain, Error, Result};
use crate::wavelet::{WaveletIndex, MAX_SCALE};

/// `k_n = ⌊(1/2 − r) log₂ n⌋`, the scale at which detectable coefficients live.
pub fn critical_scale(n: usize, r: f64) -> i64 {
    // The nudge keeps exact products such as 0.25 * 8 from flooring down.
    ((0.5 - r) * (n as f64).log2() + 1e-9).floor() as i64
}

fn bump_height(n: usize, a: f64) -> Result<f64> {
    if n == 0 {
        return domain("n must be positive");
    }
    if !a.is_finite() {
        return domain("amplitude must be finite");
    }
    Ok(a / (n as f64).sqrt())
}

fn triangle_knots(lo: f64, peak: f64, hi: f64, height: f64) -> (Vec<f64>, Vec<f64>) {
    let mut knots = vec![0.0, lo, peak, hi, 1.0];
    knots.dedup();
    let values = knots.iter().map(|&x| if x == peak { height } else { 0.0 }).collect();
    (knots, values)
}

fn check_slope(height: f64, width: f64, lo: f64, hi: f64) -> Result<()> {
    let slope = 2.0 * height.abs() / width;
    if slope > 1.0 {
        return Err(Error::InvalidDensity { floor: 1.0 - slope, cell_lo: lo, cell_hi: hi });
    }
    Ok(())
}

/// Triangular CDF bump of height `a/√n` on `[center − width/2, center + width/2]`.
pub fn gen_interior_bump(n: usize, a: f64, center: f64, width: f64) -> Result<AlternativeDensity> {
    let height = bump_height(n, a)?;
    let (lo, hi) = (center - 0.5 * width, center + 0.5 * width);
    if !(width > 0.0 && lo >= 0.0 && hi <= 1.0) {
        return domain(format!("bump support [{lo}, {hi}] not inside [0, 1]"));
    }
    let family = ModelFamily::InteriorBump { n, a, center, width };
    if height == 0.0 {
        return AlternativeDensity::from_deviation(PiecewiseDeviation::uniform(), family);
    }
    check_slope(height, width, lo, hi)?;
    let (knots, values) = triangle_knots(lo, center, hi, height);
    AlternativeDensity::from_deviation(PiecewiseDeviation::from_knot_values(knots, values)?, family)
}

/// Triangular CDF bump of height `a/√n` on `[0, width]`, or on `[1 − width, 1]` when mirrored.
pub fn gen_endpoint_bump(n: usize, a: f64, width: f64, mirrored: bool) -> Result<AlternativeDensity> {
    let height = bump_height(n, a)?;
    if !(width > 0.0 && width <= 1.0) {
        return domain(format!("width {width} outside (0, 1]"));
    }
    let family = ModelFamily::EndpointBump { n, a, width, mirrored };
    if height == 0.0 {
        return AlternativeDensity::from_deviation(PiecewiseDeviation::uniform(), family);
    }
    let (lo, hi) = if mirrored { (1.0 - width, 1.0) } else { (0.0, width) };
    check_slope(height, width, lo, hi)?;
    let mid = 0.5 * (lo + hi);
    let (knots, values) = triangle_knots(lo, mid, hi, height);
    AlternativeDensity::from_deviation(PiecewiseDeviation::from_knot_values(knots, values)?, family)
}

/// Coefficient field of the single-coefficient family without density validation.
///
/// `j = k_n + scale_offset`, `i = clamp(round(position_fraction · 2^j), 1, 2^j)` with
/// ties rounded up, and `θ = amplitude · n^{-r} · 2^{-j/2}`, so `‖f‖_∞ = |amplitude| · n^{-r}`.
pub fn single_coefficient_field(
    n: usize,
    r: f64,
    amplitude: f64,
    scale_offset: i32,
    position_fraction: f64,
) -> Result<CoefficientField> {
    if n < 2 {
        return domain("n must be at least 2");
    }
    if !(r > 0.0 && r <= 0.5) {
        return domain(format!("r = {r} outside (0, 1/2]"));
    }
    if !(0.0..=1.0).contains(&position_fraction) {
        return domain(format!("position fraction {position_fraction} outside [0, 1]"));
    }
    let j = critical_scale(n, r) + scale_offset as i64;
    if j < 1 || j > MAX_SCALE as i64 {
        return domain(format!("scale {j} outside 1..={MAX_SCALE}"));
    }
    let j = j as u32;
    let count = 1u64 << j;
    let i = ((position_fraction * count as f64 + 0.5).floor() as u64).clamp(1, count);
    let theta = amplitude * (n as f64).powf(-r) * (-0.5 * j as f64).exp2();
    let mut coeffs = CoefficientField::new();
    coeffs.insert(WaveletIndex::new(j, i)?, theta)?;
    Ok(coeffs)
}

/// Single-coefficient alternative; requires `‖f‖_∞ = |amplitude| · n^{-r} < 1`.
pub fn gen_single_coefficient(
    n: usize,
    r: f64,
    amplitude: f64,
    scale_offset: i32,
    position_fraction: f64,
) -> Result<AlternativeDensity> {
    let coeffs = single_coefficient_field(n, r, amplitude, scale_offset, position_fraction)?;
    let sup = amplitude.abs() * (n as f64).powf(-r);
    if sup >= 1.0 {
        let (lo, hi) = coeffs.iter().next().map(|(idx, _)| idx.cell()).unwrap_or((0.0, 1.0));
        return Err(Error::InvalidDensity { floor: 1.0 - sup, cell_lo: lo, cell_hi: hi });
    }
    AlternativeDensity::from_field(
        coeffs,
        ModelFamily::SingleCoefficient { n, r, amplitude, scale_offset, position_fraction },
    )
}

/// Outcome of the coarse-scale check `√n·T(F_{n,l}) < ε` for all `l < k_n − c_ε`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConditionG {
    pub holds: bool,
    pub worst_level: Option<u32>,
    pub worst_value: f64,
    pub levels_checked: Vec<u32>,
}

/// Default `c_ε` for [`check_condition_g`].
pub const DEFAULT_C_EPS: i64 = 3;

pub fn check_condition_g(coeffs: &CoefficientField, n: usize, r: f64, eps: f64, c_eps: i64) -> Result<ConditionG> {
    if !(eps > 0.0) {
        return domain("eps must be positive");
    }
    if n == 0 {
        return domain("n must be positive");
    }
    let top = critical_scale(n, r) - c_eps;
    let sqrt_n = (n as f64).sqrt();
    let mut verdict = ConditionG { holds: true, worst_level: None, worst_value: 0.0, levels_checked: Vec::new() };
    for l in 1..top.max(1) {
        let l = l as u32;
        let value = sqrt_n * field_kolmogorov_distance(&coeffs.filter_scales(|k| k <= l));
        verdict.levels_checked.push(l);
        if verdict.worst_level.is_none() || value > verdict.worst_value {
            verdict.worst_value = value;
            verdict.worst_level = Some(l);
        }
    }
    verdict.holds = verdict.worst_value < eps;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn interior_bump_examples() {
        let m = gen_interior_bump(2500, 3.0, 0.5, 0.2).unwrap();
        let (x, t) = m.deviation_argmax(0.0, 1.0).unwrap();
        assert_eq!(x, 0.5);
        assert_abs_diff_eq!(t, 0.06, epsilon = 1e-15);
        assert_abs_diff_eq!(m.sup_norm_f(), 0.6, epsilon = 1e-12);
        assert_eq!(m.deviation_functional(0.0, 0.39).unwrap(), 0.0);
        assert!(matches!(gen_interior_bump(100, 3.0, 0.5, 0.2), Err(Error::InvalidDensity { .. })));
        let flat = gen_interior_bump(100, 0.0, 0.5, 0.2).unwrap();
        assert_eq!(flat.kolmogorov_distance(), 0.0);
        assert_eq!(flat.density_floor(), 1.0);
        assert!(gen_interior_bump(100, 1.0, 0.05, 0.2).is_err());
    }

    #[test]
    fn endpoint_bump_examples() {
        let m = gen_endpoint_bump(10_000, 1.0, 0.1, false).unwrap();
        let (x, t) = m.deviation_argmax(0.0, 1.0).unwrap();
        assert_eq!(x, 0.05);
        assert_abs_diff_eq!(t, 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(m.sup_norm_f(), 0.2, epsilon = 1e-12);
        let r = gen_endpoint_bump(10_000, 1.0, 0.1, true).unwrap();
        assert_abs_diff_eq!(r.kolmogorov_distance(), 0.01, epsilon = 1e-15);
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            assert_abs_diff_eq!(
                r.cdf(1.0 - x).unwrap() - (1.0 - x),
                m.cdf(x).unwrap() - x,
                epsilon = 1e-15
            );
        }
        assert_eq!(gen_endpoint_bump(50, 0.0, 0.1, false).unwrap().kolmogorov_distance(), 0.0);
    }

    #[test]
    fn critical_scale_values() {
        assert_eq!(critical_scale(256, 0.25), 2);
        assert_eq!(critical_scale(1 << 14, 0.25), 3);
        assert_eq!(critical_scale(4096, 1.0 / 3.0), 2);
        assert_eq!(critical_scale(10_000, 0.25), 3);
    }

    #[test]
    fn single_coefficient_examples() {
        let m = gen_single_coefficient(256, 0.25, 1.0, 0, 0.5).unwrap();
        let (idx, theta) = m.coefficients().unwrap().iter().next().unwrap();
        assert_eq!((idx.scale(), idx.position()), (2, 2));
        assert_eq!(theta, 0.125);
        assert_eq!(theta, 256f64.powf(-0.375));
        assert_abs_diff_eq!(m.sup_norm_f(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m.kolmogorov_distance(), 0.25 * 0.25 / 2.0, epsilon = 1e-15);

        let deep = gen_single_coefficient(256, 0.25, 1.0, 10, 0.5).unwrap();
        let (idx, theta) = deep.coefficients().unwrap().iter().next().unwrap();
        assert_eq!(idx.scale(), 12);
        assert_abs_diff_eq!(theta, 0.25 * 2f64.powi(-6), epsilon = 1e-18);
        assert_abs_diff_eq!(theta, 0.00391, epsilon = 1e-5);

        let flat = gen_single_coefficient(256, 0.25, 0.0, 0, 0.5).unwrap();
        assert!(flat.coefficients().unwrap().is_empty());
        assert_eq!(flat.kolmogorov_distance(), 0.0);

        assert!(matches!(gen_single_coefficient(256, 0.25, 4.0, 0, 0.5), Err(Error::InvalidDensity { .. })));
        assert!(matches!(gen_single_coefficient(256, 0.25, 1.0, -2, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn position_rounding_is_half_up_and_clamped() {
        let at = |pf: f64| {
            let m = gen_single_coefficient(256, 0.25, 1.0, 1, pf).unwrap();
            let idx = m.coefficients().unwrap().iter().next().unwrap().0;
            idx.position()
        };
        // Scale 3: 8 cells.
        assert_eq!(at(0.0), 1);
        assert_eq!(at(1.0), 8);
        assert_eq!(at(2.5 / 8.0), 3);
        assert_eq!(at(2.49 / 8.0), 2);
    }

    #[test]
    fn condition_g_examples() {
        let single = gen_single_coefficient(256, 0.25, 1.0, 0, 0.5).unwrap();
        let g = check_condition_g(single.coefficients().unwrap(), 256, 0.25, 0.1, 0).unwrap();
        assert!(g.holds);
        assert_eq!(g.worst_value, 0.0);
        assert_eq!(g.levels_checked, vec![1]);

        let coarse = CoefficientField::from_triples(&[(1, 1, 0.3)]).unwrap();
        let g = check_condition_g(&coarse, 10_000, 0.1, 0.1, DEFAULT_C_EPS).unwrap();
        assert!(!g.holds);
        assert_eq!(g.worst_level, Some(1));
        assert_abs_diff_eq!(g.worst_value, 100.0 * 0.3 * 2f64.sqrt() / 4.0, epsilon = 1e-12);

        assert!(check_condition_g(&CoefficientField::new(), 10_000, 0.1, 0.1, 3).unwrap().holds);
        assert!(check_condition_g(&coarse, 10_000, 0.1, 0.0, 3).is_err());
    }
}
