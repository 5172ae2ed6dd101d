use rand::Rng;

use super::field::CoefficientField;
use super::piecewise::PiecewiseDeviation;
use crate::error::{domain, Error, Result};
use crate::rng::stream_rng;

/// Largest sample size accepted by [`AlternativeDensity::sample`].
pub const MAX_SAMPLE: usize = 100_000_000;

/// Which constructor produced a model; carried into descriptors and reports.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFamily {
    Uniform,
    Wavelet,
    SingleCoefficient { n: usize, r: f64, amplitude: f64, scale_offset: i32, position_fraction: f64 },
    InteriorBump { n: usize, a: f64, center: f64, width: f64 },
    EndpointBump { n: usize, a: f64, width: f64, mirrored: bool },
    Sum(Box<AlternativeDensity>, Box<AlternativeDensity>),
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::Uniform => "uniform",
            ModelFamily::Wavelet => "wavelet",
            ModelFamily::SingleCoefficient { .. } => "single-coefficient",
            ModelFamily::InteriorBump { .. } => "interior-bump",
            ModelFamily::EndpointBump { .. } => "endpoint-bump",
            ModelFamily::Sum(..) => "sum",
        }
    }
}

/// Split-level admissibility of a wavelet-built density.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionA {
    /// Smallest `l0` such that head and tail are densities for every active split level `l > l0`.
    pub l0: u32,
    /// Split levels at which the head or the tail fails to be a density.
    pub failing_levels: Vec<u32>,
}

/// Validated density `p = 1 + f` on [0, 1] with its CDF `F(x) = x + D(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternativeDensity {
    family: ModelFamily,
    coeffs: Option<CoefficientField>,
    deviation: PiecewiseDeviation,
    density_floor: f64,
    sup_norm_f: f64,
    condition_a: Option<ConditionA>,
}

/// Exact deviation of a coefficient field on its breakpoint partition.
pub(crate) fn field_deviation(coeffs: &CoefficientField) -> PiecewiseDeviation {
    let knots = coeffs.breakpoints();
    let mut values: Vec<f64> = knots.iter().map(|&x| coeffs.eval_deviation(x)).collect();
    let last = values.len() - 1;
    values[0] = 0.0;
    values[last] = 0.0;
    let densities = knots.windows(2).map(|w| 1.0 + coeffs.eval_f(0.5 * (w[0] + w[1]))).collect();
    PiecewiseDeviation::new(knots, values, densities).expect("breakpoints span [0, 1]")
}

/// `T(F) = sup |F(x) − x|` for the CDF of `1 + Σ θ φ`.
pub fn field_kolmogorov_distance(coeffs: &CoefficientField) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    field_deviation(coeffs).sup_abs_on(0.0, 1.0).1
}

fn field_floor(coeffs: &CoefficientField) -> f64 {
    field_deviation(coeffs).floor().0
}

fn condition_a(coeffs: &CoefficientField) -> ConditionA {
    let failing_levels: Vec<u32> = coeffs
        .scales()
        .into_iter()
        .filter(|&l| {
            let head = coeffs.filter_scales(|k| k <= l);
            let tail = coeffs.filter_scales(|k| k >= l);
            field_floor(&head) < 0.0 || field_floor(&tail) < 0.0
        })
        .collect();
    ConditionA { l0: failing_levels.last().copied().unwrap_or(0), failing_levels }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        domain(format!("x = {x} outside [0, 1]"))
    }
}

/// Validates `1 + Σ θ φ` as a density.
pub fn build_density(coeffs: CoefficientField) -> Result<AlternativeDensity> {
    let family = if coeffs.is_empty() { ModelFamily::Uniform } else { ModelFamily::Wavelet };
    AlternativeDensity::from_field(coeffs, family)
}

impl AlternativeDensity {
    pub fn uniform() -> Self {
        Self::from_field(CoefficientField::new(), ModelFamily::Uniform).expect("uniform density")
    }

    pub(crate) fn from_field(coeffs: CoefficientField, family: ModelFamily) -> Result<Self> {
        let deviation = field_deviation(&coeffs);
        let (floor, (lo, hi)) = deviation.floor();
        if floor < 0.0 {
            return Err(Error::InvalidDensity { floor, cell_lo: lo, cell_hi: hi });
        }
        let condition_a = Some(condition_a(&coeffs));
        Ok(Self {
            family,
            sup_norm_f: deviation.sup_norm_f(),
            density_floor: floor,
            deviation,
            coeffs: Some(coeffs),
            condition_a,
        })
    }

    pub(crate) fn from_deviation(deviation: PiecewiseDeviation, family: ModelFamily) -> Result<Self> {
        let (floor, (lo, hi)) = deviation.floor();
        if floor < 0.0 {
            return Err(Error::InvalidDensity { floor, cell_lo: lo, cell_hi: hi });
        }
        Ok(Self {
            family,
            coeffs: None,
            sup_norm_f: deviation.sup_norm_f(),
            density_floor: floor,
            deviation,
            condition_a: None,
        })
    }

    /// Model with CDF `F_a + F_b − x`.
    pub fn sum(a: &Self, b: &Self) -> Result<Self> {
        let family = ModelFamily::Sum(Box::new(a.clone()), Box::new(b.clone()));
        match (&a.coeffs, &b.coeffs) {
            (Some(ca), Some(cb)) => Self::from_field(ca.add(cb), family),
            _ => Self::from_deviation(a.deviation.sum(&b.deviation)?, family),
        }
    }

    pub fn family(&self) -> &ModelFamily {
        &self.family
    }

    /// Wavelet coefficients, for models built from a coefficient field.
    pub fn coefficients(&self) -> Option<&CoefficientField> {
        self.coeffs.as_ref()
    }

    pub fn deviation(&self) -> &PiecewiseDeviation {
        &self.deviation
    }

    pub fn density_floor(&self) -> f64 {
        self.density_floor
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.density_floor > 0.0
    }

    pub fn sup_norm_f(&self) -> f64 {
        self.sup_norm_f
    }

    pub fn condition_a(&self) -> Option<&ConditionA> {
        self.condition_a.as_ref()
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.deviation.density(x))
    }

    /// `F(x) = x + D(x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.cdf_unchecked(x))
    }

    pub(crate) fn cdf_unchecked(&self, x: f64) -> f64 {
        match &self.coeffs {
            Some(c) if !c.is_empty() => x + c.eval_deviation(x),
            Some(_) => x,
            None => x + self.deviation.eval(x),
        }
    }

    /// `sup_{e1 ≤ x ≤ e2} |F(x) − x|`; `(0, 1)` gives `T(F)`.
    pub fn deviation_functional(&self, e1: f64, e2: f64) -> Result<f64> {
        Ok(self.deviation_argmax(e1, e2)?.1)
    }

    /// Maximizer and value of `|F(x) − x|` over `[e1, e2]`.
    pub fn deviation_argmax(&self, e1: f64, e2: f64) -> Result<(f64, f64)> {
        if !(0.0 <= e1 && e1 < e2 && e2 <= 1.0) {
            return domain(format!("interval [{e1}, {e2}] is not a proper subinterval of [0, 1]"));
        }
        Ok(self.deviation.sup_abs_on(e1, e2))
    }

    pub fn kolmogorov_distance(&self) -> f64 {
        self.deviation.sup_abs_on(0.0, 1.0).1
    }

    /// Inverse CDF. Requires a strictly positive density.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        self.require_invertible()?;
        check_unit(u)?;
        Ok(self.deviation.inverse_cdf(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        self.deviation.inverse_cdf(u)
    }

    /// Inverse CDF by plain bisection on `F` to absolute tolerance `tol`.
    pub fn quantile_bisection(&self, u: f64, tol: f64) -> Result<f64> {
        check_unit(u)?;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.cdf_unchecked(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn require_invertible(&self) -> Result<()> {
        if self.density_floor > 0.0 {
            Ok(())
        } else {
            Err(Error::NonInvertible { floor: self.density_floor })
        }
    }

    /// Draws `n` i.i.d. values in draw order from stream 0 of `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        self.require_invertible()?;
        if n > MAX_SAMPLE {
            return Err(Error::Capacity(format!("sample size {n} exceeds {MAX_SAMPLE}")));
        }
        let mut rng = stream_rng(seed, 0);
        let values = (0..n).map(|_| self.deviation.inverse_cdf(rng.gen::<f64>())).collect();
        Ok(SampleBatch { values, seed, family: self.family.name().to_string() })
    }
}

/// Values in draw order together with the seed and family that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub family: String,
}
