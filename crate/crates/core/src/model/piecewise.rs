use crate::error::{domain, Result};

/// Piecewise-linear CDF perturbation `D(x) = F(x) − x` on a knot partition of [0, 1].
///
/// `densities[k]` is the (constant) density `p = 1 + D'` on `[knots[k], knots[k+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDeviation {
    knots: Vec<f64>,
    values: Vec<f64>,
    densities: Vec<f64>,
    cdf_at_knots: Vec<f64>,
}

impl PiecewiseDeviation {
    pub fn uniform() -> Self {
        Self::new(vec![0.0, 1.0], vec![0.0, 0.0], vec![1.0]).expect("uniform is valid")
    }

    pub fn new(knots: Vec<f64>, values: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || values.len() != knots.len() || densities.len() + 1 != knots.len() {
            return domain("knots, values and densities have inconsistent lengths");
        }
        if knots[0] != 0.0 || knots[knots.len() - 1] != 1.0 || knots.windows(2).any(|w| w[1] <= w[0]) {
            return domain("knots must increase strictly from 0 to 1");
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return domain("deviation must vanish at 0 and 1");
        }
        let cdf_at_knots = knots.iter().zip(&values).map(|(x, d)| x + d).collect();
        Ok(Self { knots, values, densities, cdf_at_knots })
    }

    /// Builds from knot values alone, taking densities from the slopes.
    pub fn from_knot_values(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return domain("knots and values have inconsistent lengths");
        }
        let densities = knots
            .windows(2)
            .zip(values.windows(2))
            .map(|(x, d)| 1.0 + (d[1] - d[0]) / (x[1] - x[0]))
            .collect();
        Self::new(knots, values, densities)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    fn piece_of(&self, x: f64) -> usize {
        let k = self.knots.partition_point(|&t| t <= x);
        k.saturating_sub(1).min(self.densities.len() - 1)
    }

    /// `D(x)` by linear interpolation between knots.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.piece_of(x);
        let (x0, x1) = (self.knots[k], self.knots[k + 1]);
        let (d0, d1) = (self.values[k], self.values[k + 1]);
        if x <= x0 {
            d0
        } else if x >= x1 {
            d1
        } else {
            d0 + (d1 - d0) * (x - x0) / (x1 - x0)
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.densities[self.piece_of(x)]
    }

    /// `(argmin, min)` of the density together with the minimizing cell.
    pub fn floor(&self) -> (f64, (f64, f64)) {
        let (k, p) = self
            .densities
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one piece");
        (p, (self.knots[k], self.knots[k + 1]))
    }

    /// `sup |p − 1|`.
    pub fn sup_norm_f(&self) -> f64 {
        self.densities.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `∫_0^1 p`, summed piece by piece.
    pub fn total_mass(&self) -> f64 {
        self.knots.windows(2).zip(&self.densities).map(|(w, p)| p * (w[1] - w[0])).sum()
    }

    /// `(x*, |D(x*)|)` maximizing `|D|` over `[e1, e2]`.
    pub fn sup_abs_on(&self, e1: f64, e2: f64) -> (f64, f64) {
        let mut best = (e1, self.eval(e1).abs());
        let mut consider = |x: f64, v: f64| {
            if v.abs() > best.1 {
                best = (x, v.abs());
            }
        };
        let lo = self.knots.partition_point(|&t| t <= e1);
        for k in lo..self.knots.len() {
            if self.knots[k] >= e2 {
                break;
            }
            consider(self.knots[k], self.values[k]);
        }
        consider(e2, self.eval(e2));
        best
    }

    /// Inverse CDF: locates the piece by bisection over the knot CDF values, then
    /// inverts the linear piece in closed form.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let last = self.densities.len() - 1;
        let k = self.cdf_at_knots.partition_point(|&c| c <= u).saturating_sub(1).min(last);
        let (x0, x1) = (self.knots[k], self.knots[k + 1]);
        let x = x0 + (u - self.cdf_at_knots[k]) / self.densities[k];
        x.clamp(x0, x1)
    }

    /// Pointwise sum of two deviations on the merged partition.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        let mut knots: Vec<f64> = self.knots.iter().chain(&other.knots).copied().collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let values = knots.iter().map(|&x| self.eval(x) + other.eval(x)).collect();
        let densities = knots
            .windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                self.density(m) + other.density(m) - 1.0
            })
            .collect();
        Self::new(knots, values, densities)
    }
}
