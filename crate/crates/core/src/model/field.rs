use std::collections::BTreeMap;

use crate::error::{domain, Result};
use crate::wavelet::{cell_width, phi_unchecked, position_of, psi_unchecked, WaveletIndex};

/// Finitely supported Haar coefficient field `θ_{j,i}`.
///
/// Only nonzero coefficients are stored; inserting zero removes the entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientField {
    entries: BTreeMap<WaveletIndex, f64>,
}

impl CoefficientField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (WaveletIndex, f64)>,
    {
        let mut field = Self::new();
        for (idx, theta) in entries {
            field.insert(idx, theta)?;
        }
        Ok(field)
    }

    /// Convenience constructor from raw `(j, i, θ)` triples.
    pub fn from_triples(triples: &[(u32, u64, f64)]) -> Result<Self> {
        let mut field = Self::new();
        for &(j, i, theta) in triples {
            field.insert(WaveletIndex::new(j, i)?, theta)?;
        }
        Ok(field)
    }

    pub fn insert(&mut self, idx: WaveletIndex, theta: f64) -> Result<()> {
        if !theta.is_finite() {
            return domain(format!("coefficient at {idx:?} is not finite"));
        }
        if theta == 0.0 {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, theta);
        }
        Ok(())
    }

    pub fn get(&self, idx: WaveletIndex) -> f64 {
        self.entries.get(&idx).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (WaveletIndex, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// Distinct active scales in increasing order.
    pub fn scales(&self) -> Vec<u32> {
        let mut scales: Vec<u32> = self.entries.keys().map(|k| k.scale()).collect();
        scales.dedup();
        scales
    }

    pub fn max_scale(&self) -> Option<u32> {
        self.entries.keys().map(|k| k.scale()).max()
    }

    /// Entries whose scale satisfies `keep`.
    pub fn filter_scales(&self, keep: impl Fn(u32) -> bool) -> Self {
        Self {
            entries: self.entries.iter().filter(|(k, _)| keep(k.scale())).map(|(k, v)| (*k, *v)).collect(),
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (*k, v * lambda))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        }
    }

    /// Coordinate-wise sum; coefficients cancelling to zero are dropped.
    pub fn add(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            let s = entries.get(k).copied().unwrap_or(0.0) + v;
            if s == 0.0 {
                entries.remove(k);
            } else {
                entries.insert(*k, s);
            }
        }
        Self { entries }
    }

    fn cell_values(&self, x: f64, scales: &[u32], mut term: impl FnMut(WaveletIndex, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for &j in scales {
            // Cells are closed on the right for ψ; both neighbours vanish at a shared endpoint.
            let i = position_of(j, x);
            if let Ok(idx) = WaveletIndex::new(j, i) {
                if let Some(theta) = self.entries.get(&idx) {
                    acc += term(idx, *theta);
                }
            }
        }
        acc
    }

    /// `f(x) = Σ θ_{j,i} φ_{j,i}(x)`.
    pub fn eval_f(&self, x: f64) -> f64 {
        let scales = self.scales();
        self.cell_values(x, &scales, |idx, theta| theta * phi_unchecked(idx, x))
    }

    /// `Σ θ_{j,i} ψ_{j,i}(x) = F(x) − x`.
    pub fn eval_deviation(&self, x: f64) -> f64 {
        let scales = self.scales();
        self.cell_values(x, &scales, |idx, theta| theta * psi_unchecked(idx, x))
    }

    /// Breakpoints of the piecewise-constant `f`: every cell's ends and midpoint, plus 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::with_capacity(3 * self.entries.len() + 2);
        pts.push(0.0);
        pts.push(1.0);
        for idx in self.entries.keys() {
            let (lo, hi) = idx.cell();
            pts.extend([lo, idx.midpoint(), hi]);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `sup_x Σ_{cells ∋ x} |θ_{j,i}| 2^{j/2}`, an upper bound on `‖f‖_∞`.
    pub fn stacked_sup_bound(&self) -> f64 {
        let pts = self.breakpoints();
        let scales = self.scales();
        pts.windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                self.cell_values(m, &scales, |idx, theta| theta.abs() / cell_width(idx.scale()).sqrt())
            })
            .fold(0.0, f64::max)
    }
}
