//! Null distribution of `T(F̂_n)` under uniformity, critical values and the DKW bound.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Largest `n` for which the exact law is evaluated.
pub const EXACT_MAX_N: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullLawMethod {
    Exact,
    Asymptotic,
}

/// Null CDF value together with the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullCdf {
    pub value: f64,
    pub method: NullLawMethod,
}

/// `K(c) = lim P(√n T ≤ c) = 1 − 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²c²}`.
///
/// Below `c = 0.82` the equivalent Jacobi-theta form
/// `√(2π)/c Σ_{k≥1} e^{−(2k−1)²π²/(8c²)}` is summed instead; the alternating
/// series loses digits to cancellation there.
pub fn kolmogorov_cdf_asymptotic(c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    if c < 0.82 {
        let w = (2.0 * PI).sqrt() / c;
        let mut sum = 0.0;
        for k in 1.. {
            let term = (-((2 * k - 1) as f64).powi(2) * PI * PI / (8.0 * c * c)).exp();
            sum += term;
            if term < 1e-16 * sum.max(1e-300) || term == 0.0 {
                break;
            }
        }
        return (w * sum).clamp(0.0, 1.0);
    }
    (1.0 - 2.0 * alternating_tail(c)).clamp(0.0, 1.0)
}

/// `Σ_{k≥1} (−1)^{k−1} e^{−2k²c²}`, stopped once a term drops below 1e−16.
fn alternating_tail(c: f64) -> f64 {
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1.. {
        let term = (-2.0 * (k * k) as f64 * c * c).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    sum
}

/// Exact `P(T(F̂_n) ≤ t)` for a uniform sample of size `1 ≤ n ≤ 2000`.
///
/// * `t ≤ 1/(2n)`: 0, since every sample has `T ≥ 1/(2n)`.
/// * `t ≥ 1/2`: the one-sided exceedances are disjoint, so the law is
///   `1 − 2 P(D⁺ ≥ t)` with the Smirnov–Birnbaum–Tingey finite sum.
/// * `2 e^{−2nt²} < 1e−17`: the DKW–Massart bound places the complement below
///   half an ulp of 1, so the value is exactly 1 in double precision.
/// * otherwise: the Durbin matrix (band no-crossing) formula, evaluated with
///   the Marsaglia–Tsang–Wang exponent-tracking matrix power.
pub fn exact_null_cdf(n: usize, t: f64) -> Result<f64> {
    if n == 0 || n > EXACT_MAX_N {
        return Err(Error::Capacity(format!("exact law supports 1 <= n <= {EXACT_MAX_N}, got {n}")));
    }
    if t.is_nan() {
        return domain("t is NaN");
    }
    let nf = n as f64;
    if t >= 1.0 {
        return Ok(1.0);
    }
    if t <= 0.5 / nf {
        return Ok(0.0);
    }
    if t >= 0.5 {
        return Ok((1.0 - 2.0 * one_sided_exceedance(n, t)).clamp(0.0, 1.0));
    }
    if dkw_bound_raw(n, t) < 1e-17 {
        return Ok(1.0);
    }
    Ok(durbin_matrix(n, t).clamp(0.0, 1.0))
}

/// `P(D⁺_n ≥ t) = t Σ_{j=0}^{⌊n(1−t)⌋} C(n,j) (1 − t − j/n)^{n−j} (t + j/n)^{j−1}`.
fn one_sided_exceedance(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let top = (nf * (1.0 - t)).floor() as usize;
    let mut ln_binom = 0.0;
    let mut sum = 0.0;
    for j in 0..=top.min(n) {
        if j > 0 {
            ln_binom += ((n - j + 1) as f64).ln() - (j as f64).ln();
        }
        let jf = j as f64;
        let base = 1.0 - t - jf / nf;
        let power = (n - j) as f64;
        let left = if power == 0.0 {
            0.0
        } else if base <= 0.0 {
            continue;
        } else {
            power * base.ln()
        };
        let right = (jf - 1.0) * (t + jf / nf).ln();
        sum += (ln_binom + left + right).exp();
    }
    t * sum
}

/// Durbin matrix formula for `P(D_n < d)` (Marsaglia, Tsang & Wang 2003).
fn durbin_matrix(n: usize, d: f64) -> f64 {
    let nd = n as f64 * d;
    let k = nd.floor() as usize + 1;
    let m = 2 * k - 1;
    let h = k as f64 - nd;

    let mut inv_fact = vec![1.0f64; m + 1];
    for g in 1..=m {
        inv_fact[g] = inv_fact[g - 1] / g as f64;
    }
    let mut hm = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                hm[i * m + j] = 1.0;
            }
        }
    }
    for i in 0..m {
        hm[i * m] -= h.powi(i as i32 + 1);
        hm[(m - 1) * m + i] -= h.powi((m - i) as i32);
    }
    if 2.0 * h - 1.0 > 0.0 {
        hm[(m - 1) * m] += (2.0 * h - 1.0).powi(m as i32);
    }
    for i in 0..m {
        for j in 0..=(i + 1).min(m - 1) {
            hm[i * m + j] *= inv_fact[i + 1 - j];
        }
    }

    let (q, mut exponent) = matrix_power(&hm, m, n);
    let mut s = q[(k - 1) * m + k - 1];
    let nf = n as f64;
    for i in 1..=n {
        s = s * i as f64 / nf;
        if s < 1e-140 {
            s *= 1e140;
            exponent -= 140;
        }
    }
    s * 10f64.powi(exponent)
}

fn matrix_mul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0f64; m * m];
    for i in 0..m {
        let row = &mut c[i * m..(i + 1) * m];
        for l in 0..m {
            let a_il = a[i * m + l];
            if a_il == 0.0 {
                continue;
            }
            let b_row = &b[l * m..(l + 1) * m];
            for (cij, blj) in row.iter_mut().zip(b_row) {
                *cij += a_il * blj;
            }
        }
    }
    c
}

/// `A^n` as `(matrix, decimal exponent)` with periodic rescaling against overflow.
fn matrix_power(a: &[f64], m: usize, n: usize) -> (Vec<f64>, i32) {
    if n == 1 {
        return (a.to_vec(), 0);
    }
    let (half, e_half) = matrix_power(a, m, n / 2);
    let mut b = matrix_mul(&half, &half, m);
    let mut e = 2 * e_half;
    if n % 2 == 1 {
        b = matrix_mul(a, &b, m);
    }
    let centre = (m / 2) * m + m / 2;
    if b[centre] > 1e140 {
        b.iter_mut().for_each(|v| *v *= 1e-140);
        e += 140;
    }
    (b, e)
}

/// `P(T ≤ t)`: exact for `n ≤ 2000`, Kolmogorov limit `K(√n t)` above.
pub fn null_cdf(n: usize, t: f64) -> Result<NullCdf> {
    if n == 0 {
        return domain("n must be positive");
    }
    if n <= EXACT_MAX_N {
        Ok(NullCdf { value: exact_null_cdf(n, t)?, method: NullLawMethod::Exact })
    } else {
        Ok(NullCdf { value: kolmogorov_cdf_asymptotic((n as f64).sqrt() * t), method: NullLawMethod::Asymptotic })
    }
}

/// Rejection threshold for `T(F̂_n)` with its achieved size `1 − P(T ≤ critical)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalValue {
    pub value: f64,
    pub alpha: f64,
    pub achieved_size: f64,
    pub method: NullLawMethod,
}

/// Smallest `c` with `K(c) ≥ p`, to 1e−13.
pub fn kolmogorov_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf_asymptotic(mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

type CriticalKey = (usize, u64);

fn critical_cache() -> &'static Mutex<HashMap<CriticalKey, CriticalValue>> {
    static CACHE: OnceLock<Mutex<HashMap<CriticalKey, CriticalValue>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Smallest `t` with `P(T ≤ t) ≥ 1 − alpha`, located by bisection to 1e−10.
pub fn critical_value(n: usize, alpha: f64) -> Result<CriticalValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha = {alpha} outside (0, 1)"));
    }
    if n == 0 {
        return domain("n must be positive");
    }
    let key = (n, alpha.to_bits());
    if let Some(cv) = critical_cache().lock().expect("cache lock").get(&key) {
        return Ok(*cv);
    }
    let target = 1.0 - alpha;
    let cv = if n > EXACT_MAX_N {
        let c = kolmogorov_quantile(target);
        CriticalValue {
            value: c / (n as f64).sqrt(),
            alpha,
            achieved_size: 1.0 - kolmogorov_cdf_asymptotic(c),
            method: NullLawMethod::Asymptotic,
        }
    } else {
        let cdf = |t: f64| exact_null_cdf(n, t).expect("n checked");
        // Bracket around the asymptotic guess to keep the matrix small.
        let guess = kolmogorov_quantile(target) / (n as f64).sqrt();
        let floor = 0.5 / n as f64;
        let mut lo = (0.8 * guess).max(floor).min(1.0);
        let mut hi = (1.1 * guess).max(floor).min(1.0);
        while lo > floor && cdf(lo) >= target {
            lo = (0.5 * lo).max(floor);
        }
        while hi < 1.0 && cdf(hi) < target {
            hi = (hi * 1.5).min(1.0);
        }
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        CriticalValue { value: hi, alpha, achieved_size: 1.0 - cdf(hi), method: NullLawMethod::Exact }
    };
    critical_cache().lock().expect("cache lock").insert(key, cv);
    Ok(cv)
}

/// `min(1, 2 e^{−2nε²})`.
pub fn dkw_bound(n: usize, eps: f64) -> f64 {
    dkw_bound_raw(n, eps).min(1.0)
}

/// `2 e^{−2nε²}` without the cap.
pub fn dkw_bound_raw(n: usize, eps: f64) -> f64 {
    2.0 * (-2.0 * n as f64 * eps * eps).exp()
}
