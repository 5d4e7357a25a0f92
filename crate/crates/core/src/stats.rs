//! Small statistics helpers for experiment summaries.

use crate::error::{Error, Result};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::invalid("wilson interval of zero trials"));
    }
    if successes > trials {
        return Err(Error::invalid(format!("{successes} successes out of {trials} trials")));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

pub fn variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    Some(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("regression inputs differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("regression needs at least two points"));
    }
    let mx = mean(xs).unwrap_or(0.0);
    let my = mean(ys).unwrap_or(0.0);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("regression inputs have no spread"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Path-length yardstick `2 ln ln n / |ln(beta - 2)|`.
pub fn yardstick(n: f64, beta: f64) -> f64 {
    2.0 * n.ln().ln() / (beta - 2.0).ln().abs()
}

/// Endpoint-aware yardstick
/// `(ln log_{w_s}(1/phi_s) + ln log_{w_t}(1/phi_s)) / |ln(beta - 2)|`.
///
/// Defined only for `w_s, w_t > e` and `phi_s < 1`, where both iterated
/// logarithms are real; `None` otherwise.
pub fn refined_yardstick(w_s: f64, w_t: f64, phi_s: f64, beta: f64) -> Option<f64> {
    let e = std::f64::consts::E;
    if !(w_s > e && w_t > e && phi_s > 0.0 && phi_s < 1.0) {
        return None;
    }
    let inv = -phi_s.ln();
    let term = |w: f64| (inv / w.ln()).ln();
    Some((term(w_s) + term(w_t)) / (beta - 2.0).ln().abs())
}
