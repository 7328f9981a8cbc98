use std::ops::Range;

use super::PROBE_INFLATION;
use crate::error::{Error, Result};

/// Fewest points a log-linear fit accepts.
pub const MIN_FIT_LEN: usize = 5;

/// Least-squares fit of `log(gap_k) = intercept + slope k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub factor: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub len: usize,
}

impl LinearFit {
    pub fn contracting(&self) -> bool {
        self.factor < 1.0
    }
}

pub fn fit_linear_rate(gaps: &[f64]) -> Result<LinearFit> {
    if gaps.len() < MIN_FIT_LEN {
        return Err(Error::WindowTooShort { len: gaps.len(), min: MIN_FIT_LEN });
    }
    if let Some((index, &value)) = gaps.iter().enumerate().find(|(_, g)| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::NonPositiveGap { index, value });
    }
    let n = gaps.len() as f64;
    let ys: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let mean_k = (n - 1.0) / 2.0;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (k, y) in ys.iter().enumerate() {
        let dx = k as f64 - mean_k;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_k;
    let ss_res: f64 = ys
        .iter()
        .enumerate()
        .map(|(k, y)| (y - intercept - slope * k as f64).powi(2))
        .sum();
    // A perfectly flat sequence is explained exactly by slope zero.
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).max(0.0) } else { 1.0 };
    Ok(LinearFit { factor: slope.exp(), slope, intercept, r_squared, len: gaps.len() })
}

/// Gaps below this are numerical noise around `F_bar`.
pub fn gap_floor(f_bar: f64) -> f64 {
    1e2 * f64::EPSILON * (1.0 + f_bar.abs())
}

/// Fit window over a mean-gap sequence: starts at the first index whose gap
/// is below a tenth of the initial gap (the burn-in), ends before the first
/// gap at or below the noise floor.
pub fn select_fit_window(gaps: &[f64], f_bar: f64) -> Result<Range<usize>> {
    let floor = gap_floor(f_bar);
    let Some(&g0) = gaps.first() else {
        return Err(Error::WindowTooShort { len: 0, min: MIN_FIT_LEN });
    };
    let start = gaps
        .iter()
        .position(|&g| g < g0 / 10.0)
        .unwrap_or(gaps.len());
    let end = gaps[start..]
        .iter()
        .position(|&g| !(g > floor))
        .map_or(gaps.len(), |i| start + i);
    if end - start < MIN_FIT_LEN {
        return Err(Error::WindowTooShort { len: end - start, min: MIN_FIT_LEN });
    }
    Ok(start..end)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub mean_gaps: Vec<f64>,
    pub window: Range<usize>,
    pub fit: LinearFit,
    pub theoretical_beta: Option<f64>,
    /// The reference value came from a long run rather than a known optimum.
    pub best_found: bool,
}

impl RateReport {
    pub fn factor(&self) -> f64 {
        self.fit.factor
    }

    pub fn r_squared(&self) -> f64 {
        self.fit.r_squared
    }

    pub fn contracting(&self) -> bool {
        self.fit.contracting()
    }

    pub fn label(&self) -> &'static str {
        if self.best_found {
            "to best-found value"
        } else {
            "to known optimum"
        }
    }
}

pub fn rate_report(mean_gaps: Vec<f64>, f_bar: f64, theoretical_beta: Option<f64>, best_found: bool) -> Result<RateReport> {
    let window = select_fit_window(&mean_gaps, f_bar)?;
    let fit = fit_linear_rate(&mean_gaps[window.clone()])?;
    Ok(RateReport { mean_gaps, window, fit, theoretical_beta, best_found })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RLinearReport {
    pub distances: Vec<f64>,
    pub fit: LinearFit,
    /// `sqrt(gap factor)` inflated by the probe factor.
    pub bound: f64,
    pub pass: bool,
}

/// Geometric envelope of `|mean_k - limit|` over the first half of the gap
/// fit window, compared against the square root of the gap factor.
pub fn check_r_linear(
    mean_points: &[Vec<f64>],
    limit: &[f64],
    window: Range<usize>,
    gap_factor: f64,
) -> Result<RLinearReport> {
    let end = (window.start + window.len() / 2).min(mean_points.len());
    let floor = gap_floor(crate::norm(limit));
    let distances: Vec<f64> = mean_points[window.start.min(end)..end]
        .iter()
        .map(|x| crate::dist(x, limit))
        .take_while(|&d| d > floor)
        .collect();
    let fit = fit_linear_rate(&distances)?;
    let bound = gap_factor.sqrt() * PROBE_INFLATION;
    Ok(RLinearReport { distances, pass: fit.factor <= bound, fit, bound })
}
