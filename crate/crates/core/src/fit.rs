//! Least-squares growth-law fits over a window of kick indices.

use crate::error::{Error, Result};

/// Inclusive range of kick indices used by a fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitWindow {
    pub start: f64,
    pub end: f64,
}

impl FitWindow {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

/// `y = rate * t^exponent` with the exponent held fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerFit {
    pub rate: f64,
    pub exponent: f64,
    /// Root-mean-square of the relative deviations `(fit - y) / y`.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

const MIN_POINTS: usize = 4;

fn select(t: &[f64], y: &[f64], window: FitWindow) -> Result<(Vec<f64>, Vec<f64>)> {
    if t.len() != y.len() {
        return Err(Error::FitDomain(format!(
            "{} times but {} values",
            t.len(),
            y.len()
        )));
    }
    let (ts, ys): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(t, _)| window.contains(**t))
        .map(|(t, y)| (*t, *y))
        .unzip();
    if ts.len() < MIN_POINTS {
        return Err(Error::FitDomain(format!(
            "window [{}, {}] holds {} points, need at least {MIN_POINTS}",
            window.start,
            window.end,
            ts.len()
        )));
    }
    Ok((ts, ys))
}

/// Fit `y = a t^q` for fixed `q`; requires `y > 0` inside the window.
pub fn fit_power_law(t: &[f64], y: &[f64], window: FitWindow, exponent: f64) -> Result<PowerFit> {
    let (ts, ys) = select(t, y, window)?;
    if let Some(bad) = ys.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::FitDomain(format!(
            "non-positive value {bad} in window"
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        let b = t.powf(exponent);
        num += y * b;
        den += b * b;
    }
    let rate = num / den;
    let residual = (ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| ((rate * t.powf(exponent) - y) / y).powi(2))
        .sum::<f64>()
        / ts.len() as f64)
        .sqrt();
    Ok(PowerFit {
        rate,
        exponent,
        residual,
    })
}

/// Rate of `y = a t^q` with `q` fixed, without the positivity requirement.
///
/// Used for series such as `Re C3` whose sign is not guaranteed.
pub fn fixed_exponent_rate(t: &[f64], y: &[f64], window: FitWindow, exponent: f64) -> Result<f64> {
    let (ts, ys) = select(t, y, window)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        let b = t.powf(exponent);
        num += y * b;
        den += b * b;
    }
    Ok(num / den)
}

/// Ordinary least-squares line.
pub fn fit_line(t: &[f64], y: &[f64], window: FitWindow) -> Result<LineFit> {
    let (ts, ys) = select(t, y, window)?;
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mt,
    })
}

/// Free-exponent fit in log-log space; returns `(prefactor, exponent)`.
pub fn fit_free_exponent(t: &[f64], y: &[f64], window: FitWindow) -> Result<(f64, f64)> {
    let (ts, ys) = select(t, y, window)?;
    if ys.iter().any(|v| !(*v > 0.0)) || ts.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::FitDomain("log-log fit needs positive data".into()));
    }
    let lt: Vec<f64> = ts.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let line = fit_line(&lt, &ly, FitWindow::new(f64::NEG_INFINITY, f64::INFINITY))?;
    Ok((line.intercept.exp(), line.slope))
}
