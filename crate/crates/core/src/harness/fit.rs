//! Least-squares rate fits on log-log data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest-`m` points dropped by [`fit_rate`].
pub const DEFAULT_SKIP: usize = 2;

/// `log error ~ intercept + slope log m` fitted on `points[window.0..window.1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Usable `(m, error)` pairs sorted by `m`.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    /// `-slope`.
    pub rate: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    pub window: (usize, usize),
    /// Points dropped for a zero or negative error or cardinality.
    pub excluded: usize,
}

/// Fits after dropping up to [`DEFAULT_SKIP`] smallest-`m` points; fewer
/// are dropped when that would leave less than three.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    fit_rate_skip(points, DEFAULT_SKIP)
}

/// Like [`fit_rate`] with a configurable number of dropped points.
pub fn fit_rate_skip(points: &[(f64, f64)], skip: usize) -> Result<RateFit> {
    let usable = points.iter().filter(|(m, e)| *m > 0.0 && *e > 0.0).count();
    fit_rate_window(points, skip.min(usable.saturating_sub(3)))
}

/// Fits after dropping exactly `skip` smallest-`m` points.
pub fn fit_rate_window(points: &[(f64, f64)], skip: usize) -> Result<RateFit> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(m, e)| *m > 0.0 && *e > 0.0 && m.is_finite() && e.is_finite())
        .collect();
    let excluded = points.len() - pts.len();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < skip + 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points after excluding {excluded} and skipping {skip}; need 3",
            pts.len().saturating_sub(skip)
        )));
    }
    let window = (skip, pts.len());
    let xs: Vec<f64> = pts[skip..].iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts[skip..].iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all cardinalities coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        points: pts,
        slope,
        rate: -slope,
        intercept,
        residual,
        window,
        excluded,
    })
}
