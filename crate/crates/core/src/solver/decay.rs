//! Exponential decay rate of a norm time series.

use serde::Serialize;

use super::SolverError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// `-slope` of the least-squares line through `(t, ln norm)`.
    pub lambda_hat: f64,
    /// Coefficient of determination; `1` for an exactly flat or exactly exponential series.
    pub fit_quality: f64,
}

/// Least-squares slope of `ln norm` against `t` over the samples with `t > 0`.
pub fn estimate_decay_rate(series: &[(f64, f64)]) -> Result<DecayFit, SolverError> {
    let points: Vec<(f64, f64)> = series.iter().filter(|(t, n)| *t > 0.0 && *n > 0.0).map(|&(t, n)| (t, n.ln())).collect();
    if series.len() < 4 || points.len() < 2 || series.iter().any(|(_, n)| !(*n > 0.0)) {
        return Err(SolverError::InsufficientData(points.len()));
    }
    let k = points.len() as f64;
    let (mt, my) = points.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t / k, b + y / k));
    let sxx: f64 = points.iter().map(|(t, _)| (t - mt).powi(2)).sum();
    let sxy: f64 = points.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let syy: f64 = points.iter().map(|(_, y)| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let residual: f64 = points.iter().map(|(t, y)| (y - my - slope * (t - mt)).powi(2)).sum();
    let fit_quality = if syy <= 1e-30 { 1.0 } else { 1.0 - residual / syy };
    Ok(DecayFit { lambda_hat: -slope, fit_quality })
}
