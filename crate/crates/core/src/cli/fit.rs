//! Log-log decay fits of κ against M.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::sweep::ResultRow;
use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares of `log κ` on `log M`. Needs at least four distinct `M`.
pub fn fit_decay(points: &[(usize, f64)]) -> Result<DecayFit, CliError> {
    let mut ms: Vec<usize> = points.iter().map(|p| p.0).collect();
    ms.sort_unstable();
    ms.dedup();
    if ms.len() < 4 || ms.len() != points.len() {
        return Err(CliError::Validation(format!(
            "decay fit needs at least 4 points with distinct M, got {} ({} distinct)",
            points.len(),
            ms.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.1.is_nan() || p.1 <= 0.0 || p.0 == 0) {
        return Err(CliError::Validation(format!("cannot take logs of M={} kappa={}", p.0, p.1)));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(m, k)| ((m as f64).ln(), k.ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(DecayFit { slope, intercept, r2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    pub scenario: String,
    pub topology: String,
    pub method: String,
    pub p_sh: f64,
    pub n_points: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Largest `M κ / ln M` on the curve.
    pub max_m_kappa_over_log_m: f64,
}

/// Scenario, topology, method and the bits of `p_sh`.
type CurveKey = (String, String, String, u64);

/// Fits every (scenario, topology, method, p_sh) curve with enough points.
/// Rows with errors or without κ are skipped.
pub fn fit_curves(rows: &[ResultRow]) -> Vec<CurveFit> {
    let mut curves: BTreeMap<CurveKey, Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows {
        if let (None, Some(k)) = (&r.error, r.kappa) {
            curves
                .entry((r.scenario.clone(), r.topology.clone(), r.method.clone(), r.p_sh.to_bits()))
                .or_default()
                .push((r.m, k));
        }
    }
    curves
        .into_iter()
        .filter_map(|((scenario, topology, method, p), pts)| {
            let fit = fit_decay(&pts).ok()?;
            let bound = pts
                .iter()
                .map(|&(m, k)| m as f64 * k / (m as f64).ln())
                .fold(0.0, f64::max);
            Some(CurveFit {
                scenario,
                topology,
                method,
                p_sh: f64::from_bits(p),
                n_points: pts.len(),
                slope: fit.slope,
                intercept: fit.intercept,
                r2: fit.r2,
                max_m_kappa_over_log_m: bound,
            })
        })
        .collect()
}
