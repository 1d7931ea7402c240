//! Sweeps over geometry, sharing probability and method.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Method, SweepConfig};
use crate::closedform::{k_pair, ClosedFormError, KPair};
use crate::fpmetrics::estimate_kappa;
use crate::geometry::ArrayGeometry;

/// One output line. Optional fields are empty where they do not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub topology: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "Mx")]
    pub mx: Option<usize>,
    #[serde(rename = "My")]
    pub my: Option<usize>,
    pub spacing: f64,
    pub p_sh: f64,
    pub method: String,
    pub kappa: Option<f64>,
    pub std_err: Option<f64>,
    pub n_samples: Option<usize>,
    pub trunc_order: Option<usize>,
    pub converged: bool,
    pub seed: Option<u64>,
    pub runtime_ms: Option<f64>,
    pub error: Option<String>,
}

impl ResultRow {
    fn blank(cfg: &SweepConfig, geom: &ArrayGeometry, p_sh: f64, method: Method) -> Self {
        let (mx, my) = match *geom {
            ArrayGeometry::Ula { m, .. } => (Some(m), Some(1)),
            ArrayGeometry::Hura { mx, my, .. } => (Some(mx), Some(my)),
            ArrayGeometry::Uca { .. } => (None, None),
        };
        Self {
            scenario: cfg.scenario.name().to_string(),
            topology: geom.topology().to_string(),
            m: geom.num_antennas(),
            mx,
            my,
            spacing: geom.spacing(),
            p_sh,
            method: method.as_str().to_string(),
            kappa: None,
            std_err: None,
            n_samples: None,
            trunc_order: None,
            converged: false,
            seed: None,
            runtime_ms: None,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
}

impl SweepOutcome {
    /// Some analytic point hit the order cap.
    pub fn has_unconverged(&self) -> bool {
        self.rows
            .iter()
            .any(|r| r.method == Method::Analytic.as_str() && r.error.is_none() && !r.converged)
    }

    pub fn all_failed(&self) -> bool {
        self.rows.iter().all(|r| r.error.is_some())
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn analytic_row(
    cfg: &SweepConfig,
    geom: &ArrayGeometry,
    p: f64,
    pair: &Result<(KPair, f64), ClosedFormError>,
) -> ResultRow {
    let mut row = ResultRow::blank(cfg, geom, p, Method::Analytic);
    match pair {
        Ok((pair, ms)) => match pair.kappa(p, 1.0, 1.0) {
            Ok(k) => {
                row.kappa = Some(k.kappa);
                row.trunc_order = Some(k.trunc_orders.max());
                row.converged = k.converged;
                row.runtime_ms = cfg.output.runtime.then_some(*ms);
            }
            Err(e) => row.error = Some(e.to_string()),
        },
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn mc_row(cfg: &SweepConfig, geom: &ArrayGeometry, p: f64) -> ResultRow {
    let mut row = ResultRow::blank(cfg, geom, p, Method::Mc);
    row.seed = Some(cfg.mc.seed);
    if cfg.profile().is_spherical() && p > 0.0 {
        row.error = Some("spherical-uniform rays have no clusters to share".into());
        return row;
    }
    let t = Instant::now();
    let result = cfg
        .mc_scenario(p)
        .map_err(|e| e.to_string())
        .and_then(|sc| estimate_kappa(geom, &sc, cfg.mc.samples, cfg.mc.seed).map_err(|e| e.to_string()));
    match result {
        Ok(est) => {
            row.kappa = Some(est.kappa);
            row.std_err = Some(est.std_err);
            row.n_samples = Some(est.n_samples);
            row.converged = true;
            row.runtime_ms = cfg.output.runtime.then(|| elapsed_ms(t));
        }
        Err(e) => row.error = Some(e),
    }
    row
}

/// Every (geometry, p_sh, method) point in that nesting order. The
/// closed-form pair is computed once per geometry.
pub fn run_sweep(cfg: &SweepConfig) -> SweepOutcome {
    let analytic = cfg.methods.contains(&Method::Analytic);
    let pairs: Vec<Option<Result<(KPair, f64), ClosedFormError>>> = cfg
        .geometries
        .par_iter()
        .map(|g| {
            analytic.then(|| {
                let t = Instant::now();
                k_pair(g, &cfg.profile(), &cfg.truncation).map(|p| (p, elapsed_ms(t)))
            })
        })
        .collect();
    let points: Vec<(usize, f64, Method)> = cfg
        .geometries
        .iter()
        .enumerate()
        .flat_map(|(i, _)| {
            cfg.p_sh
                .iter()
                .flat_map(move |&p| cfg.methods.iter().map(move |&m| (i, p, m)))
        })
        .collect();
    let rows = points
        .par_iter()
        .map(|&(i, p, method)| {
            let geom = &cfg.geometries[i];
            match method {
                Method::Analytic => {
                    let pair = pairs[i].as_ref().expect("analytic pair computed");
                    analytic_row(cfg, geom, p, pair)
                }
                Method::Mc => mc_row(cfg, geom, p),
            }
        })
        .collect();
    SweepOutcome { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::AngularProfile;
    use crate::cli::config::{from_value, ScenarioSpec};
    use serde_json::json;

    fn cfg(v: serde_json::Value) -> SweepConfig {
        from_value(v).unwrap()
    }

    #[test]
    fn rows_follow_point_order() {
        let c = cfg(json!({
            "scenario": "scen1",
            "geometries": [
                {"topology": "ula", "m": 8, "dx": 0.5},
                {"topology": "hura", "mx": 2, "my": 2, "dx": 0.5, "dy": 0.5}
            ],
            "methods": ["analytic", "mc"],
            "p_sh": [0.0, 0.5],
            "total_clusters": [2],
            "mc": {"samples": 200}
        }));
        let out = run_sweep(&c);
        let keys: Vec<(String, f64, String)> = out
            .rows
            .iter()
            .map(|r| (r.topology.clone(), r.p_sh, r.method.clone()))
            .collect();
        assert_eq!(keys.len(), 8);
        assert_eq!(keys[0], ("ula".into(), 0.0, "analytic".into()));
        assert_eq!(keys[3], ("ula".into(), 0.5, "mc".into()));
        assert_eq!(keys[4], ("hura".into(), 0.0, "analytic".into()));
        assert!(out.rows.iter().all(|r| r.error.is_none() && r.converged));
        assert!(out.rows.iter().all(|r| r.runtime_ms.is_none()));
        assert_eq!(out.rows[4].mx, Some(2));
    }

    #[test]
    fn no_spread_gives_one_in_both_methods() {
        let mut c = cfg(json!({
            "scenario": "scen1",
            "geometries": [{"topology": "uca", "m": 16, "dr": 0.5}],
            "methods": ["analytic", "mc"],
            "p_sh": [1.0],
            "total_clusters": [1],
            "mc": {"samples": 10, "clusters_per_user": 1, "subrays_per_cluster": 1}
        }));
        c.scenario = ScenarioSpec::Custom(AngularProfile::degenerate());
        for r in run_sweep(&c).rows {
            assert_eq!(r.kappa, Some(1.0), "{r:?}");
        }
    }

    #[test]
    fn spherical_analytic_is_a_row_error() {
        let c = cfg(json!({
            "scenario": "uniform_sphere",
            "geometries": [{"topology": "ula", "m": 8, "dx": 0.5}],
            "methods": ["analytic", "mc"],
            "mc": {"samples": 50}
        }));
        let out = run_sweep(&c);
        assert!(out.rows[0].error.is_some());
        assert!(out.rows[1].error.is_none());
        assert!(!out.all_failed());
    }

    #[test]
    fn capped_series_are_reported() {
        let c = cfg(json!({
            "scenario": "scen1",
            "geometries": [{"topology": "ula", "m": 64, "dx": 0.5}],
            "methods": ["analytic"],
            "truncation": {"max_order": 3}
        }));
        let out = run_sweep(&c);
        assert!(out.has_unconverged());
    }
}
