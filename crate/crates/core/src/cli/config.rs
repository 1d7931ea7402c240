//! Sweep configuration files and scenario presets.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::channel::{AngularProfile, ScenarioConfig};
use crate::geometry::ArrayGeometry;
use crate::specfun::{AngularSpec, TruncationPolicy};

/// How close an MC sharing probability must be to `1/C_T`.
const P_SH_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSpec {
    Scen1,
    Scen2,
    UniformSphere,
    /// Angles in radians.
    Custom(AngularProfile),
}

impl ScenarioSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioSpec::Scen1 => "scen1",
            ScenarioSpec::Scen2 => "scen2",
            ScenarioSpec::UniformSphere => "uniform_sphere",
            ScenarioSpec::Custom(_) => "custom",
        }
    }

    pub fn profile(&self) -> AngularProfile {
        match *self {
            ScenarioSpec::Scen1 => table_profile(14.4, 6.24, 1.9, 1.37),
            ScenarioSpec::Scen2 => table_profile(31.64, 24.25, 6.12, 1.84),
            ScenarioSpec::UniformSphere => AngularProfile::uniform_sphere(),
            ScenarioSpec::Custom(p) => p,
        }
    }
}

// Spreads in degrees: Gaussian azimuth cluster around 0, Laplacian
// elsewhere, elevation clusters around 90.
fn table_profile(az_c: f64, az_s: f64, el_c: f64, el_s: f64) -> AngularProfile {
    AngularProfile {
        az_cluster: AngularSpec::gaussian(0.0, az_c.to_radians()),
        az_subray: AngularSpec::laplacian(0.0, az_s.to_radians()),
        el_cluster: AngularSpec::laplacian(PI / 2.0, el_c.to_radians()),
        el_subray: AngularSpec::laplacian(0.0, el_s.to_radians()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    Mc,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSettings {
    pub samples: usize,
    pub seed: u64,
    pub clusters_per_user: usize,
    pub subrays_per_cluster: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            samples: 30_000,
            seed: 1,
            clusters_per_user: 1,
            subrays_per_cluster: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?}, expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSettings {
    /// Standard output when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
    /// Record wall-clock time per row. Off by default so that reruns are
    /// byte-identical.
    pub runtime: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scenario: ScenarioSpec,
    pub geometries: Vec<ArrayGeometry>,
    pub methods: Vec<Method>,
    /// Sharing probabilities. MC points other than 0 use `C_T = 1/p_sh`.
    #[serde(default = "default_p_sh")]
    pub p_sh: Vec<f64>,
    /// Cluster pool sizes available to MC points.
    #[serde(default)]
    pub total_clusters: Vec<usize>,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub truncation: TruncationPolicy,
    #[serde(default)]
    pub output: OutputSettings,
}

fn default_p_sh() -> Vec<f64> {
    vec![0.0]
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if self.geometries.is_empty() {
            return bad("geometries must not be empty".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.p_sh.is_empty() {
            return bad("p_sh must not be empty".into());
        }
        if self.methods.iter().collect::<BTreeSet<_>>().len() != self.methods.len() {
            return bad("methods contain duplicates".into());
        }
        for (i, g) in self.geometries.iter().enumerate() {
            g.validate()
                .map_err(|e| CliError::Validation(format!("geometries[{i}]: {e}")))?;
        }
        for &p in &self.p_sh {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("p_sh {p} is outside [0, 1]"));
            }
        }
        self.truncation
            .validate()
            .map_err(|e| CliError::Validation(format!("truncation: {e}")))?;
        self.profile()
            .validate()
            .map_err(|e| CliError::Validation(format!("scenario: {e}")))?;
        if self.methods.contains(&Method::Mc) {
            let mc = &self.mc;
            if mc.samples < 2 {
                return bad(format!("mc.samples must be at least 2, got {}", mc.samples));
            }
            if mc.clusters_per_user == 0 || mc.subrays_per_cluster == 0 {
                return bad("mc.clusters_per_user and mc.subrays_per_cluster must be >= 1".into());
            }
            for &p in &self.p_sh {
                if p > 0.0 {
                    self.pool_size(p)?;
                }
            }
        }
        Ok(())
    }

    pub fn profile(&self) -> AngularProfile {
        self.scenario.profile()
    }

    /// The listed `C_T` with `1/C_T = p`.
    pub fn pool_size(&self, p: f64) -> Result<usize, CliError> {
        self.total_clusters
            .iter()
            .copied()
            .find(|&ct| ct > 0 && (1.0 / ct as f64 - p).abs() <= P_SH_MATCH)
            .ok_or_else(|| {
                CliError::Validation(format!(
                    "MC p_sh {p} is not 1/C_T for any C_T in total_clusters {:?}",
                    self.total_clusters
                ))
            })
    }

    /// MC scenario for sharing probability `p`: disjoint clusters at 0,
    /// otherwise a pool of `1/p`.
    pub fn mc_scenario(&self, p: f64) -> Result<ScenarioConfig, CliError> {
        let (c, s) = (self.mc.clusters_per_user, self.mc.subrays_per_cluster);
        let sc = if p == 0.0 {
            ScenarioConfig::disjoint(self.profile(), c, s)
        } else {
            ScenarioConfig::pooled(self.profile(), self.pool_size(p)?, c, s)
        };
        sc.validate()
            .map_err(|e| CliError::Validation(format!("mc scenario: {e}")))?;
        Ok(sc)
    }
}

/// Sets the value at a dotted path such as `mc.samples` or
/// `geometries.0.m`. The value is parsed as JSON, falling back to a string.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override {spec:?} is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let last = i + 1 == keys.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.entry(key.to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = key.parse().map_err(|_| {
                    CliError::Validation(format!("override path {path:?}: {key:?} is not an index"))
                })?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| {
                    CliError::Validation(format!("override path {path:?}: index {idx} out of range ({len})"))
                })?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(CliError::Validation(format!(
                    "override path {path:?}: {key:?} is not inside an object or array"
                )))
            }
        };
    }
    Err(CliError::Validation(format!("override path {path:?} is empty")))
}

/// Deserialises and validates, reporting the failing field path.
pub fn from_value(value: Value) -> Result<SweepConfig, CliError> {
    let cfg: SweepConfig = serde_path_to_error::deserialize(value)
        .map_err(|e| CliError::Validation(format!("config field `{}`: {}", e.path(), e.inner())))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_value(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| CliError::Validation(format!("{}: {}", path.display(), e.inner())))
}

pub fn load_config(path: &Path) -> Result<SweepConfig, CliError> {
    from_value(load_value(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "scenario": "scen1",
            "geometries": [{"topology": "ula", "m": 64, "dx": 0.5}],
            "methods": ["analytic"],
            "p_sh": [0.0]
        })
    }

    #[test]
    fn minimal_config() {
        let cfg = from_value(base()).unwrap();
        assert_eq!(cfg.geometries.len(), 1);
        assert_eq!(cfg.mc.samples, 30_000);
        assert_eq!(cfg.truncation, TruncationPolicy::default());
    }

    #[test]
    fn table_presets() {
        let p = ScenarioSpec::Scen2.profile();
        assert!((p.az_cluster.spread - 0.552_222_175).abs() < 1e-9);
        assert!((p.az_subray.spread - 24.25f64.to_radians()).abs() < 1e-15);
        assert_eq!(p.el_cluster.mean, PI / 2.0);
        let p1 = ScenarioSpec::Scen1.profile();
        assert!((p1.az_cluster.spread - 0.251327).abs() < 1e-6);
        assert!((p1.el_subray.spread - 0.023911).abs() < 1e-6);
    }

    #[test]
    fn mc_needs_matching_pool() {
        let mut v = base();
        v["methods"] = json!(["mc"]);
        v["p_sh"] = json!([0.25]);
        v["total_clusters"] = json!([3]);
        assert!(matches!(from_value(v.clone()), Err(CliError::Validation(_))));
        v["total_clusters"] = json!([3, 4]);
        let cfg = from_value(v).unwrap();
        assert_eq!(cfg.mc_scenario(0.25).unwrap().total_clusters, 4);
    }

    #[test]
    fn errors_name_the_field() {
        let mut v = base();
        v["geometries"][0]["m"] = json!("many");
        let Err(CliError::Validation(msg)) = from_value(v) else {
            panic!("expected a validation error");
        };
        assert!(msg.contains("geometries[0]"), "{msg}");
        let mut v = base();
        v["mc"] = json!({"sample": 10});
        let Err(CliError::Validation(msg)) = from_value(v) else {
            panic!("expected a validation error");
        };
        assert!(msg.contains("mc"), "{msg}");
    }

    #[test]
    fn empty_lists_are_rejected() {
        let mut v = base();
        v["geometries"] = json!([]);
        assert!(from_value(v).is_err());
        let mut v = base();
        v["methods"] = json!([]);
        assert!(from_value(v).is_err());
    }

    #[test]
    fn overrides() {
        let mut v = base();
        apply_override(&mut v, "mc.samples=500").unwrap();
        apply_override(&mut v, "geometries.0.m=16").unwrap();
        apply_override(&mut v, "scenario=scen2").unwrap();
        let cfg = from_value(v.clone()).unwrap();
        assert_eq!(cfg.mc.samples, 500);
        assert_eq!(cfg.geometries[0].num_antennas(), 16);
        assert_eq!(cfg.scenario, ScenarioSpec::Scen2);
        assert!(apply_override(&mut v, "geometries.3.m=1").is_err());
        assert!(apply_override(&mut v, "nonsense").is_err());
    }

    #[test]
    fn custom_scenario() {
        let mut v = base();
        v["scenario"] = json!({"custom": AngularProfile::degenerate()});
        let cfg = from_value(v).unwrap();
        assert!(cfg.profile().all_spreads_zero());
    }
}
