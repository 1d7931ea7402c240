//! Monte-Carlo distance to favorable propagation and probes of its limits.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::{
    sample_users, synth_channel, ChannelError, ChannelRealization, Drop, ScenarioConfig,
    UserChannelParams,
};
use crate::geometry::{ArrayGeometry, GeometryError, RayAngles, Topology};
use crate::sum::{ComplexSum, NeumaierSum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FpError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("channel lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("antenna grid must be strictly increasing")]
    GridNotMonotone,
    #[error("HURA needs a square antenna count, got {0}")]
    NotSquare(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub kappa: f64,
    pub std_err: f64,
    pub n_samples: usize,
    /// SHA-256 of the geometry, scenario, sample count and seed.
    pub config_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T1T2Split {
    /// Ray pairs from different clusters.
    pub t1: Complex64,
    /// Ray pairs from a common cluster.
    pub t2: Complex64,
}

/// Radius factor of the UCA phase `e^{-j c r sin(ψ_m + α)}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UcaSumForm {
    /// `c = M d_r`, the large-`M` form.
    SmallAngle,
    /// `c = π d_r / sin(π/M)`, as in the steering vector.
    #[default]
    ExactRadius,
}

/// Phase-plane offsets of two rays seen by a UCA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcaPairOffsets {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

impl UcaPairOffsets {
    pub fn between(r: RayAngles, rp: RayAngles) -> Self {
        let a = r.elevation.sin() * r.azimuth.cos() - rp.elevation.sin() * rp.azimuth.cos();
        let b = r.elevation.sin() * r.azimuth.sin() - rp.elevation.sin() * rp.azimuth.sin();
        Self {
            a,
            b,
            alpha: a.atan2(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub m: usize,
    /// Mean of `|h^H h'| / M`.
    pub mean_inner: f64,
    /// Mean of `|T2| / M`.
    pub mean_t2: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut s = ComplexSum::new();
    for (x, y) in a.iter().zip(b) {
        s.add(x.conj() * y);
    }
    s.value()
}

/// `h^H h' / M`.
pub fn fp_inner(h: &ChannelRealization, hp: &ChannelRealization) -> Result<Complex64, FpError> {
    let (m, mp) = (h.h.len(), hp.h.len());
    if m != mp {
        return Err(FpError::LengthMismatch(m, mp));
    }
    Ok(dot(&h.h, &hp.h) / m as f64)
}

fn kappa_sample(geom: &ArrayGeometry, scenario: &ScenarioConfig, seed: u64, i: u64) -> Result<f64, FpError> {
    let (drop, users) = sample_users(scenario, seed, i, 2)?;
    let h = synth_channel(geom, &drop, &users[0])?;
    let hp = synth_channel(geom, &drop, &users[1])?;
    Ok(fp_inner(&h, &hp)?.norm_sqr())
}

/// `|h^H h'|^2 / M^2` for samples `0..n_samples`, in sample order.
pub fn kappa_samples(
    geom: &ArrayGeometry,
    scenario: &ScenarioConfig,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>, FpError> {
    geom.validate()?;
    scenario.validate()?;
    (0..n_samples as u64)
        .into_par_iter()
        .map(|i| kappa_sample(geom, scenario, seed, i))
        .collect()
}

fn config_hash(geom: &ArrayGeometry, scenario: &ScenarioConfig, n_samples: usize, seed: u64) -> String {
    let key = serde_json::json!({
        "geometry": geom,
        "scenario": scenario,
        "n_samples": n_samples,
        "seed": seed,
    });
    let digest = Sha256::digest(key.to_string().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Mean and standard error of the κ-samples.
pub fn estimate_kappa(
    geom: &ArrayGeometry,
    scenario: &ScenarioConfig,
    n_samples: usize,
    seed: u64,
) -> Result<KappaEstimate, FpError> {
    if n_samples < 2 {
        return Err(FpError::TooFewSamples(n_samples));
    }
    let xs = kappa_samples(geom, scenario, n_samples, seed)?;
    let (mean, std_err) = mean_and_se(&xs);
    Ok(KappaEstimate {
        kappa: mean,
        std_err,
        n_samples,
        config_hash: config_hash(geom, scenario, n_samples, seed),
    })
}

/// Two-pass mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<NeumaierSum>().value() / n;
    let ss = xs
        .iter()
        .map(|x| (x - mean).powi(2))
        .collect::<NeumaierSum>()
        .value();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

// Partial channels per cluster. Free rays form singleton groups.
fn partials(
    geom: &ArrayGeometry,
    drop: &Drop,
    params: &UserChannelParams,
) -> Vec<(Option<usize>, Vec<Complex64>)> {
    let m = geom.num_antennas();
    let mut groups: Vec<(Option<usize>, Vec<Complex64>)> = Vec::new();
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for ray in &params.rays {
        let key = ray.cluster();
        let slot = match groups.iter().position(|(k, _)| key.is_some() && *k == key) {
            Some(i) => i,
            None => {
                groups.push((key, vec![Complex64::new(0.0, 0.0); m]));
                groups.len() - 1
            }
        };
        geom.steering_into(ray.angles(drop), &mut a);
        let g = ray.coefficient();
        for (hi, ai) in groups[slot].1.iter_mut().zip(&a) {
            *hi += g * ai;
        }
    }
    groups
}

/// Splits the unnormalised `h_l^H h_l'` into cross-cluster and
/// shared-cluster parts, each summed on its own.
pub fn decompose_t1_t2(
    params_l: &UserChannelParams,
    params_lp: &UserChannelParams,
    drop: &Drop,
    geom: &ArrayGeometry,
) -> Result<T1T2Split, FpError> {
    geom.validate()?;
    for p in [params_l, params_lp] {
        if p.drop_id != drop.id {
            return Err(ChannelError::DropMismatch {
                expected: drop.id,
                got: p.drop_id,
            }
            .into());
        }
    }
    let gl = partials(geom, drop, params_l);
    let glp = partials(geom, drop, params_lp);
    let mut t1 = ComplexSum::new();
    let mut t2 = ComplexSum::new();
    for (k, hl) in &gl {
        for (kp, hlp) in &glp {
            let z = dot(hl, hlp);
            if k.is_some() && k == kp {
                t2.add(z);
            } else {
                t1.add(z);
            }
        }
    }
    Ok(T1T2Split {
        t1: t1.value(),
        t2: t2.value(),
    })
}

/// `(1/M) sum_m e^{-j c sqrt(a^2 + b^2) sin(ψ_m + α)}`, `ψ_m = 2πm/M`.
pub fn uca_partial_sum(m: usize, d_r: f64, a: f64, b: f64, alpha: f64, form: UcaSumForm) -> Complex64 {
    assert!(m >= 2, "UCA sum needs M >= 2");
    let mf = m as f64;
    let c = match form {
        UcaSumForm::SmallAngle => mf * d_r,
        UcaSumForm::ExactRadius => PI * d_r / (PI / mf).sin(),
    };
    let r = c * a.hypot(b);
    let mut s = ComplexSum::new();
    for i in 0..m {
        let psi = 2.0 * PI * i as f64 / mf;
        s.add(Complex64::from_polar(1.0, -r * (psi + alpha).sin()));
    }
    s.value() / mf
}

/// Array of the given family with `m` antennas and spacing `d`; HURA is
/// square.
pub fn family_geometry(topology: Topology, m: usize, d: f64) -> Result<ArrayGeometry, FpError> {
    Ok(match topology {
        Topology::Ula => ArrayGeometry::ula(m, d)?,
        Topology::Uca => ArrayGeometry::uca(m, d)?,
        Topology::Hura => {
            let side = (m as f64).sqrt().round() as usize;
            if side * side != m {
                return Err(FpError::NotSquare(m));
            }
            ArrayGeometry::hura(side, side, d, d)?
        }
    })
}

/// Empirical `|h^H h'|/M` and `|T2|/M` along an antenna-count grid.
pub fn convergence_trace(
    topology: Topology,
    spacing: f64,
    scenario: &ScenarioConfig,
    m_grid: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<TraceRow>, FpError> {
    if m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FpError::GridNotMonotone);
    }
    if n_samples < 2 {
        return Err(FpError::TooFewSamples(n_samples));
    }
    scenario.validate()?;
    m_grid
        .iter()
        .map(|&m| {
            let geom = family_geometry(topology, m, spacing)?;
            let per: Vec<(f64, f64)> = (0..n_samples as u64)
                .into_par_iter()
                .map(|i| {
                    let (drop, users) = sample_users(scenario, seed, i, 2)?;
                    let h = synth_channel(&geom, &drop, &users[0])?;
                    let hp = synth_channel(&geom, &drop, &users[1])?;
                    let inner = fp_inner(&h, &hp)?.norm();
                    let split = decompose_t1_t2(&users[0], &users[1], &drop, &geom)?;
                    Ok((inner, split.t2.norm() / m as f64))
                })
                .collect::<Result<_, FpError>>()?;
            let n = n_samples as f64;
            Ok(TraceRow {
                m,
                mean_inner: per.iter().map(|p| p.0).collect::<NeumaierSum>().value() / n,
                mean_t2: per.iter().map(|p| p.1).collect::<NeumaierSum>().value() / n,
            })
        })
        .collect()
}
