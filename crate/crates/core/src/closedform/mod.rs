//! Closed-form κ^FP.
//!
//! `K_c` and `K_s` are the normalised mean squared steering-vector inner
//! products of two rays from distinct and from a common cluster. Both reduce
//! to sums over antenna pairs of Bessel series weighted by characteristic
//! functions of the angular variables; κ^FP mixes them with the sharing
//! probability.
//!
//! For planar arrays the elevation enters through `J_n(R sin θ)`. Writing
//! `sin θ = cos ε` with `ε = θ - π/2` and expanding
//! `J_n(R cos ε) = sum_k J_{(n+k)/2}(R/2) J_{(n-k)/2}(R/2) e^{jkε}`
//! (`k ≡ n mod 2`) averages elevation over its full support with integer
//! orders only.

mod planar;
mod ula;
pub mod window;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::AngularProfile;
use crate::geometry::{ArrayGeometry, GeometryError};
use crate::specfun::{char_fn, AngularSpec, SpecFunError, TruncationPolicy};

pub use planar::{pair_terms, PairPhaseTerm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("closed forms need Gaussian or Laplacian angles; {0} is spherical-uniform")]
    Unsupported(&'static str),
    #[error("sharing probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("link gain {0} must be positive")]
    BadLinkGain(f64),
}

/// Largest window used by a series; zero where a window does not apply.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesOrders {
    /// Azimuth order `n` (`K_c`) or cluster-difference order `d` (`K_s`).
    pub azimuth: usize,
    /// Subray azimuth order `n` of `K_s`.
    pub subray: usize,
    /// Elevation order `k`.
    pub elevation: usize,
}

impl SeriesOrders {
    pub fn max(&self) -> usize {
        self.azimuth.max(self.subray).max(self.elevation)
    }

    fn merge(&mut self, o: &SeriesOrders) {
        self.azimuth = self.azimuth.max(o.azimuth);
        self.subray = self.subray.max(o.subray);
        self.elevation = self.elevation.max(o.elevation);
    }
}

/// One of `K_c`, `K_s`, with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KTerm {
    pub value: f64,
    pub orders: SeriesOrders,
    pub converged: bool,
    /// Largest imaginary part seen in a per-pair accumulator that is real
    /// in exact arithmetic.
    pub imag_residual: f64,
}

impl KTerm {
    fn exact(value: f64) -> Self {
        Self {
            value,
            orders: SeriesOrders::default(),
            converged: true,
            imag_residual: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KPair {
    pub kc: KTerm,
    pub ks: KTerm,
}

impl KPair {
    pub fn kappa(&self, p_sh: f64, beta_l: f64, beta_lp: f64) -> Result<AnalyticKappa, ClosedFormError> {
        if !(0.0..=1.0).contains(&p_sh) {
            return Err(ClosedFormError::BadProbability(p_sh));
        }
        for b in [beta_l, beta_lp] {
            if !(b > 0.0 && b.is_finite()) {
                return Err(ClosedFormError::BadLinkGain(b));
            }
        }
        let (kc, ks) = (self.kc.value, self.ks.value);
        Ok(AnalyticKappa {
            kappa: beta_l * beta_lp * ((1.0 - p_sh) * kc + p_sh * ks),
            kc,
            ks,
            p_sh,
            trunc_orders: TruncOrders {
                kc: self.kc.orders,
                ks: self.ks.orders,
            },
            converged: self.kc.converged && self.ks.converged,
            imag_residual: self.kc.imag_residual.max(self.ks.imag_residual),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncOrders {
    pub kc: SeriesOrders,
    pub ks: SeriesOrders,
}

impl TruncOrders {
    pub fn max(&self) -> usize {
        self.kc.max().max(self.ks.max())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticKappa {
    pub kappa: f64,
    pub kc: f64,
    pub ks: f64,
    pub p_sh: f64,
    pub trunc_orders: TruncOrders,
    pub converged: bool,
    pub imag_residual: f64,
}

/// `χ(n)` for `|n| <= half`, tabulated.
#[derive(Debug, Clone)]
pub(crate) struct CfTable {
    half: usize,
    values: Vec<Complex64>,
}

impl CfTable {
    pub(crate) fn new(spec: &AngularSpec, half: usize) -> Result<Self, SpecFunError> {
        let h = half as i64;
        let values = (-h..=h)
            .map(|n| char_fn(spec, n as i32))
            .collect::<Result<_, _>>()?;
        Ok(Self { half, values })
    }

    /// `χ_1(n) χ_2(n) e^{-jnπ/2}`: characteristic function of the sum of the
    /// two variables, recentred by `π/2`.
    pub(crate) fn centred_sum(a: &AngularSpec, b: &AngularSpec, half: usize) -> Result<Self, SpecFunError> {
        Self::centred_from(&[a, b], half)
    }

    pub(crate) fn centred(a: &AngularSpec, half: usize) -> Result<Self, SpecFunError> {
        Self::centred_from(&[a], half)
    }

    // The phase is formed from the recentred total mean so that a sum
    // centred exactly at π/2 gives exactly real values.
    fn centred_from(specs: &[&AngularSpec], half: usize) -> Result<Self, SpecFunError> {
        let shift = specs.iter().map(|s| s.mean).sum::<f64>() - FRAC_PI_2;
        let h = half as i64;
        let values = (-h..=h)
            .map(|n| {
                let nf = n as f64;
                let mut modulus = 1.0;
                for s in specs {
                    modulus *= s
                        .cf_modulus(nf)
                        .ok_or(SpecFunError::UnsupportedFamily(s.family))?;
                }
                Ok(Complex64::from_polar(modulus, nf * shift))
            })
            .collect::<Result<_, SpecFunError>>()?;
        Ok(Self { half, values })
    }

    pub(crate) fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub(crate) fn product(a: &Self, b: &Self) -> Self {
        let half = a.half.min(b.half);
        let h = half as i64;
        let values = (-h..=h).map(|n| a.get(n) * b.get(n)).collect();
        Self { half, values }
    }

    #[inline]
    pub(crate) fn get(&self, n: i64) -> Complex64 {
        debug_assert!(n.unsigned_abs() as usize <= self.half);
        self.values[(n + self.half as i64) as usize]
    }

}

/// Tolerance applied to the Bessel factors, tighter than the series one.
pub(crate) fn bessel_tol(trunc: &TruncationPolicy) -> f64 {
    trunc.rel_tol * 1e-2
}

fn check_inputs(
    geom: &ArrayGeometry,
    profile: &AngularProfile,
    trunc: &TruncationPolicy,
) -> Result<(), ClosedFormError> {
    geom.validate()?;
    trunc.validate()?;
    let fields = [
        ("az_cluster", &profile.az_cluster),
        ("az_subray", &profile.az_subray),
        ("el_cluster", &profile.el_cluster),
        ("el_subray", &profile.el_subray),
    ];
    for (name, spec) in fields {
        spec.validate()?;
        if spec.is_spherical() {
            return Err(ClosedFormError::Unsupported(name));
        }
    }
    Ok(())
}

fn compute(
    geom: &ArrayGeometry,
    profile: &AngularProfile,
    trunc: &TruncationPolicy,
    want_ks: bool,
) -> Result<(KTerm, KTerm), ClosedFormError> {
    check_inputs(geom, profile, trunc)?;
    let azimuth_only = matches!(geom, ArrayGeometry::Ula { .. });
    let cluster_fixed = profile.az_cluster.is_degenerate()
        && (azimuth_only || profile.el_cluster.is_degenerate());
    let subray_fixed = profile.az_subray.is_degenerate()
        && (azimuth_only || profile.el_subray.is_degenerate());
    // Coinciding rays give |a^H a|^2 = M^2 exactly.
    if geom.num_antennas() == 1 || (cluster_fixed && subray_fixed) {
        return Ok((KTerm::exact(1.0), KTerm::exact(1.0)));
    }
    let want_ks = want_ks && !subray_fixed;
    let (kc, ks) = match *geom {
        ArrayGeometry::Ula { m, dx } => ula::k_terms(m, dx, profile, trunc, want_ks)?,
        _ => planar::k_terms(geom, profile, trunc, want_ks)?,
    };
    Ok((kc, if subray_fixed { KTerm::exact(1.0) } else { ks }))
}

/// `K_c` and `K_s` for `geom` under `profile`.
pub fn k_pair(
    geom: &ArrayGeometry,
    profile: &AngularProfile,
    trunc: &TruncationPolicy,
) -> Result<KPair, ClosedFormError> {
    let (kc, ks) = compute(geom, profile, trunc, true)?;
    Ok(KPair { kc, ks })
}

pub fn kc(
    geom: &ArrayGeometry,
    profile: &AngularProfile,
    trunc: &TruncationPolicy,
) -> Result<KTerm, ClosedFormError> {
    Ok(compute(geom, profile, trunc, false)?.0)
}

pub fn ks(
    geom: &ArrayGeometry,
    profile: &AngularProfile,
    trunc: &TruncationPolicy,
) -> Result<KTerm, ClosedFormError> {
    Ok(k_pair(geom, profile, trunc)?.ks)
}

pub fn kappa_fp(
    geom: &ArrayGeometry,
    profile: &AngularProfile,
    p_sh: f64,
    beta_l: f64,
    beta_lp: f64,
    trunc: &TruncationPolicy,
) -> Result<AnalyticKappa, ClosedFormError> {
    if !(0.0..=1.0).contains(&p_sh) {
        return Err(ClosedFormError::BadProbability(p_sh));
    }
    k_pair(geom, profile, trunc)?.kappa(p_sh, beta_l, beta_lp)
}

/// `ν = sum_{m=1}^{M-1} (1 - m/M) |E[e^{-j2π d_x m sin φ}]|^2`, so that
/// `K_c = (1 + 2ν) / M` for a ULA.
pub fn nu_ula(
    m: usize,
    dx: f64,
    profile: &AngularProfile,
    trunc: &TruncationPolicy,
) -> Result<KTerm, ClosedFormError> {
    let geom = ArrayGeometry::ula(m, dx)?;
    check_inputs(&geom, profile, trunc)?;
    ula::nu(m, dx, profile, trunc)
}
