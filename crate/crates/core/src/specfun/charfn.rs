//! Angular distributions and their characteristic functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpecFunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularFamily {
    Gaussian,
    /// Laplace distribution; `spread` is the scale `b`, so the variance is
    /// `2 b^2` and the characteristic function is `1 / (1 + n^2 b^2)`.
    Laplacian,
    /// `φ ~ U(-π, π]`.
    SphericalUniformAzimuth,
    /// `cos θ ~ U[-1, 1]`.
    SphericalUniformElevation,
}

/// Distribution of one angular variable. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSpec {
    pub family: AngularFamily,
    pub mean: f64,
    pub spread: f64,
}

impl AngularSpec {
    pub fn new(family: AngularFamily, mean: f64, spread: f64) -> Result<Self, SpecFunError> {
        let s = Self {
            family,
            mean,
            spread,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn gaussian(mean: f64, spread: f64) -> Self {
        Self {
            family: AngularFamily::Gaussian,
            mean,
            spread,
        }
    }

    pub fn laplacian(mean: f64, spread: f64) -> Self {
        Self {
            family: AngularFamily::Laplacian,
            mean,
            spread,
        }
    }

    pub fn spherical_azimuth() -> Self {
        Self {
            family: AngularFamily::SphericalUniformAzimuth,
            mean: 0.0,
            spread: 0.0,
        }
    }

    pub fn spherical_elevation() -> Self {
        Self {
            family: AngularFamily::SphericalUniformElevation,
            mean: std::f64::consts::FRAC_PI_2,
            spread: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SpecFunError> {
        if !self.mean.is_finite() {
            return Err(SpecFunError::InvalidSpec(format!(
                "mean must be finite, got {}",
                self.mean
            )));
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return Err(SpecFunError::InvalidSpec(format!(
                "spread must be finite and >= 0, got {}",
                self.spread
            )));
        }
        Ok(())
    }

    pub fn is_spherical(&self) -> bool {
        matches!(
            self.family,
            AngularFamily::SphericalUniformAzimuth | AngularFamily::SphericalUniformElevation
        )
    }

    /// Point mass at `mean`.
    pub fn is_degenerate(&self) -> bool {
        !self.is_spherical() && self.spread == 0.0
    }

    /// `|E[e^{jnX}]|`, or `None` for families without a closed form.
    pub fn cf_modulus(&self, n: f64) -> Option<f64> {
        let s2 = self.spread * self.spread;
        match self.family {
            AngularFamily::Gaussian => Some((-0.5 * n * n * s2).exp()),
            AngularFamily::Laplacian => Some(1.0 / (1.0 + n * n * s2)),
            _ => None,
        }
    }
}

/// `E[e^{jnX}]` for `X` distributed per `spec`.
pub fn char_fn(spec: &AngularSpec, n: i32) -> Result<Complex64, SpecFunError> {
    let n = f64::from(n);
    let modulus = spec
        .cf_modulus(n)
        .ok_or(SpecFunError::UnsupportedFamily(spec.family))?;
    Ok(Complex64::from_polar(modulus, n * spec.mean))
}
