//! Array topologies and steering vectors.
//!
//! Element phases are written as `2π` times a position in wavelengths
//! projected on the arrival direction. The ULA ignores elevation; HURA and
//! UCA sit in the azimuth plane, so each element has a planar phase
//! coefficient `(p_x, p_y)` and responds as `exp(j sinθ (p_x cos φ + p_y sin φ))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("antenna count must be at least {min}, got {got}")]
    TooFewAntennas { min: usize, got: usize },
    #[error("element spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Ula,
    Hura,
    Uca,
}

impl Topology {
    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Ula => "ula",
            Topology::Hura => "hura",
            Topology::Uca => "uca",
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Spacings are in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "lowercase", deny_unknown_fields)]
pub enum ArrayGeometry {
    Ula {
        m: usize,
        dx: f64,
    },
    Hura {
        mx: usize,
        my: usize,
        dx: f64,
        dy: f64,
    },
    /// `dr` is the spacing between adjacent elements on the circle.
    Uca {
        m: usize,
        dr: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayAngles {
    pub azimuth: f64,
    pub elevation: f64,
}

impl RayAngles {
    pub const fn new(azimuth: f64, elevation: f64) -> Self {
        Self { azimuth, elevation }
    }
}

fn check_spacing(d: f64) -> Result<(), GeometryError> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::BadSpacing(d))
    }
}

fn check_count(got: usize, min: usize) -> Result<(), GeometryError> {
    if got >= min {
        Ok(())
    } else {
        Err(GeometryError::TooFewAntennas { min, got })
    }
}

impl ArrayGeometry {
    pub fn ula(m: usize, dx: f64) -> Result<Self, GeometryError> {
        let g = ArrayGeometry::Ula { m, dx };
        g.validate()?;
        Ok(g)
    }

    pub fn hura(mx: usize, my: usize, dx: f64, dy: f64) -> Result<Self, GeometryError> {
        let g = ArrayGeometry::Hura { mx, my, dx, dy };
        g.validate()?;
        Ok(g)
    }

    pub fn uca(m: usize, dr: f64) -> Result<Self, GeometryError> {
        let g = ArrayGeometry::Uca { m, dr };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match *self {
            ArrayGeometry::Ula { m, dx } => {
                check_count(m, 1)?;
                check_spacing(dx)
            }
            ArrayGeometry::Hura { mx, my, dx, dy } => {
                check_count(mx, 1)?;
                check_count(my, 1)?;
                check_spacing(dx)?;
                check_spacing(dy)
            }
            // The circle radius dr / (2 sin(π/M)) needs at least two elements.
            ArrayGeometry::Uca { m, dr } => {
                check_count(m, 2)?;
                check_spacing(dr)
            }
        }
    }

    pub fn topology(&self) -> Topology {
        match self {
            ArrayGeometry::Ula { .. } => Topology::Ula,
            ArrayGeometry::Hura { .. } => Topology::Hura,
            ArrayGeometry::Uca { .. } => Topology::Uca,
        }
    }

    pub fn num_antennas(&self) -> usize {
        match *self {
            ArrayGeometry::Ula { m, .. } | ArrayGeometry::Uca { m, .. } => m,
            ArrayGeometry::Hura { mx, my, .. } => mx * my,
        }
    }

    /// Spacing reported in result tables (`dx` for HURA).
    pub fn spacing(&self) -> f64 {
        match *self {
            ArrayGeometry::Ula { dx, .. } | ArrayGeometry::Hura { dx, .. } => dx,
            ArrayGeometry::Uca { dr, .. } => dr,
        }
    }

    /// `π d_r / sin(π/M)`, the phase scale of a UCA element (twice π times
    /// the radius in wavelengths).
    pub fn uca_phase_scale(m: usize, dr: f64) -> f64 {
        PI * dr / (PI / m as f64).sin()
    }

    /// Planar phase coefficients `(p_x, p_y)` per element, in Kronecker order
    /// for the HURA. `None` for the ULA, whose response ignores elevation.
    pub fn planar_phase_coefficients(&self) -> Option<Vec<[f64; 2]>> {
        match *self {
            ArrayGeometry::Ula { .. } => None,
            ArrayGeometry::Hura { mx, my, dx, dy } => Some(
                (0..mx)
                    .flat_map(|ix| {
                        (0..my).map(move |iy| {
                            [2.0 * PI * dx * ix as f64, 2.0 * PI * dy * iy as f64]
                        })
                    })
                    .collect(),
            ),
            ArrayGeometry::Uca { m, dr } => {
                let scale = Self::uca_phase_scale(m, dr);
                Some(
                    (0..m)
                        .map(|i| {
                            let psi = 2.0 * PI * i as f64 / m as f64;
                            [scale * psi.cos(), scale * psi.sin()]
                        })
                        .collect(),
                )
            }
        }
    }

    pub fn steering_vector(&self, angles: RayAngles) -> Result<Vec<Complex64>, GeometryError> {
        self.validate()?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.num_antennas()];
        self.steering_into(angles, &mut out);
        Ok(out)
    }

    /// Writes the steering vector into `out` (length `num_antennas()`).
    /// The geometry is assumed valid.
    pub fn steering_into(&self, angles: RayAngles, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.num_antennas());
        let RayAngles { azimuth, elevation } = angles;
        match *self {
            ArrayGeometry::Ula { dx, .. } => {
                let k = 2.0 * PI * dx * azimuth.sin();
                for (i, o) in out.iter_mut().enumerate() {
                    *o = Complex64::cis(k * i as f64);
                }
            }
            ArrayGeometry::Hura { mx, my, dx, dy } => {
                let (sp, cp) = azimuth.sin_cos();
                let st = elevation.sin();
                let kx = 2.0 * PI * dx * st * cp;
                let ky = 2.0 * PI * dy * st * sp;
                let ay: Vec<Complex64> = (0..my).map(|iy| Complex64::cis(ky * iy as f64)).collect();
                for ix in 0..mx {
                    let ax = Complex64::cis(kx * ix as f64);
                    for (iy, a) in ay.iter().enumerate() {
                        out[ix * my + iy] = ax * a;
                    }
                }
            }
            ArrayGeometry::Uca { m, dr } => {
                let k = Self::uca_phase_scale(m, dr) * elevation.sin();
                for (i, o) in out.iter_mut().enumerate() {
                    let psi = 2.0 * PI * i as f64 / m as f64;
                    *o = Complex64::cis(k * (azimuth - psi).cos());
                }
            }
        }
    }
}
