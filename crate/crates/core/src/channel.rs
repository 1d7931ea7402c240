//! Clustered ray-based channel generation with user cluster sharing.
//!
//! A drop fixes the central angles of the scattering clusters. Each user
//! sees `C` of them, and every visible cluster contributes `S` subrays with
//! independent angular offsets, phases and equal powers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ArrayGeometry, GeometryError, RayAngles};
use crate::rng::{substream, Purpose};
use crate::specfun::{AngularFamily, AngularSpec, SpecFunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid {field}: {source}")]
    Spec {
        field: &'static str,
        source: SpecFunError,
    },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("user parameters belong to drop {got}, expected {expected}")]
    DropMismatch { expected: u64, got: u64 },
    #[error("visible cluster {index} is outside the drop's {available} clusters")]
    VisibleOutOfRange { index: usize, available: usize },
}

/// Distributions of the four angular variables of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularProfile {
    pub az_cluster: AngularSpec,
    pub az_subray: AngularSpec,
    pub el_cluster: AngularSpec,
    pub el_subray: AngularSpec,
}

impl AngularProfile {
    /// Point masses at azimuth 0 and elevation π/2.
    pub fn degenerate() -> Self {
        Self {
            az_cluster: AngularSpec::gaussian(0.0, 0.0),
            az_subray: AngularSpec::laplacian(0.0, 0.0),
            el_cluster: AngularSpec::laplacian(PI / 2.0, 0.0),
            el_subray: AngularSpec::laplacian(0.0, 0.0),
        }
    }

    /// I.i.d. rays, uniform on the sphere. Subray entries are unused.
    pub fn uniform_sphere() -> Self {
        Self {
            az_cluster: AngularSpec::spherical_azimuth(),
            az_subray: AngularSpec::laplacian(0.0, 0.0),
            el_cluster: AngularSpec::spherical_elevation(),
            el_subray: AngularSpec::laplacian(0.0, 0.0),
        }
    }

    pub fn is_spherical(&self) -> bool {
        self.az_cluster.is_spherical() || self.el_cluster.is_spherical()
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let fields = [
            ("az_cluster", &self.az_cluster),
            ("az_subray", &self.az_subray),
            ("el_cluster", &self.el_cluster),
            ("el_subray", &self.el_subray),
        ];
        for (field, spec) in fields {
            spec.validate()
                .map_err(|source| ChannelError::Spec { field, source })?;
        }
        if self.is_spherical()
            && (self.az_cluster.family != AngularFamily::SphericalUniformAzimuth
                || self.el_cluster.family != AngularFamily::SphericalUniformElevation)
        {
            return Err(ChannelError::Scenario(
                "spherical-uniform rays need both az_cluster and el_cluster spherical".into(),
            ));
        }
        for (field, spec) in [
            ("az_subray", &self.az_subray),
            ("el_subray", &self.el_subray),
        ] {
            if spec.is_spherical() {
                return Err(ChannelError::Scenario(format!(
                    "{field} cannot be spherical-uniform"
                )));
            }
        }
        if self.az_cluster.family == AngularFamily::SphericalUniformElevation
            || self.el_cluster.family == AngularFamily::SphericalUniformAzimuth
        {
            return Err(ChannelError::Scenario(
                "spherical azimuth and elevation families are swapped".into(),
            ));
        }
        Ok(())
    }

    pub fn all_spreads_zero(&self) -> bool {
        [self.az_cluster, self.az_subray, self.el_cluster, self.el_subray]
            .iter()
            .all(AngularSpec::is_degenerate)
    }
}

/// How users find their visible clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingMode {
    /// Each user draws a uniform `C`-subset of a common pool of `C_T`
    /// clusters, so two given rays share a cluster with probability `1/C_T`.
    Pool,
    /// Each user gets `C` clusters of its own; no sharing.
    Disjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub angles: AngularProfile,
    pub total_clusters: usize,
    pub clusters_per_user: usize,
    pub subrays_per_cluster: usize,
    pub link_gains: [f64; 2],
    pub sharing: SharingMode,
}

impl ScenarioConfig {
    /// Pooled sharing with unit link gains.
    pub fn pooled(angles: AngularProfile, total_clusters: usize, c: usize, s: usize) -> Self {
        Self {
            angles,
            total_clusters,
            clusters_per_user: c,
            subrays_per_cluster: s,
            link_gains: [1.0, 1.0],
            sharing: SharingMode::Pool,
        }
    }

    /// No sharing; `total_clusters` is set to the `2 C` clusters of a drop.
    pub fn disjoint(angles: AngularProfile, c: usize, s: usize) -> Self {
        Self {
            angles,
            total_clusters: 2 * c,
            clusters_per_user: c,
            subrays_per_cluster: s,
            link_gains: [1.0, 1.0],
            sharing: SharingMode::Disjoint,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        self.angles.validate()?;
        let c = self.clusters_per_user;
        if c == 0 || self.subrays_per_cluster == 0 {
            return Err(ChannelError::Scenario(
                "clusters_per_user and subrays_per_cluster must be >= 1".into(),
            ));
        }
        if self.sharing == SharingMode::Pool && !(1..=self.total_clusters).contains(&c) {
            return Err(ChannelError::Scenario(format!(
                "clusters_per_user {c} must lie in 1..={}",
                self.total_clusters
            )));
        }
        if let Some(b) = self.link_gains.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(ChannelError::Scenario(format!(
                "link gains must be positive, got {b}"
            )));
        }
        Ok(())
    }

    /// Probability that two given rays of different users share a cluster.
    pub fn sharing_probability(&self) -> f64 {
        if self.angles.is_spherical() {
            return 0.0;
        }
        match self.sharing {
            SharingMode::Pool => 1.0 / self.total_clusters as f64,
            SharingMode::Disjoint => 0.0,
        }
    }

    /// Number of clusters in a drop.
    pub fn drop_size(&self) -> usize {
        if self.angles.is_spherical() {
            return 0;
        }
        match self.sharing {
            SharingMode::Pool => self.total_clusters,
            SharingMode::Disjoint => 2 * self.clusters_per_user,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drop {
    pub id: u64,
    pub seed: u64,
    pub central_angles: Vec<RayAngles>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RayOrigin {
    Cluster {
        index: usize,
        az_offset: f64,
        el_offset: f64,
    },
    /// Angles drawn directly, outside any cluster.
    Free(RayAngles),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: RayOrigin,
    pub phase: f64,
    pub power: f64,
}

impl Ray {
    pub fn angles(&self, drop: &Drop) -> RayAngles {
        match self.origin {
            RayOrigin::Cluster {
                index,
                az_offset,
                el_offset,
            } => {
                let c = drop.central_angles[index];
                RayAngles::new(c.azimuth + az_offset, c.elevation + el_offset)
            }
            RayOrigin::Free(a) => a,
        }
    }

    pub fn cluster(&self) -> Option<usize> {
        match self.origin {
            RayOrigin::Cluster { index, .. } => Some(index),
            RayOrigin::Free(_) => None,
        }
    }

    pub fn coefficient(&self) -> Complex64 {
        Complex64::from_polar(self.power.sqrt(), self.phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserChannelParams {
    pub drop_id: u64,
    pub user: u8,
    /// Sorted cluster indices into the drop.
    pub visible: Vec<usize>,
    /// Grouped by visible cluster, `S` rays each.
    pub rays: Vec<Ray>,
}

impl UserChannelParams {
    pub fn total_power(&self) -> f64 {
        self.rays.iter().map(|r| r.power).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub drop_id: u64,
    pub user: u8,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub h: Vec<Complex64>,
    pub provenance: Provenance,
}

/// One draw of an angular variable. Point masses return `mean` exactly.
pub fn sample_angle<R: Rng + ?Sized>(spec: &AngularSpec, rng: &mut R) -> f64 {
    match spec.family {
        AngularFamily::Gaussian => {
            let z: f64 = rng.sample(StandardNormal);
            spec.mean + spec.spread * z
        }
        AngularFamily::Laplacian => {
            let a: f64 = rng.sample(Exp1);
            let b: f64 = rng.sample(Exp1);
            spec.mean + spec.spread * (a - b)
        }
        AngularFamily::SphericalUniformAzimuth => PI - 2.0 * PI * rng.random::<f64>(),
        AngularFamily::SphericalUniformElevation => (1.0 - 2.0 * rng.random::<f64>()).acos(),
    }
}

pub fn sample_drop<R: Rng + ?Sized>(
    scenario: &ScenarioConfig,
    id: u64,
    seed: u64,
    rng: &mut R,
) -> Result<Drop, ChannelError> {
    scenario.validate()?;
    let p = &scenario.angles;
    let central_angles = (0..scenario.drop_size())
        .map(|_| {
            let az = sample_angle(&p.az_cluster, rng);
            let el = sample_angle(&p.el_cluster, rng);
            RayAngles::new(az, el)
        })
        .collect();
    Ok(Drop {
        id,
        seed,
        central_angles,
    })
}

/// Uniform random `C`-subset of the cluster pool, sorted.
pub fn assign_clusters<R: Rng + ?Sized>(
    scenario: &ScenarioConfig,
    rng: &mut R,
) -> Result<Vec<usize>, ChannelError> {
    let (c, ct) = (scenario.clusters_per_user, scenario.total_clusters);
    if c > ct {
        return Err(ChannelError::Scenario(format!(
            "clusters_per_user {c} exceeds total_clusters {ct}"
        )));
    }
    let mut v = index::sample(rng, ct, c).into_vec();
    v.sort_unstable();
    Ok(v)
}

/// Visible clusters of `user` under the scenario's sharing mode.
pub fn visible_clusters<R: Rng + ?Sized>(
    scenario: &ScenarioConfig,
    user: u8,
    rng: &mut R,
) -> Result<Vec<usize>, ChannelError> {
    if scenario.angles.is_spherical() {
        return Ok(Vec::new());
    }
    match scenario.sharing {
        SharingMode::Pool => assign_clusters(scenario, rng),
        SharingMode::Disjoint => {
            if user > 1 {
                return Err(ChannelError::Scenario(
                    "disjoint sharing is defined for two users".into(),
                ));
            }
            let c = scenario.clusters_per_user;
            let start = usize::from(user) * c;
            Ok((start..start + c).collect())
        }
    }
}

/// Offsets come from `offsets_rng`, phases from `phases_rng`. Spherical
/// scenarios draw free ray angles from `offsets_rng` and ignore `visible`.
pub fn sample_user_params<R1, R2>(
    drop: &Drop,
    user: u8,
    visible: &[usize],
    scenario: &ScenarioConfig,
    offsets_rng: &mut R1,
    phases_rng: &mut R2,
) -> Result<UserChannelParams, ChannelError>
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    scenario.validate()?;
    let p = &scenario.angles;
    let (c, s) = (scenario.clusters_per_user, scenario.subrays_per_cluster);
    let beta = scenario.link_gains[usize::from(user).min(1)];
    let power = beta / (c * s) as f64;
    let mut rays = Vec::with_capacity(c * s);
    let phase = |rng: &mut R2| 2.0 * PI * rng.random::<f64>();
    if p.is_spherical() {
        for _ in 0..c * s {
            let az = sample_angle(&p.az_cluster, offsets_rng);
            let el = sample_angle(&p.el_cluster, offsets_rng);
            rays.push(Ray {
                origin: RayOrigin::Free(RayAngles::new(az, el)),
                phase: phase(phases_rng),
                power,
            });
        }
    } else {
        if visible.len() != c {
            return Err(ChannelError::Scenario(format!(
                "expected {c} visible clusters, got {}",
                visible.len()
            )));
        }
        for &index in visible {
            if index >= drop.central_angles.len() {
                return Err(ChannelError::VisibleOutOfRange {
                    index,
                    available: drop.central_angles.len(),
                });
            }
            for _ in 0..s {
                let az_offset = sample_angle(&p.az_subray, offsets_rng);
                let el_offset = sample_angle(&p.el_subray, offsets_rng);
                rays.push(Ray {
                    origin: RayOrigin::Cluster {
                        index,
                        az_offset,
                        el_offset,
                    },
                    phase: phase(phases_rng),
                    power,
                });
            }
        }
    }
    Ok(UserChannelParams {
        drop_id: drop.id,
        user,
        visible: visible.to_vec(),
        rays,
    })
}

pub fn synth_channel(
    geom: &ArrayGeometry,
    drop: &Drop,
    params: &UserChannelParams,
) -> Result<ChannelRealization, ChannelError> {
    geom.validate()?;
    if params.drop_id != drop.id {
        return Err(ChannelError::DropMismatch {
            expected: drop.id,
            got: params.drop_id,
        });
    }
    let m = geom.num_antennas();
    let mut h = vec![Complex64::new(0.0, 0.0); m];
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for ray in &params.rays {
        geom.steering_into(ray.angles(drop), &mut a);
        let g = ray.coefficient();
        for (hi, ai) in h.iter_mut().zip(&a) {
            *hi += g * ai;
        }
    }
    Ok(ChannelRealization {
        h,
        provenance: Provenance {
            drop_id: drop.id,
            user: params.user,
            seed: drop.seed,
        },
    })
}

/// Drop and per-user parameters of Monte-Carlo sample `sample`, each piece
/// drawn from its own substream.
pub fn sample_users(
    scenario: &ScenarioConfig,
    seed: u64,
    sample: u64,
    n_users: u8,
) -> Result<(Drop, Vec<UserChannelParams>), ChannelError> {
    let mut rng = substream(seed, sample, 0, Purpose::CentralAngles);
    let drop = sample_drop(scenario, sample, seed, &mut rng)?;
    let users = (0..n_users)
        .map(|u| {
            let mut vis_rng = substream(seed, sample, u, Purpose::Visibility);
            let visible = visible_clusters(scenario, u, &mut vis_rng)?;
            let purpose = if scenario.angles.is_spherical() {
                Purpose::FreeRays
            } else {
                Purpose::Offsets
            };
            let mut off_rng = substream(seed, sample, u, purpose);
            let mut ph_rng = substream(seed, sample, u, Purpose::Phases);
            sample_user_params(&drop, u, &visible, scenario, &mut off_rng, &mut ph_rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((drop, users))
}
