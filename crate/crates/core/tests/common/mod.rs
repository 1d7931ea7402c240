//! Shared helpers for the integration tests: scenario presets and a direct
//! numerical-integration oracle for `K_c` and `K_s`.

#![allow(dead_code)]

use std::f64::consts::PI;

use fpmimo::channel::AngularProfile;
use fpmimo::cli::ScenarioSpec;
use fpmimo::geometry::ArrayGeometry;
use fpmimo::specfun::{AngularFamily, AngularSpec};
use num_complex::Complex64;
use rayon::prelude::*;

pub fn scen1() -> AngularProfile {
    ScenarioSpec::Scen1.profile()
}

pub fn scen2() -> AngularProfile {
    ScenarioSpec::Scen2.profile()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Nodes and weights on [-1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// A one-dimensional rule `(x_i, w_i f(x_i))` for a density `f`.
pub struct Rule {
    pub nodes: Vec<(f64, f64)>,
}

const ORDER: usize = 10;

fn pdf(spec: &AngularSpec, x: f64) -> f64 {
    let d = x - spec.mean;
    match spec.family {
        AngularFamily::Gaussian => {
            (-0.5 * d * d / (spec.spread * spec.spread)).exp() / (spec.spread * (2.0 * PI).sqrt())
        }
        AngularFamily::Laplacian => (-d.abs() / spec.spread).exp() / (2.0 * spec.spread),
        _ => unreachable!("oracle covers Gaussian and Laplacian angles"),
    }
}

impl Rule {
    /// Composite Gauss-Legendre over the effective support of `spec`, split
    /// at the mean, with panels narrow enough for phases varying at `rate`
    /// per radian. Point masses give a single node.
    pub fn for_spec(spec: &AngularSpec, rate: f64) -> Self {
        if spec.spread == 0.0 {
            return Rule {
                nodes: vec![(spec.mean, 1.0)],
            };
        }
        let half = match spec.family {
            AngularFamily::Gaussian => 8.0 * spec.spread,
            _ => 12.0 * spec.spread,
        };
        let panels = ((half * rate.max(1.0) / 3.0).ceil() as usize).max(2);
        let h = half / panels as f64;
        let gl = gauss_legendre(ORDER);
        let mut nodes = Vec::with_capacity(2 * panels * ORDER);
        for p in 0..2 * panels {
            let a = spec.mean - half + p as f64 * h;
            for &(t, w) in &gl {
                let x = a + 0.5 * h * (t + 1.0);
                nodes.push((x, 0.5 * h * w * pdf(spec, x)));
            }
        }
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        for n in &mut nodes {
            n.1 /= total;
        }
        Rule { nodes }
    }
}

/// Antenna phase offsets `(q_x, q_y)` of unordered antenna pairs, so that
/// the pair's response ratio is `exp(j (q_x sinθ cosφ + q_y sinθ sinφ))`.
/// For the ULA `q_y` is unused and the phase is `q_x sin φ`.
fn pair_offsets(geom: &ArrayGeometry) -> Vec<(f64, f64)> {
    let pos: Vec<(f64, f64)> = match *geom {
        ArrayGeometry::Ula { m, dx } => (0..m).map(|i| (2.0 * PI * dx * i as f64, 0.0)).collect(),
        ArrayGeometry::Hura { mx, my, dx, dy } => (0..mx)
            .flat_map(|ix| (0..my).map(move |iy| (2.0 * PI * dx * ix as f64, 2.0 * PI * dy * iy as f64)))
            .collect(),
        ArrayGeometry::Uca { m, dr } => {
            // element radius in wavelengths is dr / (2 sin(π/M))
            let k = 2.0 * PI * dr / (2.0 * (PI / m as f64).sin());
            (0..m)
                .map(|i| {
                    let psi = 2.0 * PI * i as f64 / m as f64;
                    (k * psi.cos(), k * psi.sin())
                })
                .collect()
        }
    };
    let mut out = Vec::new();
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            out.push((pos[j].0 - pos[i].0, pos[j].1 - pos[i].1));
        }
    }
    out
}

/// `(K_c, K_s)` by integrating over the cluster and subray angles directly:
/// `K_c = (1/M^2) sum |E[r]|^2`, `K_s = (1/M^2) sum E_c |E_s[r | c]|^2` over
/// antenna pairs, where `r` is the pair's response ratio.
pub fn quadrature_k(geom: &ArrayGeometry, p: &AngularProfile) -> (f64, f64) {
    let offsets = pair_offsets(geom);
    let m = geom.num_antennas() as f64;
    let rate = offsets.iter().map(|o| o.0.hypot(o.1)).fold(0.0, f64::max);
    let ula = matches!(geom, ArrayGeometry::Ula { .. });
    let az_c = Rule::for_spec(&p.az_cluster, rate);
    let az_s = Rule::for_spec(&p.az_subray, rate);
    let (el_c, el_s) = if ula {
        let unit = AngularSpec::laplacian(PI / 2.0, 0.0);
        (Rule::for_spec(&unit, rate), Rule::for_spec(&AngularSpec::laplacian(0.0, 0.0), rate))
    } else {
        // near broadside the phase moves with cos(θ), which stays small
        let reach = 12.0 * (p.el_cluster.spread + p.el_subray.spread) + (p.el_cluster.mean - PI / 2.0).abs();
        let el_rate = rate * reach.min(PI / 2.0).sin();
        (Rule::for_spec(&p.el_cluster, el_rate), Rule::for_spec(&p.el_subray, el_rate))
    };
    if std::env::var_os("QUAD_VERBOSE").is_some() {
        eprintln!(
            "{geom:?}: nodes {} {} {} {}",
            az_c.nodes.len(),
            el_c.nodes.len(),
            az_s.nodes.len(),
            el_s.nodes.len()
        );
    }
    let outer: Vec<(f64, f64, f64)> = az_c
        .nodes
        .iter()
        .flat_map(|&(a, wa)| el_c.nodes.iter().map(move |&(e, we)| (a, e, wa * we)))
        .collect();
    let inner: Vec<(f64, f64, f64)> = az_s
        .nodes
        .iter()
        .flat_map(|&(a, wa)| el_s.nodes.iter().map(move |&(e, we)| (a, e, wa * we)))
        .collect();
    let zero = || (vec![Complex64::new(0.0, 0.0); offsets.len()], vec![0.0; offsets.len()]);
    let (mean, second) = outer
        .par_iter()
        .fold(zero, |(mut mean, mut second), &(ac, ec, wc)| {
            let mut cond = vec![Complex64::new(0.0, 0.0); offsets.len()];
            for &(as_, es, ws) in &inner {
                let (az, el) = (ac + as_, ec + es);
                let (ux, uy) = if ula {
                    (az.sin(), 0.0)
                } else {
                    (el.sin() * az.cos(), el.sin() * az.sin())
                };
                for (c, o) in cond.iter_mut().zip(&offsets) {
                    *c += ws * Complex64::cis(o.0 * ux + o.1 * uy);
                }
            }
            for (i, c) in cond.iter().enumerate() {
                mean[i] += wc * c;
                second[i] += wc * c.norm_sqr();
            }
            (mean, second)
        })
        .reduce(zero, |(mut m1, mut s1), (m2, s2)| {
            for i in 0..m1.len() {
                m1[i] += m2[i];
                s1[i] += s2[i];
            }
            (m1, s1)
        });
    let kc = (m + 2.0 * mean.iter().map(|z| z.norm_sqr()).sum::<f64>()) / (m * m);
    let ks = (m + 2.0 * second.iter().sum::<f64>()) / (m * m);
    (kc, ks)
}
