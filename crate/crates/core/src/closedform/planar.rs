//! HURA and UCA series.
//!
//! Both arrays lie in the azimuth plane. For an antenna pair with phase
//! separation `R` and direction `α`, a ray contributes
//! `E[e^{jR sin θ sin(φ + α)}] = sum_n e^{jnα} E[e^{jnφ}] sum_k B_{n,k}(R) E[e^{jkε}]`
//! with `ε = θ - π/2` and `B_{n,k}(R) = J_{(n+k)/2}(R/2) J_{(n-k)/2}(R/2)`.
//! `B_{n,k}` vanishes outside the diamond `|n| + |k| <= 2P`, `P` being the
//! Bessel support at `R/2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::window::{clip, Envelope};
use super::{bessel_tol, CfTable, ClosedFormError, KTerm, SeriesOrders};
use crate::channel::AngularProfile;
use crate::geometry::ArrayGeometry;
use crate::specfun::{bessel_order_limit, BesselTable, TruncationPolicy};
use crate::sum::NeumaierSum;

/// One antenna pair, standing for `multiplicity` ordered pairs with the
/// same phase separation up to `α -> α + π`, under which the pair terms
/// are invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPhaseTerm {
    /// Position difference in wavelengths.
    pub z1: f64,
    pub z2: f64,
    /// `2π sqrt(z1^2 + z2^2)`.
    pub z_t: f64,
    /// `atan2(z1, z2)`.
    pub alpha: f64,
    pub multiplicity: usize,
}

/// Off-diagonal antenna pairs of a planar array, folded by symmetry.
/// Empty for a ULA.
pub fn pair_terms(geom: &ArrayGeometry) -> Vec<PairPhaseTerm> {
    match *geom {
        ArrayGeometry::Ula { .. } => Vec::new(),
        ArrayGeometry::Hura { mx, my, dx, dy } => {
            let mut out = Vec::new();
            for ix in 0..mx as i64 {
                for iy in -(my as i64 - 1)..my as i64 {
                    if ix == 0 && iy <= 0 {
                        continue;
                    }
                    let (z1, z2) = (dx * ix as f64, dy * iy as f64);
                    let mult = 2 * (mx - ix as usize) * (my - iy.unsigned_abs() as usize);
                    out.push(PairPhaseTerm {
                        z1,
                        z2,
                        z_t: 2.0 * PI * z1.hypot(z2),
                        alpha: z1.atan2(z2),
                        multiplicity: mult,
                    });
                }
            }
            out
        }
        ArrayGeometry::Uca { m, dr } => {
            let radius = dr / (2.0 * (PI / m as f64).sin());
            let pos: Vec<(f64, f64)> = (0..m)
                .map(|i| {
                    let psi = 2.0 * PI * i as f64 / m as f64;
                    (radius * psi.cos(), radius * psi.sin())
                })
                .collect();
            let mut out = Vec::with_capacity(m * (m - 1) / 2);
            for a in 0..m {
                for b in a + 1..m {
                    let (z1, z2) = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
                    out.push(PairPhaseTerm {
                        z1,
                        z2,
                        z_t: uca_separation(m, dr, b - a),
                        alpha: z1.atan2(z2),
                        multiplicity: 2,
                    });
                }
            }
            out
        }
    }
}

/// Phase separation of UCA elements `step` apart, from the chord length.
fn uca_separation(m: usize, dr: f64, step: usize) -> f64 {
    2.0 * ArrayGeometry::uca_phase_scale(m, dr) * (PI * step as f64 / m as f64).sin()
}

struct Group {
    z_t: f64,
    pairs: Vec<(f64, usize)>,
}

fn groups(geom: &ArrayGeometry) -> Vec<Group> {
    let mut map: BTreeMap<u64, Group> = BTreeMap::new();
    for t in pair_terms(geom) {
        map.entry(t.z_t.to_bits())
            .or_insert_with(|| Group {
                z_t: t.z_t,
                pairs: Vec::new(),
            })
            .pairs
            .push((t.alpha, t.multiplicity));
    }
    map.into_values().collect()
}

struct Natural {
    kc_az: usize,
    kc_el: usize,
    ks_d: usize,
    ks_n: usize,
    ks_el: usize,
}

struct Tables {
    kc_az: CfTable,
    kc_el: CfTable,
    cluster_az: CfTable,
    subray_az: CfTable,
    subray_el: CfTable,
    cluster_el: CfTable,
    cluster_el_real: bool,
}

struct GroupResult {
    kc: f64,
    ks: f64,
    kc_orders: SeriesOrders,
    ks_orders: SeriesOrders,
    kc_clipped: bool,
    ks_clipped: bool,
    resid: f64,
}

fn natural(profile: &AngularProfile, tol: f64) -> Natural {
    let p = profile;
    let ks_d = Envelope::of(&[&p.az_cluster]).window(tol);
    Natural {
        kc_az: Envelope::of(&[&p.az_cluster, &p.az_subray]).window(tol),
        kc_el: Envelope::of(&[&p.el_cluster, &p.el_subray]).window(tol),
        ks_d,
        ks_n: Envelope::of(&[&p.az_subray])
            .squared()
            .window(tol)
            .saturating_add(ks_d),
        ks_el: Envelope::of(&[&p.el_subray]).window(tol),
    }
}

fn tables(profile: &AngularProfile, w: &Natural, trunc: &TruncationPolicy, rmax: f64) -> Result<Tables, ClosedFormError> {
    let l = 2 * bessel_order_limit(rmax / 2.0, bessel_tol(trunc));
    let cap = |nat: usize, support: usize| clip(nat, support, trunc.max_order).order;
    let p = profile;
    let kc_az = CfTable::product(
        &CfTable::new(&p.az_cluster, cap(w.kc_az, l))?,
        &CfTable::new(&p.az_subray, cap(w.kc_az, l))?,
    );
    let kc_el = CfTable::centred_sum(&p.el_cluster, &p.el_subray, cap(w.kc_el, l))?;
    let ks_el = cap(w.ks_el, l);
    let cluster_el = CfTable::centred(&p.el_cluster, 2 * ks_el)?;
    Ok(Tables {
        kc_az,
        kc_el,
        cluster_az: CfTable::new(&p.az_cluster, cap(w.ks_d, 2 * l))?,
        subray_az: CfTable::new(&p.az_subray, cap(w.ks_n, l))?,
        subray_el: CfTable::new(&p.el_subray, ks_el)?,
        cluster_el_real: cluster_el.is_real(),
        cluster_el,
    })
}

#[inline]
fn b_coef(t: &BesselTable, n: i64, k: i64) -> f64 {
    debug_assert_eq!((n - k).rem_euclid(2), 0);
    t.get((n + k) / 2) * t.get((n - k) / 2)
}

/// `sum_i x_i c_i` with four independent accumulators.
fn real_dot(x: &[f64], c: &[Complex64]) -> Complex64 {
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let xc = x.chunks_exact(4);
    let cc = c.chunks_exact(4);
    let (xr, cr) = (xc.remainder(), cc.remainder());
    for (xs, cs) in xc.zip(cc) {
        for i in 0..4 {
            re[i] += xs[i] * cs[i].re;
            im[i] += xs[i] * cs[i].im;
        }
    }
    let mut out = Complex64::new(
        (re[0] + re[1]) + (re[2] + re[3]),
        (im[0] + im[1]) + (im[2] + im[3]),
    );
    for (x, c) in xr.iter().zip(cr) {
        out += x * c;
    }
    out
}

/// Per-pair weights `e^{jnα}` for `|n| <= half`.
fn phasors(alpha: f64, half: i64) -> impl Iterator<Item = (i64, Complex64)> {
    (-half..=half).map(move |n| (n, Complex64::cis(n as f64 * alpha)))
}

fn eval_group(g: &Group, w: &Natural, t: &Tables, trunc: &TruncationPolicy, want_ks: bool) -> GroupResult {
    let table = BesselTable::with_tolerance(g.z_t / 2.0, bessel_tol(trunc));
    let l = 2 * table.limit();
    let li = l as i64;

    // K_c: A_n = χ_az(n) sum_k χ_el(k) B_{n,k}
    let nc = clip(w.kc_az, l, trunc.max_order);
    let kc_el = clip(w.kc_el, l, trunc.max_order);
    let nci = nc.order as i64;
    let a: Vec<Complex64> = (-nci..=nci)
        .map(|n| {
            let kmax = (kc_el.order as i64).min(li - n.abs());
            let mut s = Complex64::new(0.0, 0.0);
            let mut k = -kmax + (n - kmax).rem_euclid(2);
            while k <= kmax {
                s += t.kc_el.get(k) * b_coef(&table, n, k);
                k += 2;
            }
            t.kc_az.get(n) * s
        })
        .collect();
    let mut kc = NeumaierSum::new();
    for &(alpha, mult) in &g.pairs {
        let gsum: Complex64 = phasors(alpha, nci).map(|(n, e)| e * a[(n + nci) as usize]).sum();
        kc.add(mult as f64 * gsum.norm_sqr());
    }
    let mut res = GroupResult {
        kc: kc.value(),
        ks: 0.0,
        kc_orders: SeriesOrders {
            azimuth: nc.order,
            subray: 0,
            elevation: kc_el.order,
        },
        ks_orders: SeriesOrders::default(),
        kc_clipped: nc.clipped || kc_el.clipped,
        ks_clipped: false,
        resid: 0.0,
    };
    if !want_ks {
        return res;
    }

    let dw = clip(w.ks_d, 2 * l, trunc.max_order);
    let nw = clip(w.ks_n, l, trunc.max_order);
    let kw = clip(w.ks_el, l, trunc.max_order);
    res.ks_orders = SeriesOrders {
        azimuth: dw.order,
        subray: nw.order,
        elevation: kw.order,
    };
    res.ks_clipped = dw.clipped || nw.clipped || kw.clipped;
    let (d, ns, ke) = (dw.order as i64, nw.order as i64, kw.order as i64);
    let d = d.min(2 * ns);
    let width = (2 * ke + 1) as usize;
    let row_k = |n: i64| ke.min(li - n.abs());

    // v_{n,k} = χ_s^el(k) B_{n,k}, dense rows over -ke..=ke
    let v: Vec<Vec<Complex64>> = (-ns..=ns)
        .map(|n| {
            let mut row = vec![Complex64::new(0.0, 0.0); width];
            let kmax = row_k(n);
            if kmax >= 0 {
                let mut k = -kmax + (n - kmax).rem_euclid(2);
                while k <= kmax {
                    row[(k + ke) as usize] = t.subray_el.get(k) * b_coef(&table, n, k);
                    k += 2;
                }
            }
            row
        })
        .collect();

    // u_{n'}(k) = sum_{k'} X(k - k') conj(v_{n',k'}), over the k reached by
    // rows within d of n'. X is split by parity so each u(k) is a contiguous
    // dot product.
    let xe = |par: i64| -> Vec<Complex64> {
        // X(e) for e ≡ par (mod 2), e ascending over -2ke-1..=2ke+1
        (-2 * ke - 1..=2 * ke + 1)
            .filter(|e| (e - par).rem_euclid(2) == 0)
            .map(|e| if e.abs() <= 2 * ke { t.cluster_el.get(e) } else { Complex64::new(0.0, 0.0) })
            .collect()
    };
    let x_par = [xe(0), xe(1)];
    let x_real: [Vec<f64>; 2] = [
        x_par[0].iter().map(|z| z.re).collect(),
        x_par[1].iter().map(|z| z.re).collect(),
    ];
    let real_kernel = t.cluster_el_real;
    // position of e in x_par[parity of e]
    let pos = |e: i64| ((e + 2 * ke + 1).div_euclid(2)) as usize;
    let u: Vec<Vec<Complex64>> = (-ns..=ns)
        .map(|np| {
            let mut row = vec![Complex64::new(0.0, 0.0); width];
            let own = row_k(np);
            if own < 0 {
                return row;
            }
            let reach = ke.min(li - (np.abs() - d).max(0));
            let vrow = &v[(np + ns) as usize];
            let start = -own + (np - own).rem_euclid(2);
            let count = ((own - start) / 2 + 1) as usize;
            // reversed conj row: rc[i] = conj v(start + 2 (count - 1 - i))
            let rc: Vec<Complex64> = (0..count)
                .rev()
                .map(|j| vrow[(start + 2 * j as i64 + ke) as usize].conj())
                .collect();
            for k in -reach..=reach {
                // e runs over k - start - 2 (count - 1) ..= k - start
                let e_lo = k - start - 2 * (count as i64 - 1);
                let par = e_lo.rem_euclid(2) as usize;
                let base = pos(e_lo);
                let s = if real_kernel {
                    real_dot(&x_real[par][base..base + count], &rc)
                } else {
                    let xs = &x_par[par][base..base + count];
                    xs.iter().zip(&rc).map(|(x, c)| x * c).sum()
                };
                row[(k + ke) as usize] = s;
            }
            row
        })
        .collect();

    // T_d = sum_n χ_s(n) conj χ_s(n-d) sum_k v_{n,k} u_{n-d}(k)
    let td: Vec<Complex64> = (-d..=d)
        .map(|dd| {
            let lo = (-ns).max(dd - ns);
            let hi = ns.min(dd + ns);
            let mut acc = Complex64::new(0.0, 0.0);
            for n in lo..=hi {
                let kmax = row_k(n);
                if kmax < 0 {
                    continue;
                }
                let vr = &v[(n + ns) as usize];
                let ur = &u[(n - dd + ns) as usize];
                let mut q = Complex64::new(0.0, 0.0);
                let mut k = -kmax + (n - kmax).rem_euclid(2);
                while k <= kmax {
                    let i = (k + ke) as usize;
                    q += vr[i] * ur[i];
                    k += 2;
                }
                acc += t.subray_az.get(n) * t.subray_az.get(n - dd).conj() * q;
            }
            acc
        })
        .collect();

    let mut ks = NeumaierSum::new();
    let mut resid = 0.0f64;
    for &(alpha, mult) in &g.pairs {
        let val: Complex64 = phasors(alpha, d)
            .map(|(dd, e)| t.cluster_az.get(dd) * e * td[(dd + d) as usize])
            .sum();
        resid = resid.max(val.im.abs());
        ks.add(mult as f64 * val.re);
    }
    res.ks = ks.value();
    res.resid = resid;
    res
}

pub(super) fn k_terms(
    geom: &ArrayGeometry,
    profile: &AngularProfile,
    trunc: &TruncationPolicy,
    want_ks: bool,
) -> Result<(KTerm, KTerm), ClosedFormError> {
    let m = geom.num_antennas() as f64;
    let gs = groups(geom);
    let rmax = gs.iter().map(|g| g.z_t).fold(0.0, f64::max);
    let w = natural(profile, trunc.rel_tol);
    let t = tables(profile, &w, trunc, rmax)?;
    let results: Vec<GroupResult> = gs
        .par_iter()
        .map(|g| eval_group(g, &w, &t, trunc, want_ks))
        .collect();

    let mut kc = NeumaierSum::new();
    let mut ks = NeumaierSum::new();
    kc.add(m);
    ks.add(m);
    let mut kc_orders = SeriesOrders::default();
    let mut ks_orders = SeriesOrders::default();
    let (mut kc_clip, mut ks_clip, mut resid) = (false, false, 0.0f64);
    for r in &results {
        kc.add(r.kc);
        ks.add(r.ks);
        kc_orders.merge(&r.kc_orders);
        ks_orders.merge(&r.ks_orders);
        kc_clip |= r.kc_clipped;
        ks_clip |= r.ks_clipped;
        resid = resid.max(r.resid);
    }
    let kc = KTerm {
        value: kc.value() / (m * m),
        orders: kc_orders,
        converged: !kc_clip,
        imag_residual: 0.0,
    };
    let ks = KTerm {
        value: if want_ks { ks.value() / (m * m) } else { f64::NAN },
        orders: ks_orders,
        converged: want_ks && !ks_clip,
        imag_residual: resid,
    };
    Ok((kc, ks))
}
