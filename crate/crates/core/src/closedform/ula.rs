//! ULA series.
//!
//! With `z = 2π d_x Δ` for antenna offset `Δ`, a ray contributes
//! `E[e^{jz sin φ}] = sum_n J_n(z) E[e^{jnφ}]`. Distinct clusters give
//! `|g(z)|^2` with `g(z) = sum_n J_n(z) χ_c(n) χ_s(n)`; a shared cluster gives
//! `sum_d χ_c(d) sum_n p_n conj(p_{n-d})` with `p_n = χ_s(n) J_n(z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::window::{clip, Envelope};
use super::{bessel_tol, CfTable, ClosedFormError, KTerm, SeriesOrders};
use crate::channel::AngularProfile;
use crate::specfun::{bessel_order_limit, BesselTable, TruncationPolicy};
use crate::sum::NeumaierSum;

struct Windows {
    kc: usize,
    cluster: usize,
    subray: usize,
}

struct Tables {
    both: CfTable,
    cluster: CfTable,
    subray: CfTable,
    real: bool,
}

struct OffsetTerm {
    g2: f64,
    ks: Complex64,
    orders_c: SeriesOrders,
    orders_s: SeriesOrders,
    clipped_c: bool,
    clipped_s: bool,
}

fn natural_windows(profile: &AngularProfile, tol: f64) -> Windows {
    let both = Envelope::of(&[&profile.az_cluster, &profile.az_subray]);
    let cluster = Envelope::of(&[&profile.az_cluster]).window(tol);
    let subray = Envelope::of(&[&profile.az_subray])
        .squared()
        .window(tol)
        .saturating_add(cluster);
    Windows {
        kc: both.window(tol),
        cluster,
        subray,
    }
}

fn tables(profile: &AngularProfile, w: &Windows, trunc: &TruncationPolicy, zmax: f64) -> Result<Tables, ClosedFormError> {
    let p = bessel_order_limit(zmax, bessel_tol(trunc));
    let cap = |nat: usize, support: usize| clip(nat, support, trunc.max_order).order;
    let cluster = CfTable::new(&profile.az_cluster, cap(w.cluster, 2 * p))?;
    let subray = CfTable::new(&profile.az_subray, cap(w.subray, p))?;
    let both = CfTable::product(
        &CfTable::new(&profile.az_cluster, cap(w.kc, p))?,
        &CfTable::new(&profile.az_subray, cap(w.kc, p))?,
    );
    let real = profile.az_cluster.mean == 0.0 && profile.az_subray.mean == 0.0;
    Ok(Tables {
        both,
        cluster,
        subray,
        real,
    })
}

fn offset_term(z: f64, w: &Windows, t: &Tables, trunc: &TruncationPolicy, want_ks: bool) -> OffsetTerm {
    let table = BesselTable::with_tolerance(z, bessel_tol(trunc));
    let p = table.limit();
    let nc = clip(w.kc, p, trunc.max_order);
    let g: Complex64 = (-(nc.order as i64)..=nc.order as i64)
        .map(|n| t.both.get(n) * table.get(n))
        .sum();
    let mut term = OffsetTerm {
        g2: g.norm_sqr(),
        ks: Complex64::new(0.0, 0.0),
        orders_c: SeriesOrders {
            azimuth: nc.order,
            ..Default::default()
        },
        orders_s: SeriesOrders::default(),
        clipped_c: nc.clipped,
        clipped_s: false,
    };
    if !want_ks {
        return term;
    }
    let dw = clip(w.cluster, 2 * p, trunc.max_order);
    let nw = clip(w.subray, p, trunc.max_order);
    let (d, ns) = (dw.order as i64, nw.order as i64);
    term.orders_s = SeriesOrders {
        azimuth: dw.order,
        subray: nw.order,
        elevation: 0,
    };
    term.clipped_s = dw.clipped || nw.clipped;
    // p_n for n in -ns..=ns, index n + ns
    let len = (2 * ns + 1) as usize;
    if t.real {
        let pv: Vec<f64> = (-ns..=ns).map(|n| t.subray.get(n).re * table.get(n)).collect();
        let r0: f64 = pv.iter().map(|x| x * x).sum();
        let mut acc = NeumaierSum::new();
        acc.add(t.cluster.get(0).re * r0);
        for dd in 1..=d.min(2 * ns) {
            let du = dd as usize;
            let r: f64 = pv[du..].iter().zip(&pv[..len - du]).map(|(a, b)| a * b).sum();
            acc.add(2.0 * t.cluster.get(dd).re * r);
        }
        term.ks = Complex64::new(acc.value(), 0.0);
    } else {
        let pv: Vec<Complex64> = (-ns..=ns).map(|n| t.subray.get(n) * table.get(n)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for dd in -d.min(2 * ns)..=d.min(2 * ns) {
            // sum over n with n and n - dd both inside the window
            let lo = (-ns).max(dd - ns);
            let hi = ns.min(dd + ns);
            let r: Complex64 = (lo..=hi)
                .map(|n| pv[(n + ns) as usize] * pv[(n - dd + ns) as usize].conj())
                .sum();
            acc += t.cluster.get(dd) * r;
        }
        term.ks = acc;
    }
    term
}

fn offset_terms(
    m: usize,
    dx: f64,
    profile: &AngularProfile,
    trunc: &TruncationPolicy,
    want_ks: bool,
) -> Result<Vec<OffsetTerm>, ClosedFormError> {
    let w = natural_windows(profile, trunc.rel_tol);
    let zmax = 2.0 * PI * dx * (m - 1) as f64;
    let t = tables(profile, &w, trunc, zmax)?;
    Ok((1..m)
        .into_par_iter()
        .map(|delta| offset_term(2.0 * PI * dx * delta as f64, &w, &t, trunc, want_ks))
        .collect())
}

fn summarize(terms: &[OffsetTerm]) -> (SeriesOrders, SeriesOrders, bool, bool, f64) {
    let mut oc = SeriesOrders::default();
    let mut os = SeriesOrders::default();
    let (mut cc, mut cs, mut resid) = (false, false, 0.0f64);
    for t in terms {
        oc.merge(&t.orders_c);
        os.merge(&t.orders_s);
        cc |= t.clipped_c;
        cs |= t.clipped_s;
        resid = resid.max(t.ks.im.abs());
    }
    (oc, os, cc, cs, resid)
}

pub(super) fn k_terms(
    m: usize,
    dx: f64,
    profile: &AngularProfile,
    trunc: &TruncationPolicy,
    want_ks: bool,
) -> Result<(KTerm, KTerm), ClosedFormError> {
    let terms = offset_terms(m, dx, profile, trunc, want_ks)?;
    let mf = m as f64;
    let weighted = |f: &dyn Fn(&OffsetTerm) -> f64| {
        let mut s = NeumaierSum::new();
        s.add(mf);
        for (i, t) in terms.iter().enumerate() {
            s.add(2.0 * (mf - (i + 1) as f64) * f(t));
        }
        s.value() / (mf * mf)
    };
    let (oc, os, cc, cs, resid) = summarize(&terms);
    let kc = KTerm {
        value: weighted(&|t| t.g2),
        orders: oc,
        converged: !cc,
        imag_residual: 0.0,
    };
    let ks = if want_ks {
        KTerm {
            value: weighted(&|t| t.ks.re),
            orders: os,
            converged: !cs,
            imag_residual: resid,
        }
    } else {
        KTerm {
            value: f64::NAN,
            orders: os,
            converged: false,
            imag_residual: 0.0,
        }
    };
    Ok((kc, ks))
}

pub(super) fn nu(
    m: usize,
    dx: f64,
    profile: &AngularProfile,
    trunc: &TruncationPolicy,
) -> Result<KTerm, ClosedFormError> {
    if m == 1 || (profile.az_cluster.is_degenerate() && profile.az_subray.is_degenerate()) {
        // every |E[.]|^2 is 1
        let value = (m - 1) as f64 / 2.0;
        return Ok(KTerm {
            value,
            orders: SeriesOrders::default(),
            converged: true,
            imag_residual: 0.0,
        });
    }
    let terms = offset_terms(m, dx, profile, trunc, false)?;
    let mf = m as f64;
    let value = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (1.0 - (i + 1) as f64 / mf) * t.g2)
        .collect::<NeumaierSum>()
        .value();
    let (oc, _, cc, _, _) = summarize(&terms);
    Ok(KTerm {
        value,
        orders: oc,
        converged: !cc,
        imag_residual: 0.0,
    })
}
