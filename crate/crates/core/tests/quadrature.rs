mod common;

use common::{quadrature_k, rel_err, scen1, scen2};
use fpmimo::channel::AngularProfile;
use fpmimo::closedform::k_pair;
use fpmimo::geometry::ArrayGeometry;
use fpmimo::specfun::TruncationPolicy;

fn check(geom: ArrayGeometry, profile: &AngularProfile, tol: f64) {
    let (qc, qs) = quadrature_k(&geom, profile);
    let pair = k_pair(&geom, profile, &TruncationPolicy::default()).unwrap();
    let (ec, es) = (rel_err(pair.kc.value, qc), rel_err(pair.ks.value, qs));
    assert!(ec < tol && es < tol, "{geom:?}: series ({}, {}) quadrature ({qc}, {qs})", pair.kc.value, pair.ks.value);
}

#[test]
fn ula_matches_quadrature() {
    for m in [2, 4, 8] {
        check(ArrayGeometry::ula(m, 0.5).unwrap(), &scen1(), 1e-4);
        check(ArrayGeometry::ula(m, 0.5).unwrap(), &scen2(), 1e-4);
    }
}

#[test]
fn hura_matches_quadrature() {
    check(ArrayGeometry::hura(2, 2, 0.5, 0.5).unwrap(), &scen1(), 1e-4);
    check(ArrayGeometry::hura(2, 4, 0.5, 0.5).unwrap(), &scen1(), 1e-4);
    check(ArrayGeometry::hura(2, 2, 0.5, 0.5).unwrap(), &scen2(), 1e-4);
}

#[test]
fn uca_matches_quadrature() {
    check(ArrayGeometry::uca(4, 0.5).unwrap(), &scen1(), 1e-4);
    check(ArrayGeometry::uca(8, 0.5).unwrap(), &scen1(), 1e-4);
    check(ArrayGeometry::uca(4, 0.5).unwrap(), &scen2(), 1e-4);
}

#[test]
fn nonzero_means_match_quadrature() {
    let mut p = scen1();
    p.az_cluster.mean = 0.4;
    p.el_cluster.mean = 1.3;
    check(ArrayGeometry::ula(6, 0.5).unwrap(), &p, 1e-4);
    check(ArrayGeometry::hura(2, 3, 0.5, 0.4).unwrap(), &p, 1e-4);
    check(ArrayGeometry::uca(5, 0.7).unwrap(), &p, 1e-4);
}
