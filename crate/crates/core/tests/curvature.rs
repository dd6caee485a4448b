#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use schouten_core::conformal::total_sigma2;
use schouten_core::curvature::*;
use schouten_core::expr::parse;
use schouten_core::grid::{integrate, ChartGrid, ScalarField};
use schouten_core::verify::refinement;

fn ricci_gap(a: &Geometry, b: &Geometry) -> (f64, f64) {
    let ginv = a.metric.inverse().unwrap();
    let mut ric: f64 = 0.0;
    let mut r: f64 = 0.0;
    for i in 0..ginv.len() {
        let d = a.curvature.ricci.values()[i] - b.curvature.ricci.values()[i];
        ric = ric.max(d.norm_sq_with(&ginv[i]).sqrt());
        r = r.max((a.curvature.scalar.values()[i] - b.curvature.scalar.values()[i]).abs());
    }
    (ric, r)
}

fn round(n: usize) -> Geometry {
    catalog(&CatalogSpec::RoundS3 { radius: 1.0 }, &ChartGrid::s3_band(n).unwrap()).unwrap()
}

#[test]
fn engine_converges_at_order_two() {
    for spec in [
        CatalogSpec::BergerS3 { fiber_scale: 0.8 },
        CatalogSpec::ConformallyRoundS3 { w: parse("0.05*cos(2*r)").unwrap() },
        CatalogSpec::ConformallyRoundS3 { w: parse("0.2*cos(2*r) + 0.1*cos(4*r)").unwrap() },
    ] {
        let mut ric = vec![];
        let mut scal = vec![];
        for n in [32, 64, 128] {
            let grid = ChartGrid::s3_band(n).unwrap();
            let exact = catalog(&spec, &grid).unwrap();
            let fd = Geometry::from_metric(exact.metric.clone()).unwrap();
            let (a, b) = ricci_gap(&fd, &exact);
            ric.push((grid.h_max(), a));
            scal.push((grid.h_max(), b));
        }
        let (ric, scal) = (refinement(&ric), refinement(&scal));
        assert!(ric.second_order(0.2) && scal.second_order(0.2), "{}: {ric:?} {scal:?}", spec.name());
    }
}

#[test]
fn engine_reproduces_the_round_sphere() {
    for n in [16, 64] {
        let exact = round(n);
        let fd = Geometry::from_metric(exact.metric.clone()).unwrap();
        let (a, b) = ricci_gap(&fd, &exact);
        assert!(a < 1e-12 && b < 1e-12, "{a} {b}");
        let ginv = fd.metric.inverse().unwrap();
        for i in 0..ginv.len() {
            let two_g = fd.metric.values()[i] * 2.0;
            assert!((fd.curvature.ricci.values()[i] - two_g).norm_sq_with(&ginv[i]).sqrt() < 1e-12);
        }
    }
}

#[test]
fn round_sphere_q_curvature() {
    let geo = round(32);
    let q = q_curvature(&geo).unwrap();
    assert!(q.values().iter().all(|v| (v - 15.0 / 8.0).abs() < 1e-6));
    let r = &geo.curvature.scalar;
    assert!(q.values().iter().zip(r.values()).all(|(q, r)| (q - r * r / 48.0 - 9.0 / 8.0).abs() < 1e-6));
    let fd = Geometry::from_metric(geo.metric.clone()).unwrap();
    let qe = q_curvature(&fd).unwrap();
    assert!(qe.values().iter().all(|v| (v - 15.0 / 8.0).abs() < 1e-6));
}

#[test]
fn round_sphere_sigma2_arithmetic() {
    let geo = round(64);
    let s2 = total_sigma2(&geo).unwrap();
    assert!((s2 - 1.5 * PI * PI).abs() < 1e-6, "{s2}");
    let r2 = integrate(&geo.curvature.scalar.map(|r| r * r), &geo.metric).unwrap();
    assert!((s2 - r2 / 128.0 - 15.0 * PI * PI / 16.0).abs() < 1e-6);
    let a2 = schouten_t(&geo.curvature, &geo.metric, 2.0 / 3.0).unwrap();
    let spec = sigma_spectrum(&a2, &geo.metric).unwrap();
    assert!(spec.iter().all(|c| c.in_cone && (c.sigma2 - 3.0).abs() < 1e-12));
}

#[test]
fn dual_sigma2_formula_at_every_node() {
    for spec in [CatalogSpec::BergerS3 { fiber_scale: 0.6 }, CatalogSpec::ConformallyRoundS3 { w: parse("0.3*cos(2*r)").unwrap() }] {
        let geo = catalog(&spec, &ChartGrid::s3_band(24).unwrap()).unwrap();
        let a1 = schouten_t(&geo.curvature, &geo.metric, 1.0).unwrap();
        let spec = sigma_spectrum(&a1, &geo.metric).unwrap();
        let norms = sigma2_via_norms(&geo.curvature, &geo.metric).unwrap();
        for (c, v) in spec.iter().zip(norms.values()) {
            assert!((c.sigma2 - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }
}

#[test]
fn paneitz_on_round_sphere_spherical_harmonics() {
    // Degree-k harmonics satisfy Δ = −k(k+2); P = Δ² + ½Δ − 15/16 there.
    let mut gaps = vec![];
    for n in [32, 64, 128] {
        let geo = round(n);
        let one = paneitz_apply(&geo, &ScalarField::constant(*geo.grid(), 1.0)).unwrap();
        assert!(one.values().iter().all(|v| (v + 15.0 / 16.0).abs() < 1e-12));
        let phi = ScalarField::from_fn(*geo.grid(), |x| (2.0 * x[0]).cos());
        let p = paneitz_apply(&geo, &phi).unwrap();
        let lambda = 64.0 - 4.0 - 15.0 / 16.0;
        let gap = p.values().iter().zip(phi.values()).map(|(p, f)| (p - lambda * f).abs()).fold(0.0, f64::max);
        gaps.push((geo.grid().h_max(), gap));
    }
    let r = refinement(&gaps);
    assert!(r.second_order(0.2), "{r:?}");
}

#[test]
fn paneitz_is_conformally_covariant() {
    // g̃ = ρ⁻⁴ g with ρ = e^{w/2}: P_g̃(φ) = ρ⁷ P_g(ρ φ).
    let mut gaps = vec![];
    for n in [32, 64, 128] {
        let grid = ChartGrid::s3_band(n).unwrap();
        let g = round(n);
        let w = "0.1*cos(2*r) - 0.05*cos(4*r)";
        let gt = catalog(&CatalogSpec::ConformallyRoundS3 { w: parse(w).unwrap() }, &grid).unwrap();
        let rho = ScalarField::from_fn(grid, |x| (0.5 * (0.1 * (2.0 * x[0]).cos() - 0.05 * (4.0 * x[0]).cos())).exp());
        let phi = ScalarField::from_fn(grid, |x| 1.0 + 0.5 * (2.0 * x[0]).cos() + 0.2 * (6.0 * x[0]).cos());
        let lhs = paneitz_apply(&gt, &phi).unwrap();
        let rphi = rho.zip_map(&phi, |a, b| a * b).unwrap();
        let rhs = paneitz_apply(&g, &rphi).unwrap();
        let mut gap: f64 = 0.0;
        for i in 0..grid.len() {
            gap = gap.max((lhs.values()[i] - rho.values()[i].powi(7) * rhs.values()[i]).abs());
        }
        gaps.push((grid.h_max(), gap));
    }
    let r = refinement(&gaps);
    assert!(r.second_order(0.3), "{r:?}");
}
