use std::f64::consts::PI;

use schouten_core::conformal::*;
use schouten_core::curvature::{catalog, schouten_t, CatalogSpec, Geometry};
use schouten_core::grid::{ChartGrid, ScalarField};
use schouten_core::Error;

fn round(radius: f64, n: usize) -> Geometry {
    catalog(&CatalogSpec::RoundS3 { radius }, &ChartGrid::s3_band(n).unwrap()).unwrap()
}

fn constant(geo: &Geometry, c: f64) -> ScalarField {
    ScalarField::constant(*geo.grid(), c)
}

#[test]
fn total_sigma2_scales_inversely_with_radius() {
    for rho in [0.5, 1.0, 2.0] {
        let s = total_sigma2(&round(rho, 32)).unwrap();
        assert!((s - 1.5 * PI * PI / rho).abs() < 1e-9, "{rho}: {s}");
    }
    let torus = catalog(&CatalogSpec::FlatTorus, &ChartGrid::torus([8, 8, 8]).unwrap()).unwrap();
    assert_eq!(total_sigma2(&torus).unwrap(), 0.0);
}

#[test]
fn i_functional_values_and_homothety() {
    let geo = round(1.0, 32);
    let zero = ConformalFactor::zero(&geo);
    let i0 = i_functional(&geo, &zero).unwrap();
    assert!((i0 - 72.0 * PI * PI).abs() < 1e-8);
    for c in [-0.7, 0.3, 2.0] {
        let ic = i_functional(&geo, &ConformalFactor::on(constant(&geo, c), &geo).unwrap()).unwrap();
        assert!((ic - i0).abs() <= 1e-10 * i0);
    }
    // Homothety applied on top of a nonconstant factor.
    let phi = ScalarField::from_fn(*geo.grid(), |x| 0.1 * (2.0 * x[0]).cos());
    let base = i_functional(&geo, &ConformalFactor::on(phi.clone(), &geo).unwrap()).unwrap();
    let shifted = i_functional(&geo, &ConformalFactor::on(phi.map(|v| v + 0.4), &geo).unwrap()).unwrap();
    assert!((base - shifted).abs() <= 1e-10 * base);
    let torus = catalog(&CatalogSpec::FlatTorus, &ChartGrid::torus([8, 8, 8]).unwrap()).unwrap();
    assert_eq!(i_functional(&torus, &ConformalFactor::zero(&torus)).unwrap(), 0.0);
}

#[test]
fn estimate_filters_by_gradient_cap() {
    let geo = round(1.0, 32);
    let cands = vec![
        ("zero".to_string(), constant(&geo, 0.0)),
        ("shift".to_string(), constant(&geo, 0.5)),
        ("steep".to_string(), ScalarField::from_fn(*geo.grid(), |x| 3.0 * (2.0 * x[0]).cos())),
    ];
    let est = estimate_i(&geo, &cands, 1.0).unwrap();
    assert!((est.value - 72.0 * PI * PI).abs() < 1e-8);
    assert_eq!(est.samples[2].value, None);
    assert_eq!(est.warnings.len(), 1);
    assert!(est.warnings[0].contains("steep"));
    assert!(matches!(estimate_i(&geo, &cands[2..], 1.0), Err(Error::EmptyAdmissibleSet)));
}

#[test]
fn yamabe_quotient_of_round_sphere() {
    let want = 12.0 * PI * PI / (2.0 * PI * PI).cbrt();
    for rho in [1.0, 3.0] {
        let q = yamabe_quotient(&round(rho, 32)).unwrap();
        assert!((q - want).abs() <= 1e-10 * want, "{q}");
    }
    assert!((want - 43.82).abs() < 0.01);
}

#[test]
fn pinching_margin_on_round_sphere_and_torus() {
    let geo = round(1.0, 32);
    let rep = pinching_margin(&geo, 2.0 / 3.0, &[("zero".into(), constant(&geo, 0.0))], 1.0).unwrap();
    assert!((rep.mu_t - 1.6 * PI * PI).abs() < 1e-8, "{}", rep.mu_t);
    assert!(rep.hypothesis_met && rep.i_is_upper_bound);
    let torus = catalog(&CatalogSpec::FlatTorus, &ChartGrid::torus([8, 8, 8]).unwrap()).unwrap();
    let rep = pinching_margin(&torus, 2.0 / 3.0, &[("zero".into(), constant(&torus, 0.0))], 1.0).unwrap();
    assert_eq!(rep.mu_t, 0.0);
    assert!(!rep.hypothesis_met);
    assert!(pinching_margin(&geo, 0.7, &[("zero".into(), constant(&geo, 0.0))], 1.0).is_err());
}

#[test]
fn constant_factor_scales_curvature() {
    let geo = round(1.0, 16);
    let c = 0.25;
    let cf = ConformalFactor::on(constant(&geo, c), &geo).unwrap();
    let tilde = conformal_geometry(&geo, &cf).unwrap();
    for v in tilde.curvature.scalar.values() {
        assert!((v - 6.0 * (2.0 * c).exp()).abs() < 1e-12);
    }
    // A^t is invariant under homothety as a (0,2) tensor.
    let a = schouten_t(&geo.curvature, &geo.metric, 0.4).unwrap();
    let at = transform_schouten_t(&a, &cf, &geo.metric, 0.4).unwrap();
    for (x, y) in a.values().iter().zip(at.values()) {
        assert!((*x - *y).max_abs() < 1e-12);
    }
}

#[test]
fn zero_factor_is_the_identity() {
    let geo = catalog(&CatalogSpec::BergerS3 { fiber_scale: 0.8 }, &ChartGrid::s3_band(16).unwrap()).unwrap();
    let tilde = conformal_geometry(&geo, &ConformalFactor::zero(&geo)).unwrap();
    assert_eq!(tilde.metric.values(), geo.metric.values());
    assert_eq!(tilde.curvature.scalar.values(), geo.curvature.scalar.values());
}

#[test]
fn overflowing_factor_is_reported() {
    let geo = round(1.0, 16);
    let cf = ConformalFactor::on(constant(&geo, -60.0), &geo).unwrap();
    assert!(matches!(conformal_metric(&geo.metric, &cf), Err(Error::Overflow { .. })));
}
