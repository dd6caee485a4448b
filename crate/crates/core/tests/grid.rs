use std::f64::consts::PI;

use proptest::prelude::*;
use schouten_core::curvature::{catalog, CatalogSpec};
use schouten_core::grid::*;

fn sup_err(a: &ScalarField, f: impl Fn([f64; 3]) -> f64) -> f64 {
    let g = a.grid();
    (0..g.len()).map(|i| (a.values()[i] - f(g.coords(i))).abs()).fold(0.0, f64::max)
}

#[test]
fn first_derivative_meets_the_taylor_bound() {
    let grid = ChartGrid::torus([64, 4, 4]).unwrap();
    let h = grid.spacing()[0];
    let f = ScalarField::from_fn(grid, |x| x[0].sin());
    let d = fd_partial(&f, 0, 1).unwrap();
    assert!(sup_err(&d, |x| x[0].cos()) <= h * h / 6.0 * 1.01);
}

#[test]
fn constant_field_has_zero_derivatives() {
    for grid in [ChartGrid::torus([8, 8, 8]).unwrap(), ChartGrid::s3_band(8).unwrap()] {
        let f = ScalarField::constant(grid, 2.5);
        for axis in grid.active_axes().collect::<Vec<_>>() {
            for order in [1, 2] {
                assert!(fd_partial(&f, axis, order).unwrap().values().iter().all(|&v| v == 0.0));
            }
        }
    }
}

#[test]
fn band_second_derivative_refines_at_order_two() {
    let errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let grid = ChartGrid::s3_band(n).unwrap();
            let f = ScalarField::from_fn(grid, |x| (2.0 * x[0]).cos());
            sup_err(&fd_partial(&f, 0, 2).unwrap(), |x| -4.0 * (2.0 * x[0]).cos())
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 4.0).abs() <= 0.4, "{errs:?}");
    }
}

#[test]
fn torus_derivatives_refine_at_order_two() {
    for (axis, order) in [(0, 1), (1, 1), (2, 2), (0, 2)] {
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let grid = ChartGrid::torus([n, n, n]).unwrap();
                let f = ScalarField::from_fn(grid, |x| (x[0] + 2.0 * x[1]).sin() * x[2].cos());
                let exact = |x: [f64; 3]| {
                    let k = [1.0, 2.0, 0.0][axis];
                    let (a, b) = (x[0] + 2.0 * x[1], x[2]);
                    match (axis, order) {
                        (2, 1) => -a.sin() * b.sin(),
                        (2, _) => -a.sin() * b.cos(),
                        (_, 1) => k * a.cos() * b.cos(),
                        _ => -k * k * a.sin() * b.cos(),
                    }
                };
                sup_err(&fd_partial(&f, axis, order).unwrap(), exact)
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1] - 4.0).abs() <= 0.4, "axis {axis} order {order}: {errs:?}");
        }
    }
}

#[test]
fn derivative_of_even_function_vanishes_at_the_pole() {
    // Linear extrapolation of the first two nodes to r = 0.
    let extrapolated = |n: usize| {
        let grid = ChartGrid::s3_band(n).unwrap();
        let f = ScalarField::from_fn(grid, |x| (2.0 * x[0]).cos() + 0.3 * (4.0 * x[0]).cos());
        let d = fd_partial(&f, 0, 1).unwrap();
        (1.5 * d.values()[0] - 0.5 * d.values()[1]).abs()
    };
    let (a, b) = (extrapolated(32), extrapolated(64));
    assert!(a < 1e-2 && b < a / 3.0, "{a} {b}");
}

#[test]
fn stencil_too_small_is_rejected() {
    assert!(make_grid(ChartKind::Torus3, [2, 8, 8], None).is_err());
    assert!(make_grid(ChartKind::S3Band, [3, 1, 1], None).is_err());
    let g = make_grid(ChartKind::Torus3, [32, 32, 32], None).unwrap();
    assert!((g.spacing()[0] - 2.0 * PI / 32.0).abs() < 1e-15);
}

#[test]
fn volume_of_the_round_sphere() {
    for n in [8, 32, 64] {
        let grid = ChartGrid::s3_band(n).unwrap();
        let geo = catalog(&CatalogSpec::RoundS3 { radius: 1.0 }, &grid).unwrap();
        let vol = integrate(&ScalarField::constant(grid, 1.0), &geo.metric).unwrap();
        assert!((vol - 2.0 * PI * PI).abs() < 1e-10, "{n}: {vol}");
    }
}

#[test]
fn volume_of_the_flat_torus() {
    let grid = ChartGrid::torus([8, 16, 8]).unwrap();
    let g = MetricField::reference(grid);
    let vol = integrate(&ScalarField::constant(grid, 1.0), &g).unwrap();
    // Naive summation: roundoff grows at most linearly with the node count.
    assert!((vol - (2.0 * PI).powi(3)).abs() <= grid.len() as f64 * f64::EPSILON * vol, "{vol}");
    let s = integrate(&ScalarField::from_fn(grid, |x| x[0].sin()), &g).unwrap();
    assert!(s.abs() < 1e-12);
}

#[test]
fn indefinite_metric_is_rejected() {
    let grid = ChartGrid::torus([4, 4, 4]).unwrap();
    let bad = SymTensorField::from_fn(grid, |i| {
        if i == 5 {
            schouten_core::Sym3::diag(1.0, -1.0, 1.0)
        } else {
            schouten_core::Sym3::IDENTITY
        }
    });
    assert!(matches!(MetricField::new(bad), Err(schouten_core::Error::NotPositiveDefinite { node: 5 })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integration_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 1usize..4) {
        let grid = ChartGrid::s3_band(16).unwrap();
        let geo = catalog(&CatalogSpec::BergerS3 { fiber_scale: 0.8 }, &grid).unwrap();
        let f = ScalarField::from_fn(grid, |x| (2.0 * k as f64 * x[0]).cos());
        let g = ScalarField::from_fn(grid, |x| x[0] * x[0]);
        let lin = f.zip_map(&g, |u, v| a * u + b * v).unwrap();
        let lhs = integrate(&lin, &geo.metric).unwrap();
        let rhs = a * integrate(&f, &geo.metric).unwrap() + b * integrate(&g, &geo.metric).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn integration_is_additive_over_blocks(split in 1usize..63, seed in 0u64..1000) {
        let grid = ChartGrid::torus([8, 8, 4]).unwrap();
        let g = MetricField::reference(grid);
        let s = seed as f64;
        let f = ScalarField::from_fn(grid, |x| (x[0] + s).sin() * (x[1] - s).cos() + x[2]);
        let cut = split * grid.len() / 64;
        let mask = |lo: bool| {
            ScalarField::new(
                grid,
                f.values().iter().enumerate().map(|(i, v)| if (i < cut) == lo { *v } else { 0.0 }).collect(),
            )
            .unwrap()
        };
        let whole = integrate(&f, &g).unwrap();
        let parts = integrate(&mask(true), &g).unwrap() + integrate(&mask(false), &g).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * (1.0 + whole.abs()));
    }
}
