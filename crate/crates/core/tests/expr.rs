use proptest::prelude::*;
use schouten_core::expr::{evaluate, parse};
use schouten_core::grid::ChartGrid;
use schouten_core::Error;

fn expr_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0.0f64..20.0).prop_map(|v| format!("{v:.3}")),
        Just("x".to_string()),
        Just("y".to_string()),
        Just("z".to_string()),
        Just("pi".to_string()),
        Just("e".to_string()),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]))
                .prop_map(|(a, b, op)| format!("{a} {op} {b}")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.clone().prop_map(|a| format!("({a})")),
            (inner, prop::sample::select(vec!["sin", "cos", "tanh", "sqrt", "exp"]))
                .prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

fn same(a: &Result<schouten_core::ScalarField, Error>, b: &Result<schouten_core::ScalarField, Error>) -> bool {
    match (a, b) {
        (Ok(a), Ok(b)) => a
            .values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan())),
        (Err(a), Err(b)) => std::mem::discriminant(a) == std::mem::discriminant(b),
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printer_is_idempotent(src in expr_source()) {
        let grid = ChartGrid::torus([4, 4, 4]).unwrap();
        let a = parse(&src).unwrap();
        let printed = a.to_string();
        let b = parse(&printed).unwrap();
        prop_assert!(a.same_shape(&b), "{} -> {}", src, printed);
        prop_assert_eq!(&printed, &b.to_string());
        prop_assert!(same(&evaluate(&a, &grid), &evaluate(&b, &grid)));
    }

    #[test]
    fn sum_evaluates_to_sum_of_fields(a in expr_source(), b in expr_source()) {
        let grid = ChartGrid::torus([4, 4, 4]).unwrap();
        let (fa, fb) = (evaluate(&parse(&a).unwrap(), &grid), evaluate(&parse(&b).unwrap(), &grid));
        let sum = evaluate(&parse(&format!("({a}) + ({b})")).unwrap(), &grid);
        if let (Ok(fa), Ok(fb), Ok(sum)) = (&fa, &fb, &sum) {
            for i in 0..grid.len() {
                let want = fa.values()[i] + fb.values()[i];
                let got = sum.values()[i];
                prop_assert!(got.to_bits() == want.to_bits() || (got.is_nan() && want.is_nan()));
            }
        } else {
            prop_assert!(fa.is_err() || fb.is_err());
        }
    }
}

#[test]
fn unclosed_call_reports_end_offset() {
    assert!(matches!(parse("sin("), Err(Error::Syntax { offset: 4, .. })));
}

#[test]
fn band_accepts_only_r() {
    let band = ChartGrid::s3_band(8).unwrap();
    let f = evaluate(&parse("0.05*cos(2*r)").unwrap(), &band).unwrap();
    let r0 = band.coords(0)[0];
    assert_eq!(f.values()[0], 0.05 * (2.0 * r0).cos());
    assert!(matches!(evaluate(&parse("sin(x)").unwrap(), &band), Err(Error::UnknownIdentifier { .. })));
}

#[test]
fn numeric_strings_fold_to_constants() {
    assert_eq!(parse("2/3").unwrap().eval_constant().unwrap(), 2.0 / 3.0);
    assert_eq!(parse("-1/3").unwrap().eval_constant().unwrap(), -1.0 / 3.0);
    assert!(parse("x + 1").unwrap().eval_constant().is_err());
}
