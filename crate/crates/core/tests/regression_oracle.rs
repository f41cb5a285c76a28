//! Local regression against a brute-force normal-equations oracle.

mod common;

use common::regression_oracle;
use dpsea::regression::{fit, select_kind, ModelKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn hundred_random_instances_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for instance in 0..100 {
        let d = rng.random_range(1..=5);
        let kind = [ModelKind::Linear, ModelKind::DiagQuadratic][instance % 2];
        let n = kind.terms(d) + rng.random_range(2..20);
        let lambda = [0.0, 0.01][(instance / 2) % 2];
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
        let ys: Vec<f64> =
            xs.iter().map(|x| x.iter().map(|v| 0.3 * v * v - v).sum::<f64>() + rng.random_range(-1.0..1.0)).collect();
        let model = fit(&xs, &ys, kind, lambda).unwrap();
        let expected = regression_oracle(&xs, &ys, kind, lambda);
        assert_eq!(model.coefficients.len(), expected.len());
        for (got, want) in model.coefficients.iter().zip(&expected) {
            assert!(close(*got, *want), "instance {instance}: {got} vs {want}");
        }
        checked += 1;
    }
    assert_eq!(checked, 100);
}

#[test]
fn noiseless_diagonal_quadratic_is_recovered() {
    // y = 4 - x1 + 2 x2 + 0.5 x1^2 + 3 x2^2 on a 5 x 5 grid.
    let mut xs = Vec::new();
    for i in -2..=2 {
        for j in -2..=2 {
            xs.push(vec![i as f64 * 1.5 + 7.0, j as f64 * 0.25 - 1.0]);
        }
    }
    let ys: Vec<f64> = xs.iter().map(|x| 4.0 - x[0] + 2.0 * x[1] + 0.5 * x[0] * x[0] + 3.0 * x[1] * x[1]).collect();
    let model = fit(&xs, &ys, ModelKind::DiagQuadratic, 0.0).unwrap();
    let raw = model.raw_coefficients();
    assert!((raw.intercept - 4.0).abs() < 1e-8, "{raw:?}");
    assert!((raw.linear[0] + 1.0).abs() < 1e-8 && (raw.linear[1] - 2.0).abs() < 1e-8, "{raw:?}");
    assert!((raw.quadratic[0] - 0.5).abs() < 1e-8 && (raw.quadratic[1] - 3.0).abs() < 1e-8, "{raw:?}");
    for x in &xs {
        let y = 4.0 - x[0] + 2.0 * x[1] + 0.5 * x[0] * x[0] + 3.0 * x[1] * x[1];
        assert!((model.predict(x).unwrap() - y).abs() < 1e-8);
    }
}

#[test]
fn ill_conditioned_design_still_solves() {
    // Two nearly collinear coordinates: condition number of the design
    // matrix around 1e7.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            let t: f64 = rng.random_range(-1.0..1.0);
            vec![t, t + 1e-7 * rng.random_range(-1.0..1.0)]
        })
        .collect();
    let ys: Vec<f64> = xs.iter().map(|x| 1.0 + x[0] + x[1]).collect();
    let model = fit(&xs, &ys, ModelKind::Linear, 0.0).unwrap();
    for x in &xs {
        assert!((model.predict(x).unwrap() - (1.0 + x[0] + x[1])).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Degenerate inputs (many repeated points, constant coordinates) never
    /// give non-finite output once the ridge is at least 1e-8.
    #[test]
    fn degenerate_inputs_stay_finite(
        base in prop::collection::vec(-5.0f64..5.0, 1..5),
        copies in 1usize..12,
        lambda_exp in -8i32..2,
        ys in prop::collection::vec(-100.0f64..100.0, 12),
    ) {
        let lambda = 10f64.powi(lambda_exp);
        let d = base.len();
        let xs: Vec<Vec<f64>> = (0..copies).map(|i| {
            let mut x = base.clone();
            if i % 3 == 0 { x[0] += 1.0; }
            x
        }).collect();
        let ys = &ys[..copies];
        for kind in [ModelKind::Constant, ModelKind::Linear, ModelKind::DiagQuadratic] {
            let model = fit(&xs, ys, kind, lambda).unwrap();
            prop_assert!(model.coefficients.iter().all(|c| c.is_finite()));
            prop_assert!(model.predict(&vec![0.5; d]).unwrap().is_finite());
        }
    }

    /// The selected basis never has more coefficients than samples.
    #[test]
    fn selected_kind_is_identifiable(n in 1usize..400, d in 1usize..60) {
        let kind = select_kind(n, d);
        prop_assert!(kind.terms(d) <= n);
    }
}
