use proptest::prelude::*;

use strato::expansion::{ito_triple_truncated, strat_triple_truncated};
use strato::gaussians::{draw_block_replica, Provenance};
use strato::oracle::{simulate_path_replica, zeta_from_path_on, PathGrid};
use strato::quadrature::{CompositeRule, GaussLegendre};
use strato::{
    build_tensor, coeff_double, coeff_single, coeff_triple, draw_block, BasisKind, BasisSpec, Calculus, IntegralSpec,
    Interval, TruncationOrder, WeightExponents,
};

fn basis(kind: BasisKind, t: f64, w: f64) -> BasisSpec<f64> {
    BasisSpec::new(kind, Interval::new(t, t + w).unwrap())
}

fn any_kind() -> impl Strategy<Value = BasisKind> {
    prop_oneof![Just(BasisKind::Legendre), Just(BasisKind::Trigonometric)]
}

fn inner_product(b: &BasisSpec<f64>, i: usize, j: usize) -> f64 {
    let (a, e) = (b.interval.start(), b.interval.end());
    let f = |s: f64| b.phi(i, s).unwrap() * b.phi(j, s).unwrap();
    match b.kind {
        BasisKind::Legendre => GaussLegendre::for_degree(i + j).integrate(a, e, f),
        BasisKind::Trigonometric => CompositeRule::new(16, 64).integrate(a, e, f),
    }
}

#[test]
fn bases_are_orthonormal() {
    for kind in [BasisKind::Legendre, BasisKind::Trigonometric] {
        let b = basis(kind, -0.4, 2.3);
        for i in 0..=20 {
            for j in 0..=20 {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = inner_product(&b, i, j);
                assert!((got - want).abs() < 1e-12, "{kind:?} <{i},{j}> = {got}");
            }
        }
    }
}

#[test]
fn triple_coefficients_obey_product_rule_for_equal_weights() {
    let b = basis(BasisKind::Legendre, 0.5, 1.2);
    let weights = WeightExponents::new(2, 2, 2);
    for (a, c) in [(0, 0), (1, 3), (2, 1), (4, 4)] {
        let lhs = coeff_triple(&b, c, a, a, weights).unwrap()
            + coeff_triple(&b, a, c, a, weights).unwrap()
            + coeff_triple(&b, a, a, c, weights).unwrap();
        let ca = coeff_single(&b, a, 2);
        let cc = coeff_single(&b, c, 2);
        assert!((lhs - 0.5 * ca * ca * cc).abs() < 1e-13);
    }
}

#[test]
fn double_coefficients_sum_to_product() {
    for kind in [BasisKind::Legendre, BasisKind::Trigonometric] {
        let b = basis(kind, 0.0, 1.7);
        for i in 0..6 {
            for j in 0..6 {
                let sum = coeff_double(&b, i, j, (1, 1)) + coeff_double(&b, j, i, (1, 1));
                let prod = coeff_single(&b, i, 1) * coeff_single(&b, j, 1);
                assert!((sum - prod).abs() < 1e-12, "{kind:?} ({i},{j})");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_scale_with_width_and_ignore_shift(
        kind in any_kind(),
        j1 in 0usize..7,
        j2 in 0usize..7,
        j3 in 0usize..7,
        l1 in 0u32..3,
        l2 in 0u32..3,
        l3 in 0u32..3,
        t in -3.0f64..3.0,
        w in 0.2f64..4.0,
    ) {
        let weights = if kind == BasisKind::Legendre {
            WeightExponents::new(l1, l2, l3)
        } else {
            WeightExponents::CONSTANT
        };
        let unit = coeff_triple(&basis(kind, 0.0, 1.0), j1, j2, j3, weights).unwrap();
        let moved = coeff_triple(&basis(kind, t, w), j1, j2, j3, weights).unwrap();
        let exponent = 1.5 + weights.total() as f64;
        let want = unit * w.powf(exponent);
        prop_assert!((moved - want).abs() <= 1e-12 * w.powf(exponent).max(1.0), "{moved} vs {want}");
    }

    #[test]
    fn antiderivative_matches_finite_difference(
        kind in any_kind(),
        j in 0usize..12,
        l in 0u32..3,
        t in -2.0f64..2.0,
        w in 0.5f64..3.0,
        frac in 0.05f64..0.95,
    ) {
        let b = basis(kind, t, w);
        let s = t + frac * w;
        let h = 1e-4 * w;
        let d = (b.weighted_antiderivative(j, l, s + h).unwrap() - b.weighted_antiderivative(j, l, s - h).unwrap())
            / (2.0 * h);
        let want = (t - s).powi(l as i32) * b.phi(j, s).unwrap();
        let scale = (1.0 + j as f64).powi(3) * w.powi(l as i32) / w.sqrt();
        prop_assert!((d - want).abs() < 1e-6 * scale, "{d} vs {want}");
    }

    #[test]
    fn distinct_components_need_no_correction(seed in any::<u64>(), p in 0usize..5) {
        let b = basis(BasisKind::Legendre, 0.0, 1.0);
        let tensor = build_tensor(&b, WeightExponents::CONSTANT, (p, p, p)).unwrap();
        let block = draw_block::<f64>(3, p, seed).unwrap();
        let ito = IntegralSpec::new(Calculus::Ito, &[1, 2, 3], WeightExponents::CONSTANT, b).unwrap();
        let strat = IntegralSpec::new(Calculus::Stratonovich, &[1, 2, 3], WeightExponents::CONSTANT, b).unwrap();
        let order = TruncationOrder::uniform(p);
        let a = ito_triple_truncated(&tensor, &block, &ito, order).unwrap();
        let s = strat_triple_truncated(&tensor, &block, &strat, order).unwrap();
        prop_assert!((a - s).abs() < 1e-14);
    }
}

#[test]
fn truncated_ito_triple_has_expected_moments() {
    let b = basis(BasisKind::Legendre, 0.0, 1.0);
    let p = 3;
    let tensor = build_tensor(&b, WeightExponents::CONSTANT, (p, p, p)).unwrap();
    let spec = IntegralSpec::new(Calculus::Ito, &[1, 2, 3], WeightExponents::CONSTANT, b).unwrap();
    let variance: f64 = tensor.values().iter().map(|c| c * c).sum();
    let n = 20_000;
    let samples: Vec<f64> = (0..n)
        .map(|r| {
            let block = draw_block_replica::<f64>(3, p, 5, r).unwrap();
            ito_triple_truncated(&tensor, &block, &spec, TruncationOrder::uniform(p)).unwrap()
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let second = samples.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let fourth = samples.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
    assert!(mean.abs() < 5.0 * (variance / n as f64).sqrt(), "mean {mean}");
    let sd_second = ((fourth - second * second) / n as f64).sqrt();
    assert!((second - variance).abs() < 5.0 * sd_second, "{second} vs {variance}");
    let finer: f64 = build_tensor(&b, WeightExponents::CONSTANT, (8, 8, 8)).unwrap().values().iter().map(|c| c * c).sum();
    assert!(variance < finer && finer < 1.0 / 6.0, "{variance} {finer}");
}

#[test]
fn block_and_path_streams_are_independent() {
    let b = basis(BasisKind::Legendre, 0.0, 1.0);
    let grid = PathGrid::new(&b, 1_000, 3).unwrap();
    let n = 2_000;
    let mut cross = [0.0f64; 3];
    let mut between = [0.0f64; 3];
    for r in 0..n {
        let path = simulate_path_replica(b.interval, 1_000, 2, 11, r).unwrap();
        let from_path = zeta_from_path_on(&grid, &path).unwrap();
        assert_eq!(from_path.provenance, Provenance::FromPath);
        let fresh = draw_block_replica::<f64>(2, 3, 11, r).unwrap();
        for j in 0..3 {
            cross[j] += from_path.zeta(1, j) * fresh.zeta(1, j);
            between[j] += from_path.zeta(1, j) * from_path.zeta(2, j);
        }
    }
    let band = 5.0 / (n as f64).sqrt();
    for j in 0..3 {
        assert!((cross[j] / n as f64).abs() < band, "block vs path j={j}");
        assert!((between[j] / n as f64).abs() < band, "components j={j}");
    }
}
