use balanced_chaos::field::{FieldSample, GridSpec};
use balanced_chaos::gmc::{
    balanced_ratio, gmc_mass, log_sum_exp, zeta_balanced, zeta_balanced_direct, GmcParams,
    RegionMask,
};
use proptest::prelude::*;

fn field(n: usize, values: Vec<f64>) -> FieldSample {
    let mut f = FieldSample::zeros(GridSpec::unit(n).unwrap(), 0.0, 1.0);
    f.values = values;
    f
}

fn params() -> impl Strategy<Value = GmcParams> {
    (0.1f64..1.9, 0.1f64..1.9, 0.0f64..4.0)
        .prop_filter("distinct", |(a, g, _)| (a - g).abs() > 0.05)
        .prop_map(|(a, g, t)| GmcParams::new(a, g, 2, t).unwrap())
}

proptest! {
    #[test]
    fn ratio_ignores_constant_shift(p in params(), vals in prop::collection::vec(-3.0f64..3.0, 64), c in -5.0f64..5.0) {
        let f = field(8, vals.clone());
        let g = field(8, vals.iter().map(|v| v + c).collect());
        let full = RegionMask::full(&f.grid);
        let (a, b) = (balanced_ratio(&f, &p, &full).unwrap(), balanced_ratio(&g, &p, &full).unwrap());
        prop_assert!((a / b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ratio_respects_holder_ceiling(p in params(), vals in prop::collection::vec(-4.0f64..4.0, 64), cells in prop::collection::vec(any::<bool>(), 64)) {
        prop_assume!(cells.iter().any(|&c| c));
        let f = field(8, vals);
        let region = RegionMask::from_cells(&f.grid, cells);
        let q = balanced_ratio(&f, &p, &region).unwrap();
        prop_assert!(q <= p.holder_ceiling() * region.area() * (1.0 + 1e-12));
    }

    #[test]
    fn ratio_is_subadditive(p in params(), vals in prop::collection::vec(-4.0f64..4.0, 64), split in prop::collection::vec(0u8..3, 64)) {
        prop_assume!(split.contains(&0) && split.contains(&1));
        let f = field(8, vals);
        let a = RegionMask::from_cells(&f.grid, split.iter().map(|&s| s == 0).collect());
        let b = RegionMask::from_cells(&f.grid, split.iter().map(|&s| s == 1).collect());
        let u = a.union(&b).unwrap();
        let q = |m: &RegionMask| balanced_ratio(&f, &p, m).unwrap();
        prop_assert!(q(&u) <= (q(&a) + q(&b)) * (1.0 + 1e-12));
    }

    #[test]
    fn balanced_exponent_closed_form(p in params(), n in 0.1f64..8.0) {
        let (x, y) = (zeta_balanced(&p, n), zeta_balanced_direct(&p, n));
        // the quadratic terms cancel, so rounding grows with the exponents squared
        let scale = (n * p.balance_exponents().0).powi(2).max(1.0);
        prop_assert!((x - y).abs() <= 1e-14 * scale, "{x} vs {y}");
    }

    #[test]
    fn log_sum_exp_matches_naive(xs in prop::collection::vec(-30.0f64..30.0, 1..200)) {
        let naive = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        let mut buf = xs.clone();
        prop_assert!((log_sum_exp(&mut buf) - naive).abs() < 1e-12 * naive.abs().max(1.0));
    }
}

#[test]
fn log_sum_exp_survives_overflow() {
    let mut xs = vec![1000.0, 1000.0, -1e9];
    assert!((log_sum_exp(&mut xs) - (1000.0 + 2f64.ln())).abs() < 1e-12);
}

#[test]
fn flat_field_mass() {
    // X = 0: M_gamma(S) = |S| e^{-gamma^2 t / 2}
    let f = field(4, vec![0.0; 16]);
    let region = RegionMask::square(&f.grid, 1, 1, 2).unwrap();
    let m = gmc_mass(&f, 1.3, 2.0, &region).unwrap().value();
    assert!((m - 0.25 * (-1.69f64).exp()).abs() < 1e-15);
}
