use balanced_chaos::kernel::{KernelLab, MollifierSpec};

fn lab() -> KernelLab {
    KernelLab::new(MollifierSpec::default()).unwrap()
}

/// Composite trapezoid rule for `int_a^b rho(e^u r) du`.
fn layer_oracle(lab: &KernelLab, a: f64, b: f64, r: f64) -> f64 {
    let steps = 40_000;
    let h = (b - a) / steps as f64;
    let f = |u: f64| lab.rho().eval(u.exp() * r);
    let inner: f64 = (1..steps).map(|k| f(a + k as f64 * h)).sum();
    h * (inner + 0.5 * (f(a) + f(b)))
}

#[test]
fn seed_kernel_is_normalized_and_compact() {
    let lab = lab();
    assert!((lab.rho().eval(0.0) - 1.0).abs() < 1e-12);
    for r in [1.0, 1.5, 3.0] {
        assert_eq!(lab.rho().eval(r), 0.0);
    }
}

#[test]
fn layer_covariance_matches_scale_integral() {
    let lab = lab();
    for (a, b) in [(0.0, 1.0), (0.5, 2.0), (1.0, 3.5)] {
        let cov = lab.layer_covariance(a, b).unwrap();
        assert!((cov.eval(0.0) - (b - a)).abs() < 1e-12);
        for r in [0.003, 0.02, 0.1, 0.3, 0.6, 0.9] {
            let want = layer_oracle(&lab, a, b, r);
            assert!(
                (cov.eval(r) - want).abs() < 1e-6,
                "c_({a},{b})({r}) = {} vs {want}",
                cov.eval(r)
            );
        }
        assert_eq!(cov.eval(1.01 * (-a).exp()), 0.0);
    }
}

#[test]
fn k0_is_the_infinite_layer() {
    let lab = lab();
    for r in [0.01f64, 0.05, 0.2, 0.5, 0.8] {
        let deep = lab.layer_covariance(0.0, (1.0 / r).ln() + 1.0).unwrap();
        let k0 = lab.eval_k0(r).unwrap();
        assert!((deep.eval(r) - k0).abs() < 1e-7, "r = {r}");
    }
    assert_eq!(lab.eval_k0(1.0).unwrap(), 0.0);
    assert!(lab.eval_k0(0.0).is_err());
}

#[test]
fn layers_add_up() {
    let lab = lab();
    let (a, b, c) = (0.0, 1.3, 2.7);
    let ab = lab.layer_covariance(a, b).unwrap();
    let bc = lab.layer_covariance(b, c).unwrap();
    let ac = lab.layer_covariance(a, c).unwrap();
    for k in 0..50 {
        let r = k as f64 / 40.0;
        assert!((ab.eval(r) + bc.eval(r) - ac.eval(r)).abs() < 1e-9);
    }
}
