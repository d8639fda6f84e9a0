use mee_core::data::*;
use mee_core::density::NoiseSpec;
use proptest::prelude::*;

fn ar_half(seed: u64) -> GeneratorSpec {
    GeneratorSpec::new(
        Truth::Linear {
            coefs: vec![0.5],
            intercept: 0.0,
        },
        1,
        Mode::Autoregressive,
        NoiseSpec::Subbotin { r: 2.0 },
        seed,
    )
}

fn autocorrelation(y: &[f64], lag: usize) -> f64 {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    let cov: f64 = (lag..n).map(|t| (y[t] - mean) * (y[t - lag] - mean)).sum();
    cov / var
}

#[test]
fn autocorrelation_decays_geometrically() {
    let ds = generate(&ar_half(31), 1_000_000).unwrap();
    let y = ds.outputs();
    assert!((autocorrelation(y, 1) - 0.5).abs() < 0.01);
    assert!((autocorrelation(y, 20) - 0.5f64.powi(20)).abs() < 0.01);
}

#[test]
fn halves_have_matching_means() {
    for mode in [Mode::Autoregressive, Mode::Exogenous] {
        let spec = GeneratorSpec { mode, ..ar_half(77) };
        let ds = generate(&spec, 200_000).unwrap();
        let (a, b) = ds.outputs().split_at(100_000);
        // long-run variance of a φ = 0.5 AR(1): σ²/(1−φ)² for the innovations
        let stats = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            (m, var)
        };
        let ((ma, va), (mb, vb)) = (stats(a), stats(b));
        // inflate by (1+φ)/(1−φ) = 3 for serial correlation
        let pooled_se = (3.0 * (va + vb) / 100_000.0).sqrt();
        assert!((ma - mb).abs() < 4.0 * pooled_se, "{mode:?}: {ma} vs {mb}");
    }
}

#[test]
fn burn_in_couples_initial_states() {
    for noise in [NoiseSpec::Subbotin { r: 2.0 }, NoiseSpec::Subbotin { r: 1.0 }] {
        let base = GeneratorSpec { noise, ..ar_half(5) };
        let far = GeneratorSpec {
            initial_state: 500.0,
            ..base.clone()
        };
        let a = generate(&base, 1000).unwrap();
        let b = generate(&far, 1000).unwrap();
        let worst = a
            .outputs()
            .iter()
            .zip(b.outputs())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }
    let spec = GeneratorSpec::new(
        Truth::TanhBump {
            amplitude: 0.8,
            half_width: 1.0,
            scale: 1.0,
        },
        3,
        Mode::Autoregressive,
        NoiseSpec::Subbotin { r: 1.5 },
        6,
    );
    let far = GeneratorSpec {
        initial_state: -40.0,
        ..spec.clone()
    };
    let a = generate(&spec, 200).unwrap();
    let b = generate(&far, 200).unwrap();
    assert!(a.outputs().iter().zip(b.outputs()).all(|(x, y)| (x - y).abs() < 1e-8));
}

#[test]
fn catalog_lipschitz_bounds_hold() {
    let truths = [
        Truth::Linear {
            coefs: vec![0.3, -0.2],
            intercept: 0.1,
        },
        Truth::TanhBump {
            amplitude: 1.0,
            half_width: 0.5,
            scale: 0.7,
        },
        Truth::SinAdditive {
            amplitude: 0.8,
            frequency: 1.2,
        },
        Truth::Composition {
            amplitude: 0.6,
            exponent: 1.5,
        },
    ];
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(8);
    for truth in &truths {
        let l = truth.lipschitz_bound();
        for _ in 0..5000 {
            use rand::Rng;
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-4.0..4.0)).collect();
            let z: Vec<f64> = (0..2).map(|_| rng.random_range(-4.0..4.0)).collect();
            let dist = x.iter().zip(&z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(
                (truth.eval(&x) - truth.eval(&z)).abs() <= l * dist * (1.0 + 1e-12) + 1e-15,
                "{truth:?}"
            );
            if let Some(bound) = truth.sup_bound() {
                assert!(truth.eval(&x).abs() <= bound);
            }
        }
    }
}

#[test]
fn rough_composition_rejected_in_autoregression() {
    let spec = GeneratorSpec::new(
        Truth::Composition {
            amplitude: 0.5,
            exponent: 0.5,
        },
        1,
        Mode::Autoregressive,
        NoiseSpec::Subbotin { r: 2.0 },
        1,
    );
    assert!(generate(&spec, 10).is_err());
    let spec = GeneratorSpec {
        mode: Mode::Exogenous,
        ..spec
    };
    assert_eq!(generate(&spec, 10).unwrap().len(), 10);
}

#[test]
fn fresh_inputs_differ_from_training_inputs() {
    let spec = GeneratorSpec {
        mode: Mode::Exogenous,
        ..ar_half(3)
    };
    let train = generate(&spec, 100).unwrap();
    let eval = fresh_inputs(&spec, 100, 4).unwrap();
    assert_eq!(eval.len(), 100);
    assert_ne!(train.inputs(), &eval[..]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), n in 1usize..300, exo in any::<bool>()) {
        let mut spec = ar_half(seed);
        if exo {
            spec.mode = Mode::Exogenous;
        }
        let a = generate(&spec, n).unwrap();
        let b = generate(&spec, n).unwrap();
        prop_assert_eq!(a.len(), n);
        prop_assert!(a.outputs().iter().zip(b.outputs()).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(a.inputs().iter().zip(b.inputs()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn split_partitions_in_time_order(n in 2usize..500, frac in 0.001f64..0.999) {
        let ds = generate(&ar_half(1), n).unwrap();
        let (a, b) = split(&ds, frac).unwrap();
        prop_assert!(!a.is_empty() && !b.is_empty());
        prop_assert_eq!(a.len() + b.len(), n);
        prop_assert_eq!(a.len(), ((n as f64 * frac).floor() as usize).clamp(1, n - 1));
        let mut ys = a.outputs().to_vec();
        ys.extend_from_slice(b.outputs());
        prop_assert_eq!(&ys[..], ds.outputs());
        let mut xs = a.inputs().to_vec();
        xs.extend_from_slice(b.inputs());
        prop_assert_eq!(&xs[..], ds.inputs());
    }

    #[test]
    fn residuals_reproduce_noise(seed in any::<u64>(), r in 1.0f64..2.0) {
        let spec = GeneratorSpec { noise: NoiseSpec::Subbotin { r }, ..ar_half(seed) };
        let (ds, noise) = generate_with_noise(&spec, 200).unwrap();
        let h = truth_values(&ds).unwrap();
        for ((y, h), xi) in ds.outputs().iter().zip(&h).zip(&noise) {
            prop_assert!((y - h - xi).abs() <= f64::EPSILON * y.abs().max(h.abs()));
        }
    }
}
