mod common;

use common::golden_max;
use mee_core::density::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Composite Simpson rule on `[a, b]` with `m` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∫ exp(−|u|^r / r) du` via `u = t²` on each half line, which removes the
/// cusp at the origin for small `r`.
fn unnormalised_mass(r: f64) -> f64 {
    let upper = (r * 60.0f64).powf(1.0 / r).sqrt();
    2.0 * simpson(|t| 2.0 * t * (-(t * t).powf(r) / r).exp(), 0.0, upper, 400_000)
}

#[test]
fn normalisation_against_independent_oracle() {
    for r in [0.5, 1.0, 1.5, 2.0] {
        let d = SubbotinDensity::new(r).unwrap();
        let oracle = d.normalizing_constant() * unnormalised_mass(r);
        assert!((oracle - 1.0).abs() < 1e-6, "r={r}: oracle mass {oracle}");
        let ours = expectation(&d, |_| 1.0, &[]).unwrap();
        assert!((ours - 1.0).abs() < 1e-6, "r={r}: mass {ours}");
    }
}

#[test]
fn log_density_at_1_2_matches_quadrature_normalisation() {
    let r = 1.5;
    let d = SubbotinDensity::new(r).unwrap();
    let expected = -(1.2f64.powf(r) / r) - unnormalised_mass(r).ln();
    assert!((d.log_density(1.2).unwrap() - expected).abs() < 1e-8);
}

#[test]
fn lipschitz_constant_is_the_max_slope() {
    for r in [1.0, 1.5, 2.0, 3.0] {
        let d = SubbotinDensity::new(r).unwrap();
        // |f'(u)| = |u|^{r−1} f(u) on u > 0
        let slope = |u: f64| u.powf(r - 1.0) * d.pdf(u);
        let (_, max) = golden_max(slope, 1e-9, 6.0);
        let max = if r == 1.0 { d.pdf(0.0) } else { max };
        assert!((d.lipschitz_constant() - max).abs() < 1e-9, "r={r}");
        for i in 0..2000 {
            let u = -10.0 + i as f64 * 0.01;
            assert!(slope(u.abs()) <= d.lipschitz_constant() + 1e-15);
        }
    }
}

#[test]
fn truncated_log_is_lipschitz() {
    let g = SubbotinDensity::gaussian();
    let (argmax, kf) = golden_max(|u| u * std_normal_pdf(u), 0.0, 5.0);
    assert!((argmax - 1.0).abs() < 1e-6);
    assert!((kf - 0.24197072451914337).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for beta in [1e-1, 1e-3] {
        let t = TruncatedDensity::new(&g, beta).unwrap();
        let mut violations = 0;
        for _ in 0..1000 {
            let u1: f64 = rng.random_range(-8.0..8.0);
            let u2: f64 = rng.random_range(-8.0..8.0);
            let lhs = (truncated_log_density(&t, u1) - truncated_log_density(&t, u2)).abs();
            if lhs > kf / beta * (u1 - u2).abs() * (1.0 + 1e-12) {
                violations += 1;
            }
        }
        assert_eq!(violations, 0, "beta={beta}");
    }
}

#[test]
fn truncation_examples() {
    let g = SubbotinDensity::gaussian();
    let t = TruncatedDensity::new(&g, 0.1).unwrap();
    assert_eq!(truncated_log_density(&t, 10.0), 0.1f64.ln());
    assert_eq!(truncated_log_density(&t, 10.0) - truncated_log_density(&t, 12.0), 0.0);
    let t = TruncatedDensity::new(&g, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let u1: f64 = rng.random_range(-5.0..5.0);
        let u2: f64 = rng.random_range(-5.0..5.0);
        let lhs = (t.log_value(u1) - t.log_value(u2)).abs();
        assert!(lhs <= 0.24198 / 0.01 * (u1 - u2).abs());
    }
    assert!(TruncatedDensity::new(&g, 0.0).is_err());
    assert!(TruncatedDensity::new(&g, 1.5).is_err());
}

#[test]
fn entropy_minimised_at_zero_shift() {
    for r in [1.0, 1.5, 2.0] {
        let d = SubbotinDensity::new(r).unwrap();
        let v0 = v_profile(&d, 0.0).unwrap();
        for i in 0..61 {
            let s = -3.0 + 0.1 * i as f64;
            let v = v_profile(&d, s).unwrap();
            assert!(v - v0 >= -1e-8, "r={r}, s={s}: {}", v - v0);
        }
    }
    let g = SubbotinDensity::gaussian();
    let v0 = v_profile(&g, 0.0).unwrap();
    assert!((v0 - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()).abs() < 1e-8);
    assert!((v_profile(&g, 1.0).unwrap() - v0 - 0.5).abs() < 1e-6);
}

#[test]
fn shifted_power_excess_bounded_by_power_of_shift() {
    for r in [1.0, 1.5, 2.0] {
        let d = SubbotinDensity::new(r).unwrap();
        for delta in [0.1, 0.5, 1.0] {
            let e = d.shifted_power_excess(delta).unwrap();
            assert!(e <= delta.powf(r) + 1e-8, "r={r}, δ={delta}: {e}");
            assert!(e >= -1e-12);
        }
    }
    // Gaussian: E[(ξ+δ)² − ξ²] = δ²
    let g = SubbotinDensity::gaussian();
    assert!((g.shifted_power_excess(0.5).unwrap() - 0.25).abs() < 1e-9);
    // Laplace: E|ξ+δ| − E|ξ| = δ + e^{−δ} − 1
    let l = SubbotinDensity::laplace();
    let delta: f64 = 0.5;
    assert!((l.shifted_power_excess(delta).unwrap() - (delta + (-delta).exp() - 1.0)).abs() < 1e-9);
}

#[test]
fn tail_log_moment_is_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for r in [1.0, 1.5, 2.0] {
        let d = SubbotinDensity::new(r).unwrap();
        let p = 2f64.powf(r) + 1.0;
        let xi = d.sample(&mut rng, 1_000_000);
        let shifts: Vec<f64> = (0..xi.len()).map(|_| rng.random_range(-2.0..=2.0)).collect();
        for n in [1e3f64, 1e4] {
            let ln_beta = -p * n.ln();
            let mean = xi
                .iter()
                .zip(&shifts)
                .map(|(x, u)| {
                    let lf = d.ln_pdf(x + u);
                    if lf <= ln_beta {
                        lf.abs()
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
                / xi.len() as f64;
            assert!(mean <= 10.0 * n.ln() / n, "r={r}, n={n}: {mean}");
        }
    }
}

#[test]
fn kernel_log_density_examples() {
    let b = 0.4;
    let kde = KernelDensityEstimate::new(vec![1.3], b, Kernel::Gaussian).unwrap();
    let expected = (1.0 / (b * (2.0 * std::f64::consts::PI).sqrt())).ln();
    assert!((kernel_log_density(&kde, 1.3) - expected).abs() < 1e-14);

    let kde = KernelDensityEstimate::new(vec![0.0, 2.0], 1.0, Kernel::Gaussian).unwrap();
    let direct = 0.5 * (std_normal_pdf(1.0) + std_normal_pdf(-1.0));
    assert!((kernel_log_density(&kde, 1.0) - direct.ln()).abs() < 1e-12);

    assert_eq!(kernel_log_density(&kde, 1e3), KDE_FLOOR.ln());
    assert!(KernelDensityEstimate::new(vec![], 1.0, Kernel::Gaussian).is_err());
}

#[test]
fn kde_mass_with_independent_rule() {
    let residuals = vec![-1.0, -0.2, 0.1, 0.15, 2.5];
    for kernel in [Kernel::Gaussian, Kernel::Epanechnikov] {
        let b = 0.3;
        let kde = KernelDensityEstimate::new(residuals.clone(), b, kernel).unwrap();
        let mass = simpson(|v| kde.value(v), -1.0 - 6.0 * b, 2.5 + 6.0 * b, 600_000);
        assert!((mass - 1.0).abs() < 1e-6, "{kernel:?}: {mass}");
    }
}

#[test]
fn contaminated_mixture_normalised() {
    let c = ContaminatedGaussian::new(0.05, 10.0).unwrap();
    let mass = simpson(|u| c.pdf(u), -120.0, 120.0, 400_000);
    assert!((mass - 1.0).abs() < 1e-8);
}

fn shapes() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(1.0), Just(1.5), Just(2.0), Just(3.0), 0.3f64..4.0]
}

proptest! {
    #[test]
    fn symmetric_bit_exact(r in shapes(), u in -50.0f64..50.0) {
        let d = SubbotinDensity::new(r).unwrap();
        prop_assert_eq!(d.log_density(u).unwrap().to_bits(), d.log_density(-u).unwrap().to_bits());
        prop_assert!(d.log_density(u).unwrap().is_finite());
    }

    #[test]
    fn score_matches_central_differences(r in prop_oneof![Just(1.0), Just(1.5), Just(2.0), 1.0f64..3.0], u in 0.05f64..6.0, neg in any::<bool>()) {
        let u = if neg { -u } else { u };
        let d = SubbotinDensity::new(r).unwrap();
        let h = 1e-5;
        let fd = (d.ln_pdf(u + h) - d.ln_pdf(u - h)) / (2.0 * h);
        let s = d.log_density_derivative(u).unwrap();
        prop_assert!((s - fd).abs() <= 1e-6 * fd.abs().max(1.0), "r={} u={} s={} fd={}", r, u, s, fd);
    }

    #[test]
    fn truncation_floors(beta in 1e-6f64..=1.0, u in -20.0f64..20.0, r in shapes()) {
        let d = SubbotinDensity::new(r).unwrap();
        let t = TruncatedDensity::new(&d, beta).unwrap();
        prop_assert_eq!(t.value(u), d.pdf(u).max(beta));
        prop_assert!(t.log_value(u) >= beta.ln());
    }

    #[test]
    fn kde_nonnegative(res in prop::collection::vec(-5.0f64..5.0, 1..20), b in 0.01f64..3.0, v in -20.0f64..20.0, epa in any::<bool>()) {
        let kernel = if epa { Kernel::Epanechnikov } else { Kernel::Gaussian };
        let kde = KernelDensityEstimate::new(res, b, kernel).unwrap();
        prop_assert!(kde.value(v) >= 0.0);
        prop_assert!(kde.log_value(v) >= KDE_FLOOR.ln());
    }

    #[test]
    fn sampler_is_deterministic(r in shapes(), seed in any::<u64>()) {
        let d = SubbotinDensity::new(r).unwrap();
        let a = d.sample(&mut ChaCha8Rng::seed_from_u64(seed), 16);
        let b = d.sample(&mut ChaCha8Rng::seed_from_u64(seed), 16);
        prop_assert_eq!(a, b);
    }
}
