#![allow(dead_code)]

use mee_core::density::ErrorDensity;
use mee_core::network::{Architecture, Network, WeightBound};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Naive forward pass from the weight/bias accessors. Returns the raw
/// (unclamped) output and the smallest |pre-activation| of any hidden unit.
pub fn reference_forward(net: &Network, x: &[f64]) -> (f64, f64) {
    let widths = net.architecture().widths().to_vec();
    let mut a = x.to_vec();
    let mut closest = f64::INFINITY;
    for j in 0..widths.len() - 1 {
        let mut z = vec![0.0; widths[j + 1]];
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = net.bias(j, i) + (0..widths[j]).map(|k| net.weight(j, i, k) * a[k]).sum::<f64>();
        }
        if j + 1 < widths.len() - 1 {
            closest = z.iter().fold(closest, |m, v| m.min(v.abs()));
            a = z.iter().map(|v| v.max(0.0)).collect();
        } else {
            a = z;
        }
    }
    (a[0], closest)
}

pub fn batch_loss(net: &Network, batch: &[(Vec<f64>, f64)], density: &dyn ErrorDensity) -> f64 {
    batch
        .iter()
        .map(|(x, y)| -density.ln_pdf(y - net.predict(x)))
        .sum::<f64>()
        / batch.len() as f64
}

/// Central differences of `f` at `theta` with step `h`.
pub fn central_differences(theta: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|j| {
            t[j] = theta[j] + h;
            let up = f(&t);
            t[j] = theta[j] - h;
            let down = f(&t);
            t[j] = theta[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while (b - a).abs() > 1e-12 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Random fully connected net with depth in 1..=3 and widths in 2..=16.
pub fn random_net(seed: u64, input_dim: usize, output_bound: f64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = rng.random_range(1..=3);
    let mut widths = vec![input_dim];
    for _ in 0..depth {
        widths.push(rng.random_range(2..=16));
    }
    widths.push(1);
    let arch = Architecture::new(widths, WeightBound::new(50.0).unwrap(), output_bound, None).unwrap();
    let mut net = Network::init(arch, &mut rng);
    for b in net.theta_mut().iter_mut() {
        // nonzero biases so every code path is exercised
        if *b == 0.0 {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    net
}

pub fn random_batch(seed: u64, input_dim: usize, size: usize) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let x = (0..input_dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            (x, rng.random_range(-3.0..3.0))
        })
        .collect()
}

/// True when no hidden unit, clamp edge or loss kink lies within `margin`
/// of any batch point.
pub fn away_from_kinks(net: &Network, batch: &[(Vec<f64>, f64)], margin: f64) -> bool {
    let f = net.architecture().output_bound();
    batch.iter().all(|(x, y)| {
        let (raw, closest) = reference_forward(net, x);
        closest > margin && (raw.abs() - f).abs() > margin && (y - raw.clamp(-f, f)).abs() > margin
    })
}

/// Max relative error `|a − b| / max(|a|, |b|, floor)`.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}
