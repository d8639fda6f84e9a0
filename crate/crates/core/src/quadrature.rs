//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::{MeeError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_bound: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

impl Quadrature {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            ..Default::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrates `f` over `[points[0], points[last]]`, starting from the
    /// partition given by `points` so that kinks of the integrand can be placed
    /// on segment boundaries. Points are sorted and deduplicated.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<Integral> {
        if points.len() < 2 || points.iter().any(|p| !p.is_finite()) {
            return Err(MeeError::usage("quadrature needs at least two finite points"));
        }
        let mut pts = points.to_vec();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let lo = pts[0];
        let hi = *pts.last().unwrap();
        if lo == hi {
            return Ok(Integral {
                value: 0.0,
                error_bound: 0.0,
                evaluations: 0,
            });
        }

        let mut evaluations = 0usize;
        let mut segments: Vec<Segment> = pts
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let (value, error) = kronrod(&f, w[0], w[1]);
                evaluations += 15;
                Segment {
                    a: w[0],
                    b: w[1],
                    value,
                    error,
                }
            })
            .collect();

        loop {
            let total: f64 = segments.iter().map(|s| s.value).sum();
            let error: f64 = segments.iter().map(|s| s.error).sum();
            if !total.is_finite() || !error.is_finite() {
                return Err(MeeError::Numeric {
                    message: "integrand produced a non-finite value".into(),
                    estimate: total,
                    error_bound: error,
                    evaluations,
                });
            }
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if error <= target {
                return Ok(Integral {
                    value: total,
                    error_bound: error,
                    evaluations,
                });
            }
            if segments.len() >= self.max_intervals {
                return Err(MeeError::Numeric {
                    message: format!(
                        "no convergence on [{lo}, {hi}] within {} subintervals",
                        self.max_intervals
                    ),
                    estimate: total,
                    error_bound: error,
                    evaluations,
                });
            }
            let (worst, _) = segments
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .unwrap();
            let seg = segments.swap_remove(worst);
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b {
                // interval can no longer be split in f64
                return Err(MeeError::Numeric {
                    message: format!("subinterval around {mid} collapsed"),
                    estimate: total,
                    error_bound: error,
                    evaluations,
                });
            }
            for (a, b) in [(seg.a, mid), (mid, seg.b)] {
                let (value, error) = kronrod(&f, a, b);
                evaluations += 15;
                segments.push(Segment { a, b, value, error });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0).unwrap();
        // 64/6 - 1/6 - (8 + 1) + 3
        assert_abs_diff_eq!(r.value, 63.0 / 6.0 - 9.0 + 3.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_mass() {
        let q = Quadrature::default();
        let r = q
            .integrate_with_breaks(|x| (-0.5 * x * x).exp(), &[-40.0, 0.0, 40.0])
            .unwrap();
        assert_abs_diff_eq!(r.value, (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn kink_on_breakpoint() {
        let q = Quadrature::default();
        let r = q.integrate_with_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 3.0]).unwrap();
        assert_abs_diff_eq!(r.value, 5.0, epsilon = 1e-13);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let q = Quadrature::default();
        let err = q.integrate(|x| 1.0 / x, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, MeeError::Numeric { .. }));
    }
}
