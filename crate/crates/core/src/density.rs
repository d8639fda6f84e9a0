//! Error densities for the MEE loss `−log f(y − h(x))`.
//!
//! [`SubbotinDensity`] is the main family (`f(u) = C_r exp(−|u|^r / r)`,
//! Laplace at `r = 1`, Gaussian at `r = 2`). [`ContaminatedGaussian`] is a
//! heavy-tailed mixture used for robustness experiments.
//! [`TruncatedDensity`] floors a density so its logarithm is Lipschitz, and
//! [`KernelDensityEstimate`] is the Parzen plug-in used by kernel MEE.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::quadrature::Quadrature;
use crate::{MeeError, Result};

/// Smoothing used for `|u|` inside the score when `r < 2`.
pub const SCORE_SMOOTHING: f64 = 1e-8;

/// Floor applied to Parzen estimates before taking logarithms.
pub const KDE_FLOOR: f64 = 1e-12;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A noise density on the real line.
///
/// `ln_pdf` and `score` are the unchecked hot-path evaluations used by the
/// trainers; [`ErrorDensity::log_density`] and
/// [`ErrorDensity::log_density_derivative`] validate their input.
pub trait ErrorDensity: Send + Sync + std::fmt::Debug {
    fn ln_pdf(&self, u: f64) -> f64;

    /// `d/du log f(u)`, possibly smoothed at non-differentiable points.
    fn score(&self, u: f64) -> f64;

    fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]);

    /// `sup_u |f'(u)|`; `+∞` when `f` is not Lipschitz.
    fn lipschitz_constant(&self) -> f64;

    /// Radius `R` such that `P(|U| > R) <= tail`.
    fn support_radius(&self, tail: f64) -> f64;

    /// Points where the density or its derivative is not smooth.
    fn kinks(&self) -> Vec<f64> {
        vec![0.0]
    }

    fn pdf(&self, u: f64) -> f64 {
        self.ln_pdf(u).exp()
    }

    fn log_density(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(MeeError::domain(format!("log-density at non-finite residual {u}")));
        }
        Ok(self.ln_pdf(u))
    }

    fn log_density_derivative(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(MeeError::domain(format!("score at non-finite residual {u}")));
        }
        Ok(self.score(u))
    }

    fn sample(&self, rng: &mut dyn RngCore, count: usize) -> Vec<f64> {
        let mut out = vec![0.0; count];
        self.sample_into(rng, &mut out);
        out
    }
}

/// Generalized Gaussian (exponential power) density `C_r exp(−|u|^r / r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubbotinDensity {
    r: f64,
    ln_c: f64,
    k_f: f64,
}

impl SubbotinDensity {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(MeeError::domain(format!("Subbotin shape must be positive, got {r}")));
        }
        // C_r = 1 / (2 r^{1/r - 1} Γ(1/r))
        let ln_c = -(LN_2 + (1.0 / r - 1.0) * r.ln() + ln_gamma(1.0 / r));
        let k_f = if r < 1.0 {
            f64::INFINITY
        } else if r == 1.0 {
            ln_c.exp()
        } else {
            // |f'| peaks where |u|^r = r - 1
            let a = (r - 1.0) / r;
            (ln_c + a * (r - 1.0).ln() - a).exp()
        };
        Ok(SubbotinDensity { r, ln_c, k_f })
    }

    pub fn gaussian() -> Self {
        Self::new(2.0).expect("r = 2 is valid")
    }

    pub fn laplace() -> Self {
        Self::new(1.0).expect("r = 1 is valid")
    }

    pub fn shape(&self) -> f64 {
        self.r
    }

    pub fn normalizing_constant(&self) -> f64 {
        self.ln_c.exp()
    }

    pub fn ln_normalizing_constant(&self) -> f64 {
        self.ln_c
    }

    /// `r^{2/r} Γ(3/r) / Γ(1/r)`.
    pub fn variance(&self) -> f64 {
        let r = self.r;
        ((2.0 / r) * r.ln() + ln_gamma(3.0 / r) - ln_gamma(1.0 / r)).exp()
    }

    /// Closed-form CDF through the regularized incomplete gamma function.
    pub fn cdf(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.5;
        }
        let x = u.abs().powf(self.r) / self.r;
        let half_mass = 0.5 * gamma_lr(1.0 / self.r, x);
        if u > 0.0 {
            0.5 + half_mass
        } else {
            0.5 - half_mass
        }
    }

    /// `|u|^r / r`, the non-constant part of the loss.
    #[inline]
    pub fn scaled_power(&self, u: f64) -> f64 {
        if self.r == 2.0 {
            0.5 * u * u
        } else if self.r == 1.0 {
            u.abs()
        } else {
            u.abs().powf(self.r) / self.r
        }
    }

    /// `E[|ξ + δ|^r − |ξ|^r]` by quadrature. Bounded by `|δ|^r` for `r ≤ 2`
    /// (a consequence of Clarkson's inequality).
    pub fn shifted_power_excess(&self, delta: f64) -> Result<f64> {
        let r = self.r;
        let g = |u: f64| (u + delta).abs().powf(r) - u.abs().powf(r);
        expectation(self, g, &[-delta])
    }
}

impl ErrorDensity for SubbotinDensity {
    #[inline]
    fn ln_pdf(&self, u: f64) -> f64 {
        self.ln_c - self.scaled_power(u)
    }

    #[inline]
    fn score(&self, u: f64) -> f64 {
        let r = self.r;
        if r == 2.0 {
            -u
        } else if r > 2.0 {
            -u.signum() * u.abs().powf(r - 1.0)
        } else {
            // -u (u² + ε²)^{(r-2)/2}, the derivative of -(u² + ε²)^{r/2} / r
            let smoothed_sq = u * u + SCORE_SMOOTHING * SCORE_SMOOTHING;
            if r == 1.0 {
                -u / smoothed_sq.sqrt()
            } else {
                -u * smoothed_sq.powf(0.5 * (r - 2.0))
            }
        }
    }

    fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        // |U|^r / r ~ Gamma(1/r, 1)
        let gamma = Gamma::new(1.0 / self.r, 1.0).expect("valid gamma shape");
        let inv_r = 1.0 / self.r;
        for slot in out.iter_mut() {
            let g: f64 = gamma.sample(rng);
            let magnitude = (self.r * g).powf(inv_r);
            *slot = if rng.random::<bool>() { magnitude } else { -magnitude };
        }
    }

    fn lipschitz_constant(&self) -> f64 {
        self.k_f
    }

    fn support_radius(&self, tail: f64) -> f64 {
        let a = 1.0 / self.r;
        let mass_outside = |radius: f64| gamma_ur(a, radius.powf(self.r) / self.r);
        let mut hi = 1.0;
        while mass_outside(hi) > tail && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mass_outside(mid) > tail {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `(1 − p) N(0, 1) + p N(0, s²)`: Gaussian noise with a fraction `p` of
/// outliers at scale `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContaminatedGaussian {
    outlier_prob: f64,
    outlier_scale: f64,
}

impl ContaminatedGaussian {
    pub fn new(outlier_prob: f64, outlier_scale: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&outlier_prob) || !(outlier_scale > 0.0 && outlier_scale.is_finite()) {
            return Err(MeeError::domain(format!(
                "contamination needs p in [0, 1] and scale > 0, got p={outlier_prob}, scale={outlier_scale}"
            )));
        }
        Ok(ContaminatedGaussian {
            outlier_prob,
            outlier_scale,
        })
    }

    pub fn variance(&self) -> f64 {
        (1.0 - self.outlier_prob) + self.outlier_prob * self.outlier_scale * self.outlier_scale
    }

    /// Log-weights of the two mixture components at `u`.
    fn component_logs(&self, u: f64) -> (f64, f64) {
        let s = self.outlier_scale;
        let inlier = (1.0 - self.outlier_prob).ln() - LN_SQRT_2PI - 0.5 * u * u;
        let z = u / s;
        let outlier = self.outlier_prob.ln() - LN_SQRT_2PI - s.ln() - 0.5 * z * z;
        (inlier, outlier)
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl ErrorDensity for ContaminatedGaussian {
    fn ln_pdf(&self, u: f64) -> f64 {
        let (a, b) = self.component_logs(u);
        log_add_exp(a, b)
    }

    fn score(&self, u: f64) -> f64 {
        let (a, b) = self.component_logs(u);
        let total = log_add_exp(a, b);
        let wa = (a - total).exp();
        let wb = (b - total).exp();
        -u * (wa + wb / (self.outlier_scale * self.outlier_scale))
    }

    fn sample_into(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        for slot in out.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            let outlier = rng.random::<f64>() < self.outlier_prob;
            *slot = if outlier { z * self.outlier_scale } else { z };
        }
    }

    /// Upper bound `sup|f'|` obtained by adding the component maxima.
    fn lipschitz_constant(&self) -> f64 {
        let phi1 = (-LN_SQRT_2PI - 0.5).exp();
        (1.0 - self.outlier_prob) * phi1 + self.outlier_prob * phi1 / (self.outlier_scale * self.outlier_scale)
    }

    fn support_radius(&self, tail: f64) -> f64 {
        let mass_outside = |radius: f64| {
            (1.0 - self.outlier_prob) * erfc(radius / 2f64.sqrt())
                + self.outlier_prob * erfc(radius / (self.outlier_scale * 2f64.sqrt()))
        };
        let mut hi = 1.0;
        while mass_outside(hi) > tail && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mass_outside(mid) > tail {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Serializable description of a noise law, used in generator specs and
/// training configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseSpec {
    Subbotin { r: f64 },
    Contaminated { outlier_prob: f64, outlier_scale: f64 },
}

impl NoiseSpec {
    pub fn build(&self) -> Result<Box<dyn ErrorDensity>> {
        Ok(match *self {
            NoiseSpec::Subbotin { r } => Box::new(SubbotinDensity::new(r)?),
            NoiseSpec::Contaminated {
                outlier_prob,
                outlier_scale,
            } => Box::new(ContaminatedGaussian::new(outlier_prob, outlier_scale)?),
        })
    }

    /// Subbotin shape, if this is a Subbotin law.
    pub fn shape(&self) -> Option<f64> {
        match *self {
            NoiseSpec::Subbotin { r } => Some(r),
            NoiseSpec::Contaminated { .. } => None,
        }
    }
}

/// `T_β f = max(f, β)`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedDensity<'a> {
    base: &'a dyn ErrorDensity,
    beta: f64,
}

impl<'a> TruncatedDensity<'a> {
    pub fn new(base: &'a dyn ErrorDensity, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(MeeError::domain(format!(
                "truncation level must lie in (0, 1], got {beta}"
            )));
        }
        Ok(TruncatedDensity { base, beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn value(&self, u: f64) -> f64 {
        self.base.pdf(u).max(self.beta)
    }

    pub fn log_value(&self, u: f64) -> f64 {
        self.base.ln_pdf(u).max(self.beta.ln())
    }

    /// Lipschitz constant `K_f / β` of `log T_β f`.
    pub fn log_lipschitz_bound(&self) -> f64 {
        self.base.lipschitz_constant() / self.beta
    }
}

/// Alias matching the operation name used by callers.
pub fn truncated_log_density(t: &TruncatedDensity<'_>, u: f64) -> f64 {
    t.log_value(u)
}

/// `E[g(ξ)]` for `ξ ~ density`, by adaptive quadrature on the effective
/// support. `breaks` adds kink locations of `g`.
pub fn expectation<G: Fn(f64) -> f64>(density: &dyn ErrorDensity, g: G, breaks: &[f64]) -> Result<f64> {
    let radius = density.support_radius(1e-16);
    let mut points = vec![-radius, radius];
    points.extend(density.kinks());
    points.extend(breaks.iter().copied().filter(|b| b.abs() < radius));
    let integrand = |u: f64| {
        let f = density.pdf(u);
        if f == 0.0 {
            0.0
        } else {
            g(u) * f
        }
    };
    Ok(Quadrature::with_abs_tol(1e-12)
        .integrate_with_breaks(integrand, &points)?
        .value)
}

/// Cross-entropy profile `V(s) = ∫ −log f(u − s) f(u) du`.
///
/// For symmetric `f`, `V` is minimised at `s = 0` where it equals the
/// differential entropy; this is why the regression function minimises the
/// entropy risk.
pub fn v_profile(density: &dyn ErrorDensity, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(MeeError::domain(format!("shift must be finite, got {s}")));
    }
    let kinks: Vec<f64> = density.kinks().into_iter().map(|k| k + s).collect();
    expectation(density, |u| -density.ln_pdf(u - s), &kinks)
}

pub fn differential_entropy(density: &dyn ErrorDensity) -> Result<f64> {
    v_profile(density, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Gaussian,
    Epanechnikov,
}

impl Kernel {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Kernel::Gaussian => (-0.5 * t * t - LN_SQRT_2PI).exp(),
            Kernel::Epanechnikov => {
                if t.abs() <= 1.0 {
                    0.75 * (1.0 - t * t)
                } else {
                    0.0
                }
            }
        }
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Kernel::Gaussian => -t * self.eval(t),
            Kernel::Epanechnikov => {
                if t.abs() < 1.0 {
                    -1.5 * t
                } else {
                    0.0
                }
            }
        }
    }
}

/// Rule-of-thumb bandwidth `1.06 σ̂ n^{-1/5}`.
pub fn silverman_bandwidth(residuals: &[f64]) -> Result<f64> {
    let n = residuals.len();
    if n < 2 {
        return Err(MeeError::usage("bandwidth rule needs at least two residuals"));
    }
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let var = residuals.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let b = 1.06 * var.sqrt() * (n as f64).powf(-0.2);
    if b > 0.0 && b.is_finite() {
        Ok(b)
    } else {
        Err(MeeError::domain("residuals have zero spread; bandwidth rule undefined"))
    }
}

/// Parzen estimate `f̂(v) = (1/n) Σ K((ε_i − v)/b) / b`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDensityEstimate {
    residuals: Vec<f64>,
    bandwidth: f64,
    kernel: Kernel,
}

impl KernelDensityEstimate {
    pub fn new(residuals: Vec<f64>, bandwidth: f64, kernel: Kernel) -> Result<Self> {
        if residuals.is_empty() {
            return Err(MeeError::usage("kernel density estimate needs at least one residual"));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(MeeError::domain(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(KernelDensityEstimate {
            residuals,
            bandwidth,
            kernel,
        })
    }

    pub fn with_silverman(residuals: Vec<f64>, kernel: Kernel) -> Result<Self> {
        let b = silverman_bandwidth(&residuals)?;
        Self::new(residuals, b, kernel)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn value(&self, v: f64) -> f64 {
        let b = self.bandwidth;
        let sum: f64 = self.residuals.iter().map(|e| self.kernel.eval((e - v) / b)).sum();
        sum / (self.residuals.len() as f64 * b)
    }

    /// `log max(f̂(v), KDE_FLOOR)`.
    pub fn log_value(&self, v: f64) -> f64 {
        self.value(v).max(KDE_FLOOR).ln()
    }
}

pub fn kernel_log_density(kde: &KernelDensityEstimate, v: f64) -> f64 {
    kde.log_value(v)
}

/// Standard normal density, used by tests and examples.
pub fn std_normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Quadrature normalising constant, independent of the closed form.
    fn quad_constant(r: f64) -> f64 {
        let q = Quadrature::with_abs_tol(1e-13);
        let mass = q
            .integrate_with_breaks(|u: f64| (-u.abs().powf(r) / r).exp(), &[-400.0, 0.0, 400.0])
            .unwrap()
            .value;
        1.0 / mass
    }

    #[test]
    fn log_density_examples() {
        let g = SubbotinDensity::gaussian();
        assert_abs_diff_eq!(g.log_density(0.0).unwrap(), -0.918_938_5, epsilon = 1e-7);
        let l = SubbotinDensity::laplace();
        assert_abs_diff_eq!(l.log_density(0.0).unwrap(), 0.5f64.ln(), epsilon = 1e-15);
        let d = SubbotinDensity::new(1.5).unwrap();
        let expected = quad_constant(1.5).ln() - 1.2f64.powf(1.5) / 1.5;
        assert_abs_diff_eq!(d.log_density(1.2).unwrap(), expected, epsilon = 1e-8);
    }

    #[test]
    fn closed_form_constants() {
        assert_abs_diff_eq!(
            SubbotinDensity::gaussian().normalizing_constant(),
            1.0 / (2.0 * PI).sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(SubbotinDensity::laplace().normalizing_constant(), 0.5, epsilon = 1e-12);
        for r in [0.5, 0.8, 1.5, 3.0] {
            let d = SubbotinDensity::new(r).unwrap();
            assert_relative_eq!(d.normalizing_constant(), quad_constant(r), max_relative = 1e-9);
        }
    }

    #[test]
    fn non_finite_input_is_domain_error() {
        let g = SubbotinDensity::gaussian();
        assert!(matches!(g.log_density(f64::NAN), Err(MeeError::Domain(_))));
        assert!(matches!(
            g.log_density_derivative(f64::INFINITY),
            Err(MeeError::Domain(_))
        ));
        assert!(SubbotinDensity::new(0.0).is_err());
        assert!(SubbotinDensity::new(-1.0).is_err());
    }

    #[test]
    fn score_examples() {
        let g = SubbotinDensity::gaussian();
        assert_eq!(g.log_density_derivative(0.7).unwrap(), -0.7);
        let l = SubbotinDensity::laplace();
        assert_eq!(l.log_density_derivative(-3.0).unwrap(), 1.0);
        assert_eq!(l.score(0.0), 0.0);
        assert_eq!(SubbotinDensity::new(0.5).unwrap().score(0.0), 0.0);
    }

    #[test]
    fn gaussian_score_matches_central_difference() {
        let g = SubbotinDensity::gaussian();
        let h = 1e-5;
        for i in 0..50 {
            let u = -4.0 + 0.163 * i as f64;
            let fd = (g.ln_pdf(u + h) - g.ln_pdf(u - h)) / (2.0 * h);
            assert_relative_eq!(g.score(u), fd, max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn lipschitz_constants() {
        assert_abs_diff_eq!(
            SubbotinDensity::gaussian().lipschitz_constant(),
            std_normal_pdf(1.0),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(SubbotinDensity::laplace().lipschitz_constant(), 0.5, epsilon = 1e-15);
        assert!(SubbotinDensity::new(0.7).unwrap().lipschitz_constant().is_infinite());
    }

    #[test]
    fn cdf_and_support_radius() {
        let d = SubbotinDensity::new(1.5).unwrap();
        assert_eq!(d.cdf(0.0), 0.5);
        assert_abs_diff_eq!(d.cdf(1.0) + d.cdf(-1.0), 1.0, epsilon = 1e-14);
        let radius = d.support_radius(1e-10);
        assert!(2.0 * (1.0 - d.cdf(radius)) <= 1.01e-10);
    }

    #[test]
    fn variance_closed_form() {
        assert_abs_diff_eq!(SubbotinDensity::gaussian().variance(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(SubbotinDensity::laplace().variance(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_sample_variance() {
        let g = SubbotinDensity::gaussian();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs = g.sample(&mut rng, 1_000_000);
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((0.99..=1.01).contains(&var), "variance {var}");
    }

    #[test]
    fn laplace_sample_variance() {
        let l = SubbotinDensity::laplace();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let xs = l.sample(&mut rng, n);
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        // Var(X²) = E X⁴ − 4 = 24 − 4 for Laplace(1)
        let se = (20.0 / n as f64).sqrt();
        assert!((var - 2.0).abs() < 3.0 * se, "variance {var}, se {se}");
    }

    #[test]
    fn subbotin_sample_passes_ks_against_quadrature_cdf() {
        let r = 1.5;
        let d = SubbotinDensity::new(r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut xs = d.sample(&mut rng, n);
        xs.sort_by(f64::total_cmp);

        // Quadrature CDF on a fine grid, interpolated linearly.
        let c = quad_constant(r);
        let q = Quadrature::with_abs_tol(1e-12);
        let grid: Vec<f64> = (0..=1200).map(|i| -12.0 + 0.02 * i as f64).collect();
        let mut cdf = Vec::with_capacity(grid.len());
        let mut acc = q
            .integrate(|u: f64| c * (-u.abs().powf(r) / r).exp(), -60.0, grid[0])
            .unwrap()
            .value;
        cdf.push(acc);
        for w in grid.windows(2) {
            acc += q
                .integrate_with_breaks(|u: f64| c * (-u.abs().powf(r) / r).exp(), &[w[0], w[1]])
                .unwrap()
                .value;
            cdf.push(acc);
        }
        let oracle = |x: f64| -> f64 {
            if x <= grid[0] {
                return cdf[0];
            }
            if x >= *grid.last().unwrap() {
                return 1.0;
            }
            let pos = (x - grid[0]) / 0.02;
            let i = pos.floor() as usize;
            let t = pos - i as f64;
            cdf[i] * (1.0 - t) + cdf[i + 1] * t
        };
        let mut ks: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = oracle(x);
            ks = ks
                .max((f - i as f64 / n as f64).abs())
                .max(((i + 1) as f64 / n as f64 - f).abs());
        }
        let critical = 1.628 / (n as f64).sqrt();
        assert!(ks < critical, "KS {ks} vs critical {critical}");
    }

    #[test]
    fn truncated_density_examples() {
        let g = SubbotinDensity::gaussian();
        let t = TruncatedDensity::new(&g, 0.1).unwrap();
        assert_eq!(truncated_log_density(&t, 10.0), 0.1f64.ln());
        assert_eq!(t.log_value(10.0) - t.log_value(12.0), 0.0);
        assert_eq!(t.value(0.0), g.pdf(0.0));
        assert!(TruncatedDensity::new(&g, 0.0).is_err());
        assert!(TruncatedDensity::new(&g, 1.5).is_err());
    }

    #[test]
    fn v_profile_gaussian() {
        let g = SubbotinDensity::gaussian();
        let v0 = v_profile(&g, 0.0).unwrap();
        assert_abs_diff_eq!(v0, 0.5 * (2.0 * PI * std::f64::consts::E).ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(v_profile(&g, 1.0).unwrap(), v0 + 0.5, epsilon = 1e-9);
    }

    #[test]
    fn v_profile_laplace_minimised_at_zero() {
        let l = SubbotinDensity::laplace();
        let v0 = v_profile(&l, 0.0).unwrap();
        // Laplace entropy 1 + ln 2
        assert_abs_diff_eq!(v0, 1.0 + LN_2, epsilon = 1e-9);
        for s in -3..=3 {
            assert!(v_profile(&l, s as f64).unwrap() >= v0 - 1e-8);
        }
    }

    #[test]
    fn contaminated_density_is_normalised_and_consistent() {
        let c = ContaminatedGaussian::new(0.05, 10.0).unwrap();
        let mass = expectation(&c, |_| 1.0, &[]).unwrap();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);
        let h = 1e-5;
        for u in [-20.0, -3.0, -0.4, 0.3, 2.0, 15.0] {
            let fd = (c.ln_pdf(u + h) - c.ln_pdf(u - h)) / (2.0 * h);
            assert_relative_eq!(c.score(u), fd, max_relative = 1e-6);
        }
        assert_abs_diff_eq!(c.variance(), 0.95 + 5.0, epsilon = 1e-12);
    }

    #[test]
    fn kernel_estimate_examples() {
        let b = 0.7;
        let kde = KernelDensityEstimate::new(vec![0.3], b, Kernel::Gaussian).unwrap();
        assert_abs_diff_eq!(
            kernel_log_density(&kde, 0.3),
            (1.0 / (b * (2.0 * PI).sqrt())).ln(),
            epsilon = 1e-14
        );

        let kde = KernelDensityEstimate::new(vec![0.0, 2.0], 1.0, Kernel::Gaussian).unwrap();
        let direct = 0.5 * (std_normal_pdf(-1.0) + std_normal_pdf(1.0));
        assert_abs_diff_eq!(kde.log_value(1.0), direct.ln(), epsilon = 1e-12);

        assert_eq!(kde.log_value(1e4), KDE_FLOOR.ln());
        assert!(matches!(
            KernelDensityEstimate::new(vec![], 1.0, Kernel::Gaussian),
            Err(MeeError::Usage(_))
        ));
    }

    #[test]
    fn kernel_estimate_integrates_to_one() {
        let residuals = vec![-1.3, -0.2, 0.0, 0.4, 2.2, 2.5];
        for kernel in [Kernel::Gaussian, Kernel::Epanechnikov] {
            let kde = KernelDensityEstimate::with_silverman(residuals.clone(), kernel).unwrap();
            let b = kde.bandwidth();
            let mut pts = vec![-1.3 - 6.0 * b, 2.5 + 6.0 * b];
            for e in &residuals {
                pts.push(e - b);
                pts.push(e + b);
            }
            let mass = Quadrature::with_abs_tol(1e-12)
                .integrate_with_breaks(|v| kde.value(v), &pts)
                .unwrap()
                .value;
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
        }
    }
}
