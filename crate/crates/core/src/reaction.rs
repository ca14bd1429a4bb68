//! Follower brake-reaction time as a time-shifted Gamma distribution.
//!
//! `t_BR = t0 + X` with `X ~ Gamma(k, theta)`. The shift is the minimum
//! achievable reaction time; shape and scale spread the remainder.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Identifier of the generator behind [`ReactionTimeSampler`].
pub const RNG_ALGORITHM: &str = "ChaCha20Rng/rand_chacha-0.9+rand_distr-0.5-Gamma";

const QUANTILE_MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedGamma {
    #[serde(rename = "t0")]
    pub shift: f64,
    #[serde(rename = "k")]
    pub shape: f64,
    #[serde(rename = "theta")]
    pub scale: f64,
}

impl Default for ShiftedGamma {
    /// Mean 0.7 s.
    fn default() -> Self {
        Self {
            shift: 0.4,
            shape: 2.0,
            scale: 0.15,
        }
    }
}

impl ShiftedGamma {
    pub fn new(shift: f64, shape: f64, scale: f64) -> Result<Self> {
        let d = Self {
            shift,
            shape,
            scale,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shift.is_finite() && self.shift >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "t0 must be >= 0, got {}",
                self.shift
            )));
        }
        if !(self.shape.is_finite() && self.shape > 0.0) {
            return Err(Error::InvalidParams(format!(
                "k must be > 0, got {}",
                self.shape
            )));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidParams(format!(
                "theta must be > 0, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.shift + self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    pub fn pdf(&self, t: f64) -> f64 {
        let y = (t - self.shift) / self.scale;
        if y < 0.0 {
            return 0.0;
        }
        standard_pdf(self.shape, y) / self.scale
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let y = (t - self.shift) / self.scale;
        if y <= 0.0 {
            0.0
        } else {
            gamma_lr(self.shape, y)
        }
    }

    /// Inverse CDF for `p` in (0, 1). Strictly increasing in `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.validate()?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "probability must lie in (0, 1), got {p}"
            )));
        }
        Ok(self.shift + self.scale * standard_quantile(self.shape, p))
    }
}

fn standard_pdf(k: f64, y: f64) -> f64 {
    if y == 0.0 {
        return match k.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => 1.0,
            _ => 0.0,
        };
    }
    ((k - 1.0) * y.ln() - y - ln_gamma(k)).exp()
}

/// Safeguarded Newton on the regularized incomplete gamma function. The
/// upper tail form is used above the median so that `p` close to 1 keeps
/// its relative precision.
fn standard_quantile(k: f64, p: f64) -> f64 {
    let upper = p > 0.5;
    // increasing in y, zero at the quantile
    let residual = |y: f64| {
        if upper {
            (1.0 - p) - gamma_ur(k, y)
        } else {
            gamma_lr(k, y) - p
        }
    };

    let mut lo = 0.0_f64;
    let mut hi = k.max(1.0);
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }

    let mut y = 0.5 * (lo + hi);
    for _ in 0..QUANTILE_MAX_ITER {
        let r = residual(y);
        if r == 0.0 {
            return y;
        }
        if r < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let density = standard_pdf(k, y);
        let newton = y - r / density;
        let next = if density.is_finite() && density > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - y).abs() <= 4.0 * f64::EPSILON * next.abs() || hi - lo <= f64::MIN_POSITIVE {
            return next;
        }
        y = next;
    }
    y
}

/// Seeded sampler. Owns its generator, so one sampler serves one thread.
#[derive(Debug, Clone)]
pub struct ReactionTimeSampler {
    params: ShiftedGamma,
    gamma: Gamma<f64>,
    rng: ChaCha20Rng,
}

impl ReactionTimeSampler {
    pub fn new(params: ShiftedGamma, seed: u64) -> Result<Self> {
        params.validate()?;
        let gamma = Gamma::new(params.shape, params.scale)
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        Ok(Self {
            params,
            gamma,
            rng: ChaCha20Rng::seed_from_u64(seed),
        })
    }

    pub fn params(&self) -> &ShiftedGamma {
        &self.params
    }

    pub fn next_time(&mut self) -> f64 {
        self.params.shift + self.gamma.sample(&mut self.rng)
    }

    pub fn take(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_time()).collect()
    }
}

/// `n` reaction times drawn with a fresh generator seeded by `seed`.
pub fn sample(params: &ShiftedGamma, seed: u64, n: usize) -> Result<Vec<f64>> {
    Ok(ReactionTimeSampler::new(*params, seed)?.take(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // P(2, y) = 1 - e^{-y}(1 + y)
    fn shape2_cdf(y: f64) -> f64 {
        1.0 - (-y).exp() * (1.0 + y)
    }

    fn bisect_oracle(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn sample_support_and_mean() {
        let d = ShiftedGamma::default();
        let xs = sample(&d, 7, 10_000).unwrap();
        assert!(xs.iter().all(|&t| t >= 0.4));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let se = (d.variance() / xs.len() as f64).sqrt();
        assert!((mean - 0.7).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn sample_edge_cases() {
        assert!(sample(&ShiftedGamma::default(), 1, 0).unwrap().is_empty());
        let tight = ShiftedGamma::new(0.7, 1e-6, 1e-6).unwrap();
        let xs = sample(&tight, 3, 1000).unwrap();
        assert!(xs.iter().all(|&t| (0.7..0.7 + 1e-4).contains(&t)));
        assert!(ShiftedGamma::new(-0.1, 1.0, 1.0).is_err());
        assert!(ShiftedGamma::new(0.1, 0.0, 1.0).is_err());
        assert!(ShiftedGamma::new(0.1, 1.0, 0.0).is_err());
        let bad = ShiftedGamma {
            shift: 0.0,
            shape: -1.0,
            scale: 1.0,
        };
        assert!(matches!(sample(&bad, 0, 5), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn seed_determinism() {
        let d = ShiftedGamma::default();
        assert_eq!(sample(&d, 42, 100).unwrap(), sample(&d, 42, 100).unwrap());
        assert_ne!(sample(&d, 42, 100).unwrap(), sample(&d, 43, 100).unwrap());
    }

    #[test]
    fn exponential_quantile() {
        let d = ShiftedGamma::new(0.4, 1.0, 0.3).unwrap();
        let p = 1.0 - (-1.0_f64).exp();
        assert_abs_diff_eq!(d.quantile(p).unwrap(), 0.7, epsilon = 1e-12);
    }

    #[test]
    fn quantile_matches_bisection_oracle() {
        let d = ShiftedGamma::default();
        let oracle = 0.4 + 0.15 * bisect_oracle(shape2_cdf, 0.5, 0.0, 50.0);
        assert_abs_diff_eq!(d.quantile(0.5).unwrap(), oracle, epsilon = 1e-9);
        for p in [1e-9, 0.01, 0.3, 0.9, 0.999_999] {
            let oracle = 0.4 + 0.15 * bisect_oracle(shape2_cdf, p, 0.0, 100.0);
            assert_abs_diff_eq!(d.quantile(p).unwrap(), oracle, epsilon = 1e-9);
        }
    }

    #[test]
    fn quantile_lower_limit_and_domain() {
        let d = ShiftedGamma::default();
        let q = d.quantile(1e-300).unwrap();
        assert!(q >= 0.4 && q - 0.4 < 1e-12);
        // P(2, y) ~ y^2 / 2 near zero
        let q = d.quantile(1e-12).unwrap();
        assert_abs_diff_eq!(q - 0.4, 0.15 * (2e-12_f64).sqrt(), epsilon = 1e-12);
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_inverts_cdf_small_shape() {
        let d = ShiftedGamma::new(0.2, 0.3, 0.5).unwrap();
        for p in [0.001, 0.2, 0.5, 0.8, 0.99] {
            let q = d.quantile(p).unwrap();
            assert_abs_diff_eq!(d.cdf(q), p, epsilon = 1e-9);
        }
    }

    #[test]
    fn pdf_integrates_to_cdf() {
        let d = ShiftedGamma::default();
        let (a, b, n) = (0.4, 1.0, 20_000);
        let h = (b - a) / n as f64;
        let mut s = d.pdf(a) + d.pdf(b);
        for i in 1..n {
            s += d.pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        assert_abs_diff_eq!(s * h / 3.0, d.cdf(b), epsilon = 1e-9);
    }
}
