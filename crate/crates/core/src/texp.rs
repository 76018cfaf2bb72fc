//! The truncated exponential distribution `TExp(lambda, gamma)`:
//! `Exp(lambda)` conditioned on landing in `[0, gamma]`, with density
//! `Z * lambda * exp(-lambda x)` and `Z = 1 / (1 - exp(-lambda gamma))`.
//!
//! Every `1 - exp(-x)` is evaluated as `-expm1(-x)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Relative slack accepted on `a + b <= gamma` to absorb rounding in callers.
const SUPPORT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TExp {
    lambda: f64,
    gamma: f64,
}

impl TExp {
    pub fn new(lambda: f64, gamma: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(lambda) || !ok(gamma) {
            return Err(Error::InvalidParameter(format!(
                "TExp needs finite positive parameters, got lambda = {lambda}, gamma = {gamma}"
            )));
        }
        Ok(TExp { lambda, gamma })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Normalisation `Z(lambda, gamma) = (1 - e^{-lambda gamma})^{-1}`.
    pub fn z_norm(&self) -> f64 {
        1.0 / -(-self.lambda * self.gamma).exp_m1()
    }

    pub fn density(&self, x: f64) -> f64 {
        if !(0.0..=self.gamma).contains(&x) {
            return 0.0;
        }
        self.z_norm() * self.lambda * (-self.lambda * x).exp()
    }

    /// `F(x) = (1 - e^{-lambda x}) / (1 - e^{-lambda gamma})`, clamped outside the support.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= self.gamma {
            1.0
        } else {
            ((-self.lambda * x).exp_m1() / (-self.lambda * self.gamma).exp_m1()).min(1.0)
        }
    }

    /// Inverse CDF at `u` in `[0, 1]`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let x = -(u * (-self.lambda * self.gamma).exp_m1()).ln_1p() / self.lambda;
        x.clamp(0.0, self.gamma)
    }

    /// One draw by inverse transform of a uniform on `[0, 1)`.
    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.inverse_cdf(rng.uniform())
    }

    pub fn mean(&self) -> f64 {
        let (l, g) = (self.lambda, self.gamma);
        self.z_norm() * (1.0 / l - (-l * g).exp() * (g + 1.0 / l))
    }

    fn check_interval(&self, a: f64, b: f64) -> Result<()> {
        let domain = Error::DomainError { a, b, gamma: self.gamma };
        if !(a >= 0.0 && b >= 0.0) || a + b > self.gamma * (1.0 + SUPPORT_SLACK) {
            return Err(domain);
        }
        Ok(())
    }

    /// `Pr[nu in (a, a+b)] = F(a+b) - F(a)`.
    pub fn interval_prob(&self, a: f64, b: f64) -> Result<f64> {
        self.check_interval(a, b)?;
        let l = self.lambda;
        Ok((self.z_norm() * (-l * a).exp() * -(-l * b).exp_m1()).clamp(0.0, 1.0))
    }

    /// The two upper bounds `2 e^{-la}(1 - e^{-lb})` and `2 b l e^{-la}` on
    /// [`TExp::interval_prob`], valid when `lambda * gamma > 1`.
    pub fn interval_prob_bounds(&self, a: f64, b: f64) -> (f64, f64) {
        let l = self.lambda;
        let head = 2.0 * (-l * a).exp();
        (head * -(-l * b).exp_m1(), head * b * l)
    }

    /// `Pr[nu <= a+b | nu >= a]`.
    pub fn cond_prob(&self, a: f64, b: f64) -> Result<f64> {
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::DomainError { a, b, gamma: self.gamma });
        }
        if a >= self.gamma {
            return Err(Error::DegenerateCondition { a, gamma: self.gamma });
        }
        self.check_interval(a, b)?;
        let l = self.lambda;
        // Dividing numerator and denominator by e^{-la}.
        let num = -(-l * b).exp_m1();
        let den = -(-l * (self.gamma - a)).exp_m1();
        Ok((num / den).clamp(0.0, 1.0))
    }

    /// Upper bound `b l e^{-la} / (e^{-la} - e^{-l gamma})` on [`TExp::cond_prob`].
    pub fn cond_prob_bound(&self, a: f64, b: f64) -> f64 {
        let l = self.lambda;
        b * l / -(-l * (self.gamma - a)).exp_m1()
    }
}

/// Draw from the untruncated `Exp(rate)` by inverse transform.
#[inline]
pub fn exponential_sample(rate: f64, rng: &mut RngStream) -> f64 {
    -(-rng.uniform()).ln_1p() / rate
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and `cdf`.
/// Sorts `samples` in place.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Critical value of the two-sided KS test at level 0.01.
pub fn ks_critical_001(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}
