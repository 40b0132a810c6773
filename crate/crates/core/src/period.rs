//! Infectious-period distributions, specified through their Laplace transform.
//!
//! The transform `phi(theta) = E[exp(-theta I)]` is all the analytic layer
//! needs: `1 - phi(rate)` is the probability that an infective contacts a
//! given neighbour before recovery.  An infinite period is represented by
//! `f64::INFINITY`, which makes that contact probability exactly one.

use rand::Rng;

use crate::math;
use crate::{Error, Result};

/// Distribution of the time an individual stays infectious.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfectiousPeriod {
    /// Almost surely equal to `duration`.
    Fixed { duration: f64 },
    /// Infinite with probability `p_infinite`, zero otherwise.
    ZeroOrInfinite { p_infinite: f64 },
    /// Exponentially distributed with the given mean.
    Exponential { mean: f64 },
}

impl InfectiousPeriod {
    pub fn fixed(duration: f64) -> Result<Self> {
        let ip = InfectiousPeriod::Fixed { duration };
        ip.validate()?;
        Ok(ip)
    }

    pub fn zero_or_infinite(p_infinite: f64) -> Result<Self> {
        let ip = InfectiousPeriod::ZeroOrInfinite { p_infinite };
        ip.validate()?;
        Ok(ip)
    }

    pub fn exponential(mean: f64) -> Result<Self> {
        let ip = InfectiousPeriod::Exponential { mean };
        ip.validate()?;
        Ok(ip)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InfectiousPeriod::Fixed { duration } => {
                if !(duration > 0.0) || !duration.is_finite() {
                    return Err(Error::InvalidParameter(
                        "fixed infectious period must be positive and finite",
                    ));
                }
            }
            InfectiousPeriod::ZeroOrInfinite { p_infinite } => {
                if !(0.0..=1.0).contains(&p_infinite) {
                    return Err(Error::InvalidParameter(
                        "zero-or-infinite probability must lie in [0, 1]",
                    ));
                }
            }
            InfectiousPeriod::Exponential { mean } => {
                if !(mean > 0.0) || !mean.is_finite() {
                    return Err(Error::InvalidParameter(
                        "exponential infectious period needs a positive finite mean",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Laplace transform `phi(theta) = E[exp(-theta I)]` for `theta >= 0`.
    pub fn laplace(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) {
            return Err(Error::Domain("laplace transform requires theta >= 0"));
        }
        Ok(self.laplace_unchecked(theta))
    }

    pub(crate) fn laplace_unchecked(&self, theta: f64) -> f64 {
        if theta == 0.0 {
            return 1.0;
        }
        match *self {
            InfectiousPeriod::Fixed { duration } => math::exp(-theta * duration),
            InfectiousPeriod::ZeroOrInfinite { p_infinite } => 1.0 - p_infinite,
            InfectiousPeriod::Exponential { mean } => 1.0 / (1.0 + theta * mean),
        }
    }

    /// Limit of the transform as `theta -> infinity`, i.e. `P(I = 0)`.
    pub fn laplace_limit(&self) -> f64 {
        match *self {
            InfectiousPeriod::Fixed { .. } => 0.0,
            InfectiousPeriod::ZeroOrInfinite { p_infinite } => 1.0 - p_infinite,
            InfectiousPeriod::Exponential { .. } => 0.0,
        }
    }

    /// Draw one infectious period; may be `f64::INFINITY`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            InfectiousPeriod::Fixed { duration } => duration,
            InfectiousPeriod::ZeroOrInfinite { p_infinite } => {
                if rng.random::<f64>() < p_infinite {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            InfectiousPeriod::Exponential { mean } => {
                // Inverse CDF; u in [0, 1) keeps the log argument positive.
                let u: f64 = rng.random();
                -mean * math::ln(1.0 - u)
            }
        }
    }
}

/// Probability that an infective with the given period makes at least one
/// contact with a fixed neighbour at per-pair `rate`.
///
/// Handles the edge cases exactly: a zero rate or zero period never contacts,
/// an infinite period at positive rate always does.
pub fn contact_prob(rate: f64, period: f64) -> f64 {
    debug_assert!(rate >= 0.0 && period >= 0.0);
    if rate == 0.0 || period == 0.0 {
        0.0
    } else if period.is_infinite() {
        1.0
    } else {
        -math::exp_m1(-rate * period)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn laplace_at_zero_is_one() {
        let kinds = [
            InfectiousPeriod::fixed(1.0).unwrap(),
            InfectiousPeriod::zero_or_infinite(0.3).unwrap(),
            InfectiousPeriod::exponential(2.0).unwrap(),
        ];
        for ip in kinds {
            assert_eq!(ip.laplace(0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn laplace_closed_forms() {
        let fixed = InfectiousPeriod::fixed(1.0).unwrap();
        assert!((fixed.laplace(0.1).unwrap() - 0.9048374180359595).abs() < 1e-15);

        let zi = InfectiousPeriod::zero_or_infinite(0.3).unwrap();
        assert_eq!(zi.laplace(2.0).unwrap(), 0.7);

        let exp = InfectiousPeriod::exponential(2.0).unwrap();
        assert!((exp.laplace(0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn laplace_rejects_negative_theta() {
        let ip = InfectiousPeriod::fixed(1.0).unwrap();
        assert!(matches!(ip.laplace(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn laplace_nonincreasing_and_convex() {
        let kinds = [
            InfectiousPeriod::fixed(0.7).unwrap(),
            InfectiousPeriod::zero_or_infinite(0.4).unwrap(),
            InfectiousPeriod::exponential(1.3).unwrap(),
        ];
        for ip in kinds {
            let grid: alloc::vec::Vec<f64> =
                (0..=100).map(|i| ip.laplace(i as f64 * 0.1).unwrap()).collect();
            for w in grid.windows(2) {
                assert!(w[1] <= w[0] + 1e-15);
            }
            // Midpoint convexity on interior points of the uniform grid.
            for i in 1..grid.len() - 1 {
                assert!(grid[i] <= 0.5 * (grid[i - 1] + grid[i + 1]) + 1e-12);
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(InfectiousPeriod::fixed(0.0).is_err());
        assert!(InfectiousPeriod::fixed(f64::NAN).is_err());
        assert!(InfectiousPeriod::zero_or_infinite(1.5).is_err());
        assert!(InfectiousPeriod::exponential(-1.0).is_err());
    }

    #[test]
    fn sampling_edge_kinds() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let fixed = InfectiousPeriod::fixed(1.0).unwrap();
        let always_inf = InfectiousPeriod::zero_or_infinite(1.0).unwrap();
        for _ in 0..100 {
            assert_eq!(fixed.sample(&mut rng), 1.0);
            assert!(always_inf.sample(&mut rng).is_infinite());
        }
    }

    #[test]
    fn monte_carlo_matches_laplace() {
        // E[exp(-theta I)] estimated from draws must sit within 3 SE of the
        // transform, for every kind and a spread of theta.
        let kinds = [
            InfectiousPeriod::fixed(1.0).unwrap(),
            InfectiousPeriod::zero_or_infinite(0.35).unwrap(),
            InfectiousPeriod::exponential(2.0).unwrap(),
        ];
        let n = 1_000_000usize;
        for (k, ip) in kinds.iter().enumerate() {
            let mut rng = ChaCha12Rng::seed_from_u64(42 + k as u64);
            for theta in [0.1, 1.0, 10.0] {
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for _ in 0..n {
                    let x = crate::math::exp(-theta * ip.sample(&mut rng));
                    sum += x;
                    sumsq += x * x;
                }
                let mean = sum / n as f64;
                let var = (sumsq / n as f64 - mean * mean).max(0.0);
                let se = (var / n as f64).sqrt();
                let exact = ip.laplace(theta).unwrap();
                assert!(
                    (mean - exact).abs() <= 3.0 * se + 1e-12,
                    "kind {k} theta {theta}: mean {mean} vs {exact} (se {se})"
                );
            }
        }
    }

    #[test]
    fn contact_prob_edges() {
        assert_eq!(contact_prob(0.0, f64::INFINITY), 0.0);
        assert_eq!(contact_prob(1.0, 0.0), 0.0);
        assert_eq!(contact_prob(2.0, f64::INFINITY), 1.0);
        assert!((contact_prob(1.0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }
}
