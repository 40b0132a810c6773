//! Global-degree distributions.
//!
//! Five families are supported: Poisson, geometric (support including 0),
//! constant, a piecewise power law that is flat up to `k_star`, and a power
//! law with exponential cutoff.  Infinite-support families are truncated at
//! `tail_cap` (default 100 000), chosen so the omitted mass is below 1e-12
//! for every admissible parameter set; the retained table is renormalised so
//! it is a proper distribution in its own right.  Sampling, the pmf and the
//! size-biased pmf all read from that table, so they are mutually consistent
//! by construction.

use alloc::vec::Vec;

use rand::Rng;

use crate::math;
use crate::{Error, Result};

/// Default truncation bound for infinite-support families.
pub const DEFAULT_TAIL_CAP: usize = 100_000;

/// Raw table entries below `total * TAIL_TRIM_REL` are dropped from the tail;
/// they carry no representable probability.
const TAIL_TRIM_REL: f64 = 1e-30;

/// Parametric family of the degree law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegreeFamily {
    /// Poisson with the given mean (> 0).
    Poisson { mean: f64 },
    /// `P(D = k) = p (1-p)^k` for `k >= 0`, `p` in (0, 1).
    Geometric { success_prob: f64 },
    /// Point mass at `degree`.
    Constant { degree: usize },
    /// `p_k ∝ k_star^(-a)` for `0 <= k <= k_star`, `p_k ∝ k^(-a)` beyond;
    /// `a > 2` keeps the variance finite.  The flat head includes zero: with
    /// `(k_star, a) = (10, 7/2)` this yields mean ~8.04 and variance ~96,
    /// the heavy-tailed family used in the reference experiments.
    PowerLaw { k_star: usize, exponent: f64 },
    /// `p_k ∝ k^(-a) exp(-k / kappa)` for `k >= 1`; the cutoff restores all
    /// moments, so any `a > 0` is allowed.
    PowerLawCutoff { kappa: f64, exponent: f64 },
}

/// A degree law with its truncated probability table, cumulative tables and
/// moments precomputed.  Immutable after construction and safe to share.
#[derive(Debug, Clone)]
pub struct DegreeDistribution {
    family: DegreeFamily,
    tail_cap: usize,
    /// `pmf[k] = P(D = k)` on the truncated, renormalised support.
    pmf: Vec<f64>,
    /// `cdf[k] = P(D <= k)`; last entry forced to exactly 1.
    cdf: Vec<f64>,
    /// Cumulative table of the size-biased law; empty when the mean is zero.
    size_biased_cdf: Vec<f64>,
    mean: f64,
    variance: f64,
}

impl DegreeDistribution {
    /// Build with the default tail cap.
    pub fn new(family: DegreeFamily) -> Result<Self> {
        Self::with_tail_cap(family, DEFAULT_TAIL_CAP)
    }

    /// Build with an explicit truncation bound for infinite-support families.
    pub fn with_tail_cap(family: DegreeFamily, tail_cap: usize) -> Result<Self> {
        if tail_cap < 1 {
            return Err(Error::InvalidParameter("tail_cap must be at least 1"));
        }
        validate_family(&family)?;

        let mut raw = raw_masses(&family, tail_cap);
        let total = math::kahan_sum(raw.iter().copied());
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidParameter(
                "degree family has no representable probability mass",
            ));
        }
        while raw.len() > 1 && *raw.last().unwrap() < total * TAIL_TRIM_REL {
            raw.pop();
        }
        let kept = math::kahan_sum(raw.iter().copied());
        let pmf: Vec<f64> = raw.iter().map(|&x| x / kept).collect();

        let mut cdf = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        let mut carry = 0.0;
        for &p in &pmf {
            let y = p - carry;
            let t = acc + y;
            carry = (t - acc) - y;
            acc = t;
            cdf.push(acc.min(1.0));
        }
        *cdf.last_mut().unwrap() = 1.0;

        let (mean, variance) = match family {
            DegreeFamily::Poisson { mean } => (mean, mean),
            DegreeFamily::Geometric { success_prob: p } => {
                ((1.0 - p) / p, (1.0 - p) / (p * p))
            }
            DegreeFamily::Constant { degree } => (degree as f64, 0.0),
            _ => {
                let m = math::kahan_sum(pmf.iter().enumerate().map(|(k, &p)| k as f64 * p));
                let m2 = math::kahan_sum(
                    pmf.iter()
                        .enumerate()
                        .map(|(k, &p)| (k as f64) * (k as f64) * p),
                );
                (m, (m2 - m * m).max(0.0))
            }
        };

        let size_biased_cdf = if mean > 0.0 {
            let table_mean =
                math::kahan_sum(pmf.iter().enumerate().map(|(k, &p)| k as f64 * p));
            let mut sb = Vec::with_capacity(pmf.len());
            let mut acc = 0.0;
            for (k, &p) in pmf.iter().enumerate() {
                acc += k as f64 * p / table_mean;
                sb.push(acc.min(1.0));
            }
            *sb.last_mut().unwrap() = 1.0;
            sb
        } else {
            Vec::new()
        };

        Ok(DegreeDistribution {
            family,
            tail_cap,
            pmf,
            cdf,
            size_biased_cdf,
            mean,
            variance,
        })
    }

    pub fn family(&self) -> DegreeFamily {
        self.family
    }

    pub fn tail_cap(&self) -> usize {
        self.tail_cap
    }

    /// Largest degree with positive probability after truncation.
    pub fn support_max(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `P(D = k)`; zero outside the (truncated) support.
    pub fn pmf(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    /// `(mean, variance)` of the degree law.
    pub fn moments(&self) -> (f64, f64) {
        (self.mean, self.variance)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Probability generating function `f_D(s)` for `s` in [0, 1].
    pub fn pgf(&self, s: f64) -> Result<f64> {
        check_unit_interval(s)?;
        Ok(self.pgf_unchecked(s))
    }

    /// Derivative `f_D'(s)` for `s` in [0, 1].
    pub fn pgf_prime(&self, s: f64) -> Result<f64> {
        check_unit_interval(s)?;
        Ok(self.pgf_prime_unchecked(s))
    }

    pub(crate) fn pgf_unchecked(&self, s: f64) -> f64 {
        match self.family {
            DegreeFamily::Poisson { mean } => math::exp(mean * (s - 1.0)),
            DegreeFamily::Geometric { success_prob: p } => p / (1.0 - (1.0 - p) * s),
            DegreeFamily::Constant { degree } => math::powi(s, degree as i32),
            _ => {
                let mut pow = 1.0;
                math::kahan_sum(self.pmf.iter().map(|&p| {
                    let term = p * pow;
                    pow *= s;
                    term
                }))
            }
        }
    }

    pub(crate) fn pgf_prime_unchecked(&self, s: f64) -> f64 {
        match self.family {
            DegreeFamily::Poisson { mean } => mean * math::exp(mean * (s - 1.0)),
            DegreeFamily::Geometric { success_prob: p } => {
                let q = 1.0 - p;
                p * q / ((1.0 - q * s) * (1.0 - q * s))
            }
            DegreeFamily::Constant { degree } => {
                if degree == 0 {
                    0.0
                } else {
                    degree as f64 * math::powi(s, degree as i32 - 1)
                }
            }
            _ => {
                let mut pow = 1.0;
                math::kahan_sum(self.pmf.iter().enumerate().map(|(k, &p)| {
                    let term = if k == 0 {
                        0.0
                    } else {
                        k as f64 * p * pow
                    };
                    if k >= 1 {
                        pow *= s;
                    }
                    term
                }))
            }
        }
    }

    /// Size-biased pmf `P(D~ = k) = k p_k / mean`.
    pub fn size_biased_pmf(&self, k: usize) -> Result<f64> {
        if self.mean == 0.0 {
            return Err(Error::DegenerateDegree);
        }
        Ok(k as f64 * self.pmf(k) / self.mean)
    }

    /// Draw one degree; inversion on the cumulative table.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.cdf.len() - 1)
    }

    /// Draw from the size-biased companion law `D~`.
    pub fn sample_size_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        if self.size_biased_cdf.is_empty() {
            return Err(Error::DegenerateDegree);
        }
        let u: f64 = rng.random();
        let idx = self.size_biased_cdf.partition_point(|&c| c <= u);
        Ok(idx.min(self.size_biased_cdf.len() - 1))
    }
}

fn check_unit_interval(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain("pgf argument must lie in [0, 1]"));
    }
    Ok(())
}

fn validate_family(family: &DegreeFamily) -> Result<()> {
    match *family {
        DegreeFamily::Poisson { mean } => {
            if !(mean > 0.0) || !mean.is_finite() {
                return Err(Error::InvalidParameter("Poisson mean must be positive"));
            }
        }
        DegreeFamily::Geometric { success_prob } => {
            if !(success_prob > 0.0 && success_prob < 1.0) {
                return Err(Error::InvalidParameter(
                    "geometric success probability must lie in (0, 1)",
                ));
            }
        }
        DegreeFamily::Constant { .. } => {}
        DegreeFamily::PowerLaw { k_star, exponent } => {
            if k_star < 1 {
                return Err(Error::InvalidParameter("power-law k_star must be >= 1"));
            }
            // a <= 2 would break the finite-variance standing assumption.
            if !(exponent > 2.0) || !exponent.is_finite() {
                return Err(Error::InvalidParameter("power-law exponent must exceed 2"));
            }
        }
        DegreeFamily::PowerLawCutoff { kappa, exponent } => {
            if !(kappa > 0.0) || !kappa.is_finite() {
                return Err(Error::InvalidParameter("cutoff scale kappa must be positive"));
            }
            if !(exponent > 0.0) || !exponent.is_finite() {
                return Err(Error::InvalidParameter(
                    "cutoff power-law exponent must be positive",
                ));
            }
        }
    }
    Ok(())
}

/// Unnormalised masses on `0..=cap` (or the exact finite support).
fn raw_masses(family: &DegreeFamily, cap: usize) -> Vec<f64> {
    match *family {
        DegreeFamily::Poisson { mean } => {
            let mut raw = Vec::with_capacity(cap + 1);
            let mut p = math::exp(-mean);
            for k in 0..=cap {
                raw.push(p);
                p *= mean / (k + 1) as f64;
            }
            raw
        }
        DegreeFamily::Geometric { success_prob } => {
            let mut raw = Vec::with_capacity(cap + 1);
            let mut p = success_prob;
            for _ in 0..=cap {
                raw.push(p);
                p *= 1.0 - success_prob;
            }
            raw
        }
        DegreeFamily::Constant { degree } => {
            let mut raw = alloc::vec![0.0; degree + 1];
            raw[degree] = 1.0;
            raw
        }
        DegreeFamily::PowerLaw { k_star, exponent } => {
            let mut raw = Vec::with_capacity(cap + 1);
            let flat = math::powf(k_star as f64, -exponent);
            for k in 0..=cap {
                raw.push(if k <= k_star {
                    flat
                } else {
                    math::powf(k as f64, -exponent)
                });
            }
            raw
        }
        DegreeFamily::PowerLawCutoff { kappa, exponent } => {
            let mut raw = Vec::with_capacity(cap + 1);
            raw.push(0.0);
            for k in 1..=cap {
                let kf = k as f64;
                raw.push(math::powf(kf, -exponent) * math::exp(-kf / kappa));
            }
            raw
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn all_test_families() -> Vec<DegreeDistribution> {
        alloc::vec![
            DegreeDistribution::new(DegreeFamily::Poisson { mean: 5.0 }).unwrap(),
            DegreeDistribution::new(DegreeFamily::Geometric { success_prob: 0.2 }).unwrap(),
            DegreeDistribution::new(DegreeFamily::Constant { degree: 5 }).unwrap(),
            DegreeDistribution::new(DegreeFamily::PowerLaw { k_star: 10, exponent: 3.5 })
                .unwrap(),
            DegreeDistribution::new(DegreeFamily::PowerLawCutoff { kappa: 20.0, exponent: 1.5 })
                .unwrap(),
        ]
    }

    #[test]
    fn pmf_normalises() {
        for dist in all_test_families() {
            let total = crate::math::kahan_sum((0..=dist.support_max()).map(|k| dist.pmf(k)));
            assert!((total - 1.0).abs() < 1e-10, "{:?}: {total}", dist.family());
            assert!((0..=dist.support_max()).all(|k| dist.pmf(k) >= 0.0));
        }
    }

    #[test]
    fn poisson_point_values() {
        let d = DegreeDistribution::new(DegreeFamily::Poisson { mean: 5.0 }).unwrap();
        assert!((d.pmf(0) - 6.7379469990854670e-3).abs() < 1e-15);
        let (m, v) = d.moments();
        assert_eq!((m, v), (5.0, 5.0));
    }

    #[test]
    fn constant_point_mass() {
        let d = DegreeDistribution::new(DegreeFamily::Constant { degree: 5 }).unwrap();
        assert_eq!(d.pmf(5), 1.0);
        assert_eq!(d.pmf(4), 0.0);
        assert_eq!(d.moments(), (5.0, 0.0));
        assert_eq!(d.size_biased_pmf(5).unwrap(), 1.0);
    }

    #[test]
    fn constant_zero_is_degenerate() {
        let d = DegreeDistribution::new(DegreeFamily::Constant { degree: 0 }).unwrap();
        assert!(matches!(d.size_biased_pmf(1), Err(Error::DegenerateDegree)));
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(d.sample_size_biased(&mut rng).is_err());
        assert_eq!(d.sample(&mut rng), 0);
    }

    #[test]
    fn power_law_fig3_moments() {
        // Pow(10, 7/2) has mean ~8.04; the variance creeps towards 96 as the
        // truncation bound grows because the second-moment tail is k^(-3/2).
        let d =
            DegreeDistribution::new(DegreeFamily::PowerLaw { k_star: 10, exponent: 3.5 }).unwrap();
        let (m, v) = d.moments();
        assert!((m - 8.0441879792).abs() < 1e-8, "mean {m}");
        assert!((v - 94.712929).abs() < 1e-4, "variance {v}");
    }

    #[test]
    fn power_law_untruncated_moments_match_reference() {
        // With a generous cap the caption values mu ~ 8.04, var ~ 96 emerge.
        let d = DegreeDistribution::with_tail_cap(
            DegreeFamily::PowerLaw { k_star: 10, exponent: 3.5 },
            10_000_000,
        )
        .unwrap();
        let (m, v) = d.moments();
        assert!((m - 8.04).abs() < 0.01, "mean {m}");
        assert!((v - 96.0).abs() < 0.2, "variance {v}");
    }

    #[test]
    fn pgf_closed_forms() {
        let poisson = DegreeDistribution::new(DegreeFamily::Poisson { mean: 5.0 }).unwrap();
        assert!((poisson.pgf(0.5).unwrap() - (-2.5f64).exp()).abs() < 1e-15);
        let constant = DegreeDistribution::new(DegreeFamily::Constant { degree: 3 }).unwrap();
        assert_eq!(constant.pgf(0.5).unwrap(), 0.125);
        for dist in all_test_families() {
            assert!((dist.pgf(1.0).unwrap() - 1.0).abs() < 1e-12);
            assert!((dist.pgf_prime(1.0).unwrap() - dist.mean()).abs() < 1e-10 * (1.0 + dist.mean()));
        }
    }

    #[test]
    fn pgf_rejects_out_of_domain() {
        let d = DegreeDistribution::new(DegreeFamily::Poisson { mean: 2.0 }).unwrap();
        assert!(d.pgf(-0.1).is_err());
        assert!(d.pgf(1.1).is_err());
    }

    #[test]
    fn pgf_monotone_and_convex_on_grid() {
        for dist in all_test_families() {
            let grid: Vec<f64> = (0..=100).map(|i| dist.pgf(i as f64 / 100.0).unwrap()).collect();
            for w in grid.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
            for i in 1..grid.len() - 1 {
                assert!(grid[i] <= 0.5 * (grid[i - 1] + grid[i + 1]) + 1e-12);
            }
        }
    }

    #[test]
    fn pgf_prime_matches_finite_difference() {
        let h = 1e-6;
        for dist in all_test_families() {
            for i in 1..=9 {
                let s = i as f64 / 10.0;
                let fd = (dist.pgf(s + h).unwrap() - dist.pgf(s - h).unwrap()) / (2.0 * h);
                let exact = dist.pgf_prime(s).unwrap();
                assert!(
                    (fd - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                    "{:?} at {s}: {fd} vs {exact}",
                    dist.family()
                );
            }
        }
    }

    #[test]
    fn size_biased_normalises_and_has_right_mean() {
        for dist in all_test_families() {
            if dist.mean() == 0.0 {
                continue;
            }
            let total = crate::math::kahan_sum(
                (0..=dist.support_max()).map(|k| dist.size_biased_pmf(k).unwrap()),
            );
            assert!((total - 1.0).abs() < 1e-10);
            let sb_mean = crate::math::kahan_sum(
                (0..=dist.support_max()).map(|k| k as f64 * dist.size_biased_pmf(k).unwrap()),
            );
            let (m, v) = dist.moments();
            // E[D~] = mean + variance / mean; truncated-table moments for the
            // heavy-tailed families make this an identity by construction.
            let expected = m + v / m;
            assert!(
                (sb_mean - expected).abs() < 1e-9 * (1.0 + expected),
                "{:?}: {sb_mean} vs {expected}",
                dist.family()
            );
        }
    }

    #[test]
    fn poisson_size_bias_shift_identity() {
        // For Poisson, D~ - 1 is again Poisson with the same mean.
        let d = DegreeDistribution::new(DegreeFamily::Poisson { mean: 5.0 }).unwrap();
        for k in 1..=40 {
            let lhs = d.size_biased_pmf(k).unwrap();
            let rhs = d.pmf(k - 1);
            assert!((lhs - rhs).abs() < 1e-12, "k={k}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn geometric_size_biased_mean_by_direct_summation() {
        let p = 0.3;
        let d = DegreeDistribution::new(DegreeFamily::Geometric { success_prob: p }).unwrap();
        let direct = crate::math::kahan_sum(
            (0..=d.support_max()).map(|k| k as f64 * k as f64 * d.pmf(k)),
        ) / d.mean();
        let (m, v) = d.moments();
        assert!((direct - (m + v / m)).abs() < 1e-9);
    }

    #[test]
    fn sampling_matches_pmf_within_three_se() {
        // Histogram of 10^6 draws vs pmf, 3 binomial SEs per bin on bins with
        // expected count >= 50.
        let n = 1_000_000usize;
        for (i, dist) in all_test_families().into_iter().enumerate() {
            let mut rng = ChaCha12Rng::seed_from_u64(7 + i as u64);
            let mut counts = alloc::vec![0usize; dist.support_max() + 1];
            for _ in 0..n {
                counts[dist.sample(&mut rng)] += 1;
            }
            for k in 0..counts.len() {
                let expected = n as f64 * dist.pmf(k);
                if expected < 50.0 {
                    continue;
                }
                let se = (expected * (1.0 - dist.pmf(k))).sqrt();
                assert!(
                    ((counts[k] as f64) - expected).abs() <= 3.0 * se,
                    "family {i} bin {k}: {} vs {expected} (se {se})",
                    counts[k]
                );
            }
        }
    }

    #[test]
    fn constant_samples_constant() {
        let d = DegreeDistribution::new(DegreeFamily::Constant { degree: 7 }).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(d.sample(&mut rng), 7);
        }
    }

    #[test]
    fn poisson_sampling_mean() {
        let d = DegreeDistribution::new(DegreeFamily::Poisson { mean: 5.0 }).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let n = 1_000_000usize;
        let sum: usize = (0..n).map(|_| d.sample(&mut rng)).sum();
        let mean = sum as f64 / n as f64;
        let bound = 3.0 * (5.0f64 / n as f64).sqrt();
        assert!((mean - 5.0).abs() <= bound, "{mean} vs 5 +- {bound}");
    }

    #[test]
    fn invalid_families_rejected() {
        assert!(DegreeDistribution::new(DegreeFamily::Poisson { mean: 0.0 }).is_err());
        assert!(DegreeDistribution::new(DegreeFamily::Geometric { success_prob: 1.0 }).is_err());
        assert!(
            DegreeDistribution::new(DegreeFamily::PowerLaw { k_star: 10, exponent: 2.0 }).is_err()
        );
        assert!(DegreeDistribution::new(DegreeFamily::PowerLaw { k_star: 0, exponent: 3.0 })
            .is_err());
        assert!(DegreeDistribution::new(DegreeFamily::PowerLawCutoff {
            kappa: -1.0,
            exponent: 1.5
        })
        .is_err());
    }

    #[test]
    fn cutoff_family_allows_small_exponent() {
        // a = 3/2 is fine once the exponential cutoff restores the moments.
        let d = DegreeDistribution::new(DegreeFamily::PowerLawCutoff {
            kappa: 485.0,
            exponent: 1.5,
        })
        .unwrap();
        let (m, v) = d.moments();
        assert!(m.is_finite() && v.is_finite() && m > 0.0 && v > 0.0);
    }
}
