//! Asymptotic quantities of the households-on-a-network model.
//!
//! Early growth and final outcome are both governed by two-stage branching
//! processes over households: the forward process counts households seeded by
//! global contacts out of a local epidemic, the backward process grows the
//! susceptibility set of a typical individual.  This module computes their
//! offspring PGFs, the threshold parameter (the subsequent-generation
//! offspring mean), smallest fixed points, the major-outbreak probability
//! `1 - f_initial(sigma)` and the expected relative final size
//! `1 - f_initial(xi)`, plus the critical global rate.
//!
//! Forward PGFs are closed-form for the fixed and zero-or-infinite period
//! kinds.  For anything else the offspring law of an individual household is
//! estimated once by Monte Carlo (the within-household correlation between
//! local spread and global contacts has no simple closed form) and the
//! empirical PGF is cached, so fixed-point iteration never resamples.
//! Backward PGFs use the binomial-thinning closed form, which is valid for
//! every period kind.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::degree::DegreeDistribution;
use crate::household::{
    local_final_size_dist, mean_local_final_size, sample_phi, susceptibility_set_dist,
    MassFunction, SeedConvention,
};
use crate::math;
use crate::period::InfectiousPeriod;
use crate::{Error, Result};

const MAX_FIXED_POINT_ITERS: usize = 1_000_000;

/// How the first infective of the whole population is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialMode {
    /// Uniformly at random from the population; its degree is distributed as
    /// the degree law itself.
    UniformRandom,
    /// A specific individual of known degree.
    SpecificDegree(usize),
}

/// Everything the analytic layer and the simulator share.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub household_size: usize,
    pub lambda_local: f64,
    pub lambda_global: f64,
    pub degree: DegreeDistribution,
    pub period: InfectiousPeriod,
    pub initial_mode: InitialMode,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.household_size < 1 {
            return Err(Error::InvalidParameter("household size must be at least 1"));
        }
        if !(self.lambda_local >= 0.0) || !self.lambda_local.is_finite() {
            return Err(Error::InvalidParameter(
                "local contact rate must be finite and >= 0",
            ));
        }
        if !(self.lambda_global >= 0.0) || !self.lambda_global.is_finite() {
            return Err(Error::InvalidParameter(
                "global contact rate must be finite and >= 0",
            ));
        }
        self.period.validate()
    }
}

/// Knobs for the stochastic analytic paths; closed-form paths ignore them.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticsOptions {
    /// Draw count for empirical offspring PGFs.
    pub mc_draws: usize,
    /// Seed for the empirical offspring draws.
    pub seed: u64,
    /// Convergence tolerance of the fixed-point iteration.
    pub fixed_point_tol: f64,
}

impl Default for AnalyticsOptions {
    fn default() -> Self {
        AnalyticsOptions {
            mc_draws: 1_000_000,
            seed: 0,
            fixed_point_tol: 1e-12,
        }
    }
}

/// How a PGF pair was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    /// Binomial-thinning closed form driven by a local mass function.
    ClosedFormFixed,
    /// All-or-nothing closed form of the zero-or-infinite period kind.
    ClosedFormZeroInf,
    /// Empirical PGF of a cached Monte Carlo offspring histogram.
    MonteCarloEmpirical,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::ClosedFormFixed => "ClosedFormFixed",
            MethodTag::ClosedFormZeroInf => "ClosedFormZeroInf",
            MethodTag::MonteCarloEmpirical => "MonteCarloEmpirical",
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Generation {
    Initial,
    Subsequent,
}

#[derive(Debug, Clone)]
enum PairBody {
    /// `f(s) = f_K0(x) f_local(f_D(x))` with `x = 1 - p_global + s p_global`.
    Thinned { p_global: f64, local: MassFunction },
    /// `f(s) = 1 - p + p f_K0(s) (1 - p + p f_D(s))^(n-1)`, with the local
    /// or global factor collapsing when the corresponding rate is zero.
    ZeroInf { p: f64, global_on: bool, local_on: bool },
    /// Empirical offspring histograms for the two generations.
    Empirical {
        initial: Vec<f64>,
        subsequent: Vec<f64>,
        draws: usize,
    },
}

/// Offspring PGF evaluators for the initial and subsequent generations of a
/// household-level branching process.
#[derive(Debug, Clone)]
pub struct PgfPair<'a> {
    degree: &'a DegreeDistribution,
    initial_mode: InitialMode,
    household_size: usize,
    body: PairBody,
    tag: MethodTag,
}

impl PgfPair<'_> {
    /// PGF of the zeroth-generation offspring count.
    pub fn initial(&self, s: f64) -> f64 {
        self.eval(s, Generation::Initial)
    }

    /// PGF of the offspring count in every later generation.
    pub fn subsequent(&self, s: f64) -> f64 {
        self.eval(s, Generation::Subsequent)
    }

    pub fn method_tag(&self) -> MethodTag {
        self.tag
    }

    /// Standard error of the Monte Carlo PGF estimate at `s`; `None` for
    /// closed forms.
    pub fn initial_se(&self, s: f64) -> Option<f64> {
        self.se(s, Generation::Initial)
    }

    pub fn subsequent_se(&self, s: f64) -> Option<f64> {
        self.se(s, Generation::Subsequent)
    }

    fn se(&self, s: f64, generation: Generation) -> Option<f64> {
        match &self.body {
            PairBody::Empirical {
                initial,
                subsequent,
                draws,
            } => {
                let hist = match generation {
                    Generation::Initial => initial,
                    Generation::Subsequent => subsequent,
                };
                let first = poly(hist, s);
                let second = poly(hist, s * s);
                Some(math::sqrt((second - first * first).max(0.0) / *draws as f64))
            }
            _ => None,
        }
    }

    fn seed_pgf(&self, x: f64, generation: Generation) -> f64 {
        match generation {
            // Whole-population seed: plain degree, or a fixed one.
            Generation::Initial => match self.initial_mode {
                InitialMode::UniformRandom => self.degree.pgf_unchecked(x),
                InitialMode::SpecificDegree(d) => math::powi(x, d as i32),
            },
            // Seeded over an edge: degree is size-biased less the infector,
            // with PGF f_D'(x) / mu_D.
            Generation::Subsequent => {
                self.degree.pgf_prime_unchecked(x) / self.degree.mean()
            }
        }
    }

    fn eval(&self, s: f64, generation: Generation) -> f64 {
        match &self.body {
            PairBody::Thinned { p_global, local } => {
                let x = 1.0 - p_global + s * p_global;
                self.seed_pgf(x, generation) * local.pgf(self.degree.pgf_unchecked(x))
            }
            PairBody::ZeroInf {
                p,
                global_on,
                local_on,
            } => {
                if !global_on {
                    return 1.0;
                }
                let seed = self.seed_pgf(s, generation);
                let mates = if *local_on {
                    math::powi(
                        1.0 - p + p * self.degree.pgf_unchecked(s),
                        (self.household_size - 1) as i32,
                    )
                } else {
                    1.0
                };
                1.0 - p + p * seed * mates
            }
            PairBody::Empirical {
                initial,
                subsequent,
                ..
            } => {
                let hist = match generation {
                    Generation::Initial => initial,
                    Generation::Subsequent => subsequent,
                };
                poly(hist, s)
            }
        }
    }
}

fn poly(coeffs: &[f64], s: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

/// `p_G = 1 - phi(lambda_global)`: the probability that an infective makes
/// infectious contact with a given global neighbour.
pub fn global_contact_prob(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    Ok(1.0 - params.period.laplace(params.lambda_global)?)
}

/// Threshold parameter: the mean number of households seeded by the local
/// epidemic of a household that was itself seeded over an edge,
/// `(mu_D (mu_T + 1) + var_D / mu_D - 1)(1 - phi(lambda_global))`.
pub fn r_star(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let (mean, variance) = params.degree.moments();
    if mean == 0.0 {
        return Err(Error::DegenerateDegree);
    }
    let mu_t = mean_local_final_size(
        params.household_size,
        params.lambda_local,
        &params.period,
    )?;
    let p_g = 1.0 - params.period.laplace(params.lambda_global)?;
    Ok((mean * (mu_t + 1.0) + variance / mean - 1.0) * p_g)
}

/// Forward (early-growth) offspring PGF pair.
pub fn forward_pgfs<'a>(
    params: &'a ModelParams,
    opts: &AnalyticsOptions,
) -> Result<PgfPair<'a>> {
    params.validate()?;
    if params.degree.mean() == 0.0 {
        return Err(Error::DegenerateDegree);
    }
    let n = params.household_size;
    let (body, tag) = match params.period {
        InfectiousPeriod::Fixed { .. } => {
            let p_global = 1.0 - params.period.laplace(params.lambda_global)?;
            let local = local_final_size_dist(n, params.lambda_local, &params.period)?;
            (PairBody::Thinned { p_global, local }, MethodTag::ClosedFormFixed)
        }
        InfectiousPeriod::ZeroOrInfinite { p_infinite } => (
            PairBody::ZeroInf {
                p: p_infinite,
                global_on: params.lambda_global > 0.0,
                local_on: params.lambda_local > 0.0 && n > 1,
            },
            MethodTag::ClosedFormZeroInf,
        ),
        InfectiousPeriod::Exponential { .. } => {
            if opts.mc_draws == 0 {
                return Err(Error::InvalidParameter(
                    "empirical offspring PGFs need at least one draw",
                ));
            }
            let initial =
                empirical_offspring(params, Generation::Initial, opts.mc_draws, opts.seed)?;
            let subsequent =
                empirical_offspring(params, Generation::Subsequent, opts.mc_draws, opts.seed)?;
            (
                PairBody::Empirical {
                    initial,
                    subsequent,
                    draws: opts.mc_draws,
                },
                MethodTag::MonteCarloEmpirical,
            )
        }
    };
    Ok(PgfPair {
        degree: &params.degree,
        initial_mode: params.initial_mode,
        household_size: n,
        body,
        tag,
    })
}

/// Backward (susceptibility-set) offspring PGF pair; the thinning closed form
/// holds for every period kind because contacts into the set come from
/// distinct individuals with independent periods.
pub fn backward_pgfs(params: &ModelParams) -> Result<PgfPair<'_>> {
    params.validate()?;
    if params.degree.mean() == 0.0 {
        return Err(Error::DegenerateDegree);
    }
    let p_global = 1.0 - params.period.laplace(params.lambda_global)?;
    let local = susceptibility_set_dist(
        params.household_size,
        params.lambda_local,
        &params.period,
    )?;
    let tag = match params.period {
        InfectiousPeriod::Fixed { .. } => MethodTag::ClosedFormFixed,
        InfectiousPeriod::ZeroOrInfinite { .. } => MethodTag::ClosedFormZeroInf,
        // Structurally the same thinned closed form; exact here too.
        InfectiousPeriod::Exponential { .. } => MethodTag::ClosedFormFixed,
    };
    Ok(PgfPair {
        degree: &params.degree,
        initial_mode: params.initial_mode,
        household_size: params.household_size,
        body: PairBody::Thinned { p_global, local },
        tag,
    })
}

/// One empirical offspring histogram: degrees are resampled per draw, the
/// seed degree follows the generation's convention.
fn empirical_offspring(
    params: &ModelParams,
    generation: Generation,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = params.household_size;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(match generation {
        Generation::Initial => 0,
        Generation::Subsequent => 1,
    });
    let mut counts: Vec<usize> = Vec::new();
    let mut degrees = alloc::vec![0usize; n];
    for _ in 0..draws {
        for d in degrees.iter_mut().skip(1) {
            *d = params.degree.sample(&mut rng);
        }
        let convention = match generation {
            Generation::Initial => {
                degrees[0] = match params.initial_mode {
                    InitialMode::UniformRandom => params.degree.sample(&mut rng),
                    InitialMode::SpecificDegree(d) => d,
                };
                SeedConvention::Root
            }
            Generation::Subsequent => {
                degrees[0] = params.degree.sample_size_biased(&mut rng)?;
                SeedConvention::GloballyInfected
            }
        };
        let offspring = sample_phi(
            &degrees,
            0,
            params.lambda_local,
            params.lambda_global,
            &params.period,
            convention,
            &mut rng,
        )?;
        if offspring >= counts.len() {
            counts.resize(offspring + 1, 0);
        }
        counts[offspring] += 1;
    }
    Ok(counts
        .iter()
        .map(|&c| c as f64 / draws as f64)
        .collect())
}

/// Smallest solution of `pgf(s) = s` in `[0, 1]`.
///
/// Monotone iteration from zero converges to the smallest fixed point for any
/// PGF; if the iteration cap is exhausted (near-critical cases) the root is
/// polished by bisection on `pgf(s) - s`.
pub fn smallest_fixed_point<F: Fn(f64) -> f64>(pgf: F, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("fixed-point tolerance must be positive"));
    }
    let mut s = 0.0;
    for _ in 0..MAX_FIXED_POINT_ITERS {
        let next = pgf(s);
        if !next.is_finite() {
            return Err(Error::NonConvergence("pgf evaluated to a non-finite value"));
        }
        let next = next.clamp(0.0, 1.0);
        if math::abs(next - s) < tol {
            return Ok(next);
        }
        s = next;
    }
    let g = |x: f64| pgf(x) - x;
    let mut hi = None;
    for k in 1..=64 {
        let cand = 1.0 - (1.0 - s) * math::powi(0.5, k);
        if g(cand) < 0.0 {
            hi = Some(cand);
            break;
        }
    }
    let mut hi = match hi {
        Some(h) => h,
        // No sign change left of 1: the smallest fixed point is 1 itself.
        None => return Ok(1.0),
    };
    let mut lo = s;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Probability that a single initial infective sparks a major outbreak:
/// `1 - f_C(sigma)` with `sigma` the extinction probability of the
/// subsequent-generation forward process.  Zero whenever the process is
/// subcritical (or no global edges exist at all).
pub fn major_outbreak_prob(params: &ModelParams, opts: &AnalyticsOptions) -> Result<f64> {
    params.validate()?;
    if params.degree.mean() == 0.0 {
        return Ok(0.0);
    }
    if r_star(params)? <= 1.0 {
        return Ok(0.0);
    }
    let pair = forward_pgfs(params, opts)?;
    let sigma = smallest_fixed_point(|s| pair.subsequent(s), opts.fixed_point_tol)?;
    Ok((1.0 - pair.initial(sigma)).clamp(0.0, 1.0))
}

/// Expected relative final size of a major outbreak, `1 - f_B(xi)`.
///
/// Only defined for a uniformly chosen initial case (the typical-individual
/// argument behind the backward process).
pub fn expected_relative_final_size(
    params: &ModelParams,
    opts: &AnalyticsOptions,
) -> Result<f64> {
    params.validate()?;
    if params.initial_mode != InitialMode::UniformRandom {
        return Err(Error::UnsupportedInitialMode(
            "relative final size requires a uniformly chosen initial infective",
        ));
    }
    if params.degree.mean() == 0.0 {
        return Ok(0.0);
    }
    if r_star(params)? <= 1.0 {
        return Ok(0.0);
    }
    let pair = backward_pgfs(params)?;
    let xi = smallest_fixed_point(|s| pair.subsequent(s), opts.fixed_point_tol)?;
    Ok((1.0 - pair.initial(xi)).clamp(0.0, 1.0))
}

/// Smallest global rate above which the model is supercritical, found by
/// bisection on `r_star - 1` to absolute tolerance 1e-10.  `lambda_global`
/// in `params` is ignored.
///
/// For the zero-or-infinite period kind `r_star` jumps at zero and is flat
/// beyond, so the returned value degenerates to the infimum 0 whenever any
/// positive rate is supercritical.
pub fn critical_lambda_g(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let (mean, variance) = params.degree.moments();
    if mean == 0.0 {
        return Err(Error::DegenerateDegree);
    }
    let mu_t = mean_local_final_size(
        params.household_size,
        params.lambda_local,
        &params.period,
    )?;
    let factor = mean * (mu_t + 1.0) + variance / mean - 1.0;
    let supremum = factor * (1.0 - params.period.laplace_limit());
    if !(supremum > 1.0) {
        return Err(Error::NoRoot);
    }
    let excess = |lam: f64| factor * (1.0 - params.period.laplace_unchecked(lam)) - 1.0;
    let mut hi = 1.0;
    while excess(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::NoRoot);
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Everything the `analytics` CLI record carries, computed in one pass so the
/// Monte Carlo offspring histograms are drawn at most once.
#[derive(Debug, Clone)]
pub struct AnalyticsReport {
    pub r_star: f64,
    pub sigma: f64,
    pub xi: f64,
    pub p_major: f64,
    /// `None` under a specific-degree initial mode, where the relative final
    /// size is not defined.
    pub z_final: Option<f64>,
    pub method_tag: MethodTag,
}

pub fn analytics_report(params: &ModelParams, opts: &AnalyticsOptions) -> Result<AnalyticsReport> {
    params.validate()?;
    let r = r_star(params)?;
    let forward = forward_pgfs(params, opts)?;
    let sigma = smallest_fixed_point(|s| forward.subsequent(s), opts.fixed_point_tol)?;
    let p_major = if r <= 1.0 {
        0.0
    } else {
        (1.0 - forward.initial(sigma)).clamp(0.0, 1.0)
    };
    let backward = backward_pgfs(params)?;
    let xi = smallest_fixed_point(|s| backward.subsequent(s), opts.fixed_point_tol)?;
    let z_final = match params.initial_mode {
        InitialMode::UniformRandom => Some(if r <= 1.0 {
            0.0
        } else {
            (1.0 - backward.initial(xi)).clamp(0.0, 1.0)
        }),
        InitialMode::SpecificDegree(_) => None,
    };
    Ok(AnalyticsReport {
        r_star: r,
        sigma,
        xi,
        p_major,
        z_final,
        method_tag: forward.method_tag(),
    })
}
