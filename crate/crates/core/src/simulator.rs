//! Final-outcome epidemics on a built [`Network`], plus reproducible batch
//! estimation.
//!
//! Only the final outcome matters for the quantities of interest, so instead
//! of simulating in time the run samples the transmission digraph directly:
//! each individual draws an infectious period, each ordered household pair an
//! independent uniform, each global edge two directional uniforms.  An arc is
//! present whenever its uniform falls below the contact probability implied
//! by the tail's period, and the outcome is the reachable set of the initial
//! infective.  Keeping the uniforms explicit makes coupled comparisons
//! possible: re-thresholding the same draws at a larger rate can only grow
//! the reachable set.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::analytics::{InitialMode, ModelParams};
use crate::math;
use crate::network::{build_network, Network};
use crate::period::{contact_prob, InfectiousPeriod};
use crate::{Error, Result};

/// Final outcome of one epidemic run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpidemicOutcome {
    /// Individuals ever infected, the initial case included.
    pub individuals_infected: usize,
    /// Households with at least one infected member.
    pub households_infected: usize,
    pub initial_individual: usize,
}

/// All randomness of one run, drawn up front: periods per individual, one
/// uniform per ordered household pair, two directional uniforms per edge.
#[derive(Debug, Clone)]
pub struct TransmissionDraws {
    periods: Vec<f64>,
    local_uniforms: Vec<f64>,
    edge_uniforms: Vec<(f64, f64)>,
}

/// Sample the full randomness tableau for `net`.
pub fn draw_transmission<R: Rng + ?Sized>(
    net: &Network,
    period: &InfectiousPeriod,
    rng: &mut R,
) -> TransmissionDraws {
    let total = net.population();
    let fanout = net.household_size() - 1;
    let periods: Vec<f64> = (0..total).map(|_| period.sample(rng)).collect();
    let local_uniforms: Vec<f64> = (0..total * fanout).map(|_| rng.random()).collect();
    let edge_uniforms: Vec<(f64, f64)> = (0..net.edges().len())
        .map(|_| (rng.random(), rng.random()))
        .collect();
    TransmissionDraws {
        periods,
        local_uniforms,
        edge_uniforms,
    }
}

/// Indicator of the individuals the initial case ultimately infects, given a
/// fixed randomness tableau and the two contact rates.
pub fn infected_individuals(
    net: &Network,
    lambda_local: f64,
    lambda_global: f64,
    draws: &TransmissionDraws,
    initial: usize,
) -> Vec<bool> {
    let n = net.household_size();
    let total = net.population();
    let p_local: Vec<f64> = draws
        .periods
        .iter()
        .map(|&t| contact_prob(lambda_local, t))
        .collect();
    let p_global: Vec<f64> = draws
        .periods
        .iter()
        .map(|&t| contact_prob(lambda_global, t))
        .collect();

    let mut infected = vec![false; total];
    let mut queue = VecDeque::new();
    infected[initial] = true;
    queue.push_back(initial);
    while let Some(i) = queue.pop_front() {
        let base = (i / n) * n;
        let own_offset = i - base;
        for offset in 0..n {
            if offset == own_offset {
                continue;
            }
            let j = base + offset;
            let rank = if offset > own_offset { offset - 1 } else { offset };
            if !infected[j]
                && draws.local_uniforms[i * (n - 1) + rank] < p_local[i]
            {
                infected[j] = true;
                queue.push_back(j);
            }
        }
        for &(e, is_first) in net.incident(i) {
            let (a, b) = net.edges()[e];
            let (u, target) = if is_first {
                (draws.edge_uniforms[e].0, b)
            } else {
                (draws.edge_uniforms[e].1, a)
            };
            if !infected[target] && u < p_global[i] {
                infected[target] = true;
                queue.push_back(target);
            }
        }
    }
    infected
}

/// Final outcome from a fixed tableau and initial case.
pub fn outcome_with_draws(
    net: &Network,
    lambda_local: f64,
    lambda_global: f64,
    draws: &TransmissionDraws,
    initial: usize,
) -> EpidemicOutcome {
    let infected = infected_individuals(net, lambda_local, lambda_global, draws, initial);
    let mut household_hit = vec![false; net.households()];
    let mut individuals = 0;
    for (i, &flag) in infected.iter().enumerate() {
        if flag {
            individuals += 1;
            household_hit[net.household_of(i)] = true;
        }
    }
    EpidemicOutcome {
        individuals_infected: individuals,
        households_infected: household_hit.iter().filter(|&&h| h).count(),
        initial_individual: initial,
    }
}

/// Run one epidemic: choose the initial case per `params.initial_mode`, draw
/// the tableau, take the reachable set.
pub fn run_epidemic<R: Rng + ?Sized>(
    net: &Network,
    params: &ModelParams,
    rng: &mut R,
) -> Result<EpidemicOutcome> {
    params.validate()?;
    if params.household_size != net.household_size() {
        return Err(Error::HouseholdMismatch {
            params: params.household_size,
            network: net.household_size(),
        });
    }
    let initial = match params.initial_mode {
        InitialMode::UniformRandom => rng.random_range(0..net.population()),
        InitialMode::SpecificDegree(d) => {
            let candidates: Vec<usize> = (0..net.population())
                .filter(|&i| net.degrees()[i] == d)
                .collect();
            if candidates.is_empty() {
                return Err(Error::NoMatchingIndividual { degree: d });
            }
            candidates[rng.random_range(0..candidates.len())]
        }
    };
    let draws = draw_transmission(net, &params.period, rng);
    Ok(outcome_with_draws(
        net,
        params.lambda_local,
        params.lambda_global,
        &draws,
        initial,
    ))
}

/// Major-outbreak classification: infected fraction at least
/// `cutoff_fraction` of the population (boundary inclusive).
pub fn classify_major(outcome: &EpidemicOutcome, net: &Network, cutoff_fraction: f64) -> bool {
    is_major(outcome, net.population(), cutoff_fraction)
}

fn is_major(outcome: &EpidemicOutcome, population: usize, cutoff_fraction: f64) -> bool {
    outcome.individuals_infected as f64 / population as f64 >= cutoff_fraction
}

/// Batch controls.  Replicate `r` derives its generator from `(seed, r)`;
/// with `fixed_network` set, one network (from a reserved stream) is reused
/// across replicates instead of rebuilding per replicate.
#[derive(Debug, Clone, Copy)]
pub struct BatchConfig {
    pub households: usize,
    pub replicates: usize,
    pub cutoff_fraction: f64,
    pub seed: u64,
    pub fixed_network: bool,
}

/// Default major-outbreak cutoff as a fraction of the population.
pub const DEFAULT_CUTOFF_FRACTION: f64 = 0.15;

/// Aggregated batch estimates with their standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub replicates: usize,
    pub cutoff_fraction: f64,
    pub n_major: usize,
    /// Major-outbreak frequency and its binomial standard error.
    pub p_hat: f64,
    pub p_se: f64,
    /// Mean relative final size over major outbreaks; `None` without any.
    pub z_hat: Option<f64>,
    /// Sample-standard-deviation-based error; needs at least two majors.
    pub z_se: Option<f64>,
}

/// Generator state for replicate `replicate` of a batch seeded with `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Stream index reserved for the shared network of fixed-network batches.
const FIXED_NETWORK_STREAM: u64 = u64::MAX;

/// Run replicate `replicate` of the batch: fresh network (or the shared one),
/// then one epidemic, all from the replicate's own generator.
pub fn replicate_outcome(
    params: &ModelParams,
    batch: &BatchConfig,
    replicate: u64,
) -> Result<EpidemicOutcome> {
    let mut rng = replicate_rng(batch.seed, replicate);
    let net = if batch.fixed_network {
        build_network(
            batch.households,
            params.household_size,
            &params.degree,
            &mut replicate_rng(batch.seed, FIXED_NETWORK_STREAM),
        )
    } else {
        build_network(
            batch.households,
            params.household_size,
            &params.degree,
            &mut rng,
        )
    };
    run_epidemic(&net, params, &mut rng)
}

/// Aggregate per-replicate outcomes: `p_hat = n_major / replicates` with
/// binomial SE, `z_hat` the mean relative final size among major outbreaks
/// with SE `sigma_hat / sqrt(n_major)`.
pub fn summarize(
    outcomes: &[EpidemicOutcome],
    population: usize,
    cutoff_fraction: f64,
) -> BatchSummary {
    let replicates = outcomes.len();
    let relative_sizes: Vec<f64> = outcomes
        .iter()
        .filter(|o| is_major(o, population, cutoff_fraction))
        .map(|o| o.individuals_infected as f64 / population as f64)
        .collect();
    let n_major = relative_sizes.len();
    let p_hat = n_major as f64 / replicates as f64;
    let p_se = math::sqrt(p_hat * (1.0 - p_hat) / replicates as f64);
    let z_hat = if n_major > 0 {
        Some(math::kahan_sum(relative_sizes.iter().copied()) / n_major as f64)
    } else {
        None
    };
    let z_se = if n_major > 1 {
        let mean = z_hat.unwrap();
        let ss = math::kahan_sum(relative_sizes.iter().map(|z| (z - mean) * (z - mean)));
        Some(math::sqrt(ss / (n_major - 1) as f64 / n_major as f64))
    } else {
        None
    };
    BatchSummary {
        replicates,
        cutoff_fraction,
        n_major,
        p_hat,
        p_se,
        z_hat,
        z_se,
    }
}

/// Run a whole batch sequentially.  The result is a pure function of
/// `(params, batch)`; callers that parallelise over replicates and then
/// apply [`summarize`] to the index-ordered outcomes get the identical
/// summary.
pub fn run_batch(params: &ModelParams, batch: &BatchConfig) -> Result<BatchSummary> {
    if batch.replicates < 1 {
        return Err(Error::InvalidParameter("a batch needs at least one replicate"));
    }
    if batch.households < 1 {
        return Err(Error::InvalidParameter("a batch needs at least one household"));
    }
    let mut outcomes = Vec::with_capacity(batch.replicates);
    for r in 0..batch.replicates {
        outcomes.push(replicate_outcome(params, batch, r as u64)?);
    }
    Ok(summarize(
        &outcomes,
        batch.households * params.household_size,
        batch.cutoff_fraction,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::{DegreeDistribution, DegreeFamily};

    fn poisson(mean: f64) -> DegreeDistribution {
        DegreeDistribution::new(DegreeFamily::Poisson { mean }).unwrap()
    }

    fn params(
        n: usize,
        lambda_local: f64,
        lambda_global: f64,
        degree: DegreeDistribution,
        period: InfectiousPeriod,
    ) -> ModelParams {
        ModelParams {
            household_size: n,
            lambda_local,
            lambda_global,
            degree,
            period,
            initial_mode: InitialMode::UniformRandom,
        }
    }

    #[test]
    fn no_contacts_means_single_infection() {
        let p = params(
            3,
            0.0,
            0.0,
            poisson(5.0),
            InfectiousPeriod::fixed(1.0).unwrap(),
        );
        let mut rng = replicate_rng(1, 0);
        let net = build_network(20, 3, &p.degree, &mut rng);
        for _ in 0..50 {
            let out = run_epidemic(&net, &p, &mut rng).unwrap();
            assert_eq!(out.individuals_infected, 1);
            assert_eq!(out.households_infected, 1);
        }
    }

    #[test]
    fn zero_period_means_single_infection() {
        let p = params(
            3,
            5.0,
            5.0,
            poisson(5.0),
            InfectiousPeriod::zero_or_infinite(0.0).unwrap(),
        );
        let mut rng = replicate_rng(2, 0);
        let net = build_network(20, 3, &p.degree, &mut rng);
        let out = run_epidemic(&net, &p, &mut rng).unwrap();
        assert_eq!(out.individuals_infected, 1);
    }

    #[test]
    fn household_size_mismatch_is_rejected() {
        let p = params(
            4,
            0.0,
            0.0,
            poisson(5.0),
            InfectiousPeriod::fixed(1.0).unwrap(),
        );
        let mut rng = replicate_rng(3, 0);
        let net = build_network(5, 3, &p.degree, &mut rng);
        assert!(matches!(
            run_epidemic(&net, &p, &mut rng),
            Err(Error::HouseholdMismatch { .. })
        ));
    }

    #[test]
    fn single_edge_transmission_frequency() {
        // Two degree-1 singleton households joined by one edge: the second
        // individual is infected with probability 1 - exp(-lambda_global).
        let degree = DegreeDistribution::new(DegreeFamily::Constant { degree: 1 }).unwrap();
        let lambda_global = 0.8;
        let p = params(
            1,
            0.0,
            lambda_global,
            degree.clone(),
            InfectiousPeriod::fixed(1.0).unwrap(),
        );
        let mut rng = replicate_rng(4, 0);
        let net = build_network(2, 1, &degree, &mut rng);
        assert_eq!(net.edges().len(), 1);
        let runs = 100_000;
        let mut both = 0usize;
        for _ in 0..runs {
            let out = run_epidemic(&net, &p, &mut rng).unwrap();
            if out.individuals_infected == 2 {
                both += 1;
            }
        }
        let q = 1.0 - (-lambda_global as f64).exp();
        let se = (q * (1.0 - q) / runs as f64).sqrt();
        assert!(
            (both as f64 / runs as f64 - q).abs() <= 3.0 * se,
            "{} vs {q}",
            both as f64 / runs as f64
        );
    }

    #[test]
    fn cutoff_boundary_is_inclusive() {
        let mut rng = replicate_rng(5, 0);
        let degree = DegreeDistribution::new(DegreeFamily::Constant { degree: 0 }).unwrap();
        let net = build_network(1000, 3, &degree, &mut rng);
        let outcome = EpidemicOutcome {
            individuals_infected: 450,
            households_infected: 150,
            initial_individual: 0,
        };
        assert!(classify_major(&outcome, &net, 0.15));
        let outcome = EpidemicOutcome {
            individuals_infected: 449,
            ..outcome
        };
        assert!(!classify_major(&outcome, &net, 0.15));
        let tiny = EpidemicOutcome {
            individuals_infected: 1,
            households_infected: 1,
            initial_individual: 0,
        };
        assert!(!classify_major(&tiny, &net, 0.15));
        let all = EpidemicOutcome {
            individuals_infected: 3000,
            households_infected: 1000,
            initial_individual: 0,
        };
        assert!(classify_major(&all, &net, 0.15));
    }

    #[test]
    fn summary_formulas() {
        let outcomes: Vec<EpidemicOutcome> = (0..10_000)
            .map(|i| EpidemicOutcome {
                individuals_infected: if i % 2 == 0 { 500 } else { 1 },
                households_infected: 1,
                initial_individual: 0,
            })
            .collect();
        let s = summarize(&outcomes, 1000, 0.15);
        assert_eq!(s.n_major, 5000);
        assert_eq!(s.p_hat, 0.5);
        assert!((s.p_se - 0.005).abs() < 1e-12);
        assert_eq!(s.z_hat, Some(0.5));
        assert_eq!(s.z_se, Some(0.0));
    }

    #[test]
    fn subcritical_batch_has_no_majors() {
        let p = params(
            3,
            1.0,
            0.0,
            poisson(5.0),
            InfectiousPeriod::fixed(1.0).unwrap(),
        );
        let batch = BatchConfig {
            households: 50,
            replicates: 100,
            cutoff_fraction: 0.15,
            seed: 7,
            fixed_network: false,
        };
        let s = run_batch(&p, &batch).unwrap();
        assert_eq!(s.n_major, 0);
        assert_eq!(s.p_hat, 0.0);
        assert_eq!(s.z_hat, None);
        assert_eq!(s.z_se, None);
    }

    #[test]
    fn batches_are_deterministic() {
        let p = params(
            3,
            1.0,
            0.1,
            poisson(8.0),
            InfectiousPeriod::fixed(1.0).unwrap(),
        );
        let batch = BatchConfig {
            households: 100,
            replicates: 50,
            cutoff_fraction: 0.15,
            seed: 11,
            fixed_network: false,
        };
        assert_eq!(run_batch(&p, &batch).unwrap(), run_batch(&p, &batch).unwrap());
    }

    #[test]
    fn fixed_network_mode_reuses_one_network() {
        let p = params(
            1,
            0.0,
            0.0,
            poisson(2.0),
            InfectiousPeriod::fixed(1.0).unwrap(),
        );
        let batch = BatchConfig {
            households: 30,
            replicates: 5,
            cutoff_fraction: 0.15,
            seed: 13,
            fixed_network: true,
        };
        // All replicates see the same degrees; with UniformRandom initials
        // the outcomes stay single infections under zero rates.
        for r in 0..batch.replicates {
            let out = replicate_outcome(&p, &batch, r as u64).unwrap();
            assert_eq!(out.individuals_infected, 1);
        }
    }

    #[test]
    fn specific_degree_initial_mode() {
        let degree = DegreeDistribution::new(DegreeFamily::Constant { degree: 2 }).unwrap();
        let mut p = params(
            2,
            0.0,
            0.0,
            degree.clone(),
            InfectiousPeriod::fixed(1.0).unwrap(),
        );
        p.initial_mode = InitialMode::SpecificDegree(2);
        let mut rng = replicate_rng(17, 0);
        let net = build_network(10, 2, &degree, &mut rng);
        let out = run_epidemic(&net, &p, &mut rng).unwrap();
        assert_eq!(net.degrees()[out.initial_individual], 2);

        p.initial_mode = InitialMode::SpecificDegree(9);
        assert!(matches!(
            run_epidemic(&net, &p, &mut rng),
            Err(Error::NoMatchingIndividual { degree: 9 })
        ));
    }

    #[test]
    fn households_infected_matches_recount() {
        let p = params(
            3,
            1.0,
            0.1,
            poisson(8.0),
            InfectiousPeriod::fixed(1.0).unwrap(),
        );
        let mut rng = replicate_rng(19, 0);
        let net = build_network(200, 3, &p.degree, &mut rng);
        for _ in 0..20 {
            let initial = rng.random_range(0..net.population());
            let draws = draw_transmission(&net, &p.period, &mut rng);
            let set = infected_individuals(&net, 1.0, 0.1, &draws, initial);
            let out = outcome_with_draws(&net, 1.0, 0.1, &draws, initial);
            let mut hit = vec![false; net.households()];
            for (i, &f) in set.iter().enumerate() {
                if f {
                    hit[net.household_of(i)] = true;
                }
            }
            assert_eq!(
                out.households_infected,
                hit.iter().filter(|&&h| h).count()
            );
            assert_eq!(
                out.individuals_infected,
                set.iter().filter(|&&f| f).count()
            );
        }
    }

    #[test]
    fn final_size_monotone_in_global_rate_per_tableau() {
        let p = params(
            3,
            1.0,
            0.0,
            poisson(8.0),
            InfectiousPeriod::fixed(1.0).unwrap(),
        );
        let mut rng = replicate_rng(23, 0);
        let net = build_network(100, 3, &p.degree, &mut rng);
        for _ in 0..100 {
            let initial = rng.random_range(0..net.population());
            let draws = draw_transmission(&net, &p.period, &mut rng);
            let low = outcome_with_draws(&net, 1.0, 0.05, &draws, initial);
            let high = outcome_with_draws(&net, 1.0, 0.15, &draws, initial);
            assert!(high.individuals_infected >= low.individuals_infected);
        }
    }

    #[test]
    fn disjoint_seed_batches_agree_statistically() {
        let p = params(
            3,
            1.0,
            0.1,
            poisson(8.0),
            InfectiousPeriod::fixed(1.0).unwrap(),
        );
        let mk = |seed| BatchConfig {
            households: 200,
            replicates: 400,
            cutoff_fraction: 0.15,
            seed,
            fixed_network: false,
        };
        let a = run_batch(&p, &mk(100)).unwrap();
        let b = run_batch(&p, &mk(200)).unwrap();
        let se = (a.p_se * a.p_se + b.p_se * b.p_se).sqrt();
        assert!(
            (a.p_hat - b.p_hat).abs() <= 3.0 * se,
            "{} vs {}",
            a.p_hat,
            b.p_hat
        );
    }
}
