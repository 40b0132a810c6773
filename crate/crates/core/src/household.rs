//! Within-household (local) computations.
//!
//! The two workhorses are triangular linear systems: one for the final size
//! `T` of the within-household epidemic started by a single infective
//! (not counting that infective), one for the size `M` of an individual's
//! local susceptibility set (not counting the individual).  Both are solved
//! forward in one pass; each equation introduces exactly one new unknown.
//!
//! Because the systems are transcribed from the classical references rather
//! than restated in full anywhere convenient, this module also carries
//! independent oracles: exhaustive enumeration of the local transmission
//! digraph for the fixed and zero-or-infinite period kinds, and Monte Carlo
//! over sampled digraphs for everything else.  The test suites require the
//! solves and the oracles to agree before anything downstream is trusted.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math;
use crate::period::{contact_prob, InfectiousPeriod};
use crate::{Error, Result};

/// Largest household size for which exhaustive digraph enumeration is offered.
pub const MAX_ENUMERABLE_HOUSEHOLD: usize = 4;

/// Negative entries at most this large (in magnitude) are treated as
/// floating-point cancellation noise and clamped to zero.
const CLAMP_EPS: f64 = 1e-12;

/// Entries outside `[-ENTRY_TOL, 1 + ENTRY_TOL]` mean the solve has lost all
/// accuracy and an error is raised instead.
const ENTRY_TOL: f64 = 1e-6;

/// A probability mass function on `{0, 1, ..., len-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    probs: Vec<f64>,
}

impl MassFunction {
    /// Validate raw solver output: clamp cancellation noise, reject anything
    /// that is not a probability, renormalise.
    pub(crate) fn from_raw(mut probs: Vec<f64>) -> Result<Self> {
        for (index, p) in probs.iter_mut().enumerate() {
            if *p < -ENTRY_TOL || *p > 1.0 + ENTRY_TOL || !p.is_finite() {
                return Err(Error::IllConditioned { index, value: *p });
            }
            if *p < 0.0 {
                if *p < -CLAMP_EPS {
                    return Err(Error::IllConditioned { index, value: *p });
                }
                *p = 0.0;
            }
        }
        let sum = math::kahan_sum(probs.iter().copied());
        if math::abs(sum - 1.0) > 1e-9 {
            return Err(Error::IllConditioned {
                index: probs.len(),
                value: sum,
            });
        }
        for p in probs.iter_mut() {
            *p /= sum;
        }
        Ok(MassFunction { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `P(X = k)`; zero outside the support.
    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        math::kahan_sum(self.probs.iter().enumerate().map(|(k, &p)| k as f64 * p))
    }

    /// Generating function of the mass function (plain Horner; supports are
    /// household-sized).
    pub fn pgf(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for &p in self.probs.iter().rev() {
            acc = acc * s + p;
        }
        acc
    }
}

fn validate_local_inputs(n: usize, lambda_local: f64, ip: &InfectiousPeriod) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter("household size must be at least 1"));
    }
    if !(lambda_local >= 0.0) {
        return Err(Error::InvalidParameter("local contact rate must be >= 0"));
    }
    ip.validate()
}

/// Mass function of the within-household final size `T` (initial infective
/// excluded), over `{0, ..., n-1}`.
///
/// Solves, forward in `l`,
///
/// ```text
/// sum_{k=0}^{l} C(n-1-k, l-k) P(T=k) / phi(lambda_local (n-1-l))^(k+1) = C(n-1, l)
/// ```
///
/// When `phi(lambda_local (n-1-l))` underflows to zero the corresponding
/// `P(T=l)` is exactly zero for `l < n-1` (escaping infection is impossible),
/// which keeps the all-or-nothing large-rate limit finite.
pub fn local_final_size_dist(
    n: usize,
    lambda_local: f64,
    ip: &InfectiousPeriod,
) -> Result<MassFunction> {
    validate_local_inputs(n, lambda_local, ip)?;
    let s = n - 1;
    let mut probs = vec![0.0; n];
    for l in 0..n {
        let phi = ip.laplace(lambda_local * (s - l) as f64)?;
        let pow_own = math::powi(phi, (l + 1) as i32);
        if pow_own == 0.0 {
            // l < s here: at l = s the transform argument is zero and phi = 1.
            probs[l] = 0.0;
            continue;
        }
        let mut rhs = math::binomial(s, l);
        for k in 0..l {
            rhs -= math::binomial(s - k, l - k) * probs[k] / math::powi(phi, (k + 1) as i32);
        }
        probs[l] = rhs * pow_own;
    }
    MassFunction::from_raw(probs)
}

/// Mean of the within-household final size, `mu_T`.
pub fn mean_local_final_size(n: usize, lambda_local: f64, ip: &InfectiousPeriod) -> Result<f64> {
    Ok(local_final_size_dist(n, lambda_local, ip)?.mean())
}

/// Mass function of the local susceptibility-set size `M` (focal individual
/// excluded), over `{0, ..., n-1}`.
///
/// With `alpha_k` solving the triangular system
///
/// ```text
/// sum_{j=1}^{k} C(k-1, j-1) alpha_j phi(j lambda_local)^(k-j) = 1,   k = 1..n,
/// ```
///
/// the mass function is `P(M = k-1) = C(n-1, k-1) alpha_k phi(k lambda_local)^(n-k)`.
pub fn susceptibility_set_dist(
    n: usize,
    lambda_local: f64,
    ip: &InfectiousPeriod,
) -> Result<MassFunction> {
    validate_local_inputs(n, lambda_local, ip)?;
    let mut alpha = vec![0.0; n + 1];
    for k in 1..=n {
        let mut rhs = 1.0;
        for j in 1..k {
            let phi = ip.laplace(j as f64 * lambda_local)?;
            rhs -= math::binomial(k - 1, j - 1) * alpha[j] * math::powi(phi, (k - j) as i32);
        }
        alpha[k] = rhs;
    }
    let mut probs = vec![0.0; n];
    for k in 1..=n {
        let phi = ip.laplace(k as f64 * lambda_local)?;
        probs[k - 1] = math::binomial(n - 1, k - 1) * alpha[k] * math::powi(phi, (n - k) as i32);
    }
    MassFunction::from_raw(probs)
}

/// Sampled within-household transmission digraph: vertex `i` carries its own
/// infectious period, and an arc `i -> j` means `i` would infect `j` locally.
/// Arcs out of a vertex share that vertex's period, so they are correlated
/// exactly as the model requires.
#[derive(Debug, Clone)]
pub struct LocalDigraph {
    n: usize,
    arcs: Vec<bool>,
    periods: Vec<f64>,
}

impl LocalDigraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self, i: usize) -> f64 {
        self.periods[i]
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        from != to && self.arcs[from * self.n + to]
    }

    /// Vertices reachable from `start` by directed paths, including `start`.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        self.closure(start, |g, a, b| g.has_arc(a, b))
    }

    /// Vertices from which `target` is reachable, including `target`.
    pub fn reaching(&self, target: usize) -> Vec<bool> {
        self.closure(target, |g, a, b| g.has_arc(b, a))
    }

    fn closure(&self, start: usize, step: impl Fn(&Self, usize, usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for w in 0..self.n {
                if !seen[w] && step(self, v, w) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

/// Draw a local transmission digraph: one period per vertex, then each arc
/// `i -> j` independently with probability `1 - exp(-lambda_local I_i)`.
pub fn sample_local_digraph<R: Rng + ?Sized>(
    n: usize,
    lambda_local: f64,
    ip: &InfectiousPeriod,
    rng: &mut R,
) -> LocalDigraph {
    let periods: Vec<f64> = (0..n).map(|_| ip.sample(rng)).collect();
    let mut arcs = vec![false; n * n];
    for i in 0..n {
        let p = contact_prob(lambda_local, periods[i]);
        for j in 0..n {
            if i != j {
                arcs[i * n + j] = rng.random::<f64>() < p;
            }
        }
    }
    LocalDigraph { n, arcs, periods }
}

/// How the degree of the household's seed individual is discounted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedConvention {
    /// The seed is the first case in the whole population; its full degree
    /// counts.
    Root,
    /// The seed was infected through one of its global edges, so that edge is
    /// excluded: effective degree `d - 1`.
    GloballyInfected,
}

fn effective_degrees(
    degrees: &[usize],
    seed: usize,
    convention: SeedConvention,
) -> Result<Vec<usize>> {
    let n = degrees.len();
    if seed >= n {
        return Err(Error::IndexOutOfRange {
            index: seed,
            size: n,
        });
    }
    let mut eff = degrees.to_vec();
    if convention == SeedConvention::GloballyInfected {
        if eff[seed] == 0 {
            return Err(Error::InvalidParameter(
                "a globally infected seed must have degree at least 1",
            ));
        }
        eff[seed] -= 1;
    }
    Ok(eff)
}

fn binomial_draw<R: Rng + ?Sized>(rng: &mut R, trials: usize, p: f64) -> usize {
    (0..trials).filter(|_| rng.random::<f64>() < p).count()
}

/// Number of global neighbours contacted by the local epidemic a seed starts
/// in a household with the given degree vector.
///
/// Runs one sampled digraph; every locally infected individual `i` then
/// contacts `Bin(d_i', 1 - exp(-lambda_global I_i))` of its global
/// neighbours, reusing the same period that drove its local arcs.
pub fn sample_phi<R: Rng + ?Sized>(
    degrees: &[usize],
    seed: usize,
    lambda_local: f64,
    lambda_global: f64,
    ip: &InfectiousPeriod,
    convention: SeedConvention,
    rng: &mut R,
) -> Result<usize> {
    let eff = effective_degrees(degrees, seed, convention)?;
    let g = sample_local_digraph(degrees.len(), lambda_local, ip, rng);
    let infected = g.reachable_from(seed);
    let mut total = 0;
    for i in 0..degrees.len() {
        if infected[i] {
            let p = contact_prob(lambda_global, g.period(i));
            total += binomial_draw(rng, eff[i], p);
        }
    }
    Ok(total)
}

/// Global edge counts around the seed's local susceptibility set: the pair
/// `(contacting, non-contacting)` of edge endpoints whose owners do and do
/// not make global contact with their neighbour in the set.
///
/// Contacts arrive from distinct outside individuals with independent
/// periods, so each edge contacts with the marginal probability
/// `1 - phi(lambda_global)` independently of the sampled digraph's periods.
pub fn sample_psi<R: Rng + ?Sized>(
    degrees: &[usize],
    seed: usize,
    lambda_local: f64,
    lambda_global: f64,
    ip: &InfectiousPeriod,
    convention: SeedConvention,
    rng: &mut R,
) -> Result<(usize, usize)> {
    let eff = effective_degrees(degrees, seed, convention)?;
    let p_g = 1.0 - ip.laplace(lambda_global)?;
    let g = sample_local_digraph(degrees.len(), lambda_local, ip, rng);
    let set = g.reaching(seed);
    let mut contacting = 0;
    let mut silent = 0;
    for i in 0..degrees.len() {
        if set[i] {
            let b = binomial_draw(rng, eff[i], p_g);
            contacting += b;
            silent += eff[i] - b;
        }
    }
    Ok((contacting, silent))
}

/// Direction of the statistic an oracle accumulates.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    /// Size of the set reachable from vertex 0, minus one (`T`).
    Forward,
    /// Size of the set reaching vertex 0, minus one (`M`).
    Backward,
}

fn reachable_count(n: usize, has_arc: &dyn Fn(usize, usize) -> bool, dir: Direction) -> usize {
    let mut seen = [false; MAX_ENUMERABLE_HOUSEHOLD];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            let arc = match dir {
                Direction::Forward => has_arc(v, w),
                Direction::Backward => has_arc(w, v),
            };
            if !seen[w] && arc {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen[..n].iter().filter(|&&x| x).count()
}

fn enumerate_measure(
    n: usize,
    lambda_local: f64,
    ip: &InfectiousPeriod,
    dir: Direction,
) -> Result<MassFunction> {
    validate_local_inputs(n, lambda_local, ip)?;
    if n > MAX_ENUMERABLE_HOUSEHOLD {
        return Err(Error::NotEnumerable(
            "exhaustive enumeration supports households of size at most 4",
        ));
    }
    let mut hist = vec![0.0; n];
    match *ip {
        InfectiousPeriod::Fixed { duration } => {
            // Degenerate periods make all n(n-1) arcs independent.
            let q = contact_prob(lambda_local, duration);
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        pairs.push((i, j));
                    }
                }
            }
            let arcs = pairs.len();
            for mask in 0u32..(1u32 << arcs) {
                let ones = mask.count_ones() as i32;
                let p = math::powi(q, ones) * math::powi(1.0 - q, arcs as i32 - ones);
                if p == 0.0 {
                    continue;
                }
                let has_arc = |a: usize, b: usize| {
                    pairs
                        .iter()
                        .position(|&pr| pr == (a, b))
                        .map(|idx| mask >> idx & 1 == 1)
                        .unwrap_or(false)
                };
                let size = reachable_count(n, &has_arc, dir);
                hist[size - 1] += p;
            }
        }
        InfectiousPeriod::ZeroOrInfinite { p_infinite } => {
            // Arcs are deterministic given the periods: an infinite-period
            // vertex reaches every household mate (at positive rate), a
            // zero-period vertex reaches none.
            for mask in 0u32..(1u32 << n) {
                let ones = mask.count_ones() as i32;
                let p = math::powi(p_infinite, ones)
                    * math::powi(1.0 - p_infinite, n as i32 - ones);
                if p == 0.0 {
                    continue;
                }
                let has_arc = |a: usize, b: usize| {
                    a != b && {
                        let period = if mask >> a & 1 == 1 { f64::INFINITY } else { 0.0 };
                        contact_prob(lambda_local, period) == 1.0
                    }
                };
                let size = reachable_count(n, &has_arc, dir);
                hist[size - 1] += p;
            }
        }
        InfectiousPeriod::Exponential { .. } => {
            return Err(Error::NotEnumerable(
                "exhaustive enumeration needs a fixed or zero-or-infinite period; \
                 use the Monte Carlo oracle",
            ));
        }
    }
    MassFunction::from_raw(hist)
}

/// Exhaustive oracle for the final-size law `T` (fixed / zero-or-infinite
/// periods, `n <= 4`).
pub fn enumerated_final_size_dist(
    n: usize,
    lambda_local: f64,
    ip: &InfectiousPeriod,
) -> Result<MassFunction> {
    enumerate_measure(n, lambda_local, ip, Direction::Forward)
}

/// Exhaustive oracle for the susceptibility-set law `M` (fixed /
/// zero-or-infinite periods, `n <= 4`).
pub fn enumerated_susceptibility_dist(
    n: usize,
    lambda_local: f64,
    ip: &InfectiousPeriod,
) -> Result<MassFunction> {
    enumerate_measure(n, lambda_local, ip, Direction::Backward)
}

fn empirical_measure<R: Rng + ?Sized>(
    n: usize,
    lambda_local: f64,
    ip: &InfectiousPeriod,
    draws: usize,
    rng: &mut R,
    dir: Direction,
) -> Result<MassFunction> {
    validate_local_inputs(n, lambda_local, ip)?;
    if draws == 0 {
        return Err(Error::InvalidParameter("oracle needs at least one draw"));
    }
    let mut counts = vec![0usize; n];
    for _ in 0..draws {
        let g = sample_local_digraph(n, lambda_local, ip, rng);
        let set = match dir {
            Direction::Forward => g.reachable_from(0),
            Direction::Backward => g.reaching(0),
        };
        let size = set.iter().filter(|&&x| x).count();
        counts[size - 1] += 1;
    }
    let probs = counts.iter().map(|&c| c as f64 / draws as f64).collect();
    MassFunction::from_raw(probs)
}

/// Monte Carlo oracle for the final-size law; works for every period kind.
pub fn empirical_final_size_dist<R: Rng + ?Sized>(
    n: usize,
    lambda_local: f64,
    ip: &InfectiousPeriod,
    draws: usize,
    rng: &mut R,
) -> Result<MassFunction> {
    empirical_measure(n, lambda_local, ip, draws, rng, Direction::Forward)
}

/// Monte Carlo oracle for the susceptibility-set law.
pub fn empirical_susceptibility_dist<R: Rng + ?Sized>(
    n: usize,
    lambda_local: f64,
    ip: &InfectiousPeriod,
    draws: usize,
    rng: &mut R,
) -> Result<MassFunction> {
    empirical_measure(n, lambda_local, ip, draws, rng, Direction::Backward)
}
