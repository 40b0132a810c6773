//! Finite-population contact structure: `m` households of size `n`, plus a
//! configuration-model multigraph of global contacts.
//!
//! Construction assigns each individual an i.i.d. degree, lays out one
//! half-edge per degree unit, shuffles the half-edge list once and pairs
//! adjacent entries.  A uniform permutation paired this way is exactly a
//! uniform perfect matching; when the half-edge total is odd the last entry
//! of the shuffled list — a uniformly chosen half-edge — is left unpaired
//! and dropped.  Self-loops and parallel edges are kept; their counts are
//! observable through [`imperfection_stats`].

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::degree::DegreeDistribution;

/// Households-plus-multigraph population structure.  Individual `i` lives in
/// household `i / household_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    households: usize,
    household_size: usize,
    degrees: Vec<usize>,
    edges: Vec<(usize, usize)>,
    /// CSR incidence: for individual `i`, entries
    /// `incidence[offsets[i]..offsets[i+1]]` list `(edge index, is_first)`.
    incidence_offsets: Vec<usize>,
    incidence: Vec<(usize, bool)>,
    dropped_half_edge: Option<usize>,
}

impl Network {
    pub fn households(&self) -> usize {
        self.households
    }

    pub fn household_size(&self) -> usize {
        self.household_size
    }

    pub fn population(&self) -> usize {
        self.households * self.household_size
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Global edges as endpoint pairs; repeats and equal endpoints allowed.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn household_of(&self, individual: usize) -> usize {
        individual / self.household_size
    }

    /// Owner of the half-edge dropped to even the total, if any.
    pub fn dropped_half_edge(&self) -> Option<usize> {
        self.dropped_half_edge
    }

    /// Edges incident to `individual`, each with the flag saying whether the
    /// individual is the edge's first endpoint.
    pub fn incident(&self, individual: usize) -> &[(usize, bool)] {
        &self.incidence[self.incidence_offsets[individual]..self.incidence_offsets[individual + 1]]
    }
}

/// Build a population of `households` households of size `household_size`,
/// with degrees i.i.d. from `degree` and half-edges paired uniformly.
pub fn build_network<R: Rng + ?Sized>(
    households: usize,
    household_size: usize,
    degree: &DegreeDistribution,
    rng: &mut R,
) -> Network {
    assert!(households >= 1 && household_size >= 1);
    let total = households * household_size;
    let degrees: Vec<usize> = (0..total).map(|_| degree.sample(rng)).collect();

    let mut half_edges: Vec<usize> = Vec::with_capacity(degrees.iter().sum());
    for (i, &d) in degrees.iter().enumerate() {
        half_edges.extend(core::iter::repeat(i).take(d));
    }
    half_edges.shuffle(rng);
    let dropped_half_edge = if half_edges.len() % 2 == 1 {
        half_edges.pop()
    } else {
        None
    };
    let edges: Vec<(usize, usize)> = half_edges.chunks_exact(2).map(|c| (c[0], c[1])).collect();

    // CSR incidence over the realised endpoints.
    let mut counts = vec![0usize; total + 1];
    for &(a, b) in &edges {
        counts[a + 1] += 1;
        counts[b + 1] += 1;
    }
    for i in 0..total {
        counts[i + 1] += counts[i];
    }
    let incidence_offsets = counts.clone();
    let mut cursor = counts;
    let mut incidence = vec![(0usize, false); 2 * edges.len()];
    for (e, &(a, b)) in edges.iter().enumerate() {
        incidence[cursor[a]] = (e, true);
        cursor[a] += 1;
        incidence[cursor[b]] = (e, false);
        cursor[b] += 1;
    }

    Network {
        households,
        household_size,
        degrees,
        edges,
        incidence_offsets,
        incidence,
        dropped_half_edge,
    }
}

/// Rejection variant: rebuild until the individual-level multigraph is simple
/// (no self-loops, no parallel edges).  Off the default paths; intended for
/// experiments on the effect of imperfections.
pub fn build_simple_network<R: Rng + ?Sized>(
    households: usize,
    household_size: usize,
    degree: &DegreeDistribution,
    rng: &mut R,
    max_attempts: usize,
) -> crate::Result<Network> {
    for _ in 0..max_attempts {
        let net = build_network(households, household_size, degree, rng);
        let stats = imperfection_stats(&net);
        if stats.self_loops == 0 && stats.parallel_edges == 0 {
            return Ok(net);
        }
    }
    Err(crate::Error::NonConvergence(
        "no simple graph found within the attempt budget",
    ))
}

/// Multigraph imperfection counts, at individual level and on the household
/// quotient (households as macro-vertices).
///
/// `parallel_edges` counts the excess multiplicity among edges with distinct
/// endpoints; loop multiplicities show up in `self_loops` only.  The same
/// convention applies at household level, so every within-household edge is a
/// household self-loop and `household_self_loops >= self_loops`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ImperfectionStats {
    pub self_loops: usize,
    pub parallel_edges: usize,
    pub household_self_loops: usize,
    pub household_parallel_edges: usize,
}

fn excess_multiplicity(mut pairs: Vec<(usize, usize)>) -> usize {
    pairs.sort_unstable();
    pairs.windows(2).filter(|w| w[0] == w[1]).count()
}

pub fn imperfection_stats(net: &Network) -> ImperfectionStats {
    let mut stats = ImperfectionStats::default();
    let mut pairs = Vec::new();
    let mut household_pairs = Vec::new();
    for &(a, b) in net.edges() {
        if a == b {
            stats.self_loops += 1;
        } else {
            pairs.push((a.min(b), a.max(b)));
        }
        let (ha, hb) = (net.household_of(a), net.household_of(b));
        if ha == hb {
            stats.household_self_loops += 1;
        } else {
            household_pairs.push((ha.min(hb), ha.max(hb)));
        }
    }
    stats.parallel_edges = excess_multiplicity(pairs);
    stats.household_parallel_edges = excess_multiplicity(household_pairs);
    stats
}
