//! Degree-preserving randomization and the cross-region cooperation index.
//!
//! The null model repeatedly applies double edge swaps, which exchange the
//! endpoints of two randomly chosen edges and therefore hold every node's
//! degree fixed. Comparing the observed number of boundary-crossing edges to
//! its mean over many randomized replicates yields an index whose value is 1
//! when the boundary plays no role, below 1 when it suppresses collaboration.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{CollabNetwork, NodeId};

/// Tuning knobs for the randomization procedure.
#[derive(Debug, Clone)]
pub struct SwapConfig {
    /// Attempted swaps per replicate, as a multiple of the edge count.
    pub swap_multiplier: f64,
    /// Number of randomized replicates behind the expectation and the band.
    pub replicates: usize,
    /// Master seed; replicate r uses stream r of this seed.
    pub seed: u64,
    /// When set, rejected proposals do not count against the swap budget.
    /// A safety cap of 100x the budget still bounds the loop, since some
    /// graphs (a triangle, a star) admit no legal swap at all.
    pub count_successes_only: bool,
}

impl Default for SwapConfig {
    fn default() -> Self {
        SwapConfig {
            swap_multiplier: 2.0,
            replicates: 100,
            seed: 0,
            count_successes_only: false,
        }
    }
}

/// Number of swap attempts for an edge count under a multiplier.
pub fn attempted_swaps(edge_count: usize, multiplier: f64) -> usize {
    (multiplier * edge_count as f64).ceil() as usize
}

/// Edge membership behind the rewirer. Swap attempts are membership-bound,
/// so graphs whose dyad space fits in a few megabytes get a flat bitset
/// indexed by dyad rank; anything larger falls back to hashing. The two
/// behave identically.
#[derive(Debug, Clone)]
enum Presence {
    Bits { n: u64, words: Vec<u64> },
    Hash(HashSet<(u32, u32)>),
}

/// Largest dyad space (8 MiB of bits) the bitset representation is used for.
const BITSET_DYAD_LIMIT: u64 = 1 << 26;

/// Rank of the ordered pair (a, b) among all dyads of an n-node graph,
/// counting lexicographically.
#[inline]
fn dyad_rank(n: u64, a: u32, b: u32) -> usize {
    let (a, b) = (a as u64, b as u64);
    (a * n - a * (a + 1) / 2 + (b - a - 1)) as usize
}

impl Presence {
    fn new(n: usize, edges: &[(u32, u32)]) -> Self {
        let n = n as u64;
        let dyads = n * n.saturating_sub(1) / 2;
        if dyads <= BITSET_DYAD_LIMIT {
            let mut words = vec![0u64; (dyads as usize).div_ceil(64)];
            for &(a, b) in edges {
                let d = dyad_rank(n, a, b);
                words[d / 64] |= 1 << (d % 64);
            }
            Presence::Bits { n, words }
        } else {
            Presence::Hash(edges.iter().copied().collect())
        }
    }

    #[inline]
    fn contains(&self, e: (u32, u32)) -> bool {
        match self {
            Presence::Bits { n, words } => {
                let d = dyad_rank(*n, e.0, e.1);
                words[d / 64] & (1 << (d % 64)) != 0
            }
            Presence::Hash(set) => set.contains(&e),
        }
    }

    #[inline]
    fn insert(&mut self, e: (u32, u32)) {
        match self {
            Presence::Bits { n, words } => {
                let d = dyad_rank(*n, e.0, e.1);
                words[d / 64] |= 1 << (d % 64);
            }
            Presence::Hash(set) => {
                set.insert(e);
            }
        }
    }

    #[inline]
    fn remove(&mut self, e: (u32, u32)) {
        match self {
            Presence::Bits { n, words } => {
                let d = dyad_rank(*n, e.0, e.1);
                words[d / 64] &= !(1 << (d % 64));
            }
            Presence::Hash(set) => {
                set.remove(&e);
            }
        }
    }
}

/// An edge set undergoing degree-preserving rewiring.
///
/// Holds the unweighted simple edge list of a network; weights play no part
/// in the null model. Each [`attempt`](Rewirer::attempt) draws two edges
/// (a, b) and (c, d), flips a fair coin for orientation, and proposes
/// replacing them with (a, c) and (b, d). Proposals that would create a
/// self-loop, a duplicate edge, or that drew overlapping edges are rejected
/// and leave the state untouched.
#[derive(Debug, Clone)]
pub struct Rewirer {
    edges: Vec<(u32, u32)>,
    present: Presence,
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Rewirer {
    pub fn new(g: &CollabNetwork) -> Self {
        let edges = g.edges().to_vec();
        let present = Presence::new(g.node_count(), &edges);
        Rewirer { edges, present }
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Propose one swap; true if it was applied.
    pub fn attempt(&mut self, rng: &mut impl Rng) -> bool {
        let m = self.edges.len();
        if m < 2 {
            return false;
        }
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m);
        if i == j {
            return false;
        }
        let (a, b) = self.edges[i];
        let (c, d) = self.edges[j];
        let (c, d) = if rng.random_bool(0.5) { (c, d) } else { (d, c) };
        if a == c || a == d || b == c || b == d {
            return false;
        }
        let new_i = ordered(a, c);
        let new_j = ordered(b, d);
        if self.present.contains(new_i) || self.present.contains(new_j) {
            return false;
        }
        self.present.remove(self.edges[i]);
        self.present.remove(self.edges[j]);
        self.present.insert(new_i);
        self.present.insert(new_j);
        self.edges[i] = new_i;
        self.edges[j] = new_j;
        true
    }

    /// Run a fixed number of attempts; rejections spend budget. Returns the
    /// number of applied swaps.
    pub fn shuffle(&mut self, attempts: usize, rng: &mut impl Rng) -> usize {
        let mut applied = 0;
        for _ in 0..attempts {
            if self.attempt(rng) {
                applied += 1;
            }
        }
        applied
    }

    /// Keep proposing until `target` swaps have been applied, giving up after
    /// `cap` total attempts. Returns the number applied.
    pub fn shuffle_successes(&mut self, target: usize, cap: usize, rng: &mut impl Rng) -> usize {
        let mut applied = 0;
        let mut tried = 0;
        while applied < target && tried < cap {
            if self.attempt(rng) {
                applied += 1;
            }
            tried += 1;
        }
        applied
    }

    /// Rebuild a network with the rewired edges (unit weights) and the node
    /// roster and attributes of `template`.
    pub fn into_network(self, template: &CollabNetwork) -> Result<CollabNetwork> {
        let nodes = template
            .node_ids()
            .map(|v| (template.label(v).to_string(), template.attributes(v).clone()))
            .collect();
        CollabNetwork::new(
            template.period().clone(),
            nodes,
            self.edges.into_iter().map(|(a, b)| (a, b, 1)),
        )
    }
}

/// One randomized replicate of a network under a config, as an independent
/// function of (seed, stream).
pub fn randomize(g: &CollabNetwork, cfg: &SwapConfig, stream: u64) -> Result<CollabNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut rewirer = Rewirer::new(g);
    run_budget(&mut rewirer, g.edge_count(), cfg, &mut rng);
    rewirer.into_network(g)
}

fn run_budget(rewirer: &mut Rewirer, edge_count: usize, cfg: &SwapConfig, rng: &mut impl Rng) {
    let budget = attempted_swaps(edge_count, cfg.swap_multiplier);
    if cfg.count_successes_only {
        let cap = budget.saturating_mul(100).max(1000);
        rewirer.shuffle_successes(budget, cap, rng);
    } else {
        rewirer.shuffle(budget, rng);
    }
}

fn cross_count(edges: &[(u32, u32)], g: &CollabNetwork) -> u32 {
    edges
        .iter()
        .filter(|&&(i, j)| g.attributes(NodeId(i)).region != g.attributes(NodeId(j)).region)
        .count() as u32
}

/// Number of edges whose endpoints lie in different regions (unweighted).
pub fn cross_region_observed(g: &CollabNetwork) -> u32 {
    cross_count(g.edges(), g)
}

/// Linear-interpolation quantile of a sample, `p` in [0, 1].
///
/// Matches the common "type 7" definition: the quantile sits at rank
/// p(n-1) of the sorted sample, interpolating between neighbors.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty sample");
    assert!((0.0..=1.0).contains(&p), "p outside [0, 1]");
    let mut sorted = values.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("non-NaN sample"));
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// The cross-region cooperation index for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexResult {
    pub period: String,
    /// Observed boundary-crossing edge count.
    pub observed: u32,
    /// Mean crossing count over the randomized replicates.
    pub expected: f64,
    /// observed / expected.
    pub ratio: f64,
    /// 2.5th percentile of the replicate crossing counts, over expected:
    /// the lower end of the null band on the ratio scale.
    pub ci_low: f64,
    /// 97.5th percentile of the replicate crossing counts, over expected.
    pub ci_high: f64,
    /// Crossing count of each replicate, in stream order.
    pub replicate_counts: Vec<u32>,
}

/// Compare observed boundary crossing to the degree-preserving null.
///
/// Replicate r rewires a fresh copy of the graph with stream r of the
/// configured seed, so results do not depend on thread count or scheduling.
/// Errors: a single-region (or empty) network has no boundary to measure,
/// and a null that never produces a crossing edge leaves the ratio undefined.
pub fn cross_region_index(g: &CollabNetwork, cfg: &SwapConfig) -> Result<IndexResult> {
    let regions: HashSet<_> = g.node_ids().map(|v| g.attributes(v).region).collect();
    if regions.len() < 2 {
        let found = regions
            .iter()
            .map(|r| r.as_str())
            .next()
            .unwrap_or("no nodes at all")
            .to_string();
        return Err(Error::SingleRegion {
            period: g.period().label.clone(),
            found,
        });
    }
    if cfg.replicates == 0 {
        return Err(Error::InvalidInput("replicates must be positive".into()));
    }

    let observed = cross_region_observed(g);
    let replicate_counts: Vec<u32> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            let mut rewirer = Rewirer::new(g);
            run_budget(&mut rewirer, g.edge_count(), cfg, &mut rng);
            cross_count(rewirer.edges(), g)
        })
        .collect();

    let expected =
        replicate_counts.iter().map(|&c| c as f64).sum::<f64>() / replicate_counts.len() as f64;
    if expected == 0.0 {
        return Err(Error::DegenerateNull {
            period: g.period().label.clone(),
        });
    }
    let counts_f: Vec<f64> = replicate_counts.iter().map(|&c| c as f64).collect();
    Ok(IndexResult {
        period: g.period().label.clone(),
        observed,
        expected,
        ratio: observed as f64 / expected,
        ci_low: quantile(&counts_f, 0.025) / expected,
        ci_high: quantile(&counts_f, 0.975) / expected,
        replicate_counts,
    })
}
