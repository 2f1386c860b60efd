//! Brute-force ground truth for tiny graphs.
//!
//! For up to six nodes the full graph space (2^15 states at most) is small
//! enough to enumerate. The oracle computes each graph's statistics on a
//! freshly built network object — not through the dyadic shortcut used by
//! the fitter — so it provides an independent check that the factorized
//! likelihood and the Metropolis sampler agree with the model's definition.

use super::{compute_statistics, dyad_count, TermSpec};
use crate::error::{Error, Result};
use crate::graph::CollabNetwork;

/// Maximum node count the oracle will enumerate.
pub const ORACLE_MAX_NODES: usize = 6;

/// The exact distribution of a model over every graph on a node roster.
///
/// Graphs are indexed by dyad bitmask: bit d is the d-th pair in
/// lexicographic (i, j) order, matching the fitter and the sampler.
#[derive(Debug, Clone)]
pub struct NormalizerOracle {
    n_nodes: usize,
    pairs: Vec<(u32, u32)>,
    /// Statistic vector of every graph, by mask.
    pub stats: Vec<Vec<f64>>,
    /// θ·g(y) of every graph, by mask.
    pub log_weights: Vec<f64>,
    /// ln k(θ), the log normalizer.
    pub log_z: f64,
}

pub fn oracle_distribution(
    template: &CollabNetwork,
    terms: &[TermSpec],
    theta: &[f64],
) -> Result<NormalizerOracle> {
    let n = template.node_count();
    if n > ORACLE_MAX_NODES {
        return Err(Error::OracleTooLarge { n });
    }
    let n_dyads = dyad_count(n);
    let pairs: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|i| ((i + 1)..n as u32).map(move |j| (i, j)))
        .collect();
    let nodes: Vec<_> = template
        .node_ids()
        .map(|v| (template.label(v).to_string(), template.attributes(v).clone()))
        .collect();

    let mut stats = Vec::with_capacity(1 << n_dyads);
    let mut log_weights = Vec::with_capacity(1 << n_dyads);
    for mask in 0u64..(1 << n_dyads) {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(d, _)| mask & (1 << d) != 0)
            .map(|(_, &(i, j))| (i, j, 1));
        let g = CollabNetwork::new(template.period().clone(), nodes.clone(), edges)?;
        let s = compute_statistics(&g, terms)?;
        if s.len() != theta.len() {
            return Err(Error::InvalidInput(format!(
                "theta has {} entries for {} terms",
                theta.len(),
                s.len()
            )));
        }
        log_weights.push(s.iter().zip(theta).map(|(a, b)| a * b).sum());
        stats.push(s);
    }

    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + log_weights.iter().map(|w| (w - max).exp()).sum::<f64>().ln();

    Ok(NormalizerOracle {
        n_nodes: n,
        pairs,
        stats,
        log_weights,
        log_z,
    })
}

impl NormalizerOracle {
    pub fn n_graphs(&self) -> usize {
        self.log_weights.len()
    }

    /// Probability of the graph with the given dyad mask.
    pub fn probability(&self, mask: u64) -> f64 {
        (self.log_weights[mask as usize] - self.log_z).exp()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.n_graphs() as u64).map(|m| self.probability(m)).collect()
    }

    /// Dyad mask of an edge list over this oracle's node roster.
    pub fn mask_of(&self, edges: &[(u32, u32)]) -> u64 {
        let n = self.n_nodes as u32;
        edges.iter().fold(0u64, |mask, &(a, b)| {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            let d = i * n - i * (i + 1) / 2 + (j - i - 1);
            mask | (1 << d)
        })
    }

    /// Probability of a concrete graph (same node roster assumed).
    pub fn probability_of(&self, g: &CollabNetwork) -> f64 {
        self.probability(self.mask_of(g.edges()))
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }
}
