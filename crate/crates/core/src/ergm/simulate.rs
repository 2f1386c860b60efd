//! Drawing graphs from a fitted model.
//!
//! [`MetropolisChain`] runs the classic single-dyad-toggle sampler: propose
//! flipping one uniformly chosen dyad and accept with probability
//! min(1, exp(θ·δ·s)), where s is +1 for an addition and -1 for a deletion.
//! Because every term here is dyad independent, θ·δ per dyad is a constant
//! that the chain precomputes once. For the same reason graphs can also be
//! sampled exactly, dyad by dyad, via [`sample_dyad_independent`]; the chain
//! exists to validate that route and to exercise the sampler contract.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{compile, compute_statistics, dyad_count, Compiled, TermSpec, DEFAULT_DYAD_CAP};
use crate::error::{Error, Result};
use crate::graph::{CollabNetwork, NodeId};

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    /// Steps discarded before the first sample.
    pub burn_in: usize,
    pub n_samples: usize,
    /// Steps between consecutive samples.
    pub thin: usize,
    pub seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            burn_in: 10_000,
            n_samples: 1_000,
            thin: 10,
            seed: 0,
        }
    }
}

/// A running sampler over the dyads of a fixed node roster.
///
/// The node set, attributes and period come from a template network, whose
/// edge set is also the starting state.
pub struct MetropolisChain {
    compiled: Compiled,
    theta: Vec<f64>,
    pairs: Vec<(u32, u32)>,
    /// θ·δ for each dyad; the log odds of the dyad being present.
    log_odds: Vec<f64>,
    state: Vec<bool>,
    stats: Vec<f64>,
    delta_buf: Vec<f64>,
}

impl MetropolisChain {
    pub fn new(template: &CollabNetwork, terms: &[TermSpec], theta: &[f64]) -> Result<Self> {
        let n = template.node_count();
        let n_dyads = dyad_count(n);
        if n_dyads == 0 {
            return Err(Error::InvalidGraph(
                "a sampler needs at least two nodes".into(),
            ));
        }
        if n_dyads > DEFAULT_DYAD_CAP {
            return Err(Error::DyadCapExceeded {
                n_dyads,
                cap: DEFAULT_DYAD_CAP,
            });
        }
        let compiled = compile(template, terms)?;
        if theta.len() != compiled.k() {
            return Err(Error::InvalidInput(format!(
                "theta has {} entries for {} terms",
                theta.len(),
                compiled.k()
            )));
        }
        let mut pairs = Vec::with_capacity(n_dyads);
        let mut log_odds = Vec::with_capacity(n_dyads);
        let mut state = Vec::with_capacity(n_dyads);
        let mut delta = vec![0.0; compiled.k()];
        for i in 0..n {
            for j in (i + 1)..n {
                compiled.delta_into(i, j, &mut delta);
                pairs.push((i as u32, j as u32));
                log_odds.push(delta.iter().zip(theta).map(|(d, t)| d * t).sum());
                state.push(template.has_edge(NodeId(i as u32), NodeId(j as u32)));
            }
        }
        let stats = compute_statistics(template, terms)?;
        Ok(MetropolisChain {
            delta_buf: vec![0.0; compiled.k()],
            compiled,
            theta: theta.to_vec(),
            pairs,
            log_odds,
            state,
            stats,
        })
    }

    pub fn n_dyads(&self) -> usize {
        self.pairs.len()
    }

    /// Current statistic vector, maintained incrementally.
    pub fn statistics(&self) -> &[f64] {
        &self.stats
    }

    pub fn edge_count(&self) -> usize {
        self.state.iter().filter(|&&s| s).count()
    }

    /// Current edge set, canonical order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        self.pairs
            .iter()
            .zip(&self.state)
            .filter(|(_, &s)| s)
            .map(|(&e, _)| e)
            .collect()
    }

    /// Dyad-presence bitmask, for small-graph distribution tests.
    pub fn state_mask(&self) -> u64 {
        assert!(self.n_dyads() <= 64, "mask only defined for tiny graphs");
        self.state
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .fold(0u64, |m, (d, _)| m | (1 << d))
    }

    /// One proposal; true when it was accepted.
    pub fn step(&mut self, rng: &mut impl Rng) -> bool {
        let d = rng.random_range(0..self.pairs.len());
        let s = if self.state[d] { -1.0 } else { 1.0 };
        let log_ratio = s * self.log_odds[d];
        let u: f64 = rng.random();
        if log_ratio >= 0.0 || u.ln() < log_ratio {
            self.state[d] = !self.state[d];
            let (i, j) = self.pairs[d];
            self.compiled
                .delta_into(i as usize, j as usize, &mut self.delta_buf);
            for (stat, delta) in self.stats.iter_mut().zip(&self.delta_buf) {
                *stat += s * delta;
            }
            true
        } else {
            false
        }
    }

    /// Burn in, then record the statistic vector every `thin` steps.
    pub fn run(&mut self, cfg: &SimulateConfig) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.burn_in {
            self.step(&mut rng);
        }
        let mut samples = Vec::with_capacity(cfg.n_samples);
        for _ in 0..cfg.n_samples {
            for _ in 0..cfg.thin.max(1) {
                self.step(&mut rng);
            }
            samples.push(self.stats.clone());
        }
        samples
    }

    /// Burn in, then count visits per dyad-state mask over `steps` single
    /// steps. Only meaningful for tiny graphs.
    pub fn visit_counts(&mut self, rng: &mut impl Rng, burn_in: usize, steps: usize) -> Vec<u64> {
        assert!(self.n_dyads() <= 20, "visit counting only for tiny graphs");
        for _ in 0..burn_in {
            self.step(rng);
        }
        let mut counts = vec![0u64; 1 << self.n_dyads()];
        for _ in 0..steps {
            self.step(rng);
            counts[self.state_mask() as usize] += 1;
        }
        counts
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
}

/// Sampled statistic vectors from a model.
pub fn simulate_statistics(
    template: &CollabNetwork,
    terms: &[TermSpec],
    theta: &[f64],
    cfg: &SimulateConfig,
) -> Result<Vec<Vec<f64>>> {
    let mut chain = MetropolisChain::new(template, terms, theta)?;
    Ok(chain.run(cfg))
}

/// Draw one graph exactly by independent dyad tosses.
///
/// Valid because every supported term is dyad independent: dyad (i, j) is
/// present with probability σ(θ·δ(i, j)) independently of all others. Node
/// roster and attributes are taken from the template; its edges are ignored.
pub fn sample_dyad_independent(
    template: &CollabNetwork,
    terms: &[TermSpec],
    theta: &[f64],
    rng: &mut impl Rng,
) -> Result<CollabNetwork> {
    let n = template.node_count();
    if dyad_count(n) > DEFAULT_DYAD_CAP {
        return Err(Error::DyadCapExceeded {
            n_dyads: dyad_count(n),
            cap: DEFAULT_DYAD_CAP,
        });
    }
    let compiled = compile(template, terms)?;
    if theta.len() != compiled.k() {
        return Err(Error::InvalidInput(format!(
            "theta has {} entries for {} terms",
            theta.len(),
            compiled.k()
        )));
    }
    let mut delta = vec![0.0; compiled.k()];
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            compiled.delta_into(i, j, &mut delta);
            let eta: f64 = delta.iter().zip(theta).map(|(d, t)| d * t).sum();
            let p = if eta >= 0.0 {
                1.0 / (1.0 + (-eta).exp())
            } else {
                let e = eta.exp();
                e / (1.0 + e)
            };
            if rng.random::<f64>() < p {
                edges.push((i as u32, j as u32, 1));
            }
        }
    }
    let nodes = template
        .node_ids()
        .map(|v| (template.label(v).to_string(), template.attributes(v).clone()))
        .collect();
    CollabNetwork::new(template.period().clone(), nodes, edges)
}
