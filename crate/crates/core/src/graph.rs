//! Immutable simple undirected graph with typed node attributes.
//!
//! A [`CollabNetwork`] is the per-period co-starring graph: nodes are stars,
//! edges join stars that shared at least one work inside the period, and each
//! edge carries the number of shared works as its weight. Networks are frozen
//! at construction; randomization and simulation produce new copies.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index, stable for the lifetime of one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Geographical belonging of a star. `Other` is carried through ingestion but
/// never takes part in two-region analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    Mainland,
    HongKong,
    Taiwan,
    Other,
}

impl Region {
    pub const ALL: [Region; 4] = [
        Region::Mainland,
        Region::HongKong,
        Region::Taiwan,
        Region::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Mainland => "Mainland",
            Region::HongKong => "HongKong",
            Region::Taiwan => "Taiwan",
            Region::Other => "Other",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Mainland" => Ok(Region::Mainland),
            "HongKong" => Ok(Region::HongKong),
            "Taiwan" => Ok(Region::Taiwan),
            "Other" => Ok(Region::Other),
            other => Err(format!("unknown region label {other:?}")),
        }
    }
}

/// Per-node attributes attached to a period network.
///
/// `prev_cooperation_count` and `prev_cross_region` are lagged one period and
/// default to zero/false for stars absent from the previous period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeAttributes {
    pub region: Region,
    pub birth_year: Option<i32>,
    pub first_work_year: i32,
    pub prev_cooperation_count: u32,
    pub prev_cross_region: bool,
}

impl NodeAttributes {
    pub fn with_region(region: Region) -> Self {
        NodeAttributes {
            region,
            birth_year: None,
            first_work_year: 0,
            prev_cooperation_count: 0,
            prev_cross_region: false,
        }
    }
}

/// A named inclusive analysis window `[start_year, end_year]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSpec {
    pub label: String,
    pub start_year: i32,
    pub end_year: i32,
}

impl PeriodSpec {
    pub fn new(label: impl Into<String>, start_year: i32, end_year: i32) -> Result<Self> {
        if start_year > end_year {
            return Err(Error::InvalidInput(format!(
                "period start year {start_year} is after end year {end_year}"
            )));
        }
        Ok(PeriodSpec {
            label: label.into(),
            start_year,
            end_year,
        })
    }

    /// Default label: `"start-end"`, or just `"start"` for one-year windows.
    pub fn with_default_label(start_year: i32, end_year: i32) -> Result<Self> {
        let label = if start_year == end_year {
            format!("{start_year}")
        } else {
            format!("{start_year}-{end_year}")
        };
        PeriodSpec::new(label, start_year, end_year)
    }

    pub fn contains(&self, year: i32) -> bool {
        year >= self.start_year && year <= self.end_year
    }

    /// Year at which ages are evaluated for this window; half-years are kept
    /// so even-length windows do not bias the binning downward.
    pub fn midpoint_year(&self) -> f64 {
        (self.start_year + self.end_year) as f64 / 2.0
    }
}

/// Simple undirected graph over stars of one period, with edge weights equal
/// to the number of shared works.
#[derive(Debug, Clone)]
pub struct CollabNetwork {
    period: PeriodSpec,
    labels: Vec<String>,
    attributes: Vec<NodeAttributes>,
    /// Canonical edge list: `(i, j)` with `i < j`, sorted lexicographically.
    edges: Vec<(u32, u32)>,
    weights: Vec<u32>,
    neighbors: Vec<Vec<u32>>,
    present: HashSet<(u32, u32)>,
}

impl CollabNetwork {
    /// Build a network from labelled, attributed nodes and weighted edges.
    ///
    /// Edges are given as `(i, j, weight)` node-index triples in any order and
    /// orientation; they are canonicalized to `i < j` and sorted, so iteration
    /// order is deterministic for identical inputs. Self-loops, duplicate
    /// edges, zero weights and out-of-range endpoints are rejected.
    pub fn new(
        period: PeriodSpec,
        nodes: Vec<(String, NodeAttributes)>,
        weighted_edges: impl IntoIterator<Item = (u32, u32, u32)>,
    ) -> Result<Self> {
        let n = nodes.len() as u32;
        let mut edges = Vec::new();
        let mut weights = Vec::new();
        let mut present = HashSet::new();
        let mut order: Vec<usize> = Vec::new();
        for (a, b, w) in weighted_edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a},{b}) out of range for {n} nodes"
                )));
            }
            if w == 0 {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) has weight 0")));
            }
            let e = (a.min(b), a.max(b));
            if !present.insert(e) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({},{})",
                    e.0, e.1
                )));
            }
            edges.push(e);
            weights.push(w);
        }
        order.extend(0..edges.len());
        order.sort_by_key(|&k| edges[k]);
        let edges: Vec<_> = order.iter().map(|&k| edges[k]).collect();
        let weights: Vec<_> = order.iter().map(|&k| weights[k]).collect();

        let mut neighbors = vec![Vec::new(); nodes.len()];
        for &(i, j) in &edges {
            neighbors[i as usize].push(j);
            neighbors[j as usize].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        let (labels, attributes) = nodes.into_iter().unzip();
        Ok(CollabNetwork {
            period,
            labels,
            attributes,
            edges,
            weights,
            neighbors,
            present,
        })
    }

    /// Unit-weight network with all-Mainland default attributes; handy for
    /// structural work where attributes play no role.
    pub fn from_edges(n_nodes: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let regions = vec![Region::Mainland; n_nodes];
        Self::from_edges_with_regions(&regions, edges)
    }

    /// Unit-weight network with the given per-node regions.
    pub fn from_edges_with_regions(regions: &[Region], edges: &[(u32, u32)]) -> Result<Self> {
        let period = PeriodSpec::new("synthetic", 0, 0)?;
        let nodes = regions
            .iter()
            .enumerate()
            .map(|(i, &r)| (format!("n{i}"), NodeAttributes::with_region(r)))
            .collect();
        Self::new(period, nodes, edges.iter().map(|&(a, b)| (a, b, 1)))
    }

    pub fn period(&self) -> &PeriodSpec {
        &self.period
    }

    pub fn node_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.attributes.len() as u32).map(NodeId)
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node.index()]
    }

    pub fn attributes(&self, node: NodeId) -> &NodeAttributes {
        &self.attributes[node.index()]
    }

    /// Canonical sorted edge list as `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Weight of the k-th edge in canonical order.
    pub fn edge_weight(&self, k: usize) -> u32 {
        self.weights[k]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        let e = (a.0.min(b.0), a.0.max(b.0));
        self.present.contains(&e)
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.neighbors[node.index()].len()
    }

    pub fn neighbors(&self, node: NodeId) -> &[u32] {
        &self.neighbors[node.index()]
    }

    /// Degree of every node, in node order. The sum is always `2 * edge_count`.
    pub fn degree_sequence(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    /// Mean degree `2|E| / |V|`.
    pub fn average_degree(&self) -> Result<f64> {
        if self.node_count() == 0 {
            return Err(Error::UndefinedOnGraph {
                op: "average_degree",
                nodes: 0,
            });
        }
        Ok(2.0 * self.edge_count() as f64 / self.node_count() as f64)
    }

    /// Local clustering of one node: fraction of neighbor pairs that are
    /// themselves connected. Degree below 2 yields 0.
    pub fn local_clustering(&self, node: NodeId) -> f64 {
        let nbrs = &self.neighbors[node.index()];
        let d = nbrs.len();
        if d < 2 {
            return 0.0;
        }
        let mut closed = 0usize;
        for (k, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[k + 1..] {
                if self.present.contains(&(u.min(w), u.max(w))) {
                    closed += 1;
                }
            }
        }
        closed as f64 / (d * (d - 1) / 2) as f64
    }

    /// Mean local clustering over all nodes, degree-<2 nodes contributing 0.
    pub fn average_clustering(&self) -> Result<f64> {
        if self.node_count() == 0 {
            return Err(Error::UndefinedOnGraph {
                op: "average_clustering",
                nodes: 0,
            });
        }
        let total: f64 = self.node_ids().map(|v| self.local_clustering(v)).sum();
        Ok(total / self.node_count() as f64)
    }

    /// Global transitivity: closed triples over all connected triples.
    /// The alternative reading of a reported clustering coefficient.
    pub fn transitivity(&self) -> Result<f64> {
        if self.node_count() == 0 {
            return Err(Error::UndefinedOnGraph {
                op: "transitivity",
                nodes: 0,
            });
        }
        let mut closed = 0usize;
        let mut triples = 0usize;
        for v in self.node_ids() {
            let nbrs = &self.neighbors[v.index()];
            let d = nbrs.len();
            triples += d * d.saturating_sub(1) / 2;
            for (k, &u) in nbrs.iter().enumerate() {
                for &w in &nbrs[k + 1..] {
                    if self.present.contains(&(u.min(w), u.max(w))) {
                        closed += 1;
                    }
                }
            }
        }
        if triples == 0 {
            return Ok(0.0);
        }
        Ok(closed as f64 / triples as f64)
    }

    /// Edge density `|E| / C(|V|, 2)`.
    pub fn density(&self) -> Result<f64> {
        let n = self.node_count();
        if n < 2 {
            return Err(Error::UndefinedOnGraph {
                op: "density",
                nodes: n,
            });
        }
        let possible = n * (n - 1) / 2;
        Ok(self.edge_count() as f64 / possible as f64)
    }
}
