//! Exponential random graph models with dyad-independent terms.
//!
//! A model assigns a graph y the probability exp(θ·g(y, X)) / k(θ), where
//! g collects sufficient statistics over edges and node attributes X. Every
//! term offered here is dyad independent: toggling one dyad changes each
//! statistic by an amount (the change statistic) that never depends on the
//! rest of the graph. The likelihood therefore factorizes over dyads into a
//! logistic regression, which [`fit`] solves exactly by Newton iteration;
//! [`oracle`] cross-checks the factorization by brute-force enumeration and
//! [`simulate`] draws graphs from a fitted model.

pub mod fit;
pub mod oracle;
pub mod simulate;

pub use fit::{fit, fit_with_options, log_likelihood_and_score, ErgmFit, FitOptions};
pub use oracle::{oracle_distribution, NormalizerOracle};
pub use simulate::{sample_dyad_independent, simulate_statistics, MetropolisChain, SimulateConfig};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CollabNetwork, NodeId, Region};

/// Hard ceiling on the number of dyads a model will touch.
pub const DEFAULT_DYAD_CAP: usize = 50_000_000;

/// Number of unordered node pairs in an n-node graph.
pub fn dyad_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// One model term.
///
/// `attr` names a node attribute: `region`, `age_group`, `cohort`,
/// `prev_cross_region` (categorical) or `prev_cooperation_count` (numeric).
/// The first two categorical ones are derived per period: `age_group` bins
/// the star's age at the period midpoint and `cohort` bins the debut year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "snake_case")]
pub enum TermSpec {
    /// Edge count; the intercept of the model.
    Edges,
    /// Incidences of one attribute level: each edge contributes 0, 1 or 2
    /// depending on how many endpoints carry `level`. The reference level is
    /// the one deliberately left out and is recorded only for bookkeeping.
    NodeFactor {
        attr: String,
        level: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference: Option<String>,
    },
    /// Sum of the numeric attribute over both endpoints of each edge.
    NodeCov { attr: String },
    /// Count of edges whose endpoints share the attribute value.
    NodeMatch { attr: String },
}

impl TermSpec {
    pub fn node_factor(attr: &str, level: &str, reference: &str) -> Self {
        TermSpec::NodeFactor {
            attr: attr.into(),
            level: level.into(),
            reference: Some(reference.into()),
        }
    }

    pub fn node_cov(attr: &str) -> Self {
        TermSpec::NodeCov { attr: attr.into() }
    }

    pub fn node_match(attr: &str) -> Self {
        TermSpec::NodeMatch { attr: attr.into() }
    }

    /// Canonical coefficient name, e.g. `edges`, `nodematch.region`,
    /// `nodefactor.region.HongKong`, `nodecov.prev_cooperation_count`.
    pub fn name(&self) -> String {
        match self {
            TermSpec::Edges => "edges".into(),
            TermSpec::NodeFactor { attr, level, .. } => format!("nodefactor.{attr}.{level}"),
            TermSpec::NodeCov { attr } => format!("nodecov.{attr}"),
            TermSpec::NodeMatch { attr } => format!("nodematch.{attr}"),
        }
    }
}

/// Age-at-midpoint bin; `None` (unknown birth year) is its own level so no
/// dyad is ever dropped.
pub fn age_group_level(age: Option<f64>) -> &'static str {
    match age {
        None => "unknown",
        Some(a) if a < 20.0 => "under20",
        Some(a) if a < 40.0 => "20-39",
        Some(a) if a < 60.0 => "40-59",
        Some(_) => "over60",
    }
}

/// Debut-year bin: everything before 1980 pooled, then 5-year spans.
pub fn cohort_level(first_work_year: i32) -> String {
    if first_work_year < 1980 {
        "pre1980".into()
    } else {
        let start = 1980 + (first_work_year - 1980) / 5 * 5;
        format!("{start}-{}", start + 4)
    }
}

fn valid_cohort_label(level: &str) -> bool {
    if level == "pre1980" {
        return true;
    }
    let Some((a, b)) = level.split_once('-') else {
        return false;
    };
    match (a.parse::<i32>(), b.parse::<i32>()) {
        (Ok(start), Ok(end)) => start >= 1980 && (start - 1980) % 5 == 0 && end == start + 4,
        _ => false,
    }
}

const FACTOR_ATTRS: [&str; 4] = ["region", "age_group", "cohort", "prev_cross_region"];
const NUMERIC_ATTRS: [&str; 1] = ["prev_cooperation_count"];

fn known_attr(attr: &str) -> Result<()> {
    if FACTOR_ATTRS.contains(&attr) || NUMERIC_ATTRS.contains(&attr) {
        Ok(())
    } else {
        Err(Error::UnknownAttribute { name: attr.into() })
    }
}

fn validate_level(attr: &str, level: &str) -> Result<()> {
    let ok = match attr {
        "region" => level.parse::<Region>().is_ok(),
        "age_group" => ["under20", "20-39", "40-59", "over60", "unknown"].contains(&level),
        "cohort" => valid_cohort_label(level),
        "prev_cross_region" => level == "true" || level == "false",
        "prev_cooperation_count" => level.parse::<u32>().is_ok(),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::UnknownLevel {
            attr: attr.into(),
            level: level.into(),
        })
    }
}

/// Per-node level labels of a categorical (or categorizable) attribute.
pub fn attribute_levels(g: &CollabNetwork, attr: &str) -> Result<Vec<String>> {
    known_attr(attr)?;
    let midpoint = g.period().midpoint_year();
    Ok(g.node_ids()
        .map(|v| {
            let a = g.attributes(v);
            match attr {
                "region" => a.region.as_str().to_string(),
                "age_group" => {
                    age_group_level(a.birth_year.map(|b| midpoint - b as f64)).to_string()
                }
                "cohort" => cohort_level(a.first_work_year),
                "prev_cross_region" => a.prev_cross_region.to_string(),
                "prev_cooperation_count" => a.prev_cooperation_count.to_string(),
                _ => unreachable!("attribute validated above"),
            }
        })
        .collect())
}

/// Per-node numeric values; errors on categorical attributes.
pub fn attribute_numbers(g: &CollabNetwork, attr: &str) -> Result<Vec<f64>> {
    known_attr(attr)?;
    if !NUMERIC_ATTRS.contains(&attr) {
        return Err(Error::NonNumericAttribute { attr: attr.into() });
    }
    Ok(g.node_ids()
        .map(|v| g.attributes(v).prev_cooperation_count as f64)
        .collect())
}

/// Distinct observed levels of an attribute, sorted.
pub fn observed_levels(g: &CollabNetwork, attr: &str) -> Result<Vec<String>> {
    let mut levels: Vec<String> = attribute_levels(g, attr)?;
    levels.sort();
    levels.dedup();
    Ok(levels)
}

/// Expand a categorical attribute into one [`TermSpec::NodeFactor`] per
/// observed non-reference level, in sorted order.
///
/// When the requested reference is not observed, the first observed level
/// takes its place: dummies for every observed level would sum to twice the
/// edge count on each dyad and collide head-on with [`TermSpec::Edges`].
pub fn expand_factor(g: &CollabNetwork, attr: &str, reference: &str) -> Result<Vec<TermSpec>> {
    validate_level(attr, reference)?;
    let levels = observed_levels(g, attr)?;
    let reference = if levels.iter().any(|l| l == reference) {
        reference.to_string()
    } else {
        levels.first().cloned().unwrap_or_else(|| reference.to_string())
    };
    Ok(levels
        .into_iter()
        .filter(|level| *level != reference)
        .map(|level| TermSpec::NodeFactor {
            attr: attr.into(),
            level,
            reference: Some(reference.clone()),
        })
        .collect())
}

/// A term bound to one network's node roster, ready for O(1) evaluation.
pub(crate) enum CompiledTerm {
    Edges,
    /// 1.0 where the node carries the level.
    Indicator(Vec<f64>),
    Covariate(Vec<f64>),
    /// Level codes; a dyad matches when codes agree.
    Match(Vec<u32>),
}

pub(crate) struct Compiled {
    pub terms: Vec<CompiledTerm>,
    pub names: Vec<String>,
}

impl Compiled {
    pub fn k(&self) -> usize {
        self.terms.len()
    }

    /// Change statistics of dyad (i, j): how much each statistic moves when
    /// the dyad toggles on. State independent for every supported term.
    pub fn delta_into(&self, i: usize, j: usize, out: &mut [f64]) {
        for (slot, term) in out.iter_mut().zip(&self.terms) {
            *slot = match term {
                CompiledTerm::Edges => 1.0,
                CompiledTerm::Indicator(v) => v[i] + v[j],
                CompiledTerm::Covariate(x) => x[i] + x[j],
                CompiledTerm::Match(c) => f64::from(c[i] == c[j]),
            };
        }
    }

    pub fn delta(&self, i: usize, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.k()];
        self.delta_into(i, j, &mut out);
        out
    }
}

pub(crate) fn compile(g: &CollabNetwork, terms: &[TermSpec]) -> Result<Compiled> {
    if terms.is_empty() {
        return Err(Error::InvalidInput("term list must be nonempty".into()));
    }
    let mut compiled = Vec::with_capacity(terms.len());
    for term in terms {
        compiled.push(match term {
            TermSpec::Edges => CompiledTerm::Edges,
            TermSpec::NodeFactor { attr, level, .. } => {
                validate_level(attr, level)?;
                let labels = attribute_levels(g, attr)?;
                CompiledTerm::Indicator(
                    labels.iter().map(|l| f64::from(l == level)).collect(),
                )
            }
            TermSpec::NodeCov { attr } => CompiledTerm::Covariate(attribute_numbers(g, attr)?),
            TermSpec::NodeMatch { attr } => {
                let labels = attribute_levels(g, attr)?;
                let mut codes = BTreeMap::new();
                for l in &labels {
                    let next = codes.len() as u32;
                    codes.entry(l.clone()).or_insert(next);
                }
                CompiledTerm::Match(labels.iter().map(|l| codes[l]).collect())
            }
        });
    }
    Ok(Compiled {
        terms: compiled,
        names: terms.iter().map(TermSpec::name).collect(),
    })
}

/// The statistic vector g(y, X) of a network under a term list.
pub fn compute_statistics(g: &CollabNetwork, terms: &[TermSpec]) -> Result<Vec<f64>> {
    let compiled = compile(g, terms)?;
    let mut stats = vec![0.0; compiled.k()];
    let mut delta = vec![0.0; compiled.k()];
    for &(i, j) in g.edges() {
        compiled.delta_into(i as usize, j as usize, &mut delta);
        for (s, d) in stats.iter_mut().zip(&delta) {
            *s += *d;
        }
    }
    Ok(stats)
}

/// Change statistics for toggling dyad (i, j) on.
pub fn change_statistics(
    g: &CollabNetwork,
    terms: &[TermSpec],
    i: NodeId,
    j: NodeId,
) -> Result<Vec<f64>> {
    let n = g.node_count();
    if i == j || i.index() >= n || j.index() >= n {
        return Err(Error::InvalidInput(format!(
            "dyad ({i}, {j}) is not a pair of distinct nodes of an {n}-node network"
        )));
    }
    Ok(compile(g, terms)?.delta(i.index(), j.index()))
}

/// The dyadic regression view of a model: one row per unordered pair, in
/// lexicographic (i, j) order, with the change statistics as covariates and
/// edge presence as the response.
#[derive(Debug, Clone)]
pub struct Design {
    pub names: Vec<String>,
    pub pairs: Vec<(u32, u32)>,
    pub rows: Vec<Vec<f64>>,
    pub y: Vec<bool>,
}

pub fn build_design(g: &CollabNetwork, terms: &[TermSpec]) -> Result<Design> {
    build_design_capped(g, terms, DEFAULT_DYAD_CAP)
}

pub fn build_design_capped(g: &CollabNetwork, terms: &[TermSpec], cap: usize) -> Result<Design> {
    let n = g.node_count();
    let n_dyads = dyad_count(n);
    if n_dyads > cap {
        return Err(Error::DyadCapExceeded { n_dyads, cap });
    }
    let compiled = compile(g, terms)?;
    let mut pairs = Vec::with_capacity(n_dyads);
    let mut rows = Vec::with_capacity(n_dyads);
    let mut y = Vec::with_capacity(n_dyads);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i as u32, j as u32));
            rows.push(compiled.delta(i, j));
            y.push(g.has_edge(NodeId(i as u32), NodeId(j as u32)));
        }
    }
    Ok(Design {
        names: compiled.names,
        pairs,
        rows,
        y,
    })
}
