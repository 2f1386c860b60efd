//! Exact maximum-likelihood estimation for dyad-independent models.
//!
//! With dyad-independent terms the model likelihood factorizes over dyads:
//! each unordered pair (i, j) is an independent Bernoulli observation with
//! log-odds θ·δ(i, j), so the MLE is a logistic regression of edge presence
//! on the change statistics, solved here by Newton iteration with step
//! halving. No design matrix is materialized; every pass streams over dyads.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compile, dyad_count, Compiled, TermSpec, DEFAULT_DYAD_CAP};
use crate::error::{Error, Result};
use crate::graph::CollabNetwork;

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Converged when the score (gradient) drops below this in max norm.
    pub score_tolerance: f64,
    /// ... or when the relative log-likelihood improvement drops below this.
    pub ll_tolerance: f64,
    pub dyad_cap: usize,
    /// A coefficient wandering past this magnitude is treated as divergence
    /// to infinity, i.e. separation.
    pub theta_bound: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 50,
            score_tolerance: 1e-8,
            ll_tolerance: 1e-10,
            dyad_cap: DEFAULT_DYAD_CAP,
            theta_bound: 30.0,
        }
    }
}

/// A fitted model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErgmFit {
    pub period: String,
    /// Canonical coefficient names, aligned with `theta` and `se`.
    pub terms: Vec<String>,
    pub theta: Vec<f64>,
    pub se: Vec<f64>,
    /// Number of parameters.
    pub k: usize,
    pub n_dyads: usize,
    pub n_edges: usize,
    pub log_likelihood: f64,
    /// Deviance of the all-zero model, where every dyad has probability 1/2.
    pub null_deviance: f64,
    pub residual_deviance: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl ErgmFit {
    /// Index of a coefficient by canonical name.
    pub fn term_index(&self, name: &str) -> Option<usize> {
        self.terms.iter().position(|t| t == name)
    }
}

fn ln_1p_exp(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Per-row accumulation state: log-likelihood, score and (optionally) the
/// negative Hessian, all summed over the dyads (i, j) for one fixed i.
struct Partial {
    ll: f64,
    score: DVector<f64>,
    info: Option<DMatrix<f64>>,
}

/// One streaming pass over all dyads at a fixed θ.
///
/// Rows are processed in parallel but combined in node order, so the result
/// is bitwise identical no matter how many threads run.
fn accumulate(
    g: &CollabNetwork,
    compiled: &Compiled,
    theta: &DVector<f64>,
    with_info: bool,
) -> (f64, DVector<f64>, Option<DMatrix<f64>>) {
    let n = g.node_count();
    let k = compiled.k();
    let partials: Vec<Partial> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut delta = vec![0.0; k];
            let mut ll = 0.0;
            let mut score = DVector::zeros(k);
            let mut info = with_info.then(|| DMatrix::zeros(k, k));
            // Neighbors are sorted, so a cursor over those above i turns the
            // edge test into a constant-time comparison.
            let above = {
                let nb = g.neighbors(crate::graph::NodeId(i as u32));
                let start = nb.partition_point(|&v| v as usize <= i);
                &nb[start..]
            };
            let mut cursor = 0;
            for j in (i + 1)..n {
                let y = if cursor < above.len() && above[cursor] as usize == j {
                    cursor += 1;
                    1.0
                } else {
                    0.0
                };
                compiled.delta_into(i, j, &mut delta);
                let eta: f64 = delta.iter().zip(theta.iter()).map(|(d, t)| d * t).sum();
                ll += y * eta - ln_1p_exp(eta);
                let p = sigmoid(eta);
                let r = y - p;
                for (a, &d) in delta.iter().enumerate() {
                    score[a] += r * d;
                }
                if let Some(m) = info.as_mut() {
                    let w = p * (1.0 - p);
                    for a in 0..k {
                        let wa = w * delta[a];
                        for b in a..k {
                            m[(a, b)] += wa * delta[b];
                        }
                    }
                }
            }
            Partial { ll, score, info }
        })
        .collect();

    let mut ll = 0.0;
    let mut score = DVector::zeros(k);
    let mut info = with_info.then(|| DMatrix::zeros(k, k));
    for p in partials {
        ll += p.ll;
        score += p.score;
        if let (Some(total), Some(part)) = (info.as_mut(), p.info) {
            *total += part;
        }
    }
    if let Some(m) = info.as_mut() {
        for a in 0..m.nrows() {
            for b in 0..a {
                m[(a, b)] = m[(b, a)];
            }
        }
    }
    (ll, score, info)
}

/// Log-likelihood and score of a model at an arbitrary θ.
pub fn log_likelihood_and_score(
    g: &CollabNetwork,
    terms: &[TermSpec],
    theta: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let compiled = compile(g, terms)?;
    if theta.len() != compiled.k() {
        return Err(Error::InvalidInput(format!(
            "theta has {} entries for {} terms",
            theta.len(),
            compiled.k()
        )));
    }
    let theta = DVector::from_column_slice(theta);
    let (ll, score, _) = accumulate(g, &compiled, &theta, false);
    Ok((ll, score.iter().copied().collect()))
}

/// Columns whose coefficients cannot be identified, located through the
/// near-null eigenvectors of the Gram matrix of change statistics.
fn collinear_terms(gram: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let eig = gram.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let tol = max_ev.max(1.0) * 1e-9;
    let mut involved = vec![false; names.len()];
    for (idx, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev <= tol {
            let v = eig.eigenvectors.column(idx);
            for (a, &c) in v.iter().enumerate() {
                if c.abs() > 1e-4 {
                    involved[a] = true;
                }
            }
        }
    }
    names
        .iter()
        .zip(&involved)
        .filter(|(_, &hit)| hit)
        .map(|(n, _)| n.clone())
        .collect()
}

/// Pre-fit diagnostics: a Gram/rank scan and a per-column separation scan,
/// each one streaming pass over the dyads.
fn prefit_checks(g: &CollabNetwork, compiled: &Compiled) -> Result<()> {
    let n = g.node_count();
    let k = compiled.k();
    struct Scan {
        gram: DMatrix<f64>,
        edge_range: Vec<(f64, f64)>,
        gap_range: Vec<(f64, f64)>,
    }
    let scans: Vec<Scan> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut delta = vec![0.0; k];
            let mut scan = Scan {
                gram: DMatrix::zeros(k, k),
                edge_range: vec![(f64::INFINITY, f64::NEG_INFINITY); k],
                gap_range: vec![(f64::INFINITY, f64::NEG_INFINITY); k],
            };
            let above = {
                let nb = g.neighbors(crate::graph::NodeId(i as u32));
                let start = nb.partition_point(|&v| v as usize <= i);
                &nb[start..]
            };
            let mut cursor = 0;
            for j in (i + 1)..n {
                let y = cursor < above.len() && above[cursor] as usize == j;
                if y {
                    cursor += 1;
                }
                compiled.delta_into(i, j, &mut delta);
                for a in 0..k {
                    for b in a..k {
                        scan.gram[(a, b)] += delta[a] * delta[b];
                    }
                    let range = if y {
                        &mut scan.edge_range[a]
                    } else {
                        &mut scan.gap_range[a]
                    };
                    range.0 = range.0.min(delta[a]);
                    range.1 = range.1.max(delta[a]);
                }
            }
            scan
        })
        .collect();

    let mut gram = DMatrix::zeros(k, k);
    let mut edge_range = vec![(f64::INFINITY, f64::NEG_INFINITY); k];
    let mut gap_range = vec![(f64::INFINITY, f64::NEG_INFINITY); k];
    for s in scans {
        gram += s.gram;
        for a in 0..k {
            edge_range[a].0 = edge_range[a].0.min(s.edge_range[a].0);
            edge_range[a].1 = edge_range[a].1.max(s.edge_range[a].1);
            gap_range[a].0 = gap_range[a].0.min(s.gap_range[a].0);
            gap_range[a].1 = gap_range[a].1.max(s.gap_range[a].1);
        }
    }
    for a in 0..k {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }

    let collinear = collinear_terms(&gram, &compiled.names);
    if !collinear.is_empty() {
        return Err(Error::RankDeficient { terms: collinear });
    }
    for a in 0..k {
        let (e_min, e_max) = edge_range[a];
        let (g_min, g_max) = gap_range[a];
        if e_min > g_max || g_min > e_max {
            return Err(Error::Separation {
                term: compiled.names[a].clone(),
            });
        }
    }
    Ok(())
}

/// Fit a model by exact MLE with default options.
pub fn fit(g: &CollabNetwork, terms: &[TermSpec]) -> Result<ErgmFit> {
    fit_with_options(g, terms, &FitOptions::default())
}

pub fn fit_with_options(
    g: &CollabNetwork,
    terms: &[TermSpec],
    options: &FitOptions,
) -> Result<ErgmFit> {
    let n = g.node_count();
    let n_dyads = dyad_count(n);
    if n_dyads == 0 {
        return Err(Error::InvalidGraph(
            "a model needs at least two nodes".into(),
        ));
    }
    if n_dyads > options.dyad_cap {
        return Err(Error::DyadCapExceeded {
            n_dyads,
            cap: options.dyad_cap,
        });
    }
    let compiled = compile(g, terms)?;
    let k = compiled.k();
    let n_edges = g.edge_count();
    if n_edges == 0 || n_edges == n_dyads {
        // The intercept walks off to ±infinity on an empty or complete graph.
        return Err(Error::Separation {
            term: "edges".into(),
        });
    }
    prefit_checks(g, &compiled)?;

    let mut theta = DVector::zeros(k);
    let mut converged = false;
    let mut iterations = 0;
    let (mut ll, mut score, mut info) = {
        let (ll, s, i) = accumulate(g, &compiled, &theta, true);
        (ll, s, i.expect("info requested"))
    };

    while iterations < options.max_iterations {
        iterations += 1;
        if score.amax() < options.score_tolerance {
            converged = true;
            break;
        }
        let step = match Cholesky::new(info.clone()) {
            Some(chol) => chol.solve(&score),
            None => info
                .clone()
                .lu()
                .solve(&score)
                .ok_or_else(|| Error::RankDeficient {
                    terms: collinear_terms(&info, &compiled.names),
                })?,
        };

        let mut scale = 1.0;
        let mut halvings = 0;
        let (new_theta, new_ll, new_score, new_info) = loop {
            let candidate = &theta + &step * scale;
            let (cll, cscore, cinfo) = accumulate(g, &compiled, &candidate, true);
            if cll.is_finite() && cll >= ll - 1e-12 {
                break (candidate, cll, cscore, cinfo.expect("info requested"));
            }
            halvings += 1;
            if halvings > 30 {
                break (candidate, cll, cscore, cinfo.expect("info requested"));
            }
            scale *= 0.5;
        };

        if let Some(worst) = new_theta.iter().map(|t| t.abs()).enumerate().fold(
            None::<(usize, f64)>,
            |acc, (idx, a)| match acc {
                Some((_, best)) if best >= a => acc,
                _ => Some((idx, a)),
            },
        ) {
            if worst.1 > options.theta_bound {
                return Err(Error::Separation {
                    term: compiled.names[worst.0].clone(),
                });
            }
        }

        let improvement = (new_ll - ll).abs();
        let done = improvement < options.ll_tolerance * (ll.abs() + options.ll_tolerance);
        theta = new_theta;
        ll = new_ll;
        score = new_score;
        info = new_info;
        if done {
            converged = converged || score.amax() < options.score_tolerance.max(1e-6);
            break;
        }
    }
    if score.amax() < options.score_tolerance {
        converged = true;
    }

    let covariance = Cholesky::new(info.clone())
        .map(|c| c.inverse())
        .or_else(|| info.clone().try_inverse())
        .ok_or_else(|| Error::RankDeficient {
            terms: collinear_terms(&info, &compiled.names),
        })?;
    let se: Vec<f64> = (0..k).map(|a| covariance[(a, a)].sqrt()).collect();

    let residual_deviance = -2.0 * ll;
    let null_deviance = 2.0 * std::f64::consts::LN_2 * n_dyads as f64;
    let kf = k as f64;
    Ok(ErgmFit {
        period: g.period().label.clone(),
        terms: compiled.names,
        theta: theta.iter().copied().collect(),
        se,
        k,
        n_dyads,
        n_edges,
        log_likelihood: ll,
        null_deviance,
        residual_deviance,
        aic: residual_deviance + 2.0 * kf,
        bic: residual_deviance + kf * (n_dyads as f64).ln(),
        converged,
        iterations,
    })
}
