//! The four subcommands. Each one loads the dataset, walks the period
//! schedule, writes its outputs under the configured directory, and finishes
//! with a manifest describing the run.

use std::path::Path;
use std::time::Instant;

use collabnet::ergm::{self, ErgmFit};
use collabnet::graph::CollabNetwork;
use collabnet::ingest::{derive_attributes, project_with_attributes, PeriodAttributes};
use collabnet::null_model::cross_region_index;
use collabnet::report::{
    cross_coop_table, describe, export_coefficient_summary, export_cross_coop, export_index_svg,
    export_index_trend, export_period_summaries, PeriodSummary, SubgroupSpec,
};
use collabnet::{Dataset, Error, IndexResult, Result, SwapConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{default_terms, load_terms, RunConfig};

/// The coefficient every model run tracks across periods in its summary CSV.
const HEADLINE_TERM: &str = "nodematch.region";

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    versions: Versions,
    command: &'a str,
    config: &'a RunConfig,
    seed: u64,
    wall_time_ms: u64,
}

#[derive(Serialize)]
struct Versions {
    cli: &'static str,
    library: &'static str,
}

fn write_manifest(cfg: &RunConfig, started: Instant) -> Result<()> {
    let manifest = Manifest {
        tool: "collabnet",
        versions: Versions {
            cli: env!("CARGO_PKG_VERSION"),
            library: collabnet::VERSION,
        },
        command: &cfg.command,
        config: cfg,
        seed: cfg.seed,
        wall_time_ms: started.elapsed().as_millis() as u64,
    };
    let path = cfg.out.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::InvalidInput(format!("manifest serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|source| Error::FileWrite { path, source })
}

fn prepare(cfg: &RunConfig) -> Result<(Dataset, Vec<PeriodAttributes>)> {
    std::fs::create_dir_all(&cfg.out).map_err(|source| Error::FileWrite {
        path: cfg.out.clone(),
        source,
    })?;
    let ds = Dataset::load(&cfg.stars, &cfg.works, &cfg.cast)?;
    for warning in ds.warnings().lines() {
        eprintln!("warning: {warning}");
    }
    let attrs = derive_attributes(&ds, &cfg.schedule)?;
    Ok((ds, attrs))
}

fn period_network(
    ds: &Dataset,
    cfg: &RunConfig,
    attrs: &PeriodAttributes,
) -> Result<CollabNetwork> {
    project_with_attributes(ds, &attrs.period, &cfg.regions, attrs)
}

/// `describe`: one summary row per period; empty periods report zeros.
pub fn cmd_describe(cfg: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let (ds, attrs) = prepare(cfg)?;
    let rows = attrs
        .iter()
        .map(|a| {
            let g = period_network(&ds, cfg, a)?;
            if g.node_count() == 0 {
                Ok(PeriodSummary::empty(&a.period))
            } else {
                describe(&g)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    export_period_summaries(&rows, cfg.out.join("summary.csv"))?;
    write_manifest(cfg, started)
}

/// `index`: the observed-over-expected trend with its null band, as CSV and
/// as an SVG chart. Periods run in parallel; period k derives its randomness
/// from (seed + k), with one stream per replicate inside.
pub fn cmd_index(cfg: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let (ds, attrs) = prepare(cfg)?;
    let networks = attrs
        .iter()
        .map(|a| period_network(&ds, cfg, a))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<IndexResult> = networks
        .par_iter()
        .enumerate()
        .map(|(k, g)| {
            let swap = SwapConfig {
                swap_multiplier: cfg.swap_multiplier.unwrap_or(2.0),
                replicates: cfg.replicates.unwrap_or(100),
                seed: cfg.seed.wrapping_add(k as u64),
                ..SwapConfig::default()
            };
            cross_region_index(g, &swap)
        })
        .collect::<Result<Vec<_>>>()?;
    export_index_trend(&results, cfg.out.join("index_trend.csv"))?;
    let series_label = cfg
        .regions
        .iter()
        .map(|r| r.as_str())
        .collect::<Vec<_>>()
        .join("-");
    export_index_svg(&[(series_label, results)], cfg.out.join("index_trend.svg"))?;
    write_manifest(cfg, started)
}

fn fit_one(cfg: &RunConfig, g: &CollabNetwork, attrs: &PeriodAttributes) -> Result<ErgmFit> {
    if g.node_count() == 0 {
        return Err(Error::InvalidInput(format!(
            "period {} has no stars in the selected regions; narrow the schedule",
            attrs.period.label
        )));
    }
    let terms = match &cfg.terms_file {
        Some(path) => load_terms(path)?,
        None => default_terms(g, attrs.no_lag)?,
    };
    ergm::fit(g, &terms)
}

fn safe_file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// `ergm`: one fit per period, written as JSON under `fits/`, plus a CSV
/// tracking the regional homophily coefficient across periods.
pub fn cmd_ergm(cfg: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let (ds, attrs) = prepare(cfg)?;
    let fits_dir = cfg.out.join("fits");
    std::fs::create_dir_all(&fits_dir).map_err(|source| Error::FileWrite {
        path: fits_dir.clone(),
        source,
    })?;
    let mut fits = Vec::with_capacity(attrs.len());
    for a in &attrs {
        let g = period_network(&ds, cfg, a)?;
        let fit = fit_one(cfg, &g, a)?;
        write_fit(&fit, &fits_dir.join(format!("{}.json", safe_file_stem(&a.period.label))))?;
        fits.push(fit);
    }
    if fits.iter().all(|f| f.term_index(HEADLINE_TERM).is_some()) {
        export_coefficient_summary(&fits, HEADLINE_TERM, cfg.out.join("coefficients.csv"))?;
    } else {
        eprintln!("note: {HEADLINE_TERM} absent from the term list; skipping coefficients.csv");
    }
    write_manifest(cfg, started)
}

fn write_fit(fit: &ErgmFit, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(fit)
        .map_err(|e| Error::InvalidInput(format!("fit serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::FileWrite {
        path: path.to_path_buf(),
        source,
    })
}

/// `subgroups`: the per-period cross-cooperation means table, split by
/// fame and debut generation.
pub fn cmd_subgroups(cfg: &RunConfig) -> Result<()> {
    let started = Instant::now();
    if cfg.regions.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "subgroups compares exactly two regions, got {}",
            cfg.regions.len()
        )));
    }
    std::fs::create_dir_all(&cfg.out).map_err(|source| Error::FileWrite {
        path: cfg.out.clone(),
        source,
    })?;
    let ds = Dataset::load(&cfg.stars, &cfg.works, &cfg.cast)?;
    for warning in ds.warnings().lines() {
        eprintln!("warning: {warning}");
    }
    let spec = SubgroupSpec {
        fame_quantile: cfg.fame_quantile.unwrap_or(0.75),
        generation_cutoff: cfg.generation_cutoff.unwrap_or(1990),
    };
    let table = cross_coop_table(&ds, &cfg.schedule, cfg.regions[0], cfg.regions[1], &spec)?;
    export_cross_coop(&table, cfg.out.join("subgroups.csv"))?;
    write_manifest(cfg, started)
}
