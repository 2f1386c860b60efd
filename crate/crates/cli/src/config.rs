//! Resolved run configuration: everything a command needs, validated up
//! front and echoed verbatim into the output manifest.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use collabnet::ergm::{self, TermSpec};
use collabnet::graph::{CollabNetwork, PeriodSpec, Region};
use collabnet::{Error, Result};
use serde::Serialize;

/// The fully resolved configuration of one invocation. Serialized into the
/// manifest so a run can be reproduced from its output directory alone.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub stars: PathBuf,
    pub works: PathBuf,
    pub cast: PathBuf,
    pub regions: Vec<Region>,
    pub schedule: Vec<PeriodSpec>,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker-pool size is an execution detail, not an analysis parameter:
    /// results never depend on it, so it stays out of the config echo and
    /// output trees stay byte-identical across worker counts.
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_multiplier: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fame_quantile: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generation_cutoff: Option<i32>,
}

/// Parse a comma-separated region list such as `Mainland,HongKong`.
pub fn parse_regions(text: &str) -> Result<Vec<Region>> {
    let mut regions = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let region = Region::from_str(part)
            .map_err(|_| Error::InvalidInput(format!("unknown region {part:?} in --regions")))?;
        if regions.contains(&region) {
            return Err(Error::InvalidInput(format!(
                "region {region} listed twice in --regions"
            )));
        }
        regions.push(region);
    }
    if regions.len() < 2 {
        return Err(Error::InvalidInput(
            "--regions needs at least two comma-separated regions".into(),
        ));
    }
    Ok(regions)
}

/// The default analysis range for a command: (first year, last year, window).
pub struct ScheduleDefaults {
    pub from: i32,
    pub to: i32,
    pub window: i32,
}

/// Four-year periods over 1990-2009, the model-fitting default.
pub const FOUR_YEAR_PERIODS: ScheduleDefaults = ScheduleDefaults {
    from: 1990,
    to: 2009,
    window: 4,
};

/// One-year windows over 1990-2014, the trend default.
pub const YEARLY_WINDOWS: ScheduleDefaults = ScheduleDefaults {
    from: 1990,
    to: 2014,
    window: 1,
};

/// Build the period schedule from an explicit JSON list or from
/// from/to/window, falling back to the command's defaults. The final window
/// is truncated at the range end when the range does not divide evenly.
pub fn resolve_schedule(
    periods_file: Option<&Path>,
    from: Option<i32>,
    to: Option<i32>,
    window: Option<i32>,
    defaults: &ScheduleDefaults,
) -> Result<Vec<PeriodSpec>> {
    if let Some(path) = periods_file {
        let text = std::fs::read_to_string(path).map_err(|source| Error::FileOpen {
            path: path.to_path_buf(),
            source,
        })?;
        let schedule: Vec<PeriodSpec> = serde_json::from_str(&text).map_err(|e| {
            Error::InvalidInput(format!("{}: not a valid period list: {e}", path.display()))
        })?;
        if schedule.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{}: period list is empty",
                path.display()
            )));
        }
        return Ok(schedule);
    }

    let from = from.unwrap_or(defaults.from);
    let to = to.unwrap_or(defaults.to);
    let window = window.unwrap_or(defaults.window);
    if window < 1 {
        return Err(Error::InvalidInput(format!(
            "--window must be at least 1, got {window}"
        )));
    }
    if from > to {
        return Err(Error::InvalidInput(format!(
            "--from {from} is after --to {to}"
        )));
    }
    let mut schedule = Vec::new();
    let mut start = from;
    while start <= to {
        let end = (start + window - 1).min(to);
        let label = if start == end {
            start.to_string()
        } else {
            format!("{start}-{end}")
        };
        schedule.push(PeriodSpec::new(label, start, end)?);
        start = end + 1;
    }
    Ok(schedule)
}

/// Read an explicit term list from a JSON file.
pub fn load_terms(path: &Path) -> Result<Vec<TermSpec>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::FileOpen {
        path: path.to_path_buf(),
        source,
    })?;
    let terms: Vec<TermSpec> = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidInput(format!("{}: not a valid term list: {e}", path.display()))
    })?;
    if terms.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: term list is empty",
            path.display()
        )));
    }
    Ok(terms)
}

/// The standard model for one period: an edge intercept, dummies for age
/// group, debut cohort and region (Mainland as reference), the lagged
/// cooperation terms, and regional homophily. Factor dummies cover only the
/// levels observed in the network, and the lagged terms are dropped for a
/// schedule's first period, where no lag exists and the columns would be
/// identically zero.
pub fn default_terms(g: &CollabNetwork, no_lag: bool) -> Result<Vec<TermSpec>> {
    let mut terms = vec![TermSpec::Edges];
    terms.extend(ergm::expand_factor(g, "age_group", "under20")?);
    terms.extend(ergm::expand_factor(g, "cohort", "pre1980")?);
    terms.extend(ergm::expand_factor(g, "region", "Mainland")?);
    if !no_lag {
        terms.push(TermSpec::node_cov("prev_cooperation_count"));
        terms.extend(ergm::expand_factor(g, "prev_cross_region", "false")?);
    }
    terms.push(TermSpec::node_match("region"));
    Ok(terms)
}
