//! Descriptive outputs: period summaries, subgroup cross-cooperation tables
//! and the CSV/SVG exporters behind the command-line reports.
//!
//! Numbers are written with Rust's shortest round-trip float formatting, so
//! parsing an exported file reproduces the in-memory values exactly.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ergm::ErgmFit;
use crate::graph::{CollabNetwork, PeriodSpec, Region};
use crate::ingest::{derive_attributes, project_with_attributes, Dataset};
use crate::null_model::{quantile, IndexResult};

/// Table-style description of one period's network.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSummary {
    pub label: String,
    pub start_year: i32,
    pub end_year: i32,
    pub node_count: usize,
    pub edge_count: usize,
    pub average_degree: f64,
    pub average_clustering: f64,
    /// Percentage of nodes per region, in [`Region::ALL`] order.
    pub shares: [f64; 4],
}

impl PeriodSummary {
    /// The all-zero row an empty period reports.
    pub fn empty(period: &PeriodSpec) -> Self {
        PeriodSummary {
            label: period.label.clone(),
            start_year: period.start_year,
            end_year: period.end_year,
            node_count: 0,
            edge_count: 0,
            average_degree: 0.0,
            average_clustering: 0.0,
            shares: [0.0; 4],
        }
    }
}

/// Summarize a nonempty network.
pub fn describe(g: &CollabNetwork) -> Result<PeriodSummary> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidGraph("cannot describe an empty network".into()));
    }
    let mut shares = [0.0; 4];
    for v in g.node_ids() {
        let idx = Region::ALL
            .iter()
            .position(|&r| r == g.attributes(v).region)
            .expect("region is one of the four");
        shares[idx] += 1.0;
    }
    for s in &mut shares {
        *s = *s * 100.0 / n as f64;
    }
    let period = g.period();
    Ok(PeriodSummary {
        label: period.label.clone(),
        start_year: period.start_year,
        end_year: period.end_year,
        node_count: n,
        edge_count: g.edge_count(),
        average_degree: g.average_degree()?,
        average_clustering: g.average_clustering()?,
        shares,
    })
}

/// How the subgroup columns are carved out of each period.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupSpec {
    /// A star is "famous" when its lagged cooperation count reaches this
    /// quantile within its own region and period.
    pub fame_quantile: f64,
    /// Debut before this year makes a star "older generation".
    pub generation_cutoff: i32,
}

impl Default for SubgroupSpec {
    fn default() -> Self {
        SubgroupSpec {
            fame_quantile: 0.75,
            generation_cutoff: 1990,
        }
    }
}

impl SubgroupSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fame_quantile) {
            return Err(Error::InvalidInput(format!(
                "fame quantile {} outside [0, 1]",
                self.fame_quantile
            )));
        }
        Ok(())
    }
}

/// Subgroup columns of the cross-cooperation table, in output order.
pub const SUBGROUPS: [&str; 4] = ["all", "famous", "older", "newer"];

/// One side of one subgroup cell: total weighted cross-region cooperation
/// and the number of stars it is averaged over.
///
/// Means are derived, never stored, so identities over the integer sums
/// (e.g. both sides of a period sharing one total) hold exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub sum: u64,
    pub count: u32,
}

impl Cell {
    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }
}

/// Cells of one period: `cells[subgroup][side]`, `None` rendered blank.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCoopRow {
    pub period: String,
    pub cells: [[Option<Cell>; 2]; 4],
}

/// Per-period mean cross-region cooperation for both sides of a region
/// pair, overall and within subgroups.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCoopTable {
    pub region_pair: (Region, Region),
    pub rows: Vec<CrossCoopRow>,
}

impl CrossCoopTable {
    /// Pooled cells over all periods: the weighted mean of the period rows.
    pub fn totals(&self) -> [[Option<Cell>; 2]; 4] {
        let mut out = [[None; 2]; 4];
        for row in &self.rows {
            for (sg, sides) in row.cells.iter().enumerate() {
                for (side, cell) in sides.iter().enumerate() {
                    if let Some(c) = cell {
                        let slot = out[sg][side].get_or_insert(Cell { sum: 0, count: 0 });
                        slot.sum += c.sum;
                        slot.count += c.count;
                    }
                }
            }
        }
        out
    }
}

/// Build the cross-cooperation table for a region pair over a schedule.
///
/// Cell (side, period) averages the weighted boundary-crossing cooperation
/// of that side's stars over every star of the side present in the period;
/// subgroup columns restrict the star set first. Blank cells mean the cell
/// is undefined: a region absent from the period, an empty subgroup, or
/// fame in the first period, where no lagged popularity exists yet.
pub fn cross_coop_table(
    ds: &Dataset,
    schedule: &[PeriodSpec],
    r1: Region,
    r2: Region,
    spec: &SubgroupSpec,
) -> Result<CrossCoopTable> {
    spec.validate()?;
    if r1 == r2 {
        return Err(Error::InvalidInput(format!(
            "region pair needs two distinct regions, got {r1} twice"
        )));
    }
    let attrs = derive_attributes(ds, schedule)?;
    let mut rows = Vec::with_capacity(schedule.len());
    for (period, lag) in schedule.iter().zip(&attrs) {
        let g = project_with_attributes(ds, period, &[r1, r2], lag)?;
        let n = g.node_count();

        // Weighted cross-region cooperation per node.
        let mut cross = vec![0u64; n];
        for (e, &(i, j)) in g.edges().iter().enumerate() {
            let (i, j) = (i as usize, j as usize);
            if g.attributes(crate::graph::NodeId(i as u32)).region
                != g.attributes(crate::graph::NodeId(j as u32)).region
            {
                let w = g.edge_weight(e) as u64;
                cross[i] += w;
                cross[j] += w;
            }
        }
        let side_of: Vec<usize> = g
            .node_ids()
            .map(|v| usize::from(g.attributes(v).region == r2))
            .collect();
        let side_count = [
            side_of.iter().filter(|&&s| s == 0).count(),
            side_of.iter().filter(|&&s| s == 1).count(),
        ];

        let mut cells = [[None; 2]; 4];
        if side_count[0] > 0 && side_count[1] > 0 {
            // Fame thresholds per side, undefined in the first period.
            let fame_threshold: Option<[f64; 2]> = (!lag.no_lag).then(|| {
                let threshold_for = |side: usize| {
                    let counts: Vec<f64> = g
                        .node_ids()
                        .filter(|v| side_of[v.index()] == side)
                        .map(|v| g.attributes(v).prev_cooperation_count as f64)
                        .collect();
                    quantile(&counts, spec.fame_quantile)
                };
                [threshold_for(0), threshold_for(1)]
            });

            for (sg, name) in SUBGROUPS.iter().enumerate() {
                for side in 0..2 {
                    let mut cell = Cell { sum: 0, count: 0 };
                    let mut defined = true;
                    for v in g.node_ids() {
                        if side_of[v.index()] != side {
                            continue;
                        }
                        let a = g.attributes(v);
                        let member = match *name {
                            "all" => true,
                            "famous" => match fame_threshold {
                                Some(t) => a.prev_cooperation_count as f64 >= t[side],
                                None => {
                                    defined = false;
                                    false
                                }
                            },
                            "older" => a.first_work_year < spec.generation_cutoff,
                            "newer" => a.first_work_year >= spec.generation_cutoff,
                            _ => unreachable!(),
                        };
                        if member {
                            cell.sum += cross[v.index()];
                            cell.count += 1;
                        }
                    }
                    if defined && cell.count > 0 {
                        cells[sg][side] = Some(cell);
                    }
                }
            }
        }
        rows.push(CrossCoopRow {
            period: period.label.clone(),
            cells,
        });
    }
    Ok(CrossCoopTable {
        region_pair: (r1, r2),
        rows,
    })
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|source| Error::FileWrite {
        path: path.to_path_buf(),
        source,
    })
}

fn write_failed(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::FileWrite {
        path: path.to_path_buf(),
        source,
    }
}

/// Write period summaries as CSV, one row per period.
pub fn export_period_summaries(rows: &[PeriodSummary], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let mut header = String::from("period,start_year,end_year,nodes,edges,avg_degree,avg_clustering");
    for region in Region::ALL {
        header.push_str(&format!(",share_{region}"));
    }
    writeln!(out, "{header}").map_err(write_failed(path))?;
    for r in rows {
        let mut line = format!(
            "{},{},{},{},{},{},{}",
            r.label,
            r.start_year,
            r.end_year,
            r.node_count,
            r.edge_count,
            r.average_degree,
            r.average_clustering
        );
        for s in r.shares {
            line.push_str(&format!(",{s}"));
        }
        writeln!(out, "{line}").map_err(write_failed(path))?;
    }
    Ok(())
}

/// Write the index trend as CSV: period,observed,expected,ratio,ci_low,ci_high.
pub fn export_index_trend(results: &[IndexResult], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    writeln!(out, "period,observed,expected,ratio,ci_low,ci_high").map_err(write_failed(path))?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.period, r.observed, r.expected, r.ratio, r.ci_low, r.ci_high
        )
        .map_err(write_failed(path))?;
    }
    Ok(())
}

/// Write the subgroup table as CSV with blank cells for undefined entries
/// and a pooled `total` row.
pub fn export_cross_coop(table: &CrossCoopTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let (r1, r2) = table.region_pair;
    let mut header = String::from("period");
    for sg in SUBGROUPS {
        header.push_str(&format!(",{sg}_{r1},{sg}_{r2}"));
    }
    writeln!(out, "{header}").map_err(write_failed(path))?;
    let cells_line = |period: &str, cells: &[[Option<Cell>; 2]; 4]| {
        let mut line = period.to_string();
        for sides in cells {
            for cell in sides {
                match cell {
                    Some(c) => line.push_str(&format!(",{}", c.mean())),
                    None => line.push(','),
                }
            }
        }
        line
    };
    for row in &table.rows {
        writeln!(out, "{}", cells_line(&row.period, &row.cells)).map_err(write_failed(path))?;
    }
    writeln!(out, "{}", cells_line("total", &table.totals())).map_err(write_failed(path))?;
    Ok(())
}

/// Write one term's coefficient across fits: period,coefficient,se.
///
/// Every fit must contain the term; the error names the first period that
/// does not.
pub fn export_coefficient_summary(
    fits: &[ErgmFit],
    term: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut lines = Vec::with_capacity(fits.len());
    for fit in fits {
        let idx = fit.term_index(term).ok_or_else(|| Error::MissingTerm {
            term: term.to_string(),
            period: fit.period.clone(),
        })?;
        lines.push(format!("{},{},{}", fit.period, fit.theta[idx], fit.se[idx]));
    }
    let path = path.as_ref();
    let mut out = create(path)?;
    writeln!(out, "period,coefficient,se").map_err(write_failed(path))?;
    for line in lines {
        writeln!(out, "{line}").map_err(write_failed(path))?;
    }
    Ok(())
}

/// One plotted series: a name and its per-period results.
pub type IndexSeries = (String, Vec<IndexResult>);

const SERIES_COLORS: [&str; 4] = ["#1f6fb2", "#c2452d", "#3a8f5d", "#8455a5"];
const PLOT_LEFT: f64 = 70.0;
const PLOT_RIGHT: f64 = 690.0;
const PLOT_TOP: f64 = 30.0;
const PLOT_BOTTOM: f64 = 400.0;

/// Render index trends as a static SVG line chart, one polyline per series.
///
/// The y axis spans [0, max ratio x 1.1] with five labeled ticks; a dashed
/// guide marks the neutral ratio 1 when it is in range.
pub fn export_index_svg(series: &[IndexSeries], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let max_ratio = series
        .iter()
        .flat_map(|(_, rs)| rs.iter().map(|r| r.ratio))
        .fold(0.0f64, f64::max);
    let y_max = if max_ratio > 0.0 { max_ratio * 1.1 } else { 1.0 };
    let longest = series.iter().map(|(_, rs)| rs.len()).max().unwrap_or(0);

    let x_of = |idx: usize| {
        if longest <= 1 {
            (PLOT_LEFT + PLOT_RIGHT) / 2.0
        } else {
            PLOT_LEFT + (PLOT_RIGHT - PLOT_LEFT) * idx as f64 / (longest - 1) as f64
        }
    };
    let y_of = |v: f64| PLOT_BOTTOM - (PLOT_BOTTOM - PLOT_TOP) * v / y_max;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"440\" viewBox=\"0 0 720 440\" font-family=\"sans-serif\" font-size=\"11\">\n",
    );
    svg.push_str("<rect x=\"0\" y=\"0\" width=\"720\" height=\"440\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<line x1=\"{PLOT_LEFT}\" y1=\"{PLOT_BOTTOM}\" x2=\"{PLOT_RIGHT}\" y2=\"{PLOT_BOTTOM}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{PLOT_LEFT}\" y1=\"{PLOT_TOP}\" x2=\"{PLOT_LEFT}\" y2=\"{PLOT_BOTTOM}\" stroke=\"black\"/>\n"
    ));

    for tick in 0..=4 {
        let v = y_max * tick as f64 / 4.0;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{PLOT_LEFT}\" y2=\"{y}\" stroke=\"black\"/>\n",
            PLOT_LEFT - 5.0
        ));
        svg.push_str(&format!(
            "<text class=\"y-tick\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{v}</text>\n",
            PLOT_LEFT - 8.0,
            y + 4.0
        ));
    }

    if let Some((_, longest_series)) = series.iter().max_by_key(|(_, rs)| rs.len()) {
        for (idx, r) in longest_series.iter().enumerate() {
            // Thin labels out when the axis gets crowded.
            let stride = (longest / 16).max(1);
            if idx % stride == 0 {
                svg.push_str(&format!(
                    "<text class=\"x-tick\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                    x_of(idx),
                    PLOT_BOTTOM + 16.0,
                    r.period
                ));
            }
        }
    }

    if y_max >= 1.0 {
        svg.push_str(&format!(
            "<line x1=\"{PLOT_LEFT}\" y1=\"{0}\" x2=\"{PLOT_RIGHT}\" y2=\"{0}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n",
            y_of(1.0)
        ));
    }

    for (s, (name, results)) in series.iter().enumerate() {
        let color = SERIES_COLORS[s % SERIES_COLORS.len()];
        let points: Vec<String> = results
            .iter()
            .enumerate()
            .map(|(idx, r)| format!("{},{}", x_of(idx), y_of(r.ratio)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "<text class=\"legend\" x=\"{}\" y=\"{}\" fill=\"{color}\">{name}</text>\n",
            PLOT_LEFT + 10.0,
            PLOT_TOP + 14.0 * s as f64
        ));
    }
    svg.push_str("</svg>\n");

    let mut out = create(path)?;
    out.write_all(svg.as_bytes()).map_err(write_failed(path))?;
    Ok(())
}
