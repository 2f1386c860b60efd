//! Dataset loading, period windowing and bipartite projection.
//!
//! Raw data arrives as three CSV files (stars, works, cast) described in the
//! README. Loading validates referential integrity, then [`project`] collapses
//! the star-work participation relation into a per-period co-starring network
//! and [`derive_attributes`] computes the one-period-lagged popularity and
//! cross-region-experience variables.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{CollabNetwork, NodeAttributes, PeriodSpec, Region};

/// A star as loaded from `stars.csv`.
#[derive(Debug, Clone)]
pub struct StarRecord {
    pub star_id: String,
    pub name: String,
    pub region: Region,
    pub birth_year: Option<i32>,
    /// From the file if given, otherwise recomputed as the earliest work year.
    pub first_work_year: Option<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkKind {
    Movie,
    Tv,
}

impl WorkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkKind::Movie => "movie",
            WorkKind::Tv => "tv",
        }
    }
}

/// A film or TV drama as loaded from `works.csv`.
#[derive(Debug, Clone)]
pub struct WorkRecord {
    pub work_id: String,
    pub title: String,
    pub year: i32,
    pub kind: WorkKind,
}

/// One attribution row from `cast.csv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CastRecord {
    pub work_id: String,
    pub star_id: String,
}

/// Non-fatal issues encountered while loading.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadWarnings {
    pub duplicate_cast_rows: usize,
    /// Stars whose recorded birth year is not before their first work year;
    /// the birth year is dropped for these.
    pub inconsistent_birth_years: usize,
    /// Works whose cast list exceeded the size cap; their attributions are
    /// discarded as crawl noise.
    pub oversized_works: usize,
}

impl LoadWarnings {
    pub fn total(&self) -> usize {
        self.duplicate_cast_rows + self.inconsistent_birth_years + self.oversized_works
    }

    /// Human-readable description of each nonzero counter.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.duplicate_cast_rows > 0 {
            out.push(format!(
                "{} duplicate cast row(s) collapsed",
                self.duplicate_cast_rows
            ));
        }
        if self.inconsistent_birth_years > 0 {
            out.push(format!(
                "{} star(s) with a birth year at or after their first work; birth year dropped",
                self.inconsistent_birth_years
            ));
        }
        if self.oversized_works > 0 {
            out.push(format!(
                "{} work(s) with oversized cast lists excluded",
                self.oversized_works
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Works with more cast members than this are treated as malformed.
    pub max_cast_size: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { max_cast_size: 200 }
    }
}

/// How lagged popularity counts cooperation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PopularityMeasure {
    /// Sum of incident edge weights: every shared work counts.
    #[default]
    Events,
    /// Number of distinct co-stars.
    Partners,
}

/// The validated, referentially closed dataset.
#[derive(Debug)]
pub struct Dataset {
    stars: Vec<StarRecord>,
    works: Vec<WorkRecord>,
    /// Per work: indices of attributed stars, sorted, deduplicated.
    work_cast: Vec<Vec<u32>>,
    /// Per star: indices of attributed works, sorted.
    star_works: Vec<Vec<u32>>,
    star_index: HashMap<String, u32>,
    /// Resolved first work year per star (file value, else earliest work).
    first_year: Vec<Option<i32>>,
    warnings: LoadWarnings,
}

impl Dataset {
    /// Load and validate the three input files with default options.
    pub fn load(
        stars_path: impl AsRef<Path>,
        works_path: impl AsRef<Path>,
        cast_path: impl AsRef<Path>,
    ) -> Result<Self> {
        Self::load_with(stars_path, works_path, cast_path, &LoadOptions::default())
    }

    pub fn load_with(
        stars_path: impl AsRef<Path>,
        works_path: impl AsRef<Path>,
        cast_path: impl AsRef<Path>,
        options: &LoadOptions,
    ) -> Result<Self> {
        let stars = read_stars(stars_path.as_ref())?;
        let works = read_works(works_path.as_ref())?;

        let mut star_index = HashMap::new();
        for (i, s) in stars.iter().enumerate() {
            star_index.insert(s.star_id.clone(), i as u32);
        }
        let mut work_index = HashMap::new();
        for (i, w) in works.iter().enumerate() {
            work_index.insert(w.work_id.clone(), i as u32);
        }

        let mut warnings = LoadWarnings::default();
        let mut work_cast: Vec<Vec<u32>> = vec![Vec::new(); works.len()];
        let mut seen: HashSet<(u32, u32)> = HashSet::new();
        for (row, line) in read_cast(cast_path.as_ref())? {
            let path = cast_path.as_ref().to_path_buf();
            let &wi = work_index.get(&row.work_id).ok_or_else(|| Error::DanglingKey {
                path: path.clone(),
                line,
                kind: "work_id",
                key: row.work_id.clone(),
            })?;
            let &si = star_index.get(&row.star_id).ok_or_else(|| Error::DanglingKey {
                path,
                line,
                kind: "star_id",
                key: row.star_id.clone(),
            })?;
            if seen.insert((wi, si)) {
                work_cast[wi as usize].push(si);
            } else {
                warnings.duplicate_cast_rows += 1;
            }
        }

        for cast in &mut work_cast {
            if cast.len() > options.max_cast_size {
                cast.clear();
                warnings.oversized_works += 1;
            }
            cast.sort_unstable();
        }

        let mut star_works: Vec<Vec<u32>> = vec![Vec::new(); stars.len()];
        for (wi, cast) in work_cast.iter().enumerate() {
            for &si in cast {
                star_works[si as usize].push(wi as u32);
            }
        }

        let mut first_year = Vec::with_capacity(stars.len());
        let mut stars = stars;
        for (si, star) in stars.iter_mut().enumerate() {
            let observed = star_works[si]
                .iter()
                .map(|&wi| works[wi as usize].year)
                .min();
            let resolved = star.first_work_year.or(observed);
            if let (Some(birth), Some(first)) = (star.birth_year, resolved) {
                if birth >= first {
                    star.birth_year = None;
                    warnings.inconsistent_birth_years += 1;
                }
            }
            first_year.push(resolved);
        }

        Ok(Dataset {
            stars,
            works,
            work_cast,
            star_works,
            star_index,
            first_year,
            warnings,
        })
    }

    pub fn stars(&self) -> &[StarRecord] {
        &self.stars
    }

    pub fn works(&self) -> &[WorkRecord] {
        &self.works
    }

    pub fn cast_of(&self, work: u32) -> &[u32] {
        &self.work_cast[work as usize]
    }

    pub fn works_of(&self, star: u32) -> &[u32] {
        &self.star_works[star as usize]
    }

    pub fn cast_row_count(&self) -> usize {
        self.work_cast.iter().map(Vec::len).sum()
    }

    pub fn star_id_to_index(&self, star_id: &str) -> Option<u32> {
        self.star_index.get(star_id).copied()
    }

    pub fn first_work_year(&self, star: u32) -> Option<i32> {
        self.first_year[star as usize]
    }

    pub fn warnings(&self) -> &LoadWarnings {
        &self.warnings
    }

    /// Works whose year falls inside the period, in file order.
    pub fn works_in_period(&self, period: &PeriodSpec) -> impl Iterator<Item = u32> + '_ {
        let (lo, hi) = (period.start_year, period.end_year);
        self.works
            .iter()
            .enumerate()
            .filter(move |(_, w)| w.year >= lo && w.year <= hi)
            .map(|(i, _)| i as u32)
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|source| Error::FileOpen {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn header_positions(path: &Path, reader: &mut csv::Reader<std::fs::File>, expected: &[&str]) -> Result<Vec<usize>> {
    let headers = reader.headers().map_err(|e| Error::MalformedRow {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })?;
    expected
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| Error::MalformedRow {
                    path: path.to_path_buf(),
                    line: 1,
                    message: format!("missing column {name:?}"),
                })
        })
        .collect()
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn field(record: &csv::StringRecord, idx: usize) -> &str {
    record.get(idx).unwrap_or("")
}

fn parse_opt_year(path: &Path, line: u64, column: &str, value: &str) -> Result<Option<i32>> {
    if value.is_empty() {
        return Ok(None);
    }
    value
        .parse::<i32>()
        .map(Some)
        .map_err(|_| Error::MalformedRow {
            path: path.to_path_buf(),
            line,
            message: format!("{column} {value:?} is not a year"),
        })
}

fn read_stars(path: &Path) -> Result<Vec<StarRecord>> {
    let mut reader = open_reader(path)?;
    let cols = header_positions(path, &mut reader, &["star_id", "name", "region", "birth_year", "first_work_year"])?;
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::MalformedRow {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        let star_id = field(&record, cols[0]).to_string();
        if star_id.is_empty() {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                message: "empty star_id".into(),
            });
        }
        if !ids.insert(star_id.clone()) {
            return Err(Error::DuplicateKey {
                path: path.to_path_buf(),
                line,
                kind: "star",
                key: star_id,
            });
        }
        let region_label = field(&record, cols[2]);
        let region: Region = region_label.parse().map_err(|_| Error::UnknownRegion {
            path: path.to_path_buf(),
            line,
            label: region_label.to_string(),
        })?;
        out.push(StarRecord {
            star_id,
            name: field(&record, cols[1]).to_string(),
            region,
            birth_year: parse_opt_year(path, line, "birth_year", field(&record, cols[3]))?,
            first_work_year: parse_opt_year(path, line, "first_work_year", field(&record, cols[4]))?,
        });
    }
    Ok(out)
}

fn read_works(path: &Path) -> Result<Vec<WorkRecord>> {
    let mut reader = open_reader(path)?;
    let cols = header_positions(path, &mut reader, &["work_id", "title", "year", "kind"])?;
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::MalformedRow {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        let work_id = field(&record, cols[0]).to_string();
        if work_id.is_empty() {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                message: "empty work_id".into(),
            });
        }
        if !ids.insert(work_id.clone()) {
            return Err(Error::DuplicateKey {
                path: path.to_path_buf(),
                line,
                kind: "work",
                key: work_id,
            });
        }
        let year = parse_opt_year(path, line, "year", field(&record, cols[2]))?.ok_or_else(|| {
            Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                message: "missing year".into(),
            }
        })?;
        if !(1900..=2100).contains(&year) {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                message: format!("year {year} outside [1900, 2100]"),
            });
        }
        let kind = match field(&record, cols[3]) {
            "movie" => WorkKind::Movie,
            "tv" => WorkKind::Tv,
            other => {
                return Err(Error::MalformedRow {
                    path: path.to_path_buf(),
                    line,
                    message: format!("kind {other:?} is neither \"movie\" nor \"tv\""),
                })
            }
        };
        out.push(WorkRecord {
            work_id,
            title: field(&record, cols[1]).to_string(),
            year,
            kind,
        });
    }
    Ok(out)
}

fn read_cast(path: &Path) -> Result<Vec<(CastRecord, u64)>> {
    let mut reader = open_reader(path)?;
    let cols = header_positions(path, &mut reader, &["work_id", "star_id"])?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::MalformedRow {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        let row = CastRecord {
            work_id: field(&record, cols[0]).to_string(),
            star_id: field(&record, cols[1]).to_string(),
        };
        if row.work_id.is_empty() || row.star_id.is_empty() {
            return Err(Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                message: "empty work_id or star_id".into(),
            });
        }
        out.push((row, line));
    }
    Ok(out)
}

/// Lagged per-star values for one period.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LagValues {
    pub cooperation_count: u32,
    pub cross_region: bool,
}

/// Lag map for one period of a schedule, keyed by dataset star index.
#[derive(Debug, Clone)]
pub struct PeriodAttributes {
    pub period: PeriodSpec,
    pub lag: BTreeMap<u32, LagValues>,
    /// True for the first period of a schedule, where no lag exists.
    pub no_lag: bool,
}

impl PeriodAttributes {
    pub fn lag_for(&self, star: u32) -> LagValues {
        self.lag.get(&star).copied().unwrap_or_default()
    }
}

fn check_schedule(schedule: &[PeriodSpec]) -> Result<()> {
    for pair in schedule.windows(2) {
        if pair[1].start_year <= pair[0].end_year {
            return Err(Error::InvalidInput(format!(
                "periods {:?} and {:?} are not disjoint and sorted",
                pair[0].label, pair[1].label
            )));
        }
    }
    Ok(())
}

/// Project the cast relation onto a co-starring network for one period.
///
/// Nodes are the stars of the requested regions appearing in at least one
/// in-period work; each work contributes an edge for every unordered pair of
/// its included cast, and edge weight counts shared works. Lagged attribute
/// fields are zeroed; use [`build_networks`] to attach them.
pub fn project(ds: &Dataset, period: &PeriodSpec, regions: &[Region]) -> Result<CollabNetwork> {
    project_with_lag(ds, period, regions, None)
}

fn project_with_lag(
    ds: &Dataset,
    period: &PeriodSpec,
    regions: &[Region],
    lag: Option<&PeriodAttributes>,
) -> Result<CollabNetwork> {
    if regions.is_empty() {
        return Err(Error::InvalidInput("region set must be nonempty".into()));
    }
    let region_set: HashSet<Region> = regions.iter().copied().collect();

    let mut appearing: HashSet<u32> = HashSet::new();
    let period_works: Vec<u32> = ds.works_in_period(period).collect();
    for &wi in &period_works {
        for &si in ds.cast_of(wi) {
            if region_set.contains(&ds.stars()[si as usize].region) {
                appearing.insert(si);
            }
        }
    }
    let mut included: Vec<u32> = appearing.into_iter().collect();
    included.sort_unstable();
    let node_of: HashMap<u32, u32> = included
        .iter()
        .enumerate()
        .map(|(node, &star)| (star, node as u32))
        .collect();

    let mut nodes = Vec::with_capacity(included.len());
    for &si in &included {
        let star = &ds.stars()[si as usize];
        let values = lag.map(|l| l.lag_for(si)).unwrap_or_default();
        nodes.push((
            star.star_id.clone(),
            NodeAttributes {
                region: star.region,
                birth_year: star.birth_year,
                // Appearing stars always have at least one work.
                first_work_year: ds.first_work_year(si).expect("appearing star has a work"),
                prev_cooperation_count: values.cooperation_count,
                prev_cross_region: values.cross_region,
            },
        ));
    }

    let mut weights: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for &wi in &period_works {
        let cast = ds.cast_of(wi);
        let members: Vec<u32> = cast.iter().filter_map(|si| node_of.get(si).copied()).collect();
        for (k, &a) in members.iter().enumerate() {
            for &b in &members[k + 1..] {
                let e = (a.min(b), a.max(b));
                *weights.entry(e).or_insert(0) += 1;
            }
        }
    }

    CollabNetwork::new(
        period.clone(),
        nodes,
        weights.into_iter().map(|((a, b), w)| (a, b, w)),
    )
}

/// Compute lagged attributes for every period of a sorted, disjoint schedule.
///
/// Period k (k > 0) reads period k-1's all-regions network: cooperation count
/// is the weighted incident sum (or distinct partners, see
/// [`PopularityMeasure`]) and cross-region experience is true when the star
/// had at least one different-region co-star.
pub fn derive_attributes(ds: &Dataset, schedule: &[PeriodSpec]) -> Result<Vec<PeriodAttributes>> {
    derive_attributes_with(ds, schedule, PopularityMeasure::Events)
}

pub fn derive_attributes_with(
    ds: &Dataset,
    schedule: &[PeriodSpec],
    measure: PopularityMeasure,
) -> Result<Vec<PeriodAttributes>> {
    check_schedule(schedule)?;
    let mut out = Vec::with_capacity(schedule.len());
    for (k, period) in schedule.iter().enumerate() {
        if k == 0 {
            out.push(PeriodAttributes {
                period: period.clone(),
                lag: BTreeMap::new(),
                no_lag: true,
            });
            continue;
        }
        let previous = project(ds, &schedule[k - 1], &Region::ALL)?;
        let mut lag: BTreeMap<u32, LagValues> = BTreeMap::new();
        for node in previous.node_ids() {
            let star = ds
                .star_id_to_index(previous.label(node))
                .expect("projected node resolves to a star");
            let region = previous.attributes(node).region;
            let mut count = 0u32;
            let mut cross = false;
            for (k_edge, &(a, b)) in previous.edges().iter().enumerate() {
                let other = if a == node.0 {
                    b
                } else if b == node.0 {
                    a
                } else {
                    continue;
                };
                count += match measure {
                    PopularityMeasure::Events => previous.edge_weight(k_edge),
                    PopularityMeasure::Partners => 1,
                };
                if previous.attributes(crate::graph::NodeId(other)).region != region {
                    cross = true;
                }
            }
            lag.insert(star, LagValues { cooperation_count: count, cross_region: cross });
        }
        out.push(PeriodAttributes {
            period: period.clone(),
            lag,
            no_lag: false,
        });
    }
    Ok(out)
}

/// Full projection pipeline: one network per schedule period, restricted to
/// `regions`, with lagged attributes attached.
pub fn build_networks(
    ds: &Dataset,
    schedule: &[PeriodSpec],
    regions: &[Region],
    measure: PopularityMeasure,
) -> Result<Vec<CollabNetwork>> {
    let attrs = derive_attributes_with(ds, schedule, measure)?;
    schedule
        .iter()
        .zip(&attrs)
        .map(|(period, lag)| project_with_lag(ds, period, regions, Some(lag)))
        .collect()
}

/// Convenience for callers that already hold per-period lag maps.
pub fn project_with_attributes(
    ds: &Dataset,
    period: &PeriodSpec,
    regions: &[Region],
    lag: &PeriodAttributes,
) -> Result<CollabNetwork> {
    project_with_lag(ds, period, regions, Some(lag))
}

/// Write a dataset back out as the three canonical CSV files.
pub fn write_dataset(
    dir: impl AsRef<Path>,
    stars: &[StarRecord],
    works: &[WorkRecord],
    cast: &[CastRecord],
) -> Result<(PathBuf, PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    let star_path = dir.join("stars.csv");
    let work_path = dir.join("works.csv");
    let cast_path = dir.join("cast.csv");

    let fail = |path: &Path| {
        let path = path.to_path_buf();
        move |e: csv::Error| Error::FileWrite {
            path,
            source: std::io::Error::other(e),
        }
    };

    let mut w = csv::Writer::from_path(&star_path).map_err(fail(&star_path))?;
    w.write_record(["star_id", "name", "region", "birth_year", "first_work_year"])
        .map_err(fail(&star_path))?;
    for s in stars {
        w.write_record([
            s.star_id.as_str(),
            s.name.as_str(),
            s.region.as_str(),
            &s.birth_year.map(|y| y.to_string()).unwrap_or_default(),
            &s.first_work_year.map(|y| y.to_string()).unwrap_or_default(),
        ])
        .map_err(fail(&star_path))?;
    }
    w.flush().map_err(|e| Error::FileWrite {
        path: star_path.clone(),
        source: e,
    })?;

    let mut w = csv::Writer::from_path(&work_path).map_err(fail(&work_path))?;
    w.write_record(["work_id", "title", "year", "kind"])
        .map_err(fail(&work_path))?;
    for r in works {
        w.write_record([
            r.work_id.as_str(),
            r.title.as_str(),
            &r.year.to_string(),
            r.kind.as_str(),
        ])
        .map_err(fail(&work_path))?;
    }
    w.flush().map_err(|e| Error::FileWrite {
        path: work_path.clone(),
        source: e,
    })?;

    let mut w = csv::Writer::from_path(&cast_path).map_err(fail(&cast_path))?;
    w.write_record(["work_id", "star_id"]).map_err(fail(&cast_path))?;
    for r in cast {
        w.write_record([r.work_id.as_str(), r.star_id.as_str()])
            .map_err(fail(&cast_path))?;
    }
    w.flush().map_err(|e| Error::FileWrite {
        path: cast_path.clone(),
        source: e,
    })?;

    Ok((star_path, work_path, cast_path))
}
