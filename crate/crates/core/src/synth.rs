//! Deterministic synthetic datasets.
//!
//! Real co-starring databases are not redistributable, so tests, demos and
//! the bundled fixture run on generated ones: plausible region mixes, career
//! windows, and a tunable same-region casting bias so the boundary effects
//! the toolkit measures actually exist in the data. Everything is a pure
//! function of the config (ChaCha8 streams, no iteration-order dependence),
//! which is what makes golden and determinism tests possible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{CollabNetwork, Region};
use crate::ingest::{CastRecord, StarRecord, WorkKind, WorkRecord};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_stars: usize,
    /// Works are generated for every year in this inclusive range.
    pub start_year: i32,
    pub end_year: i32,
    pub works_per_year: usize,
    /// Sampling weights for Mainland, HongKong, Taiwan, Other.
    pub region_weights: [f64; 4],
    /// Probability that each additional cast member is drawn from the
    /// anchor star's own region rather than from everyone active.
    pub same_region_bias: f64,
    /// Fraction of stars with no recorded birth year.
    pub missing_birth_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_stars: 500,
            start_year: 1988,
            end_year: 2014,
            works_per_year: 70,
            region_weights: [0.55, 0.25, 0.15, 0.05],
            same_region_bias: 0.8,
            missing_birth_rate: 0.1,
            seed: 0,
        }
    }
}

/// Generate a full dataset: stars, works and cast attributions.
pub fn generate(cfg: &SynthConfig) -> (Vec<StarRecord>, Vec<WorkRecord>, Vec<CastRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let total_weight: f64 = cfg.region_weights.iter().sum();

    let mut stars = Vec::with_capacity(cfg.n_stars);
    let mut careers = Vec::with_capacity(cfg.n_stars);
    for idx in 0..cfg.n_stars {
        let mut pick = rng.random::<f64>() * total_weight;
        let mut region = Region::Other;
        for (r, w) in Region::ALL.into_iter().zip(cfg.region_weights) {
            if pick < w {
                region = r;
                break;
            }
            pick -= w;
        }
        let birth_year = if rng.random::<f64>() < cfg.missing_birth_rate {
            None
        } else {
            Some(rng.random_range(1935..=1985))
        };
        let career_start = rng.random_range(cfg.start_year - 10..=cfg.end_year - 2);
        let career_end = career_start + rng.random_range(8..=20);
        careers.push((career_start, career_end));
        stars.push(StarRecord {
            star_id: format!("s{idx:04}"),
            name: format!("Star {idx:04}"),
            region,
            birth_year,
            first_work_year: None,
        });
    }

    // Active star indices per year, total and per region, in index order.
    let years: Vec<i32> = (cfg.start_year..=cfg.end_year).collect();
    let mut active: Vec<Vec<u32>> = vec![Vec::new(); years.len()];
    let mut active_by_region: Vec<[Vec<u32>; 4]> = vec![Default::default(); years.len()];
    for (idx, &(from, to)) in careers.iter().enumerate() {
        let region_idx = Region::ALL
            .iter()
            .position(|&r| r == stars[idx].region)
            .expect("generated region");
        for (y, &year) in years.iter().enumerate() {
            if year >= from && year <= to {
                active[y].push(idx as u32);
                active_by_region[y][region_idx].push(idx as u32);
            }
        }
    }

    let mut works = Vec::new();
    let mut cast = Vec::new();
    let mut wid = 0usize;
    for (y, &year) in years.iter().enumerate() {
        let pool = &active[y];
        for _ in 0..cfg.works_per_year {
            if pool.len() < 2 {
                continue;
            }
            wid += 1;
            let work_id = format!("w{wid:05}");
            works.push(WorkRecord {
                work_id: work_id.clone(),
                title: format!("Work {wid:05}"),
                year,
                kind: if rng.random::<f64>() < 0.7 {
                    WorkKind::Movie
                } else {
                    WorkKind::Tv
                },
            });
            let anchor = pool[rng.random_range(0..pool.len())];
            let anchor_region = Region::ALL
                .iter()
                .position(|&r| r == stars[anchor as usize].region)
                .expect("generated region");
            let extras = 1 + rng.random_range(0..5).min(rng.random_range(0..5));
            let mut members = vec![anchor];
            for _ in 0..extras {
                for _attempt in 0..20 {
                    let own = &active_by_region[y][anchor_region];
                    let from_pool =
                        if rng.random::<f64>() < cfg.same_region_bias && own.len() >= 2 {
                            own
                        } else {
                            pool
                        };
                    let candidate = from_pool[rng.random_range(0..from_pool.len())];
                    if !members.contains(&candidate) {
                        members.push(candidate);
                        break;
                    }
                }
            }
            for &m in &members {
                cast.push(CastRecord {
                    work_id: work_id.clone(),
                    star_id: stars[m as usize].star_id.clone(),
                });
            }
        }
    }
    (stars, works, cast)
}

/// A uniform random simple graph with exactly `m` edges, all one region.
pub fn er_network(n: usize, m: usize, seed: u64) -> Result<CollabNetwork> {
    let regions = vec![Region::Mainland; n];
    er_network_with_regions(&regions, m, seed)
}

/// A uniform random simple graph with exactly `m` edges over given regions.
pub fn er_network_with_regions(regions: &[Region], m: usize, seed: u64) -> Result<CollabNetwork> {
    let n = regions.len() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut present = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let e = (a.min(b), a.max(b));
        if present.insert(e) {
            edges.push(e);
        }
    }
    CollabNetwork::from_edges_with_regions(regions, &edges)
}
