//! Acceptance gate: ten checks covering degree-preserving randomization,
//! index calibration, estimation correctness against closed forms and exact
//! enumeration, parameter recovery, exact score identities, and
//! whole-pipeline byte determinism. Each test prints one PASS/FAIL line
//! (visible with `--nocapture`; failures always show it).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use collabnet::ergm::{
    self, oracle_distribution, sample_dyad_independent, MetropolisChain, TermSpec,
};
use collabnet::graph::{CollabNetwork, NodeAttributes, NodeId, PeriodSpec, Region};
use collabnet::null_model::{cross_region_index, randomize};
use collabnet::report::{cross_coop_table, Cell, SubgroupSpec};
use collabnet::synth::{er_network, er_network_with_regions, generate, SynthConfig};
use collabnet::{Dataset, ErgmFit, SwapConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn verdict(number: u8, name: &str, ok: bool, detail: &str) {
    let state = if ok { "PASS" } else { "FAIL" };
    println!("criterion {number:02} ({name}): {state} - {detail}");
}

fn period() -> PeriodSpec {
    PeriodSpec::new("test", 1994, 1997).unwrap()
}

/// A graph over n nodes with mixed attributes and the given edges.
fn attributed_graph(
    n: usize,
    edges: impl IntoIterator<Item = (u32, u32)>,
    rng: &mut ChaCha8Rng,
) -> CollabNetwork {
    let regions = [Region::Mainland, Region::HongKong, Region::Taiwan];
    let nodes = (0..n)
        .map(|i| {
            let mut a = NodeAttributes::with_region(regions[rng.random_range(0..regions.len())]);
            a.prev_cooperation_count = rng.random_range(0..6);
            a.birth_year = if rng.random_bool(0.8) {
                Some(rng.random_range(1930..1985))
            } else {
                None
            };
            a.first_work_year = rng.random_range(1970..2005);
            a.prev_cross_region = rng.random_bool(0.4);
            (format!("s{i}"), a)
        })
        .collect();
    CollabNetwork::new(period(), nodes, edges.into_iter().map(|(a, b)| (a, b, 1))).unwrap()
}

fn random_edges(n: usize, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            if rng.random_bool(0.5) {
                edges.push((i, j));
            }
        }
    }
    edges
}

#[test]
fn criterion_01_degree_preservation() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut graphs_checked = 0;
    for case in 0..100u64 {
        let n = rng.random_range(3..=500);
        let dyads = n * (n - 1) / 2;
        let m_max = (2 * n).min(dyads / 2).max(1);
        let m = rng.random_range(1..=m_max);
        let g = er_network(n, m, case).unwrap();
        let before = g.degree_sequence();
        for seed in 0..10u64 {
            let cfg = SwapConfig {
                seed,
                ..SwapConfig::default()
            };
            let shuffled = randomize(&g, &cfg, case).unwrap();
            assert_eq!(shuffled.degree_sequence(), before, "degrees changed");
            let mut seen = std::collections::HashSet::new();
            for &(a, b) in shuffled.edges() {
                assert_ne!(a, b, "self loop after randomization");
                assert!(seen.insert((a.min(b), a.max(b))), "duplicate edge");
            }
            assert_eq!(shuffled.edge_count(), m);
        }
        graphs_checked += 1;
    }
    let elapsed = started.elapsed();
    let ok = graphs_checked == 100 && elapsed < Duration::from_secs(10);
    verdict(
        1,
        "degree preservation",
        ok,
        &format!("100 graphs x 10 seeds, degrees and simplicity exact, {elapsed:.2?}"),
    );
    assert!(ok, "elapsed {elapsed:?} over the 10 s budget");
}

#[test]
fn criterion_02_index_null_consistency() {
    let started = Instant::now();
    let in_band = (0..100u64)
        .into_par_iter()
        .filter(|&trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial);
            let regions: Vec<Region> = (0..200)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        Region::Mainland
                    } else {
                        Region::HongKong
                    }
                })
                .collect();
            let g = er_network_with_regions(&regions, 1000, 10_000 + trial).unwrap();
            let cfg = SwapConfig {
                replicates: 100,
                seed: 20_000 + trial,
                ..SwapConfig::default()
            };
            let result = cross_region_index(&g, &cfg).unwrap();
            (0.9..=1.1).contains(&result.ratio)
        })
        .count();
    let elapsed = started.elapsed();
    let ok = in_band >= 90 && elapsed < Duration::from_secs(60);
    verdict(
        2,
        "index null consistency",
        ok,
        &format!("{in_band}/100 region-independent trials inside [0.9, 1.1], {elapsed:.2?}"),
    );
    assert!(ok, "{in_band}/100 in band, elapsed {elapsed:?}");
}

/// A simple graph with exactly n nodes and the first m dyads in
/// lexicographic order as edges.
fn counted_graph(n: usize, m: usize) -> CollabNetwork {
    let nodes = (0..n)
        .map(|i| {
            (
                format!("s{i}"),
                NodeAttributes::with_region(Region::Mainland),
            )
        })
        .collect();
    let edges = (0..n as u32)
        .flat_map(|i| ((i + 1)..n as u32).map(move |j| (i, j, 1)))
        .take(m);
    CollabNetwork::new(period(), nodes, edges).unwrap()
}

#[test]
fn criterion_03_average_degree_arithmetic() {
    let small = counted_graph(1413, 7745).average_degree().unwrap();
    let large = counted_graph(3727, 35882).average_degree().unwrap();
    let ok = (small - 10.96).abs() <= 0.01 && (large - 19.26).abs() <= 0.01;
    verdict(
        3,
        "average degree arithmetic",
        ok,
        &format!("2m/n gives {small:.4} (target 10.96) and {large:.4} (target 19.26)"),
    );
    assert!(ok, "got {small} and {large}");
}

#[test]
fn criterion_04_edges_only_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for case in 0..50u64 {
        let n = rng.random_range(10..=40);
        let dyads = n * (n - 1) / 2;
        let m = rng.random_range(dyads / 4..=3 * dyads / 4);
        let g = er_network(n, m, 500 + case).unwrap();
        let fit = ergm::fit(&g, &[TermSpec::Edges]).unwrap();
        let density = m as f64 / dyads as f64;
        let expected = (density / (1.0 - density)).ln();
        worst = worst.max((fit.theta[0] - expected).abs());
    }
    let ok = worst < 1e-6;
    verdict(
        4,
        "edges-only closed form",
        ok,
        &format!("max |theta - logit(density)| = {worst:.2e} over 50 graphs"),
    );
    assert!(ok, "worst deviation {worst}");
}

fn stable_ln_1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[test]
fn criterion_05_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);

    // Part one: the dyad-factorized likelihood equals exact enumeration.
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=5usize);
        let edges = random_edges(n, &mut rng);
        let g = attributed_graph(n, edges, &mut rng);

        let pool = [
            TermSpec::Edges,
            TermSpec::node_match("region"),
            TermSpec::node_factor("region", "HongKong", "Mainland"),
            TermSpec::node_cov("prev_cooperation_count"),
            TermSpec::node_match("age_group"),
        ];
        let mut terms: Vec<TermSpec> = pool
            .iter()
            .filter(|_| rng.random_bool(0.5))
            .cloned()
            .collect();
        if terms.is_empty() {
            terms.push(TermSpec::Edges);
        }
        let theta: Vec<f64> = (0..terms.len())
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();

        // ln P(y) as a product of independent dyad Bernoullis.
        let mut ln_factorized = 0.0;
        for i in 0..n as u32 {
            for j in (i + 1)..n as u32 {
                let delta = ergm::change_statistics(&g, &terms, NodeId(i), NodeId(j)).unwrap();
                let eta: f64 = theta.iter().zip(&delta).map(|(t, d)| t * d).sum();
                if g.has_edge(NodeId(i), NodeId(j)) {
                    ln_factorized += eta;
                }
                ln_factorized -= stable_ln_1p_exp(eta);
            }
        }

        let oracle = oracle_distribution(&g, &terms, &theta).unwrap();
        let ln_enumerated = oracle.probability_of(&g).ln();
        worst = worst.max((ln_factorized - ln_enumerated).abs());
    }
    let factorization_ok = worst < 1e-10;

    // Part two: the Metropolis sampler reproduces the oracle distribution.
    let template = attributed_graph(4, [(0, 1)], &mut rng);
    let terms = vec![TermSpec::Edges, TermSpec::node_match("region")];
    let theta = vec![-0.3, 0.7];
    let oracle = oracle_distribution(&template, &terms, &theta).unwrap();
    let expected = oracle.probabilities();
    let mut chain = MetropolisChain::new(&template, &terms, &theta).unwrap();
    let mut chain_rng = ChaCha8Rng::seed_from_u64(606);
    let steps = 1_000_000;
    let counts = chain.visit_counts(&mut chain_rng, 20_000, steps);
    let tv: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&c, &p)| (c as f64 / steps as f64 - p).abs())
        .sum::<f64>()
        / 2.0;
    let sampler_ok = tv <= 0.02;

    let elapsed = started.elapsed();
    let ok = factorization_ok && sampler_ok && elapsed < Duration::from_secs(300);
    verdict(
        5,
        "oracle equivalence",
        ok,
        &format!(
            "max log-likelihood gap {worst:.2e} over 100 cases; sampler TV {tv:.4} at 1e6 samples; {elapsed:.2?}"
        ),
    );
    assert!(ok, "gap {worst}, TV {tv}, elapsed {elapsed:?}");
}

#[test]
fn criterion_06_parameter_recovery() {
    let started = Instant::now();
    let mut attr_rng = ChaCha8Rng::seed_from_u64(660);
    let nodes: Vec<(String, NodeAttributes)> = (0..200)
        .map(|i| {
            let region = if attr_rng.random_bool(0.5) {
                Region::Mainland
            } else {
                Region::HongKong
            };
            let mut a = NodeAttributes::with_region(region);
            a.prev_cooperation_count = attr_rng.random_range(0..=10);
            (format!("s{i}"), a)
        })
        .collect();
    let template = CollabNetwork::new(period(), nodes, std::iter::empty()).unwrap();
    let terms = vec![
        TermSpec::Edges,
        TermSpec::node_match("region"),
        TermSpec::node_cov("prev_cooperation_count"),
    ];
    let truth = [-4.0, 1.5, 0.1];

    let mut total_error = [0.0f64; 3];
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = sample_dyad_independent(&template, &terms, &truth, &mut rng).unwrap();
        let fit = ergm::fit(&y, &terms).unwrap();
        for (t, (&hat, &star)) in fit.theta.iter().zip(&truth).enumerate() {
            total_error[t] += (hat - star).abs();
        }
    }
    let mean_error: Vec<f64> = total_error.iter().map(|e| e / 20.0).collect();
    let elapsed = started.elapsed();
    let ok = mean_error.iter().all(|&e| e <= 0.15) && elapsed < Duration::from_secs(120);
    verdict(
        6,
        "parameter recovery",
        ok,
        &format!(
            "mean |error| per term {:?} against (-4.0, +1.5, +0.1), 20 seeds, {elapsed:.2?}",
            mean_error
                .iter()
                .map(|e| format!("{e:.3}"))
                .collect::<Vec<_>>()
        ),
    );
    assert!(ok, "mean errors {mean_error:?}, elapsed {elapsed:?}");
}

#[test]
fn criterion_07_aic_bic_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut fits_checked = 0;
    for case in 0..20u64 {
        let n = rng.random_range(10..=60usize);
        let edges = random_edges(n, &mut rng);
        if edges.is_empty() {
            continue;
        }
        let g = attributed_graph(n, edges, &mut rng);
        let terms = vec![TermSpec::Edges, TermSpec::node_match("region")];
        let fit = match ergm::fit(&g, &terms) {
            Ok(f) => f,
            Err(_) => continue, // a separated draw proves nothing here
        };
        assert_eq!(fit.aic, fit.residual_deviance + 2.0 * fit.k as f64);
        assert_eq!(
            fit.bic,
            fit.residual_deviance + fit.k as f64 * (fit.n_dyads as f64).ln()
        );
        assert_eq!(fit.residual_deviance, -2.0 * fit.log_likelihood);
        fits_checked += 1;
        let _ = case;
    }

    // A model whose AIC sits 24 above its residual deviance must have spent
    // exactly twelve parameters: 2k = 24.
    let k = 12;
    let residual_deviance = 65017.0;
    let dummy = ErgmFit {
        period: "dummy".into(),
        terms: (0..k).map(|i| format!("t{i}")).collect(),
        theta: vec![0.0; k],
        se: vec![0.0; k],
        k,
        n_dyads: 100_000,
        n_edges: 5_000,
        log_likelihood: -residual_deviance / 2.0,
        null_deviance: 2.0 * std::f64::consts::LN_2 * 100_000.0,
        residual_deviance,
        aic: residual_deviance + 2.0 * k as f64,
        bic: residual_deviance + k as f64 * (100_000.0f64).ln(),
        converged: true,
        iterations: 0,
    };
    let gap = dummy.aic - dummy.residual_deviance;
    let gap_ok = gap == 24.0 && (gap / 2.0) as usize == dummy.k && dummy.aic == 65041.0;

    let ok = fits_checked >= 15 && gap_ok;
    verdict(
        7,
        "aic/bic identities",
        ok,
        &format!("exact on {fits_checked} fits; forced k=12 dummy gives AIC-deviance gap {gap}"),
    );
    assert!(ok, "{fits_checked} fits checked, gap {gap}");
}

#[test]
fn criterion_08_change_statistic_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let pool = [
        TermSpec::Edges,
        TermSpec::node_match("region"),
        TermSpec::node_match("age_group"),
        TermSpec::node_match("cohort"),
        TermSpec::node_match("prev_cross_region"),
        TermSpec::node_factor("region", "HongKong", "Mainland"),
        TermSpec::node_factor("region", "Taiwan", "Mainland"),
        TermSpec::node_factor("age_group", "40-59", "under20"),
        TermSpec::node_cov("prev_cooperation_count"),
    ];
    let mut cases = 0;
    while cases < 1000 {
        let n = rng.random_range(2..=9usize);
        let base = random_edges(n, &mut rng);
        let g = attributed_graph(n, base.clone(), &mut rng);
        let i = rng.random_range(0..n as u32 - 1);
        let j = rng.random_range(i + 1..n as u32);
        let term = pool[rng.random_range(0..pool.len())].clone();
        let terms = [term];

        let mut with: Vec<(u32, u32)> = base.iter().copied().filter(|&e| e != (i, j)).collect();
        let without = with.clone();
        with.push((i, j));
        let g_with = attributed_graph_like(&g, with);
        let g_without = attributed_graph_like(&g, without);

        let delta = ergm::change_statistics(&g, &terms, NodeId(i), NodeId(j)).unwrap();
        let s_with = ergm::compute_statistics(&g_with, &terms).unwrap();
        let s_without = ergm::compute_statistics(&g_without, &terms).unwrap();
        assert_eq!(
            delta[0],
            s_with[0] - s_without[0],
            "term {} at dyad ({i},{j})",
            terms[0].name()
        );
        cases += 1;
    }
    verdict(
        8,
        "change statistics",
        true,
        "1000 random (graph, dyad, term) cases match the explicit toggle difference exactly",
    );
}

/// Same nodes and attributes as `g`, different edge set.
fn attributed_graph_like(g: &CollabNetwork, edges: Vec<(u32, u32)>) -> CollabNetwork {
    let nodes = g
        .node_ids()
        .map(|v| (g.label(v).to_string(), g.attributes(v).clone()))
        .collect();
    CollabNetwork::new(
        g.period().clone(),
        nodes,
        edges.into_iter().map(|(a, b)| (a, b, 1)),
    )
    .unwrap()
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synth500")
}

fn run_command(out_root: &Path, command: &str, workers: Option<usize>) {
    let fixture = fixture_dir();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_collabnet"));
    cmd.arg(command)
        .arg("--stars")
        .arg(fixture.join("stars.csv"))
        .arg("--works")
        .arg(fixture.join("works.csv"))
        .arg("--cast")
        .arg(fixture.join("cast.csv"))
        .arg("--out")
        .arg(out_root.join(command));
    if let Some(w) = workers {
        cmd.arg("--workers").arg(w.to_string());
    }
    let output = cmd.output().expect("spawn collabnet");
    assert!(
        output.status.success(),
        "{command} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn snapshot_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Compare two output trees byte for byte. Manifests are compared with the
/// wall-time field masked, since elapsed time is the one legitimate
/// run-to-run difference.
fn assert_trees_equal(a: &BTreeMap<PathBuf, Vec<u8>>, b: &BTreeMap<PathBuf, Vec<u8>>) {
    let keys_a: Vec<_> = a.keys().collect();
    let keys_b: Vec<_> = b.keys().collect();
    assert_eq!(keys_a, keys_b, "output trees list different files");
    for (path, bytes_a) in a {
        let bytes_b = &b[path];
        if path.file_name().is_some_and(|f| f == "manifest.json") {
            let mask = |bytes: &[u8]| -> serde_json::Value {
                let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
                v["wall_time_ms"] = serde_json::Value::from(0u64);
                v
            };
            assert_eq!(mask(bytes_a), mask(bytes_b), "{} differs", path.display());
        } else {
            assert_eq!(bytes_a, bytes_b, "{} differs between runs", path.display());
        }
    }
}

#[test]
fn criterion_09_pipeline_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out_root = dir.path().join("run");
    let commands = ["describe", "index", "ergm", "subgroups"];

    let run_all = |workers: Option<usize>| {
        if out_root.exists() {
            std::fs::remove_dir_all(&out_root).unwrap();
        }
        for command in commands {
            run_command(&out_root, command, workers);
        }
        snapshot_tree(&out_root)
    };

    let first = run_all(None);
    let second = run_all(None);
    assert_trees_equal(&first, &second);

    let single = run_all(Some(1));
    let eight = run_all(Some(8));
    assert_trees_equal(&single, &eight);
    assert_trees_equal(&first, &single);

    let elapsed = started.elapsed();
    let files = first.len();
    let ok = elapsed < Duration::from_secs(120);
    verdict(
        9,
        "pipeline determinism",
        ok,
        &format!(
            "{files} output files byte-identical across reruns and 1-vs-8 workers, {elapsed:.2?}"
        ),
    );
    assert!(ok, "elapsed {elapsed:?} over the 2 min budget");
}

#[test]
fn criterion_10_bipartite_identity() {
    let schedule: Vec<PeriodSpec> = (0..5)
        .map(|k| {
            let start = 1990 + 4 * k;
            PeriodSpec::new(format!("{start}-{}", start + 3), start, start + 3).unwrap()
        })
        .collect();

    let fixture = fixture_dir();
    let bundled = Dataset::load(
        fixture.join("stars.csv"),
        fixture.join("works.csv"),
        fixture.join("cast.csv"),
    )
    .unwrap();

    let variants = [
        SynthConfig {
            n_stars: 200,
            seed: 1,
            ..SynthConfig::default()
        },
        SynthConfig {
            n_stars: 150,
            same_region_bias: 0.4,
            seed: 2,
            ..SynthConfig::default()
        },
        SynthConfig {
            n_stars: 120,
            works_per_year: 30,
            region_weights: [0.4, 0.4, 0.1, 0.1],
            seed: 3,
            ..SynthConfig::default()
        },
    ];

    let dir = tempfile::tempdir().unwrap();
    let mut datasets = vec![bundled];
    for (i, cfg) in variants.iter().enumerate() {
        let sub = dir.path().join(i.to_string());
        std::fs::create_dir_all(&sub).unwrap();
        let (stars, works, cast) = generate(cfg);
        let (s, w, c) = collabnet::ingest::write_dataset(&sub, &stars, &works, &cast).unwrap();
        datasets.push(Dataset::load(s, w, c).unwrap());
    }

    let mut rows_checked = 0;
    for ds in &datasets {
        let table = cross_coop_table(
            ds,
            &schedule,
            Region::Mainland,
            Region::HongKong,
            &SubgroupSpec::default(),
        )
        .unwrap();
        let check = |cells: &[[Option<Cell>; 2]; 4]| {
            // Each cross-region edge contributes its full weight to both
            // sides of the all-stars column, so the integer totals (and
            // therefore mean x count on either side) agree exactly.
            match (cells[0][0], cells[0][1]) {
                (Some(h), Some(m)) => assert_eq!(h.sum, m.sum, "all-stars sums diverge"),
                (Some(only), None) | (None, Some(only)) => {
                    assert_eq!(only.sum, 0, "one-sided cell must have zero crossings")
                }
                (None, None) => {}
            }
        };
        for row in &table.rows {
            check(&row.cells);
            rows_checked += 1;
        }
        check(&table.totals());
        rows_checked += 1;
    }
    verdict(
        10,
        "bipartite identity",
        true,
        &format!("all-stars totals agree exactly on {rows_checked} rows across 4 datasets"),
    );
}
