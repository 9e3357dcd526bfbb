mod support;

use std::collections::BTreeMap;

use moblag_core::leadlag::{estimate_lag, normalize_cumdeaths, normalize_mobility_reduction, IrregularSeries};
use moblag_core::netgraph::{
    build_network, detect_communities, detect_communities_graph, directed_modularity, LeadLagEdge, NetworkConfig,
    WeightedDigraph,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type SeriesMap = BTreeMap<String, IrregularSeries>;

/// Regions with individual lockdown ramps; each death curve trails a
/// randomly chosen region's reduction by a random lag.
fn random_scenario(seed: u64, n: usize) -> (SeriesMap, SeriesMap) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = 100;
    let reductions: Vec<Vec<f64>> = (0..n)
        .map(|_| support::ramp(len, rng.random_range(15..40), rng.random_range(3..12), rng.random_range(0.4..3.0)))
        .collect();
    let mut mobility = BTreeMap::new();
    let mut deaths = BTreeMap::new();
    for i in 0..n {
        let id = format!("p{i:02}");
        let m: Vec<f64> = reductions[i].iter().map(|r| 500.0 * (1.0 - 0.6 * r)).collect();
        let leader = rng.random_range(0..n);
        let lag = rng.random_range(0..25);
        let d: Vec<f64> = support::delayed(&reductions[leader], lag).iter().map(|p| 40.0 * p).collect();
        mobility.insert(id.clone(), IrregularSeries::regular(0.0, m).unwrap());
        deaths.insert(id, IrregularSeries::regular(0.0, d).unwrap());
    }
    (mobility, deaths)
}

#[test]
fn in_degree_at_most_one_and_no_loops() {
    for seed in 0..100 {
        let (m, d) = random_scenario(seed, 5);
        let net = build_network(&m, &d, &NetworkConfig::default()).unwrap();
        assert!(net.edges.iter().all(|e| e.origin != e.destination));
        assert!(net.in_degrees().values().all(|&k| k <= 1));
        assert!(net.edges.iter().all(|e| (0.0..=1.0).contains(&e.weight)));
        let clustered = detect_communities(&net, seed);
        let labelled: Vec<&String> = clustered.clusters.keys().collect();
        let mut nodes: Vec<&String> = net.nodes.iter().collect();
        nodes.sort();
        assert_eq!(labelled, nodes);
    }
}

#[test]
fn edges_agree_with_standalone_estimates() {
    let (m, d) = random_scenario(77, 6);
    let cfg = NetworkConfig::default();
    let net = build_network(&m, &d, &cfg).unwrap();
    for e in &net.edges {
        let lead = normalize_mobility_reduction(&m[&e.origin]).unwrap();
        let lag = normalize_cumdeaths(&d[&e.destination]).unwrap();
        let est = estimate_lag(&lead, &lag, &cfg.lag).unwrap();
        assert_eq!(e.lag_days as f64, est.theta_hat);
        assert_eq!(e.weight, est.r_squared_shifted.unwrap());
    }
}

#[test]
fn relabelling_regions_relabels_the_edges() {
    for seed in 0..10 {
        let (m, d) = random_scenario(seed, 5);
        // reverse the lexicographic order of the ids
        let rename = |id: &str| format!("q{:02}", 99 - id[1..].parse::<u32>().unwrap());
        let m2: SeriesMap = m.iter().map(|(k, v)| (rename(k), v.clone())).collect();
        let d2: SeriesMap = d.iter().map(|(k, v)| (rename(k), v.clone())).collect();
        let a = build_network(&m, &d, &NetworkConfig::default()).unwrap();
        let b = build_network(&m2, &d2, &NetworkConfig::default()).unwrap();
        let key = |e: &LeadLagEdge| (e.destination.clone(), e.origin.clone(), e.lag_days, e.weight.to_bits());
        let mut ea: Vec<_> = a
            .edges
            .iter()
            .map(|e| key(&LeadLagEdge { origin: rename(&e.origin), destination: rename(&e.destination), ..e.clone() }))
            .collect();
        let mut eb: Vec<_> = b.edges.iter().map(key).collect();
        ea.sort();
        eb.sort();
        assert_eq!(ea, eb, "seed {seed}");
    }
}

fn planted_blocks(seed: u64, block: usize) -> WeightedDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * block;
    let mut g = WeightedDigraph::new(n);
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let same = (u < block) == (v < block);
            let (p, w) = if same { (0.8, 1.0) } else { (0.1, 0.2) };
            if rng.random::<f64>() < p {
                g.add_edge(u, v, w * rng.random_range(0.8..1.2));
            }
        }
    }
    g
}

#[test]
fn planted_blocks_are_recovered_for_every_seed() {
    let g = planted_blocks(3, 8);
    for seed in 0..20 {
        let labels = detect_communities_graph(&g, seed);
        let expected: Vec<usize> = (0..16).map(|i| usize::from(i >= 8)).collect();
        assert_eq!(labels, expected, "seed {seed}");
        assert!(directed_modularity(&g, &labels) > 0.3);
    }
}

#[test]
fn clustering_is_thread_count_independent() {
    let (m, d) = random_scenario(5, 8);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| detect_communities(&build_network(&m, &d, &NetworkConfig::default()).unwrap(), 9))
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one.to_json().unwrap(), run(8).to_json().unwrap());
}

