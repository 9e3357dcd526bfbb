//! Greedy directed-modularity community detection (Louvain scheme).
//!
//! Directed modularity of a partition `c`:
//! `Q = 1/m * sum_ij [A_ij - k_i^out k_j^in / m] * [c_i == c_j]`,
//! with `m` the total edge weight. Nodes are visited in a seeded random order;
//! ties between candidate communities keep the current one, then pick the
//! smallest community id, so labels depend only on the graph and the seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Minimum modularity gain for a move to count.
const MIN_GAIN: f64 = 1e-12;
const MAX_PASSES: usize = 100;

#[derive(Debug, Clone)]
pub struct WeightedDigraph {
    n: usize,
    out_adj: Vec<BTreeMap<usize, f64>>,
    in_adj: Vec<BTreeMap<usize, f64>>,
}

impl WeightedDigraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            out_adj: vec![BTreeMap::new(); n],
            in_adj: vec![BTreeMap::new(); n],
        }
    }

    /// Adds `weight` to edge `u -> v`. Non-positive weights are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) {
        if !(weight > 0.0) {
            return;
        }
        *self.out_adj[u].entry(v).or_insert(0.0) += weight;
        *self.in_adj[v].entry(u).or_insert(0.0) += weight;
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    fn out_degree(&self, u: usize) -> f64 {
        self.out_adj[u].values().sum()
    }

    fn in_degree(&self, u: usize) -> f64 {
        self.in_adj[u].values().sum()
    }

    fn total_weight(&self) -> f64 {
        (0..self.n).map(|u| self.out_degree(u)).sum()
    }

    fn aggregate(&self, labels: &[usize], n_comms: usize) -> WeightedDigraph {
        let mut g = WeightedDigraph::new(n_comms);
        for u in 0..self.n {
            for (&v, &w) in &self.out_adj[u] {
                g.add_edge(labels[u], labels[v], w);
            }
        }
        g
    }
}

/// Directed modularity of `labels` on `graph`.
pub fn directed_modularity(graph: &WeightedDigraph, labels: &[usize]) -> f64 {
    let m = graph.total_weight();
    if m == 0.0 {
        return 0.0;
    }
    let mut internal = 0.0;
    let mut out_tot: BTreeMap<usize, f64> = BTreeMap::new();
    let mut in_tot: BTreeMap<usize, f64> = BTreeMap::new();
    for u in 0..graph.n {
        for (&v, &w) in &graph.out_adj[u] {
            if labels[u] == labels[v] {
                internal += w;
            }
        }
        *out_tot.entry(labels[u]).or_insert(0.0) += graph.out_degree(u);
        *in_tot.entry(labels[u]).or_insert(0.0) += graph.in_degree(u);
    }
    let expected: f64 = out_tot.iter().map(|(c, o)| o * in_tot[c]).sum();
    internal / m - expected / (m * m)
}

/// One round of local moves; returns the relabelled partition (dense ids) and
/// whether anything moved.
fn local_moves(graph: &WeightedDigraph, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = graph.n;
    let m = graph.total_weight();
    let mut comm: Vec<usize> = (0..n).collect();
    if m == 0.0 {
        return (comm, false);
    }
    let k_out: Vec<f64> = (0..n).map(|u| graph.out_degree(u)).collect();
    let k_in: Vec<f64> = (0..n).map(|u| graph.in_degree(u)).collect();
    let mut tot_out = k_out.clone();
    let mut tot_in = k_in.clone();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut any_move = false;
    for _ in 0..MAX_PASSES {
        let mut moved = false;
        for &u in &order {
            let current = comm[u];
            tot_out[current] -= k_out[u];
            tot_in[current] -= k_in[u];

            let mut links: BTreeMap<usize, f64> = BTreeMap::new();
            links.insert(current, 0.0);
            for (&v, &w) in graph.out_adj[u].iter().chain(graph.in_adj[u].iter()) {
                if v != u {
                    *links.entry(comm[v]).or_insert(0.0) += w;
                }
            }
            let gain = |c: usize, w: f64| w / m - (k_out[u] * tot_in[c] + k_in[u] * tot_out[c]) / (m * m);

            let mut best = current;
            let mut best_gain = gain(current, links[&current]);
            for (&c, &w) in &links {
                let g = gain(c, w);
                if g > best_gain + MIN_GAIN {
                    best = c;
                    best_gain = g;
                }
            }

            tot_out[best] += k_out[u];
            tot_in[best] += k_in[u];
            if best != current {
                comm[u] = best;
                moved = true;
                any_move = true;
            }
        }
        if !moved {
            break;
        }
    }
    (canonical_labels(&comm), any_move)
}

/// Relabels communities 0, 1, ... in order of first appearance.
fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Community label per node, numbered by first appearance in node order.
/// Isolated nodes end up as singletons.
pub fn detect_communities_graph(graph: &WeightedDigraph, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..graph.n).collect();
    let mut level = graph.clone();
    loop {
        let (level_labels, moved) = local_moves(&level, &mut rng);
        if !moved {
            break;
        }
        for l in labels.iter_mut() {
            *l = level_labels[*l];
        }
        let n_comms = level_labels.iter().max().map_or(0, |m| m + 1);
        level = level.aggregate(&level_labels, n_comms);
    }
    canonical_labels(&labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(g: &mut WeightedDigraph, centre: usize, leaves: &[usize]) {
        for &l in leaves {
            g.add_edge(centre, l, 1.0);
        }
    }

    #[test]
    fn disconnected_stars_are_two_clusters() {
        let mut g = WeightedDigraph::new(6);
        star(&mut g, 0, &[1, 2]);
        star(&mut g, 3, &[4, 5]);
        for seed in 0..10 {
            let l = detect_communities_graph(&g, seed);
            assert_eq!(l, vec![0, 0, 0, 1, 1, 1], "seed {seed}");
        }
    }

    #[test]
    fn complete_uniform_graph_is_one_cluster() {
        let n = 7;
        let mut g = WeightedDigraph::new(n);
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    g.add_edge(u, v, 1.0);
                }
            }
        }
        for seed in 0..5 {
            assert!(detect_communities_graph(&g, seed).iter().all(|&l| l == 0));
        }
    }

    #[test]
    fn isolated_nodes_are_singletons() {
        let mut g = WeightedDigraph::new(4);
        g.add_edge(0, 1, 2.0);
        g.add_edge(1, 0, 1.0);
        let l = detect_communities_graph(&g, 3);
        assert_eq!(l, vec![0, 0, 1, 2]);
    }

    #[test]
    fn modularity_of_trivial_partitions() {
        let mut g = WeightedDigraph::new(4);
        g.add_edge(0, 1, 1.0);
        g.add_edge(2, 3, 1.0);
        // one community: sum_ij A_ij/m - (m*m)/m^2 = 1 - 1 = 0
        assert!(directed_modularity(&g, &[0, 0, 0, 0]).abs() < 1e-15);
        // two pairs: 1 - (1*1 + 1*1)/4 = 0.5
        assert!((directed_modularity(&g, &[0, 0, 1, 1]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn local_moves_never_lower_modularity() {
        let mut g = WeightedDigraph::new(8);
        let edges = [(0, 1, 3.0), (1, 2, 1.0), (2, 0, 2.0), (3, 4, 1.0), (4, 5, 2.0), (5, 3, 1.0), (2, 3, 0.2), (6, 7, 1.0), (7, 0, 0.1)];
        for (u, v, w) in edges {
            g.add_edge(u, v, w);
        }
        let singletons: Vec<usize> = (0..8).collect();
        let l = detect_communities_graph(&g, 11);
        assert!(directed_modularity(&g, &l) >= directed_modularity(&g, &singletons));
    }
}
