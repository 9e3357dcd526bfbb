use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::community::{detect_communities_graph, WeightedDigraph};
use crate::error::{Error, Result};
use crate::leadlag::{
    estimate_lag, lag_quality_flags, normalize_cumdeaths, normalize_mobility_reduction, IrregularSeries,
    LagConfig, LagEstimate, LagFlag, LagQualityConfig, NormalizedSeries,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadLagEdge {
    /// Region whose internal mobility leads.
    pub origin: String,
    /// Region whose cumulative excess deaths lag.
    pub destination: String,
    pub lag_days: i64,
    /// R² of the shifted simple regression.
    pub weight: f64,
    pub correlation: f64,
    /// Display width, inversely proportional to the lag.
    pub width: f64,
    pub flags: Vec<LagFlag>,
    pub inter_cluster: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedRegion {
    pub region: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadLagNetwork {
    pub nodes: Vec<String>,
    pub edges: Vec<LeadLagEdge>,
    /// Region id to cluster label; empty until communities are detected.
    pub clusters: BTreeMap<String, usize>,
    #[serde(default)]
    pub excluded: Vec<ExcludedRegion>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub lag: LagConfig,
    pub quality: LagQualityConfig,
}

pub fn edge_width(lag_days: i64) -> f64 {
    1.0 / lag_days.abs().max(1) as f64
}

struct Candidate {
    origin: usize,
    destination: usize,
    estimate: LagEstimate,
}

/// Builds the lead-lag graph: every ordered pair `i -> j` (`i != j`) is
/// scored by a lag estimate of region i's mobility reduction against region
/// j's cumulative deaths, and each destination keeps only the origin with the
/// largest shifted correlation (ties: larger R², then smaller origin id).
///
/// Regions whose series cannot be normalised are excluded and listed. A
/// single usable region yields an empty edge set.
pub fn build_network(
    internal_mobility: &BTreeMap<String, IrregularSeries>,
    cumdeaths: &BTreeMap<String, IrregularSeries>,
    config: &NetworkConfig,
) -> Result<LeadLagNetwork> {
    let mut excluded = Vec::new();
    let mut usable: Vec<(String, NormalizedSeries, NormalizedSeries)> = Vec::new();
    let ids: BTreeSet<&String> = internal_mobility.keys().chain(cumdeaths.keys()).collect();
    for id in ids {
        let (Some(m), Some(d)) = (internal_mobility.get(id), cumdeaths.get(id)) else {
            excluded.push(ExcludedRegion {
                region: id.clone(),
                reason: "missing mobility or death series".into(),
            });
            continue;
        };
        match (normalize_mobility_reduction(m), normalize_cumdeaths(d)) {
            (Ok(nm), Ok(nd)) => usable.push((id.clone(), nm, nd)),
            (Err(e), _) | (_, Err(e)) => excluded.push(ExcludedRegion {
                region: id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    if usable.is_empty() {
        return Err(Error::InsufficientData("no region has usable series".into()));
    }

    let pairs: Vec<(usize, usize)> = (0..usable.len())
        .flat_map(|j| (0..usable.len()).filter(move |&i| i != j).map(move |i| (i, j)))
        .collect();
    let candidates: Vec<Candidate> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let est = estimate_lag(&usable[i].1, &usable[j].2, &config.lag).ok()?;
            est.correlation_shifted?;
            Some(Candidate { origin: i, destination: j, estimate: est })
        })
        .collect();

    let mut best: BTreeMap<usize, &Candidate> = BTreeMap::new();
    for c in &candidates {
        let replace = match best.get(&c.destination) {
            None => true,
            Some(b) => prefer(c, b, &usable),
        };
        if replace {
            best.insert(c.destination, c);
        }
    }

    let edges = best
        .values()
        .map(|c| {
            let e = &c.estimate;
            let lag_days = e.theta_hat.round() as i64;
            LeadLagEdge {
                origin: usable[c.origin].0.clone(),
                destination: usable[c.destination].0.clone(),
                lag_days,
                weight: e.r_squared_shifted.unwrap_or(0.0).clamp(0.0, 1.0),
                correlation: e.correlation_shifted.unwrap_or(0.0),
                width: edge_width(lag_days),
                flags: lag_quality_flags(e, &config.quality),
                inter_cluster: false,
            }
        })
        .collect();

    Ok(LeadLagNetwork {
        nodes: usable.into_iter().map(|(id, _, _)| id).collect(),
        edges,
        clusters: BTreeMap::new(),
        excluded,
    })
}

fn prefer(a: &Candidate, b: &Candidate, usable: &[(String, NormalizedSeries, NormalizedSeries)]) -> bool {
    let (ca, cb) = (a.estimate.correlation_shifted.unwrap(), b.estimate.correlation_shifted.unwrap());
    if ca != cb {
        return ca > cb;
    }
    let (wa, wb) = (a.estimate.r_squared_shifted.unwrap_or(0.0), b.estimate.r_squared_shifted.unwrap_or(0.0));
    if wa != wb {
        return wa > wb;
    }
    usable[a.origin].0 < usable[b.origin].0
}

/// Labels every node with a community and marks edges joining two clusters.
/// Nodes are indexed in sorted id order so the result does not depend on the
/// order the network was assembled in.
pub fn detect_communities(network: &LeadLagNetwork, seed: u64) -> LeadLagNetwork {
    let mut nodes = network.nodes.clone();
    nodes.sort();
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut graph = WeightedDigraph::new(nodes.len());
    for e in &network.edges {
        if let (Some(&u), Some(&v)) = (index.get(e.origin.as_str()), index.get(e.destination.as_str())) {
            graph.add_edge(u, v, e.weight);
        }
    }
    let labels = detect_communities_graph(&graph, seed);
    let clusters: BTreeMap<String, usize> = nodes.iter().cloned().zip(labels).collect();
    let edges = network
        .edges
        .iter()
        .map(|e| LeadLagEdge {
            inter_cluster: clusters.get(&e.origin) != clusters.get(&e.destination),
            ..e.clone()
        })
        .collect();
    LeadLagNetwork {
        nodes: network.nodes.clone(),
        edges,
        clusters,
        excluded: network.excluded.clone(),
    }
}

impl LeadLagNetwork {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Plain-text edge list: `origin destination lag weight cluster_o cluster_d`,
    /// `-` for unclustered nodes.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# origin destination lag weight cluster_o cluster_d")?;
        let label = |id: &str| self.clusters.get(id).map_or("-".to_string(), |c| c.to_string());
        for e in &self.edges {
            writeln!(
                w,
                "{} {} {} {} {} {}",
                e.origin,
                e.destination,
                e.lag_days,
                e.weight,
                label(&e.origin),
                label(&e.destination)
            )?;
        }
        Ok(())
    }

    pub fn in_degrees(&self) -> BTreeMap<&str, usize> {
        let mut deg: BTreeMap<&str, usize> = self.nodes.iter().map(|n| (n.as_str(), 0)).collect();
        for e in &self.edges {
            *deg.entry(e.destination.as_str()).or_insert(0) += 1;
        }
        deg
    }
}
