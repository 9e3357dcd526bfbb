//! Directed lead-lag network between regional mobility and regional excess
//! deaths, and its community structure.

mod community;
mod network;

pub use community::{detect_communities_graph, directed_modularity, WeightedDigraph};
pub use network::{
    build_network, detect_communities, edge_width, ExcludedRegion, LeadLagEdge, LeadLagNetwork, NetworkConfig,
};
