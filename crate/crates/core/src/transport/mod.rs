//! Congested multicommodity flow as a market economy.
//!
//! Links of a [`Network`] carry cargo at quadratic cost in a resource good.
//! Shippers with fixed [`Requirement`]s buy capacity on links (or on whole
//! origin-destination routes); [`build_config`] assembles the goods and
//! agents for each market structure.

mod builder;
mod graph;
mod network;
mod shipper;

pub use builder::{
    arbitrage_triples, build_config, link_label, path_counts, transitive_closure, BuildOptions,
    MarketConfig, Model, TransportOutcome,
};
pub use graph::{
    links_on_paths, max_flow, potential_flow_increase, shortest_distance, simple_paths,
    threshold_price,
};
pub use network::{link_cost, Link, Network, Requirement};
pub use shipper::{shipper_bid, shipper_direct_bid, Shipper, ShipperParams, ShipperState};
