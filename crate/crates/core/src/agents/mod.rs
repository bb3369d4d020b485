//! Competitive agent behaviors: consumers, decreasing-returns producers and
//! constant-returns arbitrageurs.

mod arbitrageur;
mod consumer;
mod producer;

pub use arbitrageur::{arbitrageur_step, Arbitrageur, ArbitrageurSpec};
pub use consumer::{consumer_bid, consumer_demand, Consumer, ConsumerSpec, Utility};
pub use producer::{producer_input_demand, producer_supply_curve, Producer, ProducerSpec};
