//! Decentralized price formation.
//!
//! Every good has an [`Auction`]. Agents submit [`DemandCurve`] bids to the
//! auctions of the goods they care about, each computed as if all other
//! prices stayed at their posted values. An auction clears by locating the
//! zero crossing of aggregate demand and posts the result on the
//! [`PriceBoard`]; agents subscribed to that good then queue fresh bid tasks
//! for whichever of their bids depended on the price. The [`Market`] session
//! repeats this until every auction clears and every agenda is empty.

mod auction;
mod board;
mod curve;
mod report;
mod session;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use auction::{Auction, Clearing};
pub use board::PriceBoard;
pub use curve::{log_grid, DemandCurve, MAX_POINTS};
pub use report::{AgentAllocation, CycleRecord, EquilibriumReport, TraceEvent, TraceKind};
pub use session::{check_equilibrium, run_session, AgendaItem, EquilibriumCheck, Market};

use crate::error::MarketError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GoodId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId(pub usize);

impl fmt::Display for GoodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Consumer,
    Producer,
    Shipper,
    Arbitrageur,
}

/// A competitive, price-taking participant.
///
/// Implementations must be pure functions of their own state and the posted
/// prices; they never see other agents.
pub trait Agent: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    fn role(&self) -> Role;

    /// Goods this agent bids on, in a stable order.
    fn goods(&self) -> Vec<GoodId>;

    /// Bid for `good`, holding every other price at its posted value.
    fn bid(&self, good: GoodId, prices: &PriceBoard) -> DemandCurve;

    /// Called after an auction this agent bid in clears; `quantity` is the
    /// agent's own curve evaluated at the clearing price.
    fn settle(&mut self, _good: GoodId, _price: f64, _quantity: f64) {}

    /// Goods whose bids must be recomputed after the price of `changed`
    /// moves. Defaults to every other subscribed good.
    fn affected_by(&self, changed: GoodId) -> Vec<GoodId> {
        self.goods().into_iter().filter(|g| *g != changed).collect()
    }

    /// Current profit at posted prices (producers only).
    fn profit(&self, _prices: &PriceBoard) -> f64 {
        0.0
    }

    /// Replaces the agent's income from profit shares.
    fn set_profit_income(&mut self, _income: f64) {}

    fn clone_box(&self) -> Box<dyn Agent>;
}

impl Clone for Box<dyn Agent> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Good {
    pub label: String,
    /// The numéraire's price is pinned; its market clears by Walras' law.
    pub numeraire: bool,
    /// Per-good override of the session's price bracket.
    pub bounds: Option<(f64, f64)>,
    /// Standing curve the auction always includes (for example an
    /// average-cost supply schedule).
    pub reserve: Option<DemandCurve>,
}

impl Good {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            numeraire: false,
            bounds: None,
            reserve: None,
        }
    }

    pub fn numeraire(label: impl Into<String>) -> Self {
        Self {
            numeraire: true,
            ..Self::new(label)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitShare {
    pub producer: AgentId,
    pub recipient: AgentId,
    pub fraction: f64,
}

/// Goods, agents and ownership shares of a computational economy.
#[derive(Debug, Clone, Default)]
pub struct Economy {
    pub goods: Vec<Good>,
    pub agents: Vec<Box<dyn Agent>>,
    pub profit_shares: Vec<ProfitShare>,
}

impl Economy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_good(&mut self, good: Good) -> GoodId {
        self.goods.push(good);
        GoodId(self.goods.len() - 1)
    }

    pub fn add_agent(&mut self, agent: Box<dyn Agent>) -> AgentId {
        self.agents.push(agent);
        AgentId(self.agents.len() - 1)
    }

    pub fn good_by_label(&self, label: &str) -> Option<GoodId> {
        self.goods.iter().position(|g| g.label == label).map(GoodId)
    }

    pub fn agent_by_name(&self, name: &str) -> Option<AgentId> {
        self.agents
            .iter()
            .position(|a| a.name() == name)
            .map(AgentId)
    }

    pub fn numeraire(&self) -> Option<GoodId> {
        self.goods.iter().position(|g| g.numeraire).map(GoodId)
    }

    /// Agents subscribed to each good.
    pub fn subscribers(&self) -> Result<Vec<Vec<AgentId>>, MarketError> {
        let mut subs = vec![Vec::new(); self.goods.len()];
        for (i, agent) in self.agents.iter().enumerate() {
            for g in agent.goods() {
                let slot = subs
                    .get_mut(g.0)
                    .ok_or_else(|| MarketError::DanglingSubscription {
                        agent: agent.name().to_string(),
                        good: g.0,
                    })?;
                slot.push(AgentId(i));
            }
        }
        Ok(subs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    /// Pending bid tasks and dirty auctions are drawn uniformly at random.
    Randomized,
    /// Every pending task is bid against the same prices, then every dirty
    /// auction clears.
    Synchronous,
}

impl std::str::FromStr for Scheduler {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "randomized" | "random" => Ok(Self::Randomized),
            "synchronous" | "sync" => Ok(Self::Synchronous),
            other => Err(format!("unknown scheduler `{other}`")),
        }
    }
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Randomized => "randomized",
            Self::Synchronous => "synchronous",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Largest |excess demand| (quantity units) a cleared market may carry.
    pub tolerance: f64,
    pub price_min: f64,
    pub price_max: f64,
    pub max_cycles: u32,
    pub seed: u64,
    pub scheduler: Scheduler,
    /// Relative price move below which subscribers are not notified.
    pub price_tolerance: f64,
    /// Price every good starts at.
    pub initial_price: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            price_min: 1e-6,
            price_max: 1e6,
            max_cycles: 2000,
            seed: 0,
            scheduler: Scheduler::Randomized,
            price_tolerance: 1e-7,
            initial_price: 1.0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), MarketError> {
        if !(self.tolerance > 0.0) {
            return Err(MarketError::InvalidTolerance(self.tolerance));
        }
        if !(self.price_min >= 0.0 && self.price_min < self.price_max && self.price_max.is_finite())
        {
            return Err(MarketError::InvalidBounds {
                lo: self.price_min,
                hi: self.price_max,
            });
        }
        Ok(())
    }
}
