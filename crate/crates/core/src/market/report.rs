use serde::{Deserialize, Serialize};

use super::Role;

/// One sample of the price history, taken at every cycle boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: u32,
    pub prices: Vec<f64>,
    /// Quantity bought in each market at the posted price.
    pub volumes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Bid,
    Clear,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bid => "bid",
            Self::Clear => "clear",
        }
    }
}

/// A single protocol event, as written to the trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub cycle: u32,
    pub event: TraceKind,
    pub good: String,
    pub price: f64,
    pub excess: f64,
    pub agent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentAllocation {
    pub name: String,
    pub role: Role,
    /// Net quantity per subscribed good at the final prices (supply < 0).
    pub holdings: Vec<(String, f64)>,
    /// Value of everything bought, in numéraire units.
    pub expenditure: f64,
    pub profit: f64,
}

impl AgentAllocation {
    pub fn holding(&self, good: &str) -> f64 {
        self.holdings
            .iter()
            .find(|(g, _)| g == good)
            .map_or(0.0, |(_, q)| *q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub converged: bool,
    pub cycles_used: u32,
    pub bids_processed: u64,
    pub goods: Vec<String>,
    pub prices: Vec<f64>,
    /// Aggregate excess demand per good at the final prices.
    pub excess: Vec<f64>,
    /// Goods whose last clearing found no zero crossing.
    pub non_clearing: Vec<String>,
    pub agents: Vec<AgentAllocation>,
    pub trace: Vec<CycleRecord>,
    pub events: Vec<TraceEvent>,
}

impl EquilibriumReport {
    pub fn good_index(&self, label: &str) -> Option<usize> {
        self.goods.iter().position(|g| g == label)
    }

    pub fn price(&self, label: &str) -> Option<f64> {
        self.good_index(label).map(|i| self.prices[i])
    }

    pub fn agent(&self, name: &str) -> Option<&AgentAllocation> {
        self.agents.iter().find(|a| a.name == name)
    }

    pub fn total_expenditure(&self, role: Role) -> f64 {
        self.agents
            .iter()
            .filter(|a| a.role == role)
            .map(|a| a.expenditure)
            .sum()
    }

    pub fn total_profit(&self) -> f64 {
        self.agents.iter().map(|a| a.profit).sum()
    }
}
