//! Centralized reference solvers. Nothing in the market engine depends on
//! these; they exist to check it.

mod exchange;
mod flow;

pub use exchange::{exchange_bruteforce, tatonnement, ExchangeEconomy, TatonnementResult};
pub use flow::{
    flow_deviation, flow_deviation_from, solve_se, solve_ue, FlowSolution, PathFlow, Pricing,
};
