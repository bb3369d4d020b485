use serde::Serialize;

use crate::agents::{consumer_demand, ConsumerSpec, ProducerSpec};
use crate::error::AgentError;
use crate::market::log_grid;

/// A closed economy of consumers and (optionally) single-input producers
/// whose profits are split evenly among the consumers. Bundles and prices
/// are dense vectors over `goods` goods; every consumer spec must list
/// goods `0..goods` in order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeEconomy {
    pub goods: usize,
    pub consumers: Vec<ConsumerSpec>,
    pub producers: Vec<ProducerSpec>,
}

impl ExchangeEconomy {
    pub fn new(goods: usize, consumers: Vec<ConsumerSpec>) -> Self {
        Self {
            goods,
            consumers,
            producers: Vec::new(),
        }
    }

    /// Aggregate demand minus aggregate endowment (net of production).
    pub fn excess_demand(&self, prices: &[f64]) -> Result<Vec<f64>, AgentError> {
        let mut z = vec![0.0; self.goods];
        let mut profit = 0.0;
        for p in &self.producers {
            let (po, pi) = (prices[p.output.0], prices[p.input.0]);
            let y = p.optimal_output(po, pi);
            z[p.output.0] -= y;
            z[p.input.0] += p.cost(y);
            profit += p.profit(po, pi, y);
        }
        let share = if self.consumers.is_empty() {
            0.0
        } else {
            profit / self.consumers.len() as f64
        };
        for c in &self.consumers {
            let x = consumer_demand(c, prices, share)?;
            for (j, (xj, ej)) in x.iter().zip(&c.endowment).enumerate() {
                z[j] += xj - ej;
            }
        }
        Ok(z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TatonnementResult {
    pub prices: Vec<f64>,
    pub excess: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Classic price adjustment `p <- p + alpha z(p)` with good 0 fixed at 1.
/// Stops once every non-numéraire |excess| is below `tol`; runs that
/// exhaust `max_iters` or leave the positive orthant are reported with
/// `converged = false`.
pub fn tatonnement(
    economy: &ExchangeEconomy,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> Result<TatonnementResult, AgentError> {
    let mut p = vec![1.0; economy.goods];
    let mut z = economy.excess_demand(&p)?;
    for it in 0..max_iters {
        if z.iter().skip(1).all(|v| v.abs() < tol) {
            return Ok(TatonnementResult {
                prices: p,
                excess: z,
                iterations: it,
                converged: true,
            });
        }
        for j in 1..p.len() {
            p[j] += alpha * z[j];
        }
        if p.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Ok(TatonnementResult {
                prices: p,
                excess: z,
                iterations: it + 1,
                converged: false,
            });
        }
        z = economy.excess_demand(&p)?;
    }
    let converged = z.iter().skip(1).all(|v| v.abs() < tol);
    Ok(TatonnementResult {
        prices: p,
        excess: z,
        iterations: max_iters,
        converged,
    })
}

/// Scans `p2 / p1` over `grid_n` log-spaced ratios in `[lo, hi]` and returns
/// the one with the smallest |excess demand for good 2|.
pub fn exchange_bruteforce(
    economy: &ExchangeEconomy,
    grid_n: usize,
    lo: f64,
    hi: f64,
) -> Result<f64, AgentError> {
    if economy.goods != 2 {
        return Err(AgentError::Dimension {
            expected: 2,
            got: economy.goods,
        });
    }
    let mut best = (f64::INFINITY, lo);
    for r in log_grid(lo, hi, grid_n) {
        let z = economy.excess_demand(&[1.0, r])?[1].abs();
        if z < best.0 {
            best = (z, r);
        }
    }
    Ok(best.1)
}
