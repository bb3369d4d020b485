//! Decreasing-returns producers with quadratic input cost.
//!
//! Producing `y` units of output takes `c(y) = a y^2 + b y` units of the
//! input good. At output price `p_out` and input price `p_in` profit
//! `p_out y - p_in c(y)` peaks where price equals marginal cost.

use serde::{Deserialize, Serialize};

use crate::error::AgentError;
use crate::market::{log_grid, Agent, DemandCurve, GoodId, PriceBoard, Role};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProducerSpec {
    pub output: GoodId,
    pub input: GoodId,
    pub a: f64,
    pub b: f64,
}

impl ProducerSpec {
    pub fn validate(&self) -> Result<(), AgentError> {
        if !(self.a >= 0.0 && self.b >= 0.0) {
            return Err(AgentError::NegativeCost);
        }
        if self.a == 0.0 {
            return Err(AgentError::ConstantReturns);
        }
        Ok(())
    }

    pub fn cost(&self, y: f64) -> f64 {
        self.a * y * y + self.b * y
    }

    pub fn marginal_cost(&self, y: f64) -> f64 {
        2.0 * self.a * y + self.b
    }

    /// Profit-maximizing output level.
    pub fn optimal_output(&self, p_out: f64, p_in: f64) -> f64 {
        ((p_out - self.b * p_in) / (2.0 * self.a * p_in)).max(0.0)
    }

    pub fn profit(&self, p_out: f64, p_in: f64, y: f64) -> f64 {
        p_out * y - p_in * self.cost(y)
    }
}

/// Supply of the output good (as negative demand) as a function of its own
/// price with the input price held at `p_in`. The schedule is exactly
/// piecewise linear: zero up to `b p_in`, then slope `1 / (2 a p_in)`.
/// `horizon` is the highest price represented; the curve is flat beyond it.
pub fn producer_supply_curve(
    spec: &ProducerSpec,
    p_in: f64,
    horizon: f64,
) -> Result<DemandCurve, AgentError> {
    spec.validate()?;
    if !(p_in > 0.0) {
        return Err(AgentError::NonPositivePrice {
            good: spec.input.0,
            price: p_in,
        });
    }
    let shutdown = spec.b * p_in;
    let mut points = vec![(0.0, 0.0)];
    if shutdown > 0.0 {
        points.push((shutdown, 0.0));
    }
    if horizon > shutdown {
        points.push((horizon, -spec.optimal_output(horizon, p_in)));
    }
    Ok(DemandCurve::new(points).expect("supply schedule is monotone"))
}

/// Demand for the input good as a function of its own price with the output
/// price held at `p_out`: the input needed to run at the optimal level.
/// Sampled on 32 log-spaced prices around `posted_in` (plus `posted_in` and
/// the shutdown price); grid prices are clamped to at least `price_floor`.
pub fn producer_input_demand(
    spec: &ProducerSpec,
    p_out: f64,
    posted_in: f64,
    price_floor: f64,
) -> Result<DemandCurve, AgentError> {
    spec.validate()?;
    let center = posted_in.max(price_floor).max(f64::MIN_POSITIVE);
    let mut grid = log_grid(center / 16.0, center * 16.0, 32);
    grid.push(center);
    if spec.b > 0.0 {
        let shutdown = p_out / spec.b;
        if shutdown > grid[0] && shutdown < center * 16.0 {
            grid.push(shutdown);
        }
    }
    let mut grid: Vec<f64> = grid.into_iter().map(|p| p.max(price_floor)).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let samples: Vec<(f64, f64)> = grid
        .into_iter()
        .map(|p| (p, spec.cost(spec.optimal_output(p_out, p))))
        .collect();
    Ok(DemandCurve::from_samples_envelope(&samples))
}

/// A single-output, single-input decreasing-returns producer (a carrier in
/// the transport economy).
#[derive(Debug, Clone)]
pub struct Producer {
    name: String,
    spec: ProducerSpec,
    horizon: f64,
    price_floor: f64,
    output: f64,
}

impl Producer {
    pub fn new(name: impl Into<String>, spec: ProducerSpec) -> Result<Self, AgentError> {
        spec.validate()?;
        Ok(Self {
            name: name.into(),
            spec,
            horizon: 1e6,
            price_floor: 1e-6,
            output: 0.0,
        })
    }

    /// Price range the bids must cover.
    pub fn with_price_range(mut self, floor: f64, horizon: f64) -> Self {
        self.price_floor = floor;
        self.horizon = horizon;
        self
    }

    pub fn spec(&self) -> &ProducerSpec {
        &self.spec
    }

    /// Output committed at the last clearing of the output auction.
    pub fn output(&self) -> f64 {
        self.output
    }
}

impl Agent for Producer {
    fn name(&self) -> &str {
        &self.name
    }

    fn role(&self) -> Role {
        Role::Producer
    }

    fn goods(&self) -> Vec<GoodId> {
        vec![self.spec.output, self.spec.input]
    }

    fn bid(&self, good: GoodId, prices: &PriceBoard) -> DemandCurve {
        let curve = if good == self.spec.output {
            producer_supply_curve(&self.spec, prices.price(self.spec.input), self.horizon)
        } else if good == self.spec.input {
            producer_input_demand(
                &self.spec,
                prices.price(self.spec.output),
                prices.price(self.spec.input),
                self.price_floor,
            )
        } else {
            Ok(DemandCurve::zero())
        };
        curve.unwrap_or_else(|_| DemandCurve::zero())
    }

    fn settle(&mut self, good: GoodId, _price: f64, quantity: f64) {
        if good == self.spec.output {
            self.output = (-quantity).max(0.0);
        }
    }

    fn affected_by(&self, changed: GoodId) -> Vec<GoodId> {
        // The supply bid is parametrized by the input price and the input
        // bid by the output price.
        if changed == self.spec.input {
            vec![self.spec.output, self.spec.input]
        } else if changed == self.spec.output {
            vec![self.spec.input]
        } else {
            Vec::new()
        }
    }

    fn profit(&self, prices: &PriceBoard) -> f64 {
        self.spec.profit(
            prices.price(self.spec.output),
            prices.price(self.spec.input),
            self.output,
        )
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}
