//! Utility-maximizing consumers with closed-form demands.

use serde::{Deserialize, Serialize};

use crate::error::AgentError;
use crate::market::{log_grid, Agent, DemandCurve, GoodId, PriceBoard, Role};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Utility {
    /// `u(x) = prod x_j^{a_j}` with `sum a_j = 1`.
    CobbDouglas { weights: Vec<f64> },
    /// `u(x) = (sum a_j x_j^r)^{1/r}` with `r = (sigma - 1) / sigma`.
    Ces { weights: Vec<f64>, sigma: f64 },
}

impl Utility {
    pub fn weights(&self) -> &[f64] {
        match self {
            Self::CobbDouglas { weights } | Self::Ces { weights, .. } => weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumerSpec {
    /// Goods in the consumer's utility domain; `endowment` and the utility
    /// weights are indexed the same way.
    pub goods: Vec<GoodId>,
    pub endowment: Vec<f64>,
    pub utility: Utility,
}

impl ConsumerSpec {
    pub fn validate(&self) -> Result<(), AgentError> {
        let n = self.goods.len();
        let w = self.utility.weights();
        if w.len() != n {
            return Err(AgentError::Dimension {
                expected: n,
                got: w.len(),
            });
        }
        if self.endowment.len() != n {
            return Err(AgentError::Dimension {
                expected: n,
                got: self.endowment.len(),
            });
        }
        if w.iter().any(|&a| !(a > 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(AgentError::BadWeights);
        }
        if self.endowment.iter().any(|&e| !(e >= 0.0)) {
            return Err(AgentError::BadWeights);
        }
        if let Utility::Ces { sigma, .. } = self.utility {
            if !(sigma > 0.0) || (sigma - 1.0).abs() < 1e-12 {
                return Err(AgentError::BadElasticity(sigma));
            }
        }
        Ok(())
    }

    pub fn wealth(&self, prices: &[f64], profit_income: f64) -> f64 {
        dot(prices, &self.endowment) + profit_income
    }

    pub fn utility_of(&self, bundle: &[f64]) -> f64 {
        match &self.utility {
            Utility::CobbDouglas { weights } => weights
                .iter()
                .zip(bundle)
                .map(|(a, x)| x.powf(*a))
                .product(),
            Utility::Ces { weights, sigma } => {
                let r = (sigma - 1.0) / sigma;
                let s: f64 = weights.iter().zip(bundle).map(|(a, x)| a * x.powf(r)).sum();
                s.powf(1.0 / r)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Utility-maximizing bundle at `prices` (aligned with `spec.goods`) given
/// endowment wealth plus `profit_income`. The budget always binds.
pub fn consumer_demand(
    spec: &ConsumerSpec,
    prices: &[f64],
    profit_income: f64,
) -> Result<Vec<f64>, AgentError> {
    spec.validate()?;
    if prices.len() != spec.goods.len() {
        return Err(AgentError::Dimension {
            expected: spec.goods.len(),
            got: prices.len(),
        });
    }
    for (g, &p) in spec.goods.iter().zip(prices) {
        if !(p > 0.0) {
            return Err(AgentError::NonPositivePrice {
                good: g.0,
                price: p,
            });
        }
    }
    let wealth = spec.wealth(prices, profit_income);
    let bundle = match &spec.utility {
        Utility::CobbDouglas { weights } => weights
            .iter()
            .zip(prices)
            .map(|(a, p)| a * wealth / p)
            .collect(),
        Utility::Ces { weights, sigma } => {
            let denom: f64 = weights
                .iter()
                .zip(prices)
                .map(|(a, p)| a.powf(*sigma) * p.powf(1.0 - sigma))
                .sum();
            weights
                .iter()
                .zip(prices)
                .map(|(a, p)| (a / p).powf(*sigma) * wealth / denom)
                .collect()
        }
    };
    Ok(bundle)
}

/// Net-demand bid (demand minus endowment) for the good at `index`,
/// sampled over 32 log-spaced prices spanning a factor of 16 either side of
/// the posted price, the posted price itself, and a coarse tail out to a
/// factor of 4096 so far-off clearing prices still see the right sign.
pub fn consumer_bid(
    spec: &ConsumerSpec,
    prices: &[f64],
    index: usize,
    profit_income: f64,
) -> Result<DemandCurve, AgentError> {
    let posted = prices[index];
    if !(posted > 0.0) {
        return Err(AgentError::NonPositivePrice {
            good: spec.goods[index].0,
            price: posted,
        });
    }
    let mut grid = log_grid(posted / 16.0, posted * 16.0, 32);
    grid.push(posted);
    grid.extend(
        log_grid(posted / 4096.0, posted * 4096.0, 13)
            .into_iter()
            .filter(|p| (p / posted).ln().abs() > 16f64.ln() * 1.01),
    );
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut trial = prices.to_vec();
    let mut samples = Vec::with_capacity(grid.len());
    for p in grid {
        trial[index] = p;
        let x = consumer_demand(spec, &trial, profit_income)?;
        samples.push((p, x[index] - spec.endowment[index]));
    }
    let scale = samples.iter().map(|s| s.1.abs()).fold(1.0, f64::max);
    if samples.windows(2).any(|w| w[1].1 > w[0].1 + 1e-12 * scale) {
        return Err(AgentError::NonMonotone {
            good: spec.goods[index].0,
        });
    }
    Ok(DemandCurve::from_samples_envelope(&samples))
}

#[derive(Debug, Clone)]
pub struct Consumer {
    name: String,
    spec: ConsumerSpec,
    profit_income: f64,
}

impl Consumer {
    pub fn new(name: impl Into<String>, spec: ConsumerSpec) -> Result<Self, AgentError> {
        spec.validate()?;
        Ok(Self {
            name: name.into(),
            spec,
            profit_income: 0.0,
        })
    }

    pub fn spec(&self) -> &ConsumerSpec {
        &self.spec
    }

    fn local_prices(&self, board: &PriceBoard) -> Vec<f64> {
        self.spec.goods.iter().map(|g| board.price(*g)).collect()
    }
}

impl Agent for Consumer {
    fn name(&self) -> &str {
        &self.name
    }

    fn role(&self) -> Role {
        Role::Consumer
    }

    fn goods(&self) -> Vec<GoodId> {
        self.spec.goods.clone()
    }

    fn bid(&self, good: GoodId, prices: &PriceBoard) -> DemandCurve {
        let Some(index) = self.spec.goods.iter().position(|g| *g == good) else {
            return DemandCurve::zero();
        };
        let local = self.local_prices(prices);
        match consumer_bid(&self.spec, &local, index, self.profit_income) {
            Ok(c) => c,
            // Outside gross substitutes the sampled bid can bend back; bid
            // its monotone envelope instead.
            Err(AgentError::NonMonotone { .. }) => {
                let posted = local[index];
                let mut trial = local.clone();
                let samples: Vec<(f64, f64)> = log_grid(posted / 16.0, posted * 16.0, 32)
                    .into_iter()
                    .filter_map(|p| {
                        trial[index] = p;
                        consumer_demand(&self.spec, &trial, self.profit_income)
                            .ok()
                            .map(|x| (p, x[index] - self.spec.endowment[index]))
                    })
                    .collect();
                DemandCurve::from_samples_envelope(&samples)
            }
            Err(_) => DemandCurve::zero(),
        }
    }

    /// Wealth moves with every price, and the bid on the changed good is
    /// resampled around its new price.
    fn affected_by(&self, _changed: GoodId) -> Vec<GoodId> {
        self.spec.goods.clone()
    }

    fn set_profit_income(&mut self, income: f64) {
        self.profit_income = income;
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cd(weights: &[f64], endowment: &[f64]) -> ConsumerSpec {
        ConsumerSpec {
            goods: (0..weights.len()).map(GoodId).collect(),
            endowment: endowment.to_vec(),
            utility: Utility::CobbDouglas {
                weights: weights.to_vec(),
            },
        }
    }

    #[test]
    fn symmetric_cobb_douglas_keeps_endowment() {
        let x = consumer_demand(&cd(&[0.5, 0.5], &[1.0, 1.0]), &[1.0, 1.0], 0.0).unwrap();
        assert_relative_eq!(x[0], 1.0);
        assert_relative_eq!(x[1], 1.0);
    }

    #[test]
    fn asymmetric_cobb_douglas() {
        let x = consumer_demand(&cd(&[0.75, 0.25], &[2.0, 0.0]), &[1.0, 2.0], 0.0).unwrap();
        assert_relative_eq!(x[0], 1.5, epsilon = 1e-12);
        assert_relative_eq!(x[1], 0.25, epsilon = 1e-12);
        assert_relative_eq!(x[0] * 1.0 + x[1] * 2.0, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ces_closed_form() {
        let spec = ConsumerSpec {
            goods: vec![GoodId(0), GoodId(1)],
            endowment: vec![1.0, 1.0],
            utility: Utility::Ces {
                weights: vec![0.5, 0.5],
                sigma: 2.0,
            },
        };
        let x = consumer_demand(&spec, &[1.0, 4.0], 0.0).unwrap();
        assert_relative_eq!(x[0], 4.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn zero_price_is_an_error() {
        let err = consumer_demand(&cd(&[0.5, 0.5], &[1.0, 1.0]), &[0.0, 1.0], 0.0).unwrap_err();
        assert!(matches!(err, AgentError::NonPositivePrice { good: 0, .. }));
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(
            cd(&[0.6, 0.6], &[1.0, 1.0]).validate(),
            Err(AgentError::BadWeights)
        );
        assert_eq!(
            cd(&[1.2, -0.2], &[1.0, 1.0]).validate(),
            Err(AgentError::BadWeights)
        );
        let ces = ConsumerSpec {
            goods: vec![GoodId(0), GoodId(1)],
            endowment: vec![1.0, 1.0],
            utility: Utility::Ces {
                weights: vec![0.5, 0.5],
                sigma: 1.0,
            },
        };
        assert_eq!(ces.validate(), Err(AgentError::BadElasticity(1.0)));
    }

    #[test]
    fn bid_matches_demand_and_is_monotone() {
        let spec = cd(&[0.5, 0.5], &[1.0, 1.0]);
        let at_one = consumer_bid(&spec, &[1.0, 1.0], 0, 0.0).unwrap();
        // Net demand zero means gross demand equals the endowment of 1.
        assert_relative_eq!(at_one.eval(1.0) + 1.0, 1.0, epsilon = 1e-12);
        let at_two = consumer_bid(&spec, &[2.0, 1.0], 0, 0.0).unwrap();
        assert_relative_eq!(at_two.eval(2.0) + 1.0, 0.75, epsilon = 1e-12);
        assert!(at_one.eval(0.5) >= at_one.eval(1.5));
    }
}
