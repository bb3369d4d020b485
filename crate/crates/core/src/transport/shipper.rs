//! Shippers: agents that must move a fixed amount of cargo from an origin to
//! a destination and buy transport capacity to do it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{max_flow, potential_flow_increase, threshold_price, Network, Requirement};
use crate::market::{log_grid, Agent, DemandCurve, GoodId, PriceBoard, Role};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShipperParams {
    /// Units of the resource good each shipper starts with.
    pub endowment: f64,
    /// Price span (resource units) over which a link bid moves by half the
    /// requirement; sets the slope of the bid around its anchor.
    pub ramp_width: f64,
    /// Cap each link bid by what parallel holdings leave undelivered.
    pub cap_by_holdings: bool,
    /// Highest price a bid needs to describe.
    pub price_max: f64,
}

impl Default for ShipperParams {
    fn default() -> Self {
        Self {
            endowment: 1000.0,
            ramp_width: 5.0,
            cap_by_holdings: true,
            price_max: 1e6,
        }
    }
}

/// What a shipper owns and owes. `holdings` is indexed by link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShipperState {
    pub requirement: Requirement,
    pub endowment: f64,
    pub holdings: Vec<f64>,
    pub profit_income: f64,
}

impl ShipperState {
    pub fn new(requirement: Requirement, endowment: f64, links: usize) -> Self {
        Self {
            requirement,
            endowment,
            holdings: vec![0.0; links],
            profit_income: 0.0,
        }
    }

    pub fn wealth(&self, resource_price: f64) -> f64 {
        self.endowment * resource_price + self.profit_income
    }

    /// Spend committed on every link except `skip`.
    pub fn committed_spend(&self, prices: &[f64], skip: Option<usize>) -> f64 {
        self.holdings
            .iter()
            .zip(prices)
            .enumerate()
            .filter(|(i, (h, _))| Some(*i) != skip && **h > 0.0)
            .map(|(_, (h, p))| h * p)
            .sum()
    }

    /// Income not tied up in bids other than the one for `skip`.
    pub fn uncommitted_income(
        &self,
        prices: &[f64],
        resource_price: f64,
        skip: Option<usize>,
    ) -> f64 {
        self.wealth(resource_price) - self.committed_spend(prices, skip)
    }

    /// What new bids may spend: the endowment's value less commitments.
    /// Profit income is revised every cycle, so it is never pledged.
    pub fn budget(&self, prices: &[f64], resource_price: f64, skip: Option<usize>) -> f64 {
        self.endowment * resource_price - self.committed_spend(prices, skip)
    }

    /// Cargo the holdings can deliver, up to the requirement.
    pub fn delivered(&self, network: &Network) -> f64 {
        let r = &self.requirement;
        max_flow(network, &self.holdings, r.origin, r.destination).min(r.amount)
    }
}

/// Applies a budget to a desired-quantity schedule: the bid never asks for
/// more than `income / p` at any price it covers, including between its
/// points.
fn budgeted(
    desired: impl Fn(f64) -> f64,
    mut prices: Vec<f64>,
    income: f64,
    top: f64,
) -> DemandCurve {
    const GRID: usize = 32;
    if !(income > 0.0) {
        return DemandCurve::zero();
    }
    let peak = desired(0.0);
    if !(peak > 0.0) {
        return DemandCurve::zero();
    }
    // A chord between two points of q = c I / p spanning a price ratio r
    // rises at most (1 + r)^2 / 4r above the curve; shrink c to absorb that.
    // The grid starts at scale * knee with scale >= 1/2, so its ratio is at
    // most the one computed from knee / 2.
    let knee = income / peak;
    let mut scale = 1.0;
    if knee < top {
        let ratio = (2.0 * top / knee).powf(1.0 / (GRID - 1) as f64);
        scale = 4.0 * ratio / ((1.0 + ratio) * (1.0 + ratio));
        prices.extend(log_grid(scale * knee, top, GRID));
    }
    prices.push(0.0);
    prices.retain(|p| p.is_finite() && *p >= 0.0 && *p <= top);
    prices.sort_by(f64::total_cmp);
    prices.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let samples: Vec<(f64, f64)> = prices
        .iter()
        .map(|&p| {
            let limit = if p > 0.0 {
                scale * income / p
            } else {
                f64::INFINITY
            };
            (p, desired(p).min(limit).max(0.0))
        })
        .collect();
    DemandCurve::from_samples_envelope(&samples)
}

/// Bid for capacity on `link`, holding every other link price fixed.
///
/// The shipper would put its whole requirement on the link while the link's
/// price is below its threshold price and none of it above; the bid smooths
/// that step into a linear ramp of half-width `ramp_width` around the
/// threshold. Quantities are capped by what the shipper's parallel holdings
/// leave undelivered and by its uncommitted income.
pub fn shipper_bid(
    state: &ShipperState,
    network: &Network,
    link_prices: &[f64],
    resource_price: f64,
    link: usize,
    params: &ShipperParams,
) -> DemandCurve {
    let r = &state.requirement;
    let income = state.budget(link_prices, resource_price, Some(link));
    if !(income > 0.0) {
        return DemandCurve::zero();
    }
    let mut probe = link_prices.to_vec();
    probe[link] = 0.0;
    if super::shortest_distance(network, &probe, r.origin, r.destination).is_none() {
        return DemandCurve::zero();
    }
    probe[link] = f64::INFINITY;
    let alternative = super::shortest_distance(network, &probe, r.origin, r.destination);
    let on_some_path = match alternative {
        None => true,
        Some(_) => super::links_on_paths(network, r).contains(&link),
    };
    if !on_some_path {
        return DemandCurve::zero();
    }
    let tau = threshold_price(network, link_prices, r, link);
    let cap = if params.cap_by_holdings {
        let mut without = state.holdings.clone();
        without[link] = 0.0;
        (r.amount - max_flow(network, &without, r.origin, r.destination)).clamp(0.0, r.amount)
    } else {
        r.amount
    };
    if cap <= 0.0 {
        return DemandCurve::zero();
    }
    // Anchor: at the threshold price, exactly the capacity that complements
    // current holdings on the other links of its paths.
    let anchor = {
        let mut without = state.holdings.clone();
        without[link] = 0.0;
        potential_flow_increase(network, &without, r, link, r.amount).min(cap)
    };
    let w = params.ramp_width.max(1e-9);
    let slope = r.amount / (2.0 * w);
    let desired = move |p: f64| {
        if tau.is_infinite() {
            return cap;
        }
        (anchor + (tau - p) * slope).clamp(0.0, cap)
    };
    let mut breaks = Vec::new();
    if tau.is_finite() {
        breaks.extend([tau - (cap - anchor) / slope, tau + anchor / slope]);
    }
    budgeted(desired, breaks, income, params.price_max)
}

/// Bid on an origin-destination good: the whole requirement up to the price
/// at which it exhausts the shipper's wealth, then whatever wealth buys.
pub fn shipper_direct_bid(wealth: f64, requirement: &Requirement, price_max: f64) -> DemandCurve {
    let amount = requirement.amount;
    budgeted(move |_| amount, Vec::new(), wealth, price_max)
}

#[derive(Debug, Clone)]
enum Market {
    Links {
        goods: Vec<Option<GoodId>>,
        subscribed: Vec<usize>,
    },
    Direct {
        good: GoodId,
        holding: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Shipper {
    name: String,
    network: Arc<Network>,
    state: ShipperState,
    params: ShipperParams,
    resource: GoodId,
    trade_resource: bool,
    market: Market,
}

impl Shipper {
    /// A shipper buying link capacity. `link_goods[i]` is the good for link
    /// `i`; it subscribes to every link on some simple path.
    pub fn on_links(
        name: impl Into<String>,
        network: Arc<Network>,
        requirement: Requirement,
        link_goods: Vec<Option<GoodId>>,
        resource: GoodId,
        params: ShipperParams,
    ) -> Self {
        let subscribed = super::links_on_paths(&network, &requirement)
            .into_iter()
            .filter(|&l| link_goods[l].is_some())
            .collect();
        Self {
            name: name.into(),
            state: ShipperState::new(requirement, params.endowment, network.links().len()),
            network,
            params,
            resource,
            trade_resource: false,
            market: Market::Links {
                goods: link_goods,
                subscribed,
            },
        }
    }

    /// A shipper buying delivery directly on its origin-destination good.
    pub fn direct(
        name: impl Into<String>,
        network: Arc<Network>,
        requirement: Requirement,
        good: GoodId,
        resource: GoodId,
        params: ShipperParams,
    ) -> Self {
        Self {
            name: name.into(),
            state: ShipperState::new(requirement, params.endowment, network.links().len()),
            network,
            params,
            resource,
            trade_resource: false,
            market: Market::Direct { good, holding: 0.0 },
        }
    }

    /// Also re-bid on the resource good when other prices move.
    pub fn trading_resource(mut self, yes: bool) -> Self {
        self.trade_resource = yes;
        self
    }

    pub fn state(&self) -> &ShipperState {
        &self.state
    }

    pub fn requirement(&self) -> &Requirement {
        &self.state.requirement
    }

    fn link_prices(&self, goods: &[Option<GoodId>], board: &PriceBoard) -> Vec<f64> {
        goods
            .iter()
            .map(|g| g.map_or(f64::INFINITY, |g| board.price(g)))
            .collect()
    }

    fn spend(&self, board: &PriceBoard) -> f64 {
        match &self.market {
            Market::Links { goods, .. } => {
                let p = self.link_prices(goods, board);
                self.state
                    .holdings
                    .iter()
                    .zip(&p)
                    .filter(|(h, _)| **h > 0.0)
                    .map(|(h, p)| h * p)
                    .sum()
            }
            Market::Direct { good, holding } => holding * board.price(*good),
        }
    }
}

impl Agent for Shipper {
    fn name(&self) -> &str {
        &self.name
    }

    fn role(&self) -> Role {
        Role::Shipper
    }

    fn goods(&self) -> Vec<GoodId> {
        let mut out: Vec<GoodId> = match &self.market {
            Market::Links { goods, subscribed } => {
                subscribed.iter().filter_map(|&l| goods[l]).collect()
            }
            Market::Direct { good, .. } => vec![*good],
        };
        out.push(self.resource);
        out
    }

    fn bid(&self, good: GoodId, prices: &PriceBoard) -> DemandCurve {
        let p0 = prices.price(self.resource);
        if good == self.resource {
            return DemandCurve::constant(self.state.profit_income - self.spend(prices));
        }
        match &self.market {
            Market::Links { goods, .. } => {
                let Some(link) = goods.iter().position(|g| *g == Some(good)) else {
                    return DemandCurve::zero();
                };
                let p = self.link_prices(goods, prices);
                shipper_bid(&self.state, &self.network, &p, p0, link, &self.params)
            }
            Market::Direct { good: own, .. } if *own == good => shipper_direct_bid(
                self.state.endowment * p0,
                &self.state.requirement,
                self.params.price_max,
            ),
            Market::Direct { .. } => DemandCurve::zero(),
        }
    }

    fn settle(&mut self, good: GoodId, _price: f64, quantity: f64) {
        match &mut self.market {
            Market::Links { goods, .. } => {
                if let Some(link) = goods.iter().position(|g| *g == Some(good)) {
                    self.state.holdings[link] = quantity.max(0.0);
                }
            }
            Market::Direct { good: own, holding } => {
                if *own == good {
                    *holding = quantity.max(0.0);
                }
            }
        }
    }

    fn affected_by(&self, changed: GoodId) -> Vec<GoodId> {
        self.goods()
            .into_iter()
            .filter(|g| *g != changed && (self.trade_resource || *g != self.resource))
            .collect()
    }

    fn set_profit_income(&mut self, income: f64) {
        self.state.profit_income = income;
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}
