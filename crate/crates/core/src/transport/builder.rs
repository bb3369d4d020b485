use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{simple_paths, Network, Requirement, Shipper, ShipperParams};
use crate::agents::{Arbitrageur, ArbitrageurSpec, Producer, ProducerSpec};
use crate::error::TransportError;
use crate::market::{
    AgentId, DemandCurve, Economy, EquilibriumReport, Good, GoodId, ProfitShare, Role,
};

/// Which market structure to build around the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Shippers buy link capacity priced at average cost.
    Basic,
    /// Each link is run by a profit-maximizing carrier; shippers own the
    /// carriers and pay marginal-cost prices.
    Carriers,
    /// Carriers plus middlemen that assemble multi-link routes; shippers buy
    /// their origin-destination good directly.
    Arbitrageurs,
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(Self::Basic),
            "carriers" => Ok(Self::Carriers),
            "arbitrageurs" => Ok(Self::Arbitrageurs),
            other => Err(format!("unknown model `{other}`")),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Basic => "basic",
            Self::Carriers => "carriers",
            Self::Arbitrageurs => "arbitrageurs",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub shipper: ShipperParams,
    /// Activity change per unit margin for arbitrageurs.
    pub arbitrage_step: f64,
    /// Trade the resource good in its own auction instead of fixing its
    /// price at 1.
    pub trade_resource: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            shipper: ShipperParams::default(),
            arbitrage_step: 0.05,
            trade_resource: false,
        }
    }
}

/// A transport economy ready to run, with the bookkeeping needed to read
/// flows and costs back out of a report.
#[derive(Debug, Clone)]
pub struct MarketConfig {
    pub model: Model,
    pub network: Arc<Network>,
    pub requirements: Vec<Requirement>,
    pub economy: Economy,
    pub resource: GoodId,
    /// Good for each link, by link index.
    pub link_goods: Vec<GoodId>,
    /// Goods for ordered location pairs (links included); only populated
    /// in the arbitrageur model beyond the links themselves.
    pub pair_goods: BTreeMap<(u32, u32), GoodId>,
    pub shippers: Vec<AgentId>,
    pub carriers: Vec<AgentId>,
    pub arbitrageurs: Vec<AgentId>,
}

pub fn link_label(from: u32, to: u32) -> String {
    format!("G_{from}_{to}")
}

/// Locations reachable from `from` without passing through `avoid`.
fn reachable_avoiding(network: &Network, from: u32, avoid: Option<u32>) -> Vec<u32> {
    let mut seen = vec![from];
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        for l in network.links() {
            if l.from == u && Some(l.to) != avoid && !seen.contains(&l.to) {
                seen.push(l.to);
                stack.push(l.to);
            }
        }
    }
    seen.retain(|&v| v != from);
    seen.sort_unstable();
    seen
}

/// Arbitrage triples `(i, j, k)`: link `i -> j` exists and `k` can be
/// reached from `j` without visiting `i`.
pub fn arbitrage_triples(network: &Network) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for l in network.links() {
        for k in reachable_avoiding(network, l.to, Some(l.from)) {
            if k != l.from && k != l.to {
                out.push((l.from, l.to, k));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Ordered pairs `(u, v)` with `v` reachable from `u`.
pub fn transitive_closure(network: &Network) -> Vec<(u32, u32)> {
    network
        .locations()
        .iter()
        .flat_map(|&u| {
            reachable_avoiding(network, u, None)
                .into_iter()
                .map(move |v| (u, v))
        })
        .collect()
}

pub fn build_config(
    network: &Network,
    requirements: &[Requirement],
    model: Model,
    options: &BuildOptions,
) -> Result<MarketConfig, TransportError> {
    for r in requirements {
        network.check_requirement(r)?;
    }
    let net = Arc::new(network.clone());
    let mut economy = Economy::new();
    let resource = economy.add_good(if options.trade_resource {
        Good::new("G_0")
    } else {
        Good::numeraire("G_0")
    });
    let top = options.shipper.price_max;
    let mut pair_goods = BTreeMap::new();
    let mut link_goods = Vec::new();
    for l in network.links() {
        let mut good = Good::new(link_label(l.from, l.to));
        if model == Model::Basic {
            // Average-cost supply: the link delivers x once its price covers
            // a x + b.
            good.reserve = Some(
                DemandCurve::new(vec![(0.0, 0.0), (l.b, 0.0), (top, -(top - l.b) / l.a)])
                    .expect("average-cost schedule is monotone"),
            );
        }
        let id = economy.add_good(good);
        link_goods.push(id);
        pair_goods.insert((l.from, l.to), id);
    }
    if model == Model::Arbitrageurs {
        for (u, v) in transitive_closure(network) {
            pair_goods
                .entry((u, v))
                .or_insert_with(|| economy.add_good(Good::new(link_label(u, v))));
        }
    }

    let mut shippers = Vec::new();
    for r in requirements {
        let name = format!("S_{}_{}", r.origin, r.destination);
        let shipper = if model == Model::Arbitrageurs {
            Shipper::direct(
                name,
                net.clone(),
                *r,
                pair_goods[&(r.origin, r.destination)],
                resource,
                options.shipper,
            )
        } else {
            Shipper::on_links(
                name,
                net.clone(),
                *r,
                link_goods.iter().map(|g| Some(*g)).collect(),
                resource,
                options.shipper,
            )
        };
        shippers
            .push(economy.add_agent(Box::new(shipper.trading_resource(options.trade_resource))));
    }

    let mut carriers = Vec::new();
    if model != Model::Basic {
        for (i, l) in network.links().iter().enumerate() {
            let spec = ProducerSpec {
                output: link_goods[i],
                input: resource,
                a: l.a,
                b: l.b,
            };
            let carrier = Producer::new(format!("C_{}_{}", l.from, l.to), spec)
                .map_err(|_| TransportError::BadCost {
                    from: l.from,
                    to: l.to,
                    a: l.a,
                    b: l.b,
                })?
                .with_price_range(1e-6, top);
            carriers.push(economy.add_agent(Box::new(carrier)));
        }
        // carrier profits go to the shippers in equal shares
        let fraction = 1.0 / shippers.len().max(1) as f64;
        for &c in &carriers {
            for &s in &shippers {
                economy.profit_shares.push(ProfitShare {
                    producer: c,
                    recipient: s,
                    fraction,
                });
            }
        }
    }

    let mut arbitrageurs = Vec::new();
    if model == Model::Arbitrageurs {
        for (i, j, k) in arbitrage_triples(network) {
            let spec = ArbitrageurSpec {
                step: options.arbitrage_step,
                ..ArbitrageurSpec::new(
                    pair_goods[&(i, k)],
                    [pair_goods[&(i, j)], pair_goods[&(j, k)]],
                )
            };
            let a = Arbitrageur::new(format!("A_{i}_{j}_{k}"), spec);
            arbitrageurs.push(economy.add_agent(Box::new(a)));
        }
    }

    Ok(MarketConfig {
        model,
        network: net,
        requirements: requirements.to_vec(),
        economy,
        resource,
        link_goods,
        pair_goods,
        shippers,
        carriers,
        arbitrageurs,
    })
}

/// Link flows, costs and payments read back from a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportOutcome {
    /// Flow on each link (by link index): total capacity bought.
    pub link_flows: Vec<f64>,
    pub link_prices: Vec<f64>,
    pub total_cost: f64,
    pub shipper_expense: f64,
    pub carrier_profit: f64,
    /// Per shipper, capacity held on each link (zero in the arbitrageur
    /// model, where shippers hold only their route good).
    pub shipper_flows: Vec<Vec<f64>>,
}

impl TransportOutcome {
    pub fn from_report(config: &MarketConfig, report: &EquilibriumReport) -> Self {
        let net = &config.network;
        let labels: Vec<String> = net
            .links()
            .iter()
            .map(|l| link_label(l.from, l.to))
            .collect();
        // Carriers supply exactly what crosses the link; without them the
        // buyers' holdings are the flow.
        let link_flows: Vec<f64> = labels
            .iter()
            .map(|lab| {
                if config.carriers.is_empty() {
                    report.agents.iter().map(|a| a.holding(lab).max(0.0)).sum()
                } else {
                    config
                        .carriers
                        .iter()
                        .map(|c| (-report.agents[c.0].holding(lab)).max(0.0))
                        .sum()
                }
            })
            .collect();
        let link_prices = labels
            .iter()
            .map(|lab| report.price(lab).unwrap_or(0.0))
            .collect();
        let shipper_flows = config
            .shippers
            .iter()
            .map(|s| {
                let a = &report.agents[s.0];
                labels.iter().map(|lab| a.holding(lab).max(0.0)).collect()
            })
            .collect();
        Self {
            total_cost: net.total_cost(&link_flows),
            link_flows,
            link_prices,
            shipper_expense: report.total_expenditure(Role::Shipper),
            carrier_profit: report
                .agents
                .iter()
                .filter(|a| a.role == Role::Producer)
                .map(|a| a.profit)
                .sum(),
            shipper_flows,
        }
    }

    /// `expense - profit - total cost`, zero when payments account for the
    /// whole cost of transport.
    pub fn accounting_gap(&self) -> f64 {
        self.shipper_expense - self.carrier_profit - self.total_cost
    }
}

/// Number of simple paths per requirement, handy for sizing checks.
pub fn path_counts(network: &Network, requirements: &[Requirement]) -> Vec<usize> {
    requirements
        .iter()
        .map(|r| simple_paths(network, r.origin, r.destination).len())
        .collect()
}
