use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    AgentAllocation, AgentId, Auction, CycleRecord, Economy, EquilibriumReport, GoodId, PriceBoard,
    Scheduler, SessionConfig, TraceEvent, TraceKind,
};
use crate::error::MarketError;

/// A pending task: `agent` must recompute and submit its bid for `good`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgendaItem {
    pub agent: AgentId,
    pub good: GoodId,
}

/// Result of [`check_equilibrium`].
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCheck {
    pub in_equilibrium: bool,
    /// Excess demand at posted prices for every non-numéraire good.
    pub excess: Vec<(GoodId, f64)>,
    /// `(agent, good, |fresh bid - outstanding bid|)` at posted prices.
    pub agent_residuals: Vec<(AgentId, GoodId, f64)>,
}

impl EquilibriumCheck {
    pub fn excess_of(&self, good: GoodId) -> Option<f64> {
        self.excess
            .iter()
            .find(|(g, _)| *g == good)
            .map(|(_, z)| *z)
    }
}

/// State of one bidding session. The session is the only writer of
/// auctions, agendas and agent state.
#[derive(Debug, Clone)]
pub struct Market {
    economy: Economy,
    cfg: SessionConfig,
    auctions: Vec<Auction>,
    board: PriceBoard,
    agenda: BTreeSet<AgendaItem>,
    dirty: BTreeSet<GoodId>,
    subscribers: Vec<Vec<AgentId>>,
    rng: ChaCha8Rng,
    bids: u64,
    events: Vec<TraceEvent>,
    cycles: Vec<CycleRecord>,
    non_clearing: BTreeSet<GoodId>,
    /// Profit income last paid to each agent.
    incomes: Vec<f64>,
}

impl Market {
    pub fn new(economy: Economy, cfg: SessionConfig) -> Result<Self, MarketError> {
        cfg.validate()?;
        for g in &economy.goods {
            if let Some((lo, hi)) = g.bounds {
                if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
                    return Err(MarketError::InvalidBounds { lo, hi });
                }
            }
        }
        let subscribers = economy.subscribers()?;
        let board = PriceBoard::uniform(economy.goods.len(), cfg.initial_price);
        let auctions = economy
            .goods
            .iter()
            .enumerate()
            .map(|(i, g)| {
                Auction::new(GoodId(i), cfg.initial_price).with_reserve(g.reserve.clone())
            })
            .collect();
        let agenda = economy
            .agents
            .iter()
            .enumerate()
            .flat_map(|(i, a)| {
                a.goods().into_iter().map(move |good| AgendaItem {
                    agent: AgentId(i),
                    good,
                })
            })
            .collect();
        let mut market = Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            economy,
            cfg,
            auctions,
            board,
            agenda,
            dirty: BTreeSet::new(),
            subscribers,
            bids: 0,
            events: Vec::new(),
            cycles: Vec::new(),
            non_clearing: BTreeSet::new(),
            incomes: Vec::new(),
        };
        market.distribute_profits();
        Ok(market)
    }

    pub fn economy(&self) -> &Economy {
        &self.economy
    }

    pub fn economy_mut(&mut self) -> &mut Economy {
        &mut self.economy
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn board(&self) -> &PriceBoard {
        &self.board
    }

    pub fn auction(&self, good: GoodId) -> &Auction {
        &self.auctions[good.0]
    }

    pub fn agenda(&self) -> &BTreeSet<AgendaItem> {
        &self.agenda
    }

    pub fn bids_processed(&self) -> u64 {
        self.bids
    }

    /// Completed bidding cycles: each agent has, on average, processed one
    /// task per cycle.
    pub fn cycles_completed(&self) -> u32 {
        (self.bids / self.agent_count() as u64) as u32
    }

    fn agent_count(&self) -> usize {
        self.economy.agents.len().max(1)
    }

    fn bounds(&self, good: GoodId) -> (f64, f64) {
        self.economy.goods[good.0]
            .bounds
            .unwrap_or((self.cfg.price_min, self.cfg.price_max))
    }

    fn is_numeraire(&self, good: GoodId) -> bool {
        self.economy.goods[good.0].numeraire
    }

    fn label(&self, good: GoodId) -> String {
        self.economy.goods[good.0].label.clone()
    }

    fn check_good(&self, good: GoodId) -> Result<(), MarketError> {
        if good.0 < self.auctions.len() {
            Ok(())
        } else {
            Err(MarketError::UnknownGood(good.0))
        }
    }

    /// Overwrites a posted price without notifying anyone.
    pub fn set_price(&mut self, good: GoodId, price: f64) -> Result<(), MarketError> {
        self.check_good(good)?;
        self.board.post(good, price);
        self.auctions[good.0].posted_price = price;
        Ok(())
    }

    /// Has every agent bid on every subscribed good at the current prices
    /// and settles the bids at those prices, without clearing anything.
    pub fn prime(&mut self) {
        for i in 0..self.economy.agents.len() {
            let agent = AgentId(i);
            for good in self.economy.agents[i].goods() {
                let curve = self.economy.agents[i].bid(good, &self.board);
                let price = self.board.price(good);
                let q = curve.eval(price);
                self.auctions[good.0].submit(agent, curve);
                self.auctions[good.0].dirty = false;
                self.economy.agents[i].settle(good, price, q);
            }
        }
        self.agenda.clear();
        self.dirty.clear();
    }

    /// Posts `price` for `good`. When it differs from the previous posted
    /// price by more than the notification tolerance, every subscriber
    /// queues tasks for the bids the change affects. Returns the tasks that
    /// were newly added.
    pub fn post_price_and_notify(
        &mut self,
        good: GoodId,
        price: f64,
    ) -> Result<Vec<AgendaItem>, MarketError> {
        self.check_good(good)?;
        let old = self.board.price(good);
        self.board.post(good, price);
        self.auctions[good.0].posted_price = price;
        let mut added = Vec::new();
        if (price - old).abs() <= self.cfg.price_tolerance * old.abs().max(1.0) {
            return Ok(added);
        }
        for &agent in &self.subscribers[good.0] {
            for g in self.economy.agents[agent.0].affected_by(good) {
                // The numéraire never clears, so its bids are bookkeeping
                // refreshed once at the end of the run.
                if self.is_numeraire(g) {
                    continue;
                }
                let item = AgendaItem { agent, good: g };
                if self.agenda.insert(item) {
                    added.push(item);
                }
            }
        }
        Ok(added)
    }

    fn process_bid(&mut self, item: AgendaItem) {
        let curve = self.economy.agents[item.agent.0].bid(item.good, &self.board);
        let changed = self.auctions[item.good.0].submit(item.agent, curve);
        if changed && !self.is_numeraire(item.good) {
            self.dirty.insert(item.good);
        }
        self.bids += 1;
        let price = self.board.price(item.good);
        self.events.push(TraceEvent {
            cycle: self.cycles_completed(),
            event: TraceKind::Bid,
            good: self.label(item.good),
            price,
            excess: self.auctions[item.good.0].aggregate_demand(price),
            agent: Some(self.economy.agents[item.agent.0].name().to_string()),
        });
        if self.bids.is_multiple_of(self.agent_count() as u64) {
            self.end_cycle();
        }
    }

    fn clear_good(&mut self, good: GoodId) -> Result<(), MarketError> {
        let (lo, hi) = self.bounds(good);
        let clearing = self.auctions[good.0].clear(lo, hi, self.cfg.tolerance)?;
        if clearing.clears {
            self.non_clearing.remove(&good);
        } else {
            self.non_clearing.insert(good);
        }
        let settlements: Vec<(AgentId, f64)> = self.auctions[good.0]
            .bids()
            .map(|(a, c)| (a, c.eval(clearing.price)))
            .collect();
        for (agent, q) in settlements {
            self.economy.agents[agent.0].settle(good, clearing.price, q);
        }
        self.events.push(TraceEvent {
            cycle: self.cycles_completed(),
            event: TraceKind::Clear,
            good: self.label(good),
            price: clearing.price,
            excess: clearing.excess,
            agent: None,
        });
        self.post_price_and_notify(good, clearing.price)?;
        Ok(())
    }

    fn end_cycle(&mut self) {
        self.distribute_profits();
        let volumes = self.volumes();
        self.cycles.push(CycleRecord {
            cycle: self.cycles_completed(),
            prices: self.board.prices().to_vec(),
            volumes,
        });
    }

    /// Pays each producer's current profit out to its shareholders. A
    /// recipient whose income moved queues fresh bids for its goods.
    fn distribute_profits(&mut self) {
        if self.economy.profit_shares.is_empty() {
            return;
        }
        let first = self.incomes.is_empty();
        let mut income = vec![0.0; self.economy.agents.len()];
        for share in &self.economy.profit_shares {
            // losses stay with the producer
            let profit = self.economy.agents[share.producer.0]
                .profit(&self.board)
                .max(0.0);
            income[share.recipient.0] += share.fraction * profit;
        }
        let recipients: BTreeSet<AgentId> = self
            .economy
            .profit_shares
            .iter()
            .map(|s| s.recipient)
            .collect();
        for r in recipients {
            self.economy.agents[r.0].set_profit_income(income[r.0]);
            let old = if first {
                income[r.0]
            } else {
                self.incomes[r.0]
            };
            if (income[r.0] - old).abs() > self.cfg.price_tolerance * old.abs().max(1.0) {
                for good in self.economy.agents[r.0].goods() {
                    if !self.is_numeraire(good) {
                        self.agenda.insert(AgendaItem { agent: r, good });
                    }
                }
            }
        }
        self.incomes = income;
    }

    fn volumes(&self) -> Vec<f64> {
        self.auctions
            .iter()
            .map(|a| {
                let p = self.board.price(a.good);
                a.bids().map(|(_, c)| c.eval(p).max(0.0)).sum()
            })
            .collect()
    }

    /// Performs one scheduling step: a single randomly drawn bid task or
    /// clearing, or in synchronous mode one full round of bids followed by
    /// every clearing. Returns `false` once nothing is pending or the cycle
    /// budget is spent.
    pub fn step(&mut self) -> Result<bool, MarketError> {
        let max_bids = u64::from(self.cfg.max_cycles) * self.agent_count() as u64;
        if self.bids >= max_bids {
            return Ok(false);
        }
        if self.agenda.is_empty() && self.dirty.is_empty() {
            // Quiet markets may still owe shareholders a changed payout.
            self.distribute_profits();
            if self.agenda.is_empty() {
                return Ok(false);
            }
        }
        match self.cfg.scheduler {
            Scheduler::Randomized => {
                let pending = self.agenda.len() + self.dirty.len();
                let k = self.rng.gen_range(0..pending);
                if k < self.agenda.len() {
                    let item = *self.agenda.iter().nth(k).expect("index within agenda");
                    self.agenda.remove(&item);
                    self.process_bid(item);
                } else {
                    let good = *self
                        .dirty
                        .iter()
                        .nth(k - self.agenda.len())
                        .expect("index within dirty set");
                    self.dirty.remove(&good);
                    self.clear_good(good)?;
                }
            }
            Scheduler::Synchronous => {
                let items: Vec<AgendaItem> = std::mem::take(&mut self.agenda).into_iter().collect();
                let curves: Vec<_> = items
                    .iter()
                    .map(|it| self.economy.agents[it.agent.0].bid(it.good, &self.board))
                    .collect();
                for (item, curve) in items.into_iter().zip(curves) {
                    let changed = self.auctions[item.good.0].submit(item.agent, curve);
                    if changed && !self.is_numeraire(item.good) {
                        self.dirty.insert(item.good);
                    }
                    self.bids += 1;
                    if self.bids.is_multiple_of(self.agent_count() as u64) {
                        self.end_cycle();
                    }
                }
                for good in std::mem::take(&mut self.dirty) {
                    self.clear_good(good)?;
                }
            }
        }
        Ok(true)
    }

    /// Runs the bidding protocol until quiescence or the cycle budget is
    /// spent. Non-convergence is reported, not raised.
    pub fn run(&mut self) -> Result<EquilibriumReport, MarketError> {
        while self.step()? {}
        self.finish();
        Ok(self.report())
    }

    /// Pays out current profits and brings numéraire bids up to date.
    pub fn finish(&mut self) {
        self.distribute_profits();
        self.refresh_numeraire_bids();
    }

    fn refresh_numeraire_bids(&mut self) {
        let Some(g) = self.economy.numeraire() else {
            return;
        };
        for &agent in &self.subscribers[g.0] {
            let curve = self.economy.agents[agent.0].bid(g, &self.board);
            self.auctions[g.0].submit(agent, curve);
        }
        self.auctions[g.0].dirty = false;
    }

    /// Excess demand of every non-numéraire good at posted prices.
    pub fn excess_demands(&self) -> Vec<(GoodId, f64)> {
        self.auctions
            .iter()
            .filter(|a| !self.is_numeraire(a.good))
            .map(|a| (a.good, a.aggregate_demand(self.board.price(a.good))))
            .collect()
    }

    pub fn check_equilibrium(&self) -> EquilibriumCheck {
        let tol = self.cfg.tolerance;
        let excess = self.excess_demands();
        let mut residuals = Vec::new();
        for (i, agent) in self.economy.agents.iter().enumerate() {
            for good in agent.goods() {
                if self.is_numeraire(good) {
                    continue;
                }
                let p = self.board.price(good);
                let fresh = agent.bid(good, &self.board).eval(p);
                let outstanding = self.auctions[good.0]
                    .bid(AgentId(i))
                    .map_or(0.0, |c| c.eval(p));
                residuals.push((AgentId(i), good, (fresh - outstanding).abs()));
            }
        }
        let in_equilibrium = excess.iter().all(|(_, z)| z.abs() <= tol)
            && residuals.iter().all(|(_, _, r)| *r <= tol);
        EquilibriumCheck {
            in_equilibrium,
            excess,
            agent_residuals: residuals,
        }
    }

    fn converged(&self) -> bool {
        self.agenda.is_empty()
            && self.dirty.is_empty()
            && self.non_clearing.is_empty()
            && self
                .excess_demands()
                .iter()
                .all(|(_, z)| z.abs() <= self.cfg.tolerance)
    }

    pub fn report(&self) -> EquilibriumReport {
        let converged = self.converged();
        let agents = self
            .economy
            .agents
            .iter()
            .enumerate()
            .map(|(i, agent)| {
                let mut holdings = Vec::new();
                let mut expenditure = 0.0;
                for good in agent.goods() {
                    let p = self.board.price(good);
                    let q = self.auctions[good.0]
                        .bid(AgentId(i))
                        .map_or(0.0, |c| c.eval(p));
                    if !self.is_numeraire(good) && q > 0.0 {
                        expenditure += p * q;
                    }
                    holdings.push((self.label(good), q));
                }
                AgentAllocation {
                    name: agent.name().to_string(),
                    role: agent.role(),
                    holdings,
                    expenditure,
                    profit: agent.profit(&self.board),
                }
            })
            .collect();
        let excess = self
            .auctions
            .iter()
            .map(|a| a.aggregate_demand(self.board.price(a.good)))
            .collect();
        let bids = self.bids;
        let n = self.agent_count() as u64;
        EquilibriumReport {
            converged,
            cycles_used: bids.div_ceil(n) as u32,
            bids_processed: bids,
            goods: self.economy.goods.iter().map(|g| g.label.clone()).collect(),
            prices: self.board.prices().to_vec(),
            excess,
            non_clearing: self.non_clearing.iter().map(|g| self.label(*g)).collect(),
            agents,
            trace: self.cycles.clone(),
            events: self.events.clone(),
        }
    }
}

/// Runs a fresh session over `economy`.
pub fn run_session(economy: Economy, cfg: SessionConfig) -> Result<EquilibriumReport, MarketError> {
    Market::new(economy, cfg)?.run()
}

/// Market-level and agent-level equilibrium test at the posted prices.
pub fn check_equilibrium(market: &Market) -> EquilibriumCheck {
    market.check_equilibrium()
}
