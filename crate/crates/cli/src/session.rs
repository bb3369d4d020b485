use std::fs;
use std::path::Path;

use agora::agents::consumer_demand;
use agora::market::{
    run_session, AgentAllocation, CycleRecord, Economy, EquilibriumReport, Role, SessionConfig,
};
use agora::oracle::ExchangeEconomy;
use agora::scenario::{ModelChoice, Scenario};
use agora::transport::{MarketConfig, TransportOutcome};
use anyhow::{Context, Result};
use serde::Serialize;

use crate::RunArgs;

/// An economy ready to run, in whichever form the model needs.
pub enum Built {
    Transport(Box<MarketConfig>),
    Exchange(Economy, ExchangeEconomy),
}

impl Built {
    fn economy(&self) -> &Economy {
        match self {
            Self::Transport(c) => &c.economy,
            Self::Exchange(e, _) => e,
        }
    }
}

pub struct Prepared {
    pub model: ModelChoice,
    pub cfg: SessionConfig,
    pub built: Built,
}

/// Reads the scenario and folds the command-line overrides into it.
pub fn prepare(args: &RunArgs) -> Result<Prepared> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("cannot read {}", args.input.display()))?;
    let scenario = Scenario::parse(&text).with_context(|| format!("{}", args.input.display()))?;
    let model = args.model.unwrap_or_else(|| scenario.default_model());
    let mut cfg = scenario.session;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.tolerance {
        cfg.tolerance = t;
    }
    if let Some(m) = args.max_cycles {
        cfg.max_cycles = m;
    }
    if let Some(s) = args.scheduler {
        cfg.scheduler = s;
    }
    cfg.validate()?;
    let built = match model {
        ModelChoice::Transport(m) => Built::Transport(Box::new(scenario.transport(m)?)),
        ModelChoice::Exchange => {
            let (e, o) = scenario.exchange()?;
            Built::Exchange(e, o)
        }
    };
    Ok(Prepared { model, cfg, built })
}

#[derive(Debug, Clone, Serialize)]
pub struct PostedPrice {
    pub good: String,
    pub price: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetCheck {
    pub consumer: String,
    /// |p.x - w| / w at the final prices.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub model: String,
    pub seed: u64,
    pub scheduler: String,
    pub tolerance: f64,
    pub converged: bool,
    pub cycles_used: u32,
    pub bids_processed: u64,
    pub non_clearing: Vec<String>,
    pub prices: Vec<PostedPrice>,
    pub agents: Vec<AgentAllocation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transport: Option<TransportOutcome>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub budget: Vec<BudgetCheck>,
    pub trace: Vec<CycleRecord>,
}

pub struct Outcome {
    pub report: EquilibriumReport,
    pub summary: RunReport,
}

fn budget_checks(oracle: &ExchangeEconomy, report: &EquilibriumReport) -> Vec<BudgetCheck> {
    let producers: f64 = report
        .agents
        .iter()
        .filter(|a| a.role == Role::Producer)
        .map(|a| a.profit)
        .sum();
    let income = producers / oracle.consumers.len().max(1) as f64;
    report
        .agents
        .iter()
        .filter(|a| a.role == Role::Consumer)
        .zip(&oracle.consumers)
        .map(|(a, spec)| {
            let prices: Vec<f64> = spec.goods.iter().map(|g| report.prices[g.0]).collect();
            let relative_residual = match consumer_demand(spec, &prices, income) {
                Ok(x) => {
                    let w = spec.wealth(&prices, income);
                    let spend: f64 = x.iter().zip(&prices).map(|(q, p)| q * p).sum();
                    (spend - w).abs() / w.abs().max(f64::MIN_POSITIVE)
                }
                Err(_) => f64::INFINITY,
            };
            BudgetCheck {
                consumer: a.name.clone(),
                relative_residual,
            }
        })
        .collect()
}

pub fn execute(p: &Prepared) -> Result<Outcome> {
    let report = run_session(p.built.economy().clone(), p.cfg)?;
    let (transport, budget) = match &p.built {
        Built::Transport(c) => (Some(TransportOutcome::from_report(c, &report)), Vec::new()),
        Built::Exchange(_, o) => (None, budget_checks(o, &report)),
    };
    let summary = RunReport {
        model: p.model.to_string(),
        seed: p.cfg.seed,
        scheduler: p.cfg.scheduler.to_string(),
        tolerance: p.cfg.tolerance,
        converged: report.converged,
        cycles_used: report.cycles_used,
        bids_processed: report.bids_processed,
        non_clearing: report.non_clearing.clone(),
        prices: report
            .goods
            .iter()
            .zip(&report.prices)
            .zip(&report.excess)
            .map(|((g, p), z)| PostedPrice {
                good: g.clone(),
                price: *p,
                excess: *z,
            })
            .collect(),
        agents: report.agents.clone(),
        transport,
        budget,
        trace: report.trace.clone(),
    };
    Ok(Outcome { report, summary })
}

pub fn write_trace(path: &Path, report: &EquilibriumReport) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["cycle", "event", "good", "price", "excess", "agent"])?;
    for e in &report.events {
        w.write_record([
            e.cycle.to_string(),
            e.event.as_str().to_string(),
            e.good.clone(),
            e.price.to_string(),
            e.excess.to_string(),
            e.agent.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report(path: &Path, summary: &RunReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn print_summary(s: &RunReport) {
    say!(
        "model {} seed {} {}: {} after {} cycles",
        s.model,
        s.seed,
        s.scheduler,
        if s.converged {
            "converged"
        } else {
            "not converged"
        },
        s.cycles_used
    );
    for p in &s.prices {
        say!(
            "  {:<10} price {:>12.4}  excess {:>10.2e}",
            p.good,
            p.price,
            p.excess
        );
    }
    if let Some(t) = &s.transport {
        say!(
            "  total cost {:.2}  shipper expense {:.2}  carrier profit {:.2}",
            t.total_cost,
            t.shipper_expense,
            t.carrier_profit
        );
    }
    for w in &s.budget {
        say!(
            "  {} budget residual {:.1e}",
            w.consumer,
            w.relative_residual
        );
    }
    if !s.non_clearing.is_empty() {
        say!("  non-clearing: {}", s.non_clearing.join(", "));
    }
}

pub fn run_command(args: &RunArgs) -> Result<bool> {
    let prepared = prepare(args)?;
    let out = execute(&prepared)?;
    if let Some(path) = &args.trace {
        write_trace(path, &out.report)?;
    }
    if let Some(path) = &args.report {
        write_report(path, &out.summary)?;
    }
    print_summary(&out.summary);
    Ok(out.summary.converged)
}
