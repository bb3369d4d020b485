use agora::oracle::{exchange_bruteforce, solve_se, solve_ue, tatonnement, FlowSolution};
use agora::scenario::ModelChoice;
use agora::transport::{link_label, MarketConfig, Model, TransportOutcome};
use anyhow::{anyhow, Result};

use crate::session::{execute, prepare, write_report, write_trace, Built, Outcome, Prepared};
use crate::RunArgs;

/// Relative slack allowed on `expense - profit - total cost`.
const IDENTITY_TOL: f64 = 0.01;

struct Column {
    total_cost: f64,
    expense: f64,
    profit: f64,
    prices: Vec<f64>,
    flows: Vec<f64>,
}

impl Column {
    fn market(t: &TransportOutcome) -> Self {
        Self {
            total_cost: t.total_cost,
            expense: t.shipper_expense,
            profit: t.carrier_profit,
            prices: t.link_prices.clone(),
            flows: t.link_flows.clone(),
        }
    }

    fn oracle(s: &FlowSolution) -> Self {
        let expense: f64 = s.prices.iter().zip(&s.link_flows).map(|(p, x)| p * x).sum();
        Self {
            total_cost: s.total_cost,
            expense,
            profit: expense - s.total_cost,
            prices: s.prices.clone(),
            flows: s.link_flows.clone(),
        }
    }

    fn gap(&self) -> f64 {
        self.expense - self.profit - self.total_cost
    }
}

fn identity_holds(c: &Column) -> bool {
    c.gap().abs() <= IDENTITY_TOL * c.total_cost.abs().max(1.0)
}

fn run_seeds(p: &Prepared, first: u64, seeds: u64) -> Result<Vec<Outcome>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (first..first + seeds.max(1))
            .map(|seed| {
                scope.spawn(move || {
                    let mut cfg = p.cfg;
                    cfg.seed = seed;
                    let one = Prepared {
                        model: p.model,
                        cfg,
                        built: match &p.built {
                            Built::Transport(c) => Built::Transport(c.clone()),
                            Built::Exchange(e, o) => Built::Exchange(e.clone(), o.clone()),
                        },
                    };
                    execute(&one)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().map_err(|_| anyhow!("session thread panicked"))?)
            .collect()
    })
}

fn transport_table(config: &MarketConfig, model: Model, outcomes: &[Outcome]) -> Result<bool> {
    let net = &config.network;
    let se = solve_se(net, &config.requirements, 1e-9)?;
    let ue = solve_ue(net, &config.requirements, 1e-9)?;
    let (se_col, ue_col) = (Column::oracle(&se), Column::oracle(&ue));
    let (reference, ref_name) = if model == Model::Basic {
        (&ue_col, "UE")
    } else {
        (&se_col, "SE")
    };
    let mut ok = true;
    for o in outcomes {
        let t = o.summary.transport.as_ref().expect("transport run");
        let m = Column::market(t);
        let holds = identity_holds(&m);
        ok &= o.summary.converged && holds;
        say!(
            "seed {:>4}: {:<13} cycles {:>5}  total cost {:>9.2} ({:+.2}% vs {ref_name})  identity gap {:+.3}{}",
            o.summary.seed,
            if o.summary.converged { "converged" } else { "not converged" },
            o.summary.cycles_used,
            m.total_cost,
            100.0 * (m.total_cost - reference.total_cost) / reference.total_cost,
            m.gap(),
            if holds { "" } else { "  IDENTITY FAILS" },
        );
    }
    let market = Column::market(
        outcomes[0]
            .summary
            .transport
            .as_ref()
            .expect("transport run"),
    );
    say!();
    say!(
        "{:<18} {:>10} {:>10} {:>10}",
        format!("seed {}", outcomes[0].summary.seed),
        "market",
        "SE",
        "UE"
    );
    let row = |name: &str, f: &dyn Fn(&Column) -> f64| {
        say!(
            "{:<18} {:>10.2} {:>10.2} {:>10.2}",
            name,
            f(&market),
            f(&se_col),
            f(&ue_col)
        );
    };
    row("total cost", &|c| c.total_cost);
    row("shipper expense", &|c| c.expense);
    row("carrier profit", &|c| c.profit);
    row("identity gap", &|c| c.gap());
    for (i, l) in net.links().iter().enumerate() {
        row(&format!("price {}", link_label(l.from, l.to)), &|c| {
            c.prices[i]
        });
    }
    for (i, l) in net.links().iter().enumerate() {
        row(&format!("flow {}", link_label(l.from, l.to)), &|c| {
            c.flows[i]
        });
    }
    Ok(ok)
}

fn exchange_table(p: &Prepared, outcomes: &[Outcome]) -> Result<bool> {
    let Built::Exchange(_, oracle) = &p.built else {
        unreachable!("exchange model builds an exchange economy")
    };
    let t = tatonnement(oracle, 0.05, 1e-9, 1_000_000)?;
    let brute = if oracle.goods == 2 {
        Some(exchange_bruteforce(oracle, 4001, 1e-3, 1e3)?)
    } else {
        None
    };
    let mut ok = true;
    for o in outcomes {
        let worst = o
            .summary
            .budget
            .iter()
            .map(|w| w.relative_residual)
            .fold(0.0, f64::max);
        ok &= o.summary.converged;
        say!(
            "seed {:>4}: {:<13} cycles {:>5}  worst budget residual {:.1e}",
            o.summary.seed,
            if o.summary.converged {
                "converged"
            } else {
                "not converged"
            },
            o.summary.cycles_used,
            worst
        );
    }
    let prices = &outcomes[0].report.prices;
    say!();
    say!(
        "{:<10} {:>12} {:>12} {:>12}",
        "good",
        "market",
        if t.converged {
            "tatonnement"
        } else {
            "tat. (flag)"
        },
        "grid"
    );
    for (j, label) in outcomes[0].report.goods.iter().enumerate() {
        let grid = match (j, brute) {
            (0, Some(_)) => "1".to_string(),
            (1, Some(r)) => format!("{r:.6}"),
            _ => "-".to_string(),
        };
        say!(
            "{:<10} {:>12.6} {:>12.6} {:>12}",
            label,
            prices[j] / prices[0],
            t.prices[j],
            grid
        );
    }
    Ok(ok)
}

pub fn compare_command(args: &RunArgs, seeds: u64) -> Result<bool> {
    let prepared = prepare(args)?;
    let first = prepared.cfg.seed;
    let outcomes = run_seeds(&prepared, first, seeds)?;
    if let Some(path) = &args.trace {
        write_trace(path, &outcomes[0].report)?;
    }
    if let Some(path) = &args.report {
        write_report(path, &outcomes[0].summary)?;
    }
    match (&prepared.built, prepared.model) {
        (Built::Transport(config), ModelChoice::Transport(model)) => {
            transport_table(config, model, &outcomes)
        }
        _ => exchange_table(&prepared, &outcomes),
    }
}
