use serde::Serialize;

use crate::error::TransportError;
use crate::transport::{simple_paths, Network, Requirement};

const MAX_SWEEPS: usize = 200_000;

/// Per-link prices a flow pattern is supported by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pricing {
    /// Marginal cost (system optimum).
    Marginal,
    /// Average cost (user equilibrium).
    Average,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathFlow {
    pub links: Vec<usize>,
    pub flow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSolution {
    pub link_flows: Vec<f64>,
    /// Candidate paths and their flows, one list per requirement.
    pub paths: Vec<Vec<PathFlow>>,
    pub total_cost: f64,
    /// Link prices at the solution flows under `pricing`.
    pub prices: Vec<f64>,
    pub pricing: Pricing,
    pub iterations: usize,
    pub converged: bool,
}

impl FlowSolution {
    /// Largest spread between a used path's cost and the cheapest path of
    /// the same requirement, under the solution's pricing.
    pub fn path_cost_spread(&self) -> f64 {
        self.paths
            .iter()
            .map(|ps| {
                let cost = |p: &PathFlow| p.links.iter().map(|&l| self.prices[l]).sum::<f64>();
                let min = ps.iter().map(cost).fold(f64::INFINITY, f64::min);
                ps.iter()
                    .filter(|p| p.flow > 1e-9)
                    .map(|p| cost(p) - min)
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Flow a requirement sends through `link`.
    pub fn requirement_flow_on(&self, requirement: usize, link: usize) -> f64 {
        self.paths[requirement]
            .iter()
            .filter(|p| p.links.contains(&link))
            .map(|p| p.flow)
            .sum()
    }
}

fn price(network: &Network, pricing: Pricing, link: usize, x: f64) -> f64 {
    let l = network.link(link);
    match pricing {
        Pricing::Marginal => l.marginal_cost(x),
        Pricing::Average => l.average_cost(x),
    }
}

fn slope(network: &Network, pricing: Pricing, link: usize) -> f64 {
    let a = network.link(link).a;
    match pricing {
        Pricing::Marginal => 2.0 * a,
        Pricing::Average => a,
    }
}

struct Assignment {
    paths: Vec<Vec<PathFlow>>,
    flows: Vec<f64>,
}

impl Assignment {
    /// Every requirement on its path with the lowest zero-flow cost.
    fn free_flow(network: &Network, requirements: &[Requirement]) -> Result<Self, TransportError> {
        let mut paths = Vec::new();
        for r in requirements {
            network.check_requirement(r)?;
            let mut ps: Vec<PathFlow> = simple_paths(network, r.origin, r.destination)
                .into_iter()
                .map(|links| PathFlow { links, flow: 0.0 })
                .collect();
            let cheapest = ps
                .iter()
                .enumerate()
                .map(|(i, p)| (i, p.links.iter().map(|&l| network.link(l).b).sum::<f64>()))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i)
                .ok_or(TransportError::Unreachable {
                    origin: r.origin,
                    destination: r.destination,
                })?;
            ps[cheapest].flow = r.amount;
            paths.push(ps);
        }
        Ok(Self::from_paths(network, paths))
    }

    fn from_paths(network: &Network, paths: Vec<Vec<PathFlow>>) -> Self {
        let mut flows = vec![0.0; network.links().len()];
        for ps in &paths {
            for p in ps {
                for &l in &p.links {
                    flows[l] += p.flow;
                }
            }
        }
        Self { paths, flows }
    }

    fn path_cost(&self, network: &Network, pricing: Pricing, p: &PathFlow) -> f64 {
        p.links
            .iter()
            .map(|&l| price(network, pricing, l, self.flows[l]))
            .sum()
    }

    fn shift(&mut self, req: usize, from: usize, to: usize, amount: f64) {
        let ps = &mut self.paths[req];
        ps[from].flow -= amount;
        ps[to].flow += amount;
        for &l in &ps[from].links {
            self.flows[l] -= amount;
        }
        for &l in &ps[to].links {
            self.flows[l] += amount;
        }
    }

    fn solution(
        self,
        network: &Network,
        pricing: Pricing,
        iterations: usize,
        converged: bool,
    ) -> FlowSolution {
        let flows: Vec<f64> = self.flows.iter().map(|x| x.max(0.0)).collect();
        FlowSolution {
            total_cost: network.total_cost(&flows),
            prices: (0..flows.len())
                .map(|l| price(network, pricing, l, flows[l]))
                .collect(),
            link_flows: flows,
            paths: self.paths,
            pricing,
            iterations,
            converged,
        }
    }
}

/// Cost spread of the worst requirement, with the most and least costly
/// path indices per requirement.
fn extremes(
    a: &Assignment,
    network: &Network,
    pricing: Pricing,
    req: usize,
) -> (usize, usize, f64) {
    let ps = &a.paths[req];
    let costs: Vec<f64> = ps
        .iter()
        .map(|p| a.path_cost(network, pricing, p))
        .collect();
    let mut lo = 0;
    let mut hi = usize::MAX;
    for i in 0..ps.len() {
        if costs[i] < costs[lo] {
            lo = i;
        }
        if ps[i].flow > 0.0 && (hi == usize::MAX || costs[i] > costs[hi]) {
            hi = i;
        }
    }
    if hi == usize::MAX {
        return (lo, lo, 0.0);
    }
    (hi, lo, costs[hi] - costs[lo])
}

/// Equalizes path costs by exact line steps between the costliest used
/// path and the cheapest path of each requirement in turn.
fn equalize(
    network: &Network,
    requirements: &[Requirement],
    pricing: Pricing,
    tol: f64,
) -> Result<FlowSolution, TransportError> {
    let mut a = Assignment::free_flow(network, requirements)?;
    for sweep in 0..MAX_SWEEPS {
        let mut worst: f64 = 0.0;
        for req in 0..requirements.len() {
            let (hi, lo, gap) = extremes(&a, network, pricing, req);
            worst = worst.max(gap);
            if gap <= tol * 0.5 || hi == lo {
                continue;
            }
            let (p, q) = (&a.paths[req][hi], &a.paths[req][lo]);
            // links on exactly one of the two paths
            let curvature: f64 = p
                .links
                .iter()
                .filter(|l| !q.links.contains(l))
                .chain(q.links.iter().filter(|l| !p.links.contains(l)))
                .map(|&l| slope(network, pricing, l))
                .sum();
            let step = (gap / curvature).min(p.flow);
            a.shift(req, hi, lo, step);
        }
        if worst <= tol {
            return Ok(a.solution(network, pricing, sweep, true));
        }
    }
    Ok(a.solution(network, pricing, MAX_SWEEPS, false))
}

/// System equilibrium: the flow pattern of least total cost, found by
/// equalizing marginal path costs. Prices are marginal costs.
pub fn solve_se(
    network: &Network,
    requirements: &[Requirement],
    tol: f64,
) -> Result<FlowSolution, TransportError> {
    equalize(network, requirements, Pricing::Marginal, tol)
}

/// User equilibrium: every used path of a requirement has the same
/// average-cost length and no unused path is shorter. Prices are average
/// costs.
pub fn solve_ue(
    network: &Network,
    requirements: &[Requirement],
    tol: f64,
) -> Result<FlowSolution, TransportError> {
    equalize(network, requirements, Pricing::Average, tol)
}

/// Marginal-cost flow deviation from the free-flow assignment.
pub fn flow_deviation(
    network: &Network,
    requirements: &[Requirement],
    step: f64,
    tol: f64,
) -> Result<FlowSolution, TransportError> {
    let start = Assignment::free_flow(network, requirements)?;
    Ok(deviate(network, start, step, tol))
}

/// Marginal-cost flow deviation from given path flows (one list per
/// requirement; flows must sum to each requirement's amount).
pub fn flow_deviation_from(
    network: &Network,
    paths: Vec<Vec<PathFlow>>,
    step: f64,
    tol: f64,
) -> FlowSolution {
    deviate(network, Assignment::from_paths(network, paths), step, tol)
}

/// Every iteration moves flow from each used path toward the cheapest
/// marginal-cost path of its requirement, in proportion to the cost
/// difference. The step halves whenever total cost would rise.
fn deviate(network: &Network, mut a: Assignment, step: f64, tol: f64) -> FlowSolution {
    let pricing = Pricing::Marginal;
    let mut step = step;
    let mut cost = network.total_cost(&a.flows);
    for it in 0..MAX_SWEEPS {
        let mut worst: f64 = 0.0;
        let mut moves = Vec::new();
        for req in 0..a.paths.len() {
            let costs: Vec<f64> = a.paths[req]
                .iter()
                .map(|p| a.path_cost(network, pricing, p))
                .collect();
            let (lo, min) = costs
                .iter()
                .copied()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap_or((0, 0.0));
            for (i, p) in a.paths[req].iter().enumerate() {
                if i != lo && p.flow > 0.0 {
                    let gap = costs[i] - min;
                    worst = worst.max(gap);
                    moves.push((req, i, lo, (step * gap).min(p.flow)));
                }
            }
        }
        if worst <= tol {
            return a.solution(network, pricing, it, true);
        }
        let saved = (a.paths.clone(), a.flows.clone());
        for &(req, from, to, amount) in &moves {
            a.shift(req, from, to, amount);
        }
        let next = network.total_cost(&a.flows);
        if next > cost {
            a.paths = saved.0;
            a.flows = saved.1;
            step *= 0.5;
            if step < 1e-15 {
                return a.solution(network, pricing, it, false);
            }
        } else {
            cost = next;
        }
    }
    a.solution(network, pricing, MAX_SWEEPS, false)
}
