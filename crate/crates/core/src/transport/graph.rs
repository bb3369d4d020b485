//! Shortest paths, maximum flow and simple-path enumeration over a
//! [`Network`] with per-link weights or capacities.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::{Network, Requirement};

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra distance from `origin` to `destination`. Weights must be
/// nonnegative; an infinite weight removes the link. `None` when
/// unreachable.
pub fn shortest_distance(
    network: &Network,
    weights: &[f64],
    origin: u32,
    destination: u32,
) -> Option<f64> {
    let s = network.node(origin)?;
    let t = network.node(destination)?;
    let n = network.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut adj = vec![Vec::new(); n];
    for (i, l) in network.links().iter().enumerate() {
        if weights[i].is_finite() {
            adj[network.node(l.from)?].push((network.node(l.to)?, weights[i]));
        }
    }
    dist[s] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Frontier(0.0, s));
    while let Some(Frontier(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == t {
            return Some(d);
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Frontier(nd, v));
            }
        }
    }
    dist[t].is_finite().then_some(dist[t])
}

/// Value of a maximum `origin -> destination` flow with the given link
/// capacities (Edmonds-Karp).
pub fn max_flow(network: &Network, capacity: &[f64], origin: u32, destination: u32) -> f64 {
    const EPS: f64 = 1e-12;
    let (Some(s), Some(t)) = (network.node(origin), network.node(destination)) else {
        return 0.0;
    };
    if s == t {
        return 0.0;
    }
    let n = network.node_count();
    // residual graph as a dense matrix; networks here are small
    let mut residual = vec![vec![0.0; n]; n];
    for (i, l) in network.links().iter().enumerate() {
        let (u, v) = (network.node(l.from).unwrap(), network.node(l.to).unwrap());
        residual[u][v] += capacity[i].max(0.0);
    }
    let mut total = 0.0;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for v in 0..n {
                if parent[v] == usize::MAX && residual[u][v] > EPS {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return total;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = parent[v];
            push = push.min(residual[u][v]);
            v = u;
        }
        if !push.is_finite() {
            return f64::INFINITY;
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            residual[u][v] -= push;
            residual[v][u] += push;
            v = u;
        }
        total += push;
    }
}

/// Every simple `origin -> destination` path, as lists of link indices, in
/// depth-first order.
pub fn simple_paths(network: &Network, origin: u32, destination: u32) -> Vec<Vec<usize>> {
    fn walk(
        network: &Network,
        at: u32,
        destination: u32,
        visited: &mut Vec<u32>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if at == destination {
            out.push(path.clone());
            return;
        }
        for (i, l) in network.links().iter().enumerate() {
            if l.from == at && !visited.contains(&l.to) {
                visited.push(l.to);
                path.push(i);
                walk(network, l.to, destination, visited, path, out);
                path.pop();
                visited.pop();
            }
        }
    }
    let mut out = Vec::new();
    if network.node(origin).is_none() || network.node(destination).is_none() {
        return out;
    }
    walk(
        network,
        origin,
        destination,
        &mut vec![origin],
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// Links lying on at least one simple path of the requirement.
pub fn links_on_paths(network: &Network, r: &Requirement) -> Vec<usize> {
    let mut on = vec![false; network.links().len()];
    for p in simple_paths(network, r.origin, r.destination) {
        for l in p {
            on[l] = true;
        }
    }
    (0..on.len()).filter(|&i| on[i]).collect()
}

/// How much cheaper the requirement's shortest path becomes when `link`
/// is free rather than unusable: the highest price at which the link still
/// lies on a shortest path. Infinite for a link every path must use; zero
/// when the link is on no path or the destination is unreachable.
pub fn threshold_price(network: &Network, prices: &[f64], r: &Requirement, link: usize) -> f64 {
    let mut w = prices.to_vec();
    w[link] = 0.0;
    let Some(free) = shortest_distance(network, &w, r.origin, r.destination) else {
        return 0.0;
    };
    w[link] = f64::INFINITY;
    match shortest_distance(network, &w, r.origin, r.destination) {
        Some(without) => (without - free).max(0.0),
        None => f64::INFINITY,
    }
}

/// Additional deliverable flow from raising `link`'s capacity by `delta`
/// on top of `holdings`, clamped to what the requirement still lacks.
pub fn potential_flow_increase(
    network: &Network,
    holdings: &[f64],
    r: &Requirement,
    link: usize,
    delta: f64,
) -> f64 {
    let base = max_flow(network, holdings, r.origin, r.destination);
    let mut raised = holdings.to_vec();
    raised[link] += delta;
    let more = max_flow(network, &raised, r.origin, r.destination);
    (more - base).min(r.amount - base).max(0.0)
}
