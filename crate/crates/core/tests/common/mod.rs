#![allow(dead_code)]

use agora::market::DemandCurve;
use agora::transport::{Link, Network, Requirement};
use rand::seq::SliceRandom;
use rand::Rng;

/// Strongly connected random network on `n` locations: a random spanning
/// tree with links both ways, plus `extra` random one-way links.
pub fn random_network<R: Rng>(rng: &mut R, n: u32, extra: usize) -> Network {
    let mut order: Vec<u32> = (1..=n).collect();
    order.shuffle(rng);
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for i in 1..order.len() {
        let parent = order[rng.gen_range(0..i)];
        pairs.push((parent, order[i]));
        pairs.push((order[i], parent));
    }
    let mut tries = 0;
    while pairs.len() < 2 * (n as usize - 1) + extra && tries < 1000 {
        tries += 1;
        let (f, t) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
        if f != t && !pairs.contains(&(f, t)) {
            pairs.push((f, t));
        }
    }
    let links = pairs
        .into_iter()
        .map(|(f, t)| Link::new(f, t, rng.gen_range(0.2..3.0), rng.gen_range(0.0..20.0)))
        .collect();
    Network::new((1..=n).collect(), links).unwrap()
}

pub fn random_requirements<R: Rng>(rng: &mut R, n: u32, count: usize) -> Vec<Requirement> {
    (0..count)
        .map(|_| {
            let o = rng.gen_range(1..=n);
            let mut d = rng.gen_range(1..=n);
            while d == o {
                d = rng.gen_range(1..=n);
            }
            Requirement::new(o, d, rng.gen_range(1.0..10.0))
        })
        .collect()
}

/// Every simple path as a list of link indices, by plain recursion over
/// location sequences.
pub fn all_paths(net: &Network, from: u32, to: u32) -> Vec<Vec<usize>> {
    fn go(
        net: &Network,
        at: u32,
        to: u32,
        seen: &mut Vec<u32>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if at == to {
            out.push(path.clone());
            return;
        }
        for (i, l) in net.links().iter().enumerate() {
            if l.from == at && !seen.contains(&l.to) {
                seen.push(l.to);
                path.push(i);
                go(net, l.to, to, seen, path, out);
                path.pop();
                seen.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(net, from, to, &mut vec![from], &mut Vec::new(), &mut out);
    out
}

/// Maximum flow as the minimum cut over every location subset containing
/// the origin and not the destination.
pub fn min_cut(net: &Network, cap: &[f64], from: u32, to: u32) -> f64 {
    let locs = net.locations();
    let others: Vec<u32> = locs
        .iter()
        .copied()
        .filter(|&v| v != from && v != to)
        .collect();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << others.len()) {
        let mut side = vec![from];
        for (k, &v) in others.iter().enumerate() {
            if mask & (1 << k) != 0 {
                side.push(v);
            }
        }
        let cut: f64 = net
            .links()
            .iter()
            .zip(cap)
            .filter(|(l, _)| side.contains(&l.from) && !side.contains(&l.to))
            .map(|(_, c)| *c)
            .sum();
        best = best.min(cut);
    }
    best
}

/// Shortest origin-destination length over enumerated paths, with an
/// optional link whose price is replaced.
pub fn path_distance(
    net: &Network,
    prices: &[f64],
    r: &Requirement,
    replace: Option<(usize, f64)>,
) -> Option<f64> {
    all_paths(net, r.origin, r.destination)
        .into_iter()
        .map(|p| {
            p.iter()
                .map(|&l| match replace {
                    Some((k, v)) if k == l => v,
                    _ => prices[l],
                })
                .sum::<f64>()
        })
        .filter(|d| d.is_finite())
        .reduce(f64::min)
}

/// Reference link flows and prices of the system optimum on the bundled
/// four-location network, by link index, from the symmetric first-order
/// condition 28 s = 60 for the flow `s` each shipper sends over the
/// shared link.
pub fn four_location_optimum() -> ([f64; 7], [f64; 7]) {
    let s = 60.0 / 28.0;
    // links: 1-2, 2-1, 2-3, 2-4, 3-1, 3-4, 4-2
    let flows = [10.0, 10.0 - s, 2.0 * s, 10.0 - s, s, s, 10.0];
    let prices = [
        40.0,
        40.0 - 2.0 * s,
        5.0 + 8.0 * s,
        40.0 - 2.0 * s,
        5.0 + 4.0 * s,
        5.0 + 4.0 * s,
        40.0,
    ];
    (flows, prices)
}

/// Price range `[lo, hi]` where the aggregate of piecewise-linear curves is
/// zero, found by walking the merged breakpoints and solving each linear
/// piece exactly.
pub fn zero_set(curves: &[DemandCurve], lo: f64, hi: f64) -> Option<(f64, f64)> {
    let z = |p: f64| curves.iter().map(|c| c.eval(p)).sum::<f64>();
    let mut knots: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.points().iter().map(|pt| pt.0))
        .filter(|p| *p > lo && *p < hi)
        .collect();
    knots.push(lo);
    knots.push(hi);
    knots.sort_by(f64::total_cmp);
    let mut first = None;
    let mut last = None;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (za, zb) = (z(a), z(b));
        let mut visit = |p: f64| {
            first.get_or_insert(p);
            last = Some(p);
        };
        if za == 0.0 {
            visit(a);
        }
        if za > 0.0 && zb < 0.0 {
            visit(a + (b - a) * za / (za - zb));
        }
        if zb == 0.0 {
            visit(b);
        }
    }
    Some((first?, last?))
}
