use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::TransportError;

/// A directed link with congestion cost `a x^2 + b x` (resource units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: u32,
    pub to: u32,
    pub a: f64,
    pub b: f64,
}

impl Link {
    pub fn new(from: u32, to: u32, a: f64, b: f64) -> Self {
        Self { from, to, a, b }
    }

    pub fn cost(&self, x: f64) -> f64 {
        self.a * x * x + self.b * x
    }

    pub fn marginal_cost(&self, x: f64) -> f64 {
        2.0 * self.a * x + self.b
    }

    pub fn average_cost(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
}

/// Total, marginal and average cost of carrying `x` on a link with
/// coefficients `a`, `b`.
pub fn link_cost(a: f64, b: f64, x: f64) -> Result<(f64, f64, f64), TransportError> {
    if !(x >= 0.0) {
        return Err(TransportError::NegativeFlow(x));
    }
    let l = Link::new(0, 0, a, b);
    Ok((l.cost(x), l.marginal_cost(x), l.average_cost(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    pub origin: u32,
    pub destination: u32,
    pub amount: f64,
}

impl Requirement {
    pub fn new(origin: u32, destination: u32, amount: f64) -> Self {
        Self {
            origin,
            destination,
            amount,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Network {
    locations: Vec<u32>,
    links: Vec<Link>,
}

impl Network {
    pub fn new(mut locations: Vec<u32>, links: Vec<Link>) -> Result<Self, TransportError> {
        locations.sort_unstable();
        locations.dedup();
        let mut seen = BTreeSet::new();
        for l in &links {
            if l.from == l.to {
                return Err(TransportError::SelfLoop {
                    from: l.from,
                    to: l.to,
                });
            }
            if locations.binary_search(&l.from).is_err() || locations.binary_search(&l.to).is_err()
            {
                return Err(TransportError::UnknownLocation {
                    from: l.from,
                    to: l.to,
                });
            }
            if !(l.a > 0.0 && l.a.is_finite() && l.b >= 0.0 && l.b.is_finite()) {
                return Err(TransportError::BadCost {
                    from: l.from,
                    to: l.to,
                    a: l.a,
                    b: l.b,
                });
            }
            if !seen.insert((l.from, l.to)) {
                return Err(TransportError::DuplicateLink {
                    from: l.from,
                    to: l.to,
                });
            }
        }
        Ok(Self { locations, links })
    }

    pub fn locations(&self) -> &[u32] {
        &self.locations
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, i: usize) -> &Link {
        &self.links[i]
    }

    pub fn link_index(&self, from: u32, to: u32) -> Option<usize> {
        self.links.iter().position(|l| l.from == from && l.to == to)
    }

    /// Dense index of a location id.
    pub fn node(&self, id: u32) -> Option<usize> {
        self.locations.binary_search(&id).ok()
    }

    pub fn node_count(&self) -> usize {
        self.locations.len()
    }

    pub fn total_cost(&self, flows: &[f64]) -> f64 {
        self.links.iter().zip(flows).map(|(l, &x)| l.cost(x)).sum()
    }

    /// Checks that a requirement names known, distinct, connected locations
    /// and a positive amount.
    pub fn check_requirement(&self, r: &Requirement) -> Result<(), TransportError> {
        if !(r.amount > 0.0 && r.amount.is_finite()) || r.origin == r.destination {
            return Err(TransportError::BadRequirement {
                origin: r.origin,
                destination: r.destination,
                amount: r.amount,
            });
        }
        if self.node(r.origin).is_none() || self.node(r.destination).is_none() {
            return Err(TransportError::UnknownLocation {
                from: r.origin,
                to: r.destination,
            });
        }
        let w = vec![1.0; self.links.len()];
        if super::shortest_distance(self, &w, r.origin, r.destination).is_none() {
            return Err(TransportError::Unreachable {
                origin: r.origin,
                destination: r.destination,
            });
        }
        Ok(())
    }

    /// The four-location example: two shippers moving 10 units in opposite
    /// directions between locations 1 and 4 over seven congested links.
    pub fn four_location() -> (Self, Vec<Requirement>) {
        let steep = |f, t| Link::new(f, t, 1.0, 20.0);
        let shared = |f, t| Link::new(f, t, 2.0, 5.0);
        let net = Self::new(
            vec![1, 2, 3, 4],
            vec![
                steep(1, 2),
                steep(2, 1),
                shared(2, 3),
                steep(2, 4),
                shared(3, 1),
                shared(3, 4),
                steep(4, 2),
            ],
        )
        .expect("bundled network is valid");
        (
            net,
            vec![Requirement::new(1, 4, 10.0), Requirement::new(4, 1, 10.0)],
        )
    }
}
