use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AgentId, DemandCurve, GoodId};
use crate::error::MarketError;

/// Per-good auction: the outstanding bid of every interested agent plus an
/// optional standing curve owned by the market itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Auction {
    pub good: GoodId,
    bids: BTreeMap<AgentId, DemandCurve>,
    reserve: Option<DemandCurve>,
    pub posted_price: f64,
    pub dirty: bool,
}

/// Outcome of one clearing computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clearing {
    pub price: f64,
    pub excess: f64,
    /// False when aggregate demand has no zero crossing inside the bracket.
    pub clears: bool,
}

impl Auction {
    pub fn new(good: GoodId, initial_price: f64) -> Self {
        Self {
            good,
            bids: BTreeMap::new(),
            reserve: None,
            posted_price: initial_price,
            dirty: false,
        }
    }

    pub fn with_reserve(mut self, reserve: Option<DemandCurve>) -> Self {
        self.reserve = reserve;
        self
    }

    pub fn reserve(&self) -> Option<&DemandCurve> {
        self.reserve.as_ref()
    }

    /// Replaces the agent's outstanding bid. Returns whether anything changed.
    pub fn submit(&mut self, agent: AgentId, curve: DemandCurve) -> bool {
        if self.bids.get(&agent) == Some(&curve) {
            return false;
        }
        self.bids.insert(agent, curve);
        self.dirty = true;
        true
    }

    pub fn bid(&self, agent: AgentId) -> Option<&DemandCurve> {
        self.bids.get(&agent)
    }

    pub fn bids(&self) -> impl Iterator<Item = (AgentId, &DemandCurve)> {
        self.bids.iter().map(|(a, c)| (*a, c))
    }

    pub fn bidder_count(&self) -> usize {
        self.bids.len()
    }

    /// Sum of all outstanding bids (and the standing curve) at `price`.
    pub fn aggregate_demand(&self, price: f64) -> f64 {
        let standing = self.reserve.as_ref().map_or(0.0, |c| c.eval(price));
        self.bids.values().map(|c| c.eval(price)).sum::<f64>() + standing
    }

    /// Finds the zero crossing of aggregate demand on `[lo, hi]` by bisection.
    ///
    /// When aggregate demand is zero over a whole interval the upper end is
    /// chosen (the lowest price at which supply starts), unless that interval
    /// runs to the top of the bracket, in which case the lower end is used.
    /// Without a sign change the bound with smaller absolute excess is
    /// returned and flagged as non-clearing.
    pub fn compute_clearing(
        &self,
        lo: f64,
        hi: f64,
        tolerance: f64,
    ) -> Result<Clearing, MarketError> {
        if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
            return Err(MarketError::InvalidBounds { lo, hi });
        }
        let z = |p: f64| self.aggregate_demand(p);
        let (z_lo, z_hi) = (z(lo), z(hi));
        if z_lo == 0.0 && z_hi == 0.0 {
            // Nothing bid on either side: no information, keep the price.
            let price = self.posted_price.clamp(lo, hi);
            return Ok(Clearing {
                price,
                excess: 0.0,
                clears: true,
            });
        }
        if z_lo < 0.0 || z_hi > 0.0 {
            // No sign change inside the bracket.
            // Ties go to the end the excess points at.
            let take_lo = if z_hi > 0.0 {
                z_lo.abs() < z_hi.abs()
            } else {
                z_lo.abs() <= z_hi.abs()
            };
            let (price, excess) = if take_lo { (lo, z_lo) } else { (hi, z_hi) };
            return Ok(Clearing {
                price,
                excess,
                clears: excess.abs() <= tolerance,
            });
        }
        // inf { p : z(p) <= 0 }
        let lower = bisect(lo, hi, |p| z(p) > 0.0);
        // sup { p : z(p) >= 0 }
        let upper = bisect(lo, hi, |p| z(p) >= 0.0);
        let price = if z_hi == 0.0 { lower } else { upper.max(lower) };
        let excess = z(price);
        Ok(Clearing {
            price,
            excess,
            clears: excess.abs() <= tolerance,
        })
    }

    /// Clears against the given bracket and posts the result locally.
    pub fn clear(&mut self, lo: f64, hi: f64, tolerance: f64) -> Result<Clearing, MarketError> {
        let c = self.compute_clearing(lo, hi, tolerance)?;
        self.posted_price = c.price;
        self.dirty = false;
        Ok(c)
    }
}

/// Boundary of a monotone predicate: the last point where `left(p)` holds,
/// assuming it holds on a prefix of `[lo, hi]`.
fn bisect(mut lo: f64, mut hi: f64, left: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        if hi - lo <= 1e-9 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if left(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
