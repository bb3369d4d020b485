//! Piecewise-linear price/quantity bids.
//!
//! A [`DemandCurve`] maps a nonnegative price to a net quantity demanded.
//! Supply is expressed as negative demand, so every curve is non-increasing
//! in price. Between points the curve interpolates linearly; outside the
//! first and last point it is held constant.

use serde::{Deserialize, Serialize};

use crate::error::CurveError;

/// Maximum number of points a single bid may carry.
pub const MAX_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandCurve {
    points: Vec<(f64, f64)>,
}

impl DemandCurve {
    /// Builds a curve from `(price, quantity)` pairs, rejecting anything that
    /// is not a well-formed non-increasing correspondence.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, CurveError> {
        if points.is_empty() {
            return Err(CurveError::Empty);
        }
        if points.len() > MAX_POINTS {
            return Err(CurveError::TooManyPoints(points.len()));
        }
        for (i, &(p, q)) in points.iter().enumerate() {
            if !p.is_finite() || !q.is_finite() {
                return Err(CurveError::NonFinite { index: i });
            }
            if p < 0.0 {
                return Err(CurveError::NegativePrice { index: i, price: p });
            }
            if i > 0 {
                let (pp, pq) = points[i - 1];
                if p <= pp {
                    return Err(CurveError::PricesNotIncreasing { index: i });
                }
                if q > pq {
                    return Err(CurveError::Increasing { index: i });
                }
            }
        }
        Ok(Self { points })
    }

    /// The curve that demands nothing at any price.
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// A price-insensitive bid for `quantity` units.
    pub fn constant(quantity: f64) -> Self {
        Self {
            points: vec![(0.0, quantity)],
        }
    }

    /// Builds a curve from samples that should already be monotone, repairing
    /// float noise by taking the running minimum of the quantities and
    /// thinning to [`MAX_POINTS`].
    ///
    /// Samples with non-increasing prices are dropped.
    pub fn from_samples_envelope(samples: &[(f64, f64)]) -> Self {
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
        for &(p, q) in samples {
            if !p.is_finite() || !q.is_finite() || p < 0.0 {
                continue;
            }
            match points.last() {
                Some(&(lp, lq)) => {
                    if p > lp {
                        points.push((p, q.min(lq)));
                    }
                }
                None => points.push((p, q)),
            }
        }
        if points.is_empty() {
            return Self::zero();
        }
        Self {
            points: thin(points),
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Evaluates the curve at `price`.
    pub fn eval(&self, price: f64) -> f64 {
        let pts = &self.points;
        let first = pts[0];
        if price <= first.0 {
            return first.1;
        }
        let last = pts[pts.len() - 1];
        if price >= last.0 {
            return last.1;
        }
        // First index whose price exceeds `price`; always in 1..len here.
        let hi = pts.partition_point(|&(p, _)| p <= price);
        let (p0, q0) = pts[hi - 1];
        let (p1, q1) = pts[hi];
        let t = (price - p0) / (p1 - p0);
        q0 + t * (q1 - q0)
    }

    /// Largest quantity the curve ever demands (its value at price zero).
    pub fn max_quantity(&self) -> f64 {
        self.points[0].1
    }

    /// Smallest quantity the curve ever demands.
    pub fn min_quantity(&self) -> f64 {
        self.points[self.points.len() - 1].1
    }

    pub fn is_zero(&self) -> bool {
        self.points.iter().all(|&(_, q)| q == 0.0)
    }
}

/// Keeps the first and last point and an evenly strided subset in between.
fn thin(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points;
    }
    let n = points.len();
    let keep = MAX_POINTS;
    (0..keep)
        .map(|k| points[k * (n - 1) / (keep - 1)])
        .collect()
}

/// `n` log-spaced prices covering `[lo, hi]` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo && n >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (llo + (lhi - llo) * k as f64 / (n - 1) as f64).exp())
        .collect()
}
