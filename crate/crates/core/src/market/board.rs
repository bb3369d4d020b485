use serde::{Deserialize, Serialize};

use super::GoodId;

/// The tote board: the latest posted price of every auction.
///
/// Agents only ever read it; the session is the sole writer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceBoard {
    prices: Vec<f64>,
    versions: Vec<u64>,
}

impl PriceBoard {
    pub fn new(prices: Vec<f64>) -> Self {
        let versions = vec![0; prices.len()];
        Self { prices, versions }
    }

    pub fn uniform(goods: usize, price: f64) -> Self {
        Self::new(vec![price; goods])
    }

    pub fn price(&self, good: GoodId) -> f64 {
        self.prices[good.0]
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// Number of times the price of `good` has been posted.
    pub fn version(&self, good: GoodId) -> u64 {
        self.versions[good.0]
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn post(&mut self, good: GoodId, price: f64) {
        self.prices[good.0] = price;
        self.versions[good.0] += 1;
    }

    /// Copy of the board with one price replaced, for what-if evaluation.
    pub fn with_price(&self, good: GoodId, price: f64) -> Self {
        let mut b = self.clone();
        b.prices[good.0] = price;
        b
    }
}
