//! Constant-returns middlemen.
//!
//! An arbitrageur turns one unit each of two input goods into one unit of an
//! output good. With constant returns there is no interior optimum, so instead
//! of solving for an output level it nudges its activity up or down in
//! proportion to the unit margin `p_out - p_in1 - p_in2`.

use serde::{Deserialize, Serialize};

use crate::market::{Agent, DemandCurve, GoodId, PriceBoard, Role};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArbitrageurSpec {
    pub output: GoodId,
    pub inputs: [GoodId; 2],
    /// Current activity level.
    pub activity: f64,
    /// Activity change per unit of margin.
    pub step: f64,
}

impl ArbitrageurSpec {
    pub fn new(output: GoodId, inputs: [GoodId; 2]) -> Self {
        Self {
            output,
            inputs,
            activity: 0.0,
            step: 0.05,
        }
    }

    pub fn margin(&self, p_out: f64, p_in: [f64; 2]) -> f64 {
        p_out - p_in[0] - p_in[1]
    }

    /// Activity after one adjustment at the given prices.
    pub fn adjusted(&self, margin: f64) -> f64 {
        (self.activity + self.step * margin).max(0.0)
    }
}

/// One adjustment: returns the new activity together with fixed-quantity
/// bids for it (input demands first, then the output supply).
pub fn arbitrageur_step(
    spec: &ArbitrageurSpec,
    p_out: f64,
    p_in: [f64; 2],
) -> (f64, [DemandCurve; 3]) {
    let y = spec.adjusted(spec.margin(p_out, p_in));
    (
        y,
        [
            DemandCurve::constant(y),
            DemandCurve::constant(y),
            DemandCurve::constant(-y),
        ],
    )
}

/// Adjusted activity as a function of one price with the other two fixed.
/// Inputs come out as demand, the output as supply (negative).
fn activity_curve(spec: &ArbitrageurSpec, rest: f64, input: bool, horizon: f64) -> DemandCurve {
    // margin = p_out - p_in1 - p_in2 is linear in any one of the prices.
    // For an input `rest` is p_out minus the other input price; for the
    // output it is the sum of input prices.
    let y = spec.activity;
    let eta = spec.step;
    if input {
        // activity(p) = max(0, y + eta (rest - p)), falling in p
        let kink = rest + y / eta;
        if kink <= 0.0 {
            return DemandCurve::zero();
        }
        DemandCurve::new(vec![(0.0, y + eta * rest), (kink, 0.0)])
            .unwrap_or_else(|_| DemandCurve::zero())
    } else {
        // supply(p) = max(0, y + eta (p - rest)), rising in p
        let kink = rest - y / eta;
        let top = horizon.max(kink.max(0.0) + 1.0);
        let high = -(y + eta * (top - rest)).max(0.0);
        let points = if kink > 0.0 {
            vec![(0.0, 0.0), (kink, 0.0), (top, high)]
        } else {
            vec![(0.0, -(y - eta * rest).max(0.0)), (top, high)]
        };
        DemandCurve::new(points).unwrap_or_else(|_| DemandCurve::zero())
    }
}

#[derive(Debug, Clone)]
pub struct Arbitrageur {
    name: String,
    spec: ArbitrageurSpec,
    horizon: f64,
}

impl Arbitrageur {
    pub fn new(name: impl Into<String>, spec: ArbitrageurSpec) -> Self {
        Self {
            name: name.into(),
            spec,
            horizon: 1e6,
        }
    }

    pub fn spec(&self) -> &ArbitrageurSpec {
        &self.spec
    }

    pub fn activity(&self) -> f64 {
        self.spec.activity
    }
}

impl Agent for Arbitrageur {
    fn name(&self) -> &str {
        &self.name
    }

    fn role(&self) -> Role {
        Role::Arbitrageur
    }

    fn goods(&self) -> Vec<GoodId> {
        vec![self.spec.output, self.spec.inputs[0], self.spec.inputs[1]]
    }

    // Bids are the adjustment rule written as a function of the good's own
    // price, so an auction sees how activity would respond to it.
    fn bid(&self, good: GoodId, prices: &PriceBoard) -> DemandCurve {
        let p_out = prices.price(self.spec.output);
        let [a, b] = self.spec.inputs;
        if good == self.spec.output {
            activity_curve(
                &self.spec,
                prices.price(a) + prices.price(b),
                false,
                self.horizon,
            )
        } else if good == a {
            activity_curve(&self.spec, p_out - prices.price(b), true, self.horizon)
        } else if good == b {
            activity_curve(&self.spec, p_out - prices.price(a), true, self.horizon)
        } else {
            DemandCurve::zero()
        }
    }

    fn settle(&mut self, _good: GoodId, _price: f64, quantity: f64) {
        self.spec.activity = quantity.abs();
    }

    fn affected_by(&self, _changed: GoodId) -> Vec<GoodId> {
        self.goods()
    }

    fn profit(&self, prices: &PriceBoard) -> f64 {
        let [a, b] = self.spec.inputs;
        self.spec.activity
            * self.spec.margin(
                prices.price(self.spec.output),
                [prices.price(a), prices.price(b)],
            )
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}
