mod common;

use agora::market::{AgentId, Auction, DemandCurve, GoodId};
use common::zero_set;
use proptest::prelude::*;

const TOL: f64 = 1e-3;

/// Strictly increasing prices in [0, 100) with non-increasing quantities.
fn monotone_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (1usize..10).prop_flat_map(|n| {
        (
            prop::collection::vec(0.01f64..10.0, n),
            prop::collection::vec(0.0f64..10.0, n),
            -20.0f64..20.0,
            0.0f64..20.0,
        )
            .prop_map(|(gaps, drops, top, start)| {
                let mut p = start;
                let mut q = top;
                gaps.iter()
                    .zip(&drops)
                    .map(|(g, d)| {
                        let pt = (p, q);
                        p += g;
                        q -= d;
                        pt
                    })
                    .collect()
            })
    })
}

fn auction_of(curves: &[DemandCurve]) -> Auction {
    let mut a = Auction::new(GoodId(0), 1.0);
    for (i, c) in curves.iter().enumerate() {
        a.submit(AgentId(i), c.clone());
    }
    a
}

proptest! {
    #[test]
    fn monotone_lists_are_accepted_and_evaluate_monotonically(
        pts in monotone_points(),
        probes in prop::collection::vec(0.0f64..150.0, 2..20),
    ) {
        let c = DemandCurve::new(pts).unwrap();
        let mut ps = probes;
        ps.sort_by(f64::total_cmp);
        for w in ps.windows(2) {
            prop_assert!(c.eval(w[0]) >= c.eval(w[1]));
            prop_assert!(c.eval(w[0]).is_finite());
        }
    }

    #[test]
    fn any_rise_in_quantity_is_rejected(pts in monotone_points(), at in 0usize..10, bump in 0.001f64..5.0) {
        prop_assume!(pts.len() >= 2);
        let mut bad = pts.clone();
        let k = 1 + at % (bad.len() - 1);
        bad[k].1 = bad[k - 1].1 + bump;
        prop_assert!(DemandCurve::new(bad).is_err());
    }

    #[test]
    fn unordered_prices_are_rejected(pts in monotone_points(), at in 0usize..10) {
        prop_assume!(pts.len() >= 2);
        let mut bad = pts.clone();
        let k = 1 + at % (bad.len() - 1);
        bad[k].0 = bad[k - 1].0;
        prop_assert!(DemandCurve::new(bad).is_err());
    }

    #[test]
    fn newest_bid_replaces_older_ones(
        a in monotone_points(),
        b in monotone_points(),
        c in monotone_points(),
        p in 0.0f64..120.0,
    ) {
        let (a, b, c) = (DemandCurve::new(a).unwrap(), DemandCurve::new(b).unwrap(), DemandCurve::new(c).unwrap());
        let mut auction = Auction::new(GoodId(0), 1.0);
        auction.submit(AgentId(0), a);
        auction.submit(AgentId(1), b.clone());
        auction.submit(AgentId(0), c.clone());
        prop_assert_eq!(auction.bidder_count(), 2);
        prop_assert!((auction.aggregate_demand(p) - (b.eval(p) + c.eval(p))).abs() < 1e-9);
    }
}

fn demand_or_supply() -> impl Strategy<Value = DemandCurve> {
    (monotone_points(), any::<bool>()).prop_map(|(pts, supply)| {
        // Supply curves start at zero and fall from there.
        let pts = if supply {
            let q0 = pts[0].1;
            pts.into_iter().map(|(p, q)| (p, q - q0)).collect()
        } else {
            pts.into_iter().map(|(p, q)| (p, q.max(0.0))).collect()
        };
        DemandCurve::new(pts).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn clearing_lands_in_the_zero_set(curves in prop::collection::vec(demand_or_supply(), 1..6)) {
        let (lo, hi) = (1e-6, 1e6);
        let a = auction_of(&curves);
        let c = a.compute_clearing(lo, hi, TOL).unwrap();
        match zero_set(&curves, lo, hi) {
            Some((first, last)) => {
                prop_assert!(c.clears);
                prop_assert!(c.excess.abs() <= TOL);
                prop_assert!(c.price >= first - 1e-6 && c.price <= last + 1e-6,
                    "price {} outside [{first}, {last}]", c.price);
            }
            None => {
                // no crossing: the better end of the bracket
                let (zl, zh) = (a.aggregate_demand(lo), a.aggregate_demand(hi));
                prop_assert!(c.price == lo || c.price == hi);
                prop_assert!(c.excess.abs() <= zl.abs().min(zh.abs()) + 1e-12);
            }
        }
    }
}

/// Fine uniform scan for the first grid point where aggregate demand stops
/// being positive.
fn scan_crossing(curves: &[DemandCurve], lo: f64, hi: f64, steps: usize) -> Option<f64> {
    let h = (hi - lo) / steps as f64;
    (0..=steps)
        .map(|k| lo + h * k as f64)
        .find(|&p| curves.iter().map(|c| c.eval(p)).sum::<f64>() <= 0.0)
}

#[test]
fn clearing_agrees_with_a_million_step_scan() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let strategy = prop::collection::vec(demand_or_supply(), 2..5);
    let mut checked = 0;
    for _ in 0..40 {
        let curves = strategy.new_tree(&mut runner).unwrap().current();
        let (lo, hi) = (0.0, 200.0);
        let z_lo: f64 = curves.iter().map(|c| c.eval(lo)).sum();
        let z_hi: f64 = curves.iter().map(|c| c.eval(hi)).sum();
        if !(z_lo > 0.0 && z_hi < 0.0) {
            continue;
        }
        let c = auction_of(&curves).compute_clearing(lo, hi, TOL).unwrap();
        let scanned = scan_crossing(&curves, lo, hi, 1_000_000).unwrap();
        let step = (hi - lo) / 1e6;
        assert!(c.excess.abs() <= TOL);
        // the scan finds the left end of any flat zero region
        let (first, last) = zero_set(&curves, lo, hi).unwrap();
        assert!(
            (scanned - first).abs() <= step + 1e-9,
            "{scanned} vs {first}"
        );
        assert!(c.price >= scanned - step - 1e-6 && c.price <= last + 1e-6);
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} bracketed cases");
}

#[test]
fn clearing_examples() {
    let line = DemandCurve::new(vec![(0.0, 10.0), (100.0, -90.0)]).unwrap();
    let c = auction_of(&[line])
        .compute_clearing(0.0, 100.0, TOL)
        .unwrap();
    assert!((c.price - 10.0).abs() < 1e-6);

    let demand = DemandCurve::new(vec![(20.0, 10.0), (40.0, 0.0)]).unwrap();
    let supply = DemandCurve::new(vec![(20.0, 0.0), (40.0, -10.0)]).unwrap();
    let c = auction_of(&[demand, supply])
        .compute_clearing(1e-6, 1e6, TOL)
        .unwrap();
    assert!((c.price - 30.0).abs() < 1e-6);

    let invalid = auction_of(&[]).compute_clearing(5.0, 5.0, TOL);
    assert!(invalid.is_err());
}

#[test]
fn aggregate_examples() {
    let constant = DemandCurve::constant(10.0);
    let falling = DemandCurve::new(vec![(0.0, 0.0), (10.0, 0.0), (40.0, -10.0)]).unwrap();
    let a = auction_of(&[constant, falling]);
    assert!((a.aggregate_demand(40.0)).abs() < 1e-12);
    assert_eq!(auction_of(&[]).aggregate_demand(3.0), 0.0);
}
