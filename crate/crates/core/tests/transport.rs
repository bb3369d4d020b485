mod common;

use agora::market::{Market, Role, SessionConfig};
use agora::transport::{
    arbitrage_triples, build_config, link_cost, links_on_paths, shipper_bid, shipper_direct_bid,
    transitive_closure, BuildOptions, Link, MarketConfig, Model, Network, Requirement,
    ShipperParams, ShipperState,
};
use approx::assert_relative_eq;
use common::{all_paths, random_network, random_requirements};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn link_cost_examples() {
    assert_eq!(link_cost(1.0, 20.0, 10.0).unwrap(), (300.0, 40.0, 30.0));
    assert_eq!(link_cost(2.0, 5.0, 0.0).unwrap(), (0.0, 5.0, 5.0));
    let (c, m, a) = link_cost(2.0, 5.0, 2.857).unwrap();
    assert_relative_eq!(c, 30.61, epsilon = 5e-3);
    assert_relative_eq!(m, 16.43, epsilon = 5e-3);
    assert_relative_eq!(a, 10.71, epsilon = 5e-3);
    assert!(link_cost(1.0, 1.0, -0.5).is_err());
}

fn built(model: Model) -> MarketConfig {
    let (net, reqs) = Network::four_location();
    build_config(&net, &reqs, model, &BuildOptions::default()).unwrap()
}

fn goods_of(config: &MarketConfig, role: Role) -> Vec<usize> {
    config
        .economy
        .agents
        .iter()
        .filter(|a| a.role() == role)
        .map(|a| a.goods().len())
        .collect()
}

#[test]
fn four_location_configurations() {
    let basic = built(Model::Basic);
    assert_eq!(basic.economy.goods.len(), 8);
    assert_eq!(basic.economy.agents.len(), 2);
    // four links on each shipper's paths plus the resource
    assert_eq!(goods_of(&basic, Role::Shipper), vec![5, 5]);

    let carriers = built(Model::Carriers);
    assert_eq!(carriers.economy.goods.len(), 8);
    assert_eq!(carriers.shippers.len(), 2);
    assert_eq!(goods_of(&carriers, Role::Producer), vec![2; 7]);
    for share in &carriers.economy.profit_shares {
        assert_eq!(share.fraction, 0.5);
    }

    let arb = built(Model::Arbitrageurs);
    // strongly connected on 4 locations: all 12 ordered pairs
    assert_eq!(arb.economy.goods.len(), 13);
    assert_eq!(goods_of(&arb, Role::Shipper), vec![2, 2]);
    assert_eq!(arb.carriers.len(), 7);
    assert_eq!(arb.arbitrageurs.len(), brute_triples(&arb.network).len());
    assert!(goods_of(&arb, Role::Arbitrageur).iter().all(|&g| g == 3));
}

#[test]
fn unreachable_requirement_is_refused() {
    let net = Network::new(
        vec![1, 2, 3],
        vec![Link::new(1, 2, 1.0, 0.0), Link::new(2, 3, 1.0, 0.0)],
    )
    .unwrap();
    for model in [Model::Basic, Model::Carriers, Model::Arbitrageurs] {
        assert!(build_config(
            &net,
            &[Requirement::new(3, 1, 1.0)],
            model,
            &BuildOptions::default()
        )
        .is_err());
    }
}

/// Triples `(i, j, k)` of distinct locations with a link `i -> j` and some
/// simple path `j -> k` avoiding `i`, by enumerating every path.
fn brute_triples(net: &Network) -> Vec<(u32, u32, u32)> {
    let locs = net.locations();
    let mut out = Vec::new();
    for &i in locs {
        for &j in locs {
            for &k in locs {
                if i == j || j == k || i == k || net.link_index(i, j).is_none() {
                    continue;
                }
                let avoids = all_paths(net, j, k).iter().any(|p| {
                    p.iter()
                        .all(|&l| net.link(l).from != i && net.link(l).to != i)
                });
                if avoids {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn configuration_sizes_follow_the_closed_forms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=7);
        let extra = rng.gen_range(0..=n as usize);
        let net = random_network(&mut rng, n, extra);
        let m = rng.gen_range(1..=4);
        let reqs = random_requirements(&mut rng, n, m);
        let (v, e) = (net.locations().len(), net.links().len());
        let options = BuildOptions::default();

        let basic = build_config(&net, &reqs, Model::Basic, &options).unwrap();
        prop_assert_eq!(basic.economy.goods.len(), e + 1);
        prop_assert_eq!(basic.economy.agents.len(), m);
        for (a, r) in basic.economy.agents.iter().zip(&reqs) {
            prop_assert_eq!(a.goods().len(), links_on_paths(&net, r).len() + 1);
            prop_assert!(a.goods().len() <= e + 1);
        }

        let carriers = build_config(&net, &reqs, Model::Carriers, &options).unwrap();
        prop_assert_eq!(carriers.economy.goods.len(), e + 1);
        prop_assert_eq!(carriers.carriers.len(), e);
        prop_assert_eq!(carriers.economy.agents.len(), m + e);
        for c in &carriers.carriers {
            prop_assert_eq!(carriers.economy.agents[c.0].goods().len(), 2);
        }
        for c in &carriers.carriers {
            let total: f64 = carriers
                .economy
                .profit_shares
                .iter()
                .filter(|s| s.producer == *c)
                .map(|s| s.fraction)
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        let arb = build_config(&net, &reqs, Model::Arbitrageurs, &options).unwrap();
        let closure = transitive_closure(&net);
        prop_assert_eq!(arb.economy.goods.len(), closure.len() + 1);
        prop_assert!(closure.len() <= v * (v - 1));
        let triples = arbitrage_triples(&net);
        prop_assert_eq!(&triples, &brute_triples(&net));
        prop_assert!(triples.len() <= v * e);
        prop_assert_eq!(arb.arbitrageurs.len(), triples.len());
        prop_assert_eq!(arb.economy.agents.len(), m + e + triples.len());
        for s in &arb.shippers {
            prop_assert_eq!(arb.economy.agents[s.0].goods().len(), 2);
        }
        for a in &arb.arbitrageurs {
            prop_assert_eq!(arb.economy.agents[a.0].goods().len(), 3);
        }
    }
}

#[test]
fn shipper_bid_reproduces_its_share_at_the_average_cost_equilibrium() {
    let config = built(Model::Basic);
    let mut market = Market::new(config.economy.clone(), SessionConfig::default()).unwrap();
    let report = market.run().unwrap();
    assert!(report.converged);
    let good = market.economy().good_by_label("G_2_3").unwrap();
    let shipper = market.economy().agent_by_name("S_1_4").unwrap();
    let curve = market.economy().agents[shipper.0].bid(good, market.board());
    let price = market.board().price(good);
    assert!((price - 16.43).abs() <= 0.05, "{price}");
    assert!(
        (curve.eval(price) - 2.857).abs() <= 0.01,
        "{}",
        curve.eval(price)
    );
}

#[test]
fn satisfied_or_broke_shippers_bid_nothing() {
    let (net, reqs) = Network::four_location();
    let params = ShipperParams::default();
    let mut s = ShipperState::new(reqs[0], 1000.0, 7);
    s.holdings[net.link_index(1, 2).unwrap()] = 10.0;
    s.holdings[net.link_index(2, 4).unwrap()] = 10.0;
    for link in [net.link_index(2, 3).unwrap(), net.link_index(3, 4).unwrap()] {
        assert!(shipper_bid(&s, &net, &[1.0; 7], 1.0, link, &params).is_zero());
    }
    let broke = ShipperState::new(reqs[0], 0.0, 7);
    for link in 0..7 {
        assert!(shipper_bid(&broke, &net, &[1.0; 7], 1.0, link, &params).is_zero());
    }
}

#[test]
fn direct_bid_spends_at_most_its_wealth() {
    let r = Requirement::new(1, 4, 10.0);
    let curve = shipper_direct_bid(1000.0, &r, 1e6);
    assert_relative_eq!(curve.eval(50.0), 10.0, epsilon = 1e-9);
    for p in [50.0, 99.0, 150.0, 400.0, 1e4] {
        assert!(curve.eval(p) * p <= 1000.0 + 1e-6);
    }
    assert!(curve.eval(400.0) > 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn bids_on_parallel_routes_stay_within_the_requirement(
        prices in prop::collection::vec(0.0f64..60.0, 7),
        upstream in 0.0f64..10.0,
        first in 0usize..2,
    ) {
        let (net, reqs) = Network::four_location();
        let params = ShipperParams::default();
        let mut s = ShipperState::new(reqs[0], 1000.0, 7);
        s.holdings[net.link_index(1, 2).unwrap()] = upstream;
        let direct = net.link_index(2, 4).unwrap();
        let around = [net.link_index(2, 3).unwrap(), net.link_index(3, 4).unwrap()];
        let order = if first == 0 { [direct, around[0]] } else { [around[0], direct] };
        // take the first bid at its price, then bid on the other route
        let q1 = shipper_bid(&s, &net, &prices, 1.0, order[0], &params).eval(prices[order[0]]);
        s.holdings[order[0]] = q1;
        if order[0] == around[0] {
            s.holdings[around[1]] = q1;
        }
        let q2 = shipper_bid(&s, &net, &prices, 1.0, order[1], &params).eval(prices[order[1]]);
        prop_assert!(q1 + q2 <= reqs[0].amount + 1e-9, "{q1} + {q2}");
    }

    #[test]
    fn bids_never_spend_uncommitted_income(
        prices in prop::collection::vec(0.1f64..200.0, 7),
        holdings in prop::collection::vec(0.0f64..10.0, 7),
        endowment in 0.0f64..2000.0,
        link in 0usize..7,
    ) {
        let (net, reqs) = Network::four_location();
        let mut s = ShipperState::new(reqs[0], endowment, 7);
        s.holdings = holdings;
        let curve = shipper_bid(&s, &net, &prices, 1.0, link, &ShipperParams::default());
        let budget = s.budget(&prices, 1.0, Some(link)).max(0.0);
        for p in [prices[link], prices[link] * 0.5, prices[link] * 2.0] {
            prop_assert!(curve.eval(p) * p <= budget + 1e-6);
        }
    }
}
