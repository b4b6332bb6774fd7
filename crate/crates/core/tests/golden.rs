mod common;

use superhedge::buyer::{bid_price, build_buyer_sets, buyer_dual, buyer_hedge, verify_buyer_hedge, Membership, DEFAULT_PIECE_CAP};
use superhedge::market::{check_weak_na, frictionless_to_pi};
use superhedge::oracle::{expectation, lp_ask, lp_bid, perturb_pair, verify_pair};
use superhedge::policy::{enumerate_stopping_times, make_american, StoppingTime};
use superhedge::rational::{frac, q, qv, scale, unit};
use superhedge::seller::{
    ask_price, build_seller_sets, check_hedge_pair_inequality, check_tail_identity, seller_dual, seller_hedge,
    verify_seller_hedge, Convention,
};
use superhedge::Error;

use common::{four_state_market, four_state_payoff};

#[test]
fn exchange_matrix_from_prices() {
    let pi = frictionless_to_pi(&qv(&[12, 8, 1]), &frac(1, 3)).unwrap();
    assert_eq!(pi[0], vec![q(1), frac(8, 9), frac(1, 9)]);
    assert_eq!(pi[2], vec![q(16), frac(32, 3), q(1)]);
    assert_eq!(pi[1][2], frac(1, 6));
    // (1 + 1/3) · 12 / 8
    assert_eq!(pi[1][0], q(2));
}

#[test]
fn four_state_seller() {
    let m = four_state_market();
    let xi = four_state_payoff();
    let am = make_american(&m.tree);
    let sets = build_seller_sets(&m, &xi, &am, Convention::Standard).unwrap();
    let ask = ask_price(&sets, 2).unwrap();
    assert_eq!(ask, frac(134, 3));
    assert_eq!(lp_ask(&m, &xi, &am, 2).unwrap(), ask);

    let y = seller_hedge(&sets, &m, &am, &ask, 2).unwrap();
    verify_seller_hedge(&y, &m, &xi, &am).unwrap();
    assert_eq!(seller_hedge(&sets, &m, &am, &(&ask - frac(1, 100)), 2), Err(Error::EndowmentInsufficient));

    let seed = check_weak_na(&m, 2).unwrap();
    let cert = seller_dual(&sets, &m, &xi, &am, 2, &seed).unwrap();
    assert_eq!(cert.value, ask);
    assert_eq!(expectation(&m.tree, &cert.pair, &xi, &cert.chi), frac(134, 3));
    verify_pair(&m, &cert.pair, &cert.chi, Some(2)).unwrap();
    assert!(check_tail_identity(&m, &cert));
    assert!(check_hedge_pair_inequality(&m, &xi, &y, &cert.pair, &cert.chi));

    let delta = frac(1, 1000);
    let p = perturb_pair(&m.tree, &cert.pair, &cert.chi, &xi, &delta, &seed).unwrap();
    assert!(p.is_equivalent());
    verify_pair(&m, &p, &cert.chi, Some(2)).unwrap();
    let gap = expectation(&m.tree, &p, &xi, &cert.chi) - frac(134, 3);
    assert!(gap < delta && -gap < delta);
}

#[test]
fn four_state_buyer() {
    let m = four_state_market();
    let xi = four_state_payoff();
    let am = make_american(&m.tree);
    let sets = build_buyer_sets(&m, &xi, &am, DEFAULT_PIECE_CAP).unwrap();
    let bid = bid_price(&sets, 2).unwrap();
    assert_eq!(bid, frac(59, 3));
    let (oracle, tau) = lp_bid(&m, &xi, &am, 2, 100).unwrap();
    assert_eq!(oracle, bid);
    assert_eq!(tau, StoppingTime::constant(&m.tree, 0));
    // two consistent stopping times: now, or at the leaves
    assert_eq!(enumerate_stopping_times(&m.tree, &am, 100).unwrap().len(), 2);

    let z = scale(&-bid.clone(), &unit(3, 2));
    assert!(sets.u[0].contains(&z));
    let h = buyer_hedge(&sets, &m, &am, &z).unwrap();
    assert_eq!(h.tau, StoppingTime::constant(&m.tree, 0));
    verify_buyer_hedge(&h, &m, &xi, &am).unwrap();
    let more = scale(&-(&bid + frac(1, 100)), &unit(3, 2));
    assert_eq!(buyer_hedge(&sets, &m, &am, &more), Err(Error::EndowmentInsufficient));

    let seed = check_weak_na(&m, 2).unwrap();
    let cert = buyer_dual(&m, &xi, &h.tau, 2, &seed).unwrap();
    assert_eq!(cert.value, frac(59, 3));
    assert_eq!(cert.chi.as_pure(), Some(h.tau.clone()));
    verify_pair(&m, &cert.pair, &cert.chi, Some(2)).unwrap();
    assert_eq!(expectation(&m.tree, &cert.pair, &xi, &cert.chi), frac(59, 3));
}

#[test]
fn four_state_buyer_set_is_not_convex() {
    let m = four_state_market();
    let xi = four_state_payoff();
    let am = make_american(&m.tree);
    let sets = build_buyer_sets(&m, &xi, &am, DEFAULT_PIECE_CAP).unwrap();
    let corners = superhedge::buyer::classify_vertices(&sets, 0);
    let a = qv(&[-1, 1, -33]);
    assert!(corners.contains(&(a.clone(), Membership::OnlyU)));
    let only_v: Vec<_> = corners.iter().filter(|(_, t)| *t == Membership::OnlyV).map(|(v, _)| v.clone()).collect();
    assert_eq!(only_v.len(), 2);
    let b = &only_v[0];
    let mid: Vec<_> = a.iter().zip(b).map(|(x, y)| (x + y) / q(2)).collect();
    assert!(sets.z[0].pieces().iter().all(|p| !p.contains(&mid)));
}

#[test]
fn interchanged_convention_costs_at_least_as_much() {
    let m = four_state_market();
    let xi = four_state_payoff();
    let am = make_american(&m.tree);
    let std = ask_price(&build_seller_sets(&m, &xi, &am, Convention::Standard).unwrap(), 2).unwrap();
    let alt = ask_price(&build_seller_sets(&m, &xi, &am, Convention::Interchanged).unwrap(), 2).unwrap();
    assert!(alt >= std);
}
