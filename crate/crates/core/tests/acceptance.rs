//! End-to-end acceptance run: each criterion prints one PASS/FAIL line.

mod common;

use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use superhedge::buyer::{self, bid_price, build_buyer_sets, buyer_hedge, classify_vertices, verify_buyer_hedge, Membership};
use superhedge::market::{check_weak_na, EventTree, Market};
use superhedge::oracle::{expectation, lp_ask, lp_bid, perturb_pair, verify_pair};
use superhedge::policy::{make_american, ExercisePolicy, PayoffProcess, DEFAULT_ENUMERATION_CAP};
use superhedge::rational::{frac, q, scale, unit};
use superhedge::seller::{
    ask_price, build_seller_sets, epigraph_section, seller_dual, seller_hedge, verify_seller_hedge, Convention,
};
use superhedge::{Vector, Q};

use common::{four_state_market, four_state_payoff, q_of, random_instances, Instance};

const CAP: usize = buyer::DEFAULT_PIECE_CAP;

struct Outcome {
    failures: Vec<String>,
    checked: usize,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), checked: 0 }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.checked += 1;
        self.failures.push(what);
    }
}

fn report(n: usize, title: &str, out: &Outcome, elapsed: Duration, limit: Option<Duration>) -> bool {
    let slow = limit.is_some_and(|l| elapsed > l);
    let ok = out.failures.is_empty() && !slow;
    let mut line = format!(
        "criterion {n} [{}] {title}: {} checks, {:.2}s",
        if ok { "PASS" } else { "FAIL" },
        out.checked,
        elapsed.as_secs_f64()
    );
    if let Some(l) = limit {
        line += &format!(" (limit {}s)", l.as_secs());
    }
    println!("{line}");
    for f in out.failures.iter().take(5) {
        println!("    {f}");
    }
    ok
}

fn sorted(mut v: Vec<Vector>) -> Vec<Vector> {
    v.sort();
    v
}

fn vecs(rows: &[&[&str]]) -> Vec<Vector> {
    rows.iter().map(|r| r.iter().map(|s| q_of(s)).collect()).collect()
}

fn golden_instances() -> Vec<Instance> {
    let market = four_state_market();
    let seed = check_weak_na(&market, 2).expect("four-state model is arbitrage free");
    let policy = make_american(&market.tree);
    vec![Instance { market, payoff: four_state_payoff(), policy, seed, i: 2, label: "four-state American".into() }]
}

fn criterion_1() -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    let m = four_state_market();
    let am = make_american(&m.tree);
    let sets = build_seller_sets(&m, &four_state_payoff(), &am, Convention::Standard).unwrap();
    let ask = ask_price(&sets, 2).unwrap();
    out.check(ask == frac(134, 3), || format!("ask {ask}, expected 134/3"));
    // points (s¹, s², -Z) of the section s³ = 1
    let found: Vec<Vector> = epigraph_section(&sets.z[0], 2)
        .vertices()
        .iter()
        .map(|v| vec![v[1].clone(), v[2].clone(), -v[0].clone()])
        .collect();
    let expected = vecs(&[
        &["10", "120/7", "181/7"],
        &["60/7", "132/7", "262/7"],
        &["35/3", "22", "106/3"],
        &["35/3", "70/3", "38"],
        &["60/7", "120/7", "184/7"],
        &["35/3", "20", "950/33"],
        &["11", "132/7", "194/7"],
        &["66/7", "22", "310/7"],
        &["60/7", "20", "3170/77"],
        &["10", "70/3", "134/3"],
    ]);
    out.check(sorted(found.clone()) == sorted(expected), || format!("section vertices {found:?}"));
    report(1, "golden ask and dual section", &out, start.elapsed(), Some(Duration::from_secs(1)))
}

fn criterion_2() -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    let m = four_state_market();
    let am = make_american(&m.tree);
    let sets = build_buyer_sets(&m, &four_state_payoff(), &am, CAP).unwrap();
    let bid = bid_price(&sets, 2).unwrap();
    out.check(bid == frac(59, 3), || format!("bid {bid}, expected 59/3"));
    let lowest = scale(&-bid, &unit(3, 2));
    out.check(sets.u[0].contains(&lowest), || "bid point not in U".into());
    let mut got = classify_vertices(&sets, 0);
    got.sort();
    let only_u = vecs(&[&["-1", "1", "-33"]]);
    let only_v = vecs(&[&["4", "-13/2", "163/2"], &["4", "-15/7", "-10"]]);
    let both = vecs(&[
        &["-1", "-39/7", "361/3"],
        &["19/5", "-15/7", "-23/3"],
        &["39/10", "-73/35", "-10"],
        &["4", "-233/112", "-89/8"],
        &["127/30", "-15/7", "-12"],
    ]);
    let mut expected: Vec<(Vector, Membership)> = Vec::new();
    expected.extend(only_u.into_iter().map(|v| (v, Membership::OnlyU)));
    expected.extend(only_v.into_iter().map(|v| (v, Membership::OnlyV)));
    expected.extend(both.into_iter().map(|v| (v, Membership::Both)));
    expected.sort();
    out.check(got == expected, || format!("vertices {got:?}"));
    report(2, "golden bid and union vertices", &out, start.elapsed(), Some(Duration::from_secs(1)))
}

fn criterion_3(instances: &[Instance]) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    for inst in instances {
        let Instance { market, payoff, policy, seed, i, label } = inst;
        let sets = build_seller_sets(market, payoff, policy, Convention::Standard).unwrap();
        let ask = ask_price(&sets, *i).unwrap();
        match seller_dual(&sets, market, payoff, policy, *i, seed) {
            Ok(cert) => {
                out.check(cert.value == ask, || format!("{label}: seller certificate {} vs ask {ask}", cert.value));
                let v = verify_pair(market, &cert.pair, &cert.chi, Some(*i));
                out.check(v.is_ok(), || format!("{label}: seller pair rejected: {v:?}"));
            }
            Err(e) => out.fail(format!("{label}: seller_dual failed: {e}")),
        }
        match buyer::price_and_certify(market, payoff, policy, *i, seed, CAP) {
            Ok((bid, hedge, cert)) => {
                out.check(cert.value == bid, || format!("{label}: buyer certificate {} vs bid {bid}", cert.value));
                let chi = hedge.tau.to_randomised();
                let v = verify_pair(market, &cert.pair, &chi, Some(*i));
                out.check(v.is_ok(), || format!("{label}: buyer pair rejected: {v:?}"));
                let e = expectation(&market.tree, &cert.pair, payoff, &chi);
                out.check(e == bid, || format!("{label}: buyer expectation {e} vs bid {bid}"));
            }
            Err(e) => out.fail(format!("{label}: buyer certificate failed: {e}")),
        }
    }
    report(3, "strong-duality certificates", &out, start.elapsed(), Some(Duration::from_secs(60)))
}

fn criterion_4(instances: &[Instance]) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    for inst in instances {
        let Instance { market, payoff, policy, i, label, .. } = inst;
        let sets = build_seller_sets(market, payoff, policy, Convention::Standard).unwrap();
        let ask = ask_price(&sets, *i).unwrap();
        let oracle = lp_ask(market, payoff, policy, *i).unwrap();
        out.check(ask == oracle, || format!("{label}: ask {ask} vs LP {oracle}"));
        let bid = bid_price(&build_buyer_sets(market, payoff, policy, CAP).unwrap(), *i).unwrap();
        let (oracle, _) = lp_bid(market, payoff, policy, *i, DEFAULT_ENUMERATION_CAP).unwrap();
        out.check(bid == oracle, || format!("{label}: bid {bid} vs enumeration {oracle}"));
    }
    report(4, "oracle equivalence", &out, start.elapsed(), Some(Duration::from_secs(120)))
}

fn criterion_5() -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    for inst in random_instances(505, 50, false, true) {
        let Instance { market, payoff, policy, i, label, .. } = &inst;
        let bid = bid_price(&build_buyer_sets(market, payoff, policy, CAP).unwrap(), *i).unwrap();
        let neg = payoff.negated();
        let ask = ask_price(&build_seller_sets(market, &neg, policy, Convention::Standard).unwrap(), *i).unwrap();
        out.check(bid == -ask.clone(), || format!("{label}: bid {bid} vs -ask(-ζ) {}", -ask));
    }
    report(5, "European symmetry", &out, start.elapsed(), None)
}

/// Snell envelope of `ξ·S` under the risk-neutral measure of a frictionless
/// binomial model with stock and cash.
fn binomial_snell(s0: &Q, up: &Q, down: &Q, horizon: usize, payoff: impl Fn(usize, &Q) -> Q) -> Q {
    let p = (Q::from_integer(1.into()) - down) / (up - down);
    let price = |t: usize, ups: usize| -> Q {
        let mut s = s0.clone();
        for _ in 0..ups {
            s *= up;
        }
        for _ in 0..t - ups {
            s *= down;
        }
        s
    };
    let mut values: Vec<Q> = (0..=horizon).map(|u| payoff(horizon, &price(horizon, u))).collect();
    for t in (0..horizon).rev() {
        values = (0..=t)
            .map(|u| {
                let cont = &p * &values[u + 1] + (Q::from_integer(1.into()) - &p) * &values[u];
                let now = payoff(t, &price(t, u));
                if now > cont { now } else { cont }
            })
            .collect();
    }
    values.swap_remove(0)
}

fn criterion_6(instances: &[Instance]) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    for inst in instances {
        let Instance { market, payoff, policy, i, label, .. } = inst;
        let ask = ask_price(&build_seller_sets(market, payoff, policy, Convention::Standard).unwrap(), *i).unwrap();
        let bid = bid_price(&build_buyer_sets(market, payoff, policy, CAP).unwrap(), *i).unwrap();
        out.check(bid <= ask, || format!("{label}: bid {bid} above ask {ask}"));
    }
    let (up, down, s0) = (frac(6, 5), frac(9, 10), q(20));
    for horizon in 1..=3 {
        let tree = EventTree::uniform(horizon, 2);
        // child 0 is the up move
        let mut prices: Vec<Vector> = Vec::with_capacity(tree.len());
        for k in 0..tree.len() {
            let s = match tree.parent(k) {
                None => s0.clone(),
                Some(p) => {
                    let f = if tree.children(p)[0] == k { &up } else { &down };
                    &prices[p][0] * f
                }
            };
            prices.push(vec![s, q(1)]);
        }
        let market = Market::from_prices(tree, &prices, &q(0)).unwrap();
        let strike = q(21);
        // American put: deliver one share, receive the strike in cash
        let xi = PayoffProcess::new((0..market.tree.len()).map(|_| vec![q(-1), strike.clone()]).collect());
        let am = make_american(&market.tree);
        let expected = binomial_snell(&s0, &up, &down, horizon, |_, s| &strike - s);
        let ask = ask_price(&build_seller_sets(&market, &xi, &am, Convention::Standard).unwrap(), 1).unwrap();
        let bid = bid_price(&build_buyer_sets(&market, &xi, &am, CAP).unwrap(), 1).unwrap();
        out.check(ask == expected && bid == expected, || {
            format!("binomial T={horizon}: ask {ask}, bid {bid}, backward induction {expected}")
        });
    }
    report(6, "bid/ask ordering and frictionless binomial", &out, start.elapsed(), None)
}

fn criterion_7(instances: &[Instance]) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    for inst in instances {
        let Instance { market, payoff, policy, i, label, .. } = inst;
        let d = market.d();
        let sets = build_seller_sets(market, payoff, policy, Convention::Standard).unwrap();
        let ask = ask_price(&sets, *i).unwrap();
        match seller_hedge(&sets, market, policy, &ask, *i) {
            Ok(y) => {
                let v = verify_seller_hedge(&y, market, payoff, policy);
                out.check(v.is_ok(), || format!("{label}: seller hedge rejected: {v:?}"));
            }
            Err(e) => out.fail(format!("{label}: seller hedge failed: {e}")),
        }
        let short = &ask - q(1);
        out.check(seller_hedge(&sets, market, policy, &short, *i).is_err(), || {
            format!("{label}: seller hedge accepted {short}")
        });
        let bsets = build_buyer_sets(market, payoff, policy, CAP).unwrap();
        let bid = bid_price(&bsets, *i).unwrap();
        match buyer_hedge(&bsets, market, policy, &scale(&-bid.clone(), &unit(d, *i))) {
            Ok(h) => {
                let v = verify_buyer_hedge(&h, market, payoff, policy);
                out.check(v.is_ok(), || format!("{label}: buyer hedge rejected: {v:?}"));
            }
            Err(e) => out.fail(format!("{label}: buyer hedge failed: {e}")),
        }
        let over = -(&bid + q(1));
        out.check(buyer_hedge(&bsets, market, policy, &scale(&over, &unit(d, *i))).is_err(), || {
            format!("{label}: buyer hedge accepted {over}")
        });
    }
    report(7, "hedge verification", &out, start.elapsed(), None)
}

fn criterion_8(instances: &[Instance]) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    for inst in instances {
        let Instance { market, payoff, policy, seed, i, label } = inst;
        let sets = build_seller_sets(market, payoff, policy, Convention::Standard).unwrap();
        let Ok(cert) = seller_dual(&sets, market, payoff, policy, *i, seed) else {
            out.fail(format!("{label}: no certificate to perturb"));
            continue;
        };
        let base = expectation(&market.tree, &cert.pair, payoff, &cert.chi);
        for delta in [frac(1, 10), frac(1, 1000)] {
            match perturb_pair(&market.tree, &cert.pair, &cert.chi, payoff, &delta, seed) {
                Ok(p) => {
                    out.check(p.prob.iter().all(Signed::is_positive), || format!("{label}: zero probability"));
                    let v = verify_pair(market, &p, &cert.chi, Some(*i));
                    out.check(v.is_ok(), || format!("{label}: perturbed pair rejected: {v:?}"));
                    let gap = (expectation(&market.tree, &p, payoff, &cert.chi) - &base).abs();
                    out.check(gap < delta, || format!("{label}: expectation moved by {gap} ≥ {delta}"));
                }
                Err(e) => out.fail(format!("{label}: perturbation failed: {e}")),
            }
        }
    }
    report(8, "perturbation to equivalent pairs", &out, start.elapsed(), None)
}

fn criterion_9() -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    let mut strict = 0;
    let mut instances = golden_instances();
    instances.extend(random_instances(909, 50, true, false));
    for inst in &instances {
        let Instance { market, payoff, policy, i, label, .. } = inst;
        let ask = ask_price(&build_seller_sets(market, payoff, policy, Convention::Standard).unwrap(), *i).unwrap();
        let alt = ask_price(&build_seller_sets(market, payoff, policy, Convention::Interchanged).unwrap(), *i).unwrap();
        out.check(alt >= ask, || format!("{label}: interchanged {alt} below standard {ask}"));
        if alt > ask {
            strict += 1;
        }
    }
    println!("    interchanged ask strictly higher on {strict} of {} instances", instances.len());
    report(9, "convention ordering", &out, start.elapsed(), None)
}

#[test]
fn acceptance() {
    let mut instances = golden_instances();
    instances.extend(random_instances(2024, 100, false, false));
    let policies: Vec<&ExercisePolicy> = instances.iter().map(|x| &x.policy).collect();
    assert!(policies.iter().all(|p| p.allowed.iter().any(|&a| a)));
    let zero_payoffs = instances.iter().filter(|x| x.payoff.xi.iter().all(|v| v.iter().all(Zero::is_zero))).count();
    assert!(zero_payoffs < instances.len());
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(&instances),
        criterion_4(&instances),
        criterion_5(),
        criterion_6(&instances),
        criterion_7(&instances),
        criterion_8(&instances),
        criterion_9(),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(k, _)| k + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
