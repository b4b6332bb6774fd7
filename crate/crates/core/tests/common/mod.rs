#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use superhedge::market::{check_weak_na, EventTree, Market, MartingalePair};
use superhedge::policy::{make_american, make_bermudan, make_european, make_random_expiry, ExercisePolicy, PayoffProcess, StoppingTime};
use superhedge::rational::{frac, q, qv};
use superhedge::{Vector, Q};

/// One-step, four-scenario, three-asset model with cash as the last asset.
pub fn four_state_market() -> Market {
    let tree = EventTree::uniform(1, 4);
    let prices = vec![
        qv(&[10, 20, 1]),
        qv(&[8, 18, 1]),
        qv(&[12, 18, 1]),
        qv(&[8, 22, 1]),
        qv(&[12, 22, 1]),
    ];
    Market::from_prices(tree, &prices, &frac(1, 6)).unwrap()
}

pub fn four_state_payoff() -> PayoffProcess {
    PayoffProcess::new(vec![
        qv(&[1, -1, 33]),
        qv(&[-1, 1, 10]),
        qv(&[-2, 1, 10]),
        qv(&[-1, 2, 10]),
        qv(&[-2, 2, 10]),
    ])
}

pub struct Instance {
    pub market: Market,
    pub payoff: PayoffProcess,
    pub policy: ExercisePolicy,
    pub seed: MartingalePair,
    pub i: usize,
    pub label: String,
}

fn random_tree(rng: &mut ChaCha8Rng) -> EventTree {
    let horizon = rng.gen_range(1..=3);
    let max_branch = if horizon == 3 { 2 } else { 3 };
    let mut counts = Vec::new();
    let mut level = 1;
    for _ in 0..horizon {
        let mut next = 0;
        for _ in 0..level {
            let c = rng.gen_range(1..=max_branch);
            counts.push(c);
            next += c;
        }
        level = next;
    }
    counts.extend(std::iter::repeat_n(0, level));
    EventTree::from_child_counts(&counts).unwrap()
}

fn random_prices(rng: &mut ChaCha8Rng, tree: &EventTree, d: usize) -> Vec<Vector> {
    let mut prices: Vec<Vector> = Vec::with_capacity(tree.len());
    for k in 0..tree.len() {
        let mut p = match tree.parent(k) {
            None => (0..d - 1).map(|_| q(rng.gen_range(5..=15))).collect::<Vector>(),
            Some(par) => prices[par][..d - 1]
                .iter()
                .map(|s| s * frac(rng.gen_range(8..=12), 10))
                .collect(),
        };
        p.push(q(1));
        prices.push(p);
    }
    prices
}

fn random_policy(rng: &mut ChaCha8Rng, tree: &EventTree, american: bool) -> ExercisePolicy {
    if american {
        return make_american(tree);
    }
    match rng.gen_range(0..3) {
        0 => make_european(tree),
        1 => {
            let mut dates: Vec<usize> = (0..tree.horizon()).filter(|_| rng.gen_bool(0.5)).collect();
            dates.push(tree.horizon());
            make_bermudan(tree, &dates).unwrap()
        }
        _ => {
            let stop = (0..tree.len()).map(|k| tree.is_leaf(k) || (tree.time(k) > 0 && rng.gen_bool(0.3))).collect();
            let sigma = first_stops(tree, stop);
            make_random_expiry(tree, &sigma)
        }
    }
}

/// Keeps only the first marked node on every path.
fn first_stops(tree: &EventTree, marked: Vec<bool>) -> StoppingTime {
    let mut stop = vec![false; tree.len()];
    let mut above = vec![false; tree.len()];
    for k in 0..tree.len() {
        if let Some(p) = tree.parent(k) {
            above[k] = above[p] || stop[p];
        }
        stop[k] = marked[k] && !above[k];
    }
    StoppingTime { stop }
}

/// Random instances that pass the weak no-arbitrage check.
pub fn random_instances(seed: u64, count: usize, american_only: bool, european_only: bool) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let d = rng.gen_range(2..=3);
        let tree = random_tree(&mut rng);
        let prices = random_prices(&mut rng, &tree, d);
        let k = frac(rng.gen_range(0..=4), 40);
        let Ok(market) = Market::from_prices(tree, &prices, &k) else { continue };
        let i = d - 1;
        let Some(seed) = check_weak_na(&market, i) else { continue };
        let policy = if european_only {
            make_european(&market.tree)
        } else {
            random_policy(&mut rng, &market.tree, american_only)
        };
        let xi = (0..market.tree.len())
            .map(|_| (0..d).map(|_| q(rng.gen_range(-3..=3))).collect())
            .collect();
        let label = format!("random #{} (d={d}, T={}, nodes={})", out.len(), market.tree.horizon(), market.tree.len());
        out.push(Instance { market, payoff: PayoffProcess::new(xi), policy, seed, i, label });
    }
    out
}

pub fn unit_cash(d: usize) -> Vector {
    superhedge::rational::unit(d, d - 1)
}

pub fn q_of(s: &str) -> Q {
    superhedge::rational::parse_q(s).unwrap()
}
