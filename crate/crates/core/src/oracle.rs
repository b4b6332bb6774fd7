//! Brute-force cross-checks: superhedging LPs straight from the definitions,
//! bid prices by enumerating stopping times, and exact checks on martingale
//! pairs.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::market::{in_dual_cone, EventTree, Market, MartingalePair};
use crate::policy::{enumerate_stopping_times, ExercisePolicy, PayoffProcess, RandomisedStoppingTime, StoppingTime};
use crate::rational::{dot, is_zero_vec, scale, Vector, Q};

type Expr = Vec<(usize, Q)>;

/// Adds `lhs - rhs ∈ S(node)` using one weight per exchange direction.
fn add_solvency(lp: &mut LinearProgram, pi: &[Vec<Q>], lhs: &[Expr], rhs: &[Q]) {
    let d = pi.len();
    let mut beta = vec![vec![0usize; d]; d];
    for (a, row) in beta.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            if a != b {
                *slot = lp.add_var(false);
            }
        }
    }
    for j in 0..d {
        let mut row = lhs[j].clone();
        for k in 0..d {
            if k != j {
                row.push((beta[j][k], -pi[j][k].clone()));
                row.push((beta[k][j], Q::one()));
            }
        }
        lp.add_constraint(row, Relation::Ge, rhs[j].clone());
    }
}

/// Smallest initial amount of asset `i` from which a self-financing strategy
/// covers `ξ` at every node where exercise is allowed.
pub fn lp_ask(market: &Market, payoff: &PayoffProcess, policy: &ExercisePolicy, i: usize) -> Result<Q> {
    let tree = &market.tree;
    let d = market.d();
    let future = policy.future(tree);
    let mut lp = LinearProgram::new(1);
    lp.set_free(0);
    lp.set_cost(0, Q::one());
    let mut pos: Vec<Option<Vec<usize>>> = vec![None; tree.len()];
    for (k, f) in future.iter().enumerate() {
        if *f {
            pos[k] = Some((0..d).map(|_| lp.add_var(true)).collect());
        }
    }
    let holding = |k: usize| -> Vec<Expr> {
        match tree.parent(k) {
            None => (0..d).map(|j| if j == i { vec![(0, Q::one())] } else { vec![] }).collect(),
            Some(p) => pos[p].as_ref().expect("parent rebalances").iter().map(|&v| vec![(v, Q::one())]).collect(),
        }
    };
    let zero = vec![Q::zero(); d];
    for k in 0..tree.len() {
        let star_here = policy.allows(k) || future[k];
        if !star_here {
            continue;
        }
        let h = holding(k);
        if let Some(p) = &pos[k] {
            let lhs: Vec<Expr> = h.iter().zip(p).map(|(e, &v)| {
                let mut e = e.clone();
                e.push((v, -Q::one()));
                e
            }).collect();
            add_solvency(&mut lp, &market.pi[k], &lhs, &zero);
        }
        if policy.allows(k) {
            add_solvency(&mut lp, &market.pi[k], &h, payoff.at(k));
        }
    }
    match lp.solve() {
        LpOutcome::Optimal(s) => Ok(s.value),
        LpOutcome::Unbounded => Err(Error::NoArbitrageViolated),
        LpOutcome::Infeasible => Err(Error::Verification("superhedging LP is infeasible".into())),
    }
}

/// Bid price as the best stopping time for the buyer, each priced by the
/// seller LP of the negated European claim.
pub fn lp_bid(
    market: &Market,
    payoff: &PayoffProcess,
    policy: &ExercisePolicy,
    i: usize,
    cap: usize,
) -> Result<(Q, StoppingTime)> {
    let neg = payoff.negated();
    let mut best: Option<(Q, StoppingTime)> = None;
    for tau in enumerate_stopping_times(&market.tree, policy, cap)? {
        let e = ExercisePolicy::new(tau.stop.clone());
        let v = -lp_ask(market, &neg, &e, i)?;
        if best.as_ref().is_none_or(|(b, _)| &v > b) {
            best = Some((v, tau));
        }
    }
    best.ok_or_else(|| Error::InvalidModel("policy admits no stopping time".into()))
}

/// `E_P[Σ_t χ_t ξ_t·S_t]`.
pub fn expectation(tree: &EventTree, pair: &MartingalePair, payoff: &PayoffProcess, chi: &RandomisedStoppingTime) -> Q {
    let probs = pair.node_probabilities(tree);
    (0..tree.len())
        .filter(|&k| !chi.chi[k].is_zero() && !probs[k].is_zero())
        .map(|k| &probs[k] * &chi.chi[k] * dot(payoff.at(k), &pair.s[k]))
        .sum()
}

/// Exact check of the approximate-martingale conditions for `chi`. With
/// `normalised = Some(i)` also requires `S^i ≡ 1`.
pub fn verify_pair(
    market: &Market,
    pair: &MartingalePair,
    chi: &RandomisedStoppingTime,
    normalised: Option<usize>,
) -> std::result::Result<(), String> {
    let tree = &market.tree;
    let n = tree.len();
    let d = market.d();
    if pair.prob.len() != n || pair.s.len() != n || chi.chi.len() != n {
        return Err("pair and stopping time must have one entry per node".into());
    }
    for k in 0..n {
        let id = tree.id(k);
        if pair.prob[k].is_negative() {
            return Err(format!("negative probability at `{id}`"));
        }
        let kids = tree.children(k);
        if !kids.is_empty() {
            let total: Q = kids.iter().map(|&c| pair.prob[c].clone()).sum();
            if !total.is_one() {
                return Err(format!("probabilities below `{id}` sum to {total}"));
            }
        }
        let s = &pair.s[k];
        if s.len() != d {
            return Err(format!("price vector at `{id}` has the wrong length"));
        }
        if is_zero_vec(s) || !in_dual_cone(&market.pi[k], s) {
            return Err(format!("price vector at `{id}` is outside the dual cone"));
        }
        if let Some(i) = normalised {
            if !s[i].is_one() {
                return Err(format!("price vector at `{id}` is not normalised"));
            }
        }
    }
    let mut tail: Vec<Vector> = vec![vec![Q::zero(); d]; n];
    for k in (0..n).rev() {
        let mut acc = scale(&chi.chi[k], &pair.s[k]);
        let mut next = vec![Q::zero(); d];
        for &c in tree.children(k) {
            for (a, b) in next.iter_mut().zip(&tail[c]) {
                *a += &pair.prob[c] * b;
            }
        }
        if !in_dual_cone(&market.pi[k], &next) {
            return Err(format!("conditional tail at `{}` is outside the dual cone", tree.id(k)));
        }
        for (a, b) in acc.iter_mut().zip(&next) {
            *a += b;
        }
        tail[k] = acc;
    }
    Ok(())
}

/// Mixes `bar` with the equivalent pair `seed` so that the result is
/// equivalent and its expectation moves by less than `delta`.
pub fn perturb_pair(
    tree: &EventTree,
    bar: &MartingalePair,
    chi: &RandomisedStoppingTime,
    payoff: &PayoffProcess,
    delta: &Q,
    seed: &MartingalePair,
) -> Result<MartingalePair> {
    if !delta.is_positive() {
        return Err(Error::InvalidModel("delta must be positive".into()));
    }
    if bar.is_equivalent() {
        return Ok(bar.clone());
    }
    let e_bar = expectation(tree, bar, payoff, chi);
    let e_seed = expectation(tree, seed, payoff, chi);
    let gap = (&e_seed - &e_bar).abs();
    if gap.is_zero() {
        return Ok(seed.clone());
    }
    let half = delta / Q::from_integer(2.into());
    let eps = (half / gap).min(Q::one());
    let pb = bar.node_probabilities(tree);
    let ps = seed.node_probabilities(tree);
    let mix: Vec<Q> = pb.iter().zip(&ps).map(|(a, b)| (Q::one() - &eps) * a + &eps * b).collect();
    let n = tree.len();
    let mut prob = vec![Q::one(); n];
    let mut s = Vec::with_capacity(n);
    for k in 0..n {
        if let Some(p) = tree.parent(k) {
            prob[k] = &mix[k] / &mix[p];
        }
        let wb = (Q::one() - &eps) * &pb[k] / &mix[k];
        let ws = &eps * &ps[k] / &mix[k];
        s.push(bar.s[k].iter().zip(&seed.s[k]).map(|(a, b)| &wb * a + &ws * b).collect());
    }
    Ok(MartingalePair { prob, s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{check_weak_na, EventTree};
    use crate::policy::{make_american, make_european};
    use crate::rational::{frac, q, qv};

    fn binomial() -> Market {
        let tree = EventTree::uniform(1, 2);
        Market::from_prices(tree, &[qv(&[10, 1]), qv(&[12, 1]), qv(&[9, 1])], &q(0)).unwrap()
    }

    #[test]
    fn lp_prices_of_a_frictionless_call() {
        let m = binomial();
        let xi = PayoffProcess::new(vec![qv(&[0, 0]), qv(&[1, -10]), qv(&[0, 0])]);
        let eu = make_european(&m.tree);
        assert_eq!(lp_ask(&m, &xi, &eu, 1).unwrap(), frac(2, 3));
        let (bid, tau) = lp_bid(&m, &xi, &eu, 1, 10).unwrap();
        assert_eq!(bid, frac(2, 3));
        assert_eq!(tau, StoppingTime::constant(&m.tree, 1));
        let zero = PayoffProcess::zero(&m.tree, 2);
        assert_eq!(lp_ask(&m, &zero, &make_american(&m.tree), 1).unwrap(), q(0));
    }

    #[test]
    fn expectation_of_simple_stopping_times() {
        let m = binomial();
        let pair = check_weak_na(&m, 1).unwrap();
        let xi = PayoffProcess::new(vec![qv(&[1, 2]), qv(&[1, 0]), qv(&[0, 3])]);
        let now = StoppingTime::constant(&m.tree, 0).to_randomised();
        assert_eq!(expectation(&m.tree, &pair, &xi, &now), q(12));
        let later = StoppingTime::constant(&m.tree, 1).to_randomised();
        assert_eq!(expectation(&m.tree, &pair, &xi, &later), frac(1, 3) * q(12) + frac(2, 3) * q(3));
    }

    #[test]
    fn pair_checks() {
        let m = binomial();
        let pair = check_weak_na(&m, 1).unwrap();
        let am = make_american(&m.tree);
        for t in 0..2 {
            verify_pair(&m, &pair, &StoppingTime::constant(&m.tree, t).to_randomised(), Some(1)).unwrap();
        }
        let mut bad = pair.clone();
        bad.s[1] = qv(&[13, 1]);
        assert!(verify_pair(&m, &bad, &StoppingTime::constant(&m.tree, 0).to_randomised(), Some(1)).is_err());
        let _ = am;
    }

    #[test]
    fn perturbation_of_an_equivalent_pair_is_identity() {
        let m = binomial();
        let pair = check_weak_na(&m, 1).unwrap();
        let chi = StoppingTime::constant(&m.tree, 1).to_randomised();
        let xi = PayoffProcess::zero(&m.tree, 2);
        let out = perturb_pair(&m.tree, &pair, &chi, &xi, &frac(1, 10), &pair).unwrap();
        assert_eq!(out, pair);
    }
}
