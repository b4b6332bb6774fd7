//! Buyer side: union-valued backward recursion, bid price, hedge with its
//! stopping time, and the dual certificate.

use crate::error::{Error, Result};
use crate::geometry::{PolyUnion, Polyhedron};
use crate::market::{Market, MartingalePair};
use crate::policy::{ExercisePolicy, PayoffProcess, StoppingTime};
use crate::rational::{add, scale, unit, Vector, Q};
use crate::seller::{build_seller_sets, check_inputs, seller_dual, Convention, DualCertificate, Strategy};

/// Default bound on the number of pieces in any one union.
pub const DEFAULT_PIECE_CAP: usize = 10_000;

/// Per-node unions `U`, `V`, `W`, `Z` of the buyer's recursion.
#[derive(Clone, Debug)]
pub struct BuyerSets {
    pub u: Vec<PolyUnion>,
    pub v: Vec<PolyUnion>,
    pub w: Vec<PolyUnion>,
    pub z: Vec<PolyUnion>,
}

pub fn build_buyer_sets(
    market: &Market,
    payoff: &PayoffProcess,
    policy: &ExercisePolicy,
    piece_cap: usize,
) -> Result<BuyerSets> {
    let tree = &market.tree;
    let d = market.d();
    let n = tree.len();
    check_inputs(market, payoff, policy)?;
    let future = policy.future(tree);
    let none = PolyUnion::empty(d);
    let mut u = vec![none.clone(); n];
    let mut v = vec![none.clone(); n];
    let mut w = vec![none.clone(); n];
    let mut z = vec![none.clone(); n];
    let guard = |x: &PolyUnion, k: usize| -> Result<()> {
        if x.pieces().len() > piece_cap {
            return Err(Error::CapExceeded(format!(
                "more than {piece_cap} pieces at `{}`",
                market.tree.id(k)
            )));
        }
        Ok(())
    };
    for k in (0..n).rev() {
        let cone = &market.cones[k].cone;
        if policy.allows(k) {
            u[k] = PolyUnion::single(cone.translate(&crate::rational::neg(payoff.at(k))));
        }
        if future[k] {
            let mut acc = PolyUnion::single(Polyhedron::full(d));
            for &c in tree.children(k) {
                acc = acc.intersect(&z[c]);
                guard(&acc, k)?;
            }
            v[k] = acc.minkowski_sum_cone(cone);
            w[k] = acc;
        }
        z[k] = u[k].union(&v[k]);
        guard(&z[k], k)?;
    }
    Ok(BuyerSets { u, v, w, z })
}

/// `-min {x : x e^i ∈ Z_0}`.
pub fn bid_price(sets: &BuyerSets, i: usize) -> Result<Q> {
    Ok(-sets.z[0].min_along_axis(i)?)
}

/// Where a corner of `Z` sits relative to `U` and `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Membership {
    OnlyU,
    OnlyV,
    Both,
}

/// Corners of `Z` at `node`, each tagged by the sets containing it.
pub fn classify_vertices(sets: &BuyerSets, node: usize) -> Vec<(Vector, Membership)> {
    sets.z[node]
        .vertices()
        .into_iter()
        .map(|x| {
            let tag = match (sets.u[node].contains(&x), sets.v[node].contains(&x)) {
                (true, false) => Membership::OnlyU,
                (false, true) => Membership::OnlyV,
                _ => Membership::Both,
            };
            (x, tag)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuyerHedge {
    pub strategy: Strategy,
    pub tau: StoppingTime,
}

/// Forward construction from the initial portfolio `z`: stop as soon as the
/// portfolio lies in `U`, otherwise rebalance into `W`.
pub fn buyer_hedge(sets: &BuyerSets, market: &Market, policy: &ExercisePolicy, z: &[Q]) -> Result<BuyerHedge> {
    let tree = &market.tree;
    let n = tree.len();
    if !sets.z[0].contains(z) {
        return Err(Error::EndowmentInsufficient);
    }
    let initial = z.to_vec();
    let mut positions: Vec<Vector> = vec![Vec::new(); n];
    let mut stop = vec![false; n];
    let mut done = vec![false; n];
    for k in 0..n {
        let held = match tree.parent(k) {
            Some(p) => {
                done[k] = done[p] || stop[p];
                positions[p].clone()
            }
            None => initial.clone(),
        };
        if done[k] {
            positions[k] = held;
            continue;
        }
        if policy.allows(k) && sets.u[k].contains(&held) {
            stop[k] = true;
            positions[k] = held;
            continue;
        }
        let cone = &market.cones[k].cone;
        positions[k] = sets.w[k]
            .pieces()
            .iter()
            .find_map(|p| if p.contains(&held) { Some(held.clone()) } else { p.split_point(&held, cone) })
            .ok_or_else(|| Error::Verification(format!("no rebalancing found at `{}`", tree.id(k))))?;
    }
    Ok(BuyerHedge { strategy: Strategy { initial, positions }, tau: StoppingTime { stop } })
}

/// Self-financing, `τ` consistent with the policy, `y + ξ` solvent when
/// stopping, and no earlier node where stopping would already have been
/// solvent.
pub fn verify_buyer_hedge(
    h: &BuyerHedge,
    market: &Market,
    payoff: &PayoffProcess,
    policy: &ExercisePolicy,
) -> std::result::Result<(), String> {
    let tree = &market.tree;
    h.strategy.is_self_financing(market)?;
    if !h.tau.consistent_with(tree, policy) {
        return Err("stopping time is not consistent with the exercise policy".into());
    }
    let mut done = vec![false; tree.len()];
    for k in 0..tree.len() {
        if let Some(p) = tree.parent(k) {
            done[k] = done[p] || h.tau.stop[p];
        }
        if done[k] || !policy.allows(k) {
            continue;
        }
        let covered = market.solvent(k, &add(h.strategy.holding(market, k), payoff.at(k)));
        match (h.tau.stop[k], covered) {
            (true, false) => return Err(format!("payoff at `{}` does not cover the debt", tree.id(k))),
            (false, true) => return Err(format!("stopping at `{}` was possible but skipped", tree.id(k))),
            _ => {}
        }
    }
    Ok(())
}

/// Certificate for the buyer at the stopping time `tau`: the seller's
/// certificate for the European claim `-ξ` paid at `tau`. The value is
/// reported for `ξ`.
pub fn buyer_dual(
    market: &Market,
    payoff: &PayoffProcess,
    tau: &StoppingTime,
    i: usize,
    seed: &MartingalePair,
) -> Result<DualCertificate> {
    let policy = ExercisePolicy::new(tau.stop.clone());
    let neg = payoff.negated();
    let sets = build_seller_sets(market, &neg, &policy, Convention::Standard)?;
    let mut cert = seller_dual(&sets, market, &neg, &policy, i, seed)?;
    if cert.chi.as_pure().as_ref() != Some(tau) {
        return Err(Error::Verification("certificate does not stop at the given time".into()));
    }
    cert.value = -cert.value;
    Ok(cert)
}

/// Bid price, hedge from `-bid e^i` and its certificate in one go.
pub fn price_and_certify(
    market: &Market,
    payoff: &PayoffProcess,
    policy: &ExercisePolicy,
    i: usize,
    seed: &MartingalePair,
    piece_cap: usize,
) -> Result<(Q, BuyerHedge, DualCertificate)> {
    let sets = build_buyer_sets(market, payoff, policy, piece_cap)?;
    let bid = bid_price(&sets, i)?;
    let hedge = buyer_hedge(&sets, market, policy, &scale(&-bid.clone(), &unit(market.d(), i)))?;
    let cert = buyer_dual(market, payoff, &hedge.tau, i, seed)?;
    Ok((bid, hedge, cert))
}
