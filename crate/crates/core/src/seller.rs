//! Seller side: backward set recursion, ask price, superhedging strategy and
//! the dual certificate (randomised stopping time plus approximate
//! martingale pair).

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::{decompose_in_hull, epigraph_of_negation, section, support_of_negation, Polyhedron};
use crate::market::{Market, MartingalePair};
use crate::policy::{ExercisePolicy, PayoffProcess, RandomisedStoppingTime};
use crate::rational::{dot, lex_cmp, scale, sub, unit, Vector, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Convention {
    /// Rebalance only once it is known that the option is not exercised.
    #[default]
    Standard,
    /// Rebalance before the exercise decision is known.
    Interchanged,
}

/// Per-node sets `U`, `V`, `W`, `Z` of the seller's recursion.
#[derive(Clone, Debug)]
pub struct SellerSets {
    pub convention: Convention,
    pub u: Vec<Polyhedron>,
    pub v: Vec<Polyhedron>,
    pub w: Vec<Polyhedron>,
    pub z: Vec<Polyhedron>,
}

pub fn build_seller_sets(
    market: &Market,
    payoff: &PayoffProcess,
    policy: &ExercisePolicy,
    convention: Convention,
) -> Result<SellerSets> {
    let tree = &market.tree;
    let d = market.d();
    let n = tree.len();
    check_inputs(market, payoff, policy)?;
    let future = policy.future(tree);
    let full = Polyhedron::full(d);
    let mut u = vec![full.clone(); n];
    let mut v = vec![full.clone(); n];
    let mut w = vec![full.clone(); n];
    let mut z = vec![full.clone(); n];
    for k in (0..n).rev() {
        let cone = &market.cones[k].cone;
        if policy.allows(k) {
            u[k] = cone.translate(payoff.at(k));
        }
        if future[k] {
            let mut acc = full.clone();
            for &c in tree.children(k) {
                acc = acc.intersect(&z[c]);
            }
            v[k] = acc.minkowski_sum_cone(cone);
            w[k] = acc;
        }
        z[k] = match convention {
            Convention::Standard => u[k].intersect(&v[k]),
            Convention::Interchanged if tree.is_leaf(k) => u[k].clone(),
            Convention::Interchanged => w[k].intersect(&u[k]).minkowski_sum_cone(cone),
        };
        if z[k].is_empty() {
            return Err(Error::NoArbitrageViolated);
        }
    }
    Ok(SellerSets { convention, u, v, w, z })
}

pub(crate) fn check_inputs(market: &Market, payoff: &PayoffProcess, policy: &ExercisePolicy) -> Result<()> {
    let n = market.tree.len();
    let d = market.d();
    if payoff.xi.len() != n {
        return Err(Error::Dimension { expected: n, found: payoff.xi.len() });
    }
    if let Some(x) = payoff.xi.iter().find(|x| x.len() != d) {
        return Err(Error::Dimension { expected: d, found: x.len() });
    }
    let problems = crate::policy::validate_policy(&market.tree, policy);
    if !problems.is_empty() {
        return Err(Error::InvalidModel(problems.join("; ")));
    }
    Ok(())
}

/// `min {x : x e^i ∈ Z_0}`.
pub fn ask_price(sets: &SellerSets, i: usize) -> Result<Q> {
    sets.z[0].min_along_axis(i)
}

/// Initial portfolio plus the portfolio chosen at every node and held into
/// its successors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub initial: Vector,
    pub positions: Vec<Vector>,
}

impl Strategy {
    /// Portfolio held on arrival at `node`, before rebalancing.
    pub fn holding<'a>(&'a self, market: &Market, node: usize) -> &'a Vector {
        match market.tree.parent(node) {
            Some(p) => &self.positions[p],
            None => &self.initial,
        }
    }

    /// Every node rebalances from its holding into a solvent-difference position.
    pub fn is_self_financing(&self, market: &Market) -> std::result::Result<(), String> {
        for k in 0..market.tree.len() {
            let diff = sub(self.holding(market, k), &self.positions[k]);
            if !market.solvent(k, &diff) {
                return Err(format!("rebalancing at `{}` is not self-financing", market.tree.id(k)));
            }
        }
        Ok(())
    }
}

/// Forward construction of a superhedging strategy from `x0` units of asset `i`.
pub fn seller_hedge(sets: &SellerSets, market: &Market, policy: &ExercisePolicy, x0: &Q, i: usize) -> Result<Strategy> {
    if sets.convention != Convention::Standard {
        return Err(Error::Unsupported("hedging is implemented for the standard convention".into()));
    }
    let tree = &market.tree;
    let d = market.d();
    let initial = scale(x0, &unit(d, i));
    if !sets.z[0].contains(&initial) {
        return Err(Error::EndowmentInsufficient);
    }
    let future = policy.future(tree);
    let mut positions: Vec<Vector> = vec![Vec::new(); tree.len()];
    for k in 0..tree.len() {
        let held = match tree.parent(k) {
            Some(p) => positions[p].clone(),
            None => initial.clone(),
        };
        positions[k] = if !future[k] || sets.w[k].contains(&held) {
            held
        } else {
            sets.w[k]
                .split_point(&held, &market.cones[k].cone)
                .ok_or_else(|| Error::Verification(format!("no rebalancing found at `{}`", tree.id(k))))?
        };
    }
    Ok(Strategy { initial, positions })
}

/// Self-financing everywhere and `y - ξ` solvent wherever exercise is allowed.
pub fn verify_seller_hedge(
    y: &Strategy,
    market: &Market,
    payoff: &PayoffProcess,
    policy: &ExercisePolicy,
) -> std::result::Result<(), String> {
    y.is_self_financing(market)?;
    for k in 0..market.tree.len() {
        if policy.allows(k) && !market.solvent(k, &sub(y.holding(market, k), payoff.at(k))) {
            return Err(format!("payoff at `{}` is not covered", market.tree.id(k)));
        }
    }
    Ok(())
}

/// Epigraphs of the support functions of `-U`, `-V`, `-W`, `-Z` at a node.
#[derive(Clone, Debug)]
pub struct SupportEpigraphs {
    pub u: Polyhedron,
    pub v: Polyhedron,
    pub w: Polyhedron,
    pub z: Polyhedron,
}

pub fn support_epigraphs(sets: &SellerSets) -> Vec<SupportEpigraphs> {
    (0..sets.z.len())
        .map(|k| SupportEpigraphs {
            u: epigraph_of_negation(&sets.u[k]),
            v: epigraph_of_negation(&sets.v[k]),
            w: epigraph_of_negation(&sets.w[k]),
            z: epigraph_of_negation(&sets.z[k]),
        })
        .collect()
}

/// Slice `y^i = 1` of the epigraph of the support function of `-A`; points
/// are `(value, y)`.
pub fn epigraph_section(a: &Polyhedron, i: usize) -> Polyhedron {
    section(&epigraph_of_negation(a), i + 1)
}

/// Lowest point of an epigraph slice; ties go to the lexicographically least.
pub fn lowest_point(sec: &Polyhedron) -> Result<Vector> {
    sec.vertices()
        .iter()
        .min_by(|a, b| a[0].cmp(&b[0]).then_with(|| lex_cmp(&a[1..], &b[1..])))
        .cloned()
        .ok_or(Error::EmptySet)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub chi: RandomisedStoppingTime,
    pub pair: MartingalePair,
    pub value: Q,
    pub lambda: Vec<Q>,
    pub x_hat: Vec<Vector>,
    pub y_hat: Vec<Vector>,
}

fn lift(head: Q, y: &[Q]) -> Vector {
    let mut v = Vec::with_capacity(y.len() + 1);
    v.push(head);
    v.extend(y.iter().cloned());
    v
}

/// Builds an optimal randomised stopping time and approximate martingale
/// pair for the seller. `seed` is any equivalent martingale pair with
/// `S^i ≡ 1`; it fills in nodes where the construction leaves a free choice.
pub fn seller_dual(
    sets: &SellerSets,
    market: &Market,
    payoff: &PayoffProcess,
    policy: &ExercisePolicy,
    i: usize,
    seed: &MartingalePair,
) -> Result<DualCertificate> {
    if sets.convention != Convention::Standard {
        return Err(Error::Unsupported("dual certificates are implemented for the standard convention".into()));
    }
    let tree = &market.tree;
    let n = tree.len();
    let future = policy.future(tree);
    let support = |a: &Polyhedron, y: &[Q]| -> Result<Q> {
        support_of_negation(a, y)?.ok_or_else(|| Error::Verification("dual point outside the domain".into()))
    };
    let mut lambda = vec![Q::zero(); n];
    let mut s_hat: Vec<Vector> = vec![Vec::new(); n];
    let mut x_hat: Vec<Vector> = vec![Vec::new(); n];
    let mut y_hat: Vec<Vector> = vec![Vec::new(); n];
    let mut prob = vec![Q::one(); n];

    let root = lowest_point(&epigraph_section(&sets.z[0], i))?;
    let root_value = -root[0].clone();
    y_hat[0] = root[1..].to_vec();

    for k in 0..n {
        let y = y_hat[k].clone();
        match (policy.allows(k), future[k]) {
            (true, true) => {
                let value = support(&sets.z[k], &y)?;
                let pieces = [epigraph_section(&sets.u[k], i), epigraph_section(&sets.v[k], i)];
                let dec = decompose_in_hull(&lift(value, &y), &pieces)?;
                let mut s = None;
                let mut x = None;
                for h in dec {
                    if h.piece == 0 {
                        lambda[k] = h.weight;
                        s = Some(h.witness[1..].to_vec());
                    } else {
                        x = Some(h.witness[1..].to_vec());
                    }
                }
                s_hat[k] = s.unwrap_or_else(|| seed.s[k].clone());
                x_hat[k] = match x {
                    Some(x) => x,
                    None => lowest_point(&pieces[1])?[1..].to_vec(),
                };
            }
            (true, false) => {
                lambda[k] = Q::one();
                s_hat[k] = y.clone();
                x_hat[k] = seed.s[k].clone();
            }
            (false, true) => {
                s_hat[k] = seed.s[k].clone();
                x_hat[k] = y.clone();
            }
            (false, false) => {
                s_hat[k] = y.clone();
                x_hat[k] = y.clone();
            }
        }
        let kids = tree.children(k);
        if kids.is_empty() {
            continue;
        }
        if future[k] {
            let value = support(&sets.w[k], &x_hat[k])?;
            let pieces: Vec<Polyhedron> = kids.iter().map(|&c| epigraph_section(&sets.z[c], i)).collect();
            let dec = decompose_in_hull(&lift(value, &x_hat[k]), &pieces)?;
            for (slot, &c) in kids.iter().enumerate() {
                prob[c] = Q::zero();
                y_hat[c] = match dec.iter().find(|h| h.piece == slot) {
                    Some(h) => {
                        prob[c] = h.weight.clone();
                        h.witness[1..].to_vec()
                    }
                    None => lowest_point(&pieces[slot])?[1..].to_vec(),
                };
            }
        } else {
            for &c in kids {
                prob[c] = seed.prob[c].clone();
                y_hat[c] = seed.s[c].clone();
            }
        }
    }

    let mut chi = vec![Q::zero(); n];
    let mut star = vec![Q::one(); n];
    for k in 0..n {
        if let Some(p) = tree.parent(k) {
            star[k] = &star[p] - &chi[p];
        }
        chi[k] = &lambda[k] * &star[k];
    }
    let chi = RandomisedStoppingTime { chi };
    let pair = MartingalePair { prob, s: s_hat };
    let value = crate::oracle::expectation(&market.tree, &pair, payoff, &chi);
    if value != root_value {
        return Err(Error::Verification(format!(
            "certificate value {value} differs from the dual optimum {root_value}"
        )));
    }
    Ok(DualCertificate { chi, pair, value, lambda, x_hat, y_hat })
}

/// Node-level check `E[Ŝ^{χ*}_{t+1} | node] = χ*_{t+1} X̂` of a certificate.
pub fn check_tail_identity(market: &Market, cert: &DualCertificate) -> bool {
    let tree = &market.tree;
    let n = tree.len();
    let d = market.d();
    let star = cert.chi.star(tree);
    // tail[k] = E[Σ_{s ≥ t} χ_s Ŝ_s | node k]
    let mut tail: Vec<Vector> = vec![vec![Q::zero(); d]; n];
    for k in (0..n).rev() {
        let mut acc = scale(&cert.chi.chi[k], &cert.pair.s[k]);
        for &c in tree.children(k) {
            for (a, b) in acc.iter_mut().zip(&tail[c]) {
                *a += &cert.pair.prob[c] * b;
            }
        }
        tail[k] = acc;
    }
    (0..n).all(|k| {
        let kids = tree.children(k);
        let mut next = vec![Q::zero(); d];
        for &c in kids {
            for (a, b) in next.iter_mut().zip(&tail[c]) {
                *a += &cert.pair.prob[c] * b;
            }
        }
        let next_star = if kids.is_empty() { Q::zero() } else { &star[k] - &cert.chi.chi[k] };
        next == scale(&next_star, &cert.x_hat[k])
    })
}

/// `y·E[S^{χ*}_t | node] ≥ E[(ξ·S)^{χ*}_t | node]` at every node, for a hedge
/// `y` and any verified pair.
pub fn check_hedge_pair_inequality(
    market: &Market,
    payoff: &PayoffProcess,
    y: &Strategy,
    pair: &MartingalePair,
    chi: &RandomisedStoppingTime,
) -> bool {
    let tree = &market.tree;
    let n = tree.len();
    let d = market.d();
    let mut tail_s: Vec<Vector> = vec![vec![Q::zero(); d]; n];
    let mut tail_v: Vec<Q> = vec![Q::zero(); n];
    for k in (0..n).rev() {
        let mut acc = scale(&chi.chi[k], &pair.s[k]);
        let mut val = &chi.chi[k] * dot(payoff.at(k), &pair.s[k]);
        for &c in tree.children(k) {
            for (a, b) in acc.iter_mut().zip(&tail_s[c]) {
                *a += &pair.prob[c] * b;
            }
            val += &pair.prob[c] * &tail_v[c];
        }
        tail_s[k] = acc;
        tail_v[k] = val;
    }
    (0..n).all(|k| dot(y.holding(market, k), &tail_s[k]) >= tail_v[k])
}
