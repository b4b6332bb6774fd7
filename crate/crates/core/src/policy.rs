//! Exercise policies, stopping times and randomised stopping times on an
//! event tree. Everything is stored per node.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::market::EventTree;
use crate::rational::{Vector, Q};

pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Per-node exercise permission.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExercisePolicy {
    pub allowed: Vec<bool>,
}

impl ExercisePolicy {
    pub fn new(allowed: Vec<bool>) -> Self {
        ExercisePolicy { allowed }
    }

    pub fn allows(&self, node: usize) -> bool {
        self.allowed[node]
    }

    /// Whether exercise is still possible strictly after `node`. Meaningful
    /// for valid policies, where all children agree.
    pub fn future(&self, tree: &EventTree) -> Vec<bool> {
        let star = self.star(tree);
        (0..tree.len()).map(|k| tree.children(k).iter().any(|&c| star[c])).collect()
    }

    /// Whether exercise is possible at or after each node.
    pub fn star(&self, tree: &EventTree) -> Vec<bool> {
        let mut star = self.allowed.clone();
        for k in (0..tree.len()).rev() {
            if tree.children(k).iter().any(|&c| star[c]) {
                star[k] = true;
            }
        }
        star
    }
}

pub fn make_american(tree: &EventTree) -> ExercisePolicy {
    ExercisePolicy::new(vec![true; tree.len()])
}

pub fn make_european(tree: &EventTree) -> ExercisePolicy {
    ExercisePolicy::new((0..tree.len()).map(|k| tree.time(k) == tree.horizon()).collect())
}

pub fn make_bermudan(tree: &EventTree, dates: &[usize]) -> Result<ExercisePolicy> {
    if dates.is_empty() {
        return Err(Error::InvalidModel("Bermudan policy needs at least one exercise date".into()));
    }
    if let Some(t) = dates.iter().find(|&&t| t > tree.horizon()) {
        return Err(Error::InvalidModel(format!("exercise date {t} is after the horizon {}", tree.horizon())));
    }
    Ok(ExercisePolicy::new((0..tree.len()).map(|k| dates.contains(&tree.time(k))).collect()))
}

/// Exercise allowed up to and including the random expiry `sigma`.
pub fn make_random_expiry(tree: &EventTree, sigma: &StoppingTime) -> ExercisePolicy {
    ExercisePolicy::new((0..tree.len()).map(|k| !tree.ancestors(k).iter().any(|&a| sigma.stop[a])).collect())
}

/// Human-readable list of problems; empty when the policy is valid.
pub fn validate_policy(tree: &EventTree, e: &ExercisePolicy) -> Vec<String> {
    let mut out = Vec::new();
    if e.allowed.len() != tree.len() {
        out.push(format!("policy has {} entries for {} nodes", e.allowed.len(), tree.len()));
        return out;
    }
    let n = tree.len();
    // some / every path below the node meets an exercise node
    let mut any = e.allowed.clone();
    let mut all = e.allowed.clone();
    for k in (0..n).rev() {
        let kids = tree.children(k);
        if !kids.is_empty() {
            any[k] = any[k] || kids.iter().any(|&c| any[c]);
            all[k] = all[k] || kids.iter().all(|&c| all[c]);
        }
    }
    for k in 0..n {
        let kids = tree.children(k);
        if kids.is_empty() {
            continue;
        }
        let first = any[kids[0]];
        if kids.iter().any(|&c| any[c] != all[c] || any[c] != first) {
            out.push(format!(
                "node `{}`: later exercise is possible in some but not all of its scenarios",
                tree.id(k)
            ));
        }
    }
    if !all[0] {
        for leaf in tree.leaves() {
            let path_ok = e.allowed[leaf] || tree.ancestors(leaf).iter().any(|&a| e.allowed[a]);
            if !path_ok {
                out.push(format!("scenario ending at `{}` has no exercise opportunity", tree.id(leaf)));
            }
        }
    }
    out
}

/// Pure stopping time as per-node stop flags.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StoppingTime {
    pub stop: Vec<bool>,
}

impl StoppingTime {
    pub fn constant(tree: &EventTree, t: usize) -> Self {
        StoppingTime { stop: (0..tree.len()).map(|k| tree.time(k) == t).collect() }
    }

    /// Exactly one stop on every root-to-leaf path.
    pub fn is_valid(&self, tree: &EventTree) -> bool {
        self.stop.len() == tree.len()
            && tree.leaves().into_iter().all(|leaf| {
                let mut count = usize::from(self.stop[leaf]);
                count += tree.ancestors(leaf).iter().filter(|&&a| self.stop[a]).count();
                count == 1
            })
    }

    pub fn consistent_with(&self, tree: &EventTree, e: &ExercisePolicy) -> bool {
        self.is_valid(tree) && (0..tree.len()).all(|k| !self.stop[k] || e.allowed[k])
    }

    pub fn to_randomised(&self) -> RandomisedStoppingTime {
        RandomisedStoppingTime {
            chi: self.stop.iter().map(|&s| if s { Q::one() } else { Q::zero() }).collect(),
        }
    }

    /// Stopping date along the path through `leaf`.
    pub fn date_at_leaf(&self, tree: &EventTree, leaf: usize) -> Option<usize> {
        std::iter::once(leaf).chain(tree.ancestors(leaf)).find(|&k| self.stop[k]).map(|k| tree.time(k))
    }
}

/// Per-node weights `χ ≥ 0` summing to one along every path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomisedStoppingTime {
    pub chi: Vector,
}

impl RandomisedStoppingTime {
    /// `χ*` at each node: one minus the weight used up strictly before it.
    pub fn star(&self, tree: &EventTree) -> Vector {
        let mut out = vec![Q::one(); tree.len()];
        for k in 1..tree.len() {
            let p = tree.parent(k).unwrap();
            out[k] = &out[p] - &self.chi[p];
        }
        out
    }

    /// The stopping time with these weights, if they are all 0 or 1.
    pub fn as_pure(&self) -> Option<StoppingTime> {
        if self.chi.iter().all(|c| c.is_zero() || c.is_one()) {
            Some(StoppingTime { stop: self.chi.iter().map(One::is_one).collect() })
        } else {
            None
        }
    }
}

pub fn validate_randomised(tree: &EventTree, e: &ExercisePolicy, chi: &RandomisedStoppingTime) -> bool {
    if chi.chi.len() != tree.len() {
        return false;
    }
    if (0..tree.len()).any(|k| chi.chi[k].is_negative() || (chi.chi[k].is_positive() && !e.allowed[k])) {
        return false;
    }
    tree.leaves().into_iter().all(|leaf| {
        let total: Q = std::iter::once(leaf).chain(tree.ancestors(leaf)).map(|k| chi.chi[k].clone()).sum();
        total.is_one()
    })
}

/// Every stopping time consistent with `e`, in a fixed order. Fails once more
/// than `cap` have been produced.
pub fn enumerate_stopping_times(tree: &EventTree, e: &ExercisePolicy, cap: usize) -> Result<Vec<StoppingTime>> {
    // lists of stop-node sets for each subtree, built bottom up
    let n = tree.len();
    let mut lists: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    let over = || Error::CapExceeded(format!("more than {cap} stopping times"));
    for k in (0..n).rev() {
        let mut opts: Vec<Vec<usize>> = Vec::new();
        if e.allowed[k] {
            opts.push(vec![k]);
        }
        let kids = tree.children(k);
        if !kids.is_empty() && kids.iter().all(|&c| !lists[c].is_empty()) {
            let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
            for &c in kids {
                if combos.len().saturating_mul(lists[c].len()) > cap {
                    return Err(over());
                }
                let mut next = Vec::with_capacity(combos.len() * lists[c].len());
                for base in &combos {
                    for ext in &lists[c] {
                        let mut v = base.clone();
                        v.extend(ext.iter().copied());
                        next.push(v);
                    }
                }
                combos = next;
            }
            opts.extend(combos);
        }
        if opts.len() > cap {
            return Err(over());
        }
        for c in kids {
            lists[*c] = Vec::new();
        }
        lists[k] = opts;
    }
    Ok(std::mem::take(&mut lists[0])
        .into_iter()
        .map(|set| {
            let mut stop = vec![false; n];
            for k in set {
                stop[k] = true;
            }
            StoppingTime { stop }
        })
        .collect())
}

/// A consistent stopping time that stops at date `t_prime` exactly where
/// exercise is allowed then: before `t_prime` it stops only at the last
/// opportunity, after `t_prime` at the first one.
pub fn witness_stopping_time(tree: &EventTree, e: &ExercisePolicy, t_prime: usize) -> StoppingTime {
    let future = e.future(tree);
    let mut stop = vec![false; tree.len()];
    let mut stopped_above = vec![false; tree.len()];
    for k in 0..tree.len() {
        if let Some(p) = tree.parent(k) {
            stopped_above[k] = stopped_above[p] || stop[p];
        }
        let t = tree.time(k);
        stop[k] = e.allowed[k] && !stopped_above[k] && (t >= t_prime || !future[k]);
    }
    StoppingTime { stop }
}

/// Per-node payoff vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PayoffProcess {
    pub xi: Vec<Vector>,
}

impl PayoffProcess {
    pub fn new(xi: Vec<Vector>) -> Self {
        PayoffProcess { xi }
    }

    pub fn zero(tree: &EventTree, d: usize) -> Self {
        PayoffProcess { xi: vec![vec![Q::zero(); d]; tree.len()] }
    }

    pub fn negated(&self) -> Self {
        PayoffProcess { xi: self.xi.iter().map(|x| crate::rational::neg(x)).collect() }
    }

    pub fn at(&self, node: usize) -> &Vector {
        &self.xi[node]
    }
}
