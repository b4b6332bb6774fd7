//! Event trees, exchange-rate matrices, solvency cones and the weak
//! no-arbitrage check.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{Halfspace, Polyhedron};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::{unit, Vector, Q};

pub type Matrix = Vec<Vec<Q>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub time: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Finite scenario tree. Nodes are stored breadth first, so parents always
/// precede their children and node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventTree {
    nodes: Vec<Node>,
    horizon: usize,
    index: HashMap<String, usize>,
}

impl EventTree {
    /// Builds a tree from `(id, parent id)` pairs given in any order.
    pub fn new(spec: &[(String, Option<String>)]) -> Result<Self> {
        let mut index_in = HashMap::new();
        for (k, (id, _)) in spec.iter().enumerate() {
            if index_in.insert(id.clone(), k).is_some() {
                return Err(Error::InvalidModel(format!("duplicate node id `{id}`")));
            }
        }
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); spec.len()];
        let mut roots = Vec::new();
        for (k, (id, parent)) in spec.iter().enumerate() {
            match parent {
                None => roots.push(k),
                Some(p) => {
                    let pk = *index_in
                        .get(p)
                        .ok_or_else(|| Error::InvalidModel(format!("node `{id}` has unknown parent `{p}`")))?;
                    kids[pk].push(k);
                }
            }
        }
        if roots.len() != 1 {
            return Err(Error::InvalidModel(format!("expected exactly one root, found {}", roots.len())));
        }
        let mut order = vec![roots[0]];
        let mut head = 0;
        while head < order.len() {
            let k = order[head];
            order.extend(kids[k].iter().copied());
            head += 1;
        }
        if order.len() != spec.len() {
            return Err(Error::InvalidModel("some nodes are not reachable from the root".into()));
        }
        let mut pos = vec![0; spec.len()];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        let mut nodes: Vec<Node> = Vec::with_capacity(spec.len());
        for &old in &order {
            let parent = spec[old].1.as_ref().map(|p| pos[index_in[p]]);
            let time = parent.map_or(0, |p| nodes[p].time + 1);
            nodes.push(Node {
                id: spec[old].0.clone(),
                time,
                parent,
                children: kids[old].iter().map(|&c| pos[c]).collect(),
            });
        }
        let horizon = nodes.iter().map(|n| n.time).max().unwrap_or(0);
        for n in &nodes {
            if n.children.is_empty() && n.time != horizon {
                return Err(Error::InvalidModel(format!(
                    "leaf `{}` is at time {} but the horizon is {horizon}",
                    n.id, n.time
                )));
            }
        }
        let index = nodes.iter().enumerate().map(|(k, n)| (n.id.clone(), k)).collect();
        Ok(EventTree { nodes, horizon, index })
    }

    /// Recombination-free tree where every non-leaf node has `branching`
    /// children. Node ids are paths such as `"0.1.0"`; the root is `"r"`.
    pub fn uniform(horizon: usize, branching: usize) -> Self {
        let mut spec = vec![("r".to_string(), None)];
        let mut frontier = vec!["r".to_string()];
        for _ in 0..horizon {
            let mut next = Vec::new();
            for p in &frontier {
                for b in 0..branching {
                    let id = if p == "r" { b.to_string() } else { format!("{p}.{b}") };
                    spec.push((id.clone(), Some(p.clone())));
                    next.push(id);
                }
            }
            frontier = next;
        }
        EventTree::new(&spec).expect("uniform tree is well formed")
    }

    /// Arbitrary-shape tree from per-node child counts in breadth-first order.
    pub fn from_child_counts(counts: &[usize]) -> Result<Self> {
        let mut spec = vec![("n0".to_string(), None)];
        let mut next = 1;
        for (k, &c) in counts.iter().enumerate() {
            if k >= spec.len() {
                break;
            }
            for _ in 0..c {
                spec.push((format!("n{next}"), Some(format!("n{k}"))));
                next += 1;
            }
        }
        EventTree::new(&spec)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn node(&self, k: usize) -> &Node {
        &self.nodes[k]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn time(&self, k: usize) -> usize {
        self.nodes[k].time
    }

    pub fn parent(&self, k: usize) -> Option<usize> {
        self.nodes[k].parent
    }

    pub fn children(&self, k: usize) -> &[usize] {
        &self.nodes[k].children
    }

    pub fn is_leaf(&self, k: usize) -> bool {
        self.nodes[k].children.is_empty()
    }

    pub fn id(&self, k: usize) -> &str {
        &self.nodes[k].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.is_leaf(k)).collect()
    }

    /// Strict ancestors of `k`, nearest first.
    pub fn ancestors(&self, k: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.nodes[k].parent;
        while let Some(p) = cur {
            out.push(p);
            cur = self.nodes[p].parent;
        }
        out
    }
}

/// Bid-ask matrix: `pi[i][j]` units of asset `i` buy one unit of asset `j`.
pub fn validate_pi(pi: &Matrix) -> Result<()> {
    let d = pi.len();
    for (i, row) in pi.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Dimension { expected: d, found: row.len() });
        }
        for (j, x) in row.iter().enumerate() {
            if i == j && !x.is_one() {
                return Err(Error::InvalidModel(format!("diagonal entry ({i},{j}) is {x}, expected 1")));
            }
            if !x.is_positive() {
                return Err(Error::InvalidModel(format!("entry ({i},{j}) is not positive")));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvencyCone {
    pub cone: Polyhedron,
    pub dual: Polyhedron,
}

/// Solvent portfolios: generated by the unit vectors and by `π^{ij} e^i - e^j`.
pub fn build_solvency_cone(pi: &Matrix) -> SolvencyCone {
    let gens = solvency_generators(pi);
    let d = pi.len();
    let cone = Polyhedron::cone(d, gens.clone(), vec![]);
    let dual = Polyhedron::from_hrep(d, gens.into_iter().map(|g| Halfspace::new(g, Q::zero())).collect(), vec![]);
    SolvencyCone { cone, dual }
}

pub fn solvency_generators(pi: &Matrix) -> Vec<Vector> {
    let d = pi.len();
    let mut gens: Vec<Vector> = (0..d).map(|k| unit(d, k)).collect();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let mut g = vec![Q::zero(); d];
                g[i] = pi[i][j].clone();
                g[j] = -Q::one();
                gens.push(g);
            }
        }
    }
    gens
}

/// Whether `y` satisfies the dual-cone inequalities `0 ≤ y^j ≤ π^{kj} y^k`.
pub fn in_dual_cone(pi: &Matrix, y: &[Q]) -> bool {
    let d = pi.len();
    (0..d).all(|j| !y[j].is_negative()) && (0..d).all(|k| (0..d).all(|j| k == j || y[j] <= &pi[k][j] * &y[k]))
}

/// `{s ∈ S* : s^i = 1}` written out directly from the matrix entries.
pub fn dual_cone_section(pi: &Matrix, i: usize) -> Polyhedron {
    let d = pi.len();
    let mut ineqs = Vec::new();
    for j in 0..d {
        if j == i {
            continue;
        }
        // 1/π^{ji} ≤ s^j ≤ π^{ij}
        ineqs.push(Halfspace::new(unit(d, j), pi[j][i].recip()));
        ineqs.push(Halfspace::new(unit(d, j).iter().map(|x| -x).collect(), -pi[i][j].clone()));
        for k in 0..d {
            if k != i && k != j {
                // s^j ≤ π^{kj} s^k
                let mut a = vec![Q::zero(); d];
                a[k] = pi[k][j].clone();
                a[j] = -Q::one();
                ineqs.push(Halfspace::new(a, Q::zero()));
            }
        }
    }
    Polyhedron::from_hrep(d, ineqs, vec![Halfspace::new(unit(d, i), Q::one())])
}

/// `π^{ij} = (1 + k) S^j / S^i` off the diagonal, 1 on it.
pub fn frictionless_to_pi(prices: &[Q], k: &Q) -> Result<Matrix> {
    if prices.iter().any(|s| !s.is_positive()) {
        return Err(Error::InvalidModel("prices must be positive".into()));
    }
    if k.is_negative() {
        return Err(Error::InvalidModel("transaction cost rate must be non-negative".into()));
    }
    let d = prices.len();
    let f = Q::one() + k;
    Ok((0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { Q::one() } else { &f * &prices[j] / &prices[i] })
                .collect()
        })
        .collect())
}

/// Transition probabilities (indexed by child node, root holds 1) and a
/// price process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MartingalePair {
    pub prob: Vec<Q>,
    pub s: Vec<Vector>,
}

impl MartingalePair {
    /// Unconditional node probabilities.
    pub fn node_probabilities(&self, tree: &EventTree) -> Vec<Q> {
        let mut out = vec![Q::one(); tree.len()];
        for k in 1..tree.len() {
            let p = tree.parent(k).unwrap();
            out[k] = &out[p] * &self.prob[k];
        }
        out
    }

    pub fn is_equivalent(&self) -> bool {
        self.prob.iter().all(Signed::is_positive)
    }
}

/// Tree, exchange rates and the derived cones.
#[derive(Clone, Debug)]
pub struct Market {
    pub tree: EventTree,
    pub pi: Vec<Matrix>,
    pub cones: Vec<SolvencyCone>,
}

impl Market {
    pub fn new(tree: EventTree, pi: Vec<Matrix>) -> Result<Self> {
        if pi.len() != tree.len() {
            return Err(Error::Dimension { expected: tree.len(), found: pi.len() });
        }
        let d = pi.first().map_or(0, |m| m.len());
        if d == 0 {
            return Err(Error::InvalidModel("no assets".into()));
        }
        for m in &pi {
            if m.len() != d {
                return Err(Error::Dimension { expected: d, found: m.len() });
            }
            validate_pi(m)?;
        }
        let cones = pi.iter().map(build_solvency_cone).collect();
        Ok(Market { tree, pi, cones })
    }

    /// Exchange rates generated from frictionless prices at a single rate.
    pub fn from_prices(tree: EventTree, prices: &[Vector], k: &Q) -> Result<Self> {
        let pi = prices.iter().map(|s| frictionless_to_pi(s, k)).collect::<Result<Vec<_>>>()?;
        Market::new(tree, pi)
    }

    pub fn d(&self) -> usize {
        self.pi[0].len()
    }

    pub fn solvent(&self, node: usize, x: &[Q]) -> bool {
        self.cones[node].cone.contains(x)
    }
}

/// Decides weak no-arbitrage and, when it holds, returns an equivalent
/// martingale pair with `S^i ≡ 1`.
///
/// The LP works with mass vectors `M = P·S` per node, each a non-negative
/// combination of the extreme rays of `S*`: masses add up along the tree,
/// `M^i(root) = 1`, and the smallest leaf mass `M^i` is maximised. A positive
/// optimum gives the pair `p = M^i(child)/M^i(node)`, `S = M / M^i`.
pub fn check_weak_na(market: &Market, i: usize) -> Option<MartingalePair> {
    let tree = &market.tree;
    let d = market.d();
    let n = tree.len();
    let rays: Vec<Vec<Vector>> = market.cones.iter().map(|c| c.dual.all_rays()).collect();
    let mut lp = LinearProgram::new(1);
    let eps = 0;
    lp.set_free(eps);
    lp.set_cost(eps, -Q::one());
    let weights: Vec<Vec<usize>> = rays.iter().map(|r| r.iter().map(|_| lp.add_var(false)).collect()).collect();
    // M^j(node) as a linear expression in the weights
    let mass = |node: usize, j: usize| -> Vec<(usize, Q)> {
        rays[node]
            .iter()
            .zip(&weights[node])
            .filter(|(g, _)| !g[j].is_zero())
            .map(|(g, &w)| (w, g[j].clone()))
            .collect()
    };
    for node in 0..n {
        let kids = tree.children(node);
        if kids.is_empty() {
            let mut row = mass(node, i);
            row.push((eps, -Q::one()));
            lp.add_constraint(row, Relation::Ge, Q::zero());
        } else {
            for j in 0..d {
                let mut row: Vec<(usize, Q)> = mass(node, j).into_iter().map(|(w, a)| (w, -a)).collect();
                for &c in kids {
                    row.extend(mass(c, j));
                }
                lp.add_constraint(row, Relation::Eq, Q::zero());
            }
        }
    }
    lp.add_constraint(mass(0, i), Relation::Eq, Q::one());
    let sol = match lp.solve() {
        LpOutcome::Optimal(s) => s,
        _ => return None,
    };
    if !sol.x[eps].is_positive() {
        return None;
    }
    let m: Vec<Vector> = (0..n)
        .map(|node| {
            let mut v = vec![Q::zero(); d];
            for (g, &w) in rays[node].iter().zip(&weights[node]) {
                for (a, b) in v.iter_mut().zip(g) {
                    *a += &sol.x[w] * b;
                }
            }
            v
        })
        .collect();
    let mut prob = vec![Q::one(); n];
    let mut s = Vec::with_capacity(n);
    for node in 0..n {
        if let Some(p) = tree.parent(node) {
            prob[node] = &m[node][i] / &m[p][i];
        }
        s.push(m[node].iter().map(|x| x / &m[node][i]).collect());
    }
    Some(MartingalePair { prob, s })
}
