//! Support functions of negated sets, their epigraphs, sections of cones and
//! convex decomposition of points in hulls of unions.

use num_traits::{One, Signed, Zero};

use super::{Halfspace, Polyhedron};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::{dot, unit, zeros, Vector, Q};

/// `sup {-y·x : x ∈ A}`; `None` stands for `+∞`.
pub fn support_of_negation(a: &Polyhedron, y: &[Q]) -> Result<Option<Q>> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.rays().iter().any(|r| dot(y, r).is_negative()) || a.lines().iter().any(|l| !dot(y, l).is_zero()) {
        return Ok(None);
    }
    Ok(a.vertices().iter().map(|v| -dot(y, v)).max())
}

/// Epigraph `{(y0, y) : y0 ≥ sup{-y·x : x ∈ A}}` as a cone in `R^{d+1}`.
pub fn epigraph_of_negation(a: &Polyhedron) -> Polyhedron {
    let d = a.dim();
    if a.is_empty() {
        return Polyhedron::full(d + 1);
    }
    let lift = |head: Q, v: &[Q]| {
        let mut r = Vec::with_capacity(d + 1);
        r.push(head);
        r.extend(v.iter().cloned());
        r
    };
    let mut ineqs = Vec::new();
    for v in a.vertices() {
        ineqs.push(Halfspace::new(lift(Q::one(), v), Q::zero()));
    }
    for r in a.rays() {
        ineqs.push(Halfspace::new(lift(Q::zero(), r), Q::zero()));
    }
    let eqs = a.lines().iter().map(|l| Halfspace::new(lift(Q::zero(), l), Q::zero())).collect();
    Polyhedron::from_hrep(d + 1, ineqs, eqs)
}

/// `{x ∈ C : x^i = 1}`.
pub fn section(c: &Polyhedron, i: usize) -> Polyhedron {
    let slab = Polyhedron::from_hrep(c.dim(), vec![], vec![Halfspace::new(unit(c.dim(), i), Q::one())]);
    c.intersect(&slab)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullPiece {
    pub weight: Q,
    pub witness: Vector,
    pub piece: usize,
}

/// Writes `x` as `Σ weight_k · witness_k` with `witness_k` in `pieces[piece_k]`,
/// weights non-negative and summing to one. A basic solution is used, so at
/// most `dim + 1` weights are nonzero.
pub fn decompose_in_hull(x: &[Q], pieces: &[Polyhedron]) -> Result<Vec<HullPiece>> {
    let d = x.len();
    let mut lp = LinearProgram::new(0);
    // (piece, is_vertex, generator)
    let mut gens: Vec<(usize, bool, Vector)> = Vec::new();
    for (k, p) in pieces.iter().enumerate() {
        if p.is_empty() {
            continue;
        }
        for v in p.vertices() {
            gens.push((k, true, v.clone()));
        }
        for r in p.all_rays() {
            gens.push((k, false, r));
        }
    }
    for _ in &gens {
        lp.add_var(false);
    }
    for (j, xj) in x.iter().enumerate() {
        let row = gens
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.2[j].is_zero())
            .map(|(n, g)| (n, g.2[j].clone()))
            .collect();
        lp.add_constraint(row, Relation::Eq, xj.clone());
    }
    let conv = gens.iter().enumerate().filter(|(_, g)| g.1).map(|(n, _)| (n, Q::one())).collect();
    lp.add_constraint(conv, Relation::Eq, Q::one());
    let sol = match lp.solve() {
        LpOutcome::Optimal(s) => s,
        _ => return Err(Error::NotInHull),
    };
    let mut weight = vec![Q::zero(); pieces.len()];
    let mut point: Vec<Vector> = vec![zeros(d); pieces.len()];
    let mut stray: Vec<(Q, Vector)> = Vec::new();
    for (n, (k, is_vertex, g)) in gens.iter().enumerate() {
        let c = &sol.x[n];
        if c.is_zero() {
            continue;
        }
        if *is_vertex {
            weight[*k] += c;
            for (p, gi) in point[*k].iter_mut().zip(g) {
                *p += c * gi;
            }
        } else {
            stray.push((c.clone(), g.clone()));
        }
    }
    // attach ray terms to a weighted piece that recedes along them
    'rays: for (c, r) in stray {
        for k in 0..pieces.len() {
            if weight[k].is_positive() && pieces[k].recedes(&r) {
                for (p, ri) in point[k].iter_mut().zip(&r) {
                    *p += &c * ri;
                }
                continue 'rays;
            }
        }
        return Err(Error::NotInHull);
    }
    let mut out = Vec::new();
    for k in 0..pieces.len() {
        if weight[k].is_positive() {
            let w = weight[k].clone();
            let witness: Vector = point[k].iter().map(|p| p / &w).collect();
            debug_assert!(pieces[k].contains(&witness));
            out.push(HullPiece { weight: w, witness, piece: k });
        }
    }
    Ok(out)
}
