//! Finite unions of polyhedra.

use num_traits::{Signed, Zero};

use super::Polyhedron;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::{dot, Vector, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyUnion {
    dim: usize,
    pieces: Vec<Polyhedron>,
}

impl PolyUnion {
    pub fn empty(dim: usize) -> Self {
        PolyUnion { dim, pieces: Vec::new() }
    }

    pub fn single(p: Polyhedron) -> Self {
        PolyUnion::new(p.dim(), vec![p])
    }

    /// Builds a reduced union.
    pub fn new(dim: usize, pieces: Vec<Polyhedron>) -> Self {
        PolyUnion { dim, pieces }.reduce()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[Polyhedron] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Drops empty pieces and pieces contained in another one; sorts the rest.
    pub fn reduce(self) -> Self {
        let mut ps: Vec<Polyhedron> = self.pieces.into_iter().filter(|p| !p.is_empty()).collect();
        ps.sort();
        ps.dedup();
        let keep: Vec<bool> = (0..ps.len())
            .map(|a| !(0..ps.len()).any(|b| b != a && ps[b].contains_set(&ps[a])))
            .collect();
        let pieces = ps.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect();
        PolyUnion { dim: self.dim, pieces }
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    pub fn union(&self, other: &PolyUnion) -> PolyUnion {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        PolyUnion::new(self.dim, pieces)
    }

    /// Pairwise intersections of pieces.
    pub fn intersect(&self, other: &PolyUnion) -> PolyUnion {
        let mut pieces = Vec::with_capacity(self.pieces.len() * other.pieces.len());
        for a in &self.pieces {
            for b in &other.pieces {
                pieces.push(a.intersect(b));
            }
        }
        PolyUnion::new(self.dim, pieces)
    }

    pub fn minkowski_sum_cone(&self, cone: &Polyhedron) -> PolyUnion {
        PolyUnion::new(self.dim, self.pieces.iter().map(|p| p.minkowski_sum_cone(cone)).collect())
    }

    /// Smallest `x` with `x e^i` in some piece.
    pub fn min_along_axis(&self, i: usize) -> Result<Q> {
        let mut best: Option<Q> = None;
        for p in &self.pieces {
            match p.min_along_axis(i) {
                Ok(v) => {
                    if best.as_ref().is_none_or(|b| &v < b) {
                        best = Some(v);
                    }
                }
                Err(Error::NoAxisIntersection) => {}
                Err(e) => return Err(e),
            }
        }
        best.ok_or(if self.pieces.is_empty() { Error::EmptySet } else { Error::NoAxisIntersection })
    }

    /// Points where the boundary of the union has a corner: candidates are
    /// vertices of intersections of subsets of pieces, kept when the
    /// hyperplanes carrying the boundary near the point span the space.
    /// Pieces are assumed full-dimensional.
    pub fn vertices(&self) -> Vec<Vector> {
        let mut cands: Vec<Vector> = Vec::new();
        let n = self.pieces.len();
        // depth-first over subsets, pruning empty intersections
        let mut stack: Vec<(usize, Polyhedron)> =
            (0..n).map(|k| (k, self.pieces[k].clone())).collect();
        while let Some((last, p)) = stack.pop() {
            cands.extend(p.vertices().iter().cloned());
            for k in last + 1..n {
                let q = p.intersect(&self.pieces[k]);
                if !q.is_empty() {
                    stack.push((k, q));
                }
            }
        }
        cands.sort();
        cands.dedup();
        cands.into_iter().filter(|x| self.is_corner(x)).collect()
    }

    fn is_corner(&self, x: &[Q]) -> bool {
        let d = self.dim;
        // tangent cones of the pieces through x, as lists of normals
        let mut cones: Vec<Vec<Vector>> = Vec::new();
        for p in self.pieces.iter().filter(|p| p.contains(x)) {
            if !p.equalities().is_empty() {
                continue;
            }
            cones.push(p.facets().iter().filter(|h| h.slack(x).is_zero()).map(|h| h.normal.clone()).collect());
        }
        if cones.is_empty() {
            return false;
        }
        let mut hyper: Vec<Vector> = Vec::new();
        for c in &cones {
            for a in c {
                let a = crate::rational::primitive(a);
                let neg = crate::rational::neg(&a);
                if !hyper.contains(&a) && !hyper.contains(&neg) {
                    hyper.push(a);
                }
            }
        }
        // membership of a full-dimensional cell given the signs of its interior point
        let inside = |v: &[Q]| cones.iter().any(|c| c.iter().all(|a| dot(a, v).is_positive()));
        let mut essential: Vec<Vector> = Vec::new();
        for (j, h) in hyper.iter().enumerate() {
            let others: Vec<&Vector> = hyper.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, a)| a).collect();
            for v in cell_points(d, h, &others) {
                // push off the hyperplane by less than the distance to any other
                let mut eps = Q::from_integer(1.into());
                for a in &others {
                    let av = dot(a, &v).abs();
                    let ah = dot(a, h).abs();
                    if !ah.is_zero() {
                        let bound = &av / (&ah * Q::from_integer(2.into()));
                        if bound < eps {
                            eps = bound;
                        }
                    }
                }
                let up: Vector = v.iter().zip(h.iter()).map(|(x, y)| x + &eps * y).collect();
                let down: Vector = v.iter().zip(h.iter()).map(|(x, y)| x - &eps * y).collect();
                if inside(&up) != inside(&down) {
                    essential.push(h.clone());
                    break;
                }
            }
        }
        super::canonical_lines(essential).len() == d
    }
}

/// One relative-interior point for each cell that the hyperplanes `others`
/// cut out of the hyperplane `h·v = 0`.
fn cell_points(d: usize, h: &Vector, others: &[&Vector]) -> Vec<Vector> {
    let mut cells: Vec<Vec<(usize, bool)>> = vec![Vec::new()];
    for (k, _) in others.iter().enumerate() {
        let mut next = Vec::new();
        for c in cells {
            for s in [true, false] {
                let mut c2 = c.clone();
                c2.push((k, s));
                if cell_point(d, h, others, &c2).is_some() {
                    next.push(c2);
                }
            }
        }
        cells = next;
    }
    cells.iter().filter_map(|c| cell_point(d, h, others, c)).collect()
}

fn cell_point(d: usize, h: &Vector, others: &[&Vector], signs: &[(usize, bool)]) -> Option<Vector> {
    let mut lp = LinearProgram::new(d);
    for j in 0..d {
        lp.set_free(j);
    }
    lp.add_constraint(super::coeffs(h), Relation::Eq, Q::zero());
    for (k, s) in signs {
        let a = others[*k];
        if a.iter().zip(h).all(|(x, y)| x == y) {
            continue;
        }
        let row = if *s { a.clone() } else { crate::rational::neg(a) };
        lp.add_constraint(super::coeffs(&row), Relation::Ge, Q::from_integer(1.into()));
    }
    match lp.solve() {
        LpOutcome::Optimal(s) => Some(s.x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Halfspace;
    use crate::rational::{q, qv};

    fn hp(rows: &[(&[i64], i64)]) -> Polyhedron {
        let d = rows[0].0.len();
        Polyhedron::from_hrep(d, rows.iter().map(|(a, b)| Halfspace::new(qv(a), q(*b))).collect(), vec![])
    }

    #[test]
    fn reduction_drops_duplicates_empties_and_subsets() {
        let p = hp(&[(&[1, 0], 0), (&[0, 1], 0)]);
        let sub = hp(&[(&[1, 0], 1), (&[0, 1], 1)]);
        let u = PolyUnion::new(2, vec![p.clone(), p.clone(), Polyhedron::empty(2), sub]);
        assert_eq!(u.pieces(), &[p]);
    }

    #[test]
    fn intersection_distributes() {
        let a = PolyUnion::new(1, vec![hp(&[(&[1], 0), (&[-1], -1)]), hp(&[(&[1], 3), (&[-1], -5)])]);
        let b = PolyUnion::single(hp(&[(&[1], 1), (&[-1], -4)]));
        let c = a.intersect(&b);
        assert_eq!(c.pieces().len(), 2);
        assert!(c.contains(&qv(&[1])) && c.contains(&qv(&[4])) && !c.contains(&qv(&[2])));
        assert_eq!(c.min_along_axis(0).unwrap(), q(1));
    }

    #[test]
    fn corners_of_an_l_shape() {
        // [0,2]x[0,1] ∪ [0,1]x[0,2]
        let a = hp(&[(&[1, 0], 0), (&[-1, 0], -2), (&[0, 1], 0), (&[0, -1], -1)]);
        let b = hp(&[(&[1, 0], 0), (&[-1, 0], -1), (&[0, 1], 0), (&[0, -1], -2)]);
        let u = PolyUnion::new(2, vec![a, b]);
        let mut vs = u.vertices();
        vs.sort();
        assert_eq!(
            vs,
            vec![qv(&[0, 0]), qv(&[0, 2]), qv(&[1, 1]), qv(&[1, 2]), qv(&[2, 0]), qv(&[2, 1])]
        );
    }

    #[test]
    fn overlapping_squares_lose_hidden_vertices() {
        let a = hp(&[(&[1, 0], 0), (&[-1, 0], -2), (&[0, 1], 0), (&[0, -1], -2)]);
        let b = hp(&[(&[1, 0], 1), (&[-1, 0], -3), (&[0, 1], 1), (&[0, -1], -3)]);
        let u = PolyUnion::new(2, vec![a, b]);
        let vs = u.vertices();
        assert_eq!(vs.len(), 8);
        assert!(!vs.contains(&qv(&[1, 1])) && !vs.contains(&qv(&[2, 2])));
        assert!(vs.contains(&qv(&[2, 1])) && vs.contains(&qv(&[1, 2])));
    }
}
