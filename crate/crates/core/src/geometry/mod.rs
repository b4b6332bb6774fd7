//! Exact convex polyhedra in both representations.
//!
//! Every [`Polyhedron`] is kept in a canonical form: irredundant facets and
//! equalities on the H side, extreme points, extreme rays and a lineality
//! basis on the V side. Vertices and rays are taken orthogonal to the
//! lineality space and everything is sorted, so two polyhedra describe the
//! same set exactly when they compare equal.

pub mod dd;
pub mod json;
pub mod support;
pub mod union;

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::{dot, is_zero_vec, primitive, unit, zeros, Vector, Q};

pub use support::{decompose_in_hull, epigraph_of_negation, section, support_of_negation, HullPiece};
pub use union::PolyUnion;

/// `normal · x ≥ offset`, or `=` when used as an equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: Q,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: Q) -> Self {
        Halfspace { normal, offset }
    }

    pub fn slack(&self, x: &[Q]) -> Q {
        dot(&self.normal, x) - &self.offset
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polyhedron {
    dim: usize,
    empty: bool,
    facets: Vec<Halfspace>,
    equalities: Vec<Halfspace>,
    vertices: Vec<Vector>,
    rays: Vec<Vector>,
    lines: Vec<Vector>,
}

impl Polyhedron {
    pub fn full(dim: usize) -> Self {
        Polyhedron {
            dim,
            empty: false,
            facets: Vec::new(),
            equalities: Vec::new(),
            vertices: vec![zeros(dim)],
            rays: Vec::new(),
            lines: (0..dim).map(|k| unit(dim, k)).collect(),
        }
    }

    pub fn empty(dim: usize) -> Self {
        Polyhedron {
            dim,
            empty: true,
            facets: vec![Halfspace::new(zeros(dim), Q::one())],
            equalities: Vec::new(),
            vertices: Vec::new(),
            rays: Vec::new(),
            lines: Vec::new(),
        }
    }

    pub fn point(p: Vector) -> Self {
        let dim = p.len();
        Self::from_vrep(dim, vec![p], vec![], vec![])
    }

    /// `{x : a·x ≥ b for (a, b) in ineqs, a·x = b for (a, b) in eqs}`.
    pub fn from_hrep(dim: usize, ineqs: Vec<Halfspace>, eqs: Vec<Halfspace>) -> Self {
        let mut rows = Vec::with_capacity(ineqs.len() + 2 * eqs.len() + 1);
        let mut homog = |h: &Halfspace, sign: bool| {
            let mut r = Vec::with_capacity(dim + 1);
            r.push(if sign { -h.offset.clone() } else { h.offset.clone() });
            for a in &h.normal {
                r.push(if sign { a.clone() } else { -a });
            }
            rows.push(r);
        };
        for h in &ineqs {
            debug_assert_eq!(h.normal.len(), dim);
            homog(h, true);
        }
        for h in &eqs {
            homog(h, true);
            homog(h, false);
        }
        rows.push(unit(dim + 1, 0));
        rows.sort();
        rows.dedup();
        let g = dd::cone_generators(dim + 1, &rows);
        let mut vertices = Vec::new();
        let mut rays = Vec::new();
        for r in g.rays {
            if r[0].is_zero() {
                rays.push(r[1..].to_vec());
            } else {
                let x0 = r[0].clone();
                vertices.push(r[1..].iter().map(|x| x / &x0).collect());
            }
        }
        if vertices.is_empty() {
            return Self::empty(dim);
        }
        let lines = g.lines.into_iter().map(|l| l[1..].to_vec()).collect();
        Self::from_vrep(dim, vertices, rays, lines)
    }

    /// `conv(vertices) + cone(rays) + span(lines)`. At least one vertex is
    /// required for a nonempty set; no vertices gives the empty set.
    pub fn from_vrep(dim: usize, vertices: Vec<Vector>, rays: Vec<Vector>, lines: Vec<Vector>) -> Self {
        if vertices.is_empty() {
            return Self::empty(dim);
        }
        let (facets, equalities) = facets_of(dim, &vertices, &rays, &lines);
        // second pass recovers the irredundant generators
        let mut rows = Vec::new();
        for h in &facets {
            rows.push(homog_row(h));
        }
        for h in &equalities {
            rows.push(homog_row(h));
            rows.push(crate::rational::neg(&homog_row(h)));
        }
        rows.push(unit(dim + 1, 0));
        let g = dd::cone_generators(dim + 1, &rows);
        let lines = canonical_lines(g.lines.into_iter().map(|l| l[1..].to_vec()).collect());
        let lin_basis = gram_schmidt(&lines, dim);
        let mut verts = Vec::new();
        let mut rs = Vec::new();
        for r in g.rays {
            if r[0].is_zero() {
                let p = primitive(&project(&r[1..], &lin_basis, dim));
                if !is_zero_vec(&p) {
                    rs.push(p);
                }
            } else {
                let x0 = r[0].clone();
                let v: Vector = r[1..].iter().map(|x| x / &x0).collect();
                verts.push(project(&v, &lin_basis, dim));
            }
        }
        verts.sort();
        verts.dedup();
        rs.sort();
        rs.dedup();
        Polyhedron {
            dim,
            empty: false,
            facets,
            equalities,
            vertices: verts,
            rays: rs,
            lines,
        }
    }

    /// The cone generated by `rays` (and `lines`) with apex at the origin.
    pub fn cone(dim: usize, rays: Vec<Vector>, lines: Vec<Vector>) -> Self {
        Self::from_vrep(dim, vec![zeros(dim)], rays, lines)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn is_full(&self) -> bool {
        !self.empty && self.facets.is_empty() && self.equalities.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty() && self.lines.is_empty()
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn equalities(&self) -> &[Halfspace] {
        &self.equalities
    }

    /// Inequality description with each equality written as a pair.
    pub fn hrep(&self) -> Vec<Halfspace> {
        let mut out = self.facets.clone();
        for e in &self.equalities {
            out.push(e.clone());
            out.push(Halfspace::new(crate::rational::neg(&e.normal), -e.offset.clone()));
        }
        out
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn rays(&self) -> &[Vector] {
        &self.rays
    }

    pub fn lines(&self) -> &[Vector] {
        &self.lines
    }

    /// Rays with each line written as a pair of opposite rays.
    pub fn all_rays(&self) -> Vec<Vector> {
        let mut out = self.rays.clone();
        for l in &self.lines {
            out.push(l.clone());
            out.push(crate::rational::neg(l));
        }
        out
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        if self.empty {
            return false;
        }
        self.facets.iter().all(|h| !h.slack(x).is_negative()) && self.equalities.iter().all(|h| h.slack(x).is_zero())
    }

    /// Whether `r` lies in the recession cone.
    pub fn recedes(&self, r: &[Q]) -> bool {
        self.facets.iter().all(|h| !dot(&h.normal, r).is_negative())
            && self.equalities.iter().all(|h| dot(&h.normal, r).is_zero())
    }

    pub fn contains_set(&self, other: &Polyhedron) -> bool {
        if other.empty {
            return true;
        }
        if self.empty {
            return false;
        }
        other.vertices.iter().all(|v| self.contains(v))
            && other.rays.iter().all(|r| self.recedes(r))
            && other.lines.iter().all(|l| self.equalities.iter().chain(&self.facets).all(|h| dot(&h.normal, l).is_zero()))
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim);
        if self.empty || other.empty {
            return Self::empty(self.dim);
        }
        if other.is_full() || other.contains_set(self) {
            return self.clone();
        }
        if self.is_full() || self.contains_set(other) {
            return other.clone();
        }
        let mut ineqs = self.facets.clone();
        ineqs.extend(other.facets.iter().cloned());
        let mut eqs = self.equalities.clone();
        eqs.extend(other.equalities.iter().cloned());
        Self::from_hrep(self.dim, ineqs, eqs)
    }

    /// `self + cone`, where `cone` has its apex at the origin.
    pub fn minkowski_sum_cone(&self, cone: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, cone.dim);
        if self.empty || cone.empty {
            return Self::empty(self.dim);
        }
        debug_assert!(cone.vertices.len() == 1 && is_zero_vec(&cone.vertices[0]));
        let mut rays = self.rays.clone();
        rays.extend(cone.rays.iter().cloned());
        let mut lines = self.lines.clone();
        lines.extend(cone.lines.iter().cloned());
        Self::from_vrep(self.dim, self.vertices.clone(), rays, lines)
    }

    pub fn translate(&self, t: &[Q]) -> Polyhedron {
        if self.empty {
            return self.clone();
        }
        let vertices = self.vertices.iter().map(|v| crate::rational::add(v, t)).collect();
        Self::from_vrep(self.dim, vertices, self.rays.clone(), self.lines.clone())
    }

    /// Closed convex hull of the union of nonempty pieces.
    pub fn hull_of_union(pieces: &[Polyhedron]) -> Polyhedron {
        assert!(!pieces.is_empty());
        let dim = pieces[0].dim;
        let mut vertices = Vec::new();
        let mut rays = Vec::new();
        let mut lines = Vec::new();
        for p in pieces.iter().filter(|p| !p.empty) {
            vertices.extend(p.vertices.iter().cloned());
            rays.extend(p.rays.iter().cloned());
            lines.extend(p.lines.iter().cloned());
        }
        Self::from_vrep(dim, vertices, rays, lines)
    }

    /// `min {x : x e^i ∈ P}` read off the H-representation.
    pub fn min_along_axis(&self, i: usize) -> Result<Q> {
        if self.empty {
            return Err(Error::EmptySet);
        }
        let mut lower: Option<Q> = None;
        let mut upper: Option<Q> = None;
        let tighten = |a: &Q, b: &Q, lo: &mut Option<Q>, hi: &mut Option<Q>| -> Result<()> {
            if a.is_zero() {
                if b.is_positive() {
                    return Err(Error::NoAxisIntersection);
                }
                return Ok(());
            }
            let t = b / a;
            if a.is_positive() {
                if lo.as_ref().is_none_or(|l| &t > l) {
                    *lo = Some(t);
                }
            } else if hi.as_ref().is_none_or(|h| &t < h) {
                *hi = Some(t);
            }
            Ok(())
        };
        for h in &self.facets {
            tighten(&h.normal[i], &h.offset, &mut lower, &mut upper)?;
        }
        for h in &self.equalities {
            if h.normal[i].is_zero() {
                if !h.offset.is_zero() {
                    return Err(Error::NoAxisIntersection);
                }
                continue;
            }
            tighten(&h.normal[i], &h.offset, &mut lower, &mut upper)?;
            let a = -h.normal[i].clone();
            let b = -h.offset.clone();
            tighten(&a, &b, &mut lower, &mut upper)?;
        }
        match (lower, upper) {
            (None, _) => Err(Error::Unbounded),
            (Some(l), Some(u)) if l > u => Err(Error::NoAxisIntersection),
            (Some(l), _) => Ok(l),
        }
    }

    /// Some `z ∈ self` with `x - z ∈ cone` (the first basic solution found by
    /// the simplex method), or `None` if no such split exists.
    pub fn split_point(&self, x: &[Q], cone: &Polyhedron) -> Option<Vector> {
        if self.empty || cone.empty {
            return None;
        }
        // z free, x - z ∈ cone expressed through cone facets
        let d = self.dim;
        let mut lp = LinearProgram::new(d);
        for j in 0..d {
            lp.set_free(j);
        }
        for h in &self.facets {
            lp.add_constraint(coeffs(&h.normal), Relation::Ge, h.offset.clone());
        }
        for h in &self.equalities {
            lp.add_constraint(coeffs(&h.normal), Relation::Eq, h.offset.clone());
        }
        for h in &cone.facets {
            // a·(x - z) ≥ b  ⇔  a·z ≤ a·x - b
            lp.add_constraint(coeffs(&h.normal), Relation::Le, dot(&h.normal, x) - &h.offset);
        }
        for h in &cone.equalities {
            lp.add_constraint(coeffs(&h.normal), Relation::Eq, dot(&h.normal, x) - &h.offset);
        }
        match lp.solve() {
            LpOutcome::Optimal(s) => Some(s.x),
            _ => None,
        }
    }
}

pub(crate) fn coeffs(a: &[Q]) -> Vec<(usize, Q)> {
    a.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, x)| (j, x.clone())).collect()
}

fn homog_row(h: &Halfspace) -> Vector {
    let mut r = Vec::with_capacity(h.normal.len() + 1);
    r.push(-h.offset.clone());
    r.extend(h.normal.iter().cloned());
    r
}

/// Irredundant facets and canonical equalities of a nonempty V-described set.
fn facets_of(dim: usize, vertices: &[Vector], rays: &[Vector], lines: &[Vector]) -> (Vec<Halfspace>, Vec<Halfspace>) {
    let mut rows = Vec::new();
    for v in vertices {
        let mut r = vec![Q::one()];
        r.extend(v.iter().cloned());
        rows.push(r);
    }
    for x in rays {
        let mut r = vec![Q::zero()];
        r.extend(x.iter().cloned());
        rows.push(r);
    }
    for l in lines {
        let mut r = vec![Q::zero()];
        r.extend(l.iter().cloned());
        rows.push(crate::rational::neg(&r));
        rows.push(r);
    }
    rows.iter_mut().for_each(|r| *r = primitive(r));
    rows.sort();
    rows.dedup();
    let g = dd::cone_generators(dim + 1, &rows);
    // equality rows as [a | b] with a·x = b
    let eq_rows: Vec<Vector> = g
        .lines
        .iter()
        .map(|l| {
            let mut r = l[1..].to_vec();
            r.push(-l[0].clone());
            r
        })
        .collect();
    let eq_rows = canonical_lines(eq_rows);
    let eq_basis = gram_schmidt(&eq_rows, dim);
    let mut facets = Vec::new();
    for r in g.rays {
        let mut row = r[1..].to_vec();
        row.push(-r[0].clone());
        let p = project(&row, &eq_basis, dim);
        if is_zero_vec(&p[..dim]) {
            continue;
        }
        let p = primitive(&p);
        facets.push(Halfspace::new(p[..dim].to_vec(), p[dim].clone()));
    }
    facets.sort();
    facets.dedup();
    let equalities = eq_rows
        .into_iter()
        .map(|r| Halfspace::new(r[..dim].to_vec(), r[dim].clone()))
        .collect();
    (facets, equalities)
}

/// Reduced row echelon basis with primitive integer rows.
pub(crate) fn canonical_lines(rows: Vec<Vector>) -> Vec<Vector> {
    let mut m = rows;
    if m.is_empty() {
        return m;
    }
    let ncols = m[0].len();
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][c].recip();
        for x in m[rank].iter_mut() {
            *x *= &inv;
        }
        let prow = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    m.truncate(rank);
    m.into_iter().map(|r| primitive(&r)).collect()
}

/// Orthogonal basis (inner product on the first `k` coordinates).
fn gram_schmidt(rows: &[Vector], k: usize) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    for r in rows {
        let p = project(r, &basis, k);
        if !is_zero_vec(&p[..k]) {
            basis.push(p);
        }
    }
    basis
}

fn project(v: &[Q], basis: &[Vector], k: usize) -> Vector {
    let mut out = v.to_vec();
    for u in basis {
        let c = dot(&out[..k], &u[..k]);
        if c.is_zero() {
            continue;
        }
        let f = c / dot(&u[..k], &u[..k]);
        for (x, y) in out.iter_mut().zip(u) {
            *x -= &f * y;
        }
    }
    out
}

/// Lexicographic order on polyhedra used to keep unions canonical.
pub fn canonical_cmp(a: &Polyhedron, b: &Polyhedron) -> Ordering {
    a.cmp(b)
}
