//! Double description for polyhedral cones `{z : a·z ≥ 0 for every row a}`.
//!
//! Constraints are added one at a time. The lineality space is tracked as an
//! explicit basis of lines, and new extreme rays are produced only from
//! adjacent pairs (combinatorial adjacency test on zero sets).

use num_traits::{Signed, Zero};

use crate::rational::{dot, primitive, Vector, Q};

#[derive(Clone, Debug, Default)]
pub struct ConeGenerators {
    pub rays: Vec<Vector>,
    pub lines: Vec<Vector>,
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn full(n: usize) -> Self {
        let mut b = Bits::new(n);
        for k in 0..n {
            b.set(k);
        }
        b
    }
    fn set(&mut self, k: usize) {
        self.0[k / 64] |= 1 << (k % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    fn contains(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray {
    v: Vector,
    zeros: Bits,
}

/// Extreme rays and a lineality basis of `{z ∈ R^dim : a·z ≥ 0}`.
pub fn cone_generators(dim: usize, rows: &[Vector]) -> ConeGenerators {
    let m = rows.len();
    let mut lines: Vec<Vector> = (0..dim).map(|k| crate::rational::unit(dim, k)).collect();
    let mut rays: Vec<Ray> = Vec::new();
    for (ci, a) in rows.iter().enumerate() {
        if let Some(li) = lines.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l = lines.swap_remove(li);
            let al = dot(a, &l);
            if al.is_negative() {
                l = l.iter().map(|x| -x).collect();
            }
            let al = al.abs();
            for other in lines.iter_mut() {
                let c = dot(a, other);
                if !c.is_zero() {
                    let f = c / &al;
                    for (x, y) in other.iter_mut().zip(&l) {
                        *x -= &f * y;
                    }
                    *other = primitive(other);
                }
            }
            for r in rays.iter_mut() {
                let c = dot(a, &r.v);
                if !c.is_zero() {
                    let f = c / &al;
                    for (x, y) in r.v.iter_mut().zip(&l) {
                        *x -= &f * y;
                    }
                    r.v = primitive(&r.v);
                }
                r.zeros.set(ci);
            }
            // the line is tight on every earlier row
            let mut zeros = Bits::full(ci);
            zeros.0.resize(Bits::new(m).0.len(), 0);
            rays.push(Ray { v: primitive(&l), zeros });
            continue;
        }
        let vals: Vec<Q> = rays.iter().map(|r| dot(a, &r.v)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            for (r, v) in rays.iter_mut().zip(&vals) {
                if v.is_zero() {
                    r.zeros.set(ci);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        let threshold = (dim - lines.len()).saturating_sub(2) as u32;
        let mut new_rays = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zeros.and(&rays[n].zeros);
                if common.count() < threshold {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, r)| k == p || k == n || !r.zeros.contains(&common));
                if !adjacent {
                    continue;
                }
                let v: Vector = rays[n]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(xn, xp)| &vals[p] * xn - &vals[n] * xp)
                    .collect();
                let mut zeros = common;
                zeros.set(ci);
                new_rays.push(Ray { v: primitive(&v), zeros });
            }
        }
        let mut kept = Vec::with_capacity(rays.len() + new_rays.len());
        for (mut r, v) in rays.into_iter().zip(vals) {
            if v.is_negative() {
                continue;
            }
            if v.is_zero() {
                r.zeros.set(ci);
            }
            kept.push(r);
        }
        kept.extend(new_rays);
        rays = kept;
    }
    ConeGenerators {
        rays: rays.into_iter().map(|r| r.v).collect(),
        lines,
    }
}
