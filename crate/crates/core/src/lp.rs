//! Dense two-phase simplex over exact rationals.
//!
//! The entering column is the one with the most negative reduced cost until
//! a long run of degenerate pivots, after which Bland's rule takes over for
//! good, so the method terminates on degenerate problems. Problems are stated as
//!
//! ```text
//! minimise  c·x   subject to   a_r·x  (≤ | ≥ | =)  b_r,   x_j ≥ 0 unless free
//! ```
//!
//! Optimal outcomes carry the primal point and a dual vector `y` (one entry
//! per constraint, in the caller's sign convention) satisfying
//! `c - Aᵀy ≥ 0` on non-negative columns, `= 0` on free columns,
//! `y_r ≥ 0` on `≥` rows, `y_r ≤ 0` on `≤` rows and `b·y = c·x`.

use num_traits::{One, Signed, Zero};

use crate::rational::{Vector, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Q)>,
    pub rel: Relation,
    pub rhs: Q,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    free: Vec<bool>,
    objective: Vec<Q>,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vector,
    pub value: Q,
    pub duals: Vector,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// `num_vars` non-negative variables and a zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            free: vec![false; num_vars],
            objective: vec![Q::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[Q] {
        &self.objective
    }

    pub fn is_free(&self, j: usize) -> bool {
        self.free[j]
    }

    /// Appends a variable and returns its index.
    pub fn add_var(&mut self, free: bool) -> usize {
        self.num_vars += 1;
        self.free.push(free);
        self.objective.push(Q::zero());
        self.num_vars - 1
    }

    pub fn set_free(&mut self, j: usize) {
        self.free[j] = true;
    }

    pub fn set_cost(&mut self, j: usize, c: Q) {
        self.objective[j] = c;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Q)>, rel: Relation, rhs: Q) {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Plus(usize),
    Minus(usize),
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    obj: Vec<Q>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Column holding the initial identity for each row.
    unit_col: Vec<usize>,
    row_sign: Vec<bool>,
    ncols: usize,
}

/// Degenerate pivots in a row before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let m = lp.constraints.len();
        let mut kinds = Vec::new();
        let mut var_col = Vec::with_capacity(lp.num_vars);
        for (j, &free) in lp.free.iter().enumerate() {
            let p = kinds.len();
            kinds.push(ColKind::Plus(j));
            let mcol = if free {
                kinds.push(ColKind::Minus(j));
                Some(p + 1)
            } else {
                None
            };
            var_col.push((p, mcol));
        }
        let mut row_sign = Vec::with_capacity(m);
        let mut rels = Vec::with_capacity(m);
        for c in &lp.constraints {
            let flip = c.rhs.is_negative();
            row_sign.push(flip);
            rels.push(match (c.rel, flip) {
                (Relation::Eq, _) => Relation::Eq,
                (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
                _ => Relation::Ge,
            });
        }
        let mut slack_col = vec![None; m];
        for (r, rel) in rels.iter().enumerate() {
            if *rel != Relation::Eq {
                slack_col[r] = Some(kinds.len());
                kinds.push(ColKind::Slack);
            }
        }
        let mut unit_col = vec![0; m];
        for (r, rel) in rels.iter().enumerate() {
            if *rel == Relation::Le {
                unit_col[r] = slack_col[r].unwrap();
            } else {
                unit_col[r] = kinds.len();
                kinds.push(ColKind::Artificial);
            }
        }
        let ncols = kinds.len();
        let mut rows = Vec::with_capacity(m);
        for (r, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Q::zero(); ncols + 1];
            let s = if row_sign[r] { -Q::one() } else { Q::one() };
            for (j, a) in &c.coeffs {
                let (p, mc) = var_col[*j];
                row[p] += &s * a;
                if let Some(mc) = mc {
                    row[mc] -= &s * a;
                }
            }
            match rels[r] {
                Relation::Le => row[slack_col[r].unwrap()] = Q::one(),
                Relation::Ge => {
                    row[slack_col[r].unwrap()] = -Q::one();
                    row[unit_col[r]] = Q::one();
                }
                Relation::Eq => row[unit_col[r]] = Q::one(),
            }
            row[ncols] = &s * &c.rhs;
            rows.push(row);
        }
        Tableau {
            rows,
            obj: vec![Q::zero(); ncols + 1],
            basis: unit_col.clone(),
            kinds,
            unit_col,
            row_sign,
            ncols,
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let piv = self.rows[pr][pc].clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for x in self.rows[pr].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
        }
        let nz: Vec<usize> = (0..=self.ncols).filter(|&j| !self.rows[pr][j].is_zero()).collect();
        let prow = self.rows[pr].clone();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr || row[pc].is_zero() {
                continue;
            }
            let f = row[pc].clone();
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
        }
        if !self.obj[pc].is_zero() {
            let f = self.obj[pc].clone();
            for &j in &nz {
                self.obj[j] -= &f * &prow[j];
            }
        }
        self.basis[pr] = pc;
    }

    /// Sets the reduced-cost row for costs `c` (indexed by column).
    fn price(&mut self, c: &[Q]) {
        let mut obj: Vec<Q> = c.to_vec();
        obj.push(Q::zero());
        for (r, row) in self.rows.iter().enumerate() {
            let cb = &c[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    obj[j] -= cb * a;
                }
            }
        }
        self.obj = obj;
    }

    /// Simplex on the current reduced costs. `Err(())` on unboundedness.
    fn iterate(&mut self, allow_artificial: bool) -> Result<(), ()> {
        let mut degenerate = 0usize;
        loop {
            let eligible = |j: usize| allow_artificial || self.kinds[j] != ColKind::Artificial;
            let enter = if degenerate > DEGENERATE_LIMIT {
                (0..self.ncols).find(|&j| self.obj[j].is_negative() && eligible(j))
            } else {
                (0..self.ncols)
                    .filter(|&j| self.obj[j].is_negative() && eligible(j))
                    .min_by(|&a, &b| self.obj[a].cmp(&self.obj[b]).then(a.cmp(&b)))
            };
            let Some(pc) = enter else { return Ok(()) };
            let mut best: Option<(usize, Q)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[pc].is_positive() {
                    continue;
                }
                let ratio = &row[self.ncols] / &row[pc];
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bq)) => {
                        if ratio < bq || (ratio == bq && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bq))
                        }
                    }
                };
            }
            let Some((pr, ratio)) = best else { return Err(()) };
            if ratio.is_zero() {
                degenerate += 1;
            } else if degenerate <= DEGENERATE_LIMIT {
                degenerate = 0;
            }
            self.pivot(pr, pc);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        let has_art = self.kinds.contains(&ColKind::Artificial);
        if has_art {
            let c1: Vec<Q> = self
                .kinds
                .iter()
                .map(|k| if *k == ColKind::Artificial { Q::one() } else { Q::zero() })
                .collect();
            self.price(&c1);
            // phase one is bounded below by zero
            let _ = self.iterate(true);
            if !self.obj[self.ncols].is_zero() {
                return LpOutcome::Infeasible;
            }
            for r in 0..self.rows.len() {
                if self.kinds[self.basis[r]] != ColKind::Artificial {
                    continue;
                }
                let col = (0..self.ncols)
                    .find(|&j| self.kinds[j] != ColKind::Artificial && !self.rows[r][j].is_zero());
                if let Some(j) = col {
                    self.pivot(r, j);
                }
            }
        }
        let c2: Vec<Q> = self
            .kinds
            .iter()
            .map(|k| match k {
                ColKind::Plus(j) => lp.objective[*j].clone(),
                ColKind::Minus(j) => -lp.objective[*j].clone(),
                _ => Q::zero(),
            })
            .collect();
        self.price(&c2);
        if self.iterate(false).is_err() {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Q::zero(); lp.num_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            let v = &self.rows[r][self.ncols];
            match self.kinds[b] {
                ColKind::Plus(j) => x[j] += v,
                ColKind::Minus(j) => x[j] -= v,
                _ => {}
            }
        }
        let value = crate::rational::dot(&lp.objective, &x);
        let duals = (0..self.rows.len())
            .map(|r| {
                let y = &c2[self.unit_col[r]] - &self.obj[self.unit_col[r]];
                if self.row_sign[r] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        LpOutcome::Optimal(LpSolution { x, value, duals })
    }
}
