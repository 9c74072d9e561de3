//! Dense two-phase simplex returning primal values together with a dual
//! certificate: optimal duals when the LP is solved, a Farkas ray when it is
//! infeasible.
//!
//! Exact arithmetic pivots by Bland's rule, so it always terminates. The
//! floating-point path uses partial pricing with a 1e-10 pivot tolerance and
//! falls back to Bland's rule after a run of degenerate pivots.

use serde::{Deserialize, Serialize};

use super::{Rational, Scalar};
use crate::error::{malformed, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarBound {
    Free,
    NonNegative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Clone, Debug)]
pub struct LpProblem<T> {
    pub sense: Sense,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub bounds: Vec<VarBound>,
}

/// Result of [`LpProblem::solve`].
///
/// Sign convention for `dual` when optimal: the dual objective is
/// `Σ rhs_i · dual_i` and equals the primal objective. For a minimisation,
/// `≥` rows carry nonnegative multipliers and `≤` rows nonpositive ones; for a
/// maximisation the signs flip. When infeasible, `dual` holds a Farkas ray
/// `y` with `Σ rhs_i y_i > 0`, `Aᵀy ≤ 0` on nonnegative variables, `Aᵀy = 0`
/// on free variables, `y_i ≤ 0` on `≤` rows and `y_i ≥ 0` on `≥` rows.
#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub primal: Vec<T>,
    pub dual: Vec<T>,
    pub objective: Option<T>,
    pub dual_objective: Option<T>,
}

impl<T: Scalar> LpProblem<T> {
    /// All variables default to nonnegative.
    pub fn new(sense: Sense, objective: Vec<T>) -> Self {
        let n = objective.len();
        LpProblem { sense, objective, constraints: Vec::new(), bounds: vec![VarBound::NonNegative; n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bound(&mut self, var: usize, bound: VarBound) {
        self.bounds[var] = bound;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return malformed(format!("{} bounds for {n} variables", self.bounds.len()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return malformed(format!("constraint {i} has {} coefficients, objective has {n}", c.coeffs.len()));
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpSolution<T>> {
        self.validate()?;
        Simplex::build(self).run(self)
    }

    /// Independent certificate check. Returns the list of violated
    /// conditions; empty means the solution is certified.
    pub fn check_solution(&self, sol: &LpSolution<T>) -> Vec<String> {
        let mut bad = Vec::new();
        let n = self.num_vars();
        let m = self.constraints.len();
        if sol.dual.len() != m {
            bad.push(format!("dual has {} entries for {m} rows", sol.dual.len()));
            return bad;
        }
        let tol = if T::EXACT { T::zero() } else { T::from_i64(1).div(&T::from_i64(1_000_000_000)) };
        let neg_tol = tol.neg();
        let aty: Vec<T> = (0..n)
            .map(|j| self.constraints.iter().zip(&sol.dual).fold(T::zero(), |acc, (c, y)| acc.add(&c.coeffs[j].mul(y))))
            .collect();
        let by = self.constraints.iter().zip(&sol.dual).fold(T::zero(), |acc, (c, y)| acc.add(&c.rhs.mul(y)));
        match sol.status {
            LpStatus::Optimal => {
                if sol.primal.len() != n {
                    bad.push("primal length mismatch".into());
                    return bad;
                }
                for (j, (x, b)) in sol.primal.iter().zip(&self.bounds).enumerate() {
                    if *b == VarBound::NonNegative && *x < neg_tol {
                        bad.push(format!("x{j} violates nonnegativity"));
                    }
                }
                for (i, c) in self.constraints.iter().enumerate() {
                    let lhs = c.coeffs.iter().zip(&sol.primal).fold(T::zero(), |acc, (a, x)| acc.add(&a.mul(x)));
                    let slack = lhs.sub(&c.rhs);
                    let ok = match c.relation {
                        Relation::Le => slack <= tol,
                        Relation::Ge => slack >= neg_tol,
                        Relation::Eq => slack <= tol && slack >= neg_tol,
                    };
                    if !ok {
                        bad.push(format!("row {i} violated by primal"));
                    }
                }
                let min = self.sense == Sense::Minimize;
                for (i, (c, y)) in self.constraints.iter().zip(&sol.dual).enumerate() {
                    let ok = match (c.relation, min) {
                        (Relation::Eq, _) => true,
                        (Relation::Ge, true) | (Relation::Le, false) => *y >= neg_tol,
                        (Relation::Le, true) | (Relation::Ge, false) => *y <= tol,
                    };
                    if !ok {
                        bad.push(format!("dual {i} has the wrong sign"));
                    }
                }
                for j in 0..n {
                    let d = self.objective[j].sub(&aty[j]);
                    let ok = match (self.bounds[j], min) {
                        (VarBound::Free, _) => d <= tol && d >= neg_tol,
                        (VarBound::NonNegative, true) => d >= neg_tol,
                        (VarBound::NonNegative, false) => d <= tol,
                    };
                    if !ok {
                        bad.push(format!("reduced cost of x{j} infeasible for the dual"));
                    }
                }
                let cx = self.objective.iter().zip(&sol.primal).fold(T::zero(), |acc, (c, x)| acc.add(&c.mul(x)));
                let gap = cx.sub(&by);
                let scale = T::one().add(&cx.abs());
                if !(gap.abs() <= tol.mul(&scale)) {
                    bad.push(format!("duality gap {:?}", gap));
                }
            }
            LpStatus::Infeasible => {
                if !(by > tol) {
                    bad.push("Farkas ray does not separate the right-hand side".into());
                }
                for j in 0..n {
                    let ok = match self.bounds[j] {
                        VarBound::Free => aty[j] <= tol && aty[j] >= neg_tol,
                        VarBound::NonNegative => aty[j] <= tol,
                    };
                    if !ok {
                        bad.push(format!("Farkas ray fails on column {j}"));
                    }
                }
                for (i, (c, y)) in self.constraints.iter().zip(&sol.dual).enumerate() {
                    let ok = match c.relation {
                        Relation::Eq => true,
                        Relation::Le => *y <= tol,
                        Relation::Ge => *y >= neg_tol,
                    };
                    if !ok {
                        bad.push(format!("Farkas multiplier {i} has the wrong sign"));
                    }
                }
            }
            LpStatus::Unbounded => {}
        }
        bad
    }
}

impl LpProblem<Rational> {
    pub fn to_float(&self) -> LpProblem<f64> {
        LpProblem {
            sense: self.sense,
            objective: self.objective.iter().map(|v| v.to_f64()).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    coeffs: c.coeffs.iter().map(|v| v.to_f64()).collect(),
                    relation: c.relation,
                    rhs: c.rhs.to_f64(),
                })
                .collect(),
            bounds: self.bounds.clone(),
        }
    }
}

/// Solves a rational LP either exactly or in floating point. Float results
/// are converted back to (dyadic) rationals and are only approximate.
pub fn lp_solve(problem: &LpProblem<Rational>, mode: Mode) -> Result<LpSolution<Rational>> {
    match mode {
        Mode::Exact => {
            let sol = problem.solve()?;
            debug_assert!(problem.check_solution(&sol).is_empty(), "{:?}", problem.check_solution(&sol));
            Ok(sol)
        }
        Mode::Float => {
            let sol = problem.to_float().solve()?;
            let conv = |v: &f64| Rational::from_f64(*v).unwrap_or_else(Rational::zero);
            Ok(LpSolution {
                status: sol.status,
                primal: sol.primal.iter().map(conv).collect(),
                dual: sol.dual.iter().map(conv).collect(),
                objective: sol.objective.as_ref().map(conv),
                dual_objective: sol.dual_objective.as_ref().map(conv),
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Column {
    Structural { var: usize, negated: bool },
    Slack,
    Surplus,
    Artificial,
}

struct Simplex<T> {
    m: usize,
    n: usize,
    /// m rows of n+1 entries; the last entry is the right-hand side.
    a: Vec<T>,
    /// Reduced costs, with `obj[n] = −(objective value)`.
    obj: Vec<T>,
    basis: Vec<usize>,
    kinds: Vec<Column>,
    /// Column initially basic in each row (slack or artificial, both +e_i).
    init_col: Vec<usize>,
    row_negated: Vec<bool>,
    phase2_cost: Vec<T>,
    pricing_start: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<T: Scalar> Simplex<T> {
    fn build(p: &LpProblem<T>) -> Self {
        let m = p.constraints.len();
        let mut kinds = Vec::new();
        let mut phase2_cost = Vec::new();
        let minimize = p.sense == Sense::Minimize;
        for (j, b) in p.bounds.iter().enumerate() {
            let c = if minimize { p.objective[j].clone() } else { p.objective[j].neg() };
            kinds.push(Column::Structural { var: j, negated: false });
            phase2_cost.push(c.clone());
            if *b == VarBound::Free {
                kinds.push(Column::Structural { var: j, negated: true });
                phase2_cost.push(c.neg());
            }
        }
        let mut row_negated = Vec::with_capacity(m);
        let mut rels = Vec::with_capacity(m);
        for c in &p.constraints {
            let neg = c.rhs < T::zero();
            row_negated.push(neg);
            rels.push(match (c.relation, neg) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            });
        }
        let mut init_col = vec![0; m];
        let mut surplus_col = vec![None; m];
        for (i, rel) in rels.iter().enumerate() {
            match rel {
                Relation::Le => {
                    init_col[i] = kinds.len();
                    kinds.push(Column::Slack);
                    phase2_cost.push(T::zero());
                }
                Relation::Ge => {
                    surplus_col[i] = Some(kinds.len());
                    kinds.push(Column::Surplus);
                    phase2_cost.push(T::zero());
                }
                Relation::Eq => {}
            }
        }
        for (i, rel) in rels.iter().enumerate() {
            if *rel != Relation::Le {
                init_col[i] = kinds.len();
                kinds.push(Column::Artificial);
                phase2_cost.push(T::zero());
            }
        }
        let n = kinds.len();
        let w = n + 1;
        let mut a = vec![T::zero(); m * w];
        for (i, c) in p.constraints.iter().enumerate() {
            let sign_flip = row_negated[i];
            let row = &mut a[i * w..(i + 1) * w];
            for (col, kind) in kinds.iter().enumerate() {
                if let Column::Structural { var, negated } = *kind {
                    let mut v = c.coeffs[var].clone();
                    if negated != sign_flip {
                        v = v.neg();
                    }
                    row[col] = v;
                }
            }
            row[n] = if sign_flip { c.rhs.neg() } else { c.rhs.clone() };
            row[init_col[i]] = T::one();
            if let Some(col) = surplus_col[i] {
                row[col] = T::one().neg();
            }
        }
        Simplex {
            m,
            n,
            a,
            obj: vec![T::zero(); w],
            basis: init_col.clone(),
            kinds,
            init_col,
            row_negated,
            phase2_cost,
            pricing_start: 0,
        }
    }

    fn at(&self, i: usize, j: usize) -> &T {
        &self.a[i * (self.n + 1) + j]
    }

    fn set_costs(&mut self, cost: &[T]) {
        let w = self.n + 1;
        for j in 0..w {
            let mut r = if j < self.n { cost[j].clone() } else { T::zero() };
            for i in 0..self.m {
                let cb = &cost[self.basis[i]];
                if cb.is_zero() {
                    continue;
                }
                let aij = &self.a[i * w + j];
                if !aij.is_zero() {
                    r = r.sub(&cb.mul(aij));
                }
            }
            self.obj[j] = r.snap();
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.n + 1;
        let piv = self.a[r * w + c].clone();
        for j in 0..w {
            let v = &self.a[r * w + j];
            if !v.is_zero() {
                self.a[r * w + j] = v.div(&piv).snap();
            }
        }
        self.a[r * w + c] = T::one();
        let pivot_row: Vec<(usize, T)> =
            (0..w).filter(|&j| !self.a[r * w + j].is_zero()).map(|j| (j, self.a[r * w + j].clone())).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * w + c].clone();
            if f.is_zero() {
                continue;
            }
            for (j, v) in &pivot_row {
                let idx = i * w + j;
                self.a[idx] = self.a[idx].sub(&f.mul(v)).snap();
            }
            self.a[i * w + c] = T::zero();
        }
        let f = self.obj[c].clone();
        if !f.is_zero() {
            for (j, v) in &pivot_row {
                self.obj[*j] = self.obj[*j].sub(&f.mul(v)).snap();
            }
            self.obj[c] = T::zero();
        }
        self.basis[r] = c;
    }

    fn entering(&mut self, allow_artificial: bool, bland: bool) -> Option<usize> {
        let allowed = |kinds: &[Column], j: usize| allow_artificial || kinds[j] != Column::Artificial;
        if bland {
            return (0..self.n).find(|&j| allowed(&self.kinds, j) && self.obj[j].lt_neg_tol());
        }
        // Partial pricing: scan segments from a rotating start and take the
        // most negative reduced cost within the first segment that has one.
        let seg = (self.n / 8).max(16);
        let mut scanned = 0;
        let mut j = self.pricing_start % self.n.max(1);
        while scanned < self.n {
            let mut best: Option<usize> = None;
            let end = (scanned + seg).min(self.n);
            while scanned < end {
                if allowed(&self.kinds, j) && self.obj[j].lt_neg_tol() {
                    match best {
                        Some(b) if self.obj[b] <= self.obj[j] => {}
                        _ => best = Some(j),
                    }
                }
                j = (j + 1) % self.n;
                scanned += 1;
            }
            if best.is_some() {
                self.pricing_start = j;
                return best;
            }
        }
        None
    }

    fn leaving(&self, c: usize, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for i in 0..self.m {
            let aic = self.at(i, c);
            if !aic.gt_tol() {
                continue;
            }
            let ratio = self.at(i, self.n).div(aic);
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let better = if ratio < br {
                        true
                    } else if ratio > br || T::EXACT && ratio != br {
                        false
                    } else if bland {
                        self.basis[i] < self.basis[bi]
                    } else {
                        aic.abs() > self.at(bi, c).abs()
                    };
                    if better {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn iterate(&mut self, allow_artificial: bool) -> Result<Outcome> {
        let limit = if T::EXACT { usize::MAX } else { 200 * (self.m + self.n) + 1000 };
        let mut degenerate_run = 0usize;
        for _ in 0..limit {
            let bland = T::EXACT || degenerate_run > 50;
            let Some(c) = self.entering(allow_artificial, bland) else {
                return Ok(Outcome::Optimal);
            };
            let Some(r) = self.leaving(c, bland) else {
                return Ok(Outcome::Unbounded);
            };
            if self.at(r, self.n).near_zero() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::Numerical("simplex iteration limit reached".into()))
    }

    /// y_i = c_{init_i} − r_{init_i}, mapped back to the caller's row
    /// orientation.
    fn row_duals(&self, cost_of_init: impl Fn(usize) -> T) -> Vec<T> {
        (0..self.m)
            .map(|i| {
                let col = self.init_col[i];
                let y = cost_of_init(col).sub(&self.obj[col]);
                if self.row_negated[i] {
                    y.neg()
                } else {
                    y
                }
            })
            .collect()
    }

    fn run(mut self, p: &LpProblem<T>) -> Result<LpSolution<T>> {
        let has_artificial = self.kinds.contains(&Column::Artificial);
        if has_artificial {
            let phase1: Vec<T> =
                self.kinds.iter().map(|k| if *k == Column::Artificial { T::one() } else { T::zero() }).collect();
            self.set_costs(&phase1);
            match self.iterate(true)? {
                Outcome::Optimal => {}
                Outcome::Unbounded => return Err(Error::Numerical("phase one reported unbounded".into())),
            }
            let infeasibility = self.obj[self.n].neg();
            if infeasibility.gt_tol() {
                let kinds = self.kinds.clone();
                let ray = self.row_duals(|col| if kinds[col] == Column::Artificial { T::one() } else { T::zero() });
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    primal: Vec::new(),
                    dual: ray,
                    objective: None,
                    dual_objective: None,
                });
            }
            self.drive_out_artificials();
        }
        let cost = self.phase2_cost.clone();
        self.set_costs(&cost);
        match self.iterate(false)? {
            Outcome::Unbounded => {
                return Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    primal: Vec::new(),
                    dual: Vec::new(),
                    objective: None,
                    dual_objective: None,
                })
            }
            Outcome::Optimal => {}
        }
        let mut primal = vec![T::zero(); p.num_vars()];
        for (i, &col) in self.basis.iter().enumerate() {
            if let Column::Structural { var, negated } = self.kinds[col] {
                let v = self.at(i, self.n).clone();
                primal[var] = if negated { primal[var].sub(&v) } else { primal[var].add(&v) };
            }
        }
        let mut dual = self.row_duals(|_| T::zero());
        let mut value = self.obj[self.n].neg();
        if p.sense == Sense::Maximize {
            dual = dual.iter().map(|y| y.neg()).collect();
            value = value.neg();
        }
        let dual_objective = p.constraints.iter().zip(&dual).fold(T::zero(), |acc, (c, y)| acc.add(&c.rhs.mul(y)));
        let objective = p.objective.iter().zip(&primal).fold(T::zero(), |acc, (c, x)| acc.add(&c.mul(x)));
        debug_assert!(!T::EXACT || objective == value);
        Ok(LpSolution {
            status: LpStatus::Optimal,
            primal,
            dual,
            objective: Some(objective),
            dual_objective: Some(dual_objective),
        })
    }

    fn drive_out_artificials(&mut self) {
        for i in 0..self.m {
            if self.kinds[self.basis[i]] != Column::Artificial {
                continue;
            }
            let col = (0..self.n).find(|&j| self.kinds[j] != Column::Artificial && !self.at(i, j).near_zero());
            if let Some(j) = col {
                self.pivot(i, j);
            }
            // Otherwise the row is redundant; its artificial stays basic at zero.
        }
    }
}
