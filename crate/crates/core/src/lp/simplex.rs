//! Two-phase revised simplex with an explicit basis inverse.
//!
//! Pricing is Dantzig's rule with lowest-index tie-breaking. After a run of
//! degenerate pivots the solver switches to Bland's rule until the objective
//! moves again, which rules out cycling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Constraint<T> {
    /// Sparse `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, T)>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct VarBounds<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct LinearProgram<T> {
    pub direction: Direction,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub bounds: Vec<VarBounds<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum LpOutcome<T> {
    Optimal { value: T, point: Vec<T> },
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn optimal(self) -> Option<(T, Vec<T>)> {
        match self {
            LpOutcome::Optimal { value, point } => Some((value, point)),
            _ => None,
        }
    }
}

impl<T: Scalar> LinearProgram<T> {
    /// `num_vars` nonnegative variables and a zero objective.
    pub fn new(num_vars: usize, direction: Direction) -> Self {
        Self {
            direction,
            objective: vec![T::zero(); num_vars],
            constraints: Vec::new(),
            bounds: vec![
                VarBounds {
                    lower: Some(T::zero()),
                    upper: None,
                };
                num_vars
            ],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, T)>, relation: Relation, rhs: T) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<T>, upper: Option<T>) {
        self.bounds[var] = VarBounds { lower, upper };
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::Shape("one bound pair per variable required".into()));
        }
        let finite = |v: T| v.to_f64_lossy().is_finite();
        if !self.objective.iter().all(|&c| finite(c)) {
            return Err(Error::Shape("non-finite objective coefficient".into()));
        }
        for c in &self.constraints {
            if !finite(c.rhs) || c.coeffs.iter().any(|&(j, a)| j >= n || !finite(a)) {
                return Err(Error::Shape("constraint references a bad variable or value".into()));
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpOutcome<T>> {
        lp_solve(self)
    }
}

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap<T> {
    Shift { col: usize, lower: T },
    Reflect { col: usize, upper: T },
    Split { pos: usize, neg: usize },
}

const REFACTOR_EVERY: usize = 1000;
const DEGENERATE_RUN: usize = 50;
const PIVOT_TOLERANCE: f64 = 1e-7;
const DRIFT_TOLERANCE: f64 = 1e-9;

struct Tableau<T: Scalar> {
    m: usize,
    cols: Vec<Vec<(usize, T)>>,
    b: Vec<T>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<T>,
    xb: Vec<T>,
    pivots: usize,
    since_refactor: usize,
    max_pivots: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl<T: Scalar> Tableau<T> {
    fn tol(&self) -> T {
        T::tolerance()
    }

    /// Row `r` of the basis inverse. Storage is column-major:
    /// `binv[c * m + i]` holds entry `(i, c)`.
    fn inv_row(&self, r: usize) -> Vec<T> {
        let m = self.m;
        (0..m).map(|c| self.binv[c * m + r]).collect()
    }

    /// `B^{-1} A_j`.
    fn column(&self, j: usize) -> Vec<T> {
        let m = self.m;
        let mut u = vec![T::zero(); m];
        for &(r, a) in &self.cols[j] {
            for (ui, &v) in u.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                *ui = *ui + v * a;
            }
        }
        u
    }

    fn duals(&self, cost: &[T]) -> Vec<T> {
        let m = self.m;
        let cb: Vec<T> = self.basis.iter().map(|&j| cost[j]).collect();
        (0..m)
            .map(|c| {
                cb.iter()
                    .zip(&self.binv[c * m..(c + 1) * m])
                    .fold(T::zero(), |acc, (&x, &v)| acc + x * v)
            })
            .collect()
    }

    fn reduced_cost(&self, j: usize, cost: &[T], pi: &[T]) -> T {
        self.cols[j]
            .iter()
            .fold(cost[j], |acc, &(r, a)| acc - pi[r] * a)
    }

    fn pivot(&mut self, r: usize, j: usize, u: &[T]) -> Result<()> {
        let m = self.m;
        let piv = u[r];
        let theta = self.xb[r] / piv;
        for i in 0..m {
            if i != r && u[i] != T::zero() {
                self.xb[i] = self.xb[i] - u[i] * theta;
            }
        }
        self.xb[r] = theta;
        for c in 0..m {
            let col = &mut self.binv[c * m..(c + 1) * m];
            let f = col[r] / piv;
            if f == T::zero() {
                continue;
            }
            for (x, &ui) in col.iter_mut().zip(u) {
                *x = *x - f * ui;
            }
            col[r] = f;
        }
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = j;
        self.is_basic[j] = true;
        self.pivots += 1;
        self.since_refactor += 1;
        if self.pivots > self.max_pivots {
            return Err(Error::Numerical(format!(
                "iteration limit of {} pivots reached",
                self.max_pivots
            )));
        }
        if !T::is_exact() && self.since_refactor >= REFACTOR_EVERY {
            self.since_refactor = 0;
            self.refresh_if_drifted()?;
        }
        Ok(())
    }

    /// Largest entry of `|B x_B - b|`.
    fn residual(&self) -> T {
        let mut r = self.b.clone();
        for (k, &j) in self.basis.iter().enumerate() {
            for &(i, a) in &self.cols[j] {
                r[i] = r[i] - a * self.xb[k];
            }
        }
        r.iter().fold(T::zero(), |m, &v| m.max_of(v.abs()))
    }

    /// Refactorizes only when the basic solution has drifted measurably.
    fn refresh_if_drifted(&mut self) -> Result<()> {
        if self.residual() > T::from_f64_lossy(DRIFT_TOLERANCE) {
            self.refactor()?;
        }
        Ok(())
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination and recomputes `x_B`.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![T::zero(); m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for &(r, v) in &self.cols[j] {
                a[r * m + k] = v;
            }
        }
        let mut inv = vec![T::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = T::one();
        }
        for c in 0..m {
            let mut best = c;
            for r in c + 1..m {
                if a[r * m + c].abs() > a[best * m + c].abs() {
                    best = r;
                }
            }
            if a[best * m + c].abs() <= self.tol() * T::from_f64_lossy(1e-3) || a[best * m + c] == T::zero() {
                return Err(Error::Numerical("basis matrix became singular".into()));
            }
            if best != c {
                for k in 0..m {
                    a.swap(c * m + k, best * m + k);
                    inv.swap(c * m + k, best * m + k);
                }
            }
            let p = a[c * m + c];
            for k in 0..m {
                a[c * m + k] = a[c * m + k] / p;
                inv[c * m + k] = inv[c * m + k] / p;
            }
            let (pivot_a, pivot_inv) = (a[c * m..(c + 1) * m].to_vec(), inv[c * m..(c + 1) * m].to_vec());
            for r in 0..m {
                let f = a[r * m + c];
                if r == c || f == T::zero() {
                    continue;
                }
                // Columns left of `c` are already eliminated in the pivot row.
                for (x, &y) in a[r * m + c..(r + 1) * m].iter_mut().zip(&pivot_a[c..]) {
                    *x = *x - f * y;
                }
                for (x, &y) in inv[r * m..(r + 1) * m].iter_mut().zip(&pivot_inv) {
                    *x = *x - f * y;
                }
            }
        }
        // Gauss-Jordan leaves B^{-1} row-major in `inv`; store it transposed.
        self.xb = (0..m)
            .map(|i| (0..m).fold(T::zero(), |acc, k| acc + inv[i * m + k] * self.b[k]))
            .collect();
        for i in 0..m {
            for c in 0..m {
                self.binv[c * m + i] = inv[i * m + c];
            }
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn run(&mut self, cost: &[T], allowed: &dyn Fn(usize) -> bool) -> Result<Phase> {
        let tol = self.tol();
        let piv_tol = if T::is_exact() {
            T::zero()
        } else {
            T::from_f64_lossy(PIVOT_TOLERANCE)
        };
        let mut degenerate = 0usize;
        let mut pi = self.duals(cost);
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering: Option<(usize, T)> = None;
            for j in 0..self.cols.len() {
                if self.is_basic[j] || !allowed(j) {
                    continue;
                }
                let d = self.reduced_cost(j, cost, &pi);
                if d < -tol {
                    match entering {
                        None => entering = Some((j, d)),
                        Some((_, best)) if !bland && d < best => entering = Some((j, d)),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some((j, dj)) = entering else {
                return Ok(Phase::Optimal);
            };
            let u = self.column(j);
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.m {
                if u[i] <= piv_tol || u[i] == T::zero() {
                    continue;
                }
                let ratio = self.xb[i].max_of(T::zero()) / u[i];
                let take = match leave {
                    None => true,
                    Some((r, best)) => {
                        if ratio < best - tol {
                            true
                        } else if ratio <= best + tol {
                            if bland {
                                self.basis[i] < self.basis[r]
                            } else {
                                u[i] > u[r]
                            }
                        } else {
                            false
                        }
                    }
                };
                if take {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(Phase::Unbounded);
            };
            if ratio <= tol {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.xb[r] = self.xb[r].max_of(T::zero());
            // Dual update: π += (d_j / u_r) · row r of the old inverse.
            let f = dj / u[r];
            for (p, v) in pi.iter_mut().zip(self.inv_row(r)) {
                *p = *p + f * v;
            }
            self.pivot(r, j, &u)?;
            if self.since_refactor == 0 || self.pivots % 20 == 0 {
                pi = self.duals(cost);
            }
        }
    }
}

/// Solves `lp`. Numerical breakdown and the iteration limit are errors.
pub fn lp_solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpOutcome<T>> {
    lp.validate()?;
    let n = lp.num_vars();
    let zero = T::zero();
    let one = T::one();

    // Standard form: columns are nonnegative.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut rows: Vec<(Vec<(usize, T)>, Relation, T)> = Vec::new();
    for b in &lp.bounds {
        let map = match (b.lower, b.upper) {
            (Some(l), u) => {
                if let Some(u) = u {
                    if u < l {
                        return Ok(LpOutcome::Infeasible);
                    }
                    rows.push((vec![(ncols, one)], Relation::Le, u - l));
                }
                ncols += 1;
                VarMap::Shift {
                    col: ncols - 1,
                    lower: l,
                }
            }
            (None, Some(u)) => {
                ncols += 1;
                VarMap::Reflect {
                    col: ncols - 1,
                    upper: u,
                }
            }
            (None, None) => {
                ncols += 2;
                VarMap::Split {
                    pos: ncols - 2,
                    neg: ncols - 1,
                }
            }
        };
        maps.push(map);
    }
    let n_struct = ncols;
    let sign = match lp.direction {
        Direction::Minimize => one,
        Direction::Maximize => -one,
    };
    let mut cost = vec![zero; n_struct];
    for (j, &c) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] = cost[col] + sign * c,
            VarMap::Reflect { col, .. } => cost[col] = cost[col] - sign * c,
            VarMap::Split { pos, neg } => {
                cost[pos] = cost[pos] + sign * c;
                cost[neg] = cost[neg] - sign * c;
            }
        }
    }
    let bound_rows = rows.len();
    for c in &lp.constraints {
        let mut rhs = c.rhs;
        let mut coeffs: Vec<(usize, T)> = Vec::with_capacity(c.coeffs.len());
        for &(j, a) in &c.coeffs {
            match maps[j] {
                VarMap::Shift { col, lower } => {
                    coeffs.push((col, a));
                    rhs = rhs - a * lower;
                }
                VarMap::Reflect { col, upper } => {
                    coeffs.push((col, -a));
                    rhs = rhs - a * upper;
                }
                VarMap::Split { pos, neg } => {
                    coeffs.push((pos, a));
                    coeffs.push((neg, -a));
                }
            }
        }
        rows.push((coeffs, c.relation, rhs));
    }
    debug_assert!(bound_rows <= rows.len());

    let m = rows.len();
    let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); n_struct];
    let mut b = Vec::with_capacity(m);
    let mut slack_basic: Vec<Option<usize>> = vec![None; m];
    for (r, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        let flip = *rhs < zero;
        let s = if flip { -one } else { one };
        for &(j, a) in coeffs {
            if a != zero {
                cols[j].push((r, s * a));
            }
        }
        b.push(s * *rhs);
        let slack = match rel {
            Relation::Le => Some(one),
            Relation::Ge => Some(-one),
            Relation::Eq => None,
        };
        if let Some(sl) = slack {
            cols.push(vec![(r, s * sl)]);
            if s * sl == one {
                slack_basic[r] = Some(cols.len() - 1);
            }
        }
    }
    // Merge duplicate entries created by split variables or repeated indices.
    for col in cols.iter_mut() {
        col.sort_by_key(|&(r, _)| r);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(col.len());
        for &(r, a) in col.iter() {
            match merged.last_mut() {
                Some((lr, la)) if *lr == r => *la = *la + a,
                _ => merged.push((r, a)),
            }
        }
        merged.retain(|&(_, a)| a != zero);
        *col = merged;
    }
    let art_start = cols.len();
    let mut basis = vec![0; m];
    for r in 0..m {
        basis[r] = match slack_basic[r] {
            Some(j) => j,
            None => {
                cols.push(vec![(r, one)]);
                cols.len() - 1
            }
        };
    }
    let total = cols.len();
    let mut is_basic = vec![false; total];
    for &j in &basis {
        is_basic[j] = true;
    }
    let mut binv = vec![zero; m * m];
    for i in 0..m {
        binv[i * m + i] = one;
    }
    let mut tab = Tableau {
        m,
        cols,
        xb: b.clone(),
        b,
        basis,
        is_basic,
        binv,
        pivots: 0,
        since_refactor: 0,
        max_pivots: 50 * (m + total) + 10_000,
    };

    let feas_tol = if T::is_exact() {
        zero
    } else {
        T::from_f64_lossy(1e-7)
    };

    if total > art_start {
        let mut c1 = vec![zero; total];
        for c in c1.iter_mut().skip(art_start) {
            *c = one;
        }
        let art = art_start;
        tab.run(&c1, &|j| j < art)?;
        if !T::is_exact() {
            tab.refresh_if_drifted()?;
        }
        let infeas = (0..m)
            .filter(|&i| tab.basis[i] >= art_start)
            .fold(zero, |acc, i| acc + tab.xb[i]);
        let scale = tab.b.iter().fold(one, |acc, &v| acc.max_of(v.abs()));
        if infeas > feas_tol * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out where a structural column can replace them.
        for r in 0..m {
            if tab.basis[r] < art_start {
                continue;
            }
            let row = tab.inv_row(r);
            let mut best: Option<(usize, T)> = None;
            for j in 0..art_start {
                if tab.is_basic[j] {
                    continue;
                }
                let v = tab.cols[j].iter().fold(zero, |acc, &(i, a)| acc + row[i] * a);
                if v.abs() > feas_tol && best.map_or(true, |(_, bv)| v.abs() > bv.abs()) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                let u = tab.column(j);
                tab.xb[r] = zero;
                tab.pivot(r, j, &u)?;
            }
        }
    }

    let mut c2 = vec![zero; total];
    c2[..n_struct].copy_from_slice(&cost);
    let phase = tab.run(&c2, &|j| j < art_start)?;
    if let Phase::Unbounded = phase {
        return Ok(LpOutcome::Unbounded);
    }
    if !T::is_exact() {
        tab.refresh_if_drifted()?;
        if tab.xb.iter().any(|&v| v < -feas_tol) {
            return Err(Error::Numerical("final basis is not primal feasible".into()));
        }
    }
    let mut y = vec![zero; total];
    for (i, &j) in tab.basis.iter().enumerate() {
        y[j] = tab.xb[i].max_of(zero);
    }
    let point: Vec<T> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lower } => lower + y[col],
            VarMap::Reflect { col, upper } => upper - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let value = lp
        .objective
        .iter()
        .zip(&point)
        .fold(zero, |acc, (&c, &x)| acc + c * x);
    Ok(LpOutcome::Optimal { value, point })
}
