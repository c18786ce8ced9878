//! Dense two-phase primal simplex with bounded variables.
//!
//! Every LP in the crate is small and dense enough for a full tableau: the
//! per-arc moment problems have a handful of columns, and the branch-and-bound
//! relaxations stay in the low thousands. Variables may carry arbitrary
//! (possibly infinite) bounds; finite upper bounds are handled implicitly by
//! the ratio test rather than by extra rows.
//!
//! Duals follow the Lagrangian convention `r = c - A^T y`: for a minimization,
//! `<=` rows carry `y <= 0` and `>=` rows `y >= 0`; signs flip for maximization.

use alloc::vec;
use alloc::vec::Vec;

/// Feasibility / optimality tolerance on unit-scaled data.
pub const TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const DEFAULT_MAX_PIVOTS: usize = 100_000;
const STALL_THRESHOLD: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    /// Per-variable `[lo, hi]`; either side may be infinite.
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// One multiplier per row of the input program.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("row {row} has {got} coefficients, expected {expected}")]
    RowWidth { row: usize, got: usize, expected: usize },
    #[error("variable {var} has empty bound interval [{lo}, {hi}]")]
    EmptyBounds { var: usize, lo: f64, hi: f64 },
    #[error("non-finite coefficient in the model")]
    NonFinite,
    #[error("simplex did not terminate after {pivots} pivots")]
    NumericalFailure { pivots: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_pivots: usize,
    /// Consecutive degenerate pivots before Bland's rule takes over.
    pub stall_threshold: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_pivots: DEFAULT_MAX_PIVOTS,
            stall_threshold: STALL_THRESHOLD,
        }
    }
}

impl LinearProgram {
    /// A program with `objective.len()` nonnegative variables and no rows.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            rows: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite);
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::RowWidth {
                    row: i,
                    got: row.coeffs.len(),
                    expected: n,
                });
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::NonFinite);
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
            {
                return Err(LpError::EmptyBounds { var: j, lo, hi });
            }
        }
        Ok(())
    }

    /// Objective value of an arbitrary point.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest violation of any row or bound at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let lhs = dot(&row.coeffs, x);
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (xj, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - xj).max(xj - hi);
        }
        worst
    }
}

/// Optimality certificate computed from a solution, independent of the
/// simplex internals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub primal_residual: f64,
    /// Largest dual sign violation (row multipliers and reduced costs).
    pub dual_residual: f64,
    pub complementary_slackness: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl Certificate {
    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }
}

impl LpSolution {
    /// Checks primal feasibility, dual feasibility, complementary slackness and
    /// the duality gap of an optimal solution against `lp`.
    pub fn certificate(&self, lp: &LinearProgram) -> Certificate {
        // Work in minimization form: for a max problem negate c and y.
        let flip = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let n = lp.num_vars();
        let y: Vec<f64> = self.duals.iter().map(|v| v * flip).collect();
        let mut reduced: Vec<f64> = lp.objective.iter().map(|c| c * flip).collect();
        for (row, yi) in lp.rows.iter().zip(&y) {
            for (r, a) in reduced.iter_mut().zip(&row.coeffs) {
                *r -= a * yi;
            }
        }
        let mut dual_residual: f64 = 0.0;
        let mut comp: f64 = 0.0;
        let mut dual_obj = 0.0;
        for (row, &yi) in lp.rows.iter().zip(&y) {
            let sign_violation = match row.relation {
                Relation::Le => yi.max(0.0),
                Relation::Ge => (-yi).max(0.0),
                Relation::Eq => 0.0,
            };
            dual_residual = dual_residual.max(sign_violation);
            let slack = row.rhs - dot(&row.coeffs, &self.x);
            comp = comp.max((yi * slack).abs());
            dual_obj += yi * row.rhs;
        }
        for j in 0..n {
            let (lo, hi) = lp.bounds[j];
            let r = reduced[j];
            if r > 0.0 {
                if lo.is_finite() {
                    dual_obj += r * lo;
                    comp = comp.max((r * (self.x[j] - lo)).abs());
                } else {
                    dual_residual = dual_residual.max(r);
                }
            } else if r < 0.0 {
                if hi.is_finite() {
                    dual_obj += r * hi;
                    comp = comp.max((r * (hi - self.x[j])).abs());
                } else {
                    dual_residual = dual_residual.max(-r);
                }
            }
        }
        Certificate {
            primal_residual: lp.primal_residual(&self.x),
            dual_residual,
            complementary_slackness: comp,
            primal_objective: self.objective_value,
            dual_objective: dual_obj * flip,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// How an original variable maps onto nonnegative internal columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lo + col`
    Shift { col: usize, lo: f64 },
    /// `x = hi - col`
    Mirror { col: usize, hi: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    lp.check()?;
    let n = lp.num_vars();
    let m = lp.rows.len();
    let flip = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };

    // Column layout: structural columns, then one slack per inequality row,
    // then artificials.
    let mut maps = Vec::with_capacity(n);
    let mut ub: Vec<f64> = Vec::new();
    let mut cost: Vec<f64> = Vec::new();
    for j in 0..n {
        let (lo, hi) = lp.bounds[j];
        let c = lp.objective[j] * flip;
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ub.len(), lo });
            ub.push(hi - lo);
            cost.push(c);
        } else if hi.is_finite() {
            maps.push(VarMap::Mirror { col: ub.len(), hi });
            ub.push(f64::INFINITY);
            cost.push(-c);
        } else {
            let pos = ub.len();
            maps.push(VarMap::Split { pos, neg: pos + 1 });
            ub.extend([f64::INFINITY, f64::INFINITY]);
            cost.extend([c, -c]);
        }
    }
    let n_struct = ub.len();

    // Row data in internal columns, with constant offsets moved to the rhs.
    // Empty rows are checked and dropped here.
    let mut kept: Vec<usize> = Vec::with_capacity(m);
    let mut dense_rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        let mut coeffs = vec![0.0; n_struct];
        let mut rhs = row.rhs;
        let mut empty = true;
        for (j, &a) in row.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            empty = false;
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    coeffs[col] += a;
                    rhs -= a * lo;
                }
                VarMap::Mirror { col, hi } => {
                    coeffs[col] -= a;
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        if empty {
            let ok = match row.relation {
                Relation::Le => rhs >= -TOL,
                Relation::Ge => rhs <= TOL,
                Relation::Eq => rhs.abs() <= TOL,
            };
            if !ok {
                return Ok(infeasible(n, m));
            }
            continue;
        }
        kept.push(i);
        dense_rows.push((coeffs, row.relation, rhs));
    }
    let mk = kept.len();

    let n_slack = dense_rows
        .iter()
        .filter(|(_, rel, _)| *rel != Relation::Eq)
        .count();
    let mut row_sign = vec![1.0; mk];
    let mut identity_col = vec![usize::MAX; mk];
    let mut needs_artificial = vec![false; mk];
    let mut slack_of_row = vec![usize::MAX; mk];
    {
        let mut next_slack = n_struct;
        for (k, (_, rel, rhs)) in dense_rows.iter().enumerate() {
            let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
            row_sign[k] = sign;
            if *rel != Relation::Eq {
                slack_of_row[k] = next_slack;
                let slack_coeff = if *rel == Relation::Le { 1.0 } else { -1.0 } * sign;
                if slack_coeff > 0.0 {
                    identity_col[k] = next_slack;
                } else {
                    needs_artificial[k] = true;
                }
                next_slack += 1;
            } else {
                needs_artificial[k] = true;
            }
        }
    }
    let n_art = needs_artificial.iter().filter(|&&b| b).count();
    let art_start = n_struct + n_slack;
    let ncols = art_start + n_art;
    ub.resize(art_start, f64::INFINITY);
    ub.resize(ncols, f64::INFINITY);
    cost.resize(ncols, 0.0);

    let mut tab = Tableau::new(mk, ncols);
    let mut beta = vec![0.0; mk];
    {
        let mut next_art = art_start;
        for (k, (coeffs, rel, rhs)) in dense_rows.iter().enumerate() {
            let sign = row_sign[k];
            let r = tab.row_mut(k);
            for (dst, &a) in r.iter_mut().zip(coeffs) {
                *dst = a * sign;
            }
            if *rel != Relation::Eq {
                r[slack_of_row[k]] = if *rel == Relation::Le { 1.0 } else { -1.0 } * sign;
            }
            if needs_artificial[k] {
                r[next_art] = 1.0;
                identity_col[k] = next_art;
                next_art += 1;
            }
            beta[k] = rhs * sign;
        }
    }

    let mut state = SimplexState {
        tab,
        beta,
        basis: identity_col.clone(),
        at_upper: vec![false; ncols],
        ub,
        blocked: vec![false; ncols],
        pivots: 0,
        opts: *opts,
    };

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut c1 = vec![0.0; ncols];
        for c in c1.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        let outcome = state.run(&c1)?;
        debug_assert!(outcome != Outcome::Unbounded);
        let infeas: f64 = state
            .basis
            .iter()
            .zip(&state.beta)
            .filter(|(&b, _)| b >= art_start)
            .map(|(_, v)| *v)
            .sum();
        let scale = 1.0 + dense_rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeas > TOL * scale {
            return Ok(infeasible(n, m));
        }
        for j in art_start..ncols {
            state.ub[j] = 0.0;
            state.blocked[j] = true;
        }
    }

    // Phase 2.
    if state.run(&cost)? == Outcome::Unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: vec![0.0; n],
            objective_value: if lp.sense == Sense::Maximize {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            duals: vec![0.0; m],
            pivots: state.pivots,
        });
    }

    let col_values = state.column_values();
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, lo } => lo + col_values[col],
            VarMap::Mirror { col, hi } => hi - col_values[col],
            VarMap::Split { pos, neg } => col_values[pos] - col_values[neg],
        })
        .collect();

    // y'_k = c_B B^{-1} e_k, read off the identity column of row k.
    let reduced = state.reduced_costs(&cost);
    let mut duals = vec![0.0; m];
    for (k, &orig) in kept.iter().enumerate() {
        let col = identity_col[k];
        let yk = cost[col] - reduced[col];
        duals[orig] = yk * row_sign[k] * flip;
    }

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.evaluate(&x),
        x,
        duals,
        pivots: state.pivots,
    })
}

fn infeasible(n: usize, m: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        x: vec![0.0; n],
        objective_value: f64::NAN,
        duals: vec![0.0; m],
        pivots: 0,
    }
}

struct Tableau {
    ncols: usize,
    data: Vec<f64>,
}

impl Tableau {
    fn new(rows: usize, ncols: usize) -> Self {
        Self {
            ncols,
            data: vec![0.0; rows * ncols],
        }
    }

    fn rows(&self) -> usize {
        self.data.len() / self.ncols.max(1)
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    /// Gaussian pivot on `(r, j)`, also applied to `extra` (the reduced-cost
    /// row). Only the nonzero pattern of the pivot row is touched.
    fn pivot(&mut self, r: usize, j: usize, extra: &mut [f64]) {
        let ncols = self.ncols;
        let piv = self.at(r, j);
        {
            let row = self.row_mut(r);
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[j] = 1.0;
        }
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        let pattern: Vec<usize> = (0..ncols).filter(|&k| pivot_row[k] != 0.0).collect();
        for i in 0..self.rows() {
            if i == r {
                continue;
            }
            let f = self.at(i, j);
            if f == 0.0 {
                continue;
            }
            let row = self.row_mut(i);
            for &k in &pattern {
                row[k] -= f * pivot_row[k];
            }
            row[j] = 0.0;
        }
        let f = extra[j];
        if f != 0.0 {
            for &k in &pattern {
                extra[k] -= f * pivot_row[k];
            }
            extra[j] = 0.0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

struct SimplexState {
    tab: Tableau,
    /// Current values of the basic variables.
    beta: Vec<f64>,
    basis: Vec<usize>,
    at_upper: Vec<bool>,
    ub: Vec<f64>,
    /// Columns that may never enter (artificials in phase 2).
    blocked: Vec<bool>,
    pivots: usize,
    opts: SimplexOptions,
}

impl SimplexState {
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb == 0.0 {
                continue;
            }
            for (dj, &t) in d.iter_mut().zip(self.tab.row(i)) {
                *dj -= cb * t;
            }
        }
        d
    }

    fn column_values(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self
            .at_upper
            .iter()
            .zip(&self.ub)
            .map(|(&up, &u)| if up { u } else { 0.0 })
            .collect();
        for (&b, &v) in self.basis.iter().zip(&self.beta) {
            vals[b] = v;
        }
        vals
    }

    fn run(&mut self, cost: &[f64]) -> Result<Outcome, LpError> {
        let ncols = cost.len();
        let m = self.basis.len();
        let mut d = self.reduced_costs(cost);
        let mut is_basic = vec![false; ncols];
        for &b in &self.basis {
            is_basic[b] = true;
        }
        let mut degenerate_run = 0usize;

        loop {
            let bland = degenerate_run >= self.opts.stall_threshold;

            // Pricing: Dantzig's rule, lowest index on ties; Bland's rule
            // (first eligible index) after a stall.
            let mut entering = None;
            let mut best = TOL;
            for j in 0..ncols {
                if is_basic[j] || self.blocked[j] || self.ub[j] <= 0.0 {
                    continue;
                }
                let score = if self.at_upper[j] { d[j] } else { -d[j] };
                if score > best {
                    entering = Some(j);
                    best = score;
                    if bland {
                        break;
                    }
                }
            }
            let Some(j) = entering else {
                return Ok(Outcome::Optimal);
            };
            if self.pivots >= self.opts.max_pivots {
                return Err(LpError::NumericalFailure {
                    pivots: self.pivots,
                });
            }
            let dir = if self.at_upper[j] { -1.0 } else { 1.0 };

            // Ratio test. Basic i moves by -dir * alpha_i per unit step.
            // (row, leaves at upper, limit, |alpha|)
            let mut blocking: Option<(usize, bool, f64, f64)> = None;
            for i in 0..m {
                let alpha = self.tab.at(i, j);
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let delta = -dir * alpha;
                let b = self.basis[i];
                let (limit, to_upper) = if delta < 0.0 {
                    (self.beta[i].max(0.0) / -delta, false)
                } else if self.ub[b].is_finite() {
                    ((self.ub[b] - self.beta[i]).max(0.0) / delta, true)
                } else {
                    continue;
                };
                let replace = match blocking {
                    None => true,
                    Some((bi, _, bl, ba)) => {
                        if limit < bl - PIVOT_TOL {
                            true
                        } else if limit <= bl + PIVOT_TOL {
                            if bland {
                                b < self.basis[bi]
                            } else {
                                alpha.abs() > ba
                            }
                        } else {
                            false
                        }
                    }
                };
                if replace {
                    blocking = Some((i, to_upper, limit, alpha.abs()));
                }
            }

            let flip_limit = self.ub[j];
            let (step, leave) = match blocking {
                Some((r, to_upper, limit, _)) if limit < flip_limit => {
                    (limit, Some((r, to_upper)))
                }
                _ if flip_limit.is_finite() => (flip_limit, None),
                _ => return Ok(Outcome::Unbounded),
            };
            self.pivots += 1;
            if step <= PIVOT_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            for i in 0..m {
                let alpha = self.tab.at(i, j);
                if alpha != 0.0 {
                    self.beta[i] -= dir * alpha * step;
                }
            }

            match leave {
                None => {
                    // Bound flip.
                    self.at_upper[j] = !self.at_upper[j];
                }
                Some((r, to_upper)) => {
                    let entering_value =
                        if self.at_upper[j] { self.ub[j] } else { 0.0 } + dir * step;
                    let old = self.basis[r];
                    is_basic[old] = false;
                    self.at_upper[old] = to_upper;
                    is_basic[j] = true;
                    self.at_upper[j] = false;
                    self.basis[r] = j;
                    self.beta[r] = entering_value;
                    self.tab.pivot(r, j, &mut d);
                }
            }
        }
    }
}
