//! Bounded-variable dual simplex.
//!
//! Every row `i` gets a slack `s_i` so the working system is `A x + s = b`
//! with `s_i ∈ [0, ∞)` for `<=` rows, `(-∞, 0]` for `>=` rows and `[0, 0]`
//! for equalities. The slack basis is the starting point; because the
//! models built in this workspace have non-negative costs it is already dual
//! feasible, so no phase one is needed. Variables whose cost sign cannot be
//! matched with a finite bound receive an artificial box of width
//! [`ARTIFICIAL_BOUND`]; an optimum pinned against such a box is reported as
//! unbounded.
//!
//! The basis inverse is kept as a dense matrix and updated with rank-one
//! eliminations. Refactorization only inverts the block of the basis formed
//! by structural columns, the slack block being an identity. Leaving rows are
//! priced with exact dual steepest-edge weights (the row norms of the inverse
//! are available for free), entering columns with a bound-flipping ratio
//! test followed by a Harris pass. After `bland_after` consecutive
//! degenerate pivots the solver switches to Bland's smallest-index rule
//! until progress resumes.
//!
//! Dual degeneracy is heavy in scalarized models (most columns have zero
//! cost), so the costs of boxed columns are shifted by small random amounts
//! before the dual phase. Once it finishes the true costs are restored and a
//! few primal pivots remove any remaining dual infeasibility.
//!
//! Bounds of structural columns may be changed between solves
//! ([`DualSimplex::set_bounds`]); the current basis is kept, which makes
//! re-solves after branching cheap.

use crate::error::{MilpError, Result};
use crate::model::{Model, Sense};

pub const ARTIFICIAL_BOUND: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct LpOptions {
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub pivot_tol: f64,
    pub max_iterations: usize,
    pub refactor_interval: usize,
    pub bland_after: usize,
    /// Relative size of the cost perturbation applied to boxed columns
    /// while the dual simplex runs (0 disables it).
    pub perturbation: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            pivot_tol: 1e-7,
            max_iterations: 200_000,
            refactor_interval: 200,
            bland_after: 1000,
            perturbation: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The dual objective exceeded the caller's cutoff.
    Cutoff,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural values (meaningful for `Optimal`).
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct DualSimplex {
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    cost: Vec<f64>,
    true_cost: Vec<f64>,
    shift: Vec<f64>,
    perturbed: bool,
    offset: f64,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    artificial: Vec<bool>,
    state: Vec<State>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    binv: Vec<f64>,
    weights: Vec<f64>,
    xb: Vec<f64>,
    d: Vec<f64>,
    since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
    opts: LpOptions,
    // scratch
    alpha_row: Vec<f64>,
    alpha_col: Vec<f64>,
}

impl DualSimplex {
    pub fn new(model: &Model, opts: LpOptions) -> Result<Self> {
        model.validate()?;
        let n = model.num_vars();
        let m = model.num_constraints();

        let mut counts = vec![0usize; n];
        for row in &model.constraints {
            for &(j, a) in &row.terms {
                if a != 0.0 {
                    counts[j] += 1;
                }
            }
        }
        let mut col_start = vec![0usize; n + 1];
        for j in 0..n {
            col_start[j + 1] = col_start[j] + counts[j];
        }
        let nnz = col_start[n];
        let mut col_row = vec![0usize; nnz];
        let mut col_val = vec![0f64; nnz];
        let mut fill = col_start.clone();
        for (i, row) in model.constraints.iter().enumerate() {
            // duplicate terms are summed
            let mut seen: Vec<(usize, f64)> = Vec::with_capacity(row.terms.len());
            for &(j, a) in &row.terms {
                if let Some(e) = seen.iter_mut().find(|e| e.0 == j) {
                    e.1 += a;
                } else {
                    seen.push((j, a));
                }
            }
            for (j, a) in seen {
                if a != 0.0 {
                    col_row[fill[j]] = i;
                    col_val[fill[j]] = a;
                    fill[j] += 1;
                }
            }
        }
        // merged duplicates leave gaps; compact them
        let mut compact_row = Vec::with_capacity(nnz);
        let mut compact_val = Vec::with_capacity(nnz);
        let mut compact_start = vec![0usize; n + 1];
        for j in 0..n {
            for k in col_start[j]..fill[j] {
                compact_row.push(col_row[k]);
                compact_val.push(col_val[k]);
            }
            compact_start[j + 1] = compact_row.len();
        }

        let mut cost = model.objective.clone();
        cost.resize(n + m, 0.0);
        let mut lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
        for row in &model.constraints {
            let (l, u) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(l);
            upper.push(u);
        }

        let mut lp = DualSimplex {
            m,
            n,
            col_start: compact_start,
            col_row: compact_row,
            col_val: compact_val,
            true_cost: cost[..n].to_vec(),
            shift: vec![0.0; n],
            perturbed: false,
            cost,
            offset: model.objective_offset,
            rhs: model.constraints.iter().map(|c| c.rhs).collect(),
            lower,
            upper,
            artificial: vec![false; n + m],
            state: vec![State::AtLower; n + m],
            basis: Vec::new(),
            pos: vec![NONE; n + m],
            binv: Vec::new(),
            weights: Vec::new(),
            xb: vec![0.0; m],
            d: Vec::new(),
            since_refactor: 0,
            degenerate_run: 0,
            bland: false,
            opts,
            alpha_row: vec![0.0; n + m],
            alpha_col: vec![0.0; m],
        };
        lp.reset_to_slack_basis();
        Ok(lp)
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    /// Discards the current basis in favour of the all-slack basis.
    pub fn reset_to_slack_basis(&mut self) {
        let (m, n) = (self.m, self.n);
        self.basis = (n..n + m).collect();
        self.pos = vec![NONE; n + m];
        for i in 0..m {
            self.pos[n + i] = i;
            self.state[n + i] = State::Basic;
        }
        for j in 0..n {
            self.state[j] = State::AtLower;
        }
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = 1.0;
        }
        self.weights = vec![1.0; m];
        self.cost[..n].copy_from_slice(&self.true_cost);
        self.shift.iter_mut().for_each(|v| *v = 0.0);
        self.perturbed = false;
        self.d = self.cost.clone();
        self.since_refactor = 0;
        self.degenerate_run = 0;
        self.bland = false;
        for j in 0..n {
            self.place_nonbasic(j);
        }
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Replaces the bounds of structural column `j`.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        assert!(j < self.n);
        self.lower[j] = lower;
        self.upper[j] = upper;
        self.artificial[j] = false;
    }

    fn value_of(&self, j: usize) -> f64 {
        match self.state[j] {
            State::Basic => self.xb[self.pos[j]],
            State::AtLower => self.lower[j],
            State::AtUpper => self.upper[j],
            State::Free => 0.0,
        }
    }

    /// Chooses a nonbasic state for `j` that is dual feasible given `d[j]`,
    /// adding an artificial bound when no finite bound fits.
    fn place_nonbasic(&mut self, j: usize) {
        let tol = self.opts.dual_tol;
        let dj = self.d[j];
        let (l, u) = (self.lower[j], self.upper[j]);
        let lf = l.is_finite();
        let uf = u.is_finite();
        self.state[j] = if lf && uf {
            if l == u || dj >= 0.0 {
                State::AtLower
            } else {
                State::AtUpper
            }
        } else if lf {
            if dj < -tol {
                self.upper[j] = l + ARTIFICIAL_BOUND;
                self.artificial[j] = true;
                State::AtUpper
            } else {
                State::AtLower
            }
        } else if uf {
            if dj > tol {
                self.lower[j] = u - ARTIFICIAL_BOUND;
                self.artificial[j] = true;
                State::AtLower
            } else {
                State::AtUpper
            }
        } else if dj > tol {
            self.lower[j] = -ARTIFICIAL_BOUND;
            self.artificial[j] = true;
            State::AtLower
        } else if dj < -tol {
            self.upper[j] = ARTIFICIAL_BOUND;
            self.artificial[j] = true;
            State::AtUpper
        } else {
            State::Free
        };
    }

    fn restore_dual_feasibility(&mut self) {
        let tol = self.opts.dual_tol;
        for j in 0..self.n + self.m {
            let ok = match self.state[j] {
                State::Basic => true,
                State::AtLower => {
                    self.lower[j].is_finite()
                        && (self.d[j] >= -tol || self.lower[j] == self.upper[j])
                }
                State::AtUpper => {
                    self.upper[j].is_finite()
                        && (self.d[j] <= tol || self.lower[j] == self.upper[j])
                }
                State::Free => {
                    self.d[j].abs() <= tol || self.lower[j].is_finite() || self.upper[j].is_finite()
                }
            };
            if !ok
                || (self.state[j] == State::Free
                    && (self.lower[j].is_finite() || self.upper[j].is_finite()))
            {
                self.place_nonbasic(j);
            }
        }
    }

    fn column(&self, j: usize) -> ColumnIter<'_> {
        if j < self.n {
            let r = self.col_start[j]..self.col_start[j + 1];
            ColumnIter::Sparse(self.col_row[r.clone()].iter().zip(&self.col_val[r]))
        } else {
            ColumnIter::Unit(Some(j - self.n))
        }
    }

    /// Rebuilds the basis inverse from scratch.
    fn refactor(&mut self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        let mut row_is_slack = vec![NONE; m];
        let mut structural: Vec<(usize, usize)> = Vec::new(); // (position, column)
        for (p, &col) in self.basis.iter().enumerate() {
            if col >= n {
                row_is_slack[col - n] = p;
            } else {
                structural.push((p, col));
            }
        }
        let other_rows: Vec<usize> = (0..m).filter(|&i| row_is_slack[i] == NONE).collect();
        let k = structural.len();
        if other_rows.len() != k {
            return Err(MilpError::Numerical("basis has inconsistent shape".into()));
        }
        let mut row_index = vec![NONE; m];
        for (idx, &i) in other_rows.iter().enumerate() {
            row_index[i] = idx;
        }
        // M = A[other_rows, structural]
        let mut mat = vec![0.0; k * k];
        for (l, &(_, col)) in structural.iter().enumerate() {
            for (i, a) in self.column(col) {
                let ri = row_index[i];
                if ri != NONE {
                    mat[ri * k + l] = a;
                }
            }
        }
        let minv = invert_dense(&mut mat, k)
            .ok_or_else(|| MilpError::Numerical("singular basis".into()))?;

        let binv = &mut self.binv;
        binv.iter_mut().for_each(|v| *v = 0.0);
        for (l, &(p, _)) in structural.iter().enumerate() {
            let dst = &mut binv[p * m..(p + 1) * m];
            for (idx, &i) in other_rows.iter().enumerate() {
                dst[i] = minv[l * k + idx];
            }
        }
        for i in 0..m {
            let p = row_is_slack[i];
            if p != NONE {
                binv[p * m + i] = 1.0;
            }
        }
        for (l, &(_, col)) in structural.iter().enumerate() {
            let r = self.col_start[col]..self.col_start[col + 1];
            for (&i, &a) in self.col_row[r.clone()].iter().zip(&self.col_val[r]) {
                let p = row_is_slack[i];
                if p == NONE {
                    continue;
                }
                let row = &mut binv[p * m..(p + 1) * m];
                let src = &minv[l * k..(l + 1) * k];
                for (idx, &oi) in other_rows.iter().enumerate() {
                    row[oi] -= a * src[idx];
                }
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            self.weights[p] = row.iter().map(|v| v * v).sum::<f64>().max(1e-12);
        }
        self.since_refactor = 0;
        self.compute_duals();
        Ok(())
    }

    fn compute_duals(&mut self) {
        let (m, n) = (self.m, self.n);
        let mut y = vec![0.0; m];
        for p in 0..m {
            let cb = self.cost[self.basis[p]];
            if cb != 0.0 {
                let row = &self.binv[p * m..(p + 1) * m];
                for (yi, b) in y.iter_mut().zip(row) {
                    *yi += cb * b;
                }
            }
        }
        for j in 0..n + m {
            if self.state[j] == State::Basic {
                self.d[j] = 0.0;
                continue;
            }
            let mut dj = self.cost[j];
            for (i, a) in self.column(j) {
                dj -= y[i] * a;
            }
            self.d[j] = dj;
        }
    }

    fn compute_primal(&mut self) {
        let (m, n) = (self.m, self.n);
        let mut r = self.rhs.clone();
        for j in 0..n + m {
            if self.state[j] == State::Basic {
                continue;
            }
            let v = self.value_of(j);
            if v != 0.0 {
                for (i, a) in self.column(j) {
                    r[i] -= a * v;
                }
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            self.xb[p] = row.iter().zip(&r).map(|(b, v)| b * v).sum();
        }
    }

    pub fn objective(&self) -> f64 {
        let mut obj = self.offset;
        for j in 0..self.n + self.m {
            let c = self.cost[j];
            if c != 0.0 {
                obj += c * self.value_of(j);
            }
        }
        obj
    }

    /// Structural column values of the current basic solution.
    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.value_of(j)).collect()
    }

    fn infeasibility(&self, p: usize) -> f64 {
        let j = self.basis[p];
        let v = self.xb[p];
        let tol = self.opts.primal_tol;
        let (l, u) = (self.lower[j], self.upper[j]);
        if v < l - tol * (1.0 + l.abs()) {
            l - v
        } else if v > u + tol * (1.0 + u.abs()) {
            v - u
        } else {
            0.0
        }
    }

    fn choose_leaving(&self) -> Option<usize> {
        let mut best = None;
        let mut best_score = 0.0;
        let mut best_col = NONE;
        for p in 0..self.m {
            let inf = self.infeasibility(p);
            if inf <= 0.0 {
                continue;
            }
            if self.bland {
                let col = self.basis[p];
                if col < best_col {
                    best_col = col;
                    best = Some(p);
                }
            } else {
                let score = inf * inf / self.weights[p];
                if score > best_score {
                    best_score = score;
                    best = Some(p);
                }
            }
        }
        best
    }

    /// Solves from the current basis. `cutoff` stops early once the
    /// (monotonically increasing) dual objective proves the optimum exceeds it.
    pub fn solve(&mut self, cutoff: Option<f64>) -> Result<LpSolution> {
        self.restore_dual_feasibility();
        self.compute_primal();
        match self.run(cutoff) {
            Err(MilpError::Numerical(_)) => {
                log::debug!("dual simplex: numerical trouble, restarting from slack basis");
                self.reset_to_slack_basis();
                self.restore_dual_feasibility();
                self.compute_primal();
                self.run(cutoff)
            }
            other => other,
        }
    }

    /// Perturbs the costs of nonbasic boxed structurals away from zero
    /// reduced cost, which keeps dual degeneracy from stalling the dual
    /// simplex. Returns the largest amount by which the perturbed optimum
    /// can exceed the true one.
    fn perturb(&mut self) -> f64 {
        if !self.perturbed {
            for j in 0..self.n {
                let (l, u) = (self.lower[j], self.upper[j]);
                self.shift[j] = 0.0;
                if !(l.is_finite() && u.is_finite()) || l == u || self.artificial[j] {
                    continue;
                }
                let size = self.opts.perturbation
                    * (1.0 + self.true_cost[j].abs())
                    * (0.5 + 0.5 * jitter(j));
                let delta = match self.state[j] {
                    State::AtLower => size,
                    State::AtUpper => -size,
                    _ => 0.0,
                };
                self.shift[j] = delta;
                self.cost[j] += delta;
                self.d[j] += delta;
            }
            self.perturbed = true;
        }
        (0..self.n)
            .filter(|&j| self.shift[j] != 0.0)
            .map(|j| (self.shift[j] * self.lower[j]).max(self.shift[j] * self.upper[j]))
            .sum::<f64>()
            .max(0.0)
    }

    fn unperturb(&mut self) {
        if self.perturbed {
            self.cost[..self.n].copy_from_slice(&self.true_cost);
            self.shift.iter_mut().for_each(|v| *v = 0.0);
            self.perturbed = false;
            self.compute_duals();
        }
    }

    fn run(&mut self, cutoff: Option<f64>) -> Result<LpSolution> {
        let m = self.m;
        let mut iterations = 0usize;
        let mut checked_clean = false;
        let mut flips = Vec::new();
        let slack = if self.opts.perturbation > 0.0 {
            self.perturb()
        } else {
            0.0
        };
        loop {
            if iterations >= self.opts.max_iterations {
                self.unperturb();
                return Ok(self.finish(LpStatus::IterationLimit, iterations));
            }
            if let Some(c) = cutoff {
                let obj = self.objective() - slack;
                if obj > c + 1e-12 * (1.0 + c.abs()) {
                    return Ok(self.finish(LpStatus::Cutoff, iterations));
                }
            }
            let Some(r) = self.choose_leaving() else {
                if !checked_clean && self.since_refactor > 0 {
                    // confirm against freshly recomputed primal values
                    self.compute_primal();
                    checked_clean = true;
                    continue;
                }
                if self.perturbed {
                    self.unperturb();
                    match self.primal_cleanup(&mut iterations) {
                        Ok(true) => {}
                        Ok(false) => return Ok(self.finish(LpStatus::IterationLimit, iterations)),
                        Err(MilpError::Unbounded) => {
                            return Ok(self.finish(LpStatus::Unbounded, iterations))
                        }
                        Err(e) => return Err(e),
                    }
                    if self.choose_leaving().is_some() {
                        // cleanup drifted out of primal feasibility; resume
                        checked_clean = false;
                        continue;
                    }
                }
                let status = if (0..self.n + m)
                    .any(|j| self.artificial[j] && self.state[j] != State::Basic)
                {
                    LpStatus::Unbounded
                } else {
                    LpStatus::Optimal
                };
                return Ok(self.finish(status, iterations));
            };
            checked_clean = false;
            iterations += 1;

            let leaving = self.basis[r];
            let below = self.xb[r] < self.lower[leaving];
            let target = if below {
                self.lower[leaving]
            } else {
                self.upper[leaving]
            };
            let dir = if below { 1.0 } else { -1.0 };

            self.compute_row(r);
            let excess = (self.xb[r] - target).abs();
            let Some(q) = self.ratio_test(dir, excess, &mut flips) else {
                return Ok(self.finish(LpStatus::Infeasible, iterations));
            };
            if !flips.is_empty() {
                self.apply_flips(&flips);
            }
            self.compute_column(q);
            let piv = self.alpha_col[r];
            let piv_row = self.alpha_row[q];
            if (piv - piv_row).abs() > 1e-7 * (1.0 + piv.abs()) || piv.abs() < self.opts.pivot_tol {
                if self.since_refactor == 0 {
                    return Err(MilpError::Numerical(format!(
                        "unstable pivot {piv} vs {piv_row}"
                    )));
                }
                self.refactor()?;
                self.compute_primal();
                continue;
            }

            let theta_d = self.d[q] / piv_row;
            if theta_d.abs() <= self.opts.dual_tol {
                self.degenerate_run += 1;
                if self.degenerate_run >= self.opts.bland_after {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }
            let delta = (self.xb[r] - target) / piv;
            self.pivot(r, q, theta_d, delta, target)?;
        }
    }

    /// Row `r` of `B⁻¹ [A I]` over nonbasic columns, into `alpha_row`.
    fn compute_row(&mut self, r: usize) {
        let (m, n) = (self.m, self.n);
        let rho = &self.binv[r * m..(r + 1) * m];
        for j in 0..n {
            if self.state[j] == State::Basic {
                continue;
            }
            let s = self.col_start[j]..self.col_start[j + 1];
            let mut a = 0.0;
            for (&i, &v) in self.col_row[s.clone()].iter().zip(&self.col_val[s]) {
                a += rho[i] * v;
            }
            self.alpha_row[j] = a;
        }
        self.alpha_row[n..n + m].copy_from_slice(rho);
    }

    /// `B⁻¹ a_q` into `alpha_col`.
    fn compute_column(&mut self, q: usize) {
        let m = self.m;
        self.alpha_col.iter_mut().for_each(|v| *v = 0.0);
        for (i, a) in self.column(q).collect::<Vec<_>>() {
            for p in 0..m {
                let b = self.binv[p * m + i];
                if b != 0.0 {
                    self.alpha_col[p] += b * a;
                }
            }
        }
    }

    /// Exchanges basic position `r` for column `q`: duals move by
    /// `theta_d` along `alpha_row`, the entering column by `delta`, and the
    /// leaving column ends at `target`.
    fn pivot(&mut self, r: usize, q: usize, theta_d: f64, delta: f64, target: f64) -> Result<()> {
        let (m, n) = (self.m, self.n);
        let leaving = self.basis[r];
        if theta_d != 0.0 {
            for j in 0..n + m {
                if self.state[j] != State::Basic {
                    self.d[j] -= theta_d * self.alpha_row[j];
                }
            }
        }
        self.d[q] = 0.0;
        self.d[leaving] = -theta_d;

        let entering_value = self.value_of(q) + delta;
        for p in 0..m {
            let a = self.alpha_col[p];
            if a != 0.0 {
                self.xb[p] -= delta * a;
            }
        }
        self.xb[r] = entering_value;

        self.state[leaving] = if target == self.lower[leaving] {
            State::AtLower
        } else {
            State::AtUpper
        };
        self.pos[leaving] = NONE;
        self.basis[r] = q;
        self.pos[q] = r;
        self.state[q] = State::Basic;

        self.update_inverse(r);
        self.since_refactor += 1;
        if self.since_refactor >= self.opts.refactor_interval {
            self.refactor()?;
            self.compute_primal();
        }
        Ok(())
    }

    /// Primal simplex from a primal feasible basis until no reduced cost
    /// has the wrong sign. Returns false on the iteration limit.
    fn primal_cleanup(&mut self, iterations: &mut usize) -> Result<bool> {
        let (m, n) = (self.m, self.n);
        let dtol = self.opts.dual_tol;
        let ptol = self.opts.primal_tol;
        loop {
            let mut q = NONE;
            let mut worst = dtol;
            for j in 0..n + m {
                let dj = self.d[j];
                let boxed_fixed = self.lower[j] == self.upper[j];
                let viol = match self.state[j] {
                    State::Basic => 0.0,
                    _ if boxed_fixed => 0.0,
                    State::AtLower => -dj,
                    State::AtUpper => dj,
                    State::Free => dj.abs(),
                };
                if viol > worst {
                    worst = viol;
                    q = j;
                }
            }
            if q == NONE {
                return Ok(true);
            }
            if *iterations >= self.opts.max_iterations {
                return Ok(false);
            }
            *iterations += 1;
            let dir = if self.d[q] < 0.0 { 1.0 } else { -1.0 };
            self.compute_column(q);
            let span = self.upper[q] - self.lower[q];
            let limit = |p: usize, a: f64, slack: f64| -> f64 {
                let j = self.basis[p];
                if a > 0.0 {
                    (self.xb[p] - self.lower[j] + slack) / a
                } else {
                    (self.upper[j] - self.xb[p] + slack) / -a
                }
            };
            let mut bound = f64::INFINITY;
            for p in 0..m {
                let a = self.alpha_col[p] * dir;
                if a.abs() >= self.opts.pivot_tol {
                    bound = bound.min(limit(p, a, ptol));
                }
            }
            let mut leave = NONE;
            let mut best_a = 0.0;
            let mut step = f64::INFINITY;
            for p in 0..m {
                let a = self.alpha_col[p] * dir;
                if a.abs() < self.opts.pivot_tol {
                    continue;
                }
                let ratio = limit(p, a, 0.0);
                if ratio <= bound && a.abs() > best_a {
                    best_a = a.abs();
                    leave = p;
                    step = ratio.max(0.0);
                }
            }
            if leave == NONE || span <= step {
                if !span.is_finite() {
                    return Err(MilpError::Unbounded);
                }
                // the entering column reaches its other bound first
                let delta = dir * span;
                for p in 0..m {
                    self.xb[p] -= delta * self.alpha_col[p];
                }
                self.state[q] = if dir > 0.0 {
                    State::AtUpper
                } else {
                    State::AtLower
                };
                continue;
            }
            let a = self.alpha_col[leave] * dir;
            let lj = self.basis[leave];
            let target = if a > 0.0 {
                self.lower[lj]
            } else {
                self.upper[lj]
            };
            self.compute_row(leave);
            let theta_d = self.d[q] / self.alpha_row[q];
            self.pivot(leave, q, theta_d, dir * step, target)?;
        }
    }

    /// Dual ratio test with bound flipping. Boxed candidates whose
    /// breakpoint can be passed while the leaving row stays infeasible are
    /// returned in `flips`; among the remaining candidates the entering
    /// column is picked by a Harris pass. `excess` is the leaving row's
    /// primal infeasibility.
    fn ratio_test(&self, dir: f64, excess: f64, flips: &mut Vec<usize>) -> Option<usize> {
        flips.clear();
        let tol = self.opts.pivot_tol;
        let dtol = self.opts.dual_tol;
        let eligible = |j: usize| -> Option<(f64, f64)> {
            let a = self.alpha_row[j];
            if a.abs() < tol {
                return None;
            }
            // reduced costs left slightly infeasible by earlier Harris steps
            // count as zero
            let dj = match self.state[j] {
                State::Basic => return None,
                State::AtLower if self.lower[j] != self.upper[j] && dir * a < 0.0 => {
                    self.d[j].max(0.0)
                }
                State::AtUpper if self.lower[j] != self.upper[j] && dir * a > 0.0 => {
                    (-self.d[j]).max(0.0)
                }
                State::Free => 0.0,
                _ => return None,
            };
            Some((dj, a.abs()))
        };
        let total = self.n + self.m;
        if self.bland {
            let mut best = None;
            let mut best_ratio = f64::INFINITY;
            for j in 0..total {
                if let Some((dj, a)) = eligible(j) {
                    let ratio = dj / a;
                    if ratio < best_ratio - 1e-14 {
                        best_ratio = ratio;
                        best = Some(j);
                    }
                }
            }
            return best;
        }
        let mut cands: Vec<(f64, usize, f64)> = (0..total)
            .filter_map(|j| eligible(j).map(|(dj, a)| (dj / a, j, a)))
            .collect();
        if cands.is_empty() {
            return None;
        }
        cands.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut slope = excess;
        let mut first = 0;
        while first < cands.len() {
            let (_, j, a) = cands[first];
            let boxed = self.state[j] != State::Free
                && !self.artificial[j]
                && self.lower[j].is_finite()
                && self.upper[j].is_finite();
            if !boxed {
                break;
            }
            let drop = a * (self.upper[j] - self.lower[j]);
            if slope - drop <= self.opts.primal_tol {
                break;
            }
            slope -= drop;
            first += 1;
        }
        if first == cands.len() {
            // every breakpoint can be passed: the row can never be repaired
            return None;
        }
        let rest = &cands[first..];
        let bound = rest
            .iter()
            .map(|&(ratio, _, a)| ratio + dtol / a)
            .fold(f64::INFINITY, f64::min);
        let mut best = rest[0].1;
        let mut best_a = rest[0].2;
        for &(ratio, j, a) in rest {
            if ratio > bound {
                break;
            }
            if a > best_a {
                best_a = a;
                best = j;
            }
        }
        flips.extend(cands[..first].iter().map(|c| c.1));
        Some(best)
    }

    /// Moves each column in `flips` to its opposite bound and updates the
    /// basic values accordingly.
    fn apply_flips(&mut self, flips: &[usize]) {
        let m = self.m;
        let mut shift = vec![0.0; m];
        for &j in flips {
            let delta = match self.state[j] {
                State::AtLower => {
                    self.state[j] = State::AtUpper;
                    self.upper[j] - self.lower[j]
                }
                State::AtUpper => {
                    self.state[j] = State::AtLower;
                    self.lower[j] - self.upper[j]
                }
                _ => unreachable!("only nonbasic boxed columns are flipped"),
            };
            for (i, a) in self.column(j) {
                shift[i] += a * delta;
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let v: f64 = row.iter().zip(&shift).map(|(b, s)| b * s).sum();
            self.xb[p] -= v;
        }
    }

    fn update_inverse(&mut self, r: usize) {
        let m = self.m;
        let piv = self.alpha_col[r];
        {
            let row = &mut self.binv[r * m..(r + 1) * m];
            for v in row.iter_mut() {
                *v /= piv;
            }
        }
        let (head, tail) = self.binv.split_at_mut(r * m);
        let (pivot_row, rest) = tail.split_at_mut(m);
        for p in 0..m {
            if p == r {
                continue;
            }
            let a = self.alpha_col[p];
            if a == 0.0 {
                continue;
            }
            let row = if p < r {
                &mut head[p * m..(p + 1) * m]
            } else {
                &mut rest[(p - r - 1) * m..(p - r) * m]
            };
            let mut w = 0.0;
            for (v, &pr) in row.iter_mut().zip(pivot_row.iter()) {
                *v -= a * pr;
                w += *v * *v;
            }
            self.weights[p] = w.max(1e-12);
        }
        self.weights[r] = pivot_row.iter().map(|v| v * v).sum::<f64>().max(1e-12);
    }

    fn finish(&self, status: LpStatus, iterations: usize) -> LpSolution {
        LpSolution {
            status,
            x: self.values(),
            objective: self.objective(),
            iterations,
        }
    }
}

/// Deterministic value in `[0, 1)` per column (splitmix64).
fn jitter(j: usize) -> f64 {
    let mut z = (j as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

enum ColumnIter<'a> {
    Sparse(std::iter::Zip<std::slice::Iter<'a, usize>, std::slice::Iter<'a, f64>>),
    Unit(Option<usize>),
}

impl Iterator for ColumnIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColumnIter::Sparse(it) => it.next().map(|(&i, &a)| (i, a)),
            ColumnIter::Unit(slot) => slot.take().map(|i| (i, 1.0)),
        }
    }
}

/// Gauss-Jordan inversion with partial pivoting. `mat` is destroyed.
fn invert_dense(mat: &mut [f64], k: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    for c in 0..k {
        let mut piv_row = c;
        let mut piv_abs = mat[c * k + c].abs();
        for r in c + 1..k {
            let v = mat[r * k + c].abs();
            if v > piv_abs {
                piv_abs = v;
                piv_row = r;
            }
        }
        if piv_abs < 1e-11 {
            return None;
        }
        if piv_row != c {
            for col in 0..k {
                mat.swap(c * k + col, piv_row * k + col);
                inv.swap(c * k + col, piv_row * k + col);
            }
        }
        let p = mat[c * k + c];
        for col in 0..k {
            mat[c * k + col] /= p;
            inv[c * k + col] /= p;
        }
        let pivot_m: Vec<f64> = mat[c * k..(c + 1) * k].to_vec();
        let pivot_i: Vec<f64> = inv[c * k..(c + 1) * k].to_vec();
        for r in 0..k {
            if r == c {
                continue;
            }
            let f = mat[r * k + c];
            if f == 0.0 {
                continue;
            }
            let (mr, ir) = (&mut mat[r * k..(r + 1) * k], &mut inv[r * k..(r + 1) * k]);
            for col in c..k {
                mr[col] -= f * pivot_m[col];
            }
            for col in 0..k {
                ir[col] -= f * pivot_i[col];
            }
        }
    }
    Some(inv)
}

/// One-shot LP solve of `model` with integrality ignored.
pub fn solve_lp(model: &Model, opts: &LpOptions) -> Result<LpSolution> {
    let mut lp = DualSimplex::new(&model.relaxed(), opts.clone())?;
    let sol = lp.solve(None)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::Infeasible => Err(MilpError::Infeasible),
        LpStatus::Unbounded => Err(MilpError::Unbounded),
        LpStatus::IterationLimit => Err(MilpError::IterationLimit(sol.iterations)),
        LpStatus::Cutoff => unreachable!("no cutoff was requested"),
    }
}
