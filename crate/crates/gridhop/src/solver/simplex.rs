//! Bounded-variable revised primal simplex, written from scratch.
//!
//! Works directly on [`MilpInstance`] data with integrality ignored.
//! Each row gets a slack turning it into an equality; a classic
//! two-phase scheme with signed artificials finds a feasible basis. The
//! basis inverse is kept dense and updated by pivot row operations,
//! with periodic refactorization to shed drift. Pricing is Dantzig's
//! rule with index tie-breaks, falling back to Bland's rule after a run
//! of degenerate pivots, so every solve is deterministic.

use thiserror::Error;

use crate::milp::MilpInstance;

/// Numerical knobs. The defaults suit the day-sized problems here.
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Row residual tolerance for feasibility decisions.
    pub feasibility_tol: f64,
    /// Reduced costs below this are treated as zero.
    pub reduced_cost_tol: f64,
    /// Pivot elements below this are considered unusable.
    pub pivot_tol: f64,
    /// Hard stop on simplex iterations per phase; 0 picks a size-based
    /// limit.
    pub iteration_limit: usize,
    /// Rebuild the basis inverse after this many pivots.
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degeneracy_limit: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: 1e-7,
            reduced_cost_tol: 1e-9,
            pivot_tol: 1e-9,
            iteration_limit: 0,
            refactor_interval: 64,
            degeneracy_limit: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// LP result. `values` covers the structural columns (empty unless
/// optimal) and `objective` includes the instance constant.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
}

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("instance rejected: {0}")]
    BadInstance(String),
    #[error("iteration limit {limit} hit in phase {phase} (objective {objective})")]
    IterationLimit {
        limit: usize,
        phase: u8,
        objective: f64,
    },
    #[error("basis became numerically singular: {0}")]
    Singular(String),
}

/// Solve the LP relaxation of `instance`.
pub fn solve_lp(instance: &MilpInstance) -> Result<LpSolution, SimplexError> {
    solve_lp_with_bounds(instance, &[], &SimplexOptions::default())
}

/// Solve the LP relaxation with some column bounds replaced. Overrides
/// are `(column, lower, upper)` and must reference structural columns.
pub fn solve_lp_with_bounds(
    instance: &MilpInstance,
    overrides: &[(usize, f64, f64)],
    options: &SimplexOptions,
) -> Result<LpSolution, SimplexError> {
    instance.check_shape().map_err(SimplexError::BadInstance)?;
    for &(j, lo, up) in overrides {
        if j >= instance.n_cols() {
            return Err(SimplexError::BadInstance(format!(
                "bound override references column {j} of {}",
                instance.n_cols()
            )));
        }
        if lo.is_nan() || up.is_nan() || lo > up {
            return Err(SimplexError::BadInstance(format!(
                "bound override for column {j} is [{lo}, {up}]"
            )));
        }
    }
    let mut worker = Worker::build(instance, overrides, *options);
    worker.solve(instance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable pinned at zero.
    FreeZero,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

struct Worker {
    m: usize,
    n_struct: usize,
    /// Sparse column entries for every variable, slacks and artificials
    /// included.
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    x: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    /// Dense basis inverse, row-major m*m.
    binv: Vec<f64>,
    opts: SimplexOptions,
    iteration_limit: usize,
    pivots_since_refactor: usize,
    degenerate_streak: usize,
    bland: bool,
    iterations: usize,
    n_artificial: usize,
}

impl Worker {
    fn build(
        instance: &MilpInstance,
        overrides: &[(usize, f64, f64)],
        opts: SimplexOptions,
    ) -> Self {
        let m = instance.n_rows();
        let n_struct = instance.n_cols();

        let mut lower: Vec<f64> = instance.columns.iter().map(|c| c.lower).collect();
        let mut upper: Vec<f64> = instance.columns.iter().map(|c| c.upper).collect();
        for &(j, lo, up) in overrides {
            lower[j] = lo;
            upper[j] = up;
        }

        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_struct];
        let mut rhs = Vec::with_capacity(m);
        for (i, row) in instance.rows.iter().enumerate() {
            rhs.push(row.rhs);
            for &(j, a) in &row.terms {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }

        // One slack per row; its bounds encode the row sense.
        for (i, row) in instance.rows.iter().enumerate() {
            cols.push(vec![(i, 1.0)]);
            match row.rel {
                crate::milp::RelOp::Le => {
                    lower.push(0.0);
                    upper.push(f64::INFINITY);
                }
                crate::milp::RelOp::Eq => {
                    lower.push(0.0);
                    upper.push(0.0);
                }
                crate::milp::RelOp::Ge => {
                    lower.push(f64::NEG_INFINITY);
                    upper.push(0.0);
                }
            }
        }

        let n_with_slack = n_struct + m;
        let mut x = vec![0.0; n_with_slack];
        let mut status = vec![VarStatus::AtLower; n_with_slack];
        for j in 0..n_with_slack {
            if lower[j].is_finite() {
                status[j] = VarStatus::AtLower;
                x[j] = lower[j];
            } else if upper[j].is_finite() {
                status[j] = VarStatus::AtUpper;
                x[j] = upper[j];
            } else {
                status[j] = VarStatus::FreeZero;
                x[j] = 0.0;
            }
        }

        // Row residuals with every variable at its resting value decide
        // whether the slack can start basic or an artificial is needed.
        let mut residual = rhs.clone();
        for j in 0..n_struct {
            if x[j] != 0.0 {
                for &(i, a) in &cols[j] {
                    residual[i] -= a * x[j];
                }
            }
        }

        let mut basis = Vec::with_capacity(m);
        let mut binv = vec![0.0; m * m];
        let mut n_artificial = 0;
        for i in 0..m {
            let slack = n_struct + i;
            let r = residual[i];
            if r >= lower[slack] - 1e-12 && r <= upper[slack] + 1e-12 {
                x[slack] = r;
                status[slack] = VarStatus::Basic;
                basis.push(slack);
                binv[i * m + i] = 1.0;
            } else {
                let clamped = r.clamp(lower[slack], upper[slack]);
                x[slack] = clamped;
                status[slack] = if clamped == lower[slack] {
                    VarStatus::AtLower
                } else {
                    VarStatus::AtUpper
                };
                let short = r - clamped;
                let sign = if short >= 0.0 { 1.0 } else { -1.0 };
                let art = cols.len();
                cols.push(vec![(i, sign)]);
                lower.push(0.0);
                upper.push(f64::INFINITY);
                x.push(short.abs());
                status.push(VarStatus::Basic);
                basis.push(art);
                binv[i * m + i] = sign;
                n_artificial += 1;
            }
        }

        let n_total = cols.len();
        let iteration_limit = if opts.iteration_limit > 0 {
            opts.iteration_limit
        } else {
            (200 * (n_total + m)).max(20_000)
        };

        Worker {
            m,
            n_struct,
            cols,
            lower,
            upper,
            rhs,
            x,
            status,
            basis,
            binv,
            opts,
            iteration_limit,
            pivots_since_refactor: 0,
            degenerate_streak: 0,
            bland: false,
            iterations: 0,
            n_artificial,
        }
    }

    fn solve(&mut self, instance: &MilpInstance) -> Result<LpSolution, SimplexError> {
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));

        if self.n_artificial > 0 {
            let mut phase1_cost = vec![0.0; self.cols.len()];
            let first_artificial = self.cols.len() - self.n_artificial;
            for c in &mut phase1_cost[first_artificial..] {
                *c = -1.0;
            }
            match self.optimize(&phase1_cost, 1)? {
                PhaseOutcome::Unbounded => {
                    return Err(SimplexError::Singular(
                        "phase 1 reported unbounded".to_owned(),
                    ))
                }
                PhaseOutcome::Optimal => {}
            }
            self.recompute_basics();
            let infeas: f64 = self.x[self.cols.len() - self.n_artificial..]
                .iter()
                .map(|v| v.abs())
                .sum();
            if infeas > self.opts.feasibility_tol * scale {
                return Ok(LpSolution {
                    values: Vec::new(),
                    objective: f64::NAN,
                    status: LpStatus::Infeasible,
                });
            }
            // Pin the artificials so phase 2 cannot revive them.
            for j in (self.cols.len() - self.n_artificial)..self.cols.len() {
                self.lower[j] = 0.0;
                self.upper[j] = 0.0;
            }
            self.bland = false;
            self.degenerate_streak = 0;
        }

        let mut cost = vec![0.0; self.cols.len()];
        cost[..self.n_struct].copy_from_slice(&instance.objective);
        let outcome = self.optimize(&cost, 2)?;
        if let PhaseOutcome::Unbounded = outcome {
            return Ok(LpSolution {
                values: Vec::new(),
                objective: f64::INFINITY,
                status: LpStatus::Unbounded,
            });
        }

        // Freshen the basic values through the inverse before reading
        // the answer, then make sure the rows actually hold.
        self.recompute_basics();
        if self.max_residual() > self.opts.feasibility_tol * scale {
            self.refactor()?;
            self.recompute_basics();
            let resid = self.max_residual();
            if resid > self.opts.feasibility_tol * scale {
                return Err(SimplexError::Singular(format!(
                    "row residual {resid:.3e} after refactorization"
                )));
            }
        }

        let mut values = self.x[..self.n_struct].to_vec();
        for (j, v) in values.iter_mut().enumerate() {
            // Shave numerical dust off the bounds.
            if (*v - self.lower[j]).abs() <= 1e-10 {
                *v = self.lower[j];
            } else if (*v - self.upper[j]).abs() <= 1e-10 {
                *v = self.upper[j];
            }
        }
        let objective = instance.objective_value(&values);
        Ok(LpSolution {
            values,
            objective,
            status: LpStatus::Optimal,
        })
    }

    fn optimize(&mut self, cost: &[f64], phase: u8) -> Result<PhaseOutcome, SimplexError> {
        let mut refactor_retry = false;
        loop {
            self.iterations += 1;
            if self.iterations > self.iteration_limit {
                let obj: f64 = self.x.iter().zip(cost).map(|(v, c)| v * c).sum();
                return Err(SimplexError::IterationLimit {
                    limit: self.iteration_limit,
                    phase,
                    objective: obj,
                });
            }
            if self.pivots_since_refactor >= self.opts.refactor_interval {
                self.refactor()?;
                self.recompute_basics();
            }

            // Duals y = c_B * Binv.
            let mut y = vec![0.0; self.m];
            for (i, &bj) in self.basis.iter().enumerate() {
                let cb = cost[bj];
                if cb != 0.0 {
                    let row = &self.binv[i * self.m..(i + 1) * self.m];
                    for (k, yk) in y.iter_mut().enumerate() {
                        *yk += cb * row[k];
                    }
                }
            }

            // Pricing.
            let tol = self.opts.reduced_cost_tol;
            let mut entering: Option<(usize, f64, f64)> = None; // (col, |d|, dir)
            for j in 0..self.cols.len() {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let mut d = cost[j];
                for &(i, a) in &self.cols[j] {
                    d -= y[i] * a;
                }
                let dir = match st {
                    VarStatus::AtLower if d > tol => 1.0,
                    VarStatus::AtUpper if d < -tol => -1.0,
                    VarStatus::FreeZero if d.abs() > tol => d.signum(),
                    _ => continue,
                };
                if self.bland {
                    entering = Some((j, d.abs(), dir));
                    break;
                }
                match entering {
                    Some((_, best, _)) if d.abs() <= best => {}
                    _ => entering = Some((j, d.abs(), dir)),
                }
            }

            let Some((j_in, _, dir)) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };

            // w = Binv * A_j.
            let mut w = vec![0.0; self.m];
            for &(i, a) in &self.cols[j_in] {
                if a != 0.0 {
                    for k in 0..self.m {
                        w[k] += self.binv[k * self.m + i] * a;
                    }
                }
            }

            // Ratio test: how far can the entering variable move.
            let range = self.upper[j_in] - self.lower[j_in];
            let mut t_best = if range.is_finite() {
                range
            } else {
                f64::INFINITY
            };
            let mut leaving: Option<(usize, bool, f64)> = None; // (row, hits_upper, |w|)
            for (i, &wi) in w.iter().enumerate() {
                let g = -dir * wi;
                if g.abs() <= self.opts.pivot_tol {
                    continue;
                }
                let bi = self.basis[i];
                let t_i = if g > 0.0 {
                    if self.upper[bi].is_infinite() {
                        continue;
                    }
                    ((self.upper[bi] - self.x[bi]) / g).max(0.0)
                } else {
                    if self.lower[bi].is_infinite() {
                        continue;
                    }
                    ((self.lower[bi] - self.x[bi]) / g).max(0.0)
                };
                let better = t_i < t_best - 1e-12
                    || (t_i < t_best + 1e-12
                        && match leaving {
                            Some((_, _, wbest)) => wi.abs() > wbest,
                            None => t_i < t_best,
                        });
                if better {
                    t_best = t_i.min(t_best);
                    leaving = Some((i, g > 0.0, wi.abs()));
                }
            }

            if t_best.is_infinite() {
                return Ok(PhaseOutcome::Unbounded);
            }

            match leaving {
                None => {
                    // Bound flip: the entering variable crosses to its
                    // other bound, the basis stays put.
                    let t = t_best;
                    for (i, &wi) in w.iter().enumerate() {
                        let bi = self.basis[i];
                        self.x[bi] += -dir * wi * t;
                    }
                    if dir > 0.0 {
                        self.x[j_in] = self.upper[j_in];
                        self.status[j_in] = VarStatus::AtUpper;
                    } else {
                        self.x[j_in] = self.lower[j_in];
                        self.status[j_in] = VarStatus::AtLower;
                    }
                    self.note_step(t);
                }
                Some((r, hits_upper, _)) => {
                    let piv = w[r];
                    if piv.abs() < self.opts.pivot_tol * 10.0 && !refactor_retry {
                        // Tiny pivot: rebuild and price again rather
                        // than poisoning the inverse.
                        self.refactor()?;
                        self.recompute_basics();
                        refactor_retry = true;
                        self.iterations -= 1;
                        continue;
                    }
                    refactor_retry = false;
                    let t = t_best;
                    for (i, &wi) in w.iter().enumerate() {
                        let bi = self.basis[i];
                        self.x[bi] += -dir * wi * t;
                    }
                    self.x[j_in] += dir * t;
                    let leaving_var = self.basis[r];
                    self.x[leaving_var] = if hits_upper {
                        self.upper[leaving_var]
                    } else {
                        self.lower[leaving_var]
                    };
                    self.status[leaving_var] = if hits_upper {
                        VarStatus::AtUpper
                    } else {
                        VarStatus::AtLower
                    };
                    self.status[j_in] = VarStatus::Basic;
                    self.basis[r] = j_in;

                    // Pivot row operations keep Binv in step.
                    let inv_piv = 1.0 / piv;
                    let (before, rest) = self.binv.split_at_mut(r * self.m);
                    let (prow, after) = rest.split_at_mut(self.m);
                    for v in prow.iter_mut() {
                        *v *= inv_piv;
                    }
                    for (i, chunk) in before.chunks_mut(self.m).enumerate() {
                        let wi = w[i];
                        if wi != 0.0 {
                            for (c, p) in chunk.iter_mut().zip(prow.iter()) {
                                *c -= wi * p;
                            }
                        }
                    }
                    for (k, chunk) in after.chunks_mut(self.m).enumerate() {
                        let wi = w[r + 1 + k];
                        if wi != 0.0 {
                            for (c, p) in chunk.iter_mut().zip(prow.iter()) {
                                *c -= wi * p;
                            }
                        }
                    }
                    self.pivots_since_refactor += 1;
                    self.note_step(t);
                }
            }
        }
    }

    fn note_step(&mut self, t: f64) {
        if t.abs() <= 1e-11 {
            self.degenerate_streak += 1;
            if self.degenerate_streak > self.opts.degeneracy_limit {
                self.bland = true;
            }
        } else {
            self.degenerate_streak = 0;
            if self.bland && self.degenerate_streak == 0 {
                // Leave Bland mode once progress resumes.
                self.bland = false;
            }
        }
    }

    /// Rebuild the dense inverse from the current basis columns.
    fn refactor(&mut self) -> Result<(), SimplexError> {
        let m = self.m;
        if m == 0 {
            return Ok(());
        }
        let mut mat = vec![0.0; m * m];
        for (k, &bj) in self.basis.iter().enumerate() {
            for &(i, a) in &self.cols[bj] {
                mat[i * m + k] += a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            // Partial pivoting.
            let mut best = col;
            let mut best_abs = mat[col * m + col].abs();
            for r in (col + 1)..m {
                let v = mat[r * m + col].abs();
                if v > best_abs {
                    best_abs = v;
                    best = r;
                }
            }
            if best_abs < 1e-11 {
                return Err(SimplexError::Singular(format!(
                    "basis column {col} lost rank"
                )));
            }
            if best != col {
                for c in 0..m {
                    mat.swap(col * m + c, best * m + c);
                    inv.swap(col * m + c, best * m + c);
                }
            }
            let piv = mat[col * m + col];
            let inv_piv = 1.0 / piv;
            for c in 0..m {
                mat[col * m + c] *= inv_piv;
                inv[col * m + c] *= inv_piv;
            }
            for r in 0..m {
                if r != col {
                    let f = mat[r * m + col];
                    if f != 0.0 {
                        for c in 0..m {
                            mat[r * m + c] -= f * mat[col * m + c];
                            inv[r * m + c] -= f * inv[col * m + c];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.pivots_since_refactor = 0;
        Ok(())
    }

    /// Basic values from scratch: x_B = Binv (b - N x_N).
    fn recompute_basics(&mut self) {
        let mut r = self.rhs.clone();
        for j in 0..self.cols.len() {
            if self.status[j] != VarStatus::Basic && self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    r[i] -= a * self.x[j];
                }
            }
        }
        for i in 0..self.m {
            let mut v = 0.0;
            let row = &self.binv[i * self.m..(i + 1) * self.m];
            for (k, rk) in r.iter().enumerate() {
                v += row[k] * rk;
            }
            self.x[self.basis[i]] = v;
        }
    }

    fn max_residual(&self) -> f64 {
        let mut acc: Vec<f64> = self.rhs.iter().map(|b| -b).collect();
        for j in 0..self.cols.len() {
            if self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    acc[i] += a * self.x[j];
                }
            }
        }
        acc.iter().fold(0.0f64, |w, r| w.max(r.abs()))
    }
}
