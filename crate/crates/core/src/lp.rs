//! Dense two-phase simplex for the small linear programs that appear in the
//! baseline ambiguity sets and the Frank-Wolfe oracle.
//!
//! Bland's rule is used for both the entering and the leaving variable, so the
//! method cannot cycle. Problem sizes here are at most a few hundred columns.

use std::fmt;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpStatus::Infeasible => f.write_str("infeasible"),
            LpStatus::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `maximize c^T x  s.t.  rows, x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        LinearProgram { objective, rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.objective.len(), "constraint width mismatch");
        self.rows.push(Row { coeffs, relation, rhs });
        self
    }

    pub fn solve(&self) -> Result<LpSolution, LpStatus> {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    m: usize,
    n: usize,
    /// Total columns excluding rhs.
    cols: usize,
    /// First artificial column index.
    art_start: usize,
    /// (m + 1) x (cols + 1), row-major; row `m` holds reduced costs.
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.num_vars();
        let n_slack = lp.rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let n_art = lp
            .rows
            .iter()
            .filter(|r| {
                let flip = r.rhs < 0.0;
                match r.relation {
                    Relation::Eq => true,
                    Relation::Le => flip,
                    Relation::Ge => !flip,
                }
            })
            .count();
        let art_start = n + n_slack;
        let cols = art_start + n_art;
        let stride = cols + 1;
        let mut data = vec![0.0; (m + 1) * stride];
        let mut basis = vec![0; m];
        let mut slack = n;
        let mut art = art_start;
        for (i, row) in lp.rows.iter().enumerate() {
            let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
            let line = &mut data[i * stride..(i + 1) * stride];
            for (dst, &c) in line.iter_mut().zip(&row.coeffs) {
                *dst = sign * c;
            }
            line[cols] = sign * row.rhs;
            // After the sign flip a `<=` row may have become `>=` and vice versa.
            let relation = match (row.relation, sign < 0.0) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            match relation {
                Relation::Le => {
                    line[slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    line[slack] = -1.0;
                    slack += 1;
                    line[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    line[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Tableau { m, n, cols, art_start, data, basis }
    }

    #[inline]
    fn stride(&self) -> usize {
        self.cols + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.stride() + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let stride = self.stride();
        let p = self.data[r * stride + c];
        for v in &mut self.data[r * stride..(r + 1) * stride] {
            *v /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * stride);
        let (prow, after) = rest.split_at_mut(stride);
        let eliminate = |line: &mut [f64]| {
            let f = line[c];
            if f != 0.0 {
                for (v, &pv) in line.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                line[c] = 0.0;
            }
        };
        before.chunks_mut(stride).for_each(eliminate);
        after.chunks_mut(stride).for_each(eliminate);
        self.basis[r] = c;
    }

    /// Loads reduced costs for `cost` (indexed by column) into the last row.
    fn load_objective(&mut self, cost: &[f64]) {
        let stride = self.stride();
        let m = self.m;
        let mut red = vec![0.0; stride];
        red[..self.cols].copy_from_slice(cost);
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..stride {
                    red[j] -= cb * self.data[i * stride + j];
                }
            }
        }
        self.data[m * stride..(m + 1) * stride].copy_from_slice(&red);
    }

    fn iterate(&mut self, allowed: usize) -> Result<(), LpStatus> {
        let m = self.m;
        let rhs = self.cols;
        loop {
            let entering = (0..allowed).find(|&j| self.at(m, j) > COST_EPS);
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.at(i, c);
                if a > PIVOT_EPS {
                    let ratio = self.at(i, rhs) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return Err(LpStatus::Unbounded) };
            self.pivot(r, c);
        }
    }

    fn solve(mut self, objective: &[f64]) -> Result<LpSolution, LpStatus> {
        if self.art_start < self.cols {
            let mut phase1 = vec![0.0; self.cols];
            phase1[self.art_start..].iter_mut().for_each(|v| *v = -1.0);
            self.load_objective(&phase1);
            self.iterate(self.cols)?;
            let infeas = self.at(self.m, self.cols);
            if infeas > FEAS_EPS * (1.0 + self.max_rhs()) {
                return Err(LpStatus::Infeasible);
            }
            // Drive zero-level artificials out of the basis where possible.
            for i in 0..self.m {
                if self.basis[i] >= self.art_start {
                    if let Some(j) = (0..self.art_start).find(|&j| self.at(i, j).abs() > 1e-9) {
                        self.pivot(i, j);
                    }
                }
            }
        }
        let mut cost = vec![0.0; self.cols];
        cost[..self.n].copy_from_slice(objective);
        self.load_objective(&cost);
        self.iterate(self.art_start)?;
        let mut x = vec![0.0; self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.at(i, self.cols).max(0.0);
            }
        }
        let objective = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, objective })
    }

    fn max_rhs(&self) -> f64 {
        (0..self.m).map(|i| self.at(i, self.cols).abs()).fold(0.0, f64::max)
    }
}
