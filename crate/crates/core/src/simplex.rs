//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Small, deterministic, and dependency-free: it only has to serve linear
//! programs with a few hundred variables.

use crate::error::{Error, Result};

pub const MAX_VARIABLES: usize = 512;

const PIVOT_EPS: f64 = 1e-12;
const COST_EPS: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c·x` subject to the constraints and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn minimize(objective: Vec<f64>) -> Result<Self> {
        if objective.len() > MAX_VARIABLES {
            return Err(Error::InvalidInput(format!(
                "{} variables exceed the dense solver limit of {MAX_VARIABLES}",
                objective.len()
            )));
        }
        Ok(Self {
            objective,
            constraints: Vec::new(),
        })
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Result<()> {
        if coeffs.len() != self.objective.len() {
            return Err(Error::InvalidInput("constraint width mismatch".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !rhs.is_finite() {
            return Err(Error::InvalidInput("non-finite constraint data".into()));
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_struct: usize,
    /// First artificial column; artificials occupy `art_start..width-1`.
    art_start: usize,
    width: usize,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.objective.len();
        let m = lp.constraints.len();
        let normalized: Vec<(Vec<f64>, Relation, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|v| -v).collect(), flipped, -c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs)
                }
            })
            .collect();
        let n_slack = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let n_art = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let art_start = n + n_slack;
        let width = art_start + n_art + 1;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut slack, mut art) = (n, art_start);
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![0.0; width];
            row[..n].copy_from_slice(&coeffs);
            row[width - 1] = rhs;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Self {
            rows,
            basis,
            n_struct: n,
            art_start,
            width,
            pivots: 0,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Minimizes `cost · x` over columns `< allowed`, Bland's rule throughout.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        let rhs = self.width - 1;
        let limit = 50_000 + 100 * self.width;
        loop {
            if self.pivots > limit {
                return Err(Error::Numeric("simplex pivot limit exceeded".into()));
            }
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = self.rows.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[j]).sum();
                cost[j] - z < -COST_EPS
            });
            let Some(c) = entering else { return Ok(()) };
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > PIVOT_EPS {
                    let ratio = row[rhs] / row[c];
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => ratio < r - 1e-14 * r.abs().max(1.0)
                            || (ratio <= r + 1e-14 * r.abs().max(1.0) && self.basis[i] < b),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, c),
                None => return Err(Error::Numeric("linear program is unbounded".into())),
            }
        }
    }

    fn run(mut self, objective: &[f64]) -> Result<LpSolution> {
        let rhs = self.width - 1;
        if self.art_start < rhs {
            let mut phase1 = vec![0.0; rhs];
            phase1[self.art_start..].iter_mut().for_each(|c| *c = 1.0);
            self.optimize(&phase1, rhs)?;
            let infeas: f64 = self
                .rows
                .iter()
                .zip(&self.basis)
                .filter(|(_, &b)| b >= self.art_start)
                .map(|(row, _)| row[rhs])
                .sum();
            let scale = self.rows.iter().map(|r| r[rhs].abs()).fold(1.0, f64::max);
            if infeas > 1e-9 * scale {
                return Err(Error::Numeric("linear program is infeasible".into()));
            }
            // drive zero-level artificials out of the basis where possible
            for r in 0..self.rows.len() {
                if self.basis[r] >= self.art_start {
                    if let Some(c) = (0..self.art_start).find(|&j| self.rows[r][j].abs() > 1e-9) {
                        self.pivot(r, c);
                    }
                }
            }
        }
        let mut cost = vec![0.0; rhs];
        cost[..self.n_struct].copy_from_slice(objective);
        self.optimize(&cost, self.art_start)?;
        let mut x = vec![0.0; self.n_struct];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n_struct {
                x[b] = row[rhs].max(0.0);
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            objective: value,
            pivots: self.pivots,
        })
    }
}
