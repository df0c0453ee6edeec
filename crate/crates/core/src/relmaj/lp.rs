//! Exact rational linear programming (dense tableau simplex, Bland's rule).
//!
//! All variables are implicitly nonnegative. [`lp_feasible`] decides
//! feasibility; [`Simplex`] keeps a feasible basis around so that several
//! objectives can be minimized over the same polytope with warm starts.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// `Σ coeff · x_var  (relation)  rhs`. Repeated variables are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn eq(coeffs: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Eq, rhs)
    }

    fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, (v, c)| acc + c * &x[*v])
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// Constraint system over nonnegative variables `x_0 .. x_{num_vars-1}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
    /// Optional cost vector to minimize (length `num_vars`).
    pub objective: Option<Vec<Rational>>,
    /// Abort with [`LpError::IterationLimit`] after this many pivots.
    pub pivot_limit: Option<usize>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            ..Self::default()
        }
    }

    pub fn push(&mut self, constraint: Constraint) {
        self.constraints.push(constraint);
    }

    /// Every constraint holds exactly and every variable is nonnegative.
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| c.is_satisfied(x))
    }

    fn validate(&self) -> Result<(), LpError> {
        for (k, c) in self.constraints.iter().enumerate() {
            if let Some((v, _)) = c.coeffs.iter().find(|(v, _)| *v >= self.num_vars) {
                return Err(LpError::Malformed(format!(
                    "constraint {k} references variable {v} but only {} exist",
                    self.num_vars
                )));
            }
        }
        if let Some(obj) = &self.objective {
            if obj.len() != self.num_vars {
                return Err(LpError::Malformed(format!(
                    "objective has {} coefficients for {} variables",
                    obj.len(),
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let text = |r: &Rational| r.to_repr();
        json!({
            "num_vars": self.num_vars,
            "nonnegative": true,
            "constraints": self.constraints.iter().map(|c| json!({
                "coeffs": c.coeffs.iter().map(|(v, r)| json!([v, text(r)])).collect::<Vec<_>>(),
                "relation": c.relation.to_string(),
                "rhs": text(&c.rhs),
            })).collect::<Vec<_>>(),
            "objective": self.objective.as_ref().map(|o| o.iter().map(text).collect::<Vec<_>>()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub assignment: Vec<Rational>,
    pub objective: Option<Rational>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Feasible(LpSolution),
    Infeasible { pivots: usize },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }

    pub fn pivots(&self) -> usize {
        match self {
            LpOutcome::Feasible(s) => s.pivots,
            LpOutcome::Infeasible { pivots } => *pivots,
        }
    }

    pub fn into_solution(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Feasible(s) => Some(s),
            LpOutcome::Infeasible { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
    #[error("pivot limit of {limit} reached")]
    IterationLimit { limit: usize },
    #[error("objective is unbounded below")]
    Unbounded,
}

/// Decide feasibility, and minimize the objective if one is given.
pub fn lp_feasible(problem: &LpProblem) -> Result<LpOutcome, LpError> {
    let (simplex, pivots) = Simplex::with_counter(problem)?;
    let Some(mut simplex) = simplex else {
        return Ok(LpOutcome::Infeasible { pivots });
    };
    match &problem.objective {
        Some(c) => simplex.minimize(c).map(LpOutcome::Feasible),
        None => Ok(LpOutcome::Feasible(simplex.solution(None))),
    }
}

/// Tableau holding a feasible basis of an [`LpProblem`].
#[derive(Debug, Clone)]
pub struct Simplex {
    num_vars: usize,
    /// Structural plus slack columns; artificial columns are gone after phase 1.
    num_cols: usize,
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    pivots: usize,
    pivot_limit: Option<usize>,
}

enum PivotResult {
    Optimal,
    Unbounded,
}

impl Simplex {
    /// Run phase 1. `Ok(None)` means the constraints are infeasible.
    pub fn new(problem: &LpProblem) -> Result<Option<Self>, LpError> {
        Self::with_counter(problem).map(|(s, _)| s)
    }

    /// Phase 1 that also reports the pivots spent when infeasible.
    pub fn with_counter(problem: &LpProblem) -> Result<(Option<Self>, usize), LpError> {
        problem.validate()?;
        let n = problem.num_vars;
        let m = problem.constraints.len();

        // Normalize to nonnegative right-hand sides.
        let mut dense: Vec<(Vec<Rational>, Relation, Rational)> = Vec::with_capacity(m);
        for c in &problem.constraints {
            let mut row = vec![Rational::zero(); n];
            for (v, coef) in &c.coeffs {
                row[*v] += coef;
            }
            let (mut rel, mut rhs) = (c.relation, c.rhs.clone());
            if rhs.is_negative() {
                row.iter_mut().for_each(|x| *x = -x.clone());
                rhs = -rhs;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            dense.push((row, rel, rhs));
        }

        let slack_count = dense.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let art_count = dense.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let num_cols = n + slack_count;
        let total = num_cols + art_count;

        let mut rows = Vec::with_capacity(m + 1);
        let mut basis = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n, num_cols);
        for (coeffs, rel, rhs) in dense {
            let mut row = coeffs;
            row.resize(total + 1, Rational::zero());
            match rel {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Rational::one();
                    next_slack += 1;
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            row[total] = rhs;
            rows.push(row);
        }

        // Phase-1 cost row: minimize the sum of artificials.
        let mut cost = vec![Rational::zero(); total + 1];
        for (r, &b) in basis.iter().enumerate() {
            if b >= num_cols {
                for (c, v) in cost.iter_mut().enumerate() {
                    if c < num_cols || c == total {
                        *v -= &rows[r][c];
                    }
                }
            }
        }
        rows.push(cost);

        let mut tab = Simplex {
            num_vars: n,
            num_cols: total,
            rows,
            basis,
            pivots: 0,
            pivot_limit: problem.pivot_limit,
        };
        // Phase 1 may use any column.
        match tab.run(total)? {
            PivotResult::Optimal => {}
            PivotResult::Unbounded => unreachable!("phase 1 objective is bounded below"),
        }
        let m_rows = tab.rows.len() - 1;
        if !tab.rows[m_rows][total].is_zero() {
            return Ok((None, tab.pivots));
        }

        // Drive remaining (zero-valued) artificials out of the basis.
        let mut r = 0;
        while r < tab.basis.len() {
            if tab.basis[r] >= num_cols {
                match (0..num_cols).find(|&c| !tab.rows[r][c].is_zero()) {
                    Some(c) => {
                        tab.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        // Redundant equality.
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }

        // Drop artificial columns.
        for row in &mut tab.rows {
            let rhs = row[total].clone();
            row.truncate(num_cols);
            row.push(rhs);
        }
        tab.num_cols = num_cols;
        let last = tab.rows.len() - 1;
        tab.rows[last] = vec![Rational::zero(); num_cols + 1];
        let pivots = tab.pivots;
        Ok((Some(tab), pivots))
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    pub fn set_pivot_limit(&mut self, limit: Option<usize>) {
        self.pivot_limit = limit;
    }

    /// Current basic feasible solution restricted to the structural variables.
    pub fn assignment(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.num_vars];
        let rhs = self.num_cols;
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = self.rows[r][rhs].clone();
            }
        }
        x
    }

    fn solution(&self, objective: Option<Rational>) -> LpSolution {
        LpSolution {
            assignment: self.assignment(),
            objective,
            pivots: self.pivots,
        }
    }

    /// Minimize `cost · x` starting from the current basis.
    pub fn minimize(&mut self, cost: &[Rational]) -> Result<LpSolution, LpError> {
        if cost.len() != self.num_vars {
            return Err(LpError::Malformed(format!(
                "objective has {} coefficients for {} variables",
                cost.len(),
                self.num_vars
            )));
        }
        let width = self.num_cols + 1;
        let mut row = vec![Rational::zero(); width];
        row[..self.num_vars].clone_from_slice(cost);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = if b < self.num_vars {
                &cost[b]
            } else {
                continue;
            };
            if cb.is_zero() {
                continue;
            }
            for (c, v) in row.iter_mut().enumerate() {
                let a = &self.rows[r][c];
                if !a.is_zero() {
                    *v -= cb * a;
                }
            }
        }
        let last = self.rows.len() - 1;
        self.rows[last] = row;
        match self.run(self.num_cols)? {
            PivotResult::Optimal => {
                let value = -self.rows[last][self.num_cols].clone();
                Ok(self.solution(Some(value)))
            }
            PivotResult::Unbounded => Err(LpError::Unbounded),
        }
    }

    /// Bland's rule pivoting on columns `< allowed` until optimal.
    fn run(&mut self, allowed: usize) -> Result<PivotResult, LpError> {
        let rhs = self.rows[0].len() - 1;
        let cost_row = self.rows.len() - 1;
        loop {
            let Some(enter) = (0..allowed).find(|&c| self.rows[cost_row][c].is_negative()) else {
                return Ok(PivotResult::Optimal);
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..cost_row {
                let a = &self.rows[r][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rows[r][rhs] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((leave, _)) = leave else {
                return Ok(PivotResult::Unbounded);
            };
            if let Some(limit) = self.pivot_limit {
                if self.pivots >= limit {
                    return Err(LpError::IterationLimit { limit });
                }
            }
            self.pivot(leave, enter);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let support: Vec<usize> = self.rows[r]
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, _)| i)
            .collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for &k in &support {
                row[k] -= &factor * &pivot_row[k];
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }
}
