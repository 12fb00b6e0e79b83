//! Dense two-phase simplex over any [`Scalar`].
//!
//! Pivoting follows Bland's rule (lowest eligible entering column, lowest
//! basic index among tied leaving rows), so a given program always walks
//! the same sequence of bases and returns the same vertex.

use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn is_satisfied_by(&self, x: &[T]) -> bool {
        let lhs = dot(&self.coeffs, x);
        match self.relation {
            Relation::Le => lhs.le_tol(&self.rhs),
            Relation::Eq => lhs.eq_tol(&self.rhs),
            Relation::Ge => lhs.ge_tol(&self.rhs),
        }
    }
}

/// `optimize c·x  s.t.  rows,  x >= lower_bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    sense: Sense,
    objective: Vec<T>,
    constraints: Vec<Constraint<T>>,
    lower_bounds: Vec<T>,
}

impl<T: Scalar> LinearProgram<T> {
    /// Program over `n_vars` nonnegative variables with a zero objective.
    pub fn new(n_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: vec![T::zero(); n_vars],
            constraints: Vec::new(),
            lower_bounds: vec![T::zero(); n_vars],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn lower_bounds(&self) -> &[T] {
        &self.lower_bounds
    }

    pub fn set_sense(&mut self, sense: Sense) -> &mut Self {
        self.sense = sense;
        self
    }

    pub fn set_objective(&mut self, objective: Vec<T>) -> &mut Self {
        assert_eq!(objective.len(), self.n_vars(), "objective length");
        self.objective = objective;
        self
    }

    pub fn add_constraint(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        assert_eq!(coeffs.len(), self.n_vars(), "constraint length");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    /// Adds a constraint given as `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, T)], relation: Relation, rhs: T) -> &mut Self {
        let mut coeffs = vec![T::zero(); self.n_vars()];
        for (var, c) in terms {
            coeffs[*var] = coeffs[*var].clone() + c.clone();
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    pub fn set_lower_bound(&mut self, var: usize, bound: T) -> &mut Self {
        self.lower_bounds[var] = bound;
        self
    }

    /// Whether `x` satisfies every row and bound.
    pub fn is_feasible_point(&self, x: &[T]) -> bool {
        x.len() == self.n_vars()
            && x.iter().zip(&self.lower_bounds).all(|(v, lb)| v.ge_tol(lb))
            && self.constraints.iter().all(|c| c.is_satisfied_by(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Optimal vertex; for `Unbounded`, the last feasible vertex; empty if
    /// infeasible.
    pub x: Vec<T>,
    /// Objective at `x` in the program's own sense.
    pub objective_value: T,
    /// Minimum total artificial mass after phase one; zero unless infeasible.
    pub infeasibility: T,
}

impl<T: Scalar> LpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn infeasible(residual: T) -> Self {
        LpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective_value: T::zero(),
            infeasibility: residual,
        }
    }
}

pub fn solve_lp<T: Scalar>(lp: &LinearProgram<T>) -> LpSolution<T> {
    run(lp, true)
}

/// Phase one only: any feasible vertex, or `Infeasible`.
pub fn check_feasible<T: Scalar>(lp: &LinearProgram<T>) -> LpSolution<T> {
    run(lp, false)
}

fn run<T: Scalar>(lp: &LinearProgram<T>, optimize: bool) -> LpSolution<T> {
    let mut tab = Tableau::build(lp);
    let residual = tab.phase_one();
    if residual.is_pos_tol() {
        return LpSolution::infeasible(residual);
    }
    tab.drive_out_artificials();

    let mut status = LpStatus::Optimal;
    if optimize {
        let cost: Vec<T> = match lp.sense {
            Sense::Minimize => lp.objective.clone(),
            Sense::Maximize => lp.objective.iter().map(|c| -c.clone()).collect(),
        };
        if !tab.phase_two(&cost) {
            status = LpStatus::Unbounded;
        }
    }

    let x: Vec<T> = tab
        .primal()
        .into_iter()
        .zip(&lp.lower_bounds)
        .map(|(v, lb)| v + lb.clone())
        .collect();
    let objective_value = dot(&lp.objective, &x);
    LpSolution {
        status,
        x,
        objective_value,
        infeasibility: T::zero(),
    }
}

struct Tableau<T> {
    /// `rows[k] = [a_k1 .. a_kN | b_k]`
    rows: Vec<Vec<T>>,
    /// Reduced costs with `-z` in the last slot.
    costs: Vec<T>,
    basis: Vec<usize>,
    n_structural: usize,
    /// Columns at or past this index are artificial.
    first_artificial: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let n = lp.n_vars();
        let m = lp.constraints.len();

        // shift lower bounds to zero and orient every row to rhs >= 0
        let mut rows: Vec<(Vec<T>, Relation, T)> = Vec::with_capacity(m);
        for c in &lp.constraints {
            let mut rhs = c.rhs.clone() - dot(&c.coeffs, &lp.lower_bounds);
            let mut coeffs = c.coeffs.clone();
            let mut rel = c.relation;
            if rhs.is_negative() {
                rhs = -rhs;
                coeffs.iter_mut().for_each(|v| *v = -v.clone());
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            rows.push((coeffs, rel, rhs));
        }

        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n + n_slack;
        let width = first_artificial + n_art;

        let mut table = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut slack, mut art) = (n, first_artificial);
        for (coeffs, rel, rhs) in rows {
            let mut row = coeffs;
            row.resize(width + 1, T::zero());
            match rel {
                Relation::Le => {
                    row[slack] = T::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -T::one();
                    slack += 1;
                    row[art] = T::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = T::one();
                    basis.push(art);
                    art += 1;
                }
            }
            row[width] = rhs;
            table.push(row);
        }

        Tableau {
            rows: table,
            costs: vec![T::zero(); width + 1],
            basis,
            n_structural: n,
            first_artificial,
        }
    }

    fn width(&self) -> usize {
        self.costs.len() - 1
    }

    fn price_out(&mut self, cost: &[T]) {
        let w = self.width();
        let mut row: Vec<T> = cost.to_vec();
        row.resize(w + 1, T::zero());
        for (k, &b) in self.basis.iter().enumerate() {
            let cb = row[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (dst, src) in row.iter_mut().zip(&self.rows[k]) {
                *dst = dst.clone() - cb.clone() * src.clone();
            }
        }
        self.costs = row;
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let piv = self.rows[r][e].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[e].clone();
            if f.is_zero() {
                continue;
            }
            for (dst, src) in row.iter_mut().zip(&pivot_row) {
                *dst = dst.clone() - f.clone() * src.clone();
            }
            row[e] = T::zero();
        }
        let f = self.costs[e].clone();
        if !f.is_zero() {
            for (dst, src) in self.costs.iter_mut().zip(&pivot_row) {
                *dst = dst.clone() - f.clone() * src.clone();
            }
            self.costs[e] = T::zero();
        }
        self.basis[r] = e;
    }

    /// Minimizes the priced-out cost row over columns `< limit`. Returns
    /// `false` when unbounded.
    fn iterate(&mut self, limit: usize) -> bool {
        let w = self.width();
        loop {
            let entering = (0..limit).find(|&j| self.costs[j].is_neg_tol());
            let Some(e) = entering else {
                return true;
            };
            let mut leave: Option<(usize, T)> = None;
            for (k, row) in self.rows.iter().enumerate() {
                if !row[e].is_pos_tol() {
                    continue;
                }
                let ratio = row[w].clone() / row[e].clone();
                let better = match &leave {
                    None => true,
                    Some((lk, best)) => {
                        ratio.clone() - best.clone() < -T::tolerance()
                            || (ratio.eq_tol(best) && self.basis[k] < self.basis[*lk])
                    }
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, e),
                None => return false,
            }
        }
    }

    /// Returns the minimal artificial total.
    fn phase_one(&mut self) -> T {
        let w = self.width();
        let mut cost = vec![T::zero(); w];
        for c in cost.iter_mut().skip(self.first_artificial) {
            *c = T::one();
        }
        self.price_out(&cost);
        let bounded = self.iterate(w);
        debug_assert!(bounded, "phase one is bounded below by zero");
        -self.costs[w].clone()
    }

    fn drive_out_artificials(&mut self) {
        let mut k = 0;
        while k < self.rows.len() {
            if self.basis[k] < self.first_artificial {
                k += 1;
                continue;
            }
            let col = (0..self.first_artificial).find(|&j| !self.rows[k][j].is_zero_tol());
            match col {
                Some(j) => {
                    self.pivot(k, j);
                    k += 1;
                }
                None => {
                    // redundant equality
                    self.rows.remove(k);
                    self.basis.remove(k);
                }
            }
        }
    }

    fn phase_two(&mut self, cost: &[T]) -> bool {
        self.price_out(cost);
        self.iterate(self.first_artificial)
    }

    fn primal(&self) -> Vec<T> {
        let w = self.width();
        let mut x = vec![T::zero(); self.n_structural];
        for (k, &b) in self.basis.iter().enumerate() {
            if b < self.n_structural {
                x[b] = self.rows[k][w].clone();
            }
        }
        x
    }
}
