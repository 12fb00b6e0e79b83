//! Grid programs over the allocation polytope for all-chores instances:
//! minimizing the product of disutilities, and maximizing it over the
//! Pareto-optimal allocations.
//!
//! Both programs are non-convex. They are solved by exhaustive enumeration of
//! the allocations whose entries are multiples of `1 / steps`, evaluated in
//! exact arithmetic. When `steps * d_i` is integral for every agent the grid
//! contains every vertex of the polytope.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::market::{envy_report, Allocation, EnvyReport, Instance};
use crate::scalar::{dot, Scalar};
use crate::verify::check_pareto_optimal;

use super::SolverError;

#[derive(Debug, Clone, PartialEq)]
pub struct ChoresGridConfig {
    /// Grid points per unit of mass; entries are multiples of `1 / steps`.
    pub steps: u64,
    pub max_agents: usize,
    pub max_items: usize,
}

impl Default for ChoresGridConfig {
    fn default() -> Self {
        ChoresGridConfig {
            steps: 100,
            max_agents: 3,
            max_items: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoresOutcome<T> {
    pub allocation: Allocation<T>,
    /// `Π_i (-u_i·x_i)` at `allocation`.
    pub product: T,
    pub envy: EnvyReport<T>,
    /// Grid resolution actually used.
    pub steps: u64,
    pub grid_points: usize,
}

fn check_chores<T: Scalar>(inst: &Instance<T>, cfg: &ChoresGridConfig) -> Result<(), SolverError> {
    if cfg.steps == 0 {
        return Err(SolverError::Config("grid steps must be positive".into()));
    }
    if inst.n_agents() > cfg.max_agents {
        return Err(SolverError::TooLarge {
            what: "agent count",
            got: inst.n_agents(),
            limit: cfg.max_agents,
        });
    }
    if inst.n_items() > cfg.max_items {
        return Err(SolverError::TooLarge {
            what: "item count",
            got: inst.n_items(),
            limit: cfg.max_items,
        });
    }
    for (agent, row) in inst.utilities().iter().enumerate() {
        if let Some((item, u)) = row.iter().enumerate().find(|(_, u)| u.is_pos_tol()) {
            return Err(SolverError::WrongSign {
                agent,
                item,
                value: u.to_string(),
            });
        }
    }
    Ok(())
}

/// Integer row totals `steps * d_i`, scaling `steps` up by the demand
/// denominators when necessary. Returns the effective steps and totals.
fn row_totals<T: Scalar>(inst: &Instance<T>, steps: u64) -> Result<(u64, Vec<u64>), SolverError> {
    let mut lcm = BigInt::from(1);
    for d in inst.demands() {
        lcm = lcm.lcm(d.to_rational().denom());
    }
    let scale = lcm
        .to_u64()
        .ok_or_else(|| SolverError::Config("demand denominators too large".into()))?;
    let steps = steps
        .checked_mul(scale)
        .ok_or_else(|| SolverError::Config("grid too fine".into()))?;
    let totals = inst
        .demands()
        .iter()
        .map(|d| {
            (d.to_rational() * BigInt::from(steps))
                .to_integer()
                .to_u64()
                .ok_or_else(|| SolverError::Config("demand too large".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((steps, totals))
}

/// Visits every grid allocation as a row-major vector of integer numerators
/// over `steps`, in lexicographically decreasing order. The callback returns
/// `false` to stop early.
pub fn for_each_grid_allocation<T: Scalar>(
    inst: &Instance<T>,
    steps: u64,
    mut visit: impl FnMut(&[u64]) -> bool,
) -> Result<u64, SolverError> {
    let (steps, rows) = row_totals(inst, steps)?;
    let ni = inst.n_items();
    let mut cols = vec![steps; ni];
    let mut rows_left = rows.clone();
    // suffix sums of row totals below the current row
    let mut below: Vec<u64> = vec![0; rows.len() + 1];
    for i in (0..rows.len()).rev() {
        below[i] = below[i + 1] + rows[i];
    }
    let mut cells = vec![0u64; rows.len() * ni];
    recurse(
        0,
        ni,
        &below,
        &mut rows_left,
        &mut cols,
        &mut cells,
        &mut visit,
    );
    Ok(steps)
}

fn recurse(
    cell: usize,
    ni: usize,
    below: &[u64],
    rows_left: &mut [u64],
    cols: &mut [u64],
    cells: &mut [u64],
    visit: &mut impl FnMut(&[u64]) -> bool,
) -> bool {
    if cell == cells.len() {
        return visit(cells);
    }
    let (i, j) = (cell / ni, cell % ni);
    let cols_after: u64 = cols[j + 1..].iter().sum();
    let hi = rows_left[i].min(cols[j]);
    // the row must still fit in later columns, the column in later rows
    let lo = rows_left[i]
        .saturating_sub(cols_after)
        .max(cols[j].saturating_sub(below[i + 1]));
    if lo > hi {
        return true;
    }
    for v in (lo..=hi).rev() {
        cells[cell] = v;
        rows_left[i] -= v;
        cols[j] -= v;
        let go_on = recurse(cell + 1, ni, below, rows_left, cols, cells, visit);
        rows_left[i] += v;
        cols[j] += v;
        if !go_on {
            return false;
        }
    }
    true
}

fn to_allocation<T: Scalar>(cells: &[u64], steps: u64, inst: &Instance<T>) -> Allocation<T> {
    let denom = T::from_u64(steps).unwrap();
    let flat: Vec<T> = cells
        .iter()
        .map(|&c| T::from_u64(c).unwrap() / denom.clone())
        .collect();
    Allocation::from_flat(&flat, inst.n_agents(), inst.n_items())
}

fn disutility_product<T: Scalar>(inst: &Instance<T>, x: &Allocation<T>) -> T {
    (0..inst.n_agents()).fold(T::one(), |acc, i| {
        acc * -dot(inst.utility_row(i), x.row(i))
    })
}

/// Minimizes `Π_i (-u_i·x_i)` over the allocation grid; ties go to the
/// lexicographically greatest allocation.
///
/// The log of the objective is a sum of logs of nonnegative affine
/// functions, so its minimum over the polytope sits at a vertex; with a grid
/// containing every vertex the grid minimum is the exact global minimum.
pub fn solve_min_disutility_product<T: Scalar>(
    inst: &Instance<T>,
    cfg: &ChoresGridConfig,
) -> Result<ChoresOutcome<T>, SolverError> {
    check_chores(inst, cfg)?;
    let (steps, _) = row_totals(inst, cfg.steps)?;
    let mut best: Option<(T, Vec<u64>)> = None;
    let mut points = 0usize;
    for_each_grid_allocation(inst, cfg.steps, |cells| {
        points += 1;
        let value = disutility_product(inst, &to_allocation(cells, steps, inst));
        if best.as_ref().map_or(true, |(b, _)| value < *b) {
            best = Some((value, cells.to_vec()));
        }
        true
    })?;
    let (product, cells) = best.expect("grid is never empty");
    let allocation = to_allocation(&cells, steps, inst);
    Ok(ChoresOutcome {
        envy: envy_report(inst, &allocation),
        allocation,
        product,
        steps,
        grid_points: points,
    })
}

/// Maximizes `Π_i (-u_i·x_i)` over grid allocations that pass the exact
/// Pareto-optimality check. Candidates are tried in decreasing order of the
/// objective, ties in lexicographically decreasing allocation order. If the
/// grid holds no PO point it is refined once (steps doubled).
pub fn solve_pareto_constrained_nb<T: Scalar>(
    inst: &Instance<T>,
    cfg: &ChoresGridConfig,
) -> Result<ChoresOutcome<T>, SolverError> {
    check_chores(inst, cfg)?;
    for requested in [cfg.steps, cfg.steps * 2] {
        let (steps, _) = row_totals(inst, requested)?;
        let mut candidates: Vec<(T, Vec<u64>)> = Vec::new();
        for_each_grid_allocation(inst, requested, |cells| {
            let x = to_allocation(cells, steps, inst);
            candidates.push((disutility_product(inst, &x), cells.to_vec()));
            true
        })?;
        let points = candidates.len();
        // stable sort: equal products keep enumeration order
        candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("comparable"));
        for (product, cells) in candidates {
            let x = to_allocation(&cells, steps, inst);
            if check_pareto_optimal(inst, &x).holds {
                return Ok(ChoresOutcome {
                    envy: envy_report(inst, &x),
                    allocation: x,
                    product,
                    steps,
                    grid_points: points,
                });
            }
        }
    }
    Err(SolverError::NoPoGridPoint {
        steps: cfg.steps * 2,
    })
}
