//! Search for HZ equilibria over a finite price grid.
//!
//! Some item is free in every HZ equilibrium after zero-min normalization, so
//! the grid fixes one item `j0` at price 0 and lets the others range over
//! `{0, δ, 2δ, ..., cap}`. At each cell the agents' optimal bundles are
//! computed, and a single exact LP decides whether some fractional perfect
//! matching gives every agent an optimal bundle at no more than the cheapest
//! optimal cost.

use std::sync::Mutex;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::lp::{check_feasible, solve_lp, LinearProgram, Relation, Sense};
use crate::market::{fpm_program, Allocation, Instance, PriceVector};
use crate::scalar::Scalar;
use crate::transforms::{reduce_bivalued_to_dichotomous, AffineRecord};
use crate::verify::{best_affordable_bundle, check_hz_equilibrium, ToleranceConfig};

use super::SolverError;

const MAX_CELLS: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig<T> {
    /// Price step.
    pub delta: T,
    /// Largest price on the grid; `None` means the number of items.
    pub price_cap: Option<T>,
    /// Utility slack, relative to each agent's utility range.
    pub eps: T,
    pub max_items: usize,
}

impl<T: Scalar> Default for GridConfig<T> {
    fn default() -> Self {
        GridConfig {
            delta: T::ratio(1, 4),
            price_cap: None,
            eps: T::zero(),
            max_items: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEquilibrium<T> {
    pub allocation: Allocation<T>,
    pub prices: PriceVector<T>,
    /// The item pinned at price zero.
    pub zero_item: usize,
    /// Cells in search order up to and including the successful one.
    pub cells_examined: usize,
}

struct Grid<T> {
    n_items: usize,
    levels: usize,
    delta: T,
}

impl<T: Scalar> Grid<T> {
    fn cells(&self) -> usize {
        self.n_items * self.levels.pow(self.n_items as u32 - 1)
    }

    /// Cell `c` in search order: `j0` outermost, then the free prices in
    /// lexicographic order with the lowest item index most significant.
    fn cell(&self, mut c: usize) -> (usize, PriceVector<T>) {
        let per = self.levels.pow(self.n_items as u32 - 1);
        let j0 = c / per;
        c %= per;
        let mut ks = vec![0usize; self.n_items];
        for j in (0..self.n_items).rev().filter(|&j| j != j0) {
            ks[j] = c % self.levels;
            c /= self.levels;
        }
        let values = ks
            .iter()
            .map(|&k| T::from_usize(k).unwrap() * self.delta.clone())
            .collect();
        (j0, PriceVector::new(values).expect("grid prices are nonnegative"))
    }
}

enum CellResult<T> {
    Found(Allocation<T>),
    /// Phase-one residual of the cell program.
    Miss(f64),
}

/// Program whose feasible points are the allocations in which every agent
/// gets within `eps * range_i` of its best affordable utility at no more than
/// the cheapest cost of an optimal bundle.
fn cell_program<T: Scalar>(
    inst: &Instance<T>,
    prices: &PriceVector<T>,
    eps: &T,
) -> Option<LinearProgram<T>> {
    let (na, ni) = (inst.n_agents(), inst.n_items());
    let mut lp = fpm_program(inst, 0, Sense::Maximize);
    for i in 0..na {
        let opt = best_affordable_bundle(inst, i, prices).ok()?;
        let util: Vec<_> = (0..ni)
            .map(|j| (i * ni + j, inst.utility_row(i)[j].clone()))
            .collect();
        let floor = opt.value - eps.clone() * inst.utility_range(i);
        lp.add_sparse(&util, Relation::Ge, floor);
        let cost: Vec<_> = (0..ni)
            .map(|j| (i * ni + j, prices.values()[j].clone()))
            .collect();
        lp.add_sparse(&cost, Relation::Le, opt.secondary);
    }
    Some(lp)
}

/// Lexicographically greatest feasible point in row-major order.
fn canonical<T: Scalar>(mut lp: LinearProgram<T>) -> Vec<T> {
    let n = lp.n_vars();
    let mut x = Vec::new();
    for v in 0..n {
        let mut obj = vec![T::zero(); n];
        obj[v] = T::one();
        lp.set_objective(obj).set_sense(Sense::Maximize);
        let sol = solve_lp(&lp);
        assert!(sol.is_optimal(), "feasible cell program stays feasible");
        let best = sol.x[v].clone();
        lp.add_sparse(&[(v, T::one())], Relation::Eq, best.clone());
        x = sol.x;
    }
    x
}

fn examine<T: Scalar>(inst: &Instance<T>, prices: &PriceVector<T>, eps: &T) -> CellResult<T> {
    let Some(lp) = cell_program(inst, prices, eps) else {
        return CellResult::Miss(f64::INFINITY);
    };
    let probe = check_feasible(&lp);
    if !probe.is_optimal() {
        return CellResult::Miss(probe.infeasibility.to_f64());
    }
    let x = canonical(lp);
    CellResult::Found(Allocation::from_flat(&x, inst.n_agents(), inst.n_items()))
}

fn grid_for<T: Scalar>(inst: &Instance<T>, cfg: &GridConfig<T>) -> Result<Grid<T>, SolverError> {
    let ni = inst.n_items();
    if ni > cfg.max_items {
        return Err(SolverError::TooLarge {
            what: "item count",
            got: ni,
            limit: cfg.max_items,
        });
    }
    if !cfg.delta.is_pos_tol() {
        return Err(SolverError::Config(format!("delta must be positive, got {}", cfg.delta)));
    }
    if cfg.eps.is_neg_tol() {
        return Err(SolverError::Config(format!("eps must be nonnegative, got {}", cfg.eps)));
    }
    let cap = cfg
        .price_cap
        .clone()
        .unwrap_or_else(|| T::from_usize(ni).unwrap());
    if cap.is_neg_tol() {
        return Err(SolverError::Config(format!("price cap must be nonnegative, got {cap}")));
    }
    let steps = (cap.to_rational() / cfg.delta.to_rational()).floor().to_integer();
    let levels = steps
        .to_usize()
        .and_then(|s| s.checked_add(1))
        .filter(|&l| l <= MAX_CELLS)
        .ok_or(SolverError::TooLarge {
            what: "price levels",
            got: usize::MAX,
            limit: MAX_CELLS,
        })?;
    let grid = Grid {
        n_items: ni,
        levels,
        delta: cfg.delta.clone(),
    };
    let cells = (levels as u128).pow(ni as u32 - 1) * ni as u128;
    if cells > MAX_CELLS as u128 {
        return Err(SolverError::TooLarge {
            what: "price grid cells",
            got: cells.min(usize::MAX as u128) as usize,
            limit: MAX_CELLS,
        });
    }
    Ok(grid)
}

/// Scans the price grid in a fixed order and returns the first cell that
/// supports an equilibrium, with the lexicographically greatest supporting
/// allocation. Cells are examined in parallel but the result does not depend
/// on the thread count.
pub fn find_hz_equilibrium_grid<T: Scalar>(
    inst: &Instance<T>,
    cfg: &GridConfig<T>,
) -> Result<GridEquilibrium<T>, SolverError> {
    let grid = grid_for(inst, cfg)?;
    let closest: Mutex<Option<(f64, usize)>> = Mutex::new(None);
    let hit = (0..grid.cells()).into_par_iter().find_map_first(|c| {
        let (j0, prices) = grid.cell(c);
        match examine(inst, &prices, &cfg.eps) {
            CellResult::Found(x) => Some((c, j0, prices, x)),
            CellResult::Miss(r) => {
                let mut best = closest.lock().unwrap();
                if best.map_or(true, |(br, bc)| (r, c) < (br, bc)) {
                    *best = Some((r, c));
                }
                None
            }
        }
    });

    match hit {
        Some((c, zero_item, prices, allocation)) => {
            let tol = ToleranceConfig::new(cfg.eps.clone()).expect("eps checked");
            let v = check_hz_equilibrium(inst, &allocation, &prices, &tol);
            if !v.holds {
                return Err(SolverError::Postcondition(format!(
                    "grid cell {c} failed the equilibrium check: {:?}",
                    v.witness
                )));
            }
            Ok(GridEquilibrium {
                allocation,
                prices,
                zero_item,
                cells_examined: c + 1,
            })
        }
        None => {
            let (residual, c) = closest.into_inner().unwrap().unwrap_or((f64::INFINITY, 0));
            let (_, prices) = grid.cell(c);
            let closest = prices
                .values()
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            Err(SolverError::NotFound {
                cells: grid.cells(),
                closest,
                residual: residual.to_string(),
            })
        }
    }
}

/// Maps a bivalued instance to the dichotomous one and runs the grid search
/// there. The allocation is unchanged by the map, so it is returned together
/// with the per-agent records needed to interpret the reduced utilities.
pub fn find_bivalued_equilibrium<T: Scalar>(
    inst: &Instance<T>,
    cfg: &GridConfig<T>,
) -> Result<(GridEquilibrium<T>, Instance<T>, Vec<AffineRecord<T>>), SolverError> {
    let (reduced, records) = reduce_bivalued_to_dichotomous(inst)?;
    let eq = find_hz_equilibrium_grid(&reduced, cfg)?;
    Ok((eq, reduced, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::TransformError;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }
    fn ri(n: i64) -> Rational {
        Rational::from_int(n)
    }
    fn unit(rows: &[&[i64]]) -> Instance<Rational> {
        Instance::unit(rows.iter().map(|r| r.iter().map(|&v| ri(v)).collect()).collect()).unwrap()
    }

    #[test]
    fn cell_order() {
        let g = Grid {
            n_items: 3,
            levels: 3,
            delta: ri(1),
        };
        assert_eq!(g.cells(), 27);
        let (j0, p) = g.cell(0);
        assert_eq!((j0, p.values().to_vec()), (0, vec![ri(0); 3]));
        let (j0, p) = g.cell(1);
        assert_eq!((j0, p.values().to_vec()), (0, vec![ri(0), ri(0), ri(1)]));
        let (j0, p) = g.cell(3);
        assert_eq!((j0, p.values().to_vec()), (0, vec![ri(0), ri(1), ri(0)]));
        let (j0, p) = g.cell(10);
        assert_eq!((j0, p.values().to_vec()), (1, vec![ri(0), ri(0), ri(1)]));
    }

    #[test]
    fn identity_instance_is_free() {
        let i = unit(&[&[1, 0], &[0, 1]]);
        let eq = find_hz_equilibrium_grid(&i, &GridConfig::default()).unwrap();
        assert_eq!(eq.prices.values(), &[ri(0), ri(0)]);
        assert_eq!(eq.allocation, Allocation::identity(2));
        assert_eq!(eq.cells_examined, 1);
    }

    #[test]
    fn twins_need_a_positive_price() {
        let i = unit(&[&[1, 0], &[1, 0]]);
        let cfg = GridConfig {
            delta: r(1, 4),
            price_cap: Some(ri(2)),
            ..GridConfig::default()
        };
        let eq = find_hz_equilibrium_grid(&i, &cfg).unwrap();
        assert_eq!(eq.prices.values(), &[ri(2), ri(0)]);
        assert_eq!(eq.zero_item, 1);
        assert_eq!(eq.allocation, Allocation::from_rows(vec![vec![r(1, 2); 2]; 2]));
    }

    #[test]
    fn twins_below_the_needed_cap() {
        let i = unit(&[&[1, 0], &[1, 0]]);
        let cfg = GridConfig {
            delta: r(1, 4),
            price_cap: Some(r(3, 2)),
            ..GridConfig::default()
        };
        match find_hz_equilibrium_grid(&i, &cfg) {
            Err(SolverError::NotFound { cells, .. }) => assert_eq!(cells, 14),
            other => panic!("expected NotFound, got {other:?}"),
        }
    }

    #[test]
    fn all_ones_prefers_identity() {
        let i = unit(&[&[1, 1], &[1, 1]]);
        let eq = find_hz_equilibrium_grid(&i, &GridConfig::default()).unwrap();
        assert_eq!(eq.prices.values(), &[ri(0), ri(0)]);
        assert_eq!(eq.allocation, Allocation::identity(2));
    }

    #[test]
    fn too_many_items() {
        let i = unit(&[&[1; 5], &[1; 5], &[1; 5], &[1; 5], &[1; 5]]);
        assert!(matches!(
            find_hz_equilibrium_grid(&i, &GridConfig::default()),
            Err(SolverError::TooLarge { .. })
        ));
    }

    #[test]
    fn bivalued_runs_on_reduction() {
        let i = unit(&[&[-5, -2], &[-5, -2]]);
        let cfg = GridConfig {
            price_cap: Some(ri(2)),
            ..GridConfig::default()
        };
        let (eq, reduced, rec) = find_bivalued_equilibrium(&i, &cfg).unwrap();
        assert_eq!(reduced.utility_row(0), &[ri(0), ri(1)]);
        assert_eq!(rec[0].low, ri(-5));
        assert_eq!(eq.prices.values(), &[ri(0), ri(2)]);

        let bad = unit(&[&[1, 2, 3], &[1, 1, 1], &[0, 0, 0]]);
        assert!(matches!(
            find_bivalued_equilibrium(&bad, &cfg),
            Err(SolverError::Transform(TransformError::NotBivalued { .. }))
        ));
    }
}
