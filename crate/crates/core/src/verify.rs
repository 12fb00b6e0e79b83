//! Certification of envy-freeness, Pareto-optimality and both equilibrium
//! notions. Every failing verdict carries a witness that can be re-checked
//! by evaluating the violated inequality directly.

use thiserror::Error;

use crate::lp::{solve_lp, LinearProgram, Relation, Sense};
use crate::market::{
    envy_report, fpm_program, validate_allocation, Allocation, EarningsVector, EquilibriumKind,
    Instance, PriceVector, Verdict, Witness,
};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("agent {agent}: every bundle of size {demand} costs more than its budget")]
    InfeasibleBudget { agent: usize, demand: String },
    #[error("agent {agent}: no bundle of size {demand} earns enough")]
    InfeasibleEarnings { agent: usize, demand: String },
    #[error("tolerance must be nonnegative, got {0}")]
    NegativeTolerance(String),
}

/// Additive slack for the equilibrium checks; zero means exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceConfig<T> {
    eps: T,
}

impl<T: Scalar> ToleranceConfig<T> {
    pub fn new(eps: T) -> Result<Self, VerifyError> {
        if eps.is_negative() {
            return Err(VerifyError::NegativeTolerance(eps.to_string()));
        }
        Ok(ToleranceConfig { eps })
    }

    pub fn exact() -> Self {
        ToleranceConfig { eps: T::zero() }
    }

    pub fn eps(&self) -> &T {
        &self.eps
    }
}

/// Result of the two-stage bundle optimization for one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleOptimum<T> {
    /// Best attainable utility.
    pub value: T,
    /// Cheapest cost (price form) or highest earning (earnings form) among
    /// bundles attaining `value`.
    pub secondary: T,
    /// A bundle attaining both.
    pub bundle: Vec<T>,
}

pub fn check_envy_free<T: Scalar>(inst: &Instance<T>, x: &Allocation<T>) -> Verdict<T> {
    let valid = validate_allocation(inst, x);
    if !valid.holds {
        return valid;
    }
    let rep = envy_report(inst, x);
    if rep.envy_free {
        return Verdict::pass();
    }
    let (i, k) = rep.worst_pair.expect("envy needs two agents");
    Verdict::fail(Witness::Envy {
        envier: i,
        envied: k,
        own_value: rep.table[i][i].clone(),
        other_value: rep.table[i][k].clone(),
    })
}

/// Solves `max Σ s_i` over allocations `y` with `u_i·y_i >= u_i·x_i + s_i`,
/// `s >= 0`. Returns the optimal total improvement and the maximizing `y`.
pub fn pareto_improvement<T: Scalar>(inst: &Instance<T>, x: &Allocation<T>) -> (T, Allocation<T>) {
    let (na, ni) = (inst.n_agents(), inst.n_items());
    let n = na * ni;
    let mut lp = fpm_program(inst, na, Sense::Maximize);
    let mut obj = vec![T::zero(); n + na];
    for o in obj.iter_mut().skip(n) {
        *o = T::one();
    }
    lp.set_objective(obj);
    for i in 0..na {
        let mut terms: Vec<(usize, T)> = (0..ni)
            .map(|j| (i * ni + j, inst.utility_row(i)[j].clone()))
            .collect();
        terms.push((n + i, -T::one()));
        lp.add_sparse(&terms, Relation::Ge, dot(inst.utility_row(i), x.row(i)));
    }
    let sol = solve_lp(&lp);
    // x itself is feasible with s = 0, and y lives in a bounded polytope
    assert!(sol.is_optimal(), "Pareto LP is feasible and bounded");
    let y = Allocation::from_flat(&sol.x[..n], na, ni);
    (sol.objective_value, y)
}

pub fn check_pareto_optimal<T: Scalar>(inst: &Instance<T>, x: &Allocation<T>) -> Verdict<T> {
    let valid = validate_allocation(inst, x);
    if !valid.holds {
        return valid;
    }
    let (improvement, y) = pareto_improvement(inst, x);
    if improvement.is_pos_tol() {
        Verdict::fail(Witness::ParetoImprovement {
            allocation: y,
            improvement,
        })
    } else {
        Verdict::pass()
    }
}

/// `Σ y = d` over nonnegative `y` plus a single budget-type row.
fn bundle_program<T: Scalar>(
    n_items: usize,
    demand: &T,
    weights: &[T],
    relation: Relation,
) -> LinearProgram<T> {
    let mut lp = LinearProgram::new(n_items, Sense::Maximize);
    lp.add_constraint(vec![T::one(); n_items], Relation::Eq, demand.clone())
        .add_constraint(weights.to_vec(), relation, demand.clone());
    lp
}

fn two_stage<T: Scalar>(
    utilities: &[T],
    demand: &T,
    weights: &[T],
    relation: Relation,
    secondary: Sense,
) -> Option<BundleOptimum<T>> {
    let mut lp = bundle_program(utilities.len(), demand, weights, relation);
    lp.set_objective(utilities.to_vec());
    let first = solve_lp(&lp);
    if !first.is_optimal() {
        return None;
    }
    let value = first.objective_value;
    lp.add_constraint(utilities.to_vec(), Relation::Ge, value.clone())
        .set_objective(weights.to_vec())
        .set_sense(secondary);
    let second = solve_lp(&lp);
    assert!(second.is_optimal(), "stage-one optimum stays feasible");
    Some(BundleOptimum {
        value,
        secondary: second.objective_value,
        bundle: second.x,
    })
}

/// Best utility over bundles `y >= 0`, `Σ y = d_i`, `p·y <= d_i`, and the
/// cheapest cost attaining it.
pub fn best_affordable_bundle<T: Scalar>(
    inst: &Instance<T>,
    agent: usize,
    prices: &PriceVector<T>,
) -> Result<BundleOptimum<T>, VerifyError> {
    let demand = inst.demand(agent);
    two_stage(
        inst.utility_row(agent),
        demand,
        prices.values(),
        Relation::Le,
        Sense::Minimize,
    )
    .ok_or_else(|| VerifyError::InfeasibleBudget {
        agent,
        demand: demand.to_string(),
    })
}

/// Best utility over bundles `y >= 0`, `Σ y = d_i`, `q·y >= d_i`, and the
/// highest earning attaining it.
pub fn best_earning_bundle<T: Scalar>(
    inst: &Instance<T>,
    agent: usize,
    earnings: &EarningsVector<T>,
) -> Result<BundleOptimum<T>, VerifyError> {
    let demand = inst.demand(agent);
    two_stage(
        inst.utility_row(agent),
        demand,
        earnings.values(),
        Relation::Ge,
        Sense::Maximize,
    )
    .ok_or_else(|| VerifyError::InfeasibleEarnings {
        agent,
        demand: demand.to_string(),
    })
}

fn structural<T: Scalar>(inst: &Instance<T>, x: &Allocation<T>, kind: EquilibriumKind) -> Verdict<T> {
    let v = validate_allocation(inst, x);
    match v.witness {
        Some(Witness::Allocation(defect)) => {
            let (agent, observed, bound) = match &defect {
                crate::market::AllocationDefect::Shape { .. } => (None, T::zero(), T::zero()),
                crate::market::AllocationDefect::NegativeEntry { agent, value, .. } => {
                    (Some(*agent), value.clone(), T::zero())
                }
                crate::market::AllocationDefect::RowSum { agent, sum, demand } => {
                    (Some(*agent), sum.clone(), demand.clone())
                }
                crate::market::AllocationDefect::ColumnSum { sum, .. } => {
                    (None, sum.clone(), T::one())
                }
            };
            Verdict::fail(Witness::Equilibrium {
                kind,
                condition: defect.condition(),
                agent,
                observed,
                bound,
                better_bundle: None,
            })
        }
        _ => Verdict::pass(),
    }
}

/// Direction-specific pieces of the two equilibrium checks.
struct Side<T> {
    kind: EquilibriumKind,
    weights: Vec<T>,
    /// Spending must stay below the level (prices) or earning above it.
    upper: bool,
}

fn check_equilibrium<T: Scalar>(
    inst: &Instance<T>,
    x: &Allocation<T>,
    tol: &ToleranceConfig<T>,
    side: Side<T>,
    best: impl Fn(usize) -> Result<BundleOptimum<T>, VerifyError>,
) -> Verdict<T> {
    assert_eq!(side.weights.len(), inst.n_items(), "vector length");
    let s = structural(inst, x, side.kind);
    if !s.holds {
        return s;
    }
    let eps = tol.eps().clone();
    let fail = |condition, agent, observed: T, bound: T, better_bundle| {
        Verdict::fail(Witness::Equilibrium {
            kind: side.kind,
            condition,
            agent: Some(agent),
            observed,
            bound,
            better_bundle,
        })
    };

    let money: Vec<T> = (0..inst.n_agents())
        .map(|i| dot(&side.weights, x.row(i)))
        .collect();
    for (i, m) in money.iter().enumerate() {
        let d = inst.demand(i).clone();
        if side.upper && !m.le_tol(&(d.clone() + eps.clone())) {
            return fail(3, i, m.clone(), d + eps, None);
        }
        if !side.upper && !m.ge_tol(&(d.clone() - eps.clone())) {
            return fail(3, i, m.clone(), d - eps, None);
        }
    }

    for (i, m) in money.iter().enumerate() {
        let opt = match best(i) {
            Ok(o) => o,
            Err(_) => return fail(4, i, m.clone(), inst.demand(i).clone(), None),
        };
        let own = dot(inst.utility_row(i), x.row(i));
        let floor = opt.value.clone() - eps.clone() * inst.utility_range(i);
        if !own.ge_tol(&floor) {
            return fail(4, i, own, floor, Some(opt.bundle));
        }
        let ok = if side.upper {
            m.le_tol(&(opt.secondary.clone() + eps.clone()))
        } else {
            m.ge_tol(&(opt.secondary.clone() - eps.clone()))
        };
        if !ok {
            let bound = if side.upper {
                opt.secondary + eps.clone()
            } else {
                opt.secondary - eps.clone()
            };
            return fail(4, i, m.clone(), bound, Some(opt.bundle));
        }
    }
    Verdict::pass()
}

/// Checks the four HZ conditions: agents matched, items matched, no
/// overspending, and a cheapest optimal bundle for every agent.
pub fn check_hz_equilibrium<T: Scalar>(
    inst: &Instance<T>,
    x: &Allocation<T>,
    prices: &PriceVector<T>,
    tol: &ToleranceConfig<T>,
) -> Verdict<T> {
    let side = Side {
        kind: EquilibriumKind::Prices,
        weights: prices.values().to_vec(),
        upper: true,
    };
    check_equilibrium(inst, x, tol, side, |i| {
        best_affordable_bundle(inst, i, prices)
    })
}

/// Earnings mirror: no agent under-earns and every agent holds a
/// highest-earning optimal bundle.
pub fn check_earnings_equilibrium<T: Scalar>(
    inst: &Instance<T>,
    x: &Allocation<T>,
    earnings: &EarningsVector<T>,
    tol: &ToleranceConfig<T>,
) -> Verdict<T> {
    let side = Side {
        kind: EquilibriumKind::Earnings,
        weights: earnings.values().to_vec(),
        upper: false,
    };
    check_equilibrium(inst, x, tol, side, |i| {
        best_earning_bundle(inst, i, earnings)
    })
}
