use crate::lp::{solve_lp, Relation, Sense};
use crate::market::{fpm_program, Allocation, Instance};
use crate::scalar::Scalar;
use crate::verify::{check_envy_free, check_pareto_optimal};

use super::SolverError;

/// Maximizes utilitarian welfare over the envy-free allocations, envy being
/// measured per unit of demand.
///
/// The EF rows are written with cleared denominators,
/// `d_k * u_i·x_i >= d_i * u_i·x_k`, so the LP never divides.
pub fn solve_welfare_max_ef<T: Scalar>(inst: &Instance<T>) -> Result<Allocation<T>, SolverError> {
    let (na, ni) = (inst.n_agents(), inst.n_items());
    let mut lp = fpm_program(inst, 0, Sense::Maximize);
    lp.set_objective(inst.utilities().iter().flatten().cloned().collect());
    for i in 0..na {
        let u = inst.utility_row(i);
        for k in (0..na).filter(|&k| k != i) {
            let mut coeffs = vec![T::zero(); na * ni];
            for j in 0..ni {
                coeffs[i * ni + j] = inst.demand(k).clone() * u[j].clone();
                coeffs[k * ni + j] = -(inst.demand(i).clone() * u[j].clone());
            }
            lp.add_constraint(coeffs, Relation::Ge, T::zero());
        }
    }

    let proportional = inst.proportional_allocation().flatten();
    if !lp.is_feasible_point(&proportional) {
        return Err(SolverError::Postcondition(
            "proportional allocation violates the EF program".into(),
        ));
    }

    let sol = solve_lp(&lp);
    if !sol.is_optimal() {
        return Err(SolverError::Postcondition(format!(
            "EF welfare program returned {:?}",
            sol.status
        )));
    }
    let x = Allocation::from_flat(&sol.x, na, ni);
    debug_assert!(check_envy_free(inst, &x).holds);
    Ok(x)
}

/// EF+PO allocation for two agent types via the welfare-max EF program.
///
/// With two agents, any Pareto improvement over an EF allocation is again
/// EF, so the EF welfare optimum is Pareto-optimal. The claim is re-checked
/// with the exact PO program before returning.
pub fn solve_two_type_ef_po<T: Scalar>(inst: &Instance<T>) -> Result<Allocation<T>, SolverError> {
    if inst.n_agents() != 2 {
        return Err(SolverError::WrongArity {
            expected: 2,
            got: inst.n_agents(),
        });
    }
    let x = solve_welfare_max_ef(inst)?;
    if !check_pareto_optimal(inst, &x).holds {
        return Err(SolverError::Postcondition(
            "two-type EF optimum is not Pareto-optimal".into(),
        ));
    }
    Ok(x)
}

/// Expansion of a contracted instance whose agents stand for `d_i` identical
/// unit-demand agents each.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeExpansion<T> {
    pub instance: Instance<T>,
    /// `owner[a]` is the contracted agent that expanded agent `a` belongs to.
    pub owner: Vec<usize>,
    /// Demands of the contracted agents.
    pub counts: Vec<T>,
}

impl<T: Scalar> TypeExpansion<T> {
    /// Splits every contracted bundle into `d_i` equal shares.
    pub fn expand_allocation(&self, contracted: &Allocation<T>) -> Allocation<T> {
        Allocation::from_rows(
            self.owner
                .iter()
                .map(|&t| {
                    contracted
                        .row(t)
                        .iter()
                        .map(|v| v.clone() / self.counts[t].clone())
                        .collect()
                })
                .collect(),
        )
    }
}

pub fn expand_types<T: Scalar>(inst: &Instance<T>) -> Result<TypeExpansion<T>, SolverError> {
    let mut owner = Vec::new();
    let mut rows = Vec::new();
    for (agent, d) in inst.demands().iter().enumerate() {
        let exact = d.to_rational();
        if !exact.is_integer() {
            return Err(SolverError::NonIntegerDemand {
                agent,
                demand: d.to_string(),
            });
        }
        let count: usize = exact
            .to_integer()
            .try_into()
            .map_err(|_| SolverError::NonIntegerDemand {
                agent,
                demand: d.to_string(),
            })?;
        for _ in 0..count {
            owner.push(agent);
            rows.push(inst.utility_row(agent).to_vec());
        }
    }
    let instance = Instance::new(rows, None)
        .map_err(|e| SolverError::Postcondition(format!("expanded instance invalid: {e}")))?;
    debug_assert!(instance.demands().iter().all(|d| d.eq_tol(&T::one())));
    Ok(TypeExpansion {
        instance,
        owner,
        counts: inst.demands().to_vec(),
    })
}
