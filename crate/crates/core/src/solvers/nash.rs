//! Nash bargaining for goods: maximize `Σ_i log(u_i·x_i)` over the
//! fractional perfect matchings.
//!
//! The iterate is kept as a convex combination of polytope vertices
//! (away-step Frank–Wolfe). Vertices come from the exact LP, so the final
//! allocation, rebuilt from rationalized weights, is an exact allocation.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::lp::{solve_lp, Sense};
use crate::market::{fpm_program, Allocation, Instance};
use crate::scalar::{dot, Rational, Scalar};
use crate::verify::pareto_improvement;

use super::SolverError;

#[derive(Debug, Clone, PartialEq)]
pub struct NbConfig {
    /// Stop once the Frank–Wolfe duality gap is at most this.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for NbConfig {
    fn default() -> Self {
        NbConfig {
            tolerance: 1e-9,
            max_iters: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NbOutcome {
    pub allocation: Allocation<Rational>,
    pub float_allocation: Allocation<f64>,
    /// `Π u_i·x_i` over the included agents, exact.
    pub product: Rational,
    pub nash_product: f64,
    /// Gap certificate at the last iterate: the optimum of the log objective
    /// exceeds the iterate's value by at most this much.
    pub duality_gap: f64,
    pub iterations: usize,
    /// Agents whose every utility is zero; they are left out of the
    /// objective and receive whatever the others leave.
    pub excluded_agents: Vec<usize>,
    pub converged: bool,
    /// Largest total utility gain of any Pareto improvement over the result.
    pub po_slack: Rational,
}

/// Dyadic rounding so the oracle LP stays small in exact arithmetic.
fn dyadic(v: f64) -> Rational {
    let scale = (1u64 << 40) as f64;
    Rational::new(BigInt::from((v * scale).round() as i64), BigInt::from(1u64 << 40))
}

struct Vertex {
    exact: Vec<Rational>,
    float: Vec<f64>,
}

fn oracle(inst: &Instance<Rational>, objective: Vec<Rational>) -> Vertex {
    let mut lp = fpm_program(inst, 0, Sense::Maximize);
    lp.set_objective(objective);
    let sol = solve_lp(&lp);
    assert!(sol.is_optimal(), "the matching polytope is nonempty and bounded");
    Vertex {
        float: sol.x.iter().map(Scalar::to_f64).collect(),
        exact: sol.x,
    }
}

/// `Σ_i b_i / (a_i + γ b_i)`, with `-∞` once some utility reaches zero.
fn slope(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let mut s = 0.0;
    for (ai, bi) in a.iter().zip(b) {
        let den = ai + gamma * bi;
        if den <= 0.0 {
            return f64::NEG_INFINITY;
        }
        s += bi / den;
    }
    s
}

fn line_search(a: &[f64], b: &[f64], gamma_max: f64) -> f64 {
    if slope(a, b, gamma_max) >= 0.0 {
        return gamma_max;
    }
    let (mut lo, mut hi) = (0.0, gamma_max);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if slope(a, b, mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn solve_nash_bargaining_goods<T: Scalar>(
    inst: &Instance<T>,
    cfg: &NbConfig,
) -> Result<NbOutcome, SolverError> {
    if !(cfg.tolerance > 0.0) {
        return Err(SolverError::Config(format!(
            "tolerance must be positive, got {}",
            cfg.tolerance
        )));
    }
    for (agent, row) in inst.utilities().iter().enumerate() {
        if let Some((item, u)) = row.iter().enumerate().find(|(_, u)| u.is_neg_tol()) {
            return Err(SolverError::WrongSign {
                agent,
                item,
                value: u.to_string(),
            });
        }
    }
    let exact = Instance::new(
        inst.utilities()
            .iter()
            .map(|r| r.iter().map(|u| u.to_rational()).collect())
            .collect(),
        Some(inst.demands().iter().map(|d| d.to_rational()).collect()),
    )
    .map_err(|e| SolverError::Postcondition(format!("rational copy invalid: {e}")))?;

    let (na, ni) = (exact.n_agents(), exact.n_items());
    let n = na * ni;
    let excluded: Vec<usize> = (0..na)
        .filter(|&i| exact.utility_row(i).iter().all(|u| u.is_zero()))
        .collect();
    let included: Vec<usize> = (0..na).filter(|i| !excluded.contains(i)).collect();
    let uf: Vec<Vec<f64>> = exact
        .utilities()
        .iter()
        .map(|r| r.iter().map(Scalar::to_f64).collect::<Vec<f64>>())
        .collect();
    let utility_of = |x: &[f64], i: usize| -> f64 { (0..ni).map(|j| uf[i][j] * x[i * ni + j]).sum() };

    // one vertex per included agent, maximizing that agent's utility
    let mut active: Vec<Vertex> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let starts: Vec<usize> = if included.is_empty() { vec![usize::MAX] } else { included.clone() };
    for &i in &starts {
        let mut obj = vec![Rational::zero(); n];
        if i != usize::MAX {
            obj[i * ni..(i + 1) * ni].clone_from_slice(exact.utility_row(i));
        }
        let v = oracle(&exact, obj);
        if !active.iter().any(|w| w.exact == v.exact) {
            active.push(v);
        }
    }
    weights.resize(active.len(), 1.0 / active.len() as f64);

    let combine = |active: &[Vertex], weights: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (v, w) in active.iter().zip(weights) {
            for (xk, vk) in x.iter_mut().zip(&v.float) {
                *xk += w * vk;
            }
        }
        x
    };

    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut converged = included.is_empty();
    while !converged && iterations < cfg.max_iters {
        iterations += 1;
        let x = combine(&active, &weights);
        let a: Vec<f64> = included.iter().map(|&i| utility_of(&x, i)).collect();
        let mut grad = vec![0.0; n];
        for (&i, ai) in included.iter().zip(&a) {
            for j in 0..ni {
                grad[i * ni + j] = uf[i][j] / ai;
            }
        }
        let gx: f64 = grad.iter().zip(&x).map(|(g, v)| g * v).sum();

        let s = oracle(&exact, grad.iter().map(|&g| dyadic(g)).collect());
        let gs: f64 = grad.iter().zip(&s.float).map(|(g, v)| g * v).sum();
        gap = gs - gx;
        if gap <= cfg.tolerance {
            converged = true;
            break;
        }
        let (away, gv) = active
            .iter()
            .enumerate()
            .map(|(k, v)| (k, grad.iter().zip(&v.float).map(|(g, v)| g * v).sum::<f64>()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });

        if gs - gx >= gx - gv || active.len() == 1 {
            let dir: Vec<f64> = s.float.iter().zip(&x).map(|(s, x)| s - x).collect();
            let b: Vec<f64> = included.iter().map(|&i| utility_of(&dir, i)).collect();
            let gamma = line_search(&a, &b, 1.0);
            for w in weights.iter_mut() {
                *w *= 1.0 - gamma;
            }
            match active.iter().position(|v| v.exact == s.exact) {
                Some(k) => weights[k] += gamma,
                None => {
                    active.push(s);
                    weights.push(gamma);
                }
            }
        } else {
            let wv = weights[away];
            let gamma_max = wv / (1.0 - wv);
            let dir: Vec<f64> = x
                .iter()
                .zip(&active[away].float)
                .map(|(x, v)| x - v)
                .collect();
            let b: Vec<f64> = included.iter().map(|&i| utility_of(&dir, i)).collect();
            let gamma = line_search(&a, &b, gamma_max);
            for w in weights.iter_mut() {
                *w *= 1.0 + gamma;
            }
            weights[away] -= gamma;
        }
        let mut k = 0;
        while k < active.len() {
            if weights[k] <= 1e-15 {
                active.swap_remove(k);
                weights.swap_remove(k);
            } else {
                k += 1;
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
    }

    // exact convex combination with integer weights over 2^32
    let denom: i64 = 1 << 32;
    let mut ints: Vec<i64> = weights.iter().map(|w| (w * denom as f64).round() as i64).collect();
    let top = (0..ints.len()).max_by(|&p, &q| weights[p].total_cmp(&weights[q])).unwrap();
    let rest: i64 = ints.iter().enumerate().filter(|&(k, _)| k != top).map(|(_, v)| v).sum();
    ints[top] = denom - rest;
    let mut flat = vec![Rational::zero(); n];
    for (v, &w) in active.iter().zip(&ints) {
        if w == 0 {
            continue;
        }
        let wr = Rational::ratio(w, denom);
        for (fk, vk) in flat.iter_mut().zip(&v.exact) {
            *fk += wr.clone() * vk.clone();
        }
    }
    let allocation = Allocation::from_flat(&flat, na, ni);

    let mut product = Rational::from_int(1);
    for &i in &included {
        product *= dot(exact.utility_row(i), allocation.row(i));
    }
    let (po_slack, _) = pareto_improvement(&exact, &allocation);

    Ok(NbOutcome {
        float_allocation: allocation.map(Scalar::to_f64),
        nash_product: Scalar::to_f64(&product),
        product,
        allocation,
        duality_gap: if included.is_empty() { 0.0 } else { gap },
        iterations,
        excluded_agents: excluded,
        converged,
        po_slack,
    })
}
