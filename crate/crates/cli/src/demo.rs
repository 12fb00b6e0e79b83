//! The two chores counterexamples. In both, agent `i` faces chores `j` and
//! `j'`, agent `i'` only dislikes `j'`, and `t = x_{i j'}` parametrizes every
//! allocation.

use manna::solvers::{
    solve_min_disutility_product, solve_pareto_constrained_nb, solve_welfare_max_ef,
    ChoresGridConfig, ChoresOutcome,
};
use manna::verify::check_pareto_optimal;
use manna::{envy_report, Allocation, Instance, Rational, Scalar};
use num_traits::{One, Zero};
use serde_json::json;

use crate::args::DemoKind;
use crate::commands::{steps_of, Outcome};
use crate::error::CliError;
use crate::format::{to_json, AllocationFile, InstanceFile};
use crate::report::{allocation_json, curve_csv, q, CurveRow, Names, Report, VerdictEntry};

/// `u_i = (-1, -c)`, `u_{i'} = (0, -1)`.
pub fn instance(c: &Rational) -> Instance<Rational> {
    Instance::unit(vec![
        vec![-Rational::one(), -c.clone()],
        vec![Rational::zero(), -Rational::one()],
    ])
    .expect("two agents, two items")
}

fn names() -> Names {
    Names {
        agents: vec!["i".into(), "i'".into()],
        items: vec!["j".into(), "j'".into()],
    }
}

pub fn at(t: &Rational) -> Allocation<Rational> {
    let s = Rational::one() - t.clone();
    Allocation::from_rows(vec![vec![s.clone(), t.clone()], vec![t.clone(), s]])
}

pub fn t_of(x: &Allocation<Rational>) -> Rational {
    x.get(0, 1).clone()
}

fn disutility_product(inst: &Instance<Rational>, x: &Allocation<Rational>) -> Rational {
    (0..2)
        .map(|i| {
            -inst
                .utility_row(i)
                .iter()
                .zip(x.row(i))
                .map(|(u, v)| u * v)
                .sum::<Rational>()
        })
        .product()
}

pub fn curve(inst: &Instance<Rational>, steps: u64) -> Vec<CurveRow> {
    (0..=steps)
        .map(|k| {
            let t = Rational::ratio(k as i64, steps as i64);
            let x = at(&t);
            CurveRow {
                t: q(&t),
                objective: q(&disutility_product(inst, &x)),
                envy_gap: q(&envy_report(inst, &x).additive_gap),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1 {
    pub instance: Instance<Rational>,
    pub outcome: ChoresOutcome<Rational>,
    pub t: Rational,
    /// Envy ratio of `i` toward `i'`; `None` if unbounded or absent.
    pub envy_factor: Option<Rational>,
    pub pareto_optimal: bool,
}

pub fn fig1(c: &Rational, steps: u64) -> Result<Fig1, CliError> {
    if *c <= Rational::one() {
        return Err(CliError::Usage(format!("fig1 needs C > 1, got {}", q(c))));
    }
    let instance = instance(c);
    let cfg = ChoresGridConfig {
        steps,
        ..ChoresGridConfig::default()
    };
    let outcome = solve_min_disutility_product(&instance, &cfg)?;
    let t = t_of(&outcome.allocation);
    let envy_factor = match outcome.envy.worst_pair {
        Some((0, 1)) => outcome.envy.multiplicative_ratio.clone(),
        _ => None,
    };
    let pareto_optimal = check_pareto_optimal(&instance, &outcome.allocation).holds;
    Ok(Fig1 {
        instance,
        outcome,
        t,
        envy_factor,
        pareto_optimal,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2 {
    pub instance: Instance<Rational>,
    pub outcome: ChoresOutcome<Rational>,
    pub t: Rational,
    /// Welfare-maximizing EF allocation on the same instance.
    pub ef_alternative: Allocation<Rational>,
    pub ef_alternative_po: bool,
}

pub fn fig2(steps: u64) -> Result<Fig2, CliError> {
    let instance = instance(&Rational::from_int(2));
    let cfg = ChoresGridConfig {
        steps,
        ..ChoresGridConfig::default()
    };
    let outcome = solve_pareto_constrained_nb(&instance, &cfg)?;
    let t = t_of(&outcome.allocation);
    let ef_alternative = solve_welfare_max_ef(&instance)?;
    let ef_alternative_po = check_pareto_optimal(&instance, &ef_alternative).holds;
    Ok(Fig2 {
        instance,
        outcome,
        t,
        ef_alternative,
        ef_alternative_po,
    })
}

fn claim(report: &mut Report, check: &str, holds: bool) {
    report.verdicts.push(VerdictEntry {
        check: check.to_string(),
        holds,
        witness: None,
    });
}

pub fn run(which: DemoKind, param: Option<&Rational>, delta: Option<&Rational>) -> Result<Outcome, CliError> {
    let steps = steps_of(&delta.cloned().unwrap_or_else(|| Rational::ratio(1, 100)))?;
    let names = names();
    let (mut report, inst, x) = match which {
        DemoKind::Fig1 => {
            let c = param
                .cloned()
                .ok_or_else(|| CliError::Usage("demo fig1 needs --param C".into()))?;
            let f = fig1(&c, steps)?;
            let mut report = Report::new("demo fig1");
            report.result("param", json!(q(&c)));
            report.result("optimizer_t", json!(q(&f.t)));
            report.result("product", json!(q(&f.outcome.product)));
            report.result("envy_factor", json!(f.envy_factor.as_ref().map(q)));
            claim(&mut report, "optimizer_at_t_1", f.t == Rational::one());
            claim(&mut report, "envy_factor_equals_param", f.envy_factor.as_ref() == Some(&c));
            claim(&mut report, "po", f.pareto_optimal);
            (report, f.instance, f.outcome.allocation)
        }
        DemoKind::Fig2 => {
            if param.is_some() {
                return Err(CliError::Usage("demo fig2 takes no --param".into()));
            }
            let f = fig2(steps)?;
            let mut report = Report::new("demo fig2");
            report.result("optimizer_t", json!(q(&f.t)));
            report.result("product", json!(q(&f.outcome.product)));
            report.result("additive_envy_gap", json!(q(&f.outcome.envy.additive_gap)));
            report.result("ef_alternative_t", json!(q(&t_of(&f.ef_alternative))));
            report.result("ef_alternative", allocation_json(&f.ef_alternative));
            claim(&mut report, "optimizer_at_t_0", f.t.is_zero());
            claim(&mut report, "product_is_1", f.outcome.product == Rational::one());
            claim(&mut report, "additive_gap_is_1", f.outcome.envy.additive_gap == Rational::one());
            claim(
                &mut report,
                "ef_alternative_at_half",
                t_of(&f.ef_alternative) == Rational::ratio(1, 2),
            );
            claim(&mut report, "ef_alternative_po", f.ef_alternative_po);
            (report, f.instance, f.outcome.allocation)
        }
    };
    let file = InstanceFile::from_instance(&inst, names.agents.clone(), names.items.clone());
    report = report.with_instance(&file);
    report.result("allocation", allocation_json(&x));
    report.describe(&inst, &x, &names);
    let rows = curve(&inst, steps);
    let csv = curve_csv(&rows);
    report.curve = Some(rows);
    let exit = if report.all_hold() { 0 } else { 1 };
    Ok(Outcome {
        stdout: report.to_json(),
        files: vec![
            ("curve.csv".to_string(), csv),
            ("instance.json".to_string(), to_json(&file)),
            ("allocation.json".to_string(), to_json(&AllocationFile::from_allocation(&x))),
        ],
        report,
        exit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_objectives() {
        let c = Rational::from_int(10);
        let inst = instance(&c);
        for k in 0..=20 {
            let t = Rational::ratio(k, 20);
            let one = Rational::one();
            let expect = (c.clone() * t.clone() + one.clone() - t.clone()) * (one - t.clone());
            assert_eq!(disutility_product(&inst, &at(&t)), expect);
        }
        let rows = curve(&instance(&Rational::from_int(2)), 4);
        assert_eq!(rows[0].objective, "1/1");
        assert_eq!(rows[2].objective, "3/4");
        assert_eq!(rows[4].objective, "0/1");
    }

    #[test]
    fn figures() {
        for c in [2, 10, 100] {
            let f = fig1(&Rational::from_int(c), 100).unwrap();
            assert_eq!(f.t, Rational::one());
            assert_eq!(f.envy_factor, Some(Rational::from_int(c)));
        }
        let f = fig2(100).unwrap();
        assert!(f.t.is_zero());
        assert_eq!(t_of(&f.ef_alternative), Rational::ratio(1, 2));
    }

    #[test]
    fn fig1_rejects_small_param() {
        assert!(matches!(fig1(&Rational::one(), 10), Err(CliError::Usage(_))));
    }
}
