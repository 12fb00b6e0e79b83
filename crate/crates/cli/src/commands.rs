use std::path::Path;

use manna::solvers::{
    expand_types, find_hz_equilibrium_grid, solve_min_disutility_product,
    solve_nash_bargaining_goods, solve_pareto_constrained_nb, solve_two_type_ef_po,
    solve_welfare_max_ef, ChoresGridConfig, ChoresOutcome, GridConfig, NbConfig,
};
use manna::transforms::{
    earnings_to_prices, normalize_prices_zero_min, prices_to_earnings,
    reduce_bivalued_to_dichotomous, shift_utilities,
};
use manna::verify::{
    check_earnings_equilibrium, check_envy_free, check_hz_equilibrium, check_pareto_optimal,
    ToleranceConfig,
};
use manna::{Allocation, Instance, Rational, Scalar, ShiftSpec};
use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::args::{CheckKind, Command, SolveKind, TransformKind};
use crate::demo;
use crate::error::CliError;
use crate::format::{
    read_file, to_json, AllocationFile, EarningsFile, InstanceFile, PricesFile,
};
use crate::report::{allocation_json, q, Names, Report};

/// Result of one command: what to print, what to write under `--out`, and
/// the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    /// `(file name, contents)`; the report itself is added by the caller.
    pub files: Vec<(String, String)>,
    /// Printed when no output directory is given.
    pub stdout: String,
    pub exit: u8,
}

impl Outcome {
    fn report_only(report: Report, exit: u8) -> Self {
        Outcome {
            stdout: report.to_json(),
            report,
            files: Vec::new(),
            exit,
        }
    }
}

struct Loaded {
    file: InstanceFile,
    inst: Instance<Rational>,
    names: Names,
}

fn load_instance(path: &Path) -> Result<Loaded, CliError> {
    let file: InstanceFile = read_file(path)?;
    let inst = file.to_instance(path)?;
    Ok(Loaded {
        names: Names::of(&file),
        file,
        inst,
    })
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Validate { instance } => validate(instance),
        Command::Check {
            kind,
            instance,
            allocation,
            vector,
            eps,
        } => check(*kind, instance, allocation, vector.as_deref(), eps),
        Command::Solve {
            kind,
            instance,
            eps,
            delta,
            cap,
            tolerance,
            max_iters,
        } => {
            let opts = SolveOptions {
                eps: eps.clone(),
                delta: delta.clone(),
                cap: cap.clone(),
                tolerance: *tolerance,
                max_iters: *max_iters,
            };
            solve(*kind, instance, &opts)
        }
        Command::Transform { kind, input, c, a } => transform(*kind, input, c.as_ref().map(|l| l.0.as_slice()), a.as_ref()),
        Command::Demo { which, param, delta } => demo::run(*which, param.as_ref(), delta.as_ref()),
    }
}

fn validate(path: &Path) -> Result<Outcome, CliError> {
    let l = load_instance(path)?;
    let mut report = Report::new("validate").with_instance(&l.file);
    let sign = if l.inst.all_nonnegative() {
        "goods"
    } else if l.inst.all_nonpositive() {
        "chores"
    } else {
        "mixed"
    };
    report.result("agents", json!(l.inst.n_agents()));
    report.result("items", json!(l.inst.n_items()));
    report.result("demands", json!(l.inst.demands().iter().map(q).collect::<Vec<_>>()));
    report.result("unit_demands", json!(l.inst.has_unit_demands()));
    report.result("sign", json!(sign));
    Ok(Outcome::report_only(report, 0))
}

fn tolerance(eps: &Rational) -> Result<ToleranceConfig<Rational>, CliError> {
    Ok(ToleranceConfig::new(eps.clone())?)
}

fn check(
    kind: CheckKind,
    inst_path: &Path,
    alloc_path: &Path,
    vector: Option<&Path>,
    eps: &Rational,
) -> Result<Outcome, CliError> {
    let l = load_instance(inst_path)?;
    let af: AllocationFile = read_file(alloc_path)?;
    let x = af.to_allocation(&l.inst, alloc_path)?;
    let tol = tolerance(eps)?;
    let need = |what: &str| {
        vector.ok_or_else(|| CliError::Usage(format!("check {what} needs a vector file")))
    };
    let mut report = Report::new(format!("check {}", check_name(kind))).with_instance(&l.file);
    let verdict = match kind {
        CheckKind::Ef => check_envy_free(&l.inst, &x),
        CheckKind::Po => check_pareto_optimal(&l.inst, &x),
        CheckKind::Hz => {
            let path = need("hz")?;
            let p = read_file::<PricesFile>(path)?.to_vector(path)?;
            dimension(&l.inst, p.len(), path)?;
            report.result("eps", json!(q(eps)));
            check_hz_equilibrium(&l.inst, &x, &p, &tol)
        }
        CheckKind::Earnings => {
            let path = need("earnings")?;
            let e = read_file::<EarningsFile>(path)?.to_vector(path)?;
            dimension(&l.inst, e.len(), path)?;
            report.result("eps", json!(q(eps)));
            check_earnings_equilibrium(&l.inst, &x, &e, &tol)
        }
    };
    report.verdict(check_name(kind), &verdict, &l.names);
    report.describe(&l.inst, &x, &l.names);
    let exit = if verdict.holds { 0 } else { 1 };
    Ok(Outcome::report_only(report, exit))
}

fn check_name(kind: CheckKind) -> &'static str {
    match kind {
        CheckKind::Ef => "ef",
        CheckKind::Po => "po",
        CheckKind::Hz => "hz",
        CheckKind::Earnings => "earnings",
    }
}

fn dimension(inst: &Instance<Rational>, len: usize, path: &Path) -> Result<(), CliError> {
    if len != inst.n_items() {
        return Err(CliError::Shape {
            path: path.to_path_buf(),
            message: format!("vector has {len} entries for {} items", inst.n_items()),
        });
    }
    Ok(())
}

pub struct SolveOptions {
    pub eps: Rational,
    pub delta: Option<Rational>,
    pub cap: Option<Rational>,
    pub tolerance: f64,
    pub max_iters: usize,
}

/// Grid steps per unit for a step of `delta`, which must be `1/k`.
pub fn steps_of(delta: &Rational) -> Result<u64, CliError> {
    if delta.is_zero() || delta.is_negative() || !delta.numer().is_one() {
        return Err(CliError::Usage(format!(
            "--delta must be 1/k for a positive integer k, got {}",
            q(delta)
        )));
    }
    u64::try_from(delta.denom().clone())
        .map_err(|_| CliError::Usage("--delta is too fine".into()))
}

fn solve_name(kind: SolveKind) -> &'static str {
    match kind {
        SolveKind::WelfareEf => "welfare-ef",
        SolveKind::TwoType => "two-type",
        SolveKind::Nb => "nb",
        SolveKind::MinProduct => "min-product",
        SolveKind::Pcnb => "pcnb",
        SolveKind::GridHz => "grid-hz",
    }
}

fn chores_results(report: &mut Report, out: &ChoresOutcome<Rational>) {
    report.result("product", json!(q(&out.product)));
    report.result("steps", json!(out.steps));
    report.result("grid_points", json!(out.grid_points));
}

fn solve(kind: SolveKind, path: &Path, opts: &SolveOptions) -> Result<Outcome, CliError> {
    let l = load_instance(path)?;
    let inst = &l.inst;
    let mut report = Report::new(format!("solve {}", solve_name(kind))).with_instance(&l.file);
    let mut files = Vec::new();
    let chores_cfg = || -> Result<ChoresGridConfig, CliError> {
        let delta = opts.delta.clone().unwrap_or_else(|| Rational::ratio(1, 100));
        Ok(ChoresGridConfig {
            steps: steps_of(&delta)?,
            ..ChoresGridConfig::default()
        })
    };

    let x: Allocation<Rational> = match kind {
        SolveKind::WelfareEf => solve_welfare_max_ef(inst)?,
        SolveKind::TwoType => {
            let x = solve_two_type_ef_po(inst)?;
            if let Ok(e) = expand_types(inst) {
                let big = e.expand_allocation(&x);
                report.verdict("expanded_ef", &check_envy_free(&e.instance, &big), &Names {
                    agents: e.owner.iter().map(|&t| l.names.agent(t)).collect(),
                    items: l.names.items.clone(),
                });
                report.result("expanded_allocation", allocation_json(&big));
            }
            x
        }
        SolveKind::Nb => {
            let cfg = NbConfig {
                tolerance: opts.tolerance,
                max_iters: opts.max_iters,
            };
            let out = solve_nash_bargaining_goods(inst, &cfg)?;
            let bound = opts.tolerance * inst.n_agents() as f64;
            report.result("product", json!(q(&out.product)));
            report.result("nash_product_f64", json!(out.nash_product));
            report.result("duality_gap", json!(out.duality_gap));
            report.result("iterations", json!(out.iterations));
            report.result("converged", json!(out.converged));
            report.result(
                "excluded_agents",
                json!(out.excluded_agents.iter().map(|&i| l.names.agent(i)).collect::<Vec<_>>()),
            );
            report.result("po_slack", json!(q(&out.po_slack)));
            report.result("po_slack_within_bound", json!(out.po_slack.to_f64() <= bound));
            out.allocation
        }
        SolveKind::MinProduct => {
            let out = solve_min_disutility_product(inst, &chores_cfg()?)?;
            chores_results(&mut report, &out);
            out.allocation
        }
        SolveKind::Pcnb => {
            let out = solve_pareto_constrained_nb(inst, &chores_cfg()?)?;
            chores_results(&mut report, &out);
            out.allocation
        }
        SolveKind::GridHz => {
            let cfg = GridConfig {
                delta: opts.delta.clone().unwrap_or_else(|| Rational::ratio(1, 4)),
                price_cap: opts.cap.clone(),
                eps: opts.eps.clone(),
                ..GridConfig::default()
            };
            let eq = find_hz_equilibrium_grid(inst, &cfg)?;
            let tol = tolerance(&opts.eps)?;
            let conv = prices_to_earnings(&eq.prices);
            report.verdict("hz", &check_hz_equilibrium(inst, &eq.allocation, &eq.prices, &tol), &l.names);
            report.verdict(
                "earnings",
                &check_earnings_equilibrium(inst, &eq.allocation, &conv.vector, &tol),
                &l.names,
            );
            report.result("eps", json!(q(&opts.eps)));
            report.result("prices", json!(eq.prices.values().iter().map(q).collect::<Vec<_>>()));
            report.result("earnings", json!(conv.vector.values().iter().map(q).collect::<Vec<_>>()));
            report.result("earnings_degenerate", json!(conv.degenerate));
            report.result("zero_item", json!(l.names.item(eq.zero_item)));
            report.result("cells_examined", json!(eq.cells_examined));
            files.push(("prices.json".to_string(), to_json(&PricesFile::from_vector(&eq.prices))));
            files.push((
                "earnings.json".to_string(),
                to_json(&EarningsFile::from_vector(&conv.vector)),
            ));
            eq.allocation
        }
    };

    report.verdict("ef", &check_envy_free(inst, &x), &l.names);
    report.verdict("po", &check_pareto_optimal(inst, &x), &l.names);
    report.result("allocation", allocation_json(&x));
    report.describe(inst, &x, &l.names);
    files.push(("allocation.json".to_string(), to_json(&AllocationFile::from_allocation(&x))));
    Ok(Outcome {
        stdout: report.to_json(),
        report,
        files,
        exit: 0,
    })
}

fn transform(
    kind: TransformKind,
    path: &Path,
    c: Option<&[Rational]>,
    a: Option<&Rational>,
) -> Result<Outcome, CliError> {
    let mut report = Report::new(format!("transform {}", transform_name(kind)));
    let mut files = Vec::new();
    let primary = match kind {
        TransformKind::Shift | TransformKind::Scale | TransformKind::Dichotomize => {
            let l = load_instance(path)?;
            report = report.with_instance(&l.file);
            let n = l.inst.n_agents();
            let out = match kind {
                TransformKind::Shift => {
                    let shifts = c
                        .ok_or_else(|| CliError::Usage("transform shift needs --c".into()))?
                        .to_vec();
                    let scale = a.cloned().unwrap_or_else(Rational::one);
                    shift_utilities(&l.inst, &ShiftSpec { shifts, scale })?
                }
                TransformKind::Scale => {
                    let scale = a
                        .cloned()
                        .ok_or_else(|| CliError::Usage("transform scale needs --a".into()))?;
                    let shifts = vec![Rational::zero(); n];
                    shift_utilities(&l.inst, &ShiftSpec { shifts, scale })?
                }
                _ => {
                    let (red, records) = reduce_bivalued_to_dichotomous(&l.inst)?;
                    let recs: Vec<_> = records
                        .iter()
                        .enumerate()
                        .map(|(i, r)| {
                            json!({
                                "agent": l.names.agent(i),
                                "low": q(&r.low),
                                "span": r.span.as_ref().map(q),
                            })
                        })
                        .collect();
                    files.push(("records.json".to_string(), to_json(&json!({ "records": recs }))));
                    report.result("records", json!(recs));
                    red
                }
            };
            let file = InstanceFile::from_instance(&out, l.file.agents.clone(), l.file.items.clone());
            report.result("instance", serde_json::to_value(&file).expect("serializable"));
            let text = to_json(&file);
            files.push(("instance.json".to_string(), text.clone()));
            text
        }
        TransformKind::ToEarnings => {
            let p = read_file::<PricesFile>(path)?.to_vector(path)?;
            let conv = prices_to_earnings(&p);
            report.result("degenerate", json!(conv.degenerate));
            let text = to_json(&EarningsFile::from_vector(&conv.vector));
            files.push(("earnings.json".to_string(), text.clone()));
            text
        }
        TransformKind::ToPrices => {
            let e = read_file::<EarningsFile>(path)?.to_vector(path)?;
            let conv = earnings_to_prices(&e);
            report.result("degenerate", json!(conv.degenerate));
            let text = to_json(&PricesFile::from_vector(&conv.vector));
            files.push(("prices.json".to_string(), text.clone()));
            text
        }
        TransformKind::Normalize => {
            let p = read_file::<PricesFile>(path)?.to_vector(path)?;
            let text = to_json(&PricesFile::from_vector(&normalize_prices_zero_min(&p)?));
            files.push(("prices.json".to_string(), text.clone()));
            text
        }
    };
    Ok(Outcome {
        report,
        files,
        stdout: primary,
        exit: 0,
    })
}

fn transform_name(kind: TransformKind) -> &'static str {
    match kind {
        TransformKind::Shift => "shift",
        TransformKind::Scale => "scale",
        TransformKind::Dichotomize => "dichotomize",
        TransformKind::ToEarnings => "to-earnings",
        TransformKind::ToPrices => "to-prices",
        TransformKind::Normalize => "normalize",
    }
}
