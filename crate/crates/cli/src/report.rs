//! JSON reports. Field order is fixed by the struct definitions and maps
//! are sorted, so identical runs produce identical bytes.

use std::collections::BTreeMap;

use manna::{
    bundle_utility, envy_report, format_rational, AllocationDefect, Allocation, EquilibriumKind,
    Instance, Rational, Verdict, Witness,
};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::format::{to_json, InstanceFile};

pub fn q(r: &Rational) -> String {
    format_rational(r)
}

fn qs(v: &[Rational]) -> Vec<String> {
    v.iter().map(q).collect()
}

pub fn allocation_json(x: &Allocation<Rational>) -> Value {
    json!(x.rows().iter().map(|r| qs(r)).collect::<Vec<_>>())
}

/// SHA-256 of the canonical serialization, so formatting of the input file
/// does not change the digest.
pub fn instance_digest(file: &InstanceFile) -> String {
    let digest = Sha256::digest(to_json(file).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictEntry {
    pub check: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentLine {
    pub agent: String,
    pub utility: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvySummary {
    pub envy_free: bool,
    pub worst_pair: Option<(String, String)>,
    pub additive_gap: String,
    /// `None` when there is no envy or the ratio is unbounded.
    pub multiplicative_ratio: Option<String>,
    /// `table[i][k] = u_i·x_k / d_k`
    pub table: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub t: String,
    pub objective: String,
    pub envy_gap: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_sha256: Option<String>,
    pub verdicts: Vec<VerdictEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<AgentLine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envy: Option<EnvySummary>,
    pub results: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<CurveRow>>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            instance_sha256: None,
            verdicts: Vec::new(),
            agents: Vec::new(),
            envy: None,
            results: BTreeMap::new(),
            curve: None,
        }
    }

    pub fn with_instance(mut self, file: &InstanceFile) -> Self {
        self.instance_sha256 = Some(instance_digest(file));
        self
    }

    pub fn verdict(&mut self, check: &str, v: &Verdict<Rational>, names: &Names) {
        self.verdicts.push(VerdictEntry {
            check: check.to_string(),
            holds: v.holds,
            witness: v.witness.as_ref().map(|w| witness_json(w, names)),
        });
    }

    pub fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    /// Per-agent utilities and the envy table for `x`.
    pub fn describe(&mut self, inst: &Instance<Rational>, x: &Allocation<Rational>, names: &Names) {
        self.agents = (0..inst.n_agents())
            .map(|i| AgentLine {
                agent: names.agent(i),
                utility: q(&bundle_utility(inst, i, x.row(i)).expect("allocation shape matches")),
            })
            .collect();
        let rep = envy_report(inst, x);
        self.envy = Some(EnvySummary {
            envy_free: rep.envy_free,
            worst_pair: rep.worst_pair.filter(|_| !rep.envy_free).map(|(i, k)| (names.agent(i), names.agent(k))),
            additive_gap: q(&rep.additive_gap),
            multiplicative_ratio: rep.multiplicative_ratio.as_ref().map(q),
            table: rep.table.iter().map(|r| qs(r)).collect(),
        });
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Agent and item names for messages.
#[derive(Debug, Clone, PartialEq)]
pub struct Names {
    pub agents: Vec<String>,
    pub items: Vec<String>,
}

impl Names {
    pub fn of(file: &InstanceFile) -> Self {
        Names {
            agents: file.agents.clone(),
            items: file.items.clone(),
        }
    }

    pub fn agent(&self, i: usize) -> String {
        self.agents.get(i).cloned().unwrap_or_else(|| format!("a{i}"))
    }

    pub fn item(&self, j: usize) -> String {
        self.items.get(j).cloned().unwrap_or_else(|| format!("g{j}"))
    }
}

pub fn witness_json(w: &Witness<Rational>, names: &Names) -> Value {
    match w {
        Witness::Allocation(d) => match d {
            AllocationDefect::Shape { agents, items } => {
                json!({"kind": "shape", "agents": agents, "items": items})
            }
            AllocationDefect::NegativeEntry { agent, item, value } => json!({
                "kind": "negative_entry",
                "agent": names.agent(*agent),
                "item": names.item(*item),
                "value": q(value),
            }),
            AllocationDefect::RowSum { agent, sum, demand } => json!({
                "kind": "row_sum",
                "agent": names.agent(*agent),
                "sum": q(sum),
                "demand": q(demand),
            }),
            AllocationDefect::ColumnSum { item, sum } => json!({
                "kind": "column_sum",
                "item": names.item(*item),
                "sum": q(sum),
            }),
        },
        Witness::Envy {
            envier,
            envied,
            own_value,
            other_value,
        } => json!({
            "kind": "envy",
            "envier": names.agent(*envier),
            "envied": names.agent(*envied),
            "own_value": q(own_value),
            "other_value": q(other_value),
        }),
        Witness::ParetoImprovement {
            allocation,
            improvement,
        } => json!({
            "kind": "pareto_improvement",
            "allocation": allocation_json(allocation),
            "improvement": q(improvement),
        }),
        Witness::Equilibrium {
            kind,
            condition,
            agent,
            observed,
            bound,
            better_bundle,
        } => json!({
            "kind": match kind {
                EquilibriumKind::Prices => "hz_condition",
                EquilibriumKind::Earnings => "earnings_condition",
            },
            "condition": condition,
            "agent": agent.map(|i| names.agent(i)),
            "observed": q(observed),
            "bound": q(bound),
            "better_bundle": better_bundle.as_ref().map(|b| qs(b)),
        }),
    }
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("t,objective,envy_gap\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.t, r.objective, r.envy_gap));
    }
    out
}
