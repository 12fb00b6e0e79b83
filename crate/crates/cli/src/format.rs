//! On-disk formats. Every number is an exact rational, written either as a
//! JSON integer or as a string `"num/den"`; JSON floats are rejected so
//! nothing on the ingest path rounds.

use std::fmt;
use std::path::Path;

use manna::{format_rational, parse_rational, Allocation, EarningsVector, Instance, PriceVector, Rational};
use num_bigint::BigInt;
use serde::de::{self, DeserializeOwned, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

/// One exact number in a file.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry(pub Rational);

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

struct EntryVisitor;

impl<'de> Visitor<'de> for EntryVisitor {
    type Value = Entry;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a string \"num/den\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Entry, E> {
        Ok(Entry(Rational::from_integer(BigInt::from(v))))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Entry, E> {
        Ok(Entry(Rational::from_integer(BigInt::from(v))))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Entry, E> {
        Err(E::custom(format!(
            "floating-point number {v} is not accepted; write it as \"num/den\""
        )))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Entry, E> {
        parse_rational(v).map(Entry).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Entry, D::Error> {
        d.deserialize_any(EntryVisitor)
    }
}

fn entries(v: &[Rational]) -> Vec<Entry> {
    v.iter().cloned().map(Entry).collect()
}

fn values(v: &[Entry]) -> Vec<Rational> {
    v.iter().map(|e| e.0.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: Vec<String>,
    pub items: Vec<String>,
    pub utilities: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demands: Option<Vec<Entry>>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance<Rational>, agents: Vec<String>, items: Vec<String>) -> Self {
        InstanceFile {
            agents,
            items,
            utilities: inst.utilities().iter().map(|r| entries(r)).collect(),
            demands: (!inst.has_unit_demands()).then(|| entries(inst.demands())),
        }
    }

    /// Default names `a0, a1, ...` and `g0, g1, ...`.
    pub fn anonymous(inst: &Instance<Rational>) -> Self {
        let agents = (0..inst.n_agents()).map(|i| format!("a{i}")).collect();
        let items = (0..inst.n_items()).map(|j| format!("g{j}")).collect();
        Self::from_instance(inst, agents, items)
    }

    pub fn to_instance(&self, path: &Path) -> Result<Instance<Rational>, CliError> {
        let shape = |message: String| CliError::Shape {
            path: path.to_path_buf(),
            message,
        };
        if self.utilities.len() != self.agents.len() {
            return Err(shape(format!(
                "{} utility rows for {} agents",
                self.utilities.len(),
                self.agents.len()
            )));
        }
        for (i, row) in self.utilities.iter().enumerate() {
            if row.len() != self.items.len() {
                return Err(shape(format!(
                    "utility row {i} has {} entries for {} items",
                    row.len(),
                    self.items.len()
                )));
            }
        }
        let rows = self.utilities.iter().map(|r| values(r)).collect();
        let demands = self.demands.as_ref().map(|d| values(d));
        Instance::new(rows, demands).map_err(|e| shape(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationFile {
    pub allocation: Vec<Vec<Entry>>,
}

impl AllocationFile {
    pub fn from_allocation(x: &Allocation<Rational>) -> Self {
        AllocationFile {
            allocation: x.rows().iter().map(|r| entries(r)).collect(),
        }
    }

    pub fn to_allocation(&self, inst: &Instance<Rational>, path: &Path) -> Result<Allocation<Rational>, CliError> {
        if self.allocation.len() != inst.n_agents()
            || self.allocation.iter().any(|r| r.len() != inst.n_items())
        {
            return Err(CliError::Shape {
                path: path.to_path_buf(),
                message: format!(
                    "allocation must be {} x {} to match the instance",
                    inst.n_agents(),
                    inst.n_items()
                ),
            });
        }
        Ok(Allocation::from_rows(self.allocation.iter().map(|r| values(r)).collect()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricesFile {
    pub prices: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarningsFile {
    pub earnings: Vec<Entry>,
}

impl PricesFile {
    pub fn from_vector(p: &PriceVector<Rational>) -> Self {
        PricesFile { prices: entries(p.values()) }
    }

    pub fn to_vector(&self, path: &Path) -> Result<PriceVector<Rational>, CliError> {
        PriceVector::new(values(&self.prices)).map_err(|e| CliError::Shape {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

impl EarningsFile {
    pub fn from_vector(q: &EarningsVector<Rational>) -> Self {
        EarningsFile { earnings: entries(q.values()) }
    }

    pub fn to_vector(&self, path: &Path) -> Result<EarningsVector<Rational>, CliError> {
        EarningsVector::new(values(&self.earnings)).map_err(|e| CliError::Shape {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Parses `text` as `T`, attributing errors to `path` with line and column.
pub fn parse_str<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let mut message = e.to_string();
        if let Some(k) = message.rfind(" at line ") {
            message.truncate(k);
        }
        CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message,
        }
    })
}

pub fn read_file<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_str(&text, path)
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}
