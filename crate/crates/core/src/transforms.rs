//! Utility reductions and price/earnings conversions.
//!
//! Every transform here keeps allocations fixed and only rewrites utilities
//! or per-item vectors, so an allocation certified for the transformed
//! object is certified for the original one as well.

use thiserror::Error;

use crate::market::{EarningsVector, Instance, ShiftSpec};
use crate::market::PriceVector;
use crate::scalar::{max_of, min_of, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(String),
    #[error("shift vector has {got} entries for {agents} agents")]
    Dimension { agents: usize, got: usize },
    #[error("agent {agent} has {distinct} distinct utility values; bivalued rows take at most 2")]
    NotBivalued { agent: usize, distinct: usize },
    #[error("minimum price {0} is at least 1 and prices are not all equal")]
    UnnormalizablePrices(String),
}

/// `u'_ij = a * u_ij + c_i`; demands unchanged.
pub fn shift_utilities<T: Scalar>(
    inst: &Instance<T>,
    spec: &ShiftSpec<T>,
) -> Result<Instance<T>, TransformError> {
    if !spec.scale.is_pos_tol() {
        return Err(TransformError::NonPositiveScale(spec.scale.to_string()));
    }
    if spec.shifts.len() != inst.n_agents() {
        return Err(TransformError::Dimension {
            agents: inst.n_agents(),
            got: spec.shifts.len(),
        });
    }
    let utilities = inst
        .utilities()
        .iter()
        .zip(&spec.shifts)
        .map(|(row, c)| {
            row.iter()
                .map(|u| spec.scale.clone() * u.clone() + c.clone())
                .collect()
        })
        .collect();
    Ok(inst.with_utilities(utilities))
}

/// Per-agent map `u' = (u - low) / span`, or `u' = 0` when the row is
/// constant (`span = None`).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRecord<T> {
    pub low: T,
    pub span: Option<T>,
}

impl<T: Scalar> AffineRecord<T> {
    pub fn forward(&self, u: &T) -> T {
        match &self.span {
            Some(s) => (u.clone() - self.low.clone()) / s.clone(),
            None => T::zero(),
        }
    }

    /// Inverse of [`forward`](Self::forward) on its image.
    pub fn inverse(&self, v: &T) -> T {
        match &self.span {
            Some(s) => self.low.clone() + s.clone() * v.clone(),
            None => self.low.clone(),
        }
    }
}

/// Maps every bivalued row onto `{0, 1}`: the smaller value goes to 0 and
/// the larger to 1.
pub fn reduce_bivalued_to_dichotomous<T: Scalar>(
    inst: &Instance<T>,
) -> Result<(Instance<T>, Vec<AffineRecord<T>>), TransformError> {
    let mut records = Vec::with_capacity(inst.n_agents());
    let mut rows = Vec::with_capacity(inst.n_agents());
    for (agent, row) in inst.utilities().iter().enumerate() {
        let mut distinct: Vec<&T> = Vec::new();
        for u in row {
            if !distinct.iter().any(|d| d.eq_tol(u)) {
                distinct.push(u);
            }
        }
        if distinct.len() > 2 {
            return Err(TransformError::NotBivalued {
                agent,
                distinct: distinct.len(),
            });
        }
        let low = min_of(row).unwrap();
        let high = max_of(row).unwrap();
        let span = high - low.clone();
        let record = AffineRecord {
            low,
            span: span.is_pos_tol().then_some(span),
        };
        rows.push(row.iter().map(|u| record.forward(u)).collect());
        records.push(record);
    }
    Ok((inst.with_utilities(rows), records))
}

/// Applies the inverse records to a reduced instance.
pub fn restore_bivalued<T: Scalar>(reduced: &Instance<T>, records: &[AffineRecord<T>]) -> Instance<T> {
    let rows = reduced
        .utilities()
        .iter()
        .zip(records)
        .map(|(row, rec)| row.iter().map(|v| rec.inverse(v)).collect())
        .collect();
    reduced.with_utilities(rows)
}

/// Output of a price/earnings conversion. `degenerate` marks the branch
/// where the maximum entry is at most 1 and the all-ones vector is
/// returned instead of the ratio formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Converted<V> {
    pub vector: V,
    pub degenerate: bool,
}

fn flip<T: Scalar>(values: &[T]) -> Option<Vec<T>> {
    let top = max_of(values).unwrap_or_else(T::zero);
    let denom = top.clone() - T::one();
    if !denom.is_pos_tol() {
        return None;
    }
    Some(
        values
            .iter()
            .map(|v| (top.clone() - v.clone()) / denom.clone())
            .collect(),
    )
}

/// `q_j = (p_max - p_j) / (p_max - 1)`.
pub fn prices_to_earnings<T: Scalar>(p: &PriceVector<T>) -> Converted<EarningsVector<T>> {
    match flip(p.values()) {
        Some(q) => Converted {
            vector: EarningsVector::new(q).expect("p_j <= p_max"),
            degenerate: false,
        },
        None => Converted {
            vector: EarningsVector::constant(p.len(), T::one()),
            degenerate: true,
        },
    }
}

/// `p_j = (q_max - q_j) / (q_max - 1)`.
pub fn earnings_to_prices<T: Scalar>(q: &EarningsVector<T>) -> Converted<PriceVector<T>> {
    match flip(q.values()) {
        Some(p) => Converted {
            vector: PriceVector::new(p).expect("q_j <= q_max"),
            degenerate: false,
        },
        None => Converted {
            vector: PriceVector::constant(q.len(), T::one()),
            degenerate: true,
        },
    }
}

/// Rescales prices so that the cheapest item is free:
/// `p'_j = (p_j - p_min) / (1 - p_min)`, or all zeros if every price is equal.
pub fn normalize_prices_zero_min<T: Scalar>(
    p: &PriceVector<T>,
) -> Result<PriceVector<T>, TransformError> {
    let low = p.min();
    if p.values().iter().all(|v| v.eq_tol(&low)) {
        return Ok(PriceVector::constant(p.len(), T::zero()));
    }
    let denom = T::one() - low.clone();
    if !denom.is_pos_tol() {
        return Err(TransformError::UnnormalizablePrices(low.to_string()));
    }
    let values = p
        .values()
        .iter()
        .map(|v| (v.clone() - low.clone()) / denom.clone())
        .collect();
    Ok(PriceVector::new(values).expect("p_j >= p_min"))
}
