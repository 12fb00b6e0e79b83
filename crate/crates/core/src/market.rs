//! Market primitives: instances, fractional perfect matchings, price and
//! earnings vectors, and envy accounting.

use thiserror::Error;

use crate::lp::{LinearProgram, Relation, Sense};
use crate::scalar::{dot, max_of, min_of, sum, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("utility row {agent} has {len} entries, expected {items}")]
    RowLength {
        agent: usize,
        len: usize,
        items: usize,
    },
    #[error("{0} demands given for {1} agents")]
    DemandCount(usize, usize),
    #[error("instance needs at least one agent and one item")]
    Empty,
    #[error("demands sum to {sum} but there are {items} items")]
    DemandMismatch { sum: String, items: usize },
    #[error("agent {agent} has non-positive demand {demand}")]
    NonPositiveDemand { agent: usize, demand: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: String },
    #[error("shift scale must be positive, got {0}")]
    NonPositiveScale(String),
}

/// A one-sided matching market: `n_agents` agents with demands, `n_items`
/// items with unit supply, and a sign-free utility matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    utilities: Vec<Vec<T>>,
    demands: Vec<T>,
}

impl<T: Scalar> Instance<T> {
    /// Builds and validates an instance. `demands = None` means unit demands.
    pub fn new(utilities: Vec<Vec<T>>, demands: Option<Vec<T>>) -> Result<Self, MarketError> {
        let n_agents = utilities.len();
        if n_agents == 0 {
            return Err(MarketError::Empty);
        }
        let n_items = utilities[0].len();
        if n_items == 0 {
            return Err(MarketError::Empty);
        }
        for (agent, row) in utilities.iter().enumerate() {
            if row.len() != n_items {
                return Err(MarketError::RowLength {
                    agent,
                    len: row.len(),
                    items: n_items,
                });
            }
        }
        let demands = demands.unwrap_or_else(|| vec![T::one(); n_agents]);
        if demands.len() != n_agents {
            return Err(MarketError::DemandCount(demands.len(), n_agents));
        }
        validate_instance(Instance { utilities, demands })
    }

    /// Unit-demand instance; requires a square utility matrix.
    pub fn unit(utilities: Vec<Vec<T>>) -> Result<Self, MarketError> {
        Self::new(utilities, None)
    }

    pub fn n_agents(&self) -> usize {
        self.utilities.len()
    }

    pub fn n_items(&self) -> usize {
        self.utilities[0].len()
    }

    pub fn utilities(&self) -> &[Vec<T>] {
        &self.utilities
    }

    pub fn utility_row(&self, agent: usize) -> &[T] {
        &self.utilities[agent]
    }

    pub fn demands(&self) -> &[T] {
        &self.demands
    }

    pub fn demand(&self, agent: usize) -> &T {
        &self.demands[agent]
    }

    pub fn has_unit_demands(&self) -> bool {
        self.demands.iter().all(|d| d.eq_tol(&T::one()))
    }

    /// `max_j u_ij - min_j u_ij`, the per-agent normalizer for approximate
    /// equilibrium checks.
    pub fn utility_range(&self, agent: usize) -> T {
        let row = &self.utilities[agent];
        max_of(row).unwrap() - min_of(row).unwrap()
    }

    pub fn all_nonnegative(&self) -> bool {
        self.utilities.iter().flatten().all(|u| !u.is_neg_tol())
    }

    pub fn all_nonpositive(&self) -> bool {
        self.utilities.iter().flatten().all(|u| !u.is_pos_tol())
    }

    /// Copy with a replaced utility matrix of the same shape.
    pub(crate) fn with_utilities(&self, utilities: Vec<Vec<T>>) -> Self {
        debug_assert_eq!(utilities.len(), self.n_agents());
        Instance {
            utilities,
            demands: self.demands.clone(),
        }
    }

    /// The proportional allocation `x_ij = d_i / n`.
    pub fn proportional_allocation(&self) -> Allocation<T> {
        let n = T::from_usize(self.n_items()).unwrap();
        Allocation::from_rows(
            self.demands
                .iter()
                .map(|d| vec![d.clone() / n.clone(); self.n_items()])
                .collect(),
        )
    }
}

/// Checks `Σ d_i = n_items` and `d_i > 0`.
pub fn validate_instance<T: Scalar>(raw: Instance<T>) -> Result<Instance<T>, MarketError> {
    for (agent, d) in raw.demands.iter().enumerate() {
        if !d.is_pos_tol() {
            return Err(MarketError::NonPositiveDemand {
                agent,
                demand: d.to_string(),
            });
        }
    }
    let total = sum(&raw.demands);
    let items = T::from_usize(raw.n_items()).unwrap();
    if !total.eq_tol(&items) {
        return Err(MarketError::DemandMismatch {
            sum: total.to_string(),
            items: raw.n_items(),
        });
    }
    Ok(raw)
}

/// Fractional matching matrix, agents by items.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> Allocation<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        Allocation { rows }
    }

    pub fn zeros(n_agents: usize, n_items: usize) -> Self {
        Allocation {
            rows: vec![vec![T::zero(); n_items]; n_agents],
        }
    }

    /// Permutation matrix sending agent `i` to item `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut x = Self::zeros(n, n);
        for (i, &j) in perm.iter().enumerate() {
            x.rows[i][j] = T::one();
        }
        x
    }

    pub fn identity(n: usize) -> Self {
        Self::permutation(&(0..n).collect::<Vec<_>>())
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn row(&self, agent: usize) -> &[T] {
        &self.rows[agent]
    }

    pub fn get(&self, agent: usize, item: usize) -> &T {
        &self.rows[agent][item]
    }

    pub fn n_agents(&self) -> usize {
        self.rows.len()
    }

    pub fn n_items(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Row-major flattening, the variable order used by every LP here.
    pub fn flatten(&self) -> Vec<T> {
        self.rows.iter().flatten().cloned().collect()
    }

    pub fn from_flat(flat: &[T], n_agents: usize, n_items: usize) -> Self {
        assert_eq!(flat.len(), n_agents * n_items);
        Allocation {
            rows: flat.chunks(n_items).map(<[T]>::to_vec).collect(),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Allocation<U> {
        Allocation {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(&f).collect())
                .collect(),
        }
    }

    pub fn into_rows(self) -> Vec<Vec<T>> {
        self.rows
    }
}

macro_rules! nonneg_vector {
    ($(#[$doc:meta])* $name:ident, $fixed:literal) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name<T> {
            values: Vec<T>,
        }

        impl<T: Scalar> $name<T> {
            pub fn new(values: Vec<T>) -> Result<Self, MarketError> {
                if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| v.is_neg_tol()) {
                    return Err(MarketError::NegativeEntry {
                        index,
                        value: v.to_string(),
                    });
                }
                Ok($name { values })
            }

            /// All entries equal to `value` (must be nonnegative).
            pub fn constant(len: usize, value: T) -> Self {
                Self::new(vec![value; len]).expect("nonnegative constant")
            }

            pub fn values(&self) -> &[T] {
                &self.values
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            pub fn max(&self) -> T {
                max_of(&self.values).unwrap_or_else(T::zero)
            }

            pub fn min(&self) -> T {
                min_of(&self.values).unwrap_or_else(T::zero)
            }

            /// The per-unit-demand constant fixed by the equilibrium notion.
            pub fn unit_level() -> T {
                T::from_i64($fixed).unwrap()
            }

            pub fn dot(&self, bundle: &[T]) -> T {
                dot(&self.values, bundle)
            }

            pub fn into_values(self) -> Vec<T> {
                self.values
            }
        }
    };
}

nonneg_vector!(
    /// Item prices; every agent holds a budget of 1 per unit of demand.
    PriceVector,
    1
);
nonneg_vector!(
    /// Per-item payments; every agent must earn 1 per unit of demand.
    EarningsVector,
    1
);

/// Affine utility transform `u'_ij = a * u_ij + c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSpec<T> {
    pub shifts: Vec<T>,
    pub scale: T,
}

impl<T: Scalar> ShiftSpec<T> {
    pub fn new(shifts: Vec<T>, scale: T) -> Result<Self, MarketError> {
        if !scale.is_pos_tol() {
            return Err(MarketError::NonPositiveScale(scale.to_string()));
        }
        Ok(ShiftSpec { shifts, scale })
    }

    pub fn shift(shifts: Vec<T>) -> Self {
        ShiftSpec {
            shifts,
            scale: T::one(),
        }
    }
}

/// `Σ_j u_ij y_j`.
pub fn bundle_utility<T: Scalar>(
    inst: &Instance<T>,
    agent: usize,
    bundle: &[T],
) -> Result<T, MarketError> {
    if bundle.len() != inst.n_items() {
        return Err(MarketError::Dimension {
            expected: inst.n_items(),
            got: bundle.len(),
        });
    }
    Ok(dot(inst.utility_row(agent), bundle))
}

/// Pairwise envy summary under per-demand normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvyReport<T> {
    pub envy_free: bool,
    /// `(envier, envied)` maximizing the additive gap; absent with one agent.
    pub worst_pair: Option<(usize, usize)>,
    /// `max u_i·x_i'/d_i' - u_i·x_i/d_i` over ordered pairs; zero with one agent.
    pub additive_gap: T,
    /// For the worst pair, own per-demand disutility over the envied
    /// bundle's per-demand disutility, when both are strictly positive.
    pub multiplicative_ratio: Option<T>,
    /// `table[i][k] = u_i·x_k / d_k`.
    pub table: Vec<Vec<T>>,
}

pub fn envy_report<T: Scalar>(inst: &Instance<T>, x: &Allocation<T>) -> EnvyReport<T> {
    let n = inst.n_agents();
    let table: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| dot(inst.utility_row(i), x.row(k)) / inst.demand(k).clone())
                .collect()
        })
        .collect();

    let mut worst: Option<((usize, usize), T)> = None;
    for i in 0..n {
        for k in 0..n {
            if i == k {
                continue;
            }
            let gap = table[i][k].clone() - table[i][i].clone();
            // strict comparison keeps the lexicographically first pair on ties
            if worst.as_ref().map_or(true, |(_, g)| gap > *g) {
                worst = Some(((i, k), gap));
            }
        }
    }

    let (worst_pair, additive_gap) = match worst {
        Some((pair, gap)) => (Some(pair), gap),
        None => (None, T::zero()),
    };
    let multiplicative_ratio = worst_pair.and_then(|(i, k)| {
        let own = -table[i][i].clone();
        let other = -table[i][k].clone();
        (own.is_pos_tol() && other.is_pos_tol()).then(|| own / other)
    });

    EnvyReport {
        envy_free: !additive_gap.is_pos_tol(),
        worst_pair,
        additive_gap,
        multiplicative_ratio,
        table,
    }
}

/// Structural defect found by [`validate_allocation`].
#[derive(Debug, Clone, PartialEq)]
pub enum AllocationDefect<T> {
    Shape {
        agents: usize,
        items: usize,
    },
    NegativeEntry {
        agent: usize,
        item: usize,
        value: T,
    },
    RowSum {
        agent: usize,
        sum: T,
        demand: T,
    },
    ColumnSum {
        item: usize,
        sum: T,
    },
}

impl<T: Scalar> AllocationDefect<T> {
    /// Equilibrium condition violated by this defect: 1 for agents, 2 for items.
    pub fn condition(&self) -> u8 {
        match self {
            AllocationDefect::ColumnSum { .. } => 2,
            _ => 1,
        }
    }
}

/// Which equilibrium notion a [`Witness::Equilibrium`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Prices,
    Earnings,
}

/// Machine-checkable counterexample carried by a failing [`Verdict`].
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<T> {
    Allocation(AllocationDefect<T>),
    Envy {
        envier: usize,
        envied: usize,
        /// `u_envier · x_envier / d_envier`
        own_value: T,
        /// `u_envier · x_envied / d_envied`
        other_value: T,
    },
    ParetoImprovement {
        allocation: Allocation<T>,
        /// Optimal total improvement `Σ_i s_i`.
        improvement: T,
    },
    Equilibrium {
        kind: EquilibriumKind,
        /// Violated condition, 1 through 4.
        condition: u8,
        agent: Option<usize>,
        /// Left-hand side of the violated inequality.
        observed: T,
        /// Bound it failed to meet.
        bound: T,
        /// Bundle doing strictly better, when the condition is optimality.
        better_bundle: Option<Vec<T>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T> {
    pub holds: bool,
    pub witness: Option<Witness<T>>,
}

impl<T> Verdict<T> {
    pub fn pass() -> Self {
        Verdict {
            holds: true,
            witness: None,
        }
    }

    pub fn fail(witness: Witness<T>) -> Self {
        Verdict {
            holds: false,
            witness: Some(witness),
        }
    }
}

/// Program whose first `n_agents * n_items` variables are a row-major
/// allocation constrained to the fractional perfect matchings of `inst`,
/// followed by `extra_vars` unconstrained nonnegative variables.
pub fn fpm_program<T: Scalar>(inst: &Instance<T>, extra_vars: usize, sense: Sense) -> LinearProgram<T> {
    let (na, ni) = (inst.n_agents(), inst.n_items());
    let mut lp = LinearProgram::new(na * ni + extra_vars, sense);
    for i in 0..na {
        let terms: Vec<_> = (0..ni).map(|j| (i * ni + j, T::one())).collect();
        lp.add_sparse(&terms, Relation::Eq, inst.demand(i).clone());
    }
    for j in 0..ni {
        let terms: Vec<_> = (0..na).map(|i| (i * ni + j, T::one())).collect();
        lp.add_sparse(&terms, Relation::Eq, T::one());
    }
    lp
}

/// Nonnegativity, row sums `d_i` and unit column sums, in that order.
pub fn validate_allocation<T: Scalar>(inst: &Instance<T>, x: &Allocation<T>) -> Verdict<T> {
    if x.n_agents() != inst.n_agents() || x.rows().iter().any(|r| r.len() != inst.n_items()) {
        return Verdict::fail(Witness::Allocation(AllocationDefect::Shape {
            agents: x.n_agents(),
            items: x.n_items(),
        }));
    }
    for (agent, row) in x.rows().iter().enumerate() {
        if let Some((item, v)) = row.iter().enumerate().find(|(_, v)| v.is_neg_tol()) {
            return Verdict::fail(Witness::Allocation(AllocationDefect::NegativeEntry {
                agent,
                item,
                value: v.clone(),
            }));
        }
    }
    for (agent, row) in x.rows().iter().enumerate() {
        let s = sum(row);
        if !s.eq_tol(inst.demand(agent)) {
            return Verdict::fail(Witness::Allocation(AllocationDefect::RowSum {
                agent,
                sum: s,
                demand: inst.demand(agent).clone(),
            }));
        }
    }
    for item in 0..inst.n_items() {
        let s = x
            .rows()
            .iter()
            .fold(T::zero(), |acc, r| acc + r[item].clone());
        if !s.eq_tol(&T::one()) {
            return Verdict::fail(Witness::Allocation(AllocationDefect::ColumnSum { item, sum: s }));
        }
    }
    Verdict::pass()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn ri(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn inst(u: &[&[i64]], d: Option<&[i64]>) -> Result<Instance<Rational>, MarketError> {
        Instance::new(
            u.iter().map(|row| row.iter().map(|&v| ri(v)).collect()).collect(),
            d.map(|d| d.iter().map(|&v| ri(v)).collect()),
        )
    }

    #[test]
    fn validate_instance_examples() {
        assert!(inst(&[&[3, -1], &[0, 2]], Some(&[1, 1])).is_ok());
        assert!(inst(&[&[1, 2, 3], &[0, 0, 1]], Some(&[2, 1])).is_ok());
        assert!(matches!(
            inst(&[&[1, 2], &[0, 0]], Some(&[2, 1])),
            Err(MarketError::DemandMismatch { .. })
        ));
        assert!(matches!(
            inst(&[&[1, 2], &[0, 0]], Some(&[2, 0])),
            Err(MarketError::NonPositiveDemand { agent: 1, .. })
        ));
        assert!(matches!(
            inst(&[&[1, 2], &[0]], None),
            Err(MarketError::RowLength { agent: 1, .. })
        ));
    }

    #[test]
    fn validate_allocation_examples() {
        let i = inst(&[&[1, 0], &[0, 1]], None).unwrap();
        assert!(validate_allocation(&i, &Allocation::identity(2)).holds);
        let half = Allocation::from_rows(vec![vec![r(1, 2); 2]; 2]);
        assert!(validate_allocation(&i, &half).holds);

        let bad = Allocation::from_rows(vec![vec![r(3, 4), r(3, 4)], vec![r(1, 4), r(1, 4)]]);
        let v = validate_allocation(&i, &bad);
        assert!(!v.holds);
        assert_eq!(
            v.witness,
            Some(Witness::Allocation(AllocationDefect::RowSum {
                agent: 0,
                sum: r(3, 2),
                demand: ri(1)
            }))
        );
    }

    #[test]
    fn negative_entry_is_reported_before_sums() {
        let i = inst(&[&[1, 0], &[0, 1]], None).unwrap();
        let x = Allocation::from_rows(vec![vec![ri(2), ri(-1)], vec![ri(-1), ri(2)]]);
        let v = validate_allocation(&i, &x);
        assert!(matches!(
            v.witness,
            Some(Witness::Allocation(AllocationDefect::NegativeEntry { agent: 0, item: 1, .. }))
        ));
    }

    #[test]
    fn bundle_utility_examples() {
        let i = inst(&[&[1, 0], &[-1, -10]], None).unwrap();
        assert_eq!(bundle_utility(&i, 0, &[r(1, 2), r(1, 2)]).unwrap(), r(1, 2));
        assert_eq!(bundle_utility(&i, 1, &[ri(0), ri(1)]).unwrap(), ri(-10));
        assert_eq!(bundle_utility(&i, 1, &[ri(0), ri(0)]).unwrap(), ri(0));
        assert!(bundle_utility(&i, 0, &[ri(1)]).is_err());
    }

    #[test]
    fn envy_report_figure_one_at_full_assignment() {
        // i: disutilities (1, 10); i': (0, 1); t = x_{i,j'} = 1.
        let i = inst(&[&[-1, -10], &[0, -1]], None).unwrap();
        let x = Allocation::permutation(&[1, 0]);
        let rep = envy_report(&i, &x);
        assert!(!rep.envy_free);
        assert_eq!(rep.worst_pair, Some((0, 1)));
        assert_eq!(rep.additive_gap, ri(9));
        assert_eq!(rep.multiplicative_ratio, Some(ri(10)));
    }

    #[test]
    fn envy_report_trivial_cases() {
        let single = inst(&[&[4]], None).unwrap();
        let rep = envy_report(&single, &Allocation::identity(1));
        assert!(rep.envy_free);
        assert_eq!(rep.worst_pair, None);

        let twins = inst(&[&[3, 1], &[3, 1]], None).unwrap();
        let half = Allocation::from_rows(vec![vec![r(1, 2); 2]; 2]);
        let rep = envy_report(&twins, &half);
        assert!(rep.envy_free);
        assert_eq!(rep.additive_gap, ri(0));
        assert_eq!(rep.worst_pair, Some((0, 1)));
    }

    #[test]
    fn envy_uses_utility_per_demand() {
        // agent 0 (d=2) holds items 0,1; agent 1 (d=1) holds item 2.
        let i = inst(&[&[1, 1, 3], &[1, 1, 3]], Some(&[2, 1])).unwrap();
        let x = Allocation::from_rows(vec![vec![ri(1), ri(1), ri(0)], vec![ri(0), ri(0), ri(1)]]);
        let rep = envy_report(&i, &x);
        // agent 0: own 2/2 = 1, other 3/1 = 3 -> gap 2
        assert_eq!(rep.worst_pair, Some((0, 1)));
        assert_eq!(rep.additive_gap, ri(2));
    }

    #[test]
    fn multiplicative_ratio_absent_on_zero_disutility() {
        // Figure 2 at t = 0: i' holds disutility 1, i's bundle worth 0 to i'.
        let i = inst(&[&[-1, -2], &[0, -1]], None).unwrap();
        let rep = envy_report(&i, &Allocation::identity(2));
        assert_eq!(rep.worst_pair, Some((1, 0)));
        assert_eq!(rep.additive_gap, ri(1));
        assert_eq!(rep.multiplicative_ratio, None);
    }

    #[test]
    fn price_vector_rejects_negative_entries() {
        assert!(PriceVector::new(vec![ri(1), ri(-1)]).is_err());
        assert!(EarningsVector::new(vec![ri(0), ri(2)]).is_ok());
        assert!(ShiftSpec::new(vec![ri(0)], ri(0)).is_err());
    }
}
