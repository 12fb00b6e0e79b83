//! Exact fair division in one-sided matching markets with goods, chores
//! and mixed manna.
//!
//! Everything is generic over [`Scalar`]; the aliases below fix the exact
//! rational instantiation used by verifiers and the float one used by the
//! Nash-bargaining iteration.

pub mod lp;
pub mod market;
pub mod scalar;
pub mod solvers;
pub mod transforms;
pub mod verify;

pub use lp::{check_feasible, solve_lp, LinearProgram, LpSolution, LpStatus, Relation, Sense};
pub use market::{
    bundle_utility, envy_report, validate_allocation, validate_instance, Allocation,
    AllocationDefect, EarningsVector, EnvyReport, EquilibriumKind, Instance, MarketError,
    PriceVector, ShiftSpec, Verdict, Witness,
};
pub use scalar::{format_rational, parse_rational, Rational, Scalar};

pub type ExactInstance = Instance<Rational>;
pub type ExactAllocation = Allocation<Rational>;
pub type ExactPrices = PriceVector<Rational>;
pub type ExactEarnings = EarningsVector<Rational>;
pub type ExactVerdict = Verdict<Rational>;

pub type FloatInstance = Instance<f64>;
pub type FloatAllocation = Allocation<f64>;
