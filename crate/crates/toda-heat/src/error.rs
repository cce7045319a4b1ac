//! Error type shared across the crate.
//!
//! Every fallible operation reports which indices or orders are missing, so
//! that a failed exact computation can be retried on a wider window instead
//! of being silently zero-filled.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A truncated series was asked for a coefficient below its tracked depth.
    #[error("series depth insufficient: exponent {wanted} below guaranteed depth {valid_down_to}")]
    DepthInsufficient { wanted: i64, valid_down_to: i64 },

    /// Formal square root requires a series with constant term one.
    #[error("formal sqrt requires constant term 1, found {found}")]
    ConstantTermNotOne { found: String },

    /// Reciprocal of a series whose leading coefficient vanishes.
    #[error("leading coefficient is zero; series is not invertible")]
    ZeroLeadingCoefficient,

    /// A sequence or operator coefficient was needed outside its interval.
    #[error("interval insufficient for {what}: needs [{need_lo}, {need_hi}], have [{have_lo}, {have_hi}]")]
    IntervalInsufficient {
        what: String,
        need_lo: i64,
        need_hi: i64,
        have_lo: i64,
        have_hi: i64,
    },

    /// An operator composition or bracket has an empty valid interior.
    #[error("empty interior: {0}")]
    EmptyInterior(String),

    /// The window is too narrow to build a wave table of the requested order.
    #[error("window too narrow: order {order} has an empty validity interval")]
    WindowTooNarrow { order: usize },

    /// A wave table of higher order is required.
    #[error("wave table order {have} insufficient, need at least {need}")]
    OrderInsufficient { need: usize, have: usize },

    /// The heat-coefficient sweep needs window data outside the given window.
    #[error("window does not cover the dependency cone: missing a,b on [{miss_lo}, {miss_hi}]")]
    WindowCoverage { miss_lo: i64, miss_hi: i64 },

    /// No banded solution with the requested support solves X * F = R.
    #[error("intertwining system inconsistent at offset {offset}, n = {n}")]
    InconsistentIntertwining { offset: i64, n: i64 },

    /// The Casorati determinant of the Darboux data vanishes at some site.
    #[error("degenerate Darboux data: Casorati determinant vanishes at n = {n}")]
    SingularCasorati { n: i64 },

    /// Extracted operator fails the nonvanishing lower-band requirement.
    #[error("extracted operator is not properly bordered: a_n = 0 at n = {n}")]
    NotProperlyBordered { n: i64 },

    /// The Bessel series did not meet the tolerance within the term cap.
    #[error("Bessel series cap of {cap} terms exceeded for argument {arg}")]
    BesselCapExceeded { cap: usize, arg: f64 },

    /// A per-index coefficient rule is not odd on one of its parity branches.
    #[error("coefficient rule is not an odd polynomial on the {branch} branch")]
    NotOddPolynomial { branch: &'static str },

    /// The exact odd-polynomial fit of the heat coefficients failed.
    #[error("finite-form fit failed at order k = {k}: {reason}")]
    FiniteFormFit { k: usize, reason: String },

    /// Division of constants by zero, a = 0 windows, and similar misuse.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
