//! Error type shared by every module of the crate.

use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    Domain { what: &'static str, value: f64 },
    /// Model parameters are rejected (non-finite betas, star order < 2, ...).
    InvalidParams(&'static str),
    /// A requested allocation or enumeration exceeds the configured cap.
    ResourceLimit { requested: u64, cap: u64 },
    /// An iterative solver exhausted its iteration budget.
    NoConvergence { what: &'static str },
    /// No sign-change bracket could be established for a root solve.
    ///
    /// For the transition-curve solve this signals that `beta1` is too
    /// close to the critical endpoint for the scan resolution.
    BracketFailure { what: &'static str, at: f64 },
    /// A Laplace coefficient required by the active regime vanishes.
    SingularCoefficient { what: &'static str, value: f64 },
    /// A formula degenerates (e.g. the two maximizers have merged).
    Degenerate { what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => {
                write!(f, "domain error: {what} (got {value})")
            }
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::ResourceLimit { requested, cap } => {
                write!(f, "resource limit: requested {requested} exceeds cap {cap}")
            }
            Error::NoConvergence { what } => {
                write!(f, "no convergence: {what}")
            }
            Error::BracketFailure { what, at } => {
                write!(f, "bracket failure: {what} (at {at})")
            }
            Error::SingularCoefficient { what, value } => {
                write!(f, "singular coefficient: {what} = {value}")
            }
            Error::Degenerate { what } => write!(f, "degenerate configuration: {what}"),
        }
    }
}

impl core::error::Error for Error {}
