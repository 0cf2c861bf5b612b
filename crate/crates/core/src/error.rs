use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a function (e.g. `Ei` at 0).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge after {refinements} refinements on [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64, refinements: u32 },

    /// The prices do not place the indifferent consumer strictly between the firms.
    #[error("regime error: {0}")]
    Regime(String),

    /// A pure equilibrium was requested at a location pair failing its conditions.
    #[error("location pair ({z1}, {z2}) does not satisfy the {kind} conditions")]
    Condition { kind: &'static str, z1: f64, z2: f64 },

    #[error("no sign change of the {kind} width equation on (0, {upper})")]
    NoRoot { kind: &'static str, upper: f64 },

    /// A mixed equilibrium failed its structural checks (negative density, bad atom).
    #[error("cannot construct {kind} equilibrium: {reason}")]
    Construction { kind: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
