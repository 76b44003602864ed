use thiserror::Error;

use crate::instance::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("problem is infeasible: {0}")]
    Infeasible(String),
    #[error("instance too large for exhaustive search: {combinations} combinations exceed {limit}")]
    TooLarge { combinations: f64, limit: f64 },
    #[error("missing input: {0}")]
    Missing(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
