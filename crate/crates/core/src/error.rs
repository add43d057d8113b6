use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "problem bounds (nu_g, kappa_f, kappa_g) are missing; supply them on the problem \
         or estimate them with `estimate_bounds`"
    )]
    MissingBounds,

    #[error("oracle returned a non-finite value at sample {sample}: {what}")]
    NonFiniteOracle { sample: usize, what: &'static str },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error(
        "prox parameter {alpha} must exceed the weak-convexity modulus {modulus} of the \
         Lagrangian; use alpha > {modulus}"
    )]
    ProxNotStronglyConvex { alpha: f64, modulus: f64 },

    #[error("iterates were not retained; rerun with `retain_iterates` (stride-1 retention)")]
    IteratesNotRetained,

    #[error("operation not supported by this problem: {0}")]
    Unsupported(&'static str),

    #[error("not enough points for a power-law fit ({0} usable)")]
    NotEnoughPoints(usize),

    #[error("malformed instance document: {0}")]
    Instance(String),
}
