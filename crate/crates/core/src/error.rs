use alloc::string::String;

/// Everything that can go wrong in the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("algebra needs at least one block")]
    EmptyAlgebra,
    #[error("block {block}: matrix size must be at least 1")]
    ZeroBlockSize { block: usize },
    #[error("block {block}: needs at least one point weight")]
    NoPoints { block: usize },
    #[error("block {block}, point {point}: weight {weight} must be finite and positive")]
    BadWeight { block: usize, point: usize, weight: f64 },
    #[error("operands live in different algebras")]
    SpecMismatch,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("exponent p = {0} must be finite and at least 1")]
    BadExponent(f64),
    #[error("element is not self-adjoint (deviation {0:e})")]
    NotSelfAdjoint(f64),
    #[error("no block of size >= {needed}; the algebra is subhomogeneous of degree {degree}")]
    NoLargeBlock { needed: usize, degree: usize },
    #[error("amplification size must be at least 1")]
    BadAmplification,
    #[error("map is not invertible")]
    Singular,
    #[error("map is not separating: {0}")]
    NotSeparating(String),
    #[error("not a Jordan homomorphism: {0}")]
    NotJordan(String),
    #[error("invalid Yeadon triple: {0}")]
    InvalidTriple(String),
    #[error("inconsistent decomposition: {0}")]
    Inconsistent(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = core::result::Result<T, Error>;
