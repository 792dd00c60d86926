use thiserror::Error;

/// Errors raised by the library. Variants map one-to-one onto the
/// failure modes of the individual operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid field data: {0}")]
    InvalidField(String),
    #[error("elements belong to different number fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("input must be nonzero")]
    ZeroInput,
    #[error("place index {0} out of range")]
    BadPlace(usize),
    #[error("residue {root} is not a simple root of the minimal polynomial modulo {ell}")]
    NotDegreeOne { ell: u64, root: i64 },
    #[error("element is not rational")]
    NotRational,
    #[error("target profile violates the product constraint (log mismatch {0:e})")]
    ProductMismatch(f64),
    #[error("no solution found with exponent bound {bound}")]
    SearchExhausted { bound: i64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("search cap {0} exceeded")]
    CapExceeded(u64),
    #[error("place {0} is not complex")]
    NotComplexPlace(usize),
    #[error("matrix determinant is not 1")]
    NotUnimodular,
    #[error("entry (1,1) vanishes; matrix is not in the big Bruhat cell")]
    NotInBigCell,
    #[error("pair ({0},{1}) is not admissible")]
    NotAdmissible(u8, u8),
    #[error("input matrix is monomial")]
    MonomialInput,
    #[error("no admissible pair yields a non-monomial continuation")]
    NoValidPair,
    #[error("flow scalar is zero")]
    ZeroScalar,
    #[error("the unit group has no element of infinite order")]
    RankZeroUnits,
    #[error("linear factors of form {0} are dependent")]
    DegenerateForm(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
