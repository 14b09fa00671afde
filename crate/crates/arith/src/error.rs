use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("polynomial must have degree at least {0}")]
    DegreeTooSmall(usize),
    #[error("defining polynomial {0} is reducible over the rationals")]
    Reducible(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{ell} divides the leading coefficient")]
    LeadingCoefficientDivisible { ell: u64 },
    #[error("index-obstructed prime {ell}: maximality of the polynomial order at {ell} cannot be certified")]
    IndexObstructed { ell: u64 },
    #[error("non-integral at the prime above {ell}")]
    NonIntegral { ell: u64 },
    #[error("valuation unsupported: {ell} splits partially and the element reduces to zero")]
    ValuationUnsupported { ell: u64 },
    #[error("even-characteristic residue field is not supported here")]
    EvenCharacteristic,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("element is not integral (minimal polynomial has non-integral coefficients)")]
    NotAlgebraicInteger,
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, ArithError>;
