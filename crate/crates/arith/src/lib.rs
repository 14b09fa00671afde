//! Exact arithmetic for the image certifier: integers, polynomials over Z, Q
//! and F_p, number fields, primes above ℓ and finite residue fields.

pub mod error;
pub mod ffield;
pub mod fp;
pub mod int;
pub mod linalg;
pub mod nfpoly;
pub mod numfield;
pub mod poly;
pub mod prime;
pub mod qfactor;

pub use error::{ArithError, Result};
pub use ffield::{FFElem, FFEmbedding, FiniteField};
pub use fp::FpPoly;
pub use nfpoly::NFPoly;
pub use numfield::{NFElement, NumberField, SubfieldEmbedding};
pub use poly::{Poly, QPoly, ZPoly};
pub use prime::{
    factor_mod_ell, poly_discriminant, primes_above, reduce_mod,
    valuation_and_square_in_completion, MaximalityWitness, PrimeData,
};

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;
