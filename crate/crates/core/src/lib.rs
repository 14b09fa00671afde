//! Certificates that the projective mod-λ Galois image of a newform is
//! PSL₂(F_λ) or PGL₂(F_λ), built on exact arithmetic.

pub mod analysis;
pub mod certifier;
pub mod characters;
pub mod error;
pub mod newform;
pub mod oracle;
pub mod qexp;

pub use error::{CoreError, Result};
