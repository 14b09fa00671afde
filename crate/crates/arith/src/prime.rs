//! Primes of a number field above a rational prime, read off from the
//! factorization of the defining polynomial modulo ℓ (valid where the
//! polynomial order is ℓ-maximal), and reduction into residue fields.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{ArithError, Result};
use crate::ffield::{FFElem, FiniteField};
use crate::fp::FpPoly;
use crate::int::{inv_mod, is_prime_u64};
use crate::numfield::{NFElement, NumberField};
use crate::poly::ZPoly;

/// How ℓ-maximality of Z[x]/(f) was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaximalityWitness {
    /// ℓ² does not divide disc(f).
    Discriminant,
    /// Dedekind's criterion holds at ℓ.
    Dedekind,
    /// Asserted by the caller.
    Caller,
}

/// A prime λ of the maximal order above ℓ, given by an irreducible factor of
/// the defining polynomial modulo ℓ.
#[derive(Clone, Debug)]
pub struct PrimeData {
    field: NumberField,
    ell: u64,
    local_factor: FpPoly,
    multiplicity: u32,
    residue_field: FiniteField,
    witness: MaximalityWitness,
    primes_above_ell: usize,
}

impl PrimeData {
    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn local_factor(&self) -> &FpPoly {
        &self.local_factor
    }

    /// Ramification index.
    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    pub fn residue_degree(&self) -> usize {
        self.local_factor.degree().unwrap()
    }

    pub fn residue_field(&self) -> &FiniteField {
        &self.residue_field
    }

    pub fn residue_field_size(&self) -> num_bigint::BigUint {
        self.residue_field.size()
    }

    pub fn maximality_witness(&self) -> MaximalityWitness {
        self.witness
    }

    /// Whether λ is the only prime above ℓ.
    pub fn is_unique_above_ell(&self) -> bool {
        self.primes_above_ell == 1
    }

    /// Image of the field generator in the residue field.
    pub fn generator_residue(&self) -> FFElem {
        self.residue_field.generator()
    }
}

impl fmt::Display for PrimeData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            self.ell,
            self.local_factor.to_string().replace('x', self.field.var_name())
        )
    }
}

/// Discriminant of a monic integer polynomial of degree at least 1.
pub fn poly_discriminant(p: &ZPoly) -> Result<BigInt> {
    if !p.is_monic() {
        return Err(ArithError::NotMonic);
    }
    if p.degree().unwrap_or(0) < 1 {
        return Err(ArithError::DegreeTooSmall(1));
    }
    Ok(p.discriminant())
}

/// Factorization modulo ℓ into monic irreducibles with multiplicities.
pub fn factor_mod_ell(p: &ZPoly, ell: u64) -> Result<Vec<(FpPoly, u32)>> {
    if !is_prime_u64(ell) {
        return Err(ArithError::NotPrime(ell));
    }
    if (p.lc() % BigInt::from(ell)).is_zero() {
        return Err(ArithError::LeadingCoefficientDivisible { ell });
    }
    Ok(FpPoly::from_zpoly(p, ell).factor())
}

/// Dedekind's criterion: whether Z[x]/(f) is maximal at ℓ, for monic f.
pub fn dedekind_maximal(f: &ZPoly, ell: u64) -> bool {
    let fbar = FpPoly::from_zpoly(f, ell);
    let factors = fbar.factor();
    let g = factors
        .iter()
        .fold(FpPoly::one(ell), |acc, (gi, _)| acc.mul(gi));
    let h = fbar.divrem(&g).0;
    let lifted = &g.to_zpoly() * &h.to_zpoly();
    let diff = &lifted - f;
    let l = BigInt::from(ell);
    let big_f = ZPoly::new(diff.coeffs().iter().map(|c| c / &l).collect());
    let fb = FpPoly::from_zpoly(&big_f, ell);
    fb.gcd(&g).gcd(&h).is_one()
}

/// Whether ℓ is certified not to divide the index of Z[x]/(f) in the maximal
/// order, and how.
pub fn maximality_at(f: &ZPoly, ell: u64) -> Option<MaximalityWitness> {
    let disc = f.discriminant();
    let l2 = BigInt::from(ell * ell);
    if !(&disc % &l2).is_zero() {
        return Some(MaximalityWitness::Discriminant);
    }
    if dedekind_maximal(f, ell) {
        return Some(MaximalityWitness::Dedekind);
    }
    None
}

/// The primes of `field` above ℓ. Errors with `IndexObstructed` when the
/// polynomial order cannot be shown ℓ-maximal, unless `assume_maximal`.
pub fn primes_above(field: &NumberField, ell: u64, assume_maximal: bool) -> Result<Vec<PrimeData>> {
    let f = field.poly();
    let factors = factor_mod_ell(f, ell)?;
    let witness = match maximality_at(f, ell) {
        Some(w) => w,
        None if assume_maximal => MaximalityWitness::Caller,
        None => return Err(ArithError::IndexObstructed { ell }),
    };
    let count = factors.len();
    factors
        .into_iter()
        .map(|(g, e)| {
            Ok(PrimeData {
                field: field.clone(),
                ell,
                residue_field: FiniteField::new(g.clone())?,
                local_factor: g,
                multiplicity: e,
                witness,
                primes_above_ell: count,
            })
        })
        .collect()
}

fn reduce_rational(c: &BigRational, ell: u64) -> Result<u64> {
    let l = BigInt::from(ell);
    let d = c.denom().mod_floor(&l).to_u64().unwrap();
    if d == 0 {
        return Err(ArithError::NonIntegral { ell });
    }
    let n = c.numer().mod_floor(&l).to_u64().unwrap();
    Ok(crate::int::mul_mod(n, inv_mod(d, ell).unwrap(), ell))
}

/// Reduction of a λ-integral element into the residue field of λ.
pub fn reduce_mod(x: &NFElement, lam: &PrimeData) -> Result<FFElem> {
    if x.field() != &lam.field {
        return Err(ArithError::FieldMismatch);
    }
    let coeffs: Vec<u64> = x
        .as_poly()
        .coeffs()
        .iter()
        .map(|c| reduce_rational(c, lam.ell))
        .collect::<Result<_>>()?;
    Ok(lam.residue_field.from_poly(FpPoly::new(lam.ell, coeffs)))
}

/// ℓ-adic valuation of a nonzero rational.
fn rational_valuation(q: &BigRational, ell: u64) -> i64 {
    crate::int::valuation(q.numer(), ell) as i64 - crate::int::valuation(q.denom(), ell) as i64
}

/// Valuation of `x` at λ and whether `x` is a square in the completion K_λ.
/// Returns `(None, true)` for zero. Supported when K = Q or λ is the only
/// prime above ℓ; otherwise only for λ-units.
pub fn valuation_and_square_in_completion(
    x: &NFElement,
    lam: &PrimeData,
) -> Result<(Option<i64>, bool)> {
    if x.field() != &lam.field {
        return Err(ArithError::FieldMismatch);
    }
    if lam.ell == 2 {
        return Err(ArithError::EvenCharacteristic);
    }
    if x.is_zero() {
        return Ok((None, true));
    }
    let k = x.field();
    if !lam.is_unique_above_ell() {
        return match reduce_mod(x, lam) {
            Ok(r) if !r.is_zero() => Ok((Some(0), r.is_square())),
            _ => Err(ArithError::ValuationUnsupported { ell: lam.ell }),
        };
    }
    let f = lam.residue_degree() as i64;
    let vn = rational_valuation(&x.norm(), lam.ell);
    debug_assert_eq!(vn % f, 0);
    let v = vn / f;
    // uniformizer: ℓ when unramified, otherwise a lift of the local factor
    let pi = if lam.multiplicity == 1 {
        k.from_int(lam.ell as i64)
    } else {
        let g = lam.local_factor.to_zpoly().to_rational();
        k.generator().eval_qpoly(&g)
    };
    let pi_pow = pi.pow(v.unsigned_abs());
    let unit = if v >= 0 {
        x * &pi_pow.inv()?
    } else {
        x * &pi_pow
    };
    let r = reduce_mod(&unit, lam)?;
    debug_assert!(!r.is_zero());
    Ok((Some(v), v % 2 == 0 && r.is_square()))
}
