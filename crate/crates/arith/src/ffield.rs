//! Finite fields F_p[x]/(g) with g irreducible, and their elements.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{ArithError, Result};
use crate::fp::{first_irreducible, FpPoly};
use crate::int::{factor_bigint, inv_mod, is_prime_u64};

/// Fields with at most this many elements may be enumerated exhaustively.
pub const ENUMERATION_LIMIT: u64 = 1 << 20;

#[derive(Debug, PartialEq, Eq, Hash)]
struct FieldData {
    p: u64,
    modulus: FpPoly,
    degree: usize,
}

/// A finite field of size p^f. Handles are cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteField(Arc<FieldData>);

impl FiniteField {
    /// F_p[x]/(modulus); `modulus` must be irreducible over F_p.
    pub fn new(modulus: FpPoly) -> Result<Self> {
        let p = modulus.modulus();
        if !is_prime_u64(p) {
            return Err(ArithError::NotPrime(p));
        }
        if !modulus.is_irreducible() {
            return Err(ArithError::Reducible(format!("{modulus} over F_{p}")));
        }
        let modulus = modulus.monic();
        let degree = modulus.degree().unwrap();
        Ok(FiniteField(Arc::new(FieldData { p, modulus, degree })))
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        Self::new(FpPoly::x(p))
    }

    /// The field of size p^d defined by the first irreducible polynomial of
    /// degree d in lexicographic order.
    pub fn extension(p: u64, d: usize) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(ArithError::NotPrime(p));
        }
        Self::new(first_irreducible(p, d))
    }

    pub fn characteristic(&self) -> u64 {
        self.0.p
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn modulus(&self) -> &FpPoly {
        &self.0.modulus
    }

    pub fn size(&self) -> BigUint {
        BigUint::from(self.0.p).pow(self.0.degree as u32)
    }

    pub fn size_u64(&self) -> Option<u64> {
        self.size().to_u64()
    }

    pub fn zero(&self) -> FFElem {
        self.elem(FpPoly::zero(self.0.p))
    }

    pub fn one(&self) -> FFElem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> FFElem {
        self.elem(FpPoly::constant(self.0.p, n.rem_euclid(self.0.p as i64) as u64))
    }

    pub fn from_u64(&self, n: u64) -> FFElem {
        self.elem(FpPoly::constant(self.0.p, n % self.0.p))
    }

    /// The class of x.
    pub fn generator(&self) -> FFElem {
        self.elem(FpPoly::x(self.0.p))
    }

    pub fn from_poly(&self, residue: FpPoly) -> FFElem {
        assert_eq!(residue.modulus(), self.0.p, "characteristic mismatch");
        self.elem(residue)
    }

    fn elem(&self, residue: FpPoly) -> FFElem {
        let residue = if residue.degree().unwrap_or(0) >= self.0.degree {
            residue.rem(&self.0.modulus)
        } else {
            residue
        };
        FFElem {
            field: self.clone(),
            residue,
        }
    }

    /// Every element, in a fixed order (lexicographic in the residue
    /// coefficients). Panics above [`ENUMERATION_LIMIT`].
    pub fn elements(&self) -> Vec<FFElem> {
        let q = self.size_u64().filter(|&q| q <= ENUMERATION_LIMIT);
        let q = q.expect("field too large to enumerate");
        let p = self.0.p;
        (0..q)
            .map(|mut n| {
                let mut c = Vec::with_capacity(self.0.degree);
                for _ in 0..self.0.degree {
                    c.push(n % p);
                    n /= p;
                }
                self.elem(FpPoly::new(p, c))
            })
            .collect()
    }

    /// Prime divisors of q - 1.
    fn unit_group_primes(&self) -> Vec<BigUint> {
        let qm1 = self.size() - 1u32;
        factor_bigint(&qm1.into())
            .into_iter()
            .map(|(r, _)| r.to_biguint().unwrap())
            .collect()
    }

    /// Deterministic generator of the multiplicative group: the first element
    /// in enumeration order (by residue coefficients) of order q - 1.
    pub fn primitive_element(&self) -> FFElem {
        let qm1 = self.size() - 1u32;
        let primes = self.unit_group_primes();
        let p = self.0.p;
        let f = self.0.degree;
        let mut n: u64 = 1;
        loop {
            let mut c = Vec::with_capacity(f);
            let mut m = n;
            for _ in 0..f {
                c.push(m % p);
                m /= p;
            }
            n += 1;
            let g = self.elem(FpPoly::new(p, c));
            if g.is_zero() {
                continue;
            }
            if primes.iter().all(|r| !g.pow(&(&qm1 / r)).is_one()) {
                return g;
            }
        }
    }
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.degree == 1 {
            write!(f, "F_{}", self.0.p)
        } else {
            write!(f, "F_{}^{} = F_{}[a]/({})", self.0.p, self.0.degree, self.0.p, self.0.modulus)
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FFElem {
    field: FiniteField,
    residue: FpPoly,
}

impl FFElem {
    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn residue(&self) -> &FpPoly {
        &self.residue
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.residue.is_one()
    }

    /// The element as an integer in [0, p) when it lies in the prime field.
    pub fn as_prime_field(&self) -> Option<u64> {
        match self.residue.degree() {
            None => Some(0),
            Some(0) => Some(self.residue.coeff(0)),
            _ => None,
        }
    }

    fn check(&self, other: &FFElem) {
        assert_eq!(self.field, other.field, "finite field mismatch");
    }

    pub fn add(&self, other: &FFElem) -> FFElem {
        self.check(other);
        self.field.elem(self.residue.add(&other.residue))
    }

    pub fn sub(&self, other: &FFElem) -> FFElem {
        self.check(other);
        self.field.elem(self.residue.sub(&other.residue))
    }

    pub fn neg(&self) -> FFElem {
        self.field.elem(self.residue.neg())
    }

    pub fn mul(&self, other: &FFElem) -> FFElem {
        self.check(other);
        self.field
            .elem(self.residue.mulmod(&other.residue, &self.field.0.modulus))
    }

    pub fn square(&self) -> FFElem {
        self.mul(self)
    }

    pub fn pow(&self, e: &BigUint) -> FFElem {
        self.field
            .elem(self.residue.powmod(e, &self.field.0.modulus))
    }

    pub fn pow_u64(&self, e: u64) -> FFElem {
        self.pow(&BigUint::from(e))
    }

    pub fn inv(&self) -> Result<FFElem> {
        if self.is_zero() {
            return Err(ArithError::NotInvertible);
        }
        if let Some(a) = self.as_prime_field() {
            let p = self.field.0.p;
            return Ok(self.field.from_u64(inv_mod(a, p).unwrap()));
        }
        let (g, s, _) = self.residue.xgcd(&self.field.0.modulus);
        debug_assert!(g.is_one());
        Ok(self.field.elem(s))
    }

    pub fn div(&self, other: &FFElem) -> Result<FFElem> {
        Ok(self.mul(&other.inv()?))
    }

    /// Squareness: Euler's criterion x^((q-1)/2) for odd q; every element
    /// is a square in characteristic 2. Zero counts as a square.
    pub fn is_square(&self) -> bool {
        if self.is_zero() || self.field.0.p == 2 {
            return true;
        }
        let e = (self.field.size() - 1u32) >> 1;
        self.pow(&e).is_one()
    }

    pub fn frobenius(&self) -> FFElem {
        self.pow_u64(self.field.0.p)
    }

    /// Degree over F_p of the subfield generated by this element: the least
    /// d with x^(p^d) = x (necessarily a divisor of the field degree).
    pub fn subfield_degree(&self) -> usize {
        let mut y = self.frobenius();
        let mut d = 1;
        while &y != self {
            y = y.frobenius();
            d += 1;
        }
        d
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self) -> BigUint {
        assert!(!self.is_zero(), "zero has no multiplicative order");
        let mut order = self.field.size() - 1u32;
        for r in self.field.unit_group_primes() {
            while (&order % &r).is_zero() && self.pow(&(&order / &r)).is_one() {
                order /= &r;
            }
        }
        order
    }

    /// Evaluate an F_p polynomial at this element.
    pub fn eval_fp_poly(poly: &FpPoly, x: &FFElem) -> FFElem {
        assert_eq!(poly.modulus(), x.field.0.p);
        poly.coeffs().iter().rev().fold(x.field.zero(), |acc, &c| {
            acc.mul(x).add(&x.field.from_u64(c))
        })
    }
}

impl fmt::Display for FFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(a) = self.as_prime_field() {
            return write!(f, "{a}");
        }
        let s = self.residue.to_string().replace('x', "a");
        write!(f, "{s}")
    }
}

impl fmt::Debug for FFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A field homomorphism `from -> to` determined by the image of the
/// generator of `from`.
#[derive(Clone, Debug)]
pub struct FFEmbedding {
    from: FiniteField,
    image: FFElem,
}

impl FFEmbedding {
    /// First embedding found by scanning `to` for a root of the modulus of
    /// `from`. Requires `to` to be enumerable.
    pub fn find(from: &FiniteField, to: &FiniteField) -> Option<Self> {
        if from.characteristic() != to.characteristic() || to.degree() % from.degree() != 0 {
            return None;
        }
        if from.degree() == 1 {
            return Some(FFEmbedding {
                from: from.clone(),
                image: to.zero(),
            });
        }
        to.elements()
            .into_iter()
            .find(|x| FFElem::eval_fp_poly(from.modulus(), x).is_zero())
            .map(|image| FFEmbedding {
                from: from.clone(),
                image,
            })
    }

    pub fn apply(&self, x: &FFElem) -> FFElem {
        assert_eq!(x.field(), &self.from);
        if self.from.degree() == 1 {
            return self.image.field().from_u64(x.as_prime_field().unwrap());
        }
        FFElem::eval_fp_poly(x.residue(), &self.image)
    }
}

/// gcd of q - 1 and n, for counting homomorphisms into F^x.
pub fn unit_gcd(field: &FiniteField, n: u64) -> u64 {
    let qm1 = field.size() - BigUint::one();
    let g = qm1.gcd(&BigUint::from(n));
    g.to_u64().unwrap()
}
