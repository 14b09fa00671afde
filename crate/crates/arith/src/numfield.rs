//! Number fields Q[x]/(f) with f monic irreducible over Z, and their elements.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{ArithError, Result};
use crate::linalg::{self, QMatrix};
use crate::poly::{QPoly, ZPoly};
use crate::qfactor::is_irreducible_over_q;

#[derive(Debug, PartialEq, Eq)]
struct FieldData {
    poly: ZPoly,
    qpoly: QPoly,
    name: String,
}

/// A number field given by a monic irreducible integer polynomial. Cheap to
/// clone; two handles are the same field when their polynomials agree.
#[derive(Clone, Debug)]
pub struct NumberField(Arc<FieldData>);

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.poly == other.0.poly
    }
}

impl Eq for NumberField {}

impl NumberField {
    /// Builds the field, checking that `poly` is monic and irreducible by
    /// factoring it over Q.
    pub fn new(poly: ZPoly, name: &str) -> Result<Self> {
        let n = poly.degree().ok_or(ArithError::DegreeTooSmall(1))?;
        if n < 1 {
            return Err(ArithError::DegreeTooSmall(1));
        }
        if !poly.is_monic() {
            return Err(ArithError::NotMonic);
        }
        if n > 1 && !is_irreducible_over_q(&poly) {
            return Err(ArithError::Reducible(poly.to_string()));
        }
        Ok(Self::new_unchecked(poly, name))
    }

    fn new_unchecked(poly: ZPoly, name: &str) -> Self {
        let qpoly = poly.to_rational();
        NumberField(Arc::new(FieldData {
            poly,
            qpoly,
            name: name.to_string(),
        }))
    }

    /// The rationals, as Q[x]/(x).
    pub fn rationals() -> Self {
        Self::new_unchecked(ZPoly::from_i64(&[0, 1]), "x")
    }

    pub fn poly(&self) -> &ZPoly {
        &self.0.poly
    }

    pub fn degree(&self) -> usize {
        self.0.poly.degree().unwrap()
    }

    pub fn var_name(&self) -> &str {
        &self.0.name
    }

    pub fn discriminant(&self) -> BigInt {
        self.0.poly.discriminant()
    }

    pub fn is_rationals(&self) -> bool {
        self.degree() == 1
    }

    pub fn zero(&self) -> NFElement {
        NFElement::from_coords(self, vec![])
    }

    pub fn one(&self) -> NFElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> NFElement {
        self.from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_bigint(&self, n: &BigInt) -> NFElement {
        self.from_rational(BigRational::from_integer(n.clone()))
    }

    pub fn from_rational(&self, c: BigRational) -> NFElement {
        NFElement::from_coords(self, vec![c])
    }

    /// The class of x.
    pub fn generator(&self) -> NFElement {
        NFElement::from_qpoly(self, QPoly::x())
    }

    pub fn from_qpoly(&self, p: &QPoly) -> NFElement {
        NFElement::from_qpoly(self, p.clone())
    }
}

/// Element of a number field stored as the reduced residue of a rational
/// polynomial in the field generator.
#[derive(Clone, PartialEq, Eq)]
pub struct NFElement {
    field: NumberField,
    coords: QPoly,
}

impl NFElement {
    pub fn from_coords(field: &NumberField, coords: Vec<BigRational>) -> Self {
        Self::from_qpoly(field, QPoly::new(coords))
    }

    fn from_qpoly(field: &NumberField, p: QPoly) -> Self {
        let coords = if p.degree().unwrap_or(0) >= field.degree() {
            p.divrem_monic(&field.0.qpoly).1
        } else {
            p
        };
        NFElement {
            field: field.clone(),
            coords,
        }
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn as_poly(&self) -> &QPoly {
        &self.coords
    }

    /// Coordinates on the power basis, padded to the field degree.
    pub fn coords(&self) -> Vec<BigRational> {
        (0..self.field.degree()).map(|i| self.coords.coeff(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.coords.degree() == Some(0) && self.coords.coeff(0).is_one()
    }

    pub fn is_rational(&self) -> bool {
        self.coords.degree().unwrap_or(0) == 0
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.coords.coeff(0))
    }

    pub fn pow(&self, mut e: u64) -> NFElement {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self) -> Result<NFElement> {
        if self.is_zero() {
            return Err(ArithError::NotInvertible);
        }
        let (g, s, _) = self.coords.xgcd(&self.field.0.qpoly);
        if g.degree() != Some(0) {
            return Err(ArithError::NotInvertible);
        }
        Ok(NFElement::from_qpoly(&self.field, s))
    }

    pub fn scale(&self, c: &BigRational) -> NFElement {
        NFElement::from_qpoly(&self.field, self.coords.scale(c))
    }

    /// Matrix of multiplication by `self` on the power basis; column `j` is
    /// `self * x^j`.
    pub fn mul_matrix(&self) -> QMatrix {
        let n = self.field.degree();
        let mut cols = Vec::with_capacity(n);
        let mut cur = self.clone();
        let x = self.field.generator();
        for _ in 0..n {
            cols.push(cur.coords());
            cur = &cur * &x;
        }
        (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Monic minimal polynomial over Q, from the first linear dependence
    /// among the powers of `self`.
    pub fn minpoly(&self) -> QPoly {
        let n = self.field.degree();
        let mut powers: Vec<Vec<BigRational>> = vec![self.field.one().coords()];
        let mut cur = self.field.one();
        for d in 1..=n {
            cur = &cur * self;
            let target = cur.coords();
            if let Some(sol) = linalg::solve_columns(&powers, &target) {
                // self^d = sum sol_i self^i
                let mut c: Vec<BigRational> = sol.into_iter().map(|v| -v).collect();
                c.push(BigRational::one());
                debug_assert_eq!(c.len(), d + 1);
                return QPoly::new(c);
            }
            powers.push(target);
        }
        unreachable!("powers of an element span a space of dimension at most the degree")
    }

    /// Integral minimal polynomial, if the element is an algebraic integer.
    pub fn minpoly_integral(&self) -> Result<ZPoly> {
        let m = self.minpoly();
        if !m.is_integral() {
            return Err(ArithError::NotAlgebraicInteger);
        }
        Ok(m.map(|c| c.to_integer()))
    }

    pub fn is_integral(&self) -> bool {
        self.minpoly().is_integral()
    }

    /// Characteristic polynomial of multiplication by `self`.
    pub fn charpoly(&self) -> QPoly {
        let m = self.minpoly();
        let d = m.degree().unwrap();
        m.pow((self.field.degree() / d) as u32)
    }

    /// Norm to Q, computed as the resultant of the defining polynomial and the
    /// coordinate polynomial (the defining polynomial is monic).
    pub fn norm(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        self.field.0.qpoly.resultant(&self.coords)
    }

    pub fn trace(&self) -> BigRational {
        let m = self.mul_matrix();
        (0..m.len()).map(|i| m[i][i].clone()).sum()
    }

    /// Lowest common denominator of the coordinates.
    pub fn denominator(&self) -> BigInt {
        use num_integer::Integer;
        self.coords
            .coeffs()
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// `poly(self)` for a rational polynomial.
    pub fn eval_qpoly(&self, poly: &QPoly) -> NFElement {
        poly.coeffs().iter().rev().fold(self.field.zero(), |acc, c| {
            &(&acc * self) + &self.field.from_rational(c.clone())
        })
    }
}

impl Add for &NFElement {
    type Output = NFElement;
    fn add(self, rhs: &NFElement) -> NFElement {
        assert_eq!(self.field, rhs.field, "field mismatch");
        NFElement {
            field: self.field.clone(),
            coords: &self.coords + &rhs.coords,
        }
    }
}

impl Sub for &NFElement {
    type Output = NFElement;
    fn sub(self, rhs: &NFElement) -> NFElement {
        assert_eq!(self.field, rhs.field, "field mismatch");
        NFElement {
            field: self.field.clone(),
            coords: &self.coords - &rhs.coords,
        }
    }
}

impl Mul for &NFElement {
    type Output = NFElement;
    fn mul(self, rhs: &NFElement) -> NFElement {
        assert_eq!(self.field, rhs.field, "field mismatch");
        NFElement::from_qpoly(&self.field, &self.coords * &rhs.coords)
    }
}

impl Neg for &NFElement {
    type Output = NFElement;
    fn neg(self) -> NFElement {
        NFElement {
            field: self.field.clone(),
            coords: -&self.coords,
        }
    }
}

impl fmt::Display for NFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::poly::fmt_poly(f, self.coords.coeffs(), self.field.var_name())
    }
}

impl fmt::Debug for NFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An embedding of a number field `sub` into `parent`, given by the image of
/// the generator of `sub`.
#[derive(Clone, Debug)]
pub struct SubfieldEmbedding {
    sub: NumberField,
    parent: NumberField,
    gen_image: NFElement,
    /// coordinates (in `parent`) of the images of 1, g, ..., g^(d-1)
    basis: Vec<Vec<BigRational>>,
}

impl SubfieldEmbedding {
    /// The subfield generated by `x`, defined by its minimal polynomial
    /// (which must be integral).
    pub fn generated_by(x: &NFElement, name: &str) -> Result<Self> {
        let m = x.minpoly_integral()?;
        let sub = NumberField::new_unchecked(m, name);
        Ok(Self::with_image(sub, x.clone()))
    }

    /// Embedding of `sub` sending its generator to `image`. The caller
    /// guarantees that `image` is a root of the defining polynomial of `sub`.
    pub fn with_image(sub: NumberField, image: NFElement) -> Self {
        debug_assert!(image
            .eval_qpoly(&sub.poly().to_rational())
            .is_zero());
        let parent = image.field().clone();
        let mut basis = Vec::with_capacity(sub.degree());
        let mut cur = parent.one();
        for _ in 0..sub.degree() {
            basis.push(cur.coords());
            cur = &cur * &image;
        }
        SubfieldEmbedding {
            sub,
            parent,
            gen_image: image,
            basis,
        }
    }

    pub fn sub(&self) -> &NumberField {
        &self.sub
    }

    pub fn parent(&self) -> &NumberField {
        &self.parent
    }

    pub fn generator_image(&self) -> &NFElement {
        &self.gen_image
    }

    pub fn to_parent(&self, x: &NFElement) -> NFElement {
        assert_eq!(x.field(), &self.sub, "field mismatch");
        let mut acc = vec![BigRational::zero(); self.parent.degree()];
        for (i, c) in x.coords().iter().enumerate() {
            for (a, b) in acc.iter_mut().zip(&self.basis[i]) {
                *a = &*a + c * b;
            }
        }
        NFElement::from_coords(&self.parent, acc)
    }

    /// Preimage of a parent element, or `None` if it is not in the subfield.
    pub fn to_sub(&self, x: &NFElement) -> Option<NFElement> {
        assert_eq!(x.field(), &self.parent, "field mismatch");
        linalg::solve_columns(&self.basis, &x.coords())
            .map(|c| NFElement::from_coords(&self.sub, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> NumberField {
        NumberField::new(ZPoly::from_i64(&[1, -4, 1, 1]), "b").unwrap()
    }

    #[test]
    fn construction_checks() {
        assert_eq!(
            NumberField::new(ZPoly::from_i64(&[-1, 0, 1]), "x").unwrap_err(),
            ArithError::Reducible("x^2 - 1".into())
        );
        assert_eq!(
            NumberField::new(ZPoly::from_i64(&[1, 2]), "x").unwrap_err(),
            ArithError::NotMonic
        );
        assert!(NumberField::new(ZPoly::from_i64(&[1, 0, 1]), "i").is_ok());
    }

    #[test]
    fn minpoly_and_norm() {
        let k = cubic();
        let b = k.generator();
        assert_eq!(b.minpoly(), ZPoly::from_i64(&[1, -4, 1, 1]).to_rational());
        assert_eq!(k.from_int(5).minpoly(), ZPoly::from_i64(&[-5, 1]).to_rational());
        // N(b) = -f(0) for a cubic
        assert_eq!(b.norm(), BigRational::from_integer((-1).into()));
        assert_eq!(k.one().norm(), BigRational::one());
        let x = &(&b * &b) + &k.from_int(3);
        assert_eq!(x.norm(), linalg::det(&x.mul_matrix()));
        assert_eq!(&x * &x.inv().unwrap(), k.one());
    }

    #[test]
    fn subfield_roundtrip() {
        let e = NumberField::new(ZPoly::from_i64(&[1, 0, 14, 0, 9, 0, 1]), "y").unwrap();
        let y = e.generator();
        let y2 = &y * &y;
        let emb = SubfieldEmbedding::generated_by(&y2, "t").unwrap();
        assert_eq!(emb.sub().degree(), 3);
        let t = emb.sub().generator();
        let back = emb.to_parent(&(&t * &t));
        assert_eq!(emb.to_sub(&back), Some(&t * &t));
        assert_eq!(emb.to_sub(&y), None);
    }
}
