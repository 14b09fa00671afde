//! Polynomials with number-field coefficients, factored by Trager's norm
//! method; used for square roots and for roots of rational polynomials.

use num_rational::BigRational;

use crate::error::Result;
use crate::numfield::{NFElement, NumberField};
use crate::poly::QPoly;
use crate::qfactor::factor_over_q;

/// Dense polynomial over a number field, ascending coefficients, monic
/// normalization applied by the algorithms that need it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NFPoly {
    field: NumberField,
    coeffs: Vec<NFElement>,
}

impl NFPoly {
    pub fn new(field: &NumberField, mut coeffs: Vec<NFElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        NFPoly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn from_qpoly(field: &NumberField, p: &QPoly) -> Self {
        NFPoly::new(
            field,
            p.coeffs().iter().map(|c| field.from_rational(c.clone())).collect(),
        )
    }

    pub fn coeffs(&self) -> &[NFElement] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn coeff(&self, i: usize) -> NFElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn eval(&self, x: &NFElement) -> NFElement {
        self.coeffs
            .iter()
            .rev()
            .fold(self.field.zero(), |acc, c| &(&acc * x) + c)
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        NFPoly::new(&self.field, (0..n).map(|i| &self.coeff(i) - &other.coeff(i)).collect())
    }

    fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return NFPoly::new(&self.field, vec![]);
        }
        let mut v = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        NFPoly::new(&self.field, v)
    }

    fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.degree().expect("division by zero polynomial");
        let lc_inv = d.coeffs[dd].inv()?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((NFPoly::new(&self.field, vec![]), self.clone()));
        }
        let mut quot = vec![self.field.zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let c = &rem[i] * &lc_inv;
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[i - dd + j] = &rem[i - dd + j] - &(&c * dc);
            }
            quot[i - dd] = c;
        }
        rem.truncate(dd);
        Ok((NFPoly::new(&self.field, quot), NFPoly::new(&self.field, rem)))
    }

    pub fn monic(&self) -> Result<Self> {
        let Some(d) = self.degree() else {
            return Ok(self.clone());
        };
        let inv = self.coeffs[d].inv()?;
        Ok(NFPoly::new(&self.field, self.coeffs.iter().map(|c| c * &inv).collect()))
    }

    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.divrem(&b)?.1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self(x + c)`.
    fn shift(&self, c: &NFElement) -> Self {
        let lin = NFPoly::new(&self.field, vec![c.clone(), self.field.one()]);
        let mut acc = NFPoly::new(&self.field, vec![]);
        for a in self.coeffs.iter().rev() {
            acc = acc.mul(&lin);
            acc = acc.sub(&NFPoly::new(&self.field, vec![-a]));
        }
        acc
    }

    fn derivative(&self) -> Self {
        NFPoly::new(
            &self.field,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.scale(&BigRational::from_integer(i.into())))
                .collect(),
        )
    }

    /// Norm to Q[x]: the product of the conjugates of `self` under the
    /// embeddings of the coefficient field, recovered by interpolation from
    /// integer evaluation points.
    pub fn norm(&self) -> QPoly {
        let n = self.degree().unwrap_or(0) * self.field.degree();
        let xs: Vec<BigRational> = (0..=n as i64)
            .map(|i| BigRational::from_integer(i.into()))
            .collect();
        let ys: Vec<BigRational> = xs
            .iter()
            .map(|x| self.eval(&self.field.from_rational(x.clone())).norm())
            .collect();
        QPoly::interpolate(&xs, &ys)
    }

    /// Monic irreducible factors of a squarefree polynomial (Trager).
    pub fn factor_squarefree(&self) -> Result<Vec<NFPoly>> {
        let f = self.monic()?;
        let Some(deg) = f.degree() else {
            return Ok(vec![]);
        };
        if deg <= 1 {
            return Ok(vec![f]);
        }
        let alpha = self.field.generator();
        for s in 0i64.. {
            // g(x) = f(x - s*alpha)
            let shift = alpha.scale(&BigRational::from_integer((-s).into()));
            let g = f.shift(&shift);
            let n = g.norm();
            if !n.is_squarefree() {
                continue;
            }
            let mut out = Vec::new();
            let mut rest = g.clone();
            for (h, _) in factor_over_q(&n.to_primitive_integer()) {
                let hk = NFPoly::from_qpoly(&self.field, &h.to_rational());
                let common = rest.gcd(&hk)?;
                if common.degree().unwrap_or(0) > 0 {
                    rest = rest.divrem(&common)?.0;
                    out.push(common.shift(&(-&shift)).monic()?);
                }
            }
            out.sort_by_key(|p| p.degree());
            return Ok(out);
        }
        unreachable!()
    }

    /// Distinct roots in the coefficient field.
    pub fn roots(&self) -> Result<Vec<NFElement>> {
        let f = self.monic()?;
        let sqfree = {
            let g = f.gcd(&f.derivative())?;
            f.divrem(&g)?.0
        };
        Ok(sqfree
            .factor_squarefree()?
            .into_iter()
            .filter(|p| p.degree() == Some(1))
            .map(|p| -&p.coeffs[0])
            .collect())
    }
}

/// A square root of `x` in its field, if one exists.
pub fn sqrt(x: &NFElement) -> Result<Option<NFElement>> {
    let k = x.field();
    if x.is_zero() {
        return Ok(Some(k.zero()));
    }
    if let Some(q) = x.as_rational() {
        if let Some(r) = rational_sqrt(&q) {
            return Ok(Some(k.from_rational(r)));
        }
    }
    let f = NFPoly::new(k, vec![-x, k.zero(), k.one()]);
    let roots = f.roots()?;
    Ok(roots.into_iter().min_by(|a, b| a.coords().cmp(&b.coords())))
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let n = crate::int::exact_sqrt(q.numer())?;
    let d = crate::int::exact_sqrt(q.denom())?;
    Some(BigRational::new(n, d))
}

/// Roots in `field` of a rational polynomial.
pub fn roots_of_rational_poly(field: &NumberField, p: &QPoly) -> Result<Vec<NFElement>> {
    NFPoly::from_qpoly(field, p).roots()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ZPoly;

    #[test]
    fn gaussian_roots_and_sqrt() {
        let e = NumberField::new(ZPoly::from_i64(&[1, 0, 1]), "i").unwrap();
        let roots = roots_of_rational_poly(&e, &ZPoly::from_i64(&[1, 0, 1]).to_rational()).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert!((&(r * r) + &e.one()).is_zero());
        }
        // -4 = (2i)^2
        let s = sqrt(&e.from_int(-4)).unwrap().unwrap();
        assert_eq!(&s * &s, e.from_int(-4));
        assert_eq!(sqrt(&e.generator()).unwrap(), None);
    }

    #[test]
    fn cubic_subfield_of_sextic() {
        // y^6 + 9y^4 + 14y^2 + 1 contains y^2, whose field is cubic
        let e = NumberField::new(ZPoly::from_i64(&[1, 0, 14, 0, 9, 0, 1]), "y").unwrap();
        let y = e.generator();
        let m = (&y * &y).minpoly();
        let roots = roots_of_rational_poly(&e, &m).unwrap();
        assert!(!roots.is_empty());
        for r in roots {
            assert!(r.eval_qpoly(&m).is_zero());
        }
    }
}
