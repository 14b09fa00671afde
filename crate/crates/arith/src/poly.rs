//! Dense univariate polynomials over the integers and the rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, Zero};

/// Dense polynomial; `coeffs[i]` is the coefficient of `x^i`. The leading
/// coefficient is nonzero unless the polynomial is zero (empty vector).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

pub type ZPoly = Poly<BigInt>;
pub type QPoly = Poly<BigRational>;

impl<T: Clone + Num + Neg<Output = T>> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(T::one())
    }

    pub fn x() -> Self {
        Poly::monomial(T::one(), 1)
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    pub fn monomial(c: T, deg: usize) -> Self {
        let mut v = vec![T::zero(); deg + 1];
        v[deg] = c;
        Poly::new(v)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn lc(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn scale(&self, c: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * from_usize::<T>(i))
                .collect(),
        )
    }

    /// `self(other(x))`.
    pub fn compose(&self, other: &Self) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, c| &(&acc * other) + &Poly::constant(c.clone()))
    }

    /// `self(-x)`.
    pub fn reflect(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c.clone() } else { c.clone() })
                .collect(),
        )
    }

    /// `self(x^2)`.
    pub fn inflate_square(&self) -> Self {
        let mut v = vec![T::zero(); 2 * self.coeffs.len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[2 * i] = c.clone();
        }
        Poly::new(v)
    }

    pub fn map<U, F>(&self, f: F) -> Poly<U>
    where
        U: Clone + Num + Neg<Output = U>,
        F: Fn(&T) -> U,
    {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}

fn from_usize<T: Num>(n: usize) -> T {
    let mut acc = T::zero();
    for _ in 0..n {
        acc = acc + T::one();
    }
    acc
}

impl<T: Clone + Num + Neg<Output = T>> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Clone + Num + Neg<Output = T>> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Clone + Num + Neg<Output = T>> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(v)
    }
}

impl<T: Clone + Num + Neg<Output = T>> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<T: Clone + Num + Neg<Output = T>> Poly<T> {
    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Division by a monic polynomial; exact over any coefficient ring.
    pub fn divrem_monic(&self, d: &Self) -> (Self, Self) {
        assert!(d.is_monic(), "divisor must be monic");
        let dd = d.degree().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![T::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i].clone();
            if c.is_zero() {
                continue;
            }
            quot[i - dd] = c.clone();
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[i - dd + j] = rem[i - dd + j].clone() - c.clone() * dc.clone();
            }
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }
}

impl<T: fmt::Display + Clone + Num + Neg<Output = T> + PartialOrd> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_poly(f, &self.coeffs, "x")
    }
}

impl<T: fmt::Display + Clone + Num + Neg<Output = T> + PartialOrd> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_poly(f, &self.coeffs, "x")
    }
}

pub(crate) fn fmt_poly<T>(f: &mut fmt::Formatter<'_>, coeffs: &[T], var: &str) -> fmt::Result
where
    T: fmt::Display + Clone + Num + Neg<Output = T> + PartialOrd,
{
    if coeffs.is_empty() {
        return write!(f, "0");
    }
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let negative = *c < T::zero();
        let abs = if negative { -c.clone() } else { c.clone() };
        if first {
            if negative {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {} ", if negative { "-" } else { "+" })?;
        }
        first = false;
        let unit = abs.is_one();
        match (i, unit) {
            (0, _) => write!(f, "{abs}")?,
            (1, true) => write!(f, "{var}")?,
            (1, false) => write!(f, "{abs}*{var}")?,
            (_, true) => write!(f, "{var}^{i}")?,
            (_, false) => write!(f, "{abs}*{var}^{i}")?,
        }
    }
    Ok(())
}

impl ZPoly {
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn content(&self) -> BigInt {
        let g = self
            .coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if self.lc().is_negative() {
            -g
        } else {
            g
        }
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> ZPoly {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content();
        Poly::new(self.coeffs.iter().map(|a| a / &c).collect())
    }

    pub fn to_rational(&self) -> QPoly {
        self.map(|c| BigRational::from_integer(c.clone()))
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    /// Discriminant `(-1)^(n(n-1)/2) res(p, p') / lc(p)`.
    pub fn discriminant(&self) -> BigInt {
        self.to_rational().discriminant().to_integer()
    }

    /// Reduce coefficients into `[0, m)`.
    pub fn reduce_mod(&self, m: &BigInt) -> ZPoly {
        Poly::new(self.coeffs.iter().map(|c| c.mod_floor(m)).collect())
    }

    /// Reduce coefficients into the symmetric range `(-m/2, m/2]`.
    pub fn reduce_symmetric(&self, m: &BigInt) -> ZPoly {
        let half = m / 2;
        Poly::new(
            self.coeffs
                .iter()
                .map(|c| {
                    let r = c.mod_floor(m);
                    if r > half {
                        r - m
                    } else {
                        r
                    }
                })
                .collect(),
        )
    }

    /// Exact quotient over the integers, if `d` divides `self` in Z[x].
    pub fn exact_div(&self, d: &ZPoly) -> Option<ZPoly> {
        let (q, r) = self.to_rational().divrem(&d.to_rational());
        if !r.is_zero() {
            return None;
        }
        if q.coeffs().iter().all(|c| c.is_integer()) {
            Some(q.map(|c| c.to_integer()))
        } else {
            None
        }
    }
}

impl QPoly {
    pub fn from_zpoly(p: &ZPoly) -> Self {
        p.to_rational()
    }

    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let lc_inv = d.lc().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let c = &rem[i] * &lc_inv;
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[i - dd + j] = &rem[i - dd + j] - &c * dc;
            }
            quot[i - dd] = c;
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.lc().recip();
        self.scale(&inv)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: returns `(g, s, t)` with `s*self + t*other = g` monic.
    pub fn xgcd(&self, other: &Self) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = r1;
            r1 = r;
            let s = &s0 - &(&q * &s1);
            s0 = s1;
            s1 = s;
            let t = &t0 - &(&q * &t1);
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.lc().recip();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    /// Resultant by the Euclidean algorithm.
    pub fn resultant(&self, other: &Self) -> BigRational {
        let (Some(m), Some(n)) = (self.degree(), other.degree()) else {
            return BigRational::zero();
        };
        if n == 0 {
            return pow_q(&other.lc(), m);
        }
        if m == 0 {
            return pow_q(&self.lc(), n);
        }
        let r = self.rem(other);
        let Some(k) = r.degree() else {
            return BigRational::zero();
        };
        let sign = if (m * n) % 2 == 1 {
            -BigRational::one()
        } else {
            BigRational::one()
        };
        sign * pow_q(&other.lc(), m - k) * other.resultant(&r)
    }

    pub fn discriminant(&self) -> BigRational {
        let n = self.degree().expect("discriminant of zero polynomial");
        if n == 0 {
            return BigRational::one();
        }
        let res = self.resultant(&self.derivative());
        let sign = if (n * (n - 1) / 2) % 2 == 1 {
            -BigRational::one()
        } else {
            BigRational::one()
        };
        sign * res / self.lc()
    }

    /// Squarefree part (product of the distinct irreducible factors), monic.
    pub fn squarefree_part(&self) -> Self {
        let g = self.gcd(&self.derivative());
        self.divrem(&g).0.monic()
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    /// Multiply through by the lcm of denominators and take the primitive part.
    pub fn to_primitive_integer(&self) -> ZPoly {
        let den = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let z: ZPoly = self.map(|c| (c * BigRational::from_integer(den.clone())).to_integer());
        z.primitive_part()
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Lagrange interpolation through `(xs[i], ys[i])`.
    pub fn interpolate(xs: &[BigRational], ys: &[BigRational]) -> Self {
        assert_eq!(xs.len(), ys.len());
        // Newton divided differences
        let n = xs.len();
        let mut table: Vec<BigRational> = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                table[i] = (&table[i] - &table[i - 1]) / (&xs[i] - &xs[i - j]);
            }
        }
        let mut acc = Poly::constant(table[n - 1].clone());
        for i in (0..n - 1).rev() {
            let lin = Poly::new(vec![-xs[i].clone(), BigRational::one()]);
            acc = &(&acc * &lin) + &Poly::constant(table[i].clone());
        }
        acc
    }
}

pub(crate) fn pow_q(x: &BigRational, e: usize) -> BigRational {
    num_traits::pow(x.clone(), e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(c: &[i64]) -> ZPoly {
        ZPoly::from_i64(c)
    }

    #[test]
    fn discriminants() {
        // ascending coefficients: x^3 + x^2 - 4x + 1
        let cubic = z(&[1, -4, 1, 1]);
        // oracle: 18abc - 4a^3c + a^2b^2 - 4b^3 - 27c^2 with (a,b,c) = (1,-4,1)
        let (a, b, c) = (1i64, -4i64, 1i64);
        let formula = 18 * a * b * c - 4 * a.pow(3) * c + a * a * b * b - 4 * b.pow(3) - 27 * c * c;
        assert_eq!(formula, 169);
        assert_eq!(cubic.discriminant(), BigInt::from(169));
        assert_eq!(z(&[1, 0, 1]).discriminant(), BigInt::from(-4));
        assert_eq!(z(&[1, -2, 1]).discriminant(), BigInt::from(0));
    }

    #[test]
    fn resultant_matches_root_product() {
        // res(x^2 - 2, x - 3) = (3^2 - 2) up to sign convention: prod g(roots f) = (r1-3)(r2-3) = 7
        let f = z(&[-2, 0, 1]).to_rational();
        let g = z(&[-3, 1]).to_rational();
        assert_eq!(f.resultant(&g), BigRational::from_integer(7.into()));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = z(&[5, -3, 0, 2]).to_rational();
        let xs: Vec<BigRational> = (0..4).map(|i| BigRational::from_integer(i.into())).collect();
        let ys: Vec<BigRational> = xs.iter().map(|x| p.eval(x)).collect();
        assert_eq!(QPoly::interpolate(&xs, &ys), p);
    }

    #[test]
    fn display() {
        assert_eq!(z(&[1, -4, 1, 1]).to_string(), "x^3 + x^2 - 4*x + 1");
        assert_eq!(z(&[0, -1]).to_string(), "-x");
    }
}
