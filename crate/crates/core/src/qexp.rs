//! Power series over Z[i] and the level-27 weight-3 newform built from an
//! eta product and three theta series of the hexagonal lattice.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use galimage_arith::int::{gcd_u64, primes_up_to};
use galimage_arith::{NFElement, NumberField};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::characters::kronecker;
use crate::error::{CoreError, Result};

/// Default precision for the level-27 form.
pub const DEFAULT_PRECISION: usize = 2000;

/// A Gaussian integer re + im·i.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussInt {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        GaussInt {
            re: re.into(),
            im: im.into(),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn i() -> Self {
        Self::new(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussInt {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// |z|^2
    pub fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        GaussInt {
            re: &self.re * c,
            im: &self.im * c,
        }
    }

    /// Exact division by 2, or `None` if a component is odd.
    pub fn halve(&self) -> Option<Self> {
        if self.re.is_odd() || self.im.is_odd() {
            return None;
        }
        Some(GaussInt {
            re: &self.re / 2,
            im: &self.im / 2,
        })
    }

    /// The element re + im·i of a field whose generator squares to -1.
    pub fn to_nf(&self, field: &NumberField) -> NFElement {
        &field.from_bigint(&self.re) + &field.generator().scale(&self.im.clone().into())
    }
}

impl Add for &GaussInt {
    type Output = GaussInt;
    fn add(self, o: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl Sub for &GaussInt {
    type Output = GaussInt;
    fn sub(self, o: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl Mul for &GaussInt {
    type Output = GaussInt;
    fn mul(self, o: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &GaussInt {
    type Output = GaussInt;
    fn neg(self) -> GaussInt {
        GaussInt {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) if self.im.is_one() => write!(f, "i"),
            (true, false) if self.im == -BigInt::one() => write!(f, "-i"),
            (true, false) => write!(f, "{}*i", self.im),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                let a = self.im.abs();
                if a.is_one() {
                    write!(f, "{} {} i", self.re, sign)
                } else {
                    write!(f, "{} {} {}*i", self.re, sign, a)
                }
            }
        }
    }
}

impl fmt::Debug for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A power series Σ c_n q^n known modulo q^(precision+1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<GaussInt>,
}

impl QSeries {
    /// Zero series with coefficients through q^precision.
    pub fn zero(precision: usize) -> Self {
        QSeries {
            coeffs: vec![GaussInt::zero(); precision + 1],
        }
    }

    pub fn from_coeffs(coeffs: Vec<GaussInt>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs its constant term");
        QSeries { coeffs }
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &GaussInt {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[GaussInt] {
        &self.coeffs
    }

    pub fn scale(&self, c: &GaussInt) -> Self {
        QSeries {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    fn is_real(&self) -> bool {
        self.coeffs.iter().all(GaussInt::is_real)
    }
}

impl Add for &QSeries {
    type Output = QSeries;
    fn add(self, o: &QSeries) -> QSeries {
        let b = self.precision().min(o.precision());
        QSeries {
            coeffs: (0..=b).map(|n| &self.coeffs[n] + &o.coeffs[n]).collect(),
        }
    }
}

impl Sub for &QSeries {
    type Output = QSeries;
    fn sub(self, o: &QSeries) -> QSeries {
        let b = self.precision().min(o.precision());
        QSeries {
            coeffs: (0..=b).map(|n| &self.coeffs[n] - &o.coeffs[n]).collect(),
        }
    }
}

impl Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, o: &QSeries) -> QSeries {
        let b = self.precision().min(o.precision());
        let nonzero = |s: &QSeries| -> Vec<usize> {
            (0..=b).filter(|&n| !s.coeffs[n].is_zero()).collect()
        };
        let (lhs, rhs) = (nonzero(self), nonzero(o));
        if self.is_real() && o.is_real() {
            let mut out = vec![BigInt::zero(); b + 1];
            for &i in &lhs {
                for &j in rhs.iter().take_while(|&&j| i + j <= b) {
                    out[i + j] += &self.coeffs[i].re * &o.coeffs[j].re;
                }
            }
            return QSeries {
                coeffs: out.into_iter().map(|re| GaussInt::new(re, 0)).collect(),
            };
        }
        let mut out = vec![GaussInt::zero(); b + 1];
        for &i in &lhs {
            for &j in rhs.iter().take_while(|&&j| i + j <= b) {
                out[i + j] = &out[i + j] + &(&self.coeffs[i] * &o.coeffs[j]);
            }
        }
        QSeries { coeffs: out }
    }
}

/// g = q Π (1 - q^{3n})^2 (1 - q^{9n})^2 through q^b.
pub fn eta_product_g(b: usize) -> QSeries {
    assert!(b >= 1, "precision must be at least 1");
    // work with the product part h through q^(b-1), then shift by q
    let len = b;
    let mut h = vec![BigInt::zero(); len];
    h[0] = BigInt::one();
    let mut mul_one_minus = |m: usize| {
        for n in (m..len).rev() {
            let t = h[n - m].clone();
            h[n] -= t;
        }
    };
    for step in [3usize, 9] {
        let mut m = step;
        while m < len {
            mul_one_minus(m);
            mul_one_minus(m);
            m += step;
        }
    }
    let mut coeffs = vec![GaussInt::zero(); b + 1];
    for (n, c) in h.into_iter().enumerate() {
        coeffs[n + 1] = GaussInt::new(c, 0);
    }
    QSeries { coeffs }
}

/// θ_j = Σ_{x,y} q^{3^j (x^2 + xy + y^2)} through q^b.
pub fn theta_j(j: u32, b: usize) -> QSeries {
    assert!(j <= 2, "only j = 0, 1, 2 occur");
    let scale = 3i64.pow(j);
    let mut counts = vec![0i64; b + 1];
    // x^2 + xy + y^2 >= (x^2 + y^2)/2 bounds |x|, |y| by sqrt(2b)
    let r = ((2 * b) as f64).sqrt() as i64 + 1;
    for x in -r..=r {
        for y in -r..=r {
            let e = scale * (x * x + x * y + y * y);
            if e <= b as i64 {
                counts[e as usize] += 1;
            }
        }
    }
    QSeries {
        coeffs: counts.into_iter().map(|c| GaussInt::new(c, 0)).collect(),
    }
}

/// a_1..a_b of f = (i/2) g θ_0 - ((1+i)/2) g θ_1 + (3/2) g θ_2.
pub fn build_level27_newform(b: usize) -> Result<Vec<GaussInt>> {
    let g = eta_product_g(b);
    let t: Vec<QSeries> = (0..3).map(|j| &g * &theta_j(j, b)).collect();
    let two_f = &(&t[0].scale(&GaussInt::i()) - &t[1].scale(&GaussInt::new(1, 1)))
        + &t[2].scale(&GaussInt::new(3, 0));
    (1..=b)
        .map(|n| {
            two_f
                .coeff(n)
                .halve()
                .ok_or(CoreError::NonIntegralCoefficient(n))
        })
        .collect()
}

/// Ring operations needed to check Hecke relations.
pub trait HeckeRing: Clone + PartialEq {
    fn ring_mul(&self, other: &Self) -> Self;
    fn ring_sub(&self, other: &Self) -> Self;
    /// The integer n in the same ring as `self`.
    fn int_like(&self, n: &BigInt) -> Self;
    fn describe(&self) -> String;
}

impl HeckeRing for GaussInt {
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn int_like(&self, n: &BigInt) -> Self {
        GaussInt::new(n.clone(), 0)
    }
    fn describe(&self) -> String {
        self.to_string()
    }
}

impl HeckeRing for NFElement {
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn int_like(&self, n: &BigInt) -> Self {
        self.field().from_bigint(n)
    }
    fn describe(&self) -> String {
        self.to_string()
    }
}

/// Outcome of [`hecke_validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeReport {
    pub bound: usize,
    pub relations_checked: usize,
    pub violation: Option<String>,
}

impl HeckeReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the eigenform relations on a_1..a_B (`a[n - 1]` is a_n):
/// a_1 = 1, a_{mn} = a_m a_n for coprime m, n, the prime-power recurrence
/// for p ∤ N and a_{p^r} = a_p^r for p | N. ε is the Kronecker character (D/.).
pub fn hecke_validate<R: HeckeRing>(a: &[R], level: u64, weight: u32, eps_disc: i64) -> HeckeReport {
    let b = a.len();
    let mut report = HeckeReport {
        bound: b,
        relations_checked: 0,
        violation: None,
    };
    if b == 0 {
        report.violation = Some("no coefficients".into());
        return report;
    }
    let at = |n: usize| &a[n - 1];
    let one = at(1).int_like(&BigInt::one());
    report.relations_checked += 1;
    if at(1) != &one {
        report.violation = Some(format!("a_1 = {}", at(1).describe()));
        return report;
    }
    for m in 2..=b {
        for n in (m + 1)..=(b / m) {
            if gcd_u64(m as u64, n as u64) != 1 {
                continue;
            }
            report.relations_checked += 1;
            if at(m * n) != &at(m).ring_mul(at(n)) {
                report.violation = Some(format!("a_{} != a_{} a_{}", m * n, m, n));
                return report;
            }
        }
    }
    for p in primes_up_to(b as u64) {
        let p = p as usize;
        let ap = at(p);
        if level % p as u64 == 0 {
            let mut q = p;
            let mut power = ap.clone();
            while q * p <= b {
                q *= p;
                power = power.ring_mul(ap);
                report.relations_checked += 1;
                if at(q) != &power {
                    report.violation = Some(format!("a_{q} != a_{p}^r for p | N"));
                    return report;
                }
            }
            continue;
        }
        let c = BigInt::from(kronecker(eps_disc, p as i64)) * BigInt::from(p).pow(weight - 1);
        let c = ap.int_like(&c);
        let (mut prev, mut cur, mut q) = (one.clone(), ap.clone(), p);
        while q * p <= b {
            let next = ap.ring_mul(&cur).ring_sub(&c.ring_mul(&prev));
            q *= p;
            report.relations_checked += 1;
            if at(q) != &next {
                report.violation = Some(format!("a_{q} violates the recurrence at p = {p}"));
                return report;
            }
            prev = cur;
            cur = next;
        }
    }
    report
}

/// Primes p ≤ b not dividing n, as a convenience for callers.
pub fn primes_coprime_to(n: u64, b: u64) -> Vec<u64> {
    primes_up_to(b)
        .into_iter()
        .filter(|&p| n % p != 0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_and_theta_examples() {
        let g = eta_product_g(20);
        assert_eq!(g.coeff(1), &GaussInt::one());
        assert_eq!(g.coeff(2), &GaussInt::zero());
        assert_eq!(g.coeff(4), &GaussInt::new(-2, 0));
        let t0 = theta_j(0, 20);
        assert_eq!(t0.coeff(0), &GaussInt::one());
        assert_eq!(t0.coeff(1), &GaussInt::new(6, 0));
        assert!(theta_j(1, 20).coeff(1).is_zero());
        assert_eq!(theta_j(2, 20).coeff(9), &GaussInt::new(6, 0));
    }

    #[test]
    fn displayed_coefficients() {
        let a = build_level27_newform(60).unwrap();
        let expect = [
            (1, GaussInt::one()),
            (2, GaussInt::new(0, 3)),
            (4, GaussInt::new(-5, 0)),
            (5, GaussInt::new(0, -3)),
            (7, GaussInt::new(5, 0)),
            (8, GaussInt::new(0, -3)),
            (10, GaussInt::new(9, 0)),
            (11, GaussInt::new(0, -15)),
            (13, GaussInt::new(-10, 0)),
        ];
        for (n, v) in expect {
            assert_eq!(a[n - 1], v, "a_{n}");
        }
        assert!(hecke_validate(&a, 27, 3, -3).passed());
    }

    #[test]
    fn hecke_detects_corruption() {
        let mut a = build_level27_newform(60).unwrap();
        a[9] = GaussInt::new(10, 0);
        let r = hecke_validate(&a, 27, 3, -3);
        assert!(!r.passed());
    }

    #[test]
    fn gauss_display() {
        assert_eq!(GaussInt::new(0, 3).to_string(), "3*i");
        assert_eq!(GaussInt::new(2, -1).to_string(), "2 - i");
        assert_eq!(GaussInt::new(-5, 0).to_string(), "-5");
    }
}
