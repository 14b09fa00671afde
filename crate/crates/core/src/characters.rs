//! Dirichlet characters: the unit group (Z/mZ)^x, quadratic characters with
//! values in {±1}, and characters with values in a finite field.

use std::collections::HashSet;
use std::sync::Arc;

use galimage_arith::int::{factor_u64, gcd_u64, primitive_root_prime_power, pow_mod};
use galimage_arith::{FFElem, FiniteField};
use num_traits::ToPrimitive;

use crate::error::{CoreError, Result};

pub use galimage_arith::int::kronecker;

/// One cyclic factor of (Z/mZ)^x: a generator and its order, plus the data
/// needed for discrete logarithms in the prime-power component it lives in.
#[derive(Debug, Clone)]
struct Component {
    prime_power: u64,
    generator: u64,
    order: u64,
    /// `log[a mod prime_power]` for the cyclic parts; for the 5-part of 2^e
    /// the table is indexed by `±a` normalized to 1 mod 4.
    log: Vec<u32>,
    kind: ComponentKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ComponentKind {
    Cyclic,
    /// the -1 factor of (Z/2^e)^x, e >= 2
    MinusOne,
    /// the factor generated by 5 in (Z/2^e)^x, e >= 3
    Five,
}

/// The CRT decomposition of (Z/mZ)^x into cyclic factors with explicit
/// generators (lifted to residues mod m that are 1 at the other primes).
#[derive(Debug, Clone)]
pub struct UnitGroupStructure {
    modulus: u64,
    components: Vec<Component>,
}

fn crt_lift(residue: u64, prime_power: u64, modulus: u64) -> u64 {
    // x = residue mod prime_power, x = 1 mod modulus / prime_power
    let other = modulus / prime_power;
    if other == 1 {
        return residue % modulus;
    }
    (0..prime_power)
        .map(|t| 1 + t * other)
        .find(|x| x % prime_power == residue % prime_power)
        .unwrap()
        % modulus
}

impl UnitGroupStructure {
    pub fn new(m: u64) -> Self {
        assert!(m >= 1, "modulus must be positive");
        let mut components = Vec::new();
        for (p, e) in factor_u64(m) {
            let pe = p.pow(e);
            if p == 2 {
                if e >= 2 {
                    let mut log = vec![u32::MAX; pe as usize];
                    log[1] = 0;
                    log[(pe - 1) as usize] = 1;
                    components.push(Component {
                        prime_power: pe,
                        generator: crt_lift(pe - 1, pe, m),
                        order: 2,
                        log,
                        kind: ComponentKind::MinusOne,
                    });
                }
                if e >= 3 {
                    let order = pe / 4;
                    let mut log = vec![u32::MAX; pe as usize];
                    let mut x = 1u64;
                    for t in 0..order {
                        log[x as usize] = t as u32;
                        x = x * 5 % pe;
                    }
                    components.push(Component {
                        prime_power: pe,
                        generator: crt_lift(5, pe, m),
                        order,
                        log,
                        kind: ComponentKind::Five,
                    });
                }
            } else {
                let g = primitive_root_prime_power(p, e);
                let order = pe / p * (p - 1);
                let mut log = vec![u32::MAX; pe as usize];
                let mut x = 1u64;
                for t in 0..order {
                    log[x as usize] = t as u32;
                    x = x * g % pe;
                }
                components.push(Component {
                    prime_power: pe,
                    generator: crt_lift(g, pe, m),
                    order,
                    log,
                    kind: ComponentKind::Cyclic,
                });
            }
        }
        UnitGroupStructure { modulus: m, components }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generators(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.generator).collect()
    }

    pub fn orders(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.order).collect()
    }

    pub fn order(&self) -> u64 {
        self.components.iter().map(|c| c.order).product()
    }

    /// Exponent vector of `a` on the generators, or `None` if `a` is not a unit.
    pub fn exponents(&self, a: i64) -> Option<Vec<u64>> {
        let m = self.modulus as i64;
        let a = a.rem_euclid(m) as u64;
        if gcd_u64(a, self.modulus) != 1 {
            return None;
        }
        Some(
            self.components
                .iter()
                .map(|c| {
                    let r = a % c.prime_power;
                    match c.kind {
                        ComponentKind::Cyclic => c.log[r as usize] as u64,
                        ComponentKind::MinusOne => u64::from(r % 4 == 3),
                        ComponentKind::Five => {
                            let normalized = if r % 4 == 3 { c.prime_power - r } else { r };
                            c.log[normalized as usize] as u64
                        }
                    }
                })
                .collect(),
        )
    }

    /// Size of the subgroup generated by the given residues.
    pub fn generated_subgroup_size(&self, elements: &[u64]) -> u64 {
        let m = self.modulus;
        let mut seen: HashSet<u64> = HashSet::from([1 % m]);
        let mut frontier = vec![1 % m];
        while let Some(x) = frontier.pop() {
            for &g in elements {
                let y = (x as u128 * (g % m) as u128 % m as u128) as u64;
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
        seen.len() as u64
    }
}

/// Quadratic character modulo m, given by its signs on the generators.
#[derive(Debug, Clone)]
pub struct QuadChar {
    group: Arc<UnitGroupStructure>,
    signs: Vec<i8>,
}

impl PartialEq for QuadChar {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.signs == other.signs
    }
}

impl Eq for QuadChar {}

impl QuadChar {
    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_trivial(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    /// The Kronecker character a -> (d/a) viewed modulo m; requires that
    /// (d/.) is periodic modulo m on units (true when the conductor divides m).
    pub fn from_kronecker(d: i64, m: u64) -> Self {
        let group = Arc::new(UnitGroupStructure::new(m));
        let signs = group
            .generators()
            .iter()
            .map(|&g| kronecker(d, g as i64))
            .collect();
        QuadChar { group, signs }
    }

    /// χ(a), with 0 for non-units.
    pub fn value(&self, a: i64) -> i8 {
        match self.group.exponents(a) {
            None => 0,
            Some(e) => {
                let odd = e
                    .iter()
                    .zip(&self.signs)
                    .filter(|(&x, &s)| s == -1 && x % 2 == 1)
                    .count();
                if odd % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    /// Smallest d | m such that χ is trivial on units congruent to 1 mod d.
    pub fn conductor(&self) -> u64 {
        let m = self.group.modulus;
        let mut divisors: Vec<u64> = (1..=m).filter(|d| m % d == 0).collect();
        divisors.sort_unstable();
        for d in divisors {
            let trivial_on_kernel = (0..m / d)
                .map(|t| 1 + t * d)
                .filter(|&a| gcd_u64(a, m) == 1)
                .all(|a| self.value(a as i64) == 1);
            if trivial_on_kernel {
                return d;
            }
        }
        m
    }
}

/// All nontrivial quadratic characters modulo m: 2^t - 1 of them, where t
/// is the number of even-order generators.
pub fn enumerate_quadratic_chars(m: u64) -> Vec<QuadChar> {
    let group = Arc::new(UnitGroupStructure::new(m));
    let even: Vec<usize> = group
        .orders()
        .iter()
        .enumerate()
        .filter(|(_, &o)| o % 2 == 0)
        .map(|(i, _)| i)
        .collect();
    let n = group.components.len();
    (1u64..1 << even.len())
        .map(|mask| {
            let mut signs = vec![1i8; n];
            for (bit, &i) in even.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    signs[i] = -1;
                }
            }
            QuadChar {
                group: group.clone(),
                signs,
            }
        })
        .collect()
}

/// Character (Z/NZ)^x -> F^x given by generator images.
#[derive(Debug, Clone)]
pub struct FFChar {
    group: Arc<UnitGroupStructure>,
    images: Vec<FFElem>,
    /// exponent of each image relative to the fixed primitive element
    label: Vec<u64>,
}

impl PartialEq for FFChar {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.images == other.images
    }
}

impl FFChar {
    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn images(&self) -> &[FFElem] {
        &self.images
    }

    /// Discrete logs of the generator images with respect to the field's
    /// deterministic primitive element; a compact description.
    pub fn label(&self) -> &[u64] {
        &self.label
    }

    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(|x| x.is_one())
    }

    pub fn value(&self, a: i64) -> Result<FFElem> {
        let e = self.group.exponents(a).ok_or(CoreError::NonUnitArgument {
            a,
            modulus: self.group.modulus,
        })?;
        let field = self.images.first().map(|x| x.field().clone());
        let Some(field) = field else {
            // trivial group: the only character is trivial, value 1 is
            // returned in whatever field the caller uses via `value_in`
            return Err(CoreError::Schema("character of the trivial group has no field".into()));
        };
        Ok(e.iter()
            .zip(&self.images)
            .fold(field.one(), |acc, (&k, g)| acc.mul(&g.pow_u64(k))))
    }

    /// χ(a) as an element of `field` (handles the trivial group).
    pub fn value_in(&self, a: i64, field: &FiniteField) -> Result<FFElem> {
        if self.images.is_empty() {
            self.group.exponents(a).ok_or(CoreError::NonUnitArgument {
                a,
                modulus: self.group.modulus,
            })?;
            return Ok(field.one());
        }
        self.value(a)
    }
}

/// All homomorphisms (Z/NZ)^x -> F^x: for a generator of order d, every
/// element of F^x of order dividing gcd(d, q - 1).
pub fn enumerate_ff_chars(n: u64, field: &FiniteField) -> Vec<FFChar> {
    let group = Arc::new(UnitGroupStructure::new(n));
    let qm1 = field.size() - 1u32;
    let omega = field.primitive_element();
    let choices: Vec<Vec<(u64, FFElem)>> = group
        .orders()
        .iter()
        .map(|&d| {
            let h = galimage_arith::ffield::unit_gcd(field, d);
            let step = (&qm1 / h).to_u64().expect("small exponent");
            let zeta = omega.pow_u64(step);
            let mut out = Vec::with_capacity(h as usize);
            let mut cur = field.one();
            for j in 0..h {
                out.push((j * step, cur.clone()));
                cur = cur.mul(&zeta);
            }
            out
        })
        .collect();
    let mut result = vec![FFChar {
        group: group.clone(),
        images: vec![],
        label: vec![],
    }];
    for options in choices {
        let mut next = Vec::with_capacity(result.len() * options.len());
        for partial in &result {
            for (exp, img) in &options {
                let mut c = partial.clone();
                c.images.push(img.clone());
                c.label.push(*exp);
                next.push(c);
            }
        }
        result = next;
    }
    result
}

/// ε(p) for a Kronecker nebentypus of discriminant d.
pub fn kronecker_value(d: i64, p: u64) -> i8 {
    kronecker(d, p as i64)
}

/// Whether every nontrivial quadratic character modulo m takes the value -1
/// at one of `primes`.
pub fn primes_cover_quadratic_characters(m: u64, primes: &[u64]) -> bool {
    enumerate_quadratic_chars(m)
        .iter()
        .all(|chi| primes.iter().any(|&p| chi.value(p as i64) == -1))
}

/// Euler's criterion modulo an odd prime, for tests and cross-checks.
pub fn euler_criterion(a: i64, p: u64) -> i8 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_group_shapes() {
        let g40 = UnitGroupStructure::new(40);
        let mut o = g40.orders();
        o.sort_unstable();
        assert_eq!(o, vec![2, 2, 4]);
        assert_eq!(g40.order(), 16);
        let g27 = UnitGroupStructure::new(27);
        assert_eq!(g27.generators(), vec![2]);
        assert_eq!(g27.orders(), vec![18]);
        assert_eq!(UnitGroupStructure::new(2).order(), 1);
    }

    #[test]
    fn quadratic_counts() {
        assert_eq!(enumerate_quadratic_chars(3).len(), 1);
        assert_eq!(enumerate_quadratic_chars(40).len(), 7);
        assert_eq!(enumerate_quadratic_chars(120).len(), 15);
        assert_eq!(enumerate_quadratic_chars(1).len(), 0);
    }

    #[test]
    fn kronecker_nebentypus_values() {
        let eps27 = QuadChar::from_kronecker(-3, 27);
        assert_eq!(eps27.value(5), -1);
        assert_eq!(eps27.value(1), 1);
        assert_eq!(eps27.conductor(), 3);
        let eps160 = QuadChar::from_kronecker(-20, 160);
        assert_eq!(eps160.value(3), 1);
        assert_eq!(eps160.conductor(), 20);
        for p in [3i64, 7, 11, 13, 17, 19] {
            assert_eq!(eps160.value(p), kronecker(-5, p));
        }
    }

    #[test]
    fn ff_char_counts() {
        let f49 = FiniteField::extension(7, 2).unwrap();
        assert_eq!(enumerate_ff_chars(27, &f49).len(), 6);
        let f121 = FiniteField::extension(11, 2).unwrap();
        assert_eq!(enumerate_ff_chars(27, &f121).len(), 6);
        let f7 = FiniteField::prime_field(7).unwrap();
        let trivial = enumerate_ff_chars(2, &f7);
        assert_eq!(trivial.len(), 1);
        assert!(trivial[0].is_trivial());
        assert!(trivial[0].value_in(1, &f7).unwrap().is_one());
        assert!(enumerate_ff_chars(27, &f49)[3].value(3).is_err());
    }
}
