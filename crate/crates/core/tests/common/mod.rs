//! Independent checks for the level 27 form, written with plain modular
//! arithmetic on the Gaussian integer coefficients. Nothing here goes through
//! number fields, primes above ℓ or the certifier.

#![allow(dead_code)]

use galimage_core::qexp::GaussInt;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

pub const LEVEL27_S: [u64; 5] = [2, 3, 5, 7, 11];

fn modp(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn legendre(a: i64, p: u64) -> i64 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// ε(p) = (-3/p) for the level 27 form.
fn eps(p: u64) -> i64 {
    legendre(-3, p)
}

/// F_{ℓ²} = F_ℓ[s]/(s² - ν) with ν the least non-residue.
#[derive(Clone, Copy)]
struct Fq2 {
    ell: u64,
    nu: u64,
}

type E2 = (u64, u64);

impl Fq2 {
    fn new(ell: u64) -> Self {
        let nu = (2..ell).find(|&n| legendre(n as i64, ell) == -1).unwrap();
        Fq2 { ell, nu }
    }
    fn int(&self, n: i64) -> E2 {
        (n.rem_euclid(self.ell as i64) as u64, 0)
    }
    fn add(&self, x: E2, y: E2) -> E2 {
        ((x.0 + y.0) % self.ell, (x.1 + y.1) % self.ell)
    }
    fn neg(&self, x: E2) -> E2 {
        ((self.ell - x.0) % self.ell, (self.ell - x.1) % self.ell)
    }
    fn mul(&self, x: E2, y: E2) -> E2 {
        let l = self.ell;
        (
            (x.0 * y.0 + x.1 * y.1 % l * self.nu) % l,
            (x.0 * y.1 + x.1 * y.0) % l,
        )
    }
    fn pow(&self, x: E2, mut e: u64) -> E2 {
        let (mut r, mut b) = ((1, 0), x);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }
    fn all(&self) -> Vec<E2> {
        let l = self.ell;
        (0..l).flat_map(|a| (0..l).map(move |b| (a, b))).collect()
    }
    /// a square root of -1
    fn sqrt_minus_one(&self) -> E2 {
        let m1 = self.int(-1);
        self.all().into_iter().find(|&x| self.mul(x, x) == m1).unwrap()
    }
}

/// Independent decision for conditions (a)-(e) at ℓ ≥ 7 for the level 27
/// weight 3 form with coefficients `a` (`a[n - 1]` is a_n), using primes up to `bound`.
/// Returns the failing conditions.
pub fn level27_failures(a: &[GaussInt], ell: u64, bound: u64) -> Vec<char> {
    assert!(ell >= 7 && is_prime(ell));
    let primes: Vec<u64> = (2..=bound.min(a.len() as u64))
        .filter(|&p| is_prime(p) && p != 3 && p != ell)
        .collect();
    let r = |p: u64| -> BigInt {
        // r_p = a_p²/ε(p) = a_p² ε(p), a rational integer
        let s = &a[p as usize - 1] * &a[p as usize - 1];
        assert_eq!(s.im, BigInt::from(0));
        &s.re * BigInt::from(eps(p))
    };
    let f = Fq2::new(ell);
    let mut failed = Vec::new();

    // (a): e0 = 0, F = F_Λ, which is F_ℓ when ℓ = 1 mod 4 and F_{ℓ²} otherwise;
    // both embeddings of Z[i] are tried.
    let split = ell % 4 == 1;
    let roots = {
        let s = f.sqrt_minus_one();
        vec![s, f.neg(s)]
    };
    let in_f_lambda = |x: E2| !split || x.1 == 0;
    // χ is determined by ζ = χ(2), 2 generating (Z/27)^x of order 18
    let zetas: Vec<E2> = f
        .all()
        .into_iter()
        .filter(|&z| in_f_lambda(z) && z != (0, 0) && f.pow(z, 18) == (1, 0))
        .collect();
    let dlog27 = |p: u64| (0..18).find(|&k| pow_mod(2, k, 27) == p % 27).unwrap();
    let a_ok = roots.iter().all(|&iota| {
        let red = |g: &GaussInt| f.add(f.int(modp(&g.re, ell) as i64), f.mul(f.int(modp(&g.im, ell) as i64), iota));
        zetas.iter().all(|&z| {
            primes.iter().any(|&p| {
                let x = f.pow(z, dlog27(p));
                let ap = red(&a[p as usize - 1]);
                let c = f.int(eps(p) * (pow_mod(p, 2, ell) as i64));
                let v = f.add(f.add(f.mul(x, x), f.neg(f.mul(ap, x))), c);
                v != (0, 0)
            })
        })
    });
    if !a_ok {
        failed.push('a');
    }

    // (b): M = 3, one character: p = 2 mod 3
    if !primes.iter().any(|&p| p % 3 == 2 && modp(&r(p), ell) != 0) {
        failed.push('b');
    }

    // t_p = r_p / p² mod ℓ; #k_λ = ℓ because K = Q
    let t = |p: u64| modp(&r(p), ell) * pow_mod(pow_mod(p, 2, ell), ell - 2, ell) % ell;
    let k = 3u64;

    // (c)
    let c_ok = (ell > 5 * k - 4 && 27 % ell != 0)
        || matches!(ell % 5, 2 | 3)
        || primes.iter().any(|&p| {
            let tp = t(p);
            ![0, 1, 4 % ell].contains(&tp) && (tp * tp + 1 + 3 * (ell - 1) * tp % ell) % ell != 0
        });
    if !c_ok {
        failed.push('c');
    }

    // (d)
    let d_ok = ell == 7
        || (ell > 4 * k - 3 && 27 % ell != 0)
        || primes.iter().any(|&p| ![0, 1, 2, 4].contains(&t(p)));
    if !d_ok {
        failed.push('d');
    }

    // (e): only when #k_λ = 7; characters mod 189 = products of the
    // characters mod 3 and mod 7
    if ell == 7 {
        let e_ok = [(1i64, 0i64), (0, 1), (1, 1)].iter().all(|&(u, v)| {
            primes.iter().any(|&p| {
                let chi3: i64 = if p % 3 == 1 { 1 } else { -1 };
                let chi7 = legendre(p as i64, 7);
                chi3.pow(u as u32) * chi7.pow(v as u32) == 1 && t(p) == 2
            })
        });
        if !e_ok {
            failed.push('e');
        }
    }
    failed
}

/// Integer square root check independent of the library.
pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}
