//! Factorization of integer polynomials into irreducibles over Q
//! (Zassenhaus: factor modulo a prime, Hensel lift, recombine).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::fp::FpPoly;
use crate::int::is_prime_u64;
use crate::poly::{QPoly, ZPoly};

/// Number of candidate primes tried before choosing the one with the fewest
/// modular factors.
const PRIME_CANDIDATES: usize = 6;

/// Irreducible factors over Q of a nonzero integer polynomial, each primitive
/// with positive leading coefficient, with multiplicities. Constant content is
/// discarded. Output is sorted by degree then coefficients.
pub fn factor_over_q(f: &ZPoly) -> Vec<(ZPoly, u32)> {
    assert!(!f.is_zero(), "cannot factor the zero polynomial");
    let mut out = Vec::new();
    let f = f.primitive_part();
    if f.degree() == Some(0) {
        return out;
    }
    // squarefree decomposition over Q (characteristic zero, Yun)
    let fq = f.to_rational();
    let mut c = fq.gcd(&fq.derivative());
    let mut w = fq.divrem(&c).0;
    let mut i = 1u32;
    while w.degree().unwrap_or(0) > 0 {
        let y = w.gcd(&c);
        let z = w.divrem(&y).0;
        if z.degree().unwrap_or(0) > 0 {
            for g in factor_squarefree(&z.to_primitive_integer()) {
                out.push((g, i));
            }
        }
        i += 1;
        w = y;
        c = c.divrem(&w).0;
    }
    out.sort_by_key(|a| sort_key(&a.0));
    out
}

fn sort_key(p: &ZPoly) -> (usize, Vec<BigInt>) {
    let mut c = p.coeffs().to_vec();
    c.reverse();
    (c.len(), c)
}

/// True iff `f` (degree >= 1) is irreducible over Q.
pub fn is_irreducible_over_q(f: &ZPoly) -> bool {
    let fac = factor_over_q(f);
    fac.len() == 1 && fac[0].1 == 1
}

/// Rational roots of a polynomial with rational coefficients.
pub fn rational_roots(f: &QPoly) -> Vec<num_rational::BigRational> {
    if f.is_zero() {
        return vec![];
    }
    let z = f.to_primitive_integer();
    factor_over_q(&z)
        .into_iter()
        .filter(|(g, _)| g.degree() == Some(1))
        .map(|(g, _)| num_rational::BigRational::new(-g.coeff(0), g.coeff(1)))
        .collect()
}

/// Factor a primitive squarefree polynomial of positive degree.
fn factor_squarefree(f: &ZPoly) -> Vec<ZPoly> {
    let n = f.degree().unwrap();
    if n == 1 {
        return vec![f.primitive_part()];
    }
    let a = f.lc();
    // monic transform F(x) = a^(n-1) f(x / a)
    let monic = if a.is_one() {
        f.clone()
    } else {
        let mut c = Vec::with_capacity(n + 1);
        let mut pow = BigInt::one();
        for i in (0..=n).rev() {
            c.push(f.coeff(i) * &pow);
            pow *= &a;
        }
        c.reverse();
        // a^n f(x / a) has every coefficient divisible by a
        ZPoly::new(c.into_iter().map(|x| x / &a).collect())
    };
    factor_monic_squarefree(&monic)
        .into_iter()
        .map(|g| {
            if a.is_one() {
                g
            } else {
                // g(a x), then primitive part
                let d = g.degree().unwrap();
                let mut pow = BigInt::one();
                let mut c = Vec::with_capacity(d + 1);
                for i in 0..=d {
                    c.push(g.coeff(i) * &pow);
                    pow *= &a;
                }
                ZPoly::new(c).primitive_part()
            }
        })
        .collect()
}

fn factor_monic_squarefree(f: &ZPoly) -> Vec<ZPoly> {
    let n = f.degree().unwrap();
    if n == 1 {
        return vec![f.clone()];
    }
    let disc = f.discriminant();
    debug_assert!(!disc.is_zero());
    let mut best: Option<(u64, Vec<FpPoly>)> = None;
    let mut tried = 0;
    let mut p = 2u64;
    while tried < PRIME_CANDIDATES {
        p += 1;
        if !is_prime_u64(p) || (&disc % p).is_zero() {
            continue;
        }
        tried += 1;
        let fac: Vec<FpPoly> = FpPoly::from_zpoly(f, p)
            .factor()
            .into_iter()
            .map(|(g, _)| g)
            .collect();
        if fac.len() == 1 {
            return vec![f.clone()];
        }
        if best.as_ref().is_none_or(|(_, b)| fac.len() < b.len()) {
            best = Some((p, fac));
        }
    }
    let (p, local) = best.unwrap();

    // Mignotte-type bound on factor coefficients, generously rounded up
    let norm_sq: BigInt = f.coeffs().iter().map(|c| c * c).sum();
    let norm = norm_sq.sqrt() + 1;
    let bound: BigInt = (BigInt::one() << (n + 1)) * norm;
    let pb = BigInt::from(p);
    let mut modulus = pb.clone();
    let mut k = 1u32;
    while modulus <= bound {
        modulus *= &pb;
        k += 1;
    }
    let lifted = hensel_lift_all(f, &local, p, k);

    // recombination
    let mut remaining: Vec<ZPoly> = lifted;
    let mut g = f.clone();
    let mut out = Vec::new();
    let mut size = 1;
    while 2 * size <= remaining.len() {
        let mut found = false;
        for subset in combinations(remaining.len(), size) {
            let cand = subset
                .iter()
                .fold(ZPoly::one(), |acc, &i| (&acc * &remaining[i]).reduce_mod(&modulus))
                .reduce_symmetric(&modulus);
            if let Some(q) = g.exact_div(&cand) {
                out.push(cand);
                g = q;
                let keep: Vec<ZPoly> = remaining
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !subset.contains(i))
                    .map(|(_, h)| h.clone())
                    .collect();
                remaining = keep;
                found = true;
                break;
            }
        }
        if !found {
            size += 1;
        }
    }
    out.push(g);
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return out;
            }
        }
    }
}

/// Lift monic `f = prod local[i] (mod p)` to a factorization modulo `p^k`.
fn hensel_lift_all(f: &ZPoly, local: &[FpPoly], p: u64, k: u32) -> Vec<ZPoly> {
    let mut out = Vec::new();
    let mut current = f.clone();
    for i in 0..local.len() - 1 {
        let g = local[i].clone();
        let h = local[i + 1..]
            .iter()
            .fold(FpPoly::one(p), |acc, x| acc.mul(x));
        let (g_lift, h_lift) = hensel_lift_pair(&current, &g, &h, p, k);
        out.push(g_lift);
        current = h_lift;
    }
    out.push(current);
    out
}

/// Linear Hensel lifting of `f = g h (mod p)`, `g` and `h` monic and coprime,
/// to `f = G H (mod p^k)`.
fn hensel_lift_pair(f: &ZPoly, g: &FpPoly, h: &FpPoly, p: u64, k: u32) -> (ZPoly, ZPoly) {
    let (one, _, t) = g.xgcd(h);
    assert!(one.is_one(), "Hensel lifting needs coprime factors");
    let pb = BigInt::from(p);
    let mut gz = g.to_zpoly();
    let mut hz = h.to_zpoly();
    let mut pm = pb.clone();
    for _ in 1..k {
        let diff = f - &(&gz * &hz);
        let e_z = ZPoly::new(diff.coeffs().iter().map(|c| c.div_floor(&pm)).collect());
        let e = FpPoly::from_zpoly(&e_z, p);
        let dg = t.mul(&e).rem(g);
        let dh = e.sub(&dg.mul(h)).divrem(g).0;
        gz = &gz + &dg.to_zpoly().scale(&pm);
        hz = &hz + &dh.to_zpoly().scale(&pm);
        pm *= &pb;
        gz = gz.reduce_mod(&pm);
        hz = hz.reduce_mod(&pm);
    }
    (gz, hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(c: &[i64]) -> ZPoly {
        ZPoly::from_i64(c)
    }

    fn reassemble(f: &ZPoly) -> ZPoly {
        factor_over_q(f)
            .iter()
            .fold(ZPoly::one(), |acc, (g, e)| &acc * &g.pow(*e))
    }

    #[test]
    fn swinnerton_dyer_style() {
        // x^4 - 10x^2 + 1 is irreducible but splits modulo every prime
        assert!(is_irreducible_over_q(&z(&[1, 0, -10, 0, 1])));
        // (x^2 - 2)(x^2 - 3)
        let f = z(&[6, 0, -5, 0, 1]);
        let fac = factor_over_q(&f);
        assert_eq!(fac.len(), 2);
        assert_eq!(reassemble(&f), f);
    }

    #[test]
    fn non_monic_and_repeated() {
        // (2x + 3)^2 (3x^2 - 5)
        let f = &z(&[3, 2]).pow(2) * &z(&[-5, 0, 3]);
        let fac = factor_over_q(&f);
        assert_eq!(fac, vec![(z(&[3, 2]), 2), (z(&[-5, 0, 3]), 1)]);
    }

    #[test]
    fn cyclotomic_pieces() {
        // x^12 - 1 has 6 cyclotomic factors
        let mut c = vec![0i64; 13];
        c[0] = -1;
        c[12] = 1;
        let f = z(&c);
        assert_eq!(factor_over_q(&f).len(), 6);
        assert_eq!(reassemble(&f), f);
    }

    #[test]
    fn roots() {
        let f = z(&[-6, 1, 1]).to_rational(); // (x - 2)(x + 3)
        let mut r = rational_roots(&f);
        r.sort();
        assert_eq!(
            r,
            vec![
                num_rational::BigRational::from_integer((-3).into()),
                num_rational::BigRational::from_integer(2.into())
            ]
        );
    }
}
