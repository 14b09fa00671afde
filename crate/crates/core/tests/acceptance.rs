//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines always reach the output.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use galimage_arith::fp::FpPoly;
use galimage_arith::int::{factor_bigint, factor_u64, kronecker, primes_up_to};
use galimage_arith::nfpoly::{roots_of_rational_poly, sqrt};
use galimage_arith::{FiniteField, QPoly, ZPoly};
use galimage_core::analysis::{analyze, KLProfile};
use galimage_core::certifier::{
    exceptional_set, exponents, q_norm_gcd, Certifier, CertifierConfig, Choices, ConditionOutcome,
    PrimeTable, Verdict,
};
use galimage_core::characters::{enumerate_ff_chars, enumerate_quadratic_chars, euler_criterion, QuadChar};
use galimage_core::newform::{self, NewformRecord};
use galimage_core::oracle;
use galimage_core::qexp::{build_level27_newform, hecke_validate, GaussInt};
use num_bigint::BigInt;
use num_traits::{One, Pow};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn g(re: i64, im: i64) -> GaussInt {
    GaussInt::new(re, im)
}

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn level27() -> (NewformRecord, KLProfile) {
    let rec = newform::builtin("level27", None).unwrap();
    let p = analyze(&rec, &Default::default()).unwrap();
    (rec, p)
}

fn level160() -> (NewformRecord, KLProfile) {
    let rec = newform::builtin("level160", None).unwrap();
    let p = analyze(&rec, &Default::default()).unwrap();
    (rec, p)
}

fn r27(a: &[GaussInt], p: usize) -> BigInt {
    let s = &a[p - 1] * &a[p - 1];
    &s.re * big(kronecker(-3, p as i64) as i64)
}

fn criterion_1() {
    let a = build_level27_newform(2000).unwrap();
    let displayed = [
        (1, g(1, 0)),
        (2, g(0, 3)),
        (4, g(-5, 0)),
        (5, g(0, -3)),
        (7, g(5, 0)),
        (8, g(0, -3)),
        (10, g(9, 0)),
        (11, g(0, -15)),
        (13, g(-10, 0)),
    ];
    for (n, v) in displayed {
        assert_eq!(a[n - 1], v, "a_{n}");
    }
    for n in [3, 6, 9, 12] {
        assert!(a[n - 1].is_zero(), "a_{n}");
    }
    assert_eq!(a.len(), 2000);
    let report = hecke_validate(&a, 27, 3, -3);
    assert!(report.passed(), "{:?}", report.violation);
    assert!(report.relations_checked > 2000);
}

fn criterion_2() {
    let a = build_level27_newform(2000).unwrap();
    assert_eq!(r27(&a, 5), big(9));
    assert_eq!(r27(&a, 109), big(164 * 164));
    assert_eq!(r27(&a, 379), big(704 * 704));
    for p in primes_up_to(2000).into_iter().filter(|&p| p != 3) {
        let r = r27(&a, p as usize);
        assert!(common::is_perfect_square(&r), "r_{p} = {r}");
    }
    // the library's r_p agree with the direct computation
    let (rec, _) = level27();
    for p in [2u64, 5, 7, 109, 379, 1999] {
        assert_eq!(rec.r(p).unwrap().as_rational().unwrap(), r27(&a, p as usize).into());
    }
}

fn criterion_3() {
    let a = build_level27_newform(2000).unwrap();
    let shift = |q: i64| r27(&a, q as usize) - (big(1) + big(q * q)).pow(2u32);
    assert_eq!(shift(109), -big(4 * 27 * 7 * 19 * 31 * 317));
    assert_eq!(shift(379), -big(4 * 27) * big(2647) * big(72173));
    let (rec, profile) = level27();
    let table = PrimeTable::new(&rec, &profile, 10_000).unwrap();
    let choices = Choices {
        q_primes: vec![109, 379],
        p_primes: vec![5],
        generator_prime: 5,
    };
    let s = exceptional_set(&rec, &profile, &table, &choices, &[]).unwrap();
    assert_eq!(s.ells(), common::LEVEL27_S.to_vec());
    assert!(s.members.iter().all(|m| m.lambda.is_none()));
}

fn criterion_4() {
    let (rec, profile) = level27();
    let a = build_level27_newform(2000).unwrap();
    let cfg = CertifierConfig {
        choices: Some(Choices {
            q_primes: vec![109, 379],
            p_primes: vec![5],
            generator_prime: 5,
        }),
        ..Default::default()
    };
    let c = Certifier::new(&rec, &profile, &cfg).unwrap();
    for ell in primes_up_to(200).into_iter().filter(|&l| l >= 7) {
        let cert = c.certify(ell).unwrap();
        assert_eq!(cert.lambdas.len(), 1, "K = Q has one prime above {ell}");
        let l = &cert.lambdas[0];
        assert_eq!(
            l.verdict,
            Verdict::PSL2 {
                field: format!("F_{ell}")
            },
            "ell = {ell}"
        );
        let direct = l.conditions.iter().all(|r| r.all_hold());
        assert_eq!(common::level27_failures(&a, ell, 2000).is_empty(), direct, "ell = {ell}");
        assert_eq!(l.in_exceptional_set, common::LEVEL27_S.contains(&ell));
        if ell == 7 || ell == 11 {
            assert!(direct && l.in_exceptional_set, "ell = {ell} passes directly");
            let e = exponents(27, 3, ell);
            assert_eq!((e.e0, e.e1, e.e2, e.calm), (0, 0, 0, 3));
        }
        if ell == 7 {
            for r in &l.conditions {
                let ConditionOutcome::Witnessed { witnesses } = &r.e else {
                    panic!("condition (e) must be witnessed at 7: {:?}", r.e)
                };
                assert_eq!(witnesses.len(), 3);
                assert!(witnesses.iter().all(|w| [13, 37, 41].contains(&w.prime)), "{witnesses:?}");
            }
        }
    }
}

fn criterion_5() {
    let (rec, profile) = level160();
    let e = rec.field();
    assert_eq!(e.degree(), 6);
    let cubic = QPoly::from_zpoly(&ZPoly::from_i64(&[1, -4, 1, 1]));
    let quad = QPoly::from_zpoly(&ZPoly::from_i64(&[1, 0, 1]));
    assert_eq!(roots_of_rational_poly(e, &cubic).unwrap().len(), 3);
    assert_eq!(roots_of_rational_poly(e, &quad).unwrap().len(), 2);

    assert_eq!(profile.k.degree(), 3);
    let norm = |p: u64| profile.k.r_in_k(&rec, p).unwrap().unwrap().norm();
    let two = |e: u32| BigInt::one() << e;
    assert_eq!(norm(3), two(6).into());
    assert_eq!(norm(7), two(6).into());
    assert_eq!(norm(11), (two(12) * big(625)).into());
    assert_eq!(norm(13), (two(12) * big(169)).into());
    assert_eq!(norm(17), (two(18) * big(25)).into());
    assert_eq!(q_norm_gcd(&rec, &profile, &[641, 1061]).unwrap(), two(12));
    for p in [3, 7, 11] {
        let r = profile.k.r_in_k(&rec, p).unwrap().unwrap();
        assert!(r.as_rational().is_none(), "r_{p} is rational");
        let s = sqrt(&r).unwrap().expect("square in K");
        assert_eq!(&s * &s, r);
    }
}

fn criterion_6() {
    let (rec, profile) = level160();
    let c = Certifier::new(&rec, &profile, &CertifierConfig::default()).unwrap();
    // Z[r_3] has index 2^6 * 5 in R, so λ = ℓR is inert exactly when the
    // minimal polynomial of r_3 stays irreducible modulo ℓ
    let rq = profile.k.r_in_k(&rec, 3).unwrap().unwrap().minpoly_integral().unwrap();
    for ell in [3u64, 7, 11, 19, 29] {
        assert!([2, 3, 4, 6, 7, 9, 10, 11].contains(&(ell % 13)), "ell = {ell}");
        assert!(FpPoly::from_zpoly(&rq, ell).is_irreducible());
        let cert = c.certify(ell).unwrap();
        assert_eq!(cert.lambdas.len(), 1, "ell = {ell} inert");
        let l = &cert.lambdas[0];
        assert_eq!(l.residue_degree, 3);
        assert_eq!(
            l.verdict,
            Verdict::PSL2 {
                field: format!("F_{ell}^3")
            }
        );
        let direct = l.conditions.iter().all(|r| r.all_hold());
        if ell <= 11 {
            assert!(l.in_exceptional_set && direct, "ell = {ell} direct");
        } else {
            assert!(!l.in_exceptional_set, "ell = {ell} outside S");
        }
        assert!(l.k_lambda.certified && l.k_lambda.observed_degree == 3);
    }
    let m: Vec<u64> = [3u64, 7, 11, 19].iter().map(|&l| exponents(160, 3, l).calm).collect();
    assert_eq!(m, vec![120, 40, 40, 40]);
}

fn criterion_7() {
    for q in oracle::ORACLE_FIELDS {
        for r in [
            oracle::verify_order_invariant_table(q),
            oracle::verify_invariance(q),
            oracle::verify_psl_membership_criterion(q),
            oracle::verify_cartan(q, true),
            oracle::verify_cartan(q, false),
        ] {
            assert!(r.passed, "{r:?}");
        }
        let gl = oracle::gl2(&oracle::SmallField::new(q).unwrap()).len() as u64;
        assert_eq!(gl, (q * q - 1) * (q * q - q));
        assert_eq!(oracle::psl2_order(q), oracle::psl2_order_formula(q));
    }
}

fn criterion_8() {
    let config = Config {
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&(1u64..2_000_000_000_000), |n| {
            let prod: u64 = factor_u64(n).iter().map(|&(p, e)| p.pow(e)).product();
            prop_assert_eq!(prod, n);
            Ok(())
        })
        .unwrap();
    runner
        .run(&(1i64..1_000_000_000_000), |n| {
            let n = big(n) * big(1_000_003);
            let prod = factor_bigint(&n)
                .iter()
                .fold(BigInt::one(), |acc, (p, e)| acc * p.pow(*e));
            prop_assert_eq!(prod, n);
            Ok(())
        })
        .unwrap();
    let primes = [2u64, 3, 5, 7, 11, 13];
    runner
        .run(
            &(prop::sample::select(primes.to_vec()), prop::collection::vec(0u64..13, 2..8)),
            |(p, coeffs)| {
                let mut c: Vec<u64> = coeffs.iter().map(|x| x % p).collect();
                c.push(1);
                let f = FpPoly::new(p, c);
                let prod = f
                    .factor()
                    .iter()
                    .fold(FpPoly::one(p), |acc, (g, e)| (0..*e).fold(acc, |a, _| a.mul(g)));
                prop_assert_eq!(prod, f.monic());
                Ok(())
            },
        )
        .unwrap();
    for (n, field) in [(27u64, FiniteField::prime_field(7).unwrap()), (160, FiniteField::extension(3, 2).unwrap())] {
        let chars = enumerate_ff_chars(n, &field);
        runner
            .run(&(1i64..100_000, 1i64..100_000), |(a, b)| {
                for chi in &chars {
                    match (chi.value(a), chi.value(b), chi.value(a * b)) {
                        (Ok(x), Ok(y), Ok(z)) => prop_assert_eq!(x.mul(&y), z),
                        (x, y, z) => prop_assert!(z.is_err() && (x.is_err() || y.is_err())),
                    }
                }
                Ok(())
            })
            .unwrap();
    }
    let quad: Vec<QuadChar> = enumerate_quadratic_chars(120);
    runner
        .run(&(1i64..100_000, 1i64..100_000), |(a, b)| {
            for chi in &quad {
                prop_assert_eq!(chi.value(a) * chi.value(b), chi.value(a * b));
            }
            Ok(())
        })
        .unwrap();
    runner
        .run(&(prop::sample::select(primes_up_to(1000)[1..].to_vec()), -10_000i64..10_000), |(p, a)| {
            prop_assert_eq!(euler_criterion(a, p), kronecker(a, p as i64));
            Ok(())
        })
        .unwrap();
    assert_eq!(enumerate_quadratic_chars(3).len(), 1);
    assert_eq!(enumerate_quadratic_chars(40).len(), 7);
    assert_eq!(enumerate_quadratic_chars(120).len(), 15);
}

fn main() {
    let criteria: [(&str, fn(), Duration); 8] = [
        ("level-27 q-expansion and Hecke relations", criterion_1, Duration::from_secs(60)),
        ("level-27 twist invariants r_p", criterion_2, Duration::from_secs(60)),
        ("level-27 exceptional-set identities and S", criterion_3, Duration::from_secs(60)),
        ("level-27 certification for 7 <= ell <= 200", criterion_4, Duration::from_secs(300)),
        ("level-160 fields, norms and gcd", criterion_5, Duration::from_secs(60)),
        ("level-160 certification for ell in {3, 7, 11, 19, 29}", criterion_6, Duration::from_secs(120)),
        ("GL2 oracle suites", criterion_7, Duration::from_secs(30)),
        ("arithmetic and character property suites", criterion_8, Duration::from_secs(30)),
    ];
    let mut failures = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let took = start.elapsed();
        let ok = outcome.is_ok() && took <= *limit;
        if !ok {
            failures += 1;
        }
        let why = match (&outcome, took <= *limit) {
            (Err(_), _) => " (assertion failed)".to_string(),
            (Ok(()), false) => format!(" (over the {:?} limit)", limit),
            _ => String::new(),
        };
        println!(
            "criterion {}: {} - {} [{:.2?}]{}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            name,
            took,
            why
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
