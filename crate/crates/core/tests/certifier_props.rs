//! Exceptional sets, certificate completeness, replay and determinism.

use std::sync::OnceLock;

use galimage_core::analysis::{analyze, KLProfile};
use galimage_core::certifier::{
    exceptional_set, exponents, primes_in_range, replay, validate_choices, Certificate, Certifier,
    CertifierConfig, Choices, ConditionOutcome, PrimeTable, Verdict,
};
use galimage_core::newform::{self, NewformRecord};
use galimage_core::CoreError;
use proptest::prelude::*;

struct Form {
    rec: NewformRecord,
    profile: KLProfile,
    table: PrimeTable,
}

fn form(name: &'static str) -> &'static Form {
    static L27: OnceLock<Form> = OnceLock::new();
    static L160: OnceLock<Form> = OnceLock::new();
    let cell = if name == "level27" { &L27 } else { &L160 };
    cell.get_or_init(|| {
        let rec = newform::builtin(name, None).unwrap();
        let profile = analyze(&rec, &Default::default()).unwrap();
        let table = PrimeTable::new(&rec, &profile, 10_000).unwrap();
        Form { rec, profile, table }
    })
}

fn certifier(f: &'static Form) -> Certifier<'static> {
    Certifier::new(&f.rec, &f.profile, &CertifierConfig::default()).unwrap()
}

fn level160_choices() -> Choices {
    Choices {
        q_primes: vec![641, 1601],
        p_primes: vec![3, 7, 11],
        generator_prime: 3,
    }
}

#[test]
fn bookkeeping_values() {
    for ell in [7, 11] {
        let e = exponents(27, 3, ell);
        assert_eq!((e.e0, e.e1, e.e2, e.calm), (0, 0, 0, 3));
    }
    assert_eq!(exponents(160, 3, 3).calm, 120);
    for ell in [7, 11, 13, 19, 29] {
        assert_eq!(exponents(160, 3, ell).calm, 40);
    }
    // ℓ | N forces e0 = ℓ - 2
    assert_eq!(exponents(27, 3, 3).e0, 1);
}

#[test]
fn level160_exceptional_set() {
    let f = form("level160");
    let s = exceptional_set(&f.rec, &f.profile, &f.table, &level160_choices(), &[]).unwrap();
    assert_eq!(s.ells(), vec![2, 3, 5, 7, 11, 13]);
    let thirteen: Vec<_> = s.members.iter().filter(|m| m.ell == 13).collect();
    assert_eq!(thirteen.len(), 1);
    assert!(thirteen[0].lambda.is_some(), "only the prime above 13 dividing the q-norms");
    assert_eq!(s.index_primes, vec![2, 5]);
}

#[test]
fn q_prime_must_be_one_mod_level() {
    let f = form("level160");
    let mut c = level160_choices();
    c.q_primes = vec![641, 1061];
    let err = validate_choices(&f.rec, &f.profile, &f.table, &c).unwrap_err();
    assert!(matches!(err, CoreError::InvalidChoice(_)));
    assert!(err.to_string().contains("1061"));

    let mut c = level160_choices();
    c.p_primes = vec![3];
    assert!(matches!(
        validate_choices(&f.rec, &f.profile, &f.table, &c),
        Err(CoreError::InvalidChoice(_))
    ));
    let mut c = level160_choices();
    c.generator_prime = 5;
    assert!(validate_choices(&f.rec, &f.profile, &f.table, &c).is_err());
}

#[test]
fn default_choices_are_valid() {
    for name in ["level27", "level160"] {
        let f = form(name);
        let c = certifier(f);
        assert!(c.choices.q_primes.iter().all(|q| q % f.rec.level() == 1));
        validate_choices(&f.rec, &f.profile, &f.table, &c.choices).unwrap();
    }
    assert_eq!(certifier(form("level160")).choices, level160_choices());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn exceptional_set_monotone_in_index_bound(extra in prop::collection::vec(2u64..200, 0..6)) {
        for name in ["level27", "level160"] {
            let f = form(name);
            let c = certifier(f);
            let base = exceptional_set(&f.rec, &f.profile, &f.table, &c.choices, &[]).unwrap();
            let grown = exceptional_set(&f.rec, &f.profile, &f.table, &c.choices, &extra).unwrap();
            for m in &base.members {
                let kept = grown
                    .members
                    .iter()
                    .any(|g| g.ell == m.ell && (g.lambda.is_none() || g.lambda == m.lambda));
                prop_assert!(kept, "{:?} lost", m);
            }
            for &l in extra.iter().filter(|&&l| primes_in_range(l, l) == vec![l]) {
                prop_assert!(grown.ells().contains(&l));
            }
        }
    }
}

fn assert_complete(cert: &Certificate) {
    for l in &cert.lambdas {
        if !l.verdict.is_certified() {
            continue;
        }
        assert!(l.k_lambda.certified);
        assert!(!l.conditions.is_empty());
        for r in &l.conditions {
            for c in [&r.a, &r.b, &r.c, &r.d, &r.e] {
                match c {
                    ConditionOutcome::Failed { .. } => panic!("certified with a failed condition"),
                    ConditionOutcome::Witnessed { witnesses } => assert!(!witnesses.is_empty()),
                    _ => {}
                }
            }
        }
    }
}

#[test]
fn certified_verdicts_carry_complete_witnesses() {
    let c27 = certifier(form("level27"));
    for ell in primes_in_range(2, 300) {
        let cert = c27.certify(ell).unwrap();
        assert_complete(&cert);
        if ell >= 7 {
            assert!(cert.all_certified(), "level 27, ell = {ell}");
        }
    }
    let c160 = certifier(form("level160"));
    for ell in primes_in_range(2, 120) {
        let cert = c160.certify(ell).unwrap();
        assert_complete(&cert);
        if ell != 2 && ell != 5 {
            assert!(cert.all_certified(), "level 160, ell = {ell}: {}", cert.summary());
        }
    }
}

#[test]
fn unresolved_primes_stay_inconclusive() {
    let c160 = certifier(form("level160"));
    let five = c160.certify(5).unwrap();
    assert!(five.lambdas.iter().all(|l| matches!(l.verdict, Verdict::Inconclusive { .. })));
    let c27 = certifier(form("level27"));
    for ell in [2, 3, 5] {
        let cert = c27.certify(ell).unwrap();
        assert!(!cert.all_certified(), "ell = {ell}");
        assert!(cert.lambdas.iter().all(|l| l.in_exceptional_set));
    }
    assert!(c27.certify(9).is_err());
}

#[test]
fn replay_reproduces_and_detects_tampering() {
    for (name, ell) in [("level27", 7u64), ("level27", 13), ("level160", 7), ("level160", 19)] {
        let f = form(name);
        let cert = certifier(f).certify(ell).unwrap();
        let report = replay(&f.rec, &f.profile, &cert).unwrap();
        assert!(report.ok(), "{name} {ell}");
        let back: Certificate = serde_json::from_str(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
    }
    // swap the condition (e) witnesses at ℓ = 7 for a prime that does not work
    let f = form("level27");
    let mut cert = certifier(f).certify(7).unwrap();
    for l in &mut cert.lambdas {
        for r in &mut l.conditions {
            if let ConditionOutcome::Witnessed { witnesses } = &mut r.e {
                for w in witnesses {
                    w.prime = 2;
                }
            }
        }
    }
    let report = replay(&f.rec, &f.profile, &cert).unwrap();
    assert!(!report.deterministic && !report.witnesses_reproduce);
}

#[test]
fn certificates_are_deterministic() {
    let f = form("level160");
    let a = certifier(f).certify(11).unwrap().to_json();
    let b = certifier(f).certify(11).unwrap().to_json();
    assert_eq!(a, b);
}
