//! Exhaustive checks in GL₂(F_q) for small q: element orders in PGL₂ versus
//! tr²/det, Cartan subgroups and their normalizers, and PSL₂ orders.

use std::collections::{HashMap, HashSet};

use galimage_arith::int::factor_u64;
use galimage_arith::{FFElem, FiniteField};
use serde::Serialize;

/// F_q with elements numbered 0..q and full operation tables.
#[derive(Clone, Debug)]
pub struct SmallField {
    q: usize,
    characteristic: u64,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    zero: u16,
    one: u16,
}

pub const MAX_ORACLE_FIELD: u64 = 121;

impl SmallField {
    /// The field of size q (a prime power at most 121).
    pub fn new(q: u64) -> Option<Self> {
        let f = factor_u64(q);
        if f.len() != 1 || q > MAX_ORACLE_FIELD {
            return None;
        }
        let (p, e) = f[0];
        let field = FiniteField::extension(p, e as usize).ok()?;
        Some(Self::from_field(&field))
    }

    fn from_field(field: &FiniteField) -> Self {
        let elems = field.elements();
        let q = elems.len();
        let index: HashMap<FFElem, u16> = elems
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), i as u16))
            .collect();
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for (i, x) in elems.iter().enumerate() {
            for (j, y) in elems.iter().enumerate() {
                add[i * q + j] = index[&x.add(y)];
                mul[i * q + j] = index[&x.mul(y)];
            }
        }
        let neg = elems.iter().map(|x| index[&x.neg()]).collect();
        let inv = elems
            .iter()
            .map(|x| x.inv().map(|y| index[&y]).unwrap_or(u16::MAX))
            .collect();
        SmallField {
            q,
            characteristic: field.characteristic(),
            add,
            mul,
            neg,
            inv,
            zero: index[&field.zero()],
            one: index[&field.one()],
        }
    }

    pub fn size(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn zero(&self) -> u16 {
        self.zero
    }

    pub fn one(&self) -> u16 {
        self.one
    }

    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.q + b as usize]
    }

    pub fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg[b as usize])
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.q + b as usize]
    }

    pub fn neg(&self, a: u16) -> u16 {
        self.neg[a as usize]
    }

    /// Inverse of a nonzero element.
    pub fn inv(&self, a: u16) -> u16 {
        assert_ne!(a, self.zero, "zero has no inverse");
        self.inv[a as usize]
    }

    /// The integer n as a field element.
    pub fn int(&self, n: i64) -> u16 {
        let m = n.rem_euclid(self.characteristic as i64);
        (0..m).fold(self.zero, |acc, _| self.add(acc, self.one))
    }

    pub fn is_square(&self, a: u16) -> bool {
        a == self.zero || (0..self.q as u16).any(|x| self.mul(x, x) == a)
    }

    pub fn elements(&self) -> impl Iterator<Item = u16> {
        0..self.q as u16
    }
}

/// A 2×2 matrix [[a, b], [c, d]] over a [`SmallField`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: u16,
    pub b: u16,
    pub c: u16,
    pub d: u16,
}

impl Mat2 {
    pub fn new(a: u16, b: u16, c: u16, d: u16) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity(f: &SmallField) -> Self {
        Mat2::new(f.one, f.zero, f.zero, f.one)
    }

    pub fn scalar(f: &SmallField, s: u16) -> Self {
        Mat2::new(s, f.zero, f.zero, s)
    }

    pub fn mul(&self, o: &Mat2, f: &SmallField) -> Mat2 {
        Mat2 {
            a: f.add(f.mul(self.a, o.a), f.mul(self.b, o.c)),
            b: f.add(f.mul(self.a, o.b), f.mul(self.b, o.d)),
            c: f.add(f.mul(self.c, o.a), f.mul(self.d, o.c)),
            d: f.add(f.mul(self.c, o.b), f.mul(self.d, o.d)),
        }
    }

    pub fn det(&self, f: &SmallField) -> u16 {
        f.sub(f.mul(self.a, self.d), f.mul(self.b, self.c))
    }

    pub fn trace(&self, f: &SmallField) -> u16 {
        f.add(self.a, self.d)
    }

    pub fn inverse(&self, f: &SmallField) -> Mat2 {
        let di = f.inv(self.det(f));
        Mat2 {
            a: f.mul(self.d, di),
            b: f.neg(f.mul(self.b, di)),
            c: f.neg(f.mul(self.c, di)),
            d: f.mul(self.a, di),
        }
    }

    pub fn is_scalar(&self, f: &SmallField) -> bool {
        self.b == f.zero && self.c == f.zero && self.a == self.d
    }

    pub fn scale(&self, s: u16, f: &SmallField) -> Mat2 {
        Mat2::new(f.mul(self.a, s), f.mul(self.b, s), f.mul(self.c, s), f.mul(self.d, s))
    }

    /// Representative of the class modulo scalars: first nonzero entry 1.
    pub fn projective_normal_form(&self, f: &SmallField) -> Mat2 {
        let lead = [self.a, self.b, self.c, self.d]
            .into_iter()
            .find(|&x| x != f.zero)
            .expect("nonzero matrix");
        self.scale(f.inv(lead), f)
    }
}

/// All of GL₂(F_q).
pub fn gl2(f: &SmallField) -> Vec<Mat2> {
    let mut out = Vec::new();
    for a in f.elements() {
        for b in f.elements() {
            for c in f.elements() {
                for d in f.elements() {
                    let m = Mat2::new(a, b, c, d);
                    if m.det(f) != f.zero {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

/// Order of the image of A in PGL₂(F_q).
pub fn pgl_order(m: &Mat2, f: &SmallField) -> u64 {
    let mut power = *m;
    let mut k = 1;
    while !power.is_scalar(f) {
        power = power.mul(m, f);
        k += 1;
    }
    k
}

/// tr(A)²/det(A).
pub fn trace_det_invariant(m: &Mat2, f: &SmallField) -> u16 {
    let t = m.trace(f);
    f.mul(f.mul(t, t), f.inv(m.det(f)))
}

/// Summary of one field's exhaustive check.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub q: u64,
    pub check: String,
    pub elements_checked: usize,
    pub passed: bool,
    pub detail: Option<String>,
}

fn report(q: u64, check: &str, n: usize, failure: Option<String>) -> OracleReport {
    OracleReport {
        q,
        check: check.into(),
        elements_checked: n,
        passed: failure.is_none(),
        detail: failure,
    }
}

/// The order/invariant dictionary over all of GL₂(F_q): orders 1, 2, 3, 4
/// give 4, 0, 1, 2; order 5 gives a root of x² - 3x + 1; orders divisible
/// by the characteristic give 4; and for orders prime to the characteristic
/// the invariant determines the order.
pub fn verify_order_invariant_table(q: u64) -> OracleReport {
    let f = SmallField::new(q).expect("oracle field");
    let ell = f.characteristic();
    let group = gl2(&f);
    let (zero, one, two, four) = (f.int(0), f.int(1), f.int(2), f.int(4));
    let three = f.int(3);
    let mut by_value: HashMap<u16, u64> = HashMap::new();
    for m in &group {
        let order = pgl_order(m, &f);
        let t = trace_det_invariant(m, &f);
        let expected_ok = if order % ell == 0 {
            t == four
        } else {
            match order {
                1 => t == four,
                2 => t == zero,
                3 => t == one,
                4 => t == two,
                5 => f.add(f.sub(f.mul(t, t), f.mul(three, t)), one) == zero,
                _ => true,
            }
        };
        if !expected_ok {
            return report(q, "order-invariant table", group.len(), Some(format!("{m:?} has order {order}")));
        }
        if order % ell != 0 {
            if let Some(&o) = by_value.get(&t) {
                if o != order {
                    return report(
                        q,
                        "order-invariant table",
                        group.len(),
                        Some(format!("invariant shared by orders {o} and {order}")),
                    );
                }
            } else {
                by_value.insert(t, order);
            }
        }
    }
    report(q, "order-invariant table", group.len(), None)
}

/// The invariant is unchanged by scalars and conjugation; checked over all
/// A with a fixed sample of conjugators and all scalars.
pub fn verify_invariance(q: u64) -> OracleReport {
    let f = SmallField::new(q).expect("oracle field");
    let group = gl2(&f);
    let conjugators: Vec<Mat2> = group.iter().step_by(group.len() / 7 + 1).copied().collect();
    for m in &group {
        let t = trace_det_invariant(m, &f);
        for s in f.elements().filter(|&s| s != f.zero) {
            if trace_det_invariant(&m.scale(s, &f), &f) != t {
                return report(q, "invariance", group.len(), Some(format!("scalar changes {m:?}")));
            }
        }
        for g in &conjugators {
            let c = g.mul(m, &f).mul(&g.inverse(&f), &f);
            if trace_det_invariant(&c, &f) != t {
                return report(q, "invariance", group.len(), Some(format!("conjugation changes {m:?}")));
            }
        }
    }
    report(q, "invariance", group.len(), None)
}

/// For q odd and tr(A) ≠ 0: the image of A lies in PSL₂ iff tr²/det is a
/// square.
pub fn verify_psl_membership_criterion(q: u64) -> OracleReport {
    let f = SmallField::new(q).expect("oracle field");
    let group = gl2(&f);
    let psl = psl2_classes(&f);
    for m in group.iter().filter(|m| m.trace(&f) != f.zero) {
        let in_psl = psl.contains(&m.projective_normal_form(&f));
        if in_psl != f.is_square(trace_det_invariant(m, &f)) {
            return report(q, "PSL membership criterion", group.len(), Some(format!("{m:?}")));
        }
    }
    report(q, "PSL membership criterion", group.len(), None)
}

fn psl2_classes(f: &SmallField) -> HashSet<Mat2> {
    gl2(f)
        .into_iter()
        .filter(|m| m.det(f) == f.one)
        .map(|m| m.projective_normal_form(f))
        .collect()
}

fn pgl2_classes(f: &SmallField) -> HashSet<Mat2> {
    gl2(f)
        .into_iter()
        .map(|m| m.projective_normal_form(f))
        .collect()
}

/// |PSL₂(F_q)| by enumeration.
pub fn psl2_order(q: u64) -> usize {
    psl2_classes(&SmallField::new(q).expect("oracle field")).len()
}

/// |PGL₂(F_q)| by enumeration.
pub fn pgl2_order(q: u64) -> usize {
    pgl2_classes(&SmallField::new(q).expect("oracle field")).len()
}

/// q(q² - 1)/gcd(2, q - 1).
pub fn psl2_order_formula(q: u64) -> usize {
    let g = if q % 2 == 1 { 2 } else { 1 };
    (q * (q * q - 1) / g) as usize
}

/// A Cartan subgroup C and its normalizer N in GL₂(F_q).
#[derive(Clone, Debug)]
pub struct CartanData {
    pub split: bool,
    pub cartan: HashSet<Mat2>,
    pub normalizer: HashSet<Mat2>,
}

/// Split: the diagonal matrices. Non-split: the powers of the companion
/// matrix of a primitive quadratic, i.e. multiplication by a generator of
/// F_{q²}^x on the basis {1, γ}.
pub fn cartan_and_normalizer(q: u64, split: bool) -> CartanData {
    let f = SmallField::new(q).expect("oracle field");
    let group = gl2(&f);
    let cartan: HashSet<Mat2> = if split {
        group
            .iter()
            .filter(|m| m.b == f.zero && m.c == f.zero)
            .copied()
            .collect()
    } else {
        let target = (q * q - 1) as usize;
        let gen = f
            .elements()
            .flat_map(|s| f.elements().map(move |n| (s, n)))
            .map(|(s, n)| Mat2::new(f.zero, f.neg(n), f.one, s))
            .find(|m| m.det(&f) != f.zero && gl_order(m, &f) == target)
            .expect("F_q² has a generator");
        let mut c = HashSet::new();
        let mut x = Mat2::identity(&f);
        for _ in 0..target {
            c.insert(x);
            x = x.mul(&gen, &f);
        }
        c
    };
    let gens: Vec<Mat2> = cartan.iter().copied().collect();
    let normalizer = group
        .iter()
        .filter(|g| {
            let gi = g.inverse(&f);
            gens.iter().all(|c| cartan.contains(&g.mul(c, &f).mul(&gi, &f)))
        })
        .copied()
        .collect();
    CartanData {
        split,
        cartan,
        normalizer,
    }
}

fn gl_order(m: &Mat2, f: &SmallField) -> usize {
    let id = Mat2::identity(f);
    let mut x = *m;
    let mut k = 1;
    while x != id {
        x = x.mul(m, f);
        k += 1;
    }
    k
}

/// [N:C] = 2, and for odd q every g ∈ N - C has trace 0 and scalar square.
pub fn verify_cartan(q: u64, split: bool) -> OracleReport {
    let f = SmallField::new(q).expect("oracle field");
    let data = cartan_and_normalizer(q, split);
    let name = if split { "split Cartan" } else { "non-split Cartan" };
    let n = data.normalizer.len();
    if n != 2 * data.cartan.len() || !data.cartan.is_subset(&data.normalizer) {
        return report(q, name, n, Some(format!("|N| = {n}, |C| = {}", data.cartan.len())));
    }
    if q % 2 == 1 {
        for g in data.normalizer.difference(&data.cartan) {
            if g.trace(&f) != f.zero || !g.mul(g, &f).is_scalar(&f) {
                return report(q, name, n, Some(format!("{g:?} in N - C")));
            }
        }
    }
    report(q, name, n, None)
}

/// Fields covered by the exhaustive suites.
pub const ORACLE_FIELDS: [u64; 5] = [3, 5, 7, 9, 11];

/// Every oracle check: the order/invariant dictionary, invariance, the PSL₂
/// criterion and Cartan facts for q ∈ {3, 5, 7, 9, 11}; PSL₂ = PGL₂ for
/// q ∈ {2, 4, 8}; and |PSL₂(F_q)| for q ≤ 11.
pub fn selftest() -> Vec<OracleReport> {
    let mut out = Vec::new();
    for q in ORACLE_FIELDS {
        out.push(verify_order_invariant_table(q));
        out.push(verify_invariance(q));
        out.push(verify_psl_membership_criterion(q));
        out.push(verify_cartan(q, true));
        out.push(verify_cartan(q, false));
    }
    for q in [2u64, 4, 8] {
        let (a, b) = (psl2_order(q), pgl2_order(q));
        out.push(report(q, "PSL2 = PGL2", b, (a != b).then(|| format!("{a} != {b}"))));
    }
    for q in [2u64, 3, 4, 5, 7, 8, 9, 11] {
        let (got, want) = (psl2_order(q), psl2_order_formula(q));
        out.push(report(q, "PSL2 order", got, (got != want).then(|| format!("{got} != {want}"))));
    }
    out
}
