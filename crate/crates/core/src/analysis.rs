//! The field K generated by the r_p, a generating set for L, the complete
//! splitting test for λ in L and the PSL₂ versus PGL₂ decision.

use galimage_arith::int::primes_up_to;
use galimage_arith::nfpoly::sqrt;
use galimage_arith::{
    valuation_and_square_in_completion, ArithError, NFElement, NumberField, PrimeData,
    SubfieldEmbedding,
};
use serde::Serialize;

use crate::characters::UnitGroupStructure;
use crate::error::{CoreError, Result};
use crate::newform::NewformRecord;

/// Default bound on primes sampled when looking for a generator of K.
pub const DEFAULT_K_SEARCH_BOUND: u64 = 2000;

/// K found as Q(r_q) inside E.
#[derive(Clone, Debug)]
pub struct KField {
    pub generator_prime: u64,
    pub embedding: SubfieldEmbedding,
    /// number of primes p ∤ N sampled
    pub sampled: usize,
    /// every sampled r_p lies in Q(r_q)
    pub stable: bool,
    /// [K:Q] equals the caller's cap
    pub meets_cap: bool,
}

impl KField {
    pub fn field(&self) -> &NumberField {
        self.embedding.sub()
    }

    pub fn degree(&self) -> usize {
        self.field().degree()
    }

    /// r_p as an element of K, or `None` if it is not in K.
    pub fn r_in_k(&self, rec: &NewformRecord, p: u64) -> Result<Option<NFElement>> {
        Ok(self.embedding.to_sub(&rec.r(p)?))
    }
}

fn sampled_primes(rec: &NewformRecord, bound: u64) -> Vec<u64> {
    primes_up_to(bound.min(rec.bound() as u64))
        .into_iter()
        .filter(|p| rec.level() % p != 0)
        .collect()
}

/// The first prime q ∤ N maximizing deg minpoly(r_q) over the sampled
/// primes, with K = Q(r_q). `cap` is an optional known value of [K:Q].
pub fn find_k(rec: &NewformRecord, search_bound: u64, cap: Option<usize>) -> Result<KField> {
    let primes = sampled_primes(rec, search_bound);
    if primes.is_empty() {
        return Err(CoreError::InsufficientCoefficients(format!(
            "no prime p <= {} coprime to {}",
            search_bound.min(rec.bound() as u64),
            rec.level()
        )));
    }
    let mut best: Option<(u64, usize, NFElement)> = None;
    let mut rs = Vec::with_capacity(primes.len());
    for &p in &primes {
        let r = rec.r(p)?;
        let d = r.minpoly().degree().unwrap_or(1);
        if best.as_ref().is_none_or(|(_, bd, _)| d > *bd) {
            best = Some((p, d, r.clone()));
        }
        rs.push(r);
    }
    let (q, d, r) = best.expect("nonempty sample");
    let embedding = SubfieldEmbedding::generated_by(&r, "r")?;
    let stable = rs.iter().all(|x| embedding.to_sub(x).is_some());
    Ok(KField {
        generator_prime: q,
        embedding,
        sampled: primes.len(),
        stable,
        meets_cap: cap == Some(d),
    })
}

/// M = N for odd N and 4N otherwise.
pub fn default_modulus(level: u64) -> u64 {
    if level % 2 == 1 {
        level
    } else {
        4 * level
    }
}

/// Smallest primes p ∤ N with r_p ≠ 0, added greedily when they enlarge the
/// generated subgroup, until they generate (Z/MZ)^x.
pub fn choose_generating_primes(rec: &NewformRecord, m: u64) -> Result<Vec<u64>> {
    let group = UnitGroupStructure::new(m);
    let full = group.order();
    let mut chosen = Vec::new();
    let mut size = 1;
    if size == full {
        return Ok(chosen);
    }
    for p in primes_up_to(rec.bound() as u64) {
        if rec.level() % p == 0 || m % p == 0 || rec.r(p)?.is_zero() {
            continue;
        }
        let mut trial = chosen.clone();
        trial.push(p);
        let s = group.generated_subgroup_size(&trial);
        if s > size {
            chosen = trial;
            size = s;
            if size == full {
                return Ok(chosen);
            }
        }
    }
    Err(CoreError::GeneratorsExhausted(m))
}

/// K and L for a form, with the data needed for splitting tests.
#[derive(Clone, Debug)]
pub struct KLProfile {
    pub k: KField,
    pub modulus: u64,
    pub generating_primes: Vec<u64>,
    /// r_{p_i} as elements of K
    pub generators: Vec<NFElement>,
    /// square roots in K of each r_{p_i}, when all exist
    pub square_witnesses: Option<Vec<NFElement>>,
    /// assumptions the K computation rests on
    pub assumptions: Vec<String>,
}

impl KLProfile {
    pub fn l_equals_k(&self) -> bool {
        self.square_witnesses.is_some()
    }

    pub fn summary(&self) -> ProfileSummary {
        let strings = |v: &[NFElement]| v.iter().map(|x| x.to_string()).collect();
        ProfileSummary {
            k_poly: self.k.field().poly().to_string(),
            k_degree: self.k.degree(),
            generator_prime: self.k.generator_prime,
            sampled_primes: self.k.sampled,
            modulus: self.modulus,
            generating_primes: self.generating_primes.clone(),
            generators: strings(&self.generators),
            l_equals_k: self.l_equals_k(),
            square_witnesses: self.square_witnesses.as_deref().map(strings),
            assumptions: self.assumptions.clone(),
        }
    }
}

/// Serializable view of a [`KLProfile`]; elements of K are written in the
/// generator `r` = r_q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileSummary {
    pub k_poly: String,
    pub k_degree: usize,
    pub generator_prime: u64,
    pub sampled_primes: usize,
    pub modulus: u64,
    pub generating_primes: Vec<u64>,
    pub generators: Vec<String>,
    pub l_equals_k: bool,
    pub square_witnesses: Option<Vec<String>>,
    pub assumptions: Vec<String>,
}

/// Options for [`analyze`].
#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub k_search_bound: u64,
    pub k_degree_cap: Option<usize>,
    /// overrides M = N or 4N
    pub modulus: Option<u64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            k_search_bound: DEFAULT_K_SEARCH_BOUND,
            k_degree_cap: None,
            modulus: None,
        }
    }
}

pub fn analyze(rec: &NewformRecord, opts: &AnalysisOptions) -> Result<KLProfile> {
    let k = find_k(rec, opts.k_search_bound, opts.k_degree_cap)?;
    let mut assumptions = Vec::new();
    if !k.stable {
        return Err(CoreError::InsufficientCoefficients(format!(
            "some sampled r_p lies outside Q(r_{}); K is not determined",
            k.generator_prime
        )));
    }
    if !k.meets_cap && k.degree() < rec.field().degree() {
        assumptions.push(format!(
            "[K:Q] = {} inferred from every r_p with p <= {} lying in Q(r_{}); [E:Q] = {}",
            k.degree(),
            opts.k_search_bound.min(rec.bound() as u64),
            k.generator_prime,
            rec.field().degree()
        ));
    }
    let modulus = opts.modulus.unwrap_or_else(|| default_modulus(rec.level()));
    let generating_primes = choose_generating_primes(rec, modulus)?;
    let generators = generating_primes
        .iter()
        .map(|&p| {
            k.r_in_k(rec, p)?
                .ok_or_else(|| CoreError::InvalidChoice(format!("r_{p} is not in K")))
        })
        .collect::<Result<Vec<_>>>()?;
    let roots = generators
        .iter()
        .map(sqrt)
        .collect::<std::result::Result<Option<Vec<_>>, _>>()?;
    Ok(KLProfile {
        k,
        modulus,
        generating_primes,
        generators,
        square_witnesses: roots,
        assumptions,
    })
}

/// Whether λ splits completely in L, for λ a prime of a field `lam.field()`
/// that `to_lam` identifies with K (elements of K are mapped by it).
pub fn splits_completely(
    profile: &KLProfile,
    lam: &PrimeData,
    to_lam: impl Fn(&NFElement) -> Option<NFElement>,
) -> Result<bool> {
    if profile.l_equals_k() {
        return Ok(true);
    }
    for x in &profile.generators {
        let y = to_lam(x).ok_or(CoreError::Arith(ArithError::FieldMismatch))?;
        let (_, square) = valuation_and_square_in_completion(&y, lam)?;
        if !square {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Complete splitting of a prime λ of K (as constructed in the profile) in L.
pub fn l_splitting_test(profile: &KLProfile, lam: &PrimeData) -> Result<bool> {
    splits_completely(profile, lam, |x| Some(x.clone()))
}

/// Projective image type decided from the weight, the residue degree and
/// complete splitting in L.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ImageType {
    PSL2,
    PGL2,
    Undetermined,
}

pub fn decide_psl_vs_pgl(
    weight: u32,
    level: u64,
    ell: u64,
    residue_degree: usize,
    splits: bool,
) -> ImageType {
    if ell == 2 {
        // PSL₂ = PGL₂ over fields of characteristic 2
        return ImageType::PSL2;
    }
    let by_splitting = if splits { ImageType::PSL2 } else { ImageType::PGL2 };
    if weight % 2 == 1 || residue_degree % 2 == 0 {
        by_splitting
    } else if level % ell != 0 {
        ImageType::PGL2
    } else {
        ImageType::Undetermined
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use galimage_arith::{primes_above, ZPoly};

    #[test]
    fn decision_table() {
        assert_eq!(decide_psl_vs_pgl(3, 27, 11, 1, true), ImageType::PSL2);
        assert_eq!(decide_psl_vs_pgl(3, 27, 11, 1, false), ImageType::PGL2);
        assert_eq!(decide_psl_vs_pgl(2, 11, 7, 1, true), ImageType::PGL2);
        assert_eq!(decide_psl_vs_pgl(2, 11, 11, 1, true), ImageType::Undetermined);
        assert_eq!(decide_psl_vs_pgl(2, 11, 7, 2, false), ImageType::PGL2);
        assert_eq!(decide_psl_vs_pgl(2, 11, 7, 2, true), ImageType::PSL2);
    }

    #[test]
    fn synthetic_nonsquare_generator() {
        let q = NumberField::new(ZPoly::from_i64(&[-3, 1]), "r").unwrap();
        let k = KField {
            generator_prime: 2,
            embedding: SubfieldEmbedding::with_image(q.clone(), q.generator()),
            sampled: 1,
            stable: true,
            meets_cap: true,
        };
        let profile = KLProfile {
            k,
            modulus: 3,
            generating_primes: vec![2],
            generators: vec![q.from_int(3)],
            square_witnesses: None,
            assumptions: vec![],
        };
        let lam = &primes_above(&q, 7, false).unwrap()[0];
        assert!(!l_splitting_test(&profile, lam).unwrap());
        let lam11 = &primes_above(&q, 11, false).unwrap()[0];
        assert!(l_splitting_test(&profile, lam11).unwrap());
    }
}
