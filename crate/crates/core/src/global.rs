//! Curves over `Q` in short Weierstrass form: minimality, height, prime scans
//! and the unit criterion for finiteness of fine Selmer invariants.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{count_points_with, CurvePair};
use crate::error::{Error, Result};
use crate::lift::is_in_ap;
use crate::ring_arith::{check_census_prime, is_prime, primes_between, reduce, QrTable};

/// Whether no prime `l` has `l^4 | a` and `l^6 | b`. `(0, 0)` is not minimal.
pub fn is_minimal_pair(a: i128, b: i128) -> bool {
    let (ua, ub) = (a.unsigned_abs(), b.unsigned_abs());
    if ua == 0 && ub == 0 {
        return false;
    }
    let mut l: u128 = 2;
    loop {
        let l4 = l * l * l * l;
        let l6 = l4 * l * l;
        let fits_a = ua == 0 || l4 <= ua;
        let fits_b = ub == 0 || l6 <= ub;
        if !(fits_a && fits_b) {
            return true;
        }
        if is_prime(l as u64) && ua % l4 == 0 && ub % l6 == 0 {
            return false;
        }
        l += 1;
    }
}

/// `max(|a|^3, b^2)`.
pub fn height(a: i128, b: i128) -> BigUint {
    let a = BigUint::from(a.unsigned_abs());
    let b = BigUint::from(b.unsigned_abs());
    (a.pow(3)).max(b.pow(2))
}

/// A curve over `Q` with its minimality flag and height.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalCurve {
    pub curve: CurvePair,
    pub minimal: bool,
    #[serde(with = "decimal_biguint")]
    pub height: BigUint,
}

mod decimal_biguint {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

impl GlobalCurve {
    pub fn new(a: i128, b: i128) -> Self {
        GlobalCurve {
            curve: CurvePair::global(a, b),
            minimal: is_minimal_pair(a, b),
            height: height(a, b),
        }
    }
}

/// Exact count of minimal pairs with `|a| <= a_max`, `|b| <= b_max`, by
/// inclusion-exclusion over squarefree `d`. Returns `(minimal, total)`.
pub fn minimal_count_in_box(a_max: u64, b_max: u64) -> (u128, u128) {
    let total = (2 * a_max as u128 + 1) * (2 * b_max as u128 + 1);
    // d with d^4 <= a_max or d^6 <= b_max contribute beyond the (0, 0) pair
    let mut d_max = 1u64;
    while (d_max + 1).pow(4) as u128 <= a_max as u128 || ((d_max + 1) as u128).pow(6) <= b_max as u128 {
        d_max += 1;
    }
    let mu = mobius_up_to(d_max as usize);
    let mut minimal: i128 = 0;
    for d in 1..=d_max {
        let m = mu[d as usize];
        if m == 0 {
            continue;
        }
        let na = 2 * (a_max as u128 / (d as u128).pow(4)) + 1;
        let nb = 2 * (b_max as u128 / (d as u128).pow(6)) + 1;
        // pairs other than (0, 0) divisible as required
        minimal += m as i128 * (na * nb - 1) as i128;
    }
    (minimal as u128, total)
}

/// Fraction of minimal pairs in the box (as a float; the count is exact).
pub fn minimal_fraction_in_box(a_max: u64, b_max: u64) -> f64 {
    let (m, t) = minimal_count_in_box(a_max, b_max);
    m as f64 / t as f64
}

fn mobius_up_to(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    let mut composite = vec![false; n + 1];
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        for j in (i..=n).step_by(i) {
            if j > i {
                composite[j] = true;
            }
            mu[j] = -mu[j];
        }
        let sq = i * i;
        for j in (sq..=n).step_by(sq) {
            mu[j] = 0;
        }
    }
    mu
}

/// Anomalous and local-torsion primes of a global curve up to `y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeScanReport {
    pub y: u64,
    pub anomalous: Vec<u64>,
    pub local_torsion: Vec<u64>,
    /// Primes `5 <= p <= y` dividing the discriminant.
    pub bad: Vec<u64>,
    /// Primes dividing `2 #Sha * prod c_l`, when those invariants were supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exceptional: Option<Vec<u64>>,
}

impl PrimeScanReport {
    /// Local-torsion primes are anomalous.
    pub fn inclusion_holds(&self) -> bool {
        self.local_torsion
            .iter()
            .all(|p| self.anomalous.binary_search(p).is_ok())
    }
}

/// Classifies every prime `5 <= p <= y`. Primes 2 and 3 are never scanned.
pub fn scan_primes(curve: &CurvePair, y: u64) -> Result<PrimeScanReport> {
    if curve.modulus().is_some() {
        return Err(Error::Precondition("scan needs a curve over Q".into()));
    }
    if curve.discriminant() == 0 {
        return Err(Error::SingularCurve {
            a: curve.a,
            b: curve.b,
            modulus: 0,
        });
    }
    if y < 5 {
        return Err(Error::InvalidConfig(format!("scan ceiling {y} is below 5")));
    }
    #[derive(Clone, Copy)]
    enum Kind {
        Bad,
        Ordinary,
        Anomalous,
        LocalTorsion,
    }
    let primes = primes_between(5, y);
    let kinds: Vec<Result<Kind>> = primes
        .par_iter()
        .map(|&p| {
            if !curve.is_nonsingular_mod(p) {
                return Ok(Kind::Bad);
            }
            let (a, b) = (reduce(curve.a, p), reduce(curve.b, p));
            if !count_points_with(a, b, &QrTable::new(p)).is_multiple_of(p) {
                return Ok(Kind::Ordinary);
            }
            Ok(if is_in_ap(curve.a, curve.b, p)? {
                Kind::LocalTorsion
            } else {
                Kind::Anomalous
            })
        })
        .collect();
    let mut report = PrimeScanReport {
        y,
        anomalous: Vec::new(),
        local_torsion: Vec::new(),
        bad: Vec::new(),
        exceptional: None,
    };
    for (&p, kind) in primes.iter().zip(kinds) {
        match kind? {
            Kind::Bad => report.bad.push(p),
            Kind::Ordinary => {}
            Kind::Anomalous => report.anomalous.push(p),
            Kind::LocalTorsion => {
                report.anomalous.push(p);
                report.local_torsion.push(p);
            }
        }
    }
    Ok(report)
}

/// Primes dividing `2 * sha_order * prod(tamagawa)`.
pub fn exceptional_primes(sha_order: u64, tamagawa: &[u64]) -> Result<Vec<u64>> {
    if sha_order == 0 || tamagawa.contains(&0) {
        return Err(Error::InvalidConfig("Sha order and Tamagawa numbers must be positive".into()));
    }
    let mut primes = vec![2];
    for &n in std::iter::once(&sha_order).chain(tamagawa) {
        let mut n = n;
        let mut q = 2;
        while q * q <= n {
            if n % q == 0 {
                primes.push(q);
                while n % q == 0 {
                    n /= q;
                }
            }
            q += 1;
        }
        if n > 1 {
            primes.push(n);
        }
    }
    primes.sort_unstable();
    primes.dedup();
    Ok(primes)
}

/// User-supplied global invariants for the finiteness criterion at `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FineSelmerInputs {
    pub p: u64,
    /// Mordell-Weil rank over `Q`.
    pub rank: u32,
    /// Order of the `p`-primary part of Sha.
    pub sha_p_order: u64,
    /// Tamagawa numbers at the bad primes.
    pub tamagawa: Vec<u64>,
    /// In rank 1: the map from the global `Z_p`-summand to the local one is
    /// an isomorphism.
    pub phi_isomorphism: bool,
}

/// Which hypothesis of the unit criterion failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailedCondition {
    Sha,
    Tamagawa,
    LocalTorsion,
    PhiNotIsomorphism,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum FineSelmerVerdict {
    /// `mu = lambda = 0`.
    Finite { local_torsion: bool },
    /// The criterion does not apply; nothing is claimed.
    Inconclusive {
        condition: FailedCondition,
        local_torsion: bool,
    },
}

impl FineSelmerVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, FineSelmerVerdict::Finite { .. })
    }
}

/// Sufficient condition for the fine Selmer `mu` and `lambda` to vanish.
pub fn fine_selmer_verdict(curve: &CurvePair, inputs: &FineSelmerInputs) -> Result<FineSelmerVerdict> {
    let p = inputs.p;
    check_census_prime(p)?;
    if inputs.rank >= 2 {
        return Err(Error::OutOfScope(format!("rank {} exceeds 1", inputs.rank)));
    }
    if !curve.is_nonsingular_mod(p) {
        return Err(Error::BadReduction(p));
    }
    let mut sha = inputs.sha_p_order;
    if sha == 0 {
        return Err(Error::InvalidConfig("Sha order must be positive".into()));
    }
    while sha.is_multiple_of(p) {
        sha /= p;
    }
    if sha != 1 {
        return Err(Error::InvalidConfig(format!(
            "{} is not a power of {p}",
            inputs.sha_p_order
        )));
    }
    let local_torsion = is_in_ap(curve.a, curve.b, p)?;
    let condition = if inputs.sha_p_order != 1 {
        Some(FailedCondition::Sha)
    } else if inputs.tamagawa.iter().any(|c| c % p == 0) {
        Some(FailedCondition::Tamagawa)
    } else if local_torsion {
        Some(FailedCondition::LocalTorsion)
    } else if inputs.rank == 1 && !inputs.phi_isomorphism {
        Some(FailedCondition::PhiNotIsomorphism)
    } else {
        None
    };
    Ok(match condition {
        None => FineSelmerVerdict::Finite { local_torsion },
        Some(condition) => FineSelmerVerdict::Inconclusive {
            condition,
            local_torsion,
        },
    })
}

/// `count` nonsingular global curves with `|a|, |b| <= bound`, reproducible
/// from `seed`.
pub fn random_curves(count: usize, bound: i128, seed: u64) -> Vec<CurvePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = rng.random_range(-bound..=bound);
        let b = rng.random_range(-bound..=bound);
        let curve = CurvePair::global(a, b);
        if curve.discriminant() != 0 {
            out.push(curve);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimality_examples() {
        assert!(!is_minimal_pair(16, 64));
        assert!(is_minimal_pair(16, 32));
        assert!(!is_minimal_pair(0, 64));
        assert!(is_minimal_pair(0, 63));
        assert!(!is_minimal_pair(81, 0));
        assert!(!is_minimal_pair(-81 * 16, 729 * 64));
        assert!(is_minimal_pair(1, 0));
    }

    #[test]
    fn height_examples() {
        assert_eq!(height(2, 3), BigUint::from(9u32));
        assert_eq!(height(-3, 2), BigUint::from(27u32));
        assert_eq!(height(0, 0), BigUint::from(0u32));
    }

    #[test]
    fn mobius_values() {
        assert_eq!(mobius_up_to(12), vec![1, 1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]);
    }

    #[test]
    fn minimal_count_matches_brute_force() {
        for (a_max, b_max) in [(0, 0), (20, 100), (100, 70), (300, 3000), (1300, 700)] {
            let brute = (-(a_max as i128)..=a_max as i128)
                .flat_map(|a| (-(b_max as i128)..=b_max as i128).map(move |b| (a, b)))
                .filter(|&(a, b)| is_minimal_pair(a, b))
                .count() as u128;
            assert_eq!(minimal_count_in_box(a_max, b_max).0, brute, "box {a_max} x {b_max}");
        }
    }

    #[test]
    fn scan_examples() {
        let r = scan_primes(&CurvePair::global(3, 0), 10).unwrap();
        assert_eq!(r.anomalous, vec![5]);
        assert!(r.bad.is_empty());
        let r = scan_primes(&CurvePair::global(3, 2), 10).unwrap();
        assert_eq!(r.anomalous, vec![5]);
        assert_eq!(
            r.local_torsion.is_empty(),
            !is_in_ap(3, 2, 5).unwrap()
        );
        assert!(r.inclusion_holds());
        assert!(scan_primes(&CurvePair::global(0, 0), 10).is_err());
        // 4 * 125 + 27 * 25 = 25 * 47
        let r = scan_primes(&CurvePair::global(5, 5), 30).unwrap();
        assert!(r.bad.contains(&5));
    }

    #[test]
    fn anomalous_iff_trace_one() {
        for curve in random_curves(20, 1000, 3) {
            let r = scan_primes(&curve, 100).unwrap();
            for p in primes_between(7, 100) {
                if r.bad.contains(&p) {
                    continue;
                }
                let t = CurvePair::modulo(curve.a, curve.b, p).trace().unwrap();
                assert_eq!(r.anomalous.contains(&p), t == 1, "p={p}");
            }
        }
    }

    fn good_inputs() -> FineSelmerInputs {
        FineSelmerInputs {
            p: 7,
            rank: 0,
            sha_p_order: 1,
            tamagawa: vec![1, 2],
            phi_isomorphism: false,
        }
    }

    #[test]
    fn verdict_examples() {
        // (1, 1) is not anomalous at 7, so 7 is not a local torsion prime
        let curve = CurvePair::global(1, 1);
        assert!(fine_selmer_verdict(&curve, &good_inputs()).unwrap().is_finite());
        let tam = FineSelmerInputs {
            tamagawa: vec![14],
            ..good_inputs()
        };
        assert_eq!(
            fine_selmer_verdict(&curve, &tam).unwrap(),
            FineSelmerVerdict::Inconclusive {
                condition: FailedCondition::Tamagawa,
                local_torsion: false
            }
        );
        let rank2 = FineSelmerInputs { rank: 2, ..good_inputs() };
        assert!(matches!(fine_selmer_verdict(&curve, &rank2), Err(Error::OutOfScope(_))));
        let rank1 = FineSelmerInputs { rank: 1, ..good_inputs() };
        assert!(!fine_selmer_verdict(&curve, &rank1).unwrap().is_finite());
        let rank1_iso = FineSelmerInputs {
            rank: 1,
            phi_isomorphism: true,
            ..good_inputs()
        };
        assert!(fine_selmer_verdict(&curve, &rank1_iso).unwrap().is_finite());
        let sha = FineSelmerInputs { sha_p_order: 49, ..good_inputs() };
        assert!(!fine_selmer_verdict(&curve, &sha).unwrap().is_finite());
        let bad_sha = FineSelmerInputs { sha_p_order: 6, ..good_inputs() };
        assert!(fine_selmer_verdict(&curve, &bad_sha).is_err());
    }

    #[test]
    fn verdict_bad_reduction() {
        // 4 + 27 * 4 = 112 = 16 * 7
        let curve = CurvePair::global(1, 2);
        assert_eq!(fine_selmer_verdict(&curve, &good_inputs()), Err(Error::BadReduction(7)));
    }

    #[test]
    fn verdict_is_monotone() {
        let curve = CurvePair::global(1, 1);
        let worst = FineSelmerInputs {
            p: 7,
            rank: 1,
            sha_p_order: 7,
            tamagawa: vec![7],
            phi_isomorphism: false,
        };
        // fix each violated input in turn; once finite, stays finite
        let steps: [fn(&mut FineSelmerInputs); 3] = [
            |i| i.sha_p_order = 1,
            |i| i.tamagawa = vec![1],
            |i| i.phi_isomorphism = true,
        ];
        for order in [[0, 1, 2], [2, 1, 0], [1, 2, 0]] {
            let mut inputs = worst.clone();
            let mut seen_finite = false;
            for &k in &order {
                steps[k](&mut inputs);
                let finite = fine_selmer_verdict(&curve, &inputs).unwrap().is_finite();
                assert!(!seen_finite || finite);
                seen_finite |= finite;
            }
            assert!(seen_finite);
        }
    }

    #[test]
    fn exceptional_set() {
        assert_eq!(exceptional_primes(1, &[1]).unwrap(), vec![2]);
        assert_eq!(exceptional_primes(9, &[10, 7]).unwrap(), vec![2, 3, 5, 7]);
        assert!(exceptional_primes(0, &[]).is_err());
    }
}
