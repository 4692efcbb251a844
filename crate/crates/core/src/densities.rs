//! Upper bounds on densities of curves with infinite (fine) Selmer groups,
//! evaluated from exact census counts. Every real carries an error bound.

use serde::{Deserialize, Serialize};

use crate::census::PrimeCensusRecord;
use crate::error::{Error, Result};
use crate::ring_arith::check_census_prime;

/// Default absolute tolerance for zeta values.
pub const ZETA_TOL: f64 = 1e-12;

/// A real number with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.error
    }
}

/// `sum_{n >= start} n^-s`, truncated at `N` with an Euler-Maclaurin tail.
fn zeta_tail_from(start: u64, s: u32, tol: f64) -> Result<Estimate> {
    if s < 2 {
        return Err(Error::InvalidConfig(format!("zeta needs s >= 2, got {s}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be positive".into()));
    }
    let sf = s as f64;
    // remainder after the s N^{-s-1}/12 correction
    let remainder = |n: f64| sf * (sf + 1.0) * (sf + 2.0) * n.powf(-sf - 3.0) / 720.0;
    let mut n = start.max(2) + 1;
    while remainder(n as f64) > tol / 2.0 {
        n = n + n / 2 + 1;
    }
    let nf = n as f64;
    let mut sum = nf.powf(1.0 - sf) / (sf - 1.0) + nf.powf(-sf) / 2.0 + sf * nf.powf(-sf - 1.0) / 12.0;
    for k in (start..n).rev() {
        sum += (k as f64).powi(-(s as i32));
    }
    let rounding = (n - start + 4) as f64 * f64::EPSILON * sum;
    Ok(Estimate {
        value: sum,
        error: remainder(nf) + rounding,
    })
}

/// `zeta(s)` for integer `s >= 2`.
pub fn zeta(s: u32, tol: f64) -> Result<Estimate> {
    let tail = zeta_tail_from(2, s, tol)?;
    Ok(Estimate {
        value: 1.0 + tail.value,
        error: tail.error + f64::EPSILON,
    })
}

/// `zeta(s) - 1`, summed directly so small values keep full precision.
pub fn zeta_minus_one(s: u32, tol: f64) -> Result<Estimate> {
    zeta_tail_from(2, s, tol)
}

/// `1 - prod_{i >= 1} (1 - p^{-(2i-1)})`.
pub fn delaunay_term(p: u64) -> Result<Estimate> {
    check_census_prime(p)?;
    let q = 1.0 / p as f64;
    let q2 = q * q;
    let mut log_sum = 0.0;
    let mut x = q;
    let mut terms = 0;
    while x >= 1e-18 {
        log_sum += (-x).ln_1p();
        x *= q2;
        terms += 1;
    }
    let value = -log_sum.exp_m1();
    // omitted factors: sum of x, x q^2, ... < 2x
    Ok(Estimate {
        value,
        error: 2.0 * x + (terms + 2) as f64 * f64::EPSILON,
    })
}

/// Which exceptional set the bound is for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Rank 0, good ordinary reduction, infinite Selmer group over the
    /// cyclotomic tower. Uses the anomalous-pair count mod `p`.
    Selmer,
    /// Rank 0, good reduction, infinite fine Selmer group. Uses the
    /// local-torsion count mod `p^2`.
    FineRankZero,
    /// Rank 1 analogue: the rank-zero terms plus the density of curves whose
    /// global-to-local `Z_p` map is not an isomorphism.
    FineRankOne,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Selmer => "selmer",
            BoundKind::FineRankZero => "fine-rank0",
            BoundKind::FineRankOne => "fine-rank1",
        }
    }
}

pub const DISCLAIMER: &str = "Conditional bound: assumes Sha[p^inf] finite for all curves and the \
Delaunay heuristic for p | #Sha; the rank-one bound also assumes the hypotheses of the fine Selmer \
unit criterion, which are not checked here.";

/// Term-by-term evaluation of one density bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityBoundReport {
    pub p: u64,
    pub kind: BoundKind,
    /// Numerator and denominator of the census ratio (`#S_p / p^2` or `#A_p / p^4`).
    pub census_count: u64,
    pub census_denominator: u64,
    pub census_term: f64,
    pub delaunay_term: f64,
    /// `zeta(p) - 1`, the Tamagawa contribution.
    pub tamagawa_term: f64,
    pub e5_term: Option<f64>,
    pub e5_heuristic: bool,
    pub total: f64,
    /// Absolute error bound on `total` and each term.
    pub error: f64,
    /// `total >= 1`: the bound says nothing.
    pub vacuous: bool,
    pub disclaimer: String,
}

fn build(
    record: &PrimeCensusRecord,
    kind: BoundKind,
    e5: Option<(f64, bool)>,
) -> Result<DensityBoundReport> {
    let p = record.p;
    check_census_prime(p)?;
    let (count, denominator) = match kind {
        BoundKind::Selmer => (record.sp, p * p),
        _ => (record.ap, p * p * p * p),
    };
    let zeta10 = zeta(10, ZETA_TOL)?;
    let ratio = count as f64 / denominator as f64;
    let census_term = zeta10.value * ratio;
    let census_err = zeta10.error * ratio + 2.0 * f64::EPSILON * census_term;
    let del = delaunay_term(p)?;
    let tam = zeta_minus_one(p as u32, ZETA_TOL)?;
    let e5_term = e5.map(|(x, _)| x);
    let total = census_term + del.value + tam.value + e5_term.unwrap_or(0.0);
    let error = census_err + del.error + tam.error + 4.0 * f64::EPSILON * total;
    Ok(DensityBoundReport {
        p,
        kind,
        census_count: count,
        census_denominator: denominator,
        census_term,
        delaunay_term: del.value,
        tamagawa_term: tam.value,
        e5_term,
        e5_heuristic: e5.is_some_and(|(_, h)| h),
        total,
        error,
        vacuous: total >= 1.0,
        disclaimer: DISCLAIMER.into(),
    })
}

/// Bound for rank-0 ordinary curves with infinite Selmer group.
pub fn bound_selmer(record: &PrimeCensusRecord) -> Result<DensityBoundReport> {
    build(record, BoundKind::Selmer, None)
}

/// Bound for rank-0 curves with infinite fine Selmer group.
pub fn bound_fine_rank_zero(record: &PrimeCensusRecord) -> Result<DensityBoundReport> {
    build(record, BoundKind::FineRankZero, None)
}

/// Bound for rank-1 curves with infinite fine Selmer group. Without an
/// explicit density the heuristic `1/(2p)` is used and labelled as such.
pub fn bound_fine_rank_one(
    record: &PrimeCensusRecord,
    e5_density: Option<f64>,
) -> Result<DensityBoundReport> {
    let e5 = match e5_density {
        Some(x) if !(0.0..=1.0).contains(&x) => {
            return Err(Error::InvalidConfig(format!("density {x} outside [0, 1]")))
        }
        Some(x) => (x, false),
        None => (1.0 / (2.0 * record.p as f64), true),
    };
    build(record, BoundKind::FineRankOne, Some(e5))
}

pub fn bound(
    kind: BoundKind,
    record: &PrimeCensusRecord,
    e5_density: Option<f64>,
) -> Result<DensityBoundReport> {
    match kind {
        BoundKind::Selmer => bound_selmer(record),
        BoundKind::FineRankZero => bound_fine_rank_zero(record),
        BoundKind::FineRankOne => bound_fine_rank_one(record, e5_density),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{compute_record, ApMode};

    /// Plain partial sum with a generous cutoff, for comparison.
    fn zeta_slow(s: u32) -> f64 {
        let mut sum = 0.0;
        for n in (1..2_000_000u64).rev() {
            sum += (n as f64).powi(-(s as i32));
        }
        sum
    }

    #[test]
    fn zeta_values() {
        let z10 = zeta(10, ZETA_TOL).unwrap();
        assert!(z10.error <= ZETA_TOL);
        assert!(z10.contains(1.000_994_575_127_818_1));
        let z2 = zeta(2, ZETA_TOL).unwrap();
        assert!(z2.contains(std::f64::consts::PI.powi(2) / 6.0));
        let z7 = zeta_minus_one(7, ZETA_TOL).unwrap();
        assert!((z7.value - 0.008_349_277_381_922_827).abs() < 1e-12);
        for s in [3, 4, 6] {
            assert!((zeta(s, ZETA_TOL).unwrap().value - zeta_slow(s)).abs() < 1e-11, "s={s}");
        }
        assert!(zeta(1, ZETA_TOL).is_err());
    }

    #[test]
    fn zeta_minus_one_below_closed_bound() {
        for p in crate::ring_arith::primes_between(5, 50) {
            let z = zeta_minus_one(p as u32, ZETA_TOL).unwrap();
            let bound = 2f64.powi(-(p as i32)) * (p as f64 + 1.0) / (p as f64 - 1.0);
            assert!(z.value + z.error < bound, "p={p}");
        }
    }

    #[test]
    fn delaunay_values() {
        let d5 = delaunay_term(5).unwrap();
        let direct: f64 = 1.0 - (1..30).map(|i| 1.0 - 5f64.powi(-(2 * i - 1))).product::<f64>();
        assert!((d5.value - direct).abs() < 1e-14);
        assert!((d5.value - 0.206_664_5).abs() < 1e-6);
        assert!(d5.value > 0.2);
        for p in crate::ring_arith::primes_between(7, 500) {
            let pf = p as f64;
            let d = delaunay_term(p).unwrap().value;
            assert!((d - 1.0 / pf - pf.powi(-3)).abs() < 2.0 * pf.powi(-4), "p={p}");
        }
    }

    #[test]
    fn bound_identities() {
        let rec = compute_record(7, ApMode::Fiber).unwrap();
        let f = bound_selmer(&rec).unwrap();
        let b = bound_fine_rank_zero(&rec).unwrap();
        let z10 = zeta(10, ZETA_TOL).unwrap().value;
        assert_eq!(f.census_term, z10 * (4.0 / 49.0));
        assert!((f.total - (f.census_term + f.delaunay_term + f.tamagawa_term)).abs() <= f.error);
        let diff = z10 * (rec.ap as f64 / 2401.0 - 4.0 / 49.0);
        assert!(((b.total - f.total) - diff).abs() <= b.error + f.error);

        let d = bound_fine_rank_one(&rec, None).unwrap();
        assert_eq!(d.e5_term, Some(1.0 / 14.0));
        assert!(d.e5_heuristic);
        let d0 = bound_fine_rank_one(&rec, Some(0.0)).unwrap();
        assert_eq!(d0.total, b.total);
        assert!(!d0.e5_heuristic);
        let d1 = bound_fine_rank_one(&rec, Some(1.0)).unwrap();
        assert!(d1.vacuous);
        assert!(bound_fine_rank_one(&rec, Some(1.5)).is_err());
        assert!(bound_fine_rank_one(&rec, Some(-0.1)).is_err());
        for r in [&f, &b, &d] {
            assert!(r.census_term >= 0.0 && r.delaunay_term >= 0.0 && r.tamagawa_term >= 0.0);
        }
    }

    #[test]
    fn census_term_ratio_bounded_by_split() {
        for p in crate::ring_arith::primes_between(7, 60) {
            let rec = compute_record(p, ApMode::Fiber).unwrap();
            let f = bound_selmer(&rec).unwrap();
            let b = bound_fine_rank_zero(&rec).unwrap();
            // (ap / p^4) / (sp / p^2) <= (2p^3 + p sp) / (p^2 sp)
            assert!(rec.ap <= 2 * p * p * p + p * rec.sp);
            let ceiling = (2.0 * (p as f64).powi(3) + p as f64 * rec.sp as f64)
                / ((p * p) as f64 * rec.sp as f64);
            assert!(b.census_term / f.census_term <= ceiling * (1.0 + 1e-12));
        }
    }
}
