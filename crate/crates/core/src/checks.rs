//! Verification suites shared by the command line and the test targets.
//! Each suite runs one identity over a prime and lists every violation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::census::{count_sp, cross_check_ap, count_sbar, within_table_tolerance, published_ratio};
use crate::curve::{count_points_with, nonsingular};
use crate::error::{Error, Result};
use crate::hurwitz::verify_waterhouse_schoof;
use crate::lift::{rank_mod_p_squared, rank_mod_p_squared_oracle, verify_fibers};
use crate::ring_arith::{check_census_prime, QrTable, Residue};

/// Pairs checked per prime when the full `p^4` grid is too large.
pub const ORACLE_SAMPLES: usize = 1000;

/// Largest prime whose full grid the oracle suite walks.
pub const ORACLE_FULL_GRID_MAX: u64 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    WaterhouseSchoof,
    Fibers,
    LemmaRank,
    OracleEquivalence,
    Table1,
    Sbar,
    ApModes,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::WaterhouseSchoof,
        Check::Fibers,
        Check::LemmaRank,
        Check::OracleEquivalence,
        Check::Table1,
        Check::Sbar,
        Check::ApModes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::WaterhouseSchoof => "waterhouse-schoof",
            Check::Fibers => "fibers",
            Check::LemmaRank => "lemma-rank",
            Check::OracleEquivalence => "oracle-equivalence",
            Check::Table1 => "table1",
            Check::Sbar => "sbar",
            Check::ApModes => "ap-modes",
        }
    }
}

impl std::str::FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown check {s:?}")))
    }
}

/// Outcome of one suite at one prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: Check,
    pub p: u64,
    pub cases: u64,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run(check: Check, p: u64, seed: u64) -> Result<CheckReport> {
    check_census_prime(p)?;
    match check {
        Check::WaterhouseSchoof => waterhouse_schoof(p),
        Check::Fibers => fibers(p),
        Check::LemmaRank => lemma_rank(p),
        Check::OracleEquivalence => oracle_equivalence(p, seed),
        Check::Table1 => table1_row(p),
        Check::Sbar => sbar(p),
        Check::ApModes => ap_modes(p),
    }
}

fn report(check: Check, p: u64, cases: u64, failures: Vec<String>) -> Result<CheckReport> {
    Ok(CheckReport {
        check,
        p,
        cases,
        failures,
    })
}

/// Class counts per trace against Hurwitz class numbers.
pub fn waterhouse_schoof(p: u64) -> Result<CheckReport> {
    let r = verify_waterhouse_schoof(p)?;
    let failures = r
        .rows
        .iter()
        .filter(|row| !row.matches)
        .map(|row| format!("t={}: N(t)={} H={}", row.t, row.classes, row.hurwitz))
        .collect();
    report(Check::WaterhouseSchoof, p, r.rows.len() as u64, failures)
}

/// Every anomalous pair with `j != 0, 1728` has exactly `p` local-torsion lifts.
pub fn fibers(p: u64) -> Result<CheckReport> {
    let table = QrTable::new(p);
    let pairs: Vec<(u64, u64)> = (1..p)
        .flat_map(|a| (1..p).map(move |b| (a, b)))
        .filter(|&(a, b)| nonsingular(a, b, p) && count_points_with(a, b, &table).is_multiple_of(p))
        .collect();
    let counts: Vec<Result<u64>> = pairs
        .par_iter()
        .map(|&(a, b)| verify_fibers(Residue::new(a as i128, p), Residue::new(b as i128, p), p))
        .collect();
    let mut failures = Vec::new();
    for (&(a, b), n) in pairs.iter().zip(counts) {
        let n = n?;
        if n != p {
            failures.push(format!("({a}, {b}): {n} lifts"));
        }
    }
    report(Check::Fibers, p, pairs.len() as u64, failures)
}

/// Over all `p^4` pairs: good reduction gives rank 1 or 2, and rank 2 only
/// above an anomalous reduction.
pub fn lemma_rank(p: u64) -> Result<CheckReport> {
    let m = p * p;
    let table = QrTable::new(p);
    let rows: Vec<Result<(u64, Vec<String>)>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut cases = 0;
            let mut failures = Vec::new();
            for b in 0..m {
                let (a_bar, b_bar) = (a % p, b % p);
                let res = rank_mod_p_squared(Residue::new(a as i128, m), Residue::new(b as i128, m), p);
                match res {
                    Err(Error::BadReduction(_)) if !nonsingular(a_bar, b_bar, p) => continue,
                    Err(e) => return Err(e),
                    Ok(r) => {
                        cases += 1;
                        let anomalous = count_points_with(a_bar, b_bar, &table).is_multiple_of(p);
                        if !(r.rank == 1 || r.rank == 2) || (r.rank == 2 && !anomalous) {
                            failures.push(format!("({a}, {b}): rank {} anomalous={anomalous}", r.rank));
                        }
                    }
                }
            }
            Ok((cases, failures))
        })
        .collect();
    let mut cases = 0;
    let mut failures = Vec::new();
    for row in rows {
        let (c, f) = row?;
        cases += c;
        failures.extend(f);
    }
    report(Check::LemmaRank, p, cases, failures)
}

/// Division-polynomial test against the p-adic oracle: the whole grid for
/// small `p`, otherwise [`ORACLE_SAMPLES`] seeded pairs above anomalous
/// reductions.
pub fn oracle_equivalence(p: u64, seed: u64) -> Result<CheckReport> {
    let m = p * p;
    let pairs: Vec<(u64, u64)> = if p <= ORACLE_FULL_GRID_MAX {
        (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).collect()
    } else {
        let table = QrTable::new(p);
        let anomalous: Vec<(u64, u64)> = (0..p)
            .flat_map(|a| (0..p).map(move |b| (a, b)))
            .filter(|&(a, b)| nonsingular(a, b, p) && count_points_with(a, b, &table).is_multiple_of(p))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p);
        (0..ORACLE_SAMPLES)
            .map(|_| {
                let (a, b) = anomalous[rng.random_range(0..anomalous.len())];
                (a + p * rng.random_range(0..p), b + p * rng.random_range(0..p))
            })
            .collect()
    };
    let outcomes: Vec<Result<Option<String>>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (ra, rb) = (Residue::new(a as i128, m), Residue::new(b as i128, m));
            let fast = rank_mod_p_squared(ra, rb, p);
            let slow = rank_mod_p_squared_oracle(ra, rb, p);
            Ok(match (fast, slow) {
                (Err(Error::BadReduction(_)), Err(Error::BadReduction(_))) => None,
                (Ok(x), Ok(y)) if x.rank == y.rank => None,
                (Ok(x), Ok(y)) => Some(format!("({a}, {b}): ranks {} vs {}", x.rank, y.rank)),
                (x, y) => Some(format!("({a}, {b}): {x:?} vs {y:?}")),
            })
        })
        .collect();
    let mut failures = Vec::new();
    for o in outcomes {
        if let Some(f) = o? {
            failures.push(f);
        }
    }
    report(Check::OracleEquivalence, p, pairs.len() as u64, failures)
}

/// The published ratio for `p`, when there is one.
pub fn table1_row(p: u64) -> Result<CheckReport> {
    let Some(published) = published_ratio(p) else {
        return report(Check::Table1, p, 0, Vec::new());
    };
    let sp = count_sp(p)?.sp;
    let failures = if within_table_tolerance(sp, p, published)? {
        Vec::new()
    } else {
        vec![format!("sp = {sp}, published {published}")]
    };
    report(Check::Table1, p, 1, failures)
}

/// Class count with a rational point of order `p`, derived two ways.
pub fn sbar(p: u64) -> Result<CheckReport> {
    match count_sbar(p) {
        Ok(_) => report(Check::Sbar, p, 1, Vec::new()),
        Err(Error::CensusIntegrity { detail, .. }) => report(Check::Sbar, p, 1, vec![detail]),
        Err(e) => Err(e),
    }
}

/// Fiber-formula and exhaustive local-torsion counts agree.
pub fn ap_modes(p: u64) -> Result<CheckReport> {
    match cross_check_ap(p) {
        Ok(_) => report(Check::ApModes, p, 1, Vec::new()),
        Err(Error::CensusIntegrity { detail, .. }) => report(Check::ApModes, p, 1, vec![detail]),
        Err(e) => Err(e),
    }
}
