//! The local-torsion sieve experiment: how many primes `5 <= p <= Y` have a
//! given integer pair `m = (a, b)` reducing into the local-torsion locus mod
//! `p^2`, compared with the expected count `P(Y) = sum #A_p / p^4`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::census::{record_for, ApMode, CensusCache, PrimeCensusRecord};
use crate::error::{Error, Result};
use crate::global::is_minimal_pair;
use crate::lift::{is_in_ap, ApTable};
use crate::ring_arith::primes_between;

/// Two-sided 99% normal quantile used for the binomial sampling margin.
pub const Z_99: f64 = 2.576;

pub const DEFAULT_BETAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum SamplingMode {
    /// Every pair in the box.
    Exhaustive,
    /// Independent uniform pairs; sample `i` draws from stream `i` of `seed`.
    MonteCarlo { samples: u64, seed: u64 },
}

/// Box `|a| < c`, `|b| < d` (strict) and the prime ceiling `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveConfig {
    pub y: u64,
    pub c: u64,
    pub d: u64,
    pub mode: SamplingMode,
    pub betas: Vec<f64>,
    pub minimal_only: bool,
    /// Permit Monte-Carlo boxes with `c` or `d` at most `y^4`.
    pub allow_small_box: bool,
}

impl SieveConfig {
    pub fn monte_carlo(y: u64, c: u64, d: u64, samples: u64, seed: u64) -> Self {
        SieveConfig {
            y,
            c,
            d,
            mode: SamplingMode::MonteCarlo { samples, seed },
            betas: DEFAULT_BETAS.to_vec(),
            minimal_only: false,
            allow_small_box: false,
        }
    }

    pub fn exhaustive(y: u64, c: u64, d: u64) -> Self {
        SieveConfig {
            y,
            c,
            d,
            mode: SamplingMode::Exhaustive,
            betas: DEFAULT_BETAS.to_vec(),
            minimal_only: false,
            allow_small_box: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.y < 5 {
            return bad(format!("Y = {} has no primes >= 5", self.y));
        }
        if self.c == 0 || self.d == 0 {
            return bad("box bounds must be positive".into());
        }
        if self.betas.is_empty() || self.betas.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return bad("betas must be positive and finite".into());
        }
        match self.mode {
            SamplingMode::MonteCarlo { samples, .. } => {
                if samples == 0 {
                    return bad("sample count must be positive".into());
                }
                let y4 = (self.y as u128).pow(4);
                if !self.allow_small_box && ((self.c as u128) <= y4 || (self.d as u128) <= y4) {
                    return bad(format!("box must satisfy C, D > Y^4 = {y4}"));
                }
            }
            SamplingMode::Exhaustive => {
                let (side_a, side_b) = (2 * self.c - 1, 2 * self.d - 1);
                for p in primes_between(5, self.y) {
                    if side_a % (p * p) != 0 || side_b % (p * p) != 0 {
                        return bad(format!(
                            "box sides {side_a} x {side_b} are not multiples of {}",
                            p * p
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One row of the concentration table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub beta: f64,
    /// Fraction of samples with `|P(Y; m) - P(Y)| >= beta sqrt(P(Y))`.
    pub observed_fraction: f64,
    /// Empirical Chebyshev ceiling `ratio / beta^2`.
    pub chebyshev_ceiling: f64,
    /// 99% binomial margin on the observed fraction.
    pub sampling_error: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveReport {
    pub config: SieveConfig,
    /// `P(Y)` as an exact fraction.
    pub p_of_y: String,
    pub p_of_y_decimal: f64,
    /// Pairs evaluated (after the minimality filter).
    pub sample_size: u64,
    /// Pairs dropped by the minimality filter.
    pub rejected: u64,
    /// `histogram[k]` = number of pairs with `P(Y; m) = k`.
    pub histogram: Vec<u64>,
    pub mean_exact: String,
    pub mean: f64,
    pub variance: f64,
    /// `sum (P(Y; m) - P(Y))^2 / (n P(Y))`.
    pub mean_square_ratio: f64,
    pub bands: Vec<BandRow>,
    pub bands_monotone: bool,
}

impl SieveReport {
    pub fn mean_equals_p_of_y(&self) -> bool {
        self.mean_exact == self.p_of_y
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("beta,observed_fraction,chebyshev_ceiling\n");
        for row in &self.bands {
            out.push_str(&format!(
                "{},{},{}\n",
                row.beta, row.observed_fraction, row.chebyshev_ceiling
            ));
        }
        out
    }
}

/// Census records for every prime in `[5, y]`, from the cache when present.
pub fn census_records(y: u64, cache: Option<&CensusCache>) -> Result<Vec<PrimeCensusRecord>> {
    primes_between(5, y)
        .into_iter()
        .map(|p| record_for(p, ApMode::Fiber, cache))
        .collect()
}

/// `P(Y) = sum_{5 <= p <= Y} #A_p / p^4`, exactly.
pub fn p_of_y(y: u64, records: &[PrimeCensusRecord]) -> Result<BigRational> {
    let by_prime: BTreeMap<u64, &PrimeCensusRecord> = records.iter().map(|r| (r.p, r)).collect();
    let mut total = BigRational::zero();
    for p in primes_between(5, y) {
        let rec = by_prime.get(&p).ok_or(Error::MissingCensus(p))?;
        total += BigRational::new(BigInt::from(rec.ap), BigInt::from(p).pow(4));
    }
    Ok(total)
}

/// `P(Y; m)`: primes `5 <= p <= Y` with `(a, b) mod p^2` in the local-torsion locus.
pub fn p_of_y_m(a: i128, b: i128, y: u64) -> Result<u64> {
    let mut n = 0;
    for p in primes_between(5, y) {
        n += is_in_ap(a, b, p)? as u64;
    }
    Ok(n)
}

/// `P(Y; m)` for many pairs, through precomputed membership tables.
struct Counter {
    tables: Vec<ApTable>,
}

impl Counter {
    fn new(y: u64) -> Result<Self> {
        let tables = primes_between(5, y)
            .into_par_iter()
            .map(ApTable::build)
            .collect::<Result<Vec<_>>>()?;
        Ok(Counter { tables })
    }

    fn count(&self, a: i128, b: i128) -> usize {
        self.tables.iter().filter(|t| t.contains(a, b)).count()
    }
}

fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Runs the experiment described by `config` against the given census.
pub fn run_sieve_experiment(
    config: &SieveConfig,
    records: &[PrimeCensusRecord],
) -> Result<SieveReport> {
    config.validate()?;
    let expected = p_of_y(config.y, records)?;
    let counter = Counter::new(config.y)?;
    for (table, p) in counter.tables.iter().zip(primes_between(5, config.y)) {
        let rec = records.iter().find(|r| r.p == p).ok_or(Error::MissingCensus(p))?;
        if table.count() != rec.ap {
            return Err(Error::CensusIntegrity {
                p,
                detail: format!("membership table has {} pairs, census has {}", table.count(), rec.ap),
            });
        }
    }
    let slots = counter.tables.len() + 1;
    let (c, d) = (config.c as i128, config.d as i128);

    // histograms per a-row or per sample chunk, merged in index order
    let merge = |mut acc: (Vec<u64>, u64), x: (Vec<u64>, u64)| {
        for (s, v) in acc.0.iter_mut().zip(x.0) {
            *s += v;
        }
        acc.1 += x.1;
        acc
    };
    let empty = || (vec![0u64; slots], 0u64);
    let (histogram, rejected) = match config.mode {
        SamplingMode::Exhaustive => (-(c - 1)..=c - 1)
            .into_par_iter()
            .map(|a| {
                let mut h = empty();
                for b in -(d - 1)..=d - 1 {
                    if config.minimal_only && !is_minimal_pair(a, b) {
                        h.1 += 1;
                        continue;
                    }
                    h.0[counter.count(a, b)] += 1;
                }
                h
            })
            .reduce(empty, merge),
        SamplingMode::MonteCarlo { samples, seed } => (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let a = rng.random_range(-(c - 1)..=c - 1);
                let b = rng.random_range(-(d - 1)..=d - 1);
                let mut h = empty();
                if config.minimal_only && !is_minimal_pair(a, b) {
                    h.1 += 1;
                } else {
                    h.0[counter.count(a, b)] += 1;
                }
                h
            })
            .reduce(empty, merge),
    };
    let n: u64 = histogram.iter().sum();
    if n == 0 {
        return Err(Error::InvalidConfig("no pairs survived the minimality filter".into()));
    }

    let big_n = BigInt::from(n);
    let sum: BigInt = histogram
        .iter()
        .enumerate()
        .map(|(k, &h)| BigInt::from(k) * BigInt::from(h))
        .sum();
    let mean_exact = BigRational::new(sum, big_n.clone());
    let p = expected.to_f64().unwrap_or(0.0);
    let mean = mean_exact.to_f64().unwrap_or(0.0);
    let nf = n as f64;
    let mut second_about_mean = 0.0;
    let mut second_about_p = 0.0;
    for (k, &h) in histogram.iter().enumerate() {
        let k = k as f64;
        second_about_mean += h as f64 * (k - mean).powi(2);
        second_about_p += h as f64 * (k - p).powi(2);
    }
    let variance = second_about_mean / nf;
    let mean_square_ratio = if p > 0.0 { second_about_p / (nf * p) } else { 0.0 };

    let mut betas = config.betas.clone();
    betas.sort_by(|x, y| x.partial_cmp(y).expect("finite betas"));
    betas.dedup();
    let bands: Vec<BandRow> = betas
        .iter()
        .map(|&beta| {
            let width = beta * p.sqrt();
            let outside: u64 = histogram
                .iter()
                .enumerate()
                .filter(|(k, _)| (*k as f64 - p).abs() >= width)
                .map(|(_, &h)| h)
                .sum();
            let f = outside as f64 / nf;
            let ceiling = mean_square_ratio / (beta * beta);
            let sampling_error = match config.mode {
                SamplingMode::Exhaustive => 0.0,
                SamplingMode::MonteCarlo { .. } => Z_99 * (f * (1.0 - f) / nf).sqrt(),
            };
            BandRow {
                beta,
                observed_fraction: f,
                chebyshev_ceiling: ceiling,
                sampling_error,
                consistent: f <= ceiling + sampling_error,
            }
        })
        .collect();
    let bands_monotone = bands
        .windows(2)
        .all(|w| w[1].observed_fraction <= w[0].observed_fraction);

    Ok(SieveReport {
        config: SieveConfig {
            betas,
            ..config.clone()
        },
        p_of_y: rational_string(&expected),
        p_of_y_decimal: p,
        sample_size: n,
        rejected,
        histogram,
        mean_exact: rational_string(&mean_exact),
        mean,
        variance,
        mean_square_ratio,
        bands,
        bands_monotone,
    })
}
