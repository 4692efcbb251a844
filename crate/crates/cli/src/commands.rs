use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use serde::Serialize;
use selmer_core::census::{self, ApMode, CensusCache, EXHAUSTIVE_AP_MAX, DEFAULT_MAX_PRIME};
use selmer_core::checks::{self, Check, CheckReport};
use selmer_core::densities::{self, BoundKind};
use selmer_core::global::{self, FineSelmerInputs, FineSelmerVerdict};
use selmer_core::hurwitz::{self, WaterhouseSchoofReport};
use selmer_core::ring_arith::primes_between;
use selmer_core::sieve::{self, SamplingMode, SieveConfig};
use selmer_core::{CurvePair, Error, CACHE_ENV};

use crate::range::PrimeRange;
use crate::{BoundArg, CheckArg, Command, Format, GlobalOpts, ModeArg, Outcome};

/// Bumped whenever a JSON field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub fn cache_path(opts: &GlobalOpts) -> Option<PathBuf> {
    opts.cache
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
}

fn json<T: Serialize>(command: &str, data: &T) -> Result<String> {
    let doc = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "data": data,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn ok(output: String) -> Result<Outcome> {
    Ok(Outcome { output, ok: true })
}

pub fn dispatch(command: &Command, opts: &GlobalOpts) -> Result<Outcome> {
    let cache = cache_path(opts).map(CensusCache::new);
    let fmt = opts.format();
    match *command {
        Command::Hurwitz { disc } => hurwitz_cmd(disc, fmt),
        Command::Census {
            prime,
            mode,
            exact_ap,
            allow_large,
        } => {
            let mode = if exact_ap || mode == ModeArg::Exhaustive {
                ApMode::Exhaustive
            } else {
                ApMode::Fiber
            };
            census_cmd(prime, mode, allow_large, cache.as_ref(), fmt)
        }
        Command::Table1 { min_p, max_p, check } => table1_cmd(min_p, max_p, check, fmt),
        Command::Scan {
            a,
            b,
            max_p,
            sha_order,
            ref tamagawa,
        } => scan_cmd(a, b, max_p, sha_order, tamagawa.as_deref(), fmt),
        Command::Verdict {
            a,
            b,
            prime,
            rank,
            sha_order,
            ref tamagawa,
            phi_isomorphism,
        } => {
            let inputs = FineSelmerInputs {
                p: prime,
                rank,
                sha_p_order: sha_order,
                tamagawa: tamagawa.clone(),
                phi_isomorphism,
            };
            verdict_cmd(a, b, &inputs, fmt)
        }
        Command::Bounds {
            prime,
            set,
            e5_density,
        } => {
            let kind = match set {
                BoundArg::Selmer => BoundKind::Selmer,
                BoundArg::FineRank0 => BoundKind::FineRankZero,
                BoundArg::FineRank1 => BoundKind::FineRankOne,
            };
            bounds_cmd(prime, kind, e5_density, cache.as_ref(), fmt)
        }
        Command::Sieve {
            y,
            box_c,
            box_d,
            samples,
            exhaustive,
            ref betas,
            minimal_only,
            allow_small_box,
        } => {
            let mode = match (exhaustive, samples) {
                (true, _) => SamplingMode::Exhaustive,
                (false, Some(samples)) => SamplingMode::MonteCarlo {
                    samples,
                    seed: opts.seed,
                },
                (false, None) => bail!(Error::InvalidConfig("need --samples or --exhaustive".into())),
            };
            let config = SieveConfig {
                y,
                c: box_c,
                d: box_d,
                mode,
                betas: betas.clone(),
                minimal_only,
                allow_small_box,
            };
            sieve_cmd(&config, cache.as_ref(), fmt)
        }
        Command::Verify { check, prime_range } => verify_cmd(check, prime_range, opts.seed, fmt),
    }
}

fn hurwitz_cmd(disc: i64, fmt: Format) -> Result<Outcome> {
    let forms = hurwitz::enumerate_reduced_forms(disc)?;
    let output = match fmt {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                disc: i64,
                class_number: usize,
                forms: &'a [selmer_core::QuadForm],
            }
            json(
                "hurwitz",
                &Out {
                    disc,
                    class_number: forms.len(),
                    forms: &forms,
                },
            )?
        }
        Format::Csv => {
            let mut s = String::from("a,b,c\n");
            for f in &forms {
                writeln!(s, "{},{},{}", f.a, f.b, f.c)?;
            }
            s
        }
        Format::Text => {
            let mut s = format!("H({disc}) = {}\n", forms.len());
            for f in &forms {
                writeln!(s, "  ({}, {}, {})", f.a, f.b, f.c)?;
            }
            s
        }
    };
    ok(output)
}

fn census_cmd(
    p: u64,
    mode: ApMode,
    allow_large: bool,
    cache: Option<&CensusCache>,
    fmt: Format,
) -> Result<Outcome> {
    if !allow_large {
        if p >= DEFAULT_MAX_PRIME {
            bail!(Error::InvalidConfig(format!(
                "p = {p} is at or above the default ceiling {DEFAULT_MAX_PRIME}; pass --allow-large"
            )));
        }
        if mode == ApMode::Exhaustive && p > EXHAUSTIVE_AP_MAX {
            bail!(Error::InvalidConfig(format!(
                "exhaustive mode tests p^4 pairs; p = {p} exceeds {EXHAUSTIVE_AP_MAX} without --allow-large"
            )));
        }
    }
    let record = census::record_for(p, mode, cache)?;
    let output = match fmt {
        Format::Json => json("census", &record)?,
        Format::Csv => format!("{}\n{}\n", census::PrimeCensusRecord::CSV_HEADER, record.csv_row()),
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "p          {}", record.p)?;
            writeln!(s, "classes    {}", record.sbar)?;
            writeln!(s, "sp         {}", record.sp)?;
            writeln!(s, "sp_j0      {}", record.sp_j0)?;
            writeln!(s, "sp_j1728   {}", record.sp_j1728)?;
            writeln!(s, "ap         {}", record.ap)?;
            writeln!(s, "ap1        {}", record.ap1)?;
            writeln!(s, "ap2        {}", record.ap2)?;
            writeln!(s, "ap method  {}", record.ap_method)?;
            s
        }
    };
    ok(output)
}

fn table1_cmd(min_p: u64, max_p: u64, check: bool, fmt: Format) -> Result<Outcome> {
    let rows = census::table1(min_p.max(5), max_p)?;
    let failed: Vec<u64> = rows
        .iter()
        .filter(|r| r.within_tolerance == Some(false))
        .map(|r| r.p)
        .collect();
    let output = match fmt {
        Format::Json => json("table1", &rows)?,
        Format::Csv => {
            let mut s = String::from("p,sp,ratio,published,within_tolerance\n");
            for r in &rows {
                writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.p,
                    r.sp,
                    r.ratio,
                    r.published.as_deref().unwrap_or(""),
                    r.within_tolerance.map(|b| b.to_string()).unwrap_or_default()
                )?;
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                let status = match r.within_tolerance {
                    Some(true) => "ok",
                    Some(false) => "MISMATCH",
                    None => "",
                };
                writeln!(
                    s,
                    "{:>5}  {:>6}  {:<20} {:<20} {status}",
                    r.p,
                    r.sp,
                    r.ratio,
                    r.published.as_deref().unwrap_or("-")
                )?;
            }
            s
        }
    };
    if check {
        if let Err(e) = census::check_table1(&rows) {
            eprintln!("{e}");
        }
    }
    Ok(Outcome {
        output,
        ok: !check || failed.is_empty(),
    })
}

fn scan_cmd(
    a: i64,
    b: i64,
    max_p: u64,
    sha_order: Option<u64>,
    tamagawa: Option<&[u64]>,
    fmt: Format,
) -> Result<Outcome> {
    let curve = CurvePair::global(a as i128, b as i128);
    let mut report = global::scan_primes(&curve, max_p)?;
    if let Some(sha) = sha_order {
        report.exceptional = Some(global::exceptional_primes(sha, tamagawa.unwrap_or(&[]))?);
    }
    let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let output = match fmt {
        Format::Json => json("scan", &report)?,
        Format::Csv => {
            let mut s = String::from("kind,p\n");
            for (kind, primes) in [
                ("anomalous", &report.anomalous),
                ("local_torsion", &report.local_torsion),
                ("bad", &report.bad),
            ] {
                for p in primes {
                    writeln!(s, "{kind},{p}")?;
                }
            }
            if let Some(ex) = &report.exceptional {
                for p in ex {
                    writeln!(s, "exceptional,{p}")?;
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "Y              {}", report.y)?;
            writeln!(s, "anomalous      {}", list(&report.anomalous))?;
            writeln!(s, "local torsion  {}", list(&report.local_torsion))?;
            writeln!(s, "bad            {}", list(&report.bad))?;
            if let Some(ex) = &report.exceptional {
                writeln!(s, "exceptional    {}", list(ex))?;
            }
            s
        }
    };
    ok(output)
}

fn verdict_cmd(a: i64, b: i64, inputs: &FineSelmerInputs, fmt: Format) -> Result<Outcome> {
    let curve = CurvePair::global(a as i128, b as i128);
    let verdict = global::fine_selmer_verdict(&curve, inputs)?;
    let output = match fmt {
        Format::Json => json("verdict", &verdict)?,
        Format::Csv => {
            let (v, cond, lt) = match &verdict {
                FineSelmerVerdict::Finite { local_torsion } => ("finite", String::new(), local_torsion),
                FineSelmerVerdict::Inconclusive {
                    condition,
                    local_torsion,
                } => ("inconclusive", serde_json::to_value(condition)?.as_str().unwrap_or("").to_owned(), local_torsion),
            };
            format!("verdict,condition,local_torsion\n{v},{cond},{lt}\n")
        }
        Format::Text => match &verdict {
            FineSelmerVerdict::Finite { .. } => "finite: mu = lambda = 0\n".to_owned(),
            FineSelmerVerdict::Inconclusive { condition, .. } => {
                format!("inconclusive: {}\n", serde_json::to_value(condition)?.as_str().unwrap_or(""))
            }
        },
    };
    ok(output)
}

fn bounds_cmd(
    p: u64,
    kind: BoundKind,
    e5: Option<f64>,
    cache: Option<&CensusCache>,
    fmt: Format,
) -> Result<Outcome> {
    let record = census::record_for(p, ApMode::Fiber, cache)?;
    let report = densities::bound(kind, &record, e5)?;
    let output = match fmt {
        Format::Json => json("bounds", &report)?,
        Format::Csv => {
            let mut s = String::from("p,set,census_term,delaunay_term,tamagawa_term,e5_term,total,error,vacuous\n");
            writeln!(
                s,
                "{},{},{:e},{:e},{:e},{},{:e},{:e},{}",
                report.p,
                kind.name(),
                report.census_term,
                report.delaunay_term,
                report.tamagawa_term,
                report.e5_term.map(|x| format!("{x:e}")).unwrap_or_default(),
                report.total,
                report.error,
                report.vacuous
            )?;
            s
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "p              {}", report.p)?;
            writeln!(s, "set            {}", kind.name())?;
            writeln!(
                s,
                "census term    {:.15e}   ({}/{})",
                report.census_term, report.census_count, report.census_denominator
            )?;
            writeln!(s, "Sha term       {:.15e}", report.delaunay_term)?;
            writeln!(s, "Tamagawa term  {:.15e}", report.tamagawa_term)?;
            if let Some(e5) = report.e5_term {
                let tag = if report.e5_heuristic { "  (heuristic 1/(2p))" } else { "" };
                writeln!(s, "rank-one term  {e5:.15e}{tag}")?;
            }
            writeln!(s, "total          {:.15e} +- {:.1e}", report.total, report.error)?;
            if report.vacuous {
                writeln!(s, "(vacuous: total >= 1)")?;
            }
            writeln!(s, "{}", report.disclaimer)?;
            s
        }
    };
    ok(output)
}

fn sieve_cmd(config: &SieveConfig, cache: Option<&CensusCache>, fmt: Format) -> Result<Outcome> {
    config.validate()?;
    let records = sieve::census_records(config.y, cache)?;
    let report = sieve::run_sieve_experiment(config, &records)?;
    let output = match fmt {
        Format::Json => json("sieve", &report)?,
        Format::Csv => report.csv(),
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "P(Y)            {} = {:.12}", report.p_of_y, report.p_of_y_decimal)?;
            writeln!(s, "pairs           {} ({} rejected)", report.sample_size, report.rejected)?;
            writeln!(s, "mean            {:.12}", report.mean)?;
            writeln!(s, "variance        {:.12}", report.variance)?;
            writeln!(s, "mean-square     {:.12}", report.mean_square_ratio)?;
            writeln!(s, "beta  observed        ceiling         margin")?;
            for row in &report.bands {
                writeln!(
                    s,
                    "{:<5} {:<15.9} {:<15.9} {:.9}",
                    row.beta, row.observed_fraction, row.chebyshev_ceiling, row.sampling_error
                )?;
            }
            s
        }
    };
    ok(output)
}

fn default_range(check: Check) -> PrimeRange {
    let (lo, hi) = match check {
        Check::WaterhouseSchoof => (5, 50),
        Check::Fibers => (5, 13),
        Check::LemmaRank => (5, 7),
        Check::OracleEquivalence => (5, 47),
        Check::Table1 => (7, 149),
        Check::Sbar => (5, 200),
        Check::ApModes => (5, 11),
    };
    PrimeRange { lo, hi }
}

fn verify_cmd(check: CheckArg, range: Option<PrimeRange>, seed: u64, fmt: Format) -> Result<Outcome> {
    let check = match check {
        CheckArg::WaterhouseSchoof => Check::WaterhouseSchoof,
        CheckArg::Fibers => Check::Fibers,
        CheckArg::LemmaRank => Check::LemmaRank,
        CheckArg::OracleEquivalence => Check::OracleEquivalence,
        CheckArg::Table1 => Check::Table1,
        CheckArg::Sbar => Check::Sbar,
        CheckArg::ApModes => Check::ApModes,
    };
    let range = range.unwrap_or_else(|| default_range(check));
    let primes: Vec<u64> = primes_between(range.lo.max(5), range.hi);
    if primes.is_empty() {
        bail!(Error::InvalidConfig(format!("no primes >= 5 in {range}")));
    }
    let reports: Vec<CheckReport> = primes
        .iter()
        .map(|&p| checks::run(check, p, seed))
        .collect::<selmer_core::Result<_>>()?;
    let details: Option<Vec<WaterhouseSchoofReport>> = if check == Check::WaterhouseSchoof {
        Some(
            primes
                .iter()
                .map(|&p| hurwitz::verify_waterhouse_schoof(p))
                .collect::<selmer_core::Result<_>>()?,
        )
    } else {
        None
    };
    let pass = reports.iter().all(CheckReport::pass);
    let output = match fmt {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                check: &'static str,
                range: String,
                pass: bool,
                reports: &'a [CheckReport],
                #[serde(skip_serializing_if = "Option::is_none")]
                traces: Option<&'a [WaterhouseSchoofReport]>,
            }
            json(
                "verify",
                &Out {
                    check: check.name(),
                    range: range.to_string(),
                    pass,
                    reports: &reports,
                    traces: details.as_deref(),
                },
            )?
        }
        Format::Csv => {
            let mut s = String::new();
            if let Some(details) = &details {
                s.push_str("p,t,classes,hurwitz,match\n");
                for d in details {
                    for row in &d.rows {
                        writeln!(s, "{},{},{},{},{}", d.p, row.t, row.classes, row.hurwitz, row.matches)?;
                    }
                }
            } else {
                s.push_str("check,p,cases,failures\n");
                for r in &reports {
                    writeln!(s, "{},{},{},{}", check.name(), r.p, r.cases, r.failures.len())?;
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            if let Some(details) = &details {
                writeln!(s, "{:>5} {:>5} {:>8} {:>8}  match", "p", "t", "N(t)", "H")?;
                for d in details {
                    for row in &d.rows {
                        writeln!(
                            s,
                            "{:>5} {:>5} {:>8} {:>8}  {}",
                            d.p,
                            row.t,
                            row.classes,
                            row.hurwitz,
                            if row.matches { "yes" } else { "NO" }
                        )?;
                    }
                }
            }
            for r in &reports {
                let status = if r.pass() { "pass" } else { "FAIL" };
                writeln!(s, "{} p={} cases={} {status}", check.name(), r.p, r.cases)?;
                for f in &r.failures {
                    writeln!(s, "    {f}")?;
                }
            }
            writeln!(s, "{}: {}", check.name(), if pass { "pass" } else { "FAIL" })?;
            s
        }
    };
    Ok(Outcome { output, ok: pass })
}
