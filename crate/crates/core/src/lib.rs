//! Exact and numerical tools for counting elliptic curves with local `p`-torsion.
//!
//! The crate is organised bottom-up: modular and `p`-adic arithmetic, curves
//! over `F_p`, the rank test over `Z/p^2`, Hurwitz class numbers, per-prime
//! censuses, global curves over `Q`, density bounds and the sieve experiment.

pub mod census;
pub mod checks;
pub mod curve;
pub mod densities;
pub mod error;
pub mod global;
pub mod hurwitz;
pub mod lift;
pub mod ring_arith;
pub mod sieve;

pub use census::{ApMode, CensusCache, PrimeCensusRecord, Table1Row};
pub use curve::{Context, CurvePair, LocalCurveSummary};
pub use densities::{BoundKind, DensityBoundReport, Estimate};
pub use error::{Error, Result};
pub use global::{FineSelmerInputs, FineSelmerVerdict, GlobalCurve, PrimeScanReport};
pub use hurwitz::{QuadForm, WaterhouseSchoofReport};
pub use lift::{ApTable, LiftMethod, LiftTestResult};
pub use ring_arith::{PAdicScalar, QrTable, Residue};
pub use sieve::{SamplingMode, SieveConfig, SieveReport};

/// Environment variable overriding the census cache location.
pub const CACHE_ENV: &str = "SELMER_CENSUS_CACHE";
