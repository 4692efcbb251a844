//! Short Weierstrass curves `y^2 = x^3 + ax + b` over `F_p`: discriminants,
//! j-invariants, naive point counts and the isomorphism-class census.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring_arith::{check_census_prime, mod_inv, mod_pow, reduce, sqrt_mod_p, QrTable, Residue};

/// Where the coefficients of a [`CurvePair`] live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Context {
    Global,
    Modulo(u64),
}

/// Coefficients `(a, b)` of `y^2 = x^3 + ax + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CurvePair {
    pub a: i128,
    pub b: i128,
    pub context: Context,
}

impl CurvePair {
    pub fn global(a: i128, b: i128) -> Self {
        CurvePair {
            a,
            b,
            context: Context::Global,
        }
    }

    /// Coefficients reduced into `[0, m)`.
    pub fn modulo(a: i128, b: i128, m: u64) -> Self {
        CurvePair {
            a: reduce(a, m) as i128,
            b: reduce(b, m) as i128,
            context: Context::Modulo(m),
        }
    }

    pub fn modulus(&self) -> Option<u64> {
        match self.context {
            Context::Global => None,
            Context::Modulo(m) => Some(m),
        }
    }

    /// Reduction of the pair to a modulus (from either context).
    pub fn reduce_to(&self, m: u64) -> Self {
        CurvePair::modulo(self.a, self.b, m)
    }

    /// `-16 (4a^3 + 27b^2)` in the context ring. Panics on i128 overflow,
    /// which needs `|a|` beyond ~10^12.
    pub fn discriminant(&self) -> i128 {
        match self.context {
            Context::Global => {
                let a3 = self.a.checked_pow(3).expect("discriminant overflow");
                let inner = a3
                    .checked_mul(4)
                    .and_then(|x| x.checked_add(self.b.checked_mul(self.b)?.checked_mul(27)?))
                    .expect("discriminant overflow");
                inner.checked_mul(-16).expect("discriminant overflow")
            }
            Context::Modulo(m) => self.discriminant_mod(m) as i128,
        }
    }

    pub fn discriminant_mod(&self, m: u64) -> u64 {
        let a = Residue::new(self.a, m);
        let b = Residue::new(self.b, m);
        let inner = Residue::new(4, m) * a * a * a + Residue::new(27, m) * b * b;
        (Residue::new(-16, m) * inner).value()
    }

    /// `p` does not divide the discriminant (p >= 5, so the factor 16 is a unit).
    pub fn is_nonsingular_mod(&self, p: u64) -> bool {
        nonsingular(reduce(self.a, p), reduce(self.b, p), p)
    }

    fn prime_context(&self) -> Result<u64> {
        match self.context {
            Context::Modulo(p) => {
                check_census_prime(p)?;
                Ok(p)
            }
            Context::Global => Err(Error::Precondition(
                "operation needs a curve over F_p".into(),
            )),
        }
    }

    fn check_nonsingular(&self, p: u64) -> Result<()> {
        if !self.is_nonsingular_mod(p) {
            return Err(Error::SingularCurve {
                a: self.a,
                b: self.b,
                modulus: p,
            });
        }
        Ok(())
    }

    /// `1728 * 4a^3 / (4a^3 + 27b^2)` over `F_p`.
    pub fn j_invariant(&self) -> Result<Residue> {
        let p = self.prime_context()?;
        self.check_nonsingular(p)?;
        let a = Residue::new(self.a, p);
        let b = Residue::new(self.b, p);
        let four_a3 = Residue::new(4, p) * a * a * a;
        let denom = four_a3 + Residue::new(27, p) * b * b;
        Ok(Residue::new(1728, p) * four_a3 * denom.inverse().expect("nonsingular"))
    }

    /// `#E(F_p)` by summing the quadratic character.
    pub fn count_points(&self) -> Result<u64> {
        let p = self.prime_context()?;
        self.check_nonsingular(p)?;
        Ok(count_points_with(
            self.a as u64,
            self.b as u64,
            &QrTable::new(p),
        ))
    }

    pub fn trace(&self) -> Result<i64> {
        let p = self.prime_context()?;
        Ok(p as i64 + 1 - self.count_points()? as i64)
    }

    pub fn is_anomalous(&self) -> Result<bool> {
        let p = self.prime_context()?;
        Ok(self.count_points()? % p == 0)
    }

    pub fn summary(&self) -> Result<LocalCurveSummary> {
        let p = self.prime_context()?;
        let order = self.count_points()?;
        let trace = p as i64 + 1 - order as i64;
        Ok(LocalCurveSummary {
            p,
            order,
            trace,
            anomalous: order % p == 0,
            supersingular: trace.rem_euclid(p as i64) == 0,
            j: self.j_invariant().ok().map(|r| r.value()),
        })
    }

    /// A point of exact order `p` when `p | #E(F_p)`, found by clearing the
    /// cofactor of seeded random points.
    pub fn find_point_of_order_p(&self, seed: u64) -> Result<Option<(u64, u64)>> {
        let p = self.prime_context()?;
        self.check_nonsingular(p)?;
        let table = QrTable::new(p);
        Ok(point_of_order_p(self.a as u64, self.b as u64, &table, seed))
    }
}

/// Per-curve data over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCurveSummary {
    pub p: u64,
    pub order: u64,
    pub trace: i64,
    pub anomalous: bool,
    pub supersingular: bool,
    /// `None` when the curve is singular.
    pub j: Option<u64>,
}

#[inline]
pub(crate) fn nonsingular(a: u64, b: u64, p: u64) -> bool {
    let a3 = a as u128 * a as u128 % p as u128 * a as u128;
    let b2 = b as u128 * b as u128;
    !(4 * a3 + 27 * b2).is_multiple_of(p as u128)
}

/// `#E(F_p)` for reduced coefficients.
pub fn count_points_with(a: u64, b: u64, table: &QrTable) -> u64 {
    let p = table.prime();
    let mut sum: i64 = 0;
    for x in 0..p {
        let rhs = (x * x % p * x + a * x + b) % p;
        sum += table.chi(rhs) as i64;
    }
    (p as i64 + 1 + sum) as u64
}

/// Affine point over `Z/m`, or the point at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Point {
    Infinity,
    Affine(u64, u64),
}

/// Chord–tangent addition on `y^2 = x^3 + ax + b` over `F_p`.
pub fn add_points(a: u64, p: u64, lhs: Point, rhs: Point) -> Point {
    let (x1, y1, x2, y2) = match (lhs, rhs) {
        (Point::Infinity, q) | (q, Point::Infinity) => return q,
        (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
    };
    let mulm = |u: u64, v: u64| (u as u128 * v as u128 % p as u128) as u64;
    let lambda = if x1 == x2 {
        if (y1 + y2) % p == 0 {
            return Point::Infinity;
        }
        let num = (3 * mulm(x1, x1) + a) % p;
        mulm(num, mod_inv(2 * y1 % p, p).expect("y nonzero"))
    } else {
        let num = (y2 + p - y1) % p;
        mulm(num, mod_inv((x2 + p - x1) % p, p).expect("distinct x"))
    };
    let x3 = (mulm(lambda, lambda) + 2 * p - x1 - x2) % p;
    let y3 = (mulm(lambda, (x1 + p - x3) % p) + p - y1) % p;
    Point::Affine(x3, y3)
}

/// Double-and-add scalar multiple over `F_p`.
pub fn scalar_mul(a: u64, p: u64, mut k: u64, mut point: Point) -> Point {
    let mut acc = Point::Infinity;
    while k > 0 {
        if k & 1 == 1 {
            acc = add_points(a, p, acc, point);
        }
        point = add_points(a, p, point, point);
        k >>= 1;
    }
    acc
}

pub(crate) fn point_of_order_p(a: u64, b: u64, table: &QrTable, seed: u64) -> Option<(u64, u64)> {
    let p = table.prime();
    let order = count_points_with(a, b, table);
    if !order.is_multiple_of(p) {
        return None;
    }
    let cofactor = order / p;
    let try_x = |x: u64| -> Option<(u64, u64)> {
        let rhs = (x * x % p * x + a * x + b) % p;
        if table.chi(rhs) != 1 {
            return None;
        }
        let y = sqrt_mod_p(Residue::new(rhs as i128, p)).ok()??.value();
        match scalar_mul(a, p, cofactor, Point::Affine(x, y)) {
            Point::Affine(qx, qy) => Some((qx, qy)),
            Point::Infinity => None,
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4 * p {
        if let Some(pt) = try_x(rng.random_range(0..p)) {
            return Some(pt);
        }
    }
    (0..p).find_map(try_x)
}

/// One `F_p`-isomorphism class of curves, i.e. an orbit of `(a, b) -> (c^4 a, c^6 b)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoClass {
    pub representative: (u64, u64),
    pub orbit_size: u64,
    pub trace: i64,
}

/// All isomorphism classes of nonsingular curves over `F_p`, grouped by trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsogenyCensus {
    pub p: u64,
    pub classes: Vec<IsoClass>,
    /// `N(t)`: number of isomorphism classes with trace `t`.
    pub counts: BTreeMap<i64, u64>,
}

impl IsogenyCensus {
    pub fn n_of_t(&self, t: i64) -> u64 {
        self.counts.get(&t).copied().unwrap_or(0)
    }

    pub fn total_classes(&self) -> u64 {
        self.classes.len() as u64
    }
}

/// Enumerates every orbit of nonsingular pairs under `c in F_p^x` and records
/// the trace of one representative.
pub fn isogeny_census(p: u64) -> Result<IsogenyCensus> {
    check_census_prime(p)?;
    let table = QrTable::new(p);
    let n = p as usize;
    let mut seen = vec![false; n * n];
    let powers: Vec<(u64, u64)> = (1..p)
        .map(|c| (mod_pow(c, 4, p), mod_pow(c, 6, p)))
        .collect();
    let mut classes = Vec::new();
    for a in 0..p {
        for b in 0..p {
            if seen[a as usize * n + b as usize] || !nonsingular(a, b, p) {
                continue;
            }
            let mut orbit_size = 0u64;
            for &(c4, c6) in &powers {
                let idx = (c4 * a % p) as usize * n + (c6 * b % p) as usize;
                if !seen[idx] {
                    seen[idx] = true;
                    orbit_size += 1;
                }
            }
            let trace = p as i64 + 1 - count_points_with(a, b, &table) as i64;
            classes.push(IsoClass {
                representative: (a, b),
                orbit_size,
                trace,
            });
        }
    }
    let mut counts = BTreeMap::new();
    for class in &classes {
        *counts.entry(class.trace).or_insert(0) += 1;
    }
    Ok(IsogenyCensus { p, classes, counts })
}
