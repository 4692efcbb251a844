//! Exact arithmetic modulo p and p^k, quadratic residue symbols, Hensel
//! lifting of square roots, and bounded-precision p-adic scalars.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Deterministic primality test by trial division. Census moduli are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// All primes in the closed interval `[lo, hi]`.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let n = hi as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    if n >= 1 {
        sieve[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (lo.max(2) as usize..=n)
        .filter(|&k| sieve[k])
        .map(|k| k as u64)
        .collect()
}

/// Rejects anything that is not a prime `p >= 5`.
pub fn check_census_prime(p: u64) -> Result<()> {
    if p == 2 || p == 3 {
        return Err(Error::UnsupportedPrime(p));
    }
    if !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    Ok(())
}

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = ((a % m) as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Reduces a signed integer into `[0, m)`.
#[inline]
pub fn reduce(n: i128, m: u64) -> u64 {
    n.rem_euclid(m as i128) as u64
}

/// An element of `Z/mZ`, always stored reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: i128, modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        Residue {
            value: reduce(value, modulus),
            modulus,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn pow(&self, exp: u64) -> Self {
        Residue {
            value: mod_pow(self.value, exp, self.modulus),
            modulus: self.modulus,
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        mod_inv(self.value, self.modulus).map(|value| Residue {
            value,
            modulus: self.modulus,
        })
    }

    /// Reduction to a divisor of the modulus.
    pub fn reduce_to(&self, modulus: u64) -> Self {
        debug_assert_eq!(self.modulus % modulus, 0);
        Residue {
            value: self.value % modulus,
            modulus,
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let s = self.value as u128 + rhs.value as u128;
        Residue {
            value: (s % self.modulus as u128) as u64,
            modulus: self.modulus,
        }
    }
}

impl Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Residue) -> Residue {
        self + (-rhs)
    }
}

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        Residue {
            value: if self.value == 0 {
                0
            } else {
                self.modulus - self.value
            },
            modulus: self.modulus,
        }
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Residue {
            value: (self.value as u128 * rhs.value as u128 % self.modulus as u128) as u64,
            modulus: self.modulus,
        }
    }
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p.is_multiple_of(2) || !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    Ok(())
}

/// Legendre symbol `(a/p)` by Euler's criterion.
pub fn legendre_symbol(a: i64, p: u64) -> Result<i8> {
    check_odd_prime(p)?;
    let r = reduce(a as i128, p);
    if r == 0 {
        return Ok(0);
    }
    Ok(if mod_pow(r, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

/// Precomputed quadratic character of `F_p`, for hot counting loops.
#[derive(Clone, Debug)]
pub struct QrTable {
    p: u64,
    chi: Vec<i8>,
}

impl QrTable {
    pub fn new(p: u64) -> Self {
        let mut chi = vec![-1i8; p as usize];
        chi[0] = 0;
        for x in 1..p {
            chi[(x * x % p) as usize] = 1;
        }
        QrTable { p, chi }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Character value at a reduced residue `r < p`.
    #[inline]
    pub fn chi(&self, r: u64) -> i8 {
        self.chi[r as usize]
    }
}

/// Square root modulo an odd prime by Tonelli–Shanks; the smaller root is returned.
pub fn sqrt_mod_p(a: Residue) -> Result<Option<Residue>> {
    let p = a.modulus();
    check_odd_prime(p)?;
    let n = a.value();
    if n == 0 {
        return Ok(Some(a));
    }
    if mod_pow(n, (p - 1) / 2, p) != 1 {
        return Ok(None);
    }
    let root = if p % 4 == 3 {
        mod_pow(n, (p + 1) / 4, p)
    } else {
        let mut q = p - 1;
        let mut s = 0u32;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let mut z = 2u64;
        while mod_pow(z, (p - 1) / 2, p) != p - 1 {
            z += 1;
        }
        let mulm = |x: u64, y: u64| (x as u128 * y as u128 % p as u128) as u64;
        let mut m = s;
        let mut c = mod_pow(z, q, p);
        let mut t = mod_pow(n, q, p);
        let mut r = mod_pow(n, q.div_ceil(2), p);
        while t != 1 {
            let mut i = 0u32;
            let mut t2 = t;
            while t2 != 1 {
                t2 = mulm(t2, t2);
                i += 1;
            }
            let b = mod_pow(c, 1u64 << (m - i - 1), p);
            m = i;
            c = mulm(b, b);
            t = mulm(t, c);
            r = mulm(r, b);
        }
        r
    };
    Ok(Some(Residue::new(root.min(p - root) as i128, p)))
}

/// Lifts a simple square root of `a` modulo `p` to the unique root modulo `p^k`
/// congruent to it.
pub fn hensel_sqrt_lift(a: Residue, root: Residue, p: u64, k: u32) -> Result<Residue> {
    check_odd_prime(p)?;
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let pk = p
        .checked_pow(k)
        .ok_or_else(|| Error::Precondition(format!("{p}^{k} exceeds machine width")))?;
    if a.modulus() != pk {
        return Err(Error::Precondition(format!(
            "value modulus {} is not {p}^{k}",
            a.modulus()
        )));
    }
    if root.modulus() != p {
        return Err(Error::Precondition(format!(
            "root modulus {} is not {p}",
            root.modulus()
        )));
    }
    if root.is_zero() {
        return Err(Error::HenselFailure("root is 0 mod p (non-simple root)".into()));
    }
    if root * root != a.reduce_to(p) {
        return Err(Error::Precondition(format!(
            "{}^2 is not congruent to {} mod {p}",
            root.value(),
            a.value()
        )));
    }
    let mut y = Residue::new(root.value() as i128, pk);
    let two = Residue::new(2, pk);
    // each Newton step doubles the number of correct digits
    let mut correct = 1u32;
    while correct < k {
        let inv = (two * y).inverse().expect("2y is a unit");
        y = y - (y * y - a) * inv;
        correct *= 2;
    }
    debug_assert_eq!(y * y, a);
    Ok(y)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    /// The exact zero sentinel; carries no precision.
    Zero,
    Finite {
        valuation: i64,
        /// Unit part, reduced modulo `p^precision`.
        unit: BigUint,
        precision: u32,
    },
}

/// A p-adic number `p^v * u` with `u` a unit known modulo `p^precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAdicScalar {
    prime: u64,
    repr: Repr,
}

fn ppow(p: u64, e: u32) -> BigUint {
    BigUint::from(p).pow(e)
}

impl PAdicScalar {
    pub fn zero(prime: u64) -> Self {
        PAdicScalar {
            prime,
            repr: Repr::Zero,
        }
    }

    /// An exact integer, truncated to `precision` significant digits. Zero maps
    /// to the exact-zero sentinel.
    pub fn from_integer(n: &BigInt, prime: u64, precision: u32) -> Self {
        assert!(precision >= 1, "precision must be positive");
        if n.is_zero() {
            return Self::zero(prime);
        }
        let pb = BigInt::from(prime);
        let mut m = n.clone();
        let mut v = 0i64;
        loop {
            let (q, r) = m.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            m = q;
            v += 1;
        }
        let modulus = BigInt::from(ppow(prime, precision));
        let unit = m.mod_floor(&modulus).to_biguint().expect("nonnegative");
        PAdicScalar {
            prime,
            repr: Repr::Finite {
                valuation: v,
                unit,
                precision,
            },
        }
    }

    pub fn from_i64(n: i64, prime: u64, precision: u32) -> Self {
        Self::from_integer(&BigInt::from(n), prime, precision)
    }

    /// Builds `p^valuation * unit`; `unit` must be prime to `p`.
    pub fn from_parts(prime: u64, valuation: i64, unit: &BigInt, precision: u32) -> Result<Self> {
        if (unit % BigInt::from(prime)).is_zero() {
            return Err(Error::Precondition(format!("{unit} is not a {prime}-adic unit")));
        }
        let modulus = BigInt::from(ppow(prime, precision));
        Ok(PAdicScalar {
            prime,
            repr: Repr::Finite {
                valuation,
                unit: unit.mod_floor(&modulus).to_biguint().expect("nonnegative"),
                precision,
            },
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// `None` for the exact zero.
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Finite { valuation, .. } => Some(*valuation),
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Finite { unit, .. } => Some(unit),
        }
    }

    /// Significant digits; `None` for the exact zero.
    pub fn precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Finite { precision, .. } => Some(*precision),
        }
    }

    /// Absolute precision `valuation + precision`, infinite for exact zero.
    fn absolute_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Finite {
                valuation,
                precision,
                ..
            } => Some(valuation + *precision as i64),
        }
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Finite {
                valuation,
                unit,
                precision,
            } => {
                let m = ppow(self.prime, *precision);
                PAdicScalar {
                    prime: self.prime,
                    repr: Repr::Finite {
                        valuation: *valuation,
                        unit: (&m - unit) % &m,
                        precision: *precision,
                    },
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let (
            Repr::Finite {
                valuation: v1,
                unit: u1,
                ..
            },
            Repr::Finite {
                valuation: v2,
                unit: u2,
                ..
            },
        ) = (&self.repr, &other.repr)
        else {
            return Ok(if self.is_exact_zero() {
                other.clone()
            } else {
                self.clone()
            });
        };
        let p = self.prime;
        let v = (*v1).min(*v2);
        let abs = self
            .absolute_precision()
            .unwrap()
            .min(other.absolute_precision().unwrap());
        let digits = (abs - v) as u32;
        let m = ppow(p, digits);
        let s = (u1 * ppow(p, (v1 - v) as u32) + u2 * ppow(p, (v2 - v) as u32)) % &m;
        if s.is_zero() {
            return Err(Error::PrecisionExhausted);
        }
        let pb = BigUint::from(p);
        let mut s = s;
        let mut w = 0u32;
        while (&s % &pb).is_zero() {
            s /= &pb;
            w += 1;
        }
        let precision = digits - w;
        Ok(PAdicScalar {
            prime: p,
            repr: Repr::Finite {
                valuation: v + w as i64,
                unit: s % ppow(p, precision),
                precision,
            },
        })
    }

    /// The sum, or the absolute precision to which it vanishes.
    pub(crate) fn add_or_vanish(&self, other: &Self) -> Result<std::result::Result<Self, i64>> {
        match self.add(other) {
            Ok(s) => Ok(Ok(s)),
            Err(Error::PrecisionExhausted) => Ok(Err(self
                .absolute_precision()
                .unwrap()
                .min(other.absolute_precision().unwrap()))),
            Err(e) => Err(e),
        }
    }

    /// Drops the digits at or beyond `p^abs`; `None` when nothing is left.
    pub(crate) fn truncate_absolute(&self, abs: i64) -> Option<Self> {
        let Repr::Finite {
            valuation,
            unit,
            precision,
        } = &self.repr
        else {
            return None;
        };
        if *valuation >= abs {
            return None;
        }
        let precision = (*precision).min((abs - valuation) as u32);
        Some(PAdicScalar {
            prime: self.prime,
            repr: Repr::Finite {
                valuation: *valuation,
                unit: unit % ppow(self.prime, precision),
                precision,
            },
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        match (&self.repr, &other.repr) {
            (
                Repr::Finite {
                    valuation: v1,
                    unit: u1,
                    precision: r1,
                },
                Repr::Finite {
                    valuation: v2,
                    unit: u2,
                    precision: r2,
                },
            ) => {
                let precision = (*r1).min(*r2);
                Ok(PAdicScalar {
                    prime: self.prime,
                    repr: Repr::Finite {
                        valuation: v1 + v2,
                        unit: (u1 * u2) % ppow(self.prime, precision),
                        precision,
                    },
                })
            }
            _ => Ok(Self::zero(self.prime)),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        match (&self.repr, &other.repr) {
            (_, Repr::Zero) => Err(Error::DivisionByZero),
            (Repr::Zero, _) => Ok(self.clone()),
            (
                Repr::Finite {
                    valuation: v1,
                    unit: u1,
                    precision: r1,
                },
                Repr::Finite {
                    valuation: v2,
                    unit: u2,
                    precision: r2,
                },
            ) => {
                let precision = (*r1).min(*r2);
                let m = ppow(self.prime, precision);
                let inv = BigInt::from(u2.clone())
                    .modinv(&BigInt::from(m.clone()))
                    .expect("unit part is invertible");
                let inv = inv.to_biguint().expect("nonnegative");
                Ok(PAdicScalar {
                    prime: self.prime,
                    repr: Repr::Finite {
                        valuation: v1 - v2,
                        unit: (u1 * inv) % m,
                        precision,
                    },
                })
            }
        }
    }

    /// Equality up to the smaller of the two precisions.
    pub fn agrees_with(&self, other: &Self) -> bool {
        match (&self.repr, &other.repr) {
            (Repr::Zero, Repr::Zero) => true,
            (
                Repr::Finite {
                    valuation: v1,
                    unit: u1,
                    precision: r1,
                },
                Repr::Finite {
                    valuation: v2,
                    unit: u2,
                    precision: r2,
                },
            ) => {
                let m = ppow(self.prime, (*r1).min(*r2));
                v1 == v2 && (u1 % &m) == (u2 % &m)
            }
            _ => false,
        }
    }

    /// The integer `p^v * u` when `v >= 0`, reduced modulo `p^k`.
    pub fn to_residue_u64(&self, k: u32) -> Option<u64> {
        match &self.repr {
            Repr::Zero => Some(0),
            Repr::Finite {
                valuation, unit, ..
            } => {
                if *valuation < 0 {
                    return None;
                }
                let m = ppow(self.prime, k);
                ((unit * ppow(self.prime, *valuation as u32)) % m).to_u64()
            }
        }
    }
}

impl fmt::Display for PAdicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero => write!(f, "0"),
            Repr::Finite {
                valuation,
                unit,
                precision,
            } => write!(
                f,
                "{}^{} * {} + O({}^{})",
                self.prime,
                valuation,
                unit,
                self.prime,
                valuation + *precision as i64
            ),
        }
    }
}

/// Lifts a simple square root of `value` from `Z/p` to `Z/p^precision`
/// with arbitrary-width integers.
pub(crate) fn hensel_sqrt_lift_big(
    value: &BigInt,
    root: u64,
    p: u64,
    precision: u32,
) -> Result<BigInt> {
    if root.is_multiple_of(p) {
        return Err(Error::HenselFailure("root is 0 mod p (non-simple root)".into()));
    }
    let m = BigInt::from(ppow(p, precision));
    let target = value.mod_floor(&m);
    let mut y = BigInt::from(root);
    if !((&y * &y - &target).mod_floor(&BigInt::from(p))).is_zero() {
        return Err(Error::Precondition("root does not square to value mod p".into()));
    }
    let mut correct = 1u32;
    while correct < precision {
        let inv = (BigInt::from(2) * &y)
            .mod_floor(&m)
            .modinv(&m)
            .expect("2y is a unit");
        y = (&y - (&y * &y - &target) * inv).mod_floor(&m);
        correct *= 2;
    }
    debug_assert!((&y * &y - &target).mod_floor(&m).is_zero());
    Ok(y.abs())
}

impl PAdicScalar {
    pub fn one(prime: u64, precision: u32) -> Self {
        Self::from_integer(&BigInt::one(), prime, precision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_symbol(4, 7).unwrap(), 1);
        assert_eq!(legendre_symbol(0, 7).unwrap(), 0);
        assert_eq!(legendre_symbol(3, 7).unwrap(), -1);
        assert_eq!(legendre_symbol(-1, 7).unwrap(), -1);
    }

    #[test]
    fn legendre_rejects_bad_modulus() {
        assert_eq!(legendre_symbol(1, 8), Err(Error::InvalidModulus(8)));
        assert_eq!(legendre_symbol(1, 9), Err(Error::InvalidModulus(9)));
        assert_eq!(legendre_symbol(1, 2), Err(Error::InvalidModulus(2)));
    }

    #[test]
    fn legendre_multiplicative() {
        for p in primes_between(3, 100) {
            for a in 0..p as i64 {
                for b in 0..p as i64 {
                    let lhs = legendre_symbol(a, p).unwrap() * legendre_symbol(b, p).unwrap();
                    assert_eq!(lhs, legendre_symbol(a * b, p).unwrap(), "p={p} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn legendre_matches_square_enumeration() {
        for p in primes_between(3, 100) {
            let squares: std::collections::HashSet<u64> = (1..p).map(|x| x * x % p).collect();
            let table = QrTable::new(p);
            for a in 0..p {
                let expected = if a == 0 {
                    0
                } else if squares.contains(&a) {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre_symbol(a as i64, p).unwrap(), expected);
                assert_eq!(table.chi(a), expected);
            }
        }
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_mod_p(Residue::new(4, 7)).unwrap(), Some(Residue::new(2, 7)));
        assert_eq!(sqrt_mod_p(Residue::new(2, 7)).unwrap(), Some(Residue::new(3, 7)));
        assert_eq!(sqrt_mod_p(Residue::new(3, 7)).unwrap(), None);
        assert!(sqrt_mod_p(Residue::new(3, 15)).is_err());
    }

    #[test]
    fn sqrt_recovers_roots() {
        for p in primes_between(3, 100) {
            for r in 1..p {
                let a = Residue::new((r * r) as i128, p);
                let s = sqrt_mod_p(a).unwrap().unwrap().value();
                assert!(s == r || s == p - r, "p={p} r={r} got {s}");
                assert!(s <= p - s);
            }
        }
    }

    #[test]
    fn hensel_examples() {
        let lift = hensel_sqrt_lift(Residue::new(4, 49), Residue::new(2, 7), 7, 2).unwrap();
        assert_eq!(lift.value(), 2);
        let lift = hensel_sqrt_lift(Residue::new(2, 49), Residue::new(3, 7), 7, 2).unwrap();
        assert_eq!(lift.value(), 10);
        assert!(matches!(
            hensel_sqrt_lift(Residue::new(0, 49), Residue::new(0, 7), 7, 2),
            Err(Error::HenselFailure(_))
        ));
        assert!(matches!(
            hensel_sqrt_lift(Residue::new(3, 49), Residue::new(1, 7), 7, 2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn hensel_exhaustive_small() {
        for p in [5u64, 7, 11, 13] {
            for k in 1..=4u32 {
                let pk = p.pow(k);
                for a in 0..pk {
                    if a % p == 0 {
                        continue;
                    }
                    let Some(root) = sqrt_mod_p(Residue::new((a % p) as i128, p)).unwrap() else {
                        continue;
                    };
                    let y = hensel_sqrt_lift(Residue::new(a as i128, pk), root, p, k).unwrap();
                    assert_eq!(y * y, Residue::new(a as i128, pk));
                    assert_eq!(y.value() % p, root.value());
                }
            }
        }
    }

    #[test]
    fn padic_examples() {
        let x = PAdicScalar::from_parts(5, 0, &BigInt::from(3), 8).unwrap();
        let y = PAdicScalar::from_parts(5, 1, &BigInt::from(2), 8).unwrap();
        let z = x.mul(&y).unwrap();
        assert_eq!(z.valuation(), Some(1));
        assert_eq!(z.unit().unwrap(), &BigUint::from(6u32));

        let x = PAdicScalar::from_parts(5, 2, &BigInt::from(1), 8).unwrap();
        let y = PAdicScalar::from_parts(5, 0, &BigInt::from(1), 8).unwrap();
        let s = x.add(&y).unwrap();
        assert_eq!(s.valuation(), Some(0));
        assert_eq!(s.unit().unwrap(), &BigUint::from(26u32));

        let x = PAdicScalar::from_parts(5, 0, &BigInt::from(1), 2).unwrap();
        let y = PAdicScalar::from_parts(5, 3, &BigInt::from(1), 2).unwrap();
        let q = x.div(&y).unwrap();
        assert_eq!(q.valuation(), Some(-3));
        assert_eq!(q.precision(), Some(2));
    }

    #[test]
    fn padic_vanishing_helpers() {
        let x = PAdicScalar::from_i64(7, 7, 4);
        let y = PAdicScalar::from_i64(-7, 7, 4);
        assert_eq!(x.add_or_vanish(&y).unwrap(), Err(5));
        let z = PAdicScalar::from_i64(1 + 49 * 3, 7, 6);
        let t = z.truncate_absolute(2).unwrap();
        assert_eq!((t.valuation(), t.precision()), (Some(0), Some(2)));
        assert!(x.truncate_absolute(1).is_none());
        assert!(PAdicScalar::zero(7).truncate_absolute(3).is_none());
    }

    #[test]
    fn padic_errors() {
        let x = PAdicScalar::from_i64(7, 5, 4);
        assert_eq!(x.div(&PAdicScalar::zero(5)), Err(Error::DivisionByZero));
        // 1 - (1 + 5^4) vanishes within 4 digits
        let a = PAdicScalar::from_i64(1, 5, 4);
        let b = PAdicScalar::from_i64(1 + 625, 5, 4);
        assert_eq!(a.sub(&b), Err(Error::PrecisionExhausted));
        // at 5 digits the difference is visible
        let a = PAdicScalar::from_i64(1, 5, 5);
        let b = PAdicScalar::from_i64(1 + 625, 5, 5);
        let d = a.sub(&b).unwrap();
        assert_eq!(d.valuation(), Some(4));
        assert_eq!(d.precision(), Some(1));
        let seven = PAdicScalar::from_i64(7, 7, 3);
        assert!(matches!(x.add(&seven), Err(Error::PrimeMismatch(5, 7))));
    }

    #[test]
    fn padic_exact_zero_is_distinguished() {
        let z = PAdicScalar::from_i64(0, 5, 8);
        assert!(z.is_exact_zero());
        assert_eq!(z.valuation(), None);
        let x = PAdicScalar::from_i64(10, 5, 8);
        assert_eq!(x.add(&z).unwrap(), x);
        assert!(x.mul(&z).unwrap().is_exact_zero());
        let small = PAdicScalar::from_i64(5i64.pow(20), 5, 8);
        assert!(!small.is_exact_zero());
        assert_eq!(small.valuation(), Some(20));
    }

    fn scalar(p: u64) -> impl Strategy<Value = PAdicScalar> {
        (-6i64..6, 1i64..1_000_000, 1u32..10).prop_filter_map("unit", move |(v, u, prec)| {
            PAdicScalar::from_parts(p, v, &BigInt::from(u), prec).ok()
        })
    }

    proptest! {
        #[test]
        fn padic_mul_div_round_trip(x in scalar(7), y in scalar(7)) {
            let back = x.mul(&y).unwrap().div(&y).unwrap();
            prop_assert!(back.agrees_with(&x));
            prop_assert_eq!(back.precision(), Some(x.precision().unwrap().min(y.precision().unwrap())));
        }

        #[test]
        fn padic_valuation_rules(x in scalar(5), y in scalar(5)) {
            let (vx, vy) = (x.valuation().unwrap(), y.valuation().unwrap());
            prop_assert_eq!(x.mul(&y).unwrap().valuation(), Some(vx + vy));
            prop_assert_eq!(x.div(&y).unwrap().valuation(), Some(vx - vy));
            if let Ok(s) = x.add(&y) {
                prop_assert!(s.valuation().unwrap() >= vx.min(vy));
                if vx != vy {
                    prop_assert_eq!(s.valuation(), Some(vx.min(vy)));
                }
            }
        }

        #[test]
        fn padic_add_matches_integers(a in -100_000i64..100_000, b in -100_000i64..100_000) {
            prop_assume!(a != 0 && b != 0 && a + b != 0);
            let p = 3;
            let x = PAdicScalar::from_i64(a, p, 30);
            let y = PAdicScalar::from_i64(b, p, 30);
            let s = x.add(&y).unwrap();
            prop_assert!(s.agrees_with(&PAdicScalar::from_i64(a + b, p, 30)));
        }
    }
}
