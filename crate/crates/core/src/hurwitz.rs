//! Hurwitz class numbers as raw counts of reduced positive definite forms,
//! imprimitive forms included and no weighting at discriminants -3, -4.

use serde::{Deserialize, Serialize};

use crate::curve::isogeny_census;
use crate::error::{Error, Result};
use crate::ring_arith::check_census_prime;

/// `ax^2 + bxy + cy^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let QuadForm { a, b, c } = *self;
        a > 0 && b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn is_primitive(&self) -> bool {
        gcd(gcd(self.a, self.b), self.c) == 1
    }

    /// The reduced form equivalent to `self` under `SL_2(Z)`.
    pub fn reduce(&self) -> QuadForm {
        let QuadForm { mut a, mut b, mut c } = *self;
        assert!(a > 0 && b * b - 4 * a * c < 0, "positive definite forms only");
        loop {
            // translate b into (-a, a]
            if b > a || b <= -a {
                let k = (a - b).div_euclid(2 * a);
                c += k * (b + a * k);
                b += 2 * a * k;
            }
            if a > c {
                (a, c) = (c, a);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            return QuadForm { a, b, c };
        }
    }

    /// `f(px + qy, rx + sy)`.
    pub fn act(&self, p: i64, q: i64, r: i64, s: i64) -> QuadForm {
        let QuadForm { a, b, c } = *self;
        QuadForm {
            a: a * p * p + b * p * r + c * r * r,
            b: 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            c: a * q * q + b * q * s + c * s * s,
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_discriminant(disc: i64) -> Result<()> {
    if disc >= 0 || !matches!(disc.rem_euclid(4), 0 | 1) {
        return Err(Error::InvalidDiscriminant(disc));
    }
    Ok(())
}

/// Every reduced form of discriminant `disc`, sorted lexicographically.
pub fn enumerate_reduced_forms(disc: i64) -> Result<Vec<QuadForm>> {
    check_discriminant(disc)?;
    let n = -disc;
    let mut forms = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in -a..=a {
            if (b - disc).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let form = QuadForm::new(a, b, num / (4 * a));
            if form.is_reduced() {
                forms.push(form);
            }
        }
        a += 1;
    }
    forms.sort();
    Ok(forms)
}

/// `H(disc)`: the number of `SL_2(Z)`-classes of forms of discriminant `disc`.
pub fn hurwitz_class_number(disc: i64) -> Result<u64> {
    Ok(enumerate_reduced_forms(disc)?.len() as u64)
}

/// One line of the trace/class-number comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub t: i64,
    pub classes: u64,
    pub hurwitz: u64,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaterhouseSchoofReport {
    pub p: u64,
    pub rows: Vec<TraceCheck>,
    pub pass: bool,
}

/// Compares `N(t)` from the isomorphism-class census with `H(t^2 - 4p)` for
/// every `t` prime to `p` with `t^2 < 4p`.
pub fn verify_waterhouse_schoof(p: u64) -> Result<WaterhouseSchoofReport> {
    check_census_prime(p)?;
    let census = isogeny_census(p)?;
    let p_i = p as i64;
    let mut rows = Vec::new();
    let mut t_max = 0i64;
    while (t_max + 1) * (t_max + 1) < 4 * p_i {
        t_max += 1;
    }
    for t in -t_max..=t_max {
        if t.rem_euclid(p_i) == 0 {
            continue;
        }
        let classes = census.n_of_t(t);
        let hurwitz = hurwitz_class_number(t * t - 4 * p_i)?;
        rows.push(TraceCheck {
            t,
            classes,
            hurwitz,
            matches: classes == hurwitz,
        });
    }
    let pass = rows.iter().all(|r| r.matches);
    Ok(WaterhouseSchoofReport { p, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(a: i64, b: i64, c: i64) -> QuadForm {
        QuadForm::new(a, b, c)
    }

    /// Independent enumeration: all forms with a, |b|, c in a box, reduced by
    /// the SL_2 reduction algorithm, deduplicated.
    fn classes_by_reduction(disc: i64) -> Vec<QuadForm> {
        let bound = -disc;
        let mut set = std::collections::BTreeSet::new();
        for a in 1..=bound {
            for b in -bound..=bound {
                let num = b * b - disc;
                if num % (4 * a) == 0 {
                    set.insert(f(a, b, num / (4 * a)).reduce());
                }
            }
        }
        set.into_iter().collect()
    }

    #[test]
    fn form_examples() {
        assert_eq!(enumerate_reduced_forms(-3).unwrap(), vec![f(1, 1, 1)]);
        assert_eq!(enumerate_reduced_forms(-27).unwrap(), vec![f(1, 1, 7), f(3, 3, 3)]);
        assert_eq!(
            enumerate_reduced_forms(-23).unwrap(),
            vec![f(1, 1, 6), f(2, -1, 3), f(2, 1, 3)]
        );
        assert_eq!(hurwitz_class_number(-4).unwrap(), 1);
        assert_eq!(hurwitz_class_number(-27).unwrap(), 2);
        assert_eq!(hurwitz_class_number(-43).unwrap(), 1);
        assert_eq!(hurwitz_class_number(-19).unwrap(), 1);
    }

    #[test]
    fn invalid_discriminants() {
        for d in [0, 5, -1, -2, -5, -6] {
            assert_eq!(enumerate_reduced_forms(d), Err(Error::InvalidDiscriminant(d)));
        }
    }

    #[test]
    fn enumeration_matches_reduction_of_all_forms() {
        for d in (-160..0).filter(|d: &i64| matches!(d.rem_euclid(4), 0 | 1)) {
            assert_eq!(enumerate_reduced_forms(d).unwrap(), classes_by_reduction(d), "disc {d}");
        }
    }

    #[test]
    fn forms_satisfy_invariants() {
        for d in (-500..0).filter(|d: &i64| matches!(d.rem_euclid(4), 0 | 1)) {
            for form in enumerate_reduced_forms(d).unwrap() {
                assert_eq!(form.discriminant(), d);
                assert!(form.is_reduced());
                assert_eq!(form.reduce(), form);
            }
        }
    }

    #[test]
    fn kronecker_decomposition() {
        for d in (-500..0).filter(|d: &i64| matches!(d.rem_euclid(4), 0 | 1)) {
            let mut total = 0;
            let mut k = 1i64;
            while k * k <= -d {
                if d % (k * k) == 0 && matches!((d / (k * k)).rem_euclid(4), 0 | 1) {
                    total += enumerate_reduced_forms(d / (k * k))
                        .unwrap()
                        .iter()
                        .filter(|q| q.is_primitive())
                        .count() as u64;
                }
                k += 1;
            }
            assert_eq!(hurwitz_class_number(d).unwrap(), total, "disc {d}");
        }
    }

    #[test]
    fn waterhouse_schoof_examples() {
        let r7 = verify_waterhouse_schoof(7).unwrap();
        let row = r7.rows.iter().find(|r| r.t == 1).unwrap();
        assert_eq!((row.classes, row.hurwitz), (2, 2));
        let r11 = verify_waterhouse_schoof(11).unwrap();
        let row = r11.rows.iter().find(|r| r.t == 1).unwrap();
        assert_eq!((row.classes, row.hurwitz), (1, 1));
        let r5 = verify_waterhouse_schoof(5).unwrap();
        let row = r5.rows.iter().find(|r| r.t == 1).unwrap();
        assert_eq!((row.classes, row.hurwitz), (1, 1));
        assert!(r5.pass && r7.pass && r11.pass);
        // t ranges over |t| < 2 sqrt(p), t != 0
        assert_eq!(r7.rows.iter().map(|r| r.t).collect::<Vec<_>>(), vec![-5, -4, -3, -2, -1, 1, 2, 3, 4, 5]);
    }

    proptest! {
        #[test]
        fn sl2_translates_reduce_back(
            idx in 0usize..1000,
            p in -4i64..5, q in -4i64..5, r in -4i64..5,
        ) {
            let discs: Vec<i64> = (-300..0).filter(|d: &i64| matches!(d.rem_euclid(4), 0 | 1)).collect();
            let d = discs[idx % discs.len()];
            // complete (p, q, r) to a matrix of determinant 1 when possible
            prop_assume!(p != 0 && (1 + q * r) % p == 0);
            let s = (1 + q * r) / p;
            let forms = enumerate_reduced_forms(d).unwrap();
            for form in &forms {
                let moved = form.act(p, q, r, s);
                prop_assert_eq!(moved.discriminant(), d);
                prop_assert_eq!(moved.reduce(), *form);
            }
        }
    }
}
