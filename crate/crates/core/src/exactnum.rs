//! Exact rationals and intervals with per-end closedness.
//!
//! Everything downstream (λ-values, good intervals, gaps, certificates) is
//! expressed in these two types, so there is no floating point anywhere.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use malachite_base::num::arithmetic::traits::{Ceiling, Floor, IsPowerOf2};
use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::logic::traits::SignificantBits;
use malachite_q::Rational as Q;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use malachite_nz::integer::Integer as Int;
pub use malachite_nz::natural::Natural as Nat;

/// Arbitrary-precision rational kept in lowest terms with a positive
/// denominator. Structural equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Q);

/// `floor(x · 2^SCALE)` separates most pairs with huge denominators using a
/// short-quotient division instead of a full cross-multiplication.
const SCALE: u64 = 128;

fn scaled_floor(x: &Q) -> Nat {
    (x.numerator_ref() << SCALE) / x.denominator_ref()
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        if a.denominator_ref() == b.denominator_ref() {
            return a.cmp(b);
        }
        let big = a.denominator_ref().significant_bits().max(b.denominator_ref().significant_bits()) > 512;
        if big && *a > Q::ZERO && *b > Q::ZERO {
            match scaled_floor(a).cmp(&scaled_floor(b)) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        a.cmp(b)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Rational {
    pub fn new(num: impl Into<Int>, den: impl Into<Int>) -> Result<Self> {
        let den = den.into();
        if den == Int::ZERO {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(Q::from_integers(num.into(), den)))
    }

    pub fn from_integer(n: impl Into<Int>) -> Self {
        Rational(Q::from(n.into()))
    }

    pub fn from_parts(num: Int, den: Nat) -> Result<Self> {
        if den == Nat::ZERO {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(Q::from_integers(num, Int::from(den))))
    }

    pub fn zero() -> Self {
        Rational(Q::ZERO)
    }

    pub fn one() -> Self {
        Rational(Q::ONE)
    }

    /// `i / 2^e`.
    pub fn dyadic(i: impl Into<Int>, e: usize) -> Self {
        Rational(Q::from(i.into()) >> e as u64)
    }

    pub fn numer(&self) -> Int {
        let n = Int::from(self.0.numerator_ref().clone());
        if self.is_negative() {
            -n
        } else {
            n
        }
    }

    pub fn denom(&self) -> &Nat {
        self.0.denominator_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == Q::ZERO
    }

    pub fn is_negative(&self) -> bool {
        self.0 < Q::ZERO
    }

    /// Returns `(i, e)` with `self = i / 2^e` in lowest terms when the
    /// denominator is a power of two.
    pub fn is_dyadic(&self) -> Option<(Int, usize)> {
        let den = self.denom();
        if !den.is_power_of_2() {
            return None;
        }
        let e = den.significant_bits() as usize - 1;
        Some((self.numer(), e))
    }

    /// `floor(self * 2^e)`.
    pub fn floor_scaled(&self, e: usize) -> Int {
        (&self.0 << e as u64).floor()
    }

    /// `ceil(self * 2^e)`.
    pub fn ceil_scaled(&self, e: usize) -> Int {
        (&self.0 << e as u64).ceiling()
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Rational> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &other.0))
    }

    pub fn halve(&self) -> Rational {
        Rational(&self.0 >> 1u64)
    }

    pub fn midpoint(&self, other: &Rational) -> Rational {
        (self + other).halve()
    }
}

pub fn rat_compare(a: &Rational, b: &Rational) -> Ordering {
    a.cmp(b)
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"p/q"` or a bare integer `"p"`. Non-canonical input such as
    /// `"2/4"` is reduced.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid rational {s:?}"));
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        if num.is_empty() || den.is_empty() || den.starts_with('-') || den.starts_with('+') {
            return Err(bad());
        }
        let num = Int::from_str(num).map_err(|_| bad())?;
        let den = Nat::from_str(den).map_err(|_| bad())?;
        Rational::from_parts(num, den)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

impl Div<&Rational> for &Rational {
    type Output = Rational;

    /// Panics on division by zero; use [`Rational::checked_div`] otherwise.
    fn div(self, rhs: &Rational) -> Rational {
        self.checked_div(rhs).expect("division by zero")
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

/// A nonempty interval of rationals. `lo == hi` is only allowed when both
/// ends are closed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        match lo.cmp(&hi) {
            Ordering::Less => {}
            Ordering::Equal if lo_closed && hi_closed => {}
            _ => {
                return Err(Error::EmptyInterval(format!(
                    "{}{lo},{hi}{}",
                    if lo_closed { '[' } else { '(' },
                    if hi_closed { ']' } else { ')' }
                )))
            }
        }
        Ok(Interval { lo, hi, lo_closed, hi_closed })
    }

    pub fn open(lo: Rational, hi: Rational) -> Result<Self> {
        Interval::new(lo, hi, false, false)
    }

    pub fn closed(lo: Rational, hi: Rational) -> Result<Self> {
        Interval::new(lo, hi, true, true)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_open(&self) -> bool {
        !self.lo_closed && !self.hi_closed
    }

    pub fn is_closed(&self) -> bool {
        self.lo_closed && self.hi_closed
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = match self.lo.cmp(x) {
            Ordering::Less => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Greater => false,
        };
        let below = match x.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    /// `self ⊆ other`, decided on endpoints alone.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        let lo_ok = match other.lo.cmp(&self.lo) {
            Ordering::Less => true,
            Ordering::Equal => other.lo_closed || !self.lo_closed,
            Ordering::Greater => false,
        };
        let hi_ok = match self.hi.cmp(&other.hi) {
            Ordering::Less => true,
            Ordering::Equal => other.hi_closed || !self.hi_closed,
            Ordering::Greater => false,
        };
        lo_ok && hi_ok
    }

    /// Splits an open interval into `pieces` open intervals of equal length,
    /// in increasing order.
    pub fn equal_partition(&self, pieces: usize) -> Result<Vec<Interval>> {
        if !self.is_open() {
            return Err(Error::Precondition(format!("equal_partition needs an open interval, got {self}")));
        }
        if pieces == 0 {
            return Err(Error::Precondition("equal_partition needs at least one piece".into()));
        }
        let width = self.length().checked_div(&Rational::from(pieces as i64))?;
        let mut out = Vec::with_capacity(pieces);
        let mut left = self.lo.clone();
        for m in 0..pieces {
            let right = if m + 1 == pieces { self.hi.clone() } else { &left + &width };
            out.push(Interval::open(left, right.clone())?);
            left = right;
        }
        Ok(out)
    }

    /// Intersection of two intervals, `None` when empty.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Interval::new(lo, hi, lo_closed, hi_closed).ok()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid interval {s:?}"));
        let lo_closed = match s.chars().next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(bad()),
        };
        let hi_closed = match s.chars().last() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(bad()),
        };
        let inner = &s[1..s.len() - 1];
        let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
        Interval::new(lo.parse()?, hi.parse()?, lo_closed, hi_closed)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand used heavily in tests: `rat("3/8")`.
pub fn rat(s: &str) -> Rational {
    s.parse().unwrap_or_else(|e| panic!("bad rational literal {s:?}: {e}"))
}

/// Shorthand used heavily in tests: `interval("(1/4,1/2]")`.
pub fn interval(s: &str) -> Interval {
    s.parse().unwrap_or_else(|e| panic!("bad interval literal {s:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use malachite_base::num::arithmetic::traits::{Gcd, UnsignedAbs};
    use proptest::prelude::*;

    #[test]
    fn compare_examples() {
        assert_eq!(rat_compare(&rat("1/3"), &rat("1/2")), Ordering::Less);
        assert_eq!(rat_compare(&rat("2/4"), &rat("1/2")), Ordering::Equal);
        assert_eq!(rat_compare(&rat("0"), &rat("-1/8")), Ordering::Greater);
    }

    #[test]
    fn canonical_text() {
        assert_eq!(rat("6/16").to_string(), "3/8");
        assert_eq!(rat("-2/4").to_string(), "-1/2");
        assert_eq!(Rational::zero().to_string(), "0/1");
        assert_eq!(Rational::new(3, -6).unwrap().to_string(), "-1/2");
        assert!(Rational::new(1, 0).is_err());
        assert!("1/-2".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn contains_examples() {
        assert!(interval("[1/4,1/2]").contains(&rat("1/4")));
        assert!(!interval("(1/4,1/2)").contains(&rat("1/4")));
        assert!(interval("(0,1)").contains(&rat("2/3")));
    }

    #[test]
    fn subset_examples() {
        assert!(interval("[3/16,1/4]").is_subset_of(&interval("(1/8,1/2)")));
        assert!(!interval("[1/4,1/2]").is_subset_of(&interval("(1/4,1)")));
        let i = interval("(1/3,2/3]");
        assert!(i.is_subset_of(&i));
        assert!(interval("[1/2,1/2]").is_subset_of(&interval("[1/2,1)")));
        assert!(!interval("[1/2,1/2]").is_subset_of(&interval("(1/2,1)")));
    }

    #[test]
    fn partition_examples() {
        let parts = interval("(0,1/2)").equal_partition(2).unwrap();
        assert_eq!(parts, vec![interval("(0,1/4)"), interval("(1/4,1/2)")]);
        assert_eq!(interval("(0,1)").equal_partition(1).unwrap(), vec![interval("(0,1)")]);
        let parts = interval("(1/3,2/3)").equal_partition(3).unwrap();
        assert_eq!(
            parts,
            vec![interval("(1/3,4/9)"), interval("(4/9,5/9)"), interval("(5/9,2/3)")]
        );
        assert!(interval("[0,1)").equal_partition(2).is_err());
        assert!(interval("(0,1)").equal_partition(0).is_err());
    }

    #[test]
    fn dyadic_examples() {
        assert_eq!(rat("3/8").is_dyadic(), Some((Int::from(3), 3)));
        assert_eq!(rat("1/3").is_dyadic(), None);
        assert_eq!(Rational::zero().is_dyadic(), Some((Int::ZERO, 0)));
    }

    #[test]
    fn empty_intervals_are_unrepresentable() {
        assert!(Interval::open(rat("1/2"), rat("1/2")).is_err());
        assert!(Interval::new(rat("1/2"), rat("1/2"), true, false).is_err());
        assert!(Interval::closed(rat("1/2"), rat("1/4")).is_err());
        assert!(Interval::closed(rat("1/2"), rat("1/2")).is_ok());
    }

    #[test]
    fn interval_text_round_trip() {
        for s in ["[1/4,1/2]", "(0/1,1/1)", "[-1/2,3/8)", "(1/3,2/3]"] {
            let i = interval(s);
            assert_eq!(interval(&i.to_string()), i);
        }
        assert!("[1/2,1/4]".parse::<Interval>().is_err());
        assert!("{0,1}".parse::<Interval>().is_err());
    }

    #[test]
    fn floor_and_ceil_scaled() {
        assert_eq!(rat("2/3").floor_scaled(3), Int::from(5));
        assert_eq!(rat("2/3").ceil_scaled(3), Int::from(6));
        assert_eq!(rat("1/2").floor_scaled(1), Int::from(1));
        assert_eq!(rat("-1/3").floor_scaled(0), Int::from(-1));
    }

    fn small_rational() -> impl Strategy<Value = (i64, i64)> {
        (-200i64..200, 1i64..200)
    }

    proptest! {
        #[test]
        fn construction_is_scale_invariant((p, q) in small_rational(), k in 1i64..50) {
            let a = Rational::new(p, q).unwrap();
            let b = Rational::new(p * k, q * k).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.to_string(), b.to_string());
            let g = a.numer().unsigned_abs().gcd(a.denom());
            prop_assert!(a.is_zero() || g == Nat::ONE);
        }

        #[test]
        fn partition_tiles_the_interval((p, q) in small_rational(), w in 1i64..40, j in 1usize..12) {
            let lo = Rational::new(p, q).unwrap();
            let hi = &lo + &Rational::new(w, 7).unwrap();
            let i = Interval::open(lo.clone(), hi.clone()).unwrap();
            let parts = i.equal_partition(j).unwrap();
            prop_assert_eq!(parts.len(), j);
            prop_assert_eq!(parts[0].lo(), &lo);
            prop_assert_eq!(parts[j - 1].hi(), &hi);
            let width = parts[0].length();
            for pair in parts.windows(2) {
                prop_assert_eq!(pair[0].hi(), pair[1].lo());
                prop_assert_eq!(pair[1].length(), width.clone());
            }
        }
    }
}
