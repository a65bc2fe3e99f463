//! The Cantor–Lebesgue map `λ(x) = Σ x(n)/2^{n+1}` and good-at-n intervals.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use bitvec::prelude::*;
use malachite_base::num::basic::traits::One;
use malachite_base::num::logic::traits::BitAccess;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{Int, Interval, Nat, Rational};
use crate::setalg::{Bits, UPSet};

/// The bits as an unsigned integer, first bit most significant.
fn bits_value(b: &BitSlice<u64, Lsb0>) -> Nat {
    let mut v = b.to_bitvec();
    v.force_align();
    v.set_uninitialized(false);
    let limbs: Vec<u64> = v.as_raw_slice().iter().rev().map(|w| w.reverse_bits()).collect();
    Nat::from_owned_limbs_asc(limbs) >> (64 * v.as_raw_slice().len() - b.len()) as u64
}

pub fn lambda_value(y: &UPSet) -> Rational {
    let p = y.prefix_len();
    let q = y.period_len();
    let a = bits_value(y.prefix());
    let per = bits_value(y.period());
    let m = (Nat::ONE << q) - Nat::ONE;
    let num = a * &m + per;
    let den = m << p;
    Rational::from_parts(Int::from(num), den).expect("denominator is positive")
}

/// `[(2i+1)/2^{n+1}, (2i+2)/2^{n+1}]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoodInterval {
    pub level: usize,
    pub index: Nat,
}

impl GoodInterval {
    pub fn new(level: usize, index: impl Into<Nat>) -> Result<Self> {
        let g = GoodInterval { level, index: index.into() };
        if g.index >= (Nat::ONE << level) {
            return Err(Error::IndexOutOfRange(format!("{g}: index must be below 2^{level}")));
        }
        Ok(g)
    }

    pub fn lo(&self) -> Rational {
        Rational::dyadic(Int::from(&self.index << 1u64) + Int::ONE, self.level + 1)
    }

    pub fn hi(&self) -> Rational {
        Rational::dyadic(Int::from(&self.index << 1u64) + Int::from(2u8), self.level + 1)
    }

    pub fn interval(&self) -> Interval {
        Interval::closed(self.lo(), self.hi()).expect("good intervals are nonempty")
    }
}

pub fn good_interval(g: &GoodInterval) -> Result<Interval> {
    GoodInterval::new(g.level, g.index.clone()).map(|g| g.interval())
}

impl fmt::Display for GoodInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "good({},{})", self.level, self.index)
    }
}

impl fmt::Debug for GoodInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for GoodInterval {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid good interval {s:?}"));
        let inner = s.trim().strip_prefix("good(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (n, i) = inner.split_once(',').ok_or_else(bad)?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        let i = Nat::from_str(i.trim()).map_err(|_| bad())?;
        GoodInterval::new(n, i)
    }
}

impl Serialize for GoodInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GoodInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The image of the cylinder `[x(n) = 1]`, in increasing order.
pub fn cylinder_image(n: usize) -> Vec<GoodInterval> {
    assert!(n < 64, "cylinder_image enumerates 2^n intervals");
    (0..1u64 << n).map(|i| GoodInterval { level: n, index: Nat::from(i) }).collect()
}

/// The topmost good interval at level `l`, `[1 - 2^{-(l+1)}, 1]`.
pub fn last_good(l: usize) -> GoodInterval {
    GoodInterval { level: l, index: (Nat::ONE << l) - Nat::ONE }
}

fn check_unit_nondyadic(x: &Rational) -> Result<()> {
    if *x <= Rational::zero() || *x >= Rational::one() {
        return Err(Error::Precondition(format!("{x} is not in (0,1)")));
    }
    if x.is_dyadic().is_some() {
        return Err(Error::Precondition(format!("{x} is dyadic")));
    }
    Ok(())
}

/// Index of the good-at-n interval holding `x`, if any.
pub fn locate(x: &Rational, n: usize) -> Result<Option<Nat>> {
    check_unit_nondyadic(x)?;
    let m = x.floor_scaled(n + 1);
    let m = Nat::try_from(m).expect("x is positive");
    if m.get_bit(0) {
        Ok(Some(m >> 1u64))
    } else {
        Ok(None)
    }
}

/// Least-index good-at-n interval contained in the open interval `i`.
/// Cuts `(0,1)` into `2^{n+1}` pieces; since `i` is longer than three of them
/// it covers two consecutive pieces entirely, one of which is good.
pub fn find_good_within(i: &Interval, n: usize) -> Result<GoodInterval> {
    if !i.is_open() {
        return Err(Error::Precondition(format!("{i} is not open")));
    }
    if *i.lo() < Rational::zero() || *i.hi() > Rational::one() {
        return Err(Error::Precondition(format!("{i} is not inside (0,1)")));
    }
    let three = Rational::dyadic(3, n + 1);
    if three >= i.length() {
        return Err(Error::Precondition(format!(
            "3/2^{} < length fails: length of {i} is {}",
            n + 1,
            i.length()
        )));
    }
    let lo = i.lo().floor_scaled(n + 1) + Int::ONE;
    let hi = i.hi().ceil_scaled(n + 1) - Int::ONE;
    let lo = Nat::try_from(lo).expect("nonnegative");
    let m = if lo.get_bit(0) { lo } else { lo + Nat::ONE };
    debug_assert!(&m + Nat::ONE <= hi);
    Ok(GoodInterval { level: n, index: m >> 1u64 })
}

/// Binary expansions of `x ∈ [0,1]`: two for dyadic points of `(0,1)`,
/// otherwise one.
pub fn preimage(x: &Rational) -> Result<Vec<UPSet>> {
    if *x < Rational::zero() || *x > Rational::one() {
        return Err(Error::Precondition(format!("{x} is not in [0,1]")));
    }
    if x.is_zero() {
        return Ok(vec![UPSet::empty()]);
    }
    if *x == Rational::one() {
        return Ok(vec![UPSet::full()]);
    }
    if let Some((i, e)) = x.is_dyadic() {
        let i = Nat::try_from(i).expect("positive");
        let bits_of = |v: &Nat| -> Bits { (0..e).map(|k| v.get_bit((e - 1 - k) as u64)).collect() };
        let upper = UPSet::new(bits_of(&i), bits![u64, Lsb0; 0].to_bitvec())?;
        let lower = UPSet::new(bits_of(&(&i - Nat::ONE)), bits![u64, Lsb0; 1].to_bitvec())?;
        return Ok(vec![upper, lower]);
    }
    // long division, remembering where each remainder first appeared
    let den = x.denom().clone();
    let mut r = Nat::try_from(x.numer().clone()).expect("positive");
    let mut seen: HashMap<Nat, usize> = HashMap::new();
    let mut digits = Bits::new();
    loop {
        if let Some(&start) = seen.get(&r) {
            let prefix = digits[..start].to_bitvec();
            let period = digits[start..].to_bitvec();
            return Ok(vec![UPSet::new(prefix, period)?]);
        }
        seen.insert(r.clone(), digits.len());
        r <<= 1u64;
        if r >= den {
            digits.push(true);
            r -= &den;
        } else {
            digits.push(false);
        }
    }
}
