//! Ultimately periodic subsets of ω and finite towers built from them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use bitvec::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Bits = BitVec<u64, Lsb0>;

/// Parses a string over `{0,1}`; `ε` and the empty string are the empty word.
pub fn parse_bits(s: &str) -> Result<Bits> {
    let s = s.trim();
    let mut out = Bits::with_capacity(s.len());
    if s == "ε" {
        return Ok(out);
    }
    for c in s.chars() {
        match c {
            '0' => out.push(false),
            '1' => out.push(true),
            _ => return Err(Error::Parse(format!("invalid bit {c:?} in {s:?}"))),
        }
    }
    Ok(out)
}

pub fn bits_to_string(b: &BitSlice<u64, Lsb0>) -> String {
    b.iter().map(|x| if *x { '1' } else { '0' }).collect()
}

/// The low `len` bits of `v`, most significant first.
pub fn bits_of_int(v: u64, len: usize) -> Bits {
    (0..len).map(|i| (v >> (len - 1 - i)) & 1 == 1).collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Smallest `d` dividing `len` such that the word is a power of its length-`d`
/// prefix.
fn min_cyclic_period(w: &BitSlice<u64, Lsb0>) -> usize {
    let n = w.len();
    let has_period = |e: usize| w[e..] == w[..n - e];
    let mut d = n;
    let mut m = n;
    let mut f = 2;
    while m > 1 {
        if f * f > m {
            f = m;
        }
        if m.is_multiple_of(f) {
            while m.is_multiple_of(f) {
                m /= f;
            }
            while d.is_multiple_of(f) && has_period(d / f) {
                d /= f;
            }
        }
        f += 1;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CardinalityClass {
    Empty,
    Finite,
    InfiniteCoinfinite,
    Cofinite,
    Full,
}

/// `{n : bit(n) = 1}` where `bit(n) = prefix[n]` below `|prefix|` and the
/// period repeats afterwards. Always canonical.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UPSet {
    prefix: Bits,
    period: Bits,
}

impl UPSet {
    pub fn new(prefix: Bits, period: Bits) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Parse("period must be nonempty".into()));
        }
        Ok(Self::canonical(prefix, period))
    }

    fn canonical(mut prefix: Bits, mut period: Bits) -> Self {
        prefix.force_align();
        period.force_align();
        let d = min_cyclic_period(&period);
        period.truncate(d);
        let p = prefix.len();
        let strip = (0..p).take_while(|&j| prefix[p - 1 - j] == period[(d - 1) - j % d]).count();
        prefix.truncate(p - strip);
        let r = strip % d;
        if r != 0 {
            let mut rot = Bits::with_capacity(d);
            rot.extend_from_bitslice(&period[d - r..]);
            rot.extend_from_bitslice(&period[..d - r]);
            period = rot;
        }
        UPSet { prefix, period }
    }

    /// Builds the set whose bit `i` is `f(i)`, using `p` prefix bits and a
    /// period of length `q` starting at `p`.
    pub fn from_fn(p: usize, q: usize, f: impl Fn(usize) -> bool) -> Self {
        assert!(q > 0, "period must be nonempty");
        let prefix: Bits = (0..p).map(&f).collect();
        let period: Bits = (p..p + q).map(&f).collect();
        Self::canonical(prefix, period)
    }

    pub fn empty() -> Self {
        UPSet { prefix: Bits::new(), period: bits![u64, Lsb0; 0].to_bitvec() }
    }

    pub fn full() -> Self {
        UPSet { prefix: Bits::new(), period: bits![u64, Lsb0; 1].to_bitvec() }
    }

    pub fn finite(elems: &[usize]) -> Self {
        let p = elems.iter().max().map_or(0, |m| m + 1);
        Self::from_fn(p, 1, |i| elems.contains(&i))
    }

    /// `{n : n ≡ r mod m}`.
    pub fn residue(r: usize, m: usize) -> Self {
        Self::from_fn(0, m, |i| i % m == r % m)
    }

    pub fn prefix(&self) -> &BitSlice<u64, Lsb0> {
        &self.prefix
    }

    pub fn period(&self) -> &BitSlice<u64, Lsb0> {
        &self.period
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        let p = self.prefix.len();
        if i < p {
            self.prefix[i]
        } else {
            self.period[(i - p) % self.period.len()]
        }
    }

    pub fn member(&self, n: u64) -> bool {
        let p = self.prefix.len() as u64;
        if n < p {
            self.prefix[n as usize]
        } else {
            self.period[((n - p) % self.period.len() as u64) as usize]
        }
    }

    /// The first `n` bits, most significant first, as an integer.
    pub fn prefix_index(&self, n: usize) -> u64 {
        assert!(n <= 64);
        (0..n).fold(0u64, |acc, i| (acc << 1) | self.bit(i) as u64)
    }

    /// Elements strictly below `n`.
    pub fn elements_below(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| self.bit(i)).collect()
    }

    pub fn complement(&self) -> Self {
        UPSet { prefix: !self.prefix.clone(), period: !self.period.clone() }
    }

    /// Bits `start..start+len`, copied a period chunk at a time.
    fn window(&self, start: usize, len: usize) -> Bits {
        let mut out = Bits::with_capacity(len);
        let p = self.prefix.len();
        let q = self.period.len();
        let mut i = start;
        let end = start + len;
        if i < p {
            let stop = p.min(end);
            out.extend_from_bitslice(&self.prefix[i..stop]);
            i = stop;
        }
        while i < end {
            let off = (i - p) % q;
            let take = (q - off).min(end - i);
            out.extend_from_bitslice(&self.period[off..off + take]);
            i += take;
        }
        out
    }

    fn combine(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Self {
        let p = self.prefix.len().max(other.prefix.len());
        let q = lcm(self.period.len(), other.period.len());
        let zip = |x: Bits, y: Bits| -> Bits {
            let mut x = x;
            x.set_uninitialized(false);
            let mut y = y;
            y.set_uninitialized(false);
            for (a, b) in x.as_raw_mut_slice().iter_mut().zip(y.as_raw_slice()) {
                *a = op(*a, *b);
            }
            x
        };
        let prefix = zip(self.window(0, p), other.window(0, p));
        let period = zip(self.window(p, q), other.window(p, q));
        Self::canonical(prefix, period)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a & !b)
    }

    pub fn is_finite(&self) -> bool {
        self.period.not_any()
    }

    pub fn is_cofinite(&self) -> bool {
        self.period.all()
    }

    pub fn is_infinite_coinfinite(&self) -> bool {
        !self.is_finite() && !self.is_cofinite()
    }

    /// Constant tails correspond to dyadic λ-values.
    pub fn is_eventually_constant(&self) -> bool {
        self.period.len() == 1
    }

    pub fn cardinality_class(&self) -> CardinalityClass {
        if self.is_finite() {
            if self.prefix.not_any() {
                CardinalityClass::Empty
            } else {
                CardinalityClass::Finite
            }
        } else if self.is_cofinite() {
            if self.prefix.all() {
                CardinalityClass::Full
            } else {
                CardinalityClass::Cofinite
            }
        } else {
            CardinalityClass::InfiniteCoinfinite
        }
    }

    /// For a finite set, one more than its largest element (0 when empty).
    fn finite_bound(&self) -> Option<u64> {
        // canonical finite sets end their prefix with a 1
        self.is_finite().then(|| self.prefix.len() as u64)
    }

    /// Least `k` with `self ∖ k ⊆ other`, if any.
    pub fn almost_subset(&self, other: &Self) -> Option<u64> {
        self.difference(other).finite_bound()
    }

    /// Least `k` with `self ∩ other ⊆ k`, if any.
    pub fn almost_disjoint(&self, other: &Self) -> Option<u64> {
        self.intersect(other).finite_bound()
    }

    /// Lexicographic order of characteristic sequences, bit 0 most
    /// significant. Agrees with the order of λ-values on sets that are not
    /// eventually constant.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let mut i = 0usize;
        loop {
            let (a, b) = (self.bit(i), other.bit(i));
            if a != b {
                return a.cmp(&b);
            }
            i += 1;
        }
    }

    pub fn ones_in_period(&self) -> usize {
        self.period.count_ones()
    }
}

impl fmt::Display for UPSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", bits_to_string(&self.prefix), bits_to_string(&self.period))
    }
}

impl fmt::Debug for UPSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for UPSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (pre, per) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("expected prefix|period, got {s:?}")))?;
        UPSet::new(parse_bits(pre)?, parse_bits(per)?)
    }
}

impl Serialize for UPSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for UPSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Finite truncation of a tower. Level 0 is the base set `X`; every later
/// level is a periodic thinning of the one before it.
#[derive(Clone, Debug)]
pub struct Tower {
    levels: Vec<UPSet>,
    /// `bounds[β]` is the least `k` with `X_β ∖ k ⊆ X_{β-1}`; `bounds[0] = 0`.
    bounds: Vec<u64>,
    /// Requested complement prefix for each minted level.
    requests: Vec<Option<Bits>>,
    capacity: usize,
}

impl Tower {
    pub fn from_base(x: UPSet, capacity: usize) -> Result<Self> {
        if !x.is_infinite_coinfinite() {
            return Err(Error::Tower("X must be infinite-coinfinite".into()));
        }
        Ok(Tower { levels: vec![x], bounds: vec![0], requests: vec![None], capacity })
    }

    /// Tower whose level `α ≥ 1` has a complement starting with `prefixes[α-1]`.
    pub fn generate(x: UPSet, prefixes: &[Bits], capacity: usize) -> Result<Self> {
        let mut t = Tower::from_base(x, capacity.max(prefixes.len() + 1))?;
        for w in prefixes {
            t.mint_below(w)?;
        }
        Ok(t)
    }

    /// Takes explicit levels, `levels[0]` being `X`, and checks that each is
    /// infinite-coinfinite and almost contained in the one before. Strict
    /// decrease is only enforced for minted levels.
    pub fn from_levels(levels: Vec<UPSet>, capacity: usize) -> Result<Self> {
        let mut it = levels.into_iter();
        let x = it.next().ok_or_else(|| Error::Tower("a tower needs at least one level".into()))?;
        let mut t = Tower::from_base(x, capacity)?;
        for (beta, lvl) in it.enumerate().map(|(i, l)| (i + 1, l)) {
            let prev = &t.levels[beta - 1];
            if !lvl.is_infinite_coinfinite() {
                return Err(Error::Tower(format!("level {beta} must be infinite-coinfinite")));
            }
            let bound = lvl
                .almost_subset(prev)
                .ok_or_else(|| Error::Tower(format!("level {beta} is not almost contained in level {}", beta - 1)))?;
            t.levels.push(lvl);
            t.bounds.push(bound);
            t.requests.push(None);
        }
        t.capacity = t.capacity.max(t.levels.len());
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn base(&self) -> &UPSet {
        &self.levels[0]
    }

    pub fn level(&self, alpha: usize) -> &UPSet {
        &self.levels[alpha]
    }

    pub fn levels(&self) -> &[UPSet] {
        &self.levels
    }

    pub fn bound(&self, beta: usize) -> u64 {
        self.bounds[beta]
    }

    pub fn request(&self, alpha: usize) -> Option<&Bits> {
        self.requests[alpha].as_ref()
    }

    /// Drops every level from `len` on.
    pub fn truncate(&mut self, len: usize) {
        let len = len.max(1);
        self.levels.truncate(len);
        self.bounds.truncate(len);
        self.requests.truncate(len);
    }

    /// Truncates and restores an earlier capacity.
    pub fn rewind(&mut self, len: usize, capacity: usize) {
        self.truncate(len);
        self.capacity = capacity;
    }

    /// Appends a level whose complement extends `w`. The new tail is the
    /// bottom level's tail with the last element of every block removed.
    /// A block holds at least twice as many elements as there are levels
    /// left before `capacity`, so thinning never unrolls inside a block;
    /// when capacity runs out it doubles and the block is unrolled two- or
    /// threefold. Within one block the period is linear in the capacity.
    pub fn mint_below(&mut self, w: &Bits) -> Result<usize> {
        let bottom = self.levels.last().expect("towers are nonempty");
        let c = bottom.ones_in_period();
        if self.capacity <= self.levels.len() {
            self.capacity = self.levels.len() + self.capacity.max(2);
        }
        let want = 2 * (self.capacity - self.levels.len());
        let unroll = if c >= want { 1 } else { want.div_ceil(c) };
        let start = w.len().max(bottom.prefix_len());
        let q = bottom.period_len() * unroll;
        let mut window = bottom.window(start, q);
        let last = window.last_one().expect("bottom level is infinite");
        window.set(last, false);
        if window.not_any() {
            return Err(Error::Tower(format!(
                "thinning below level {} would leave a finite set",
                self.levels.len() - 1
            )));
        }
        let prefix: Bits = (0..start).map(|i| if i < w.len() { !w[i] } else { bottom.bit(i) }).collect();
        let lvl = UPSet::new(prefix, window)?;
        // past `start` the new level is inside the bottom one
        let bound = (0..start).rev().find(|&i| lvl.bit(i) && !bottom.bit(i)).map_or(0, |i| i as u64 + 1);
        self.levels.push(lvl);
        self.bounds.push(bound);
        self.requests.push(Some(w.clone()));
        Ok(self.levels.len() - 1)
    }

    /// Re-derives every invariant: levels infinite-coinfinite, each almost
    /// below its predecessor with the recorded least bound, minted levels
    /// strictly so and with complements extending their requested prefix.
    pub fn validate(&self) -> Result<()> {
        for (beta, lvl) in self.levels.iter().enumerate() {
            if !lvl.is_infinite_coinfinite() {
                return Err(Error::Tower(format!("level {beta} is {:?}", lvl.cardinality_class())));
            }
            if beta == 0 {
                continue;
            }
            let prev = &self.levels[beta - 1];
            match lvl.almost_subset(prev) {
                Some(k) if k == self.bounds[beta] => {}
                Some(k) => {
                    return Err(Error::Tower(format!(
                        "level {beta}: recorded bound {} but least bound is {k}",
                        self.bounds[beta]
                    )))
                }
                None => return Err(Error::Tower(format!("level {beta} is not almost below level {}", beta - 1))),
            }
            if self.requests[beta].is_some() && prev.difference(lvl).is_finite() {
                return Err(Error::Tower(format!("level {beta} is not strictly below level {}", beta - 1)));
            }
            if let Some(w) = &self.requests[beta] {
                let comp_ok = w.iter().enumerate().all(|(i, b)| lvl.bit(i) != *b);
                if !comp_ok {
                    return Err(Error::Tower(format!("level {beta} complement does not extend its prefix")));
                }
            }
        }
        Ok(())
    }
}

/// A set with prefix `w`, tail inside `ω ∖ X` and not already taken.
/// Collisions are resolved by appending the first unused continuation bits.
pub fn b_mint(x: &UPSet, w: &BitSlice<u64, Lsb0>, taken: impl Fn(&UPSet) -> bool) -> Result<UPSet> {
    let co = x.complement();
    if co.is_finite() {
        return Err(Error::Mint("ω ∖ X is finite".into()));
    }
    if !x.is_infinite_coinfinite() {
        return Err(Error::Mint("X must be infinite-coinfinite".into()));
    }
    for extra in 0..32usize {
        for c in 0u64..(1u64 << extra) {
            let head = w.len() + extra;
            let p = head.max(co.prefix_len());
            let y = UPSet::from_fn(p, co.period_len(), |i| {
                if i < w.len() {
                    w[i]
                } else if i < head {
                    (c >> (head - 1 - i)) & 1 == 1
                } else {
                    co.bit(i)
                }
            });
            if !taken(&y) {
                return Ok(y);
            }
        }
    }
    Err(Error::Mint(format!("no fresh continuation of {} within 32 extra bits", bits_to_string(w))))
}
