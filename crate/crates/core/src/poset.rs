//! Finite partial order-isomorphisms between the a-side and b-side point
//! registries, the extension order, and a schedule runner that meets a list
//! of dense sets in turn.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::logic::traits::BitAccess;
use serde::{Deserialize, Serialize};

use crate::cantor::lambda_value;
use crate::error::{Error, Result};
use crate::exactnum::{Int, Interval, Nat, Rational};
use crate::mainlemma::{force_containment, Caps, ContainmentCertificate};
use crate::setalg::{b_mint, Bits, Tower, UPSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BId(pub u32);

impl fmt::Display for AId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

impl fmt::Display for BId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// `set` is the complement of tower level `level`; `value = λ(set)`.
#[derive(Clone, Debug)]
pub struct APoint {
    pub id: AId,
    pub level: usize,
    pub set: UPSet,
    pub value: Rational,
}

#[derive(Clone, Debug)]
pub struct BPoint {
    pub id: BId,
    pub set: UPSet,
    pub value: Rational,
}

#[derive(Clone, Debug, Default)]
pub struct PointRegistry {
    a_side: Vec<APoint>,
    b_side: Vec<BPoint>,
    b_sets: HashSet<UPSet>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    levels: usize,
    capacity: usize,
    a: usize,
    b: usize,
}

impl PointRegistry {
    pub fn a(&self, id: AId) -> &APoint {
        &self.a_side[id.0 as usize]
    }

    pub fn b(&self, id: BId) -> &BPoint {
        &self.b_side[id.0 as usize]
    }

    pub fn get_a(&self, id: AId) -> Result<&APoint> {
        self.a_side.get(id.0 as usize).ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn get_b(&self, id: BId) -> Result<&BPoint> {
        self.b_side.get(id.0 as usize).ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn a_value(&self, id: AId) -> &Rational {
        &self.a(id).value
    }

    pub fn b_value(&self, id: BId) -> &Rational {
        &self.b(id).value
    }

    pub fn a_points(&self) -> &[APoint] {
        &self.a_side
    }

    pub fn b_points(&self) -> &[BPoint] {
        &self.b_side
    }

    pub fn a_len(&self) -> usize {
        self.a_side.len()
    }

    pub fn b_len(&self) -> usize {
        self.b_side.len()
    }

    pub fn contains_b_set(&self, y: &UPSet) -> bool {
        self.b_sets.contains(y)
    }

    fn push_a(&mut self, level: usize, set: UPSet) -> AId {
        let id = AId(self.a_side.len() as u32);
        let value = lambda_value(&set);
        self.a_side.push(APoint { id, level, set, value });
        id
    }

    fn push_b(&mut self, set: UPSet) -> BId {
        let id = BId(self.b_side.len() as u32);
        let value = lambda_value(&set);
        self.b_sets.insert(set.clone());
        self.b_side.push(BPoint { id, set, value });
        id
    }

    fn truncate(&mut self, a: usize, b: usize) {
        self.a_side.truncate(a);
        for p in self.b_side.drain(b..) {
            self.b_sets.remove(&p.set);
        }
    }
}

/// Least-depth dyadic cylinder `[j/2^d, (j+1)/2^d]` strictly inside the open
/// interval `u`, returned as its `d` address bits.
pub fn dyadic_cylinder_within(u: &Interval, max_depth: usize) -> Result<Bits> {
    for d in 0..=max_depth {
        let j = u.lo().floor_scaled(d) + Int::ONE;
        if Rational::dyadic(j.clone() + Int::ONE, d) < *u.hi() {
            let j = Nat::try_from(j).map_err(|_| Error::Mint(format!("{u} reaches below 0")))?;
            return Ok((0..d).map(|k| j.get_bit((d - 1 - k) as u64)).collect());
        }
    }
    Err(Error::Mint(format!("{u} holds no dyadic cylinder of depth ≤ {max_depth}")))
}

const MAX_CYLINDER_DEPTH: usize = 1 << 16;

/// Everything a run mutates: the tower (whose level complements are the
/// a-points) and the registry of minted points.
#[derive(Clone, Debug)]
pub struct Universe {
    pub tower: Tower,
    pub registry: PointRegistry,
}

impl Universe {
    /// Registers every existing tower level as an a-point, id = level.
    pub fn new(tower: Tower) -> Self {
        let mut registry = PointRegistry::default();
        for (alpha, lvl) in tower.levels().iter().enumerate() {
            registry.push_a(alpha, lvl.complement());
        }
        Universe { tower, registry }
    }

    pub fn x(&self) -> &UPSet {
        self.tower.base()
    }

    /// The tower level behind an a-point.
    pub fn level_of(&self, a: AId) -> &UPSet {
        self.tower.level(self.registry.a(a).level)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint { levels: self.tower.len(), capacity: self.tower.capacity(), a: self.registry.a_len(), b: self.registry.b_len() }
    }

    pub fn rollback(&mut self, cp: Checkpoint) {
        self.tower.rewind(cp.levels, cp.capacity);
        self.registry.truncate(cp.a, cp.b);
    }

    /// New a-point whose value lies in the cylinder addressed by `w`.
    pub fn mint_a(&mut self, w: &Bits) -> Result<AId> {
        let alpha = self.tower.mint_below(w)?;
        let set = self.tower.level(alpha).complement();
        Ok(self.registry.push_a(alpha, set))
    }

    pub fn mint_a_within(&mut self, u: &Interval) -> Result<AId> {
        let w = dyadic_cylinder_within(u, MAX_CYLINDER_DEPTH)?;
        self.mint_a(&w)
    }

    /// New a-point just above `lo`: its address copies the expansion `bit`
    /// of `lo` up to some position `j ≥ floor` where that expansion has a 0,
    /// then sets bit `j`. The cylinder lies strictly inside `(lo, hi)`, and
    /// the new level agrees with `lo`'s set below `j`.
    pub fn mint_a_above(&mut self, bit: impl Fn(usize) -> bool, lo: &Rational, hi: &Rational, floor: usize) -> Result<AId> {
        // (2v+1)/2^{j+1} > lo  iff  2v+1 > floor(lo 2^{j+1}), and
        // (2v+2)/2^{j+1} < hi  iff  2v+2 < ceil(hi 2^{j+1})
        let mut scale = 0;
        let (mut lo_k, mut hi_k) = (Int::ZERO, Int::ZERO);
        let mut v = Int::ZERO;
        let mut w = Bits::with_capacity(floor + 8);
        for j in 0..MAX_CYLINDER_DEPTH {
            let b = bit(j);
            if j >= floor && !b {
                if j + 1 > scale {
                    scale = (2 * (j + 1)).max(64);
                    lo_k = lo.floor_scaled(scale);
                    hi_k = hi.ceil_scaled(scale);
                }
                let s = (scale - j - 1) as u64;
                let lo_j = &lo_k >> s;
                let hi_j = (&hi_k + ((Int::ONE << s) - Int::ONE)) >> s;
                let left = (&v << 1u64) + Int::ONE;
                if left > lo_j && left + Int::ONE < hi_j {
                    w.push(true);
                    return self.mint_a(&w);
                }
            }
            v = (v << 1u64) + Int::from(b as u8);
            w.push(b);
        }
        Err(Error::Mint(format!("no cylinder hugging {lo} from above fits below {hi}")))
    }

    pub fn mint_b(&mut self, w: &Bits) -> Result<BId> {
        let reg = &self.registry;
        let y = b_mint(self.tower.base(), w, |y| reg.contains_b_set(y))?;
        Ok(self.registry.push_b(y))
    }

    pub fn mint_b_within(&mut self, u: &Interval) -> Result<BId> {
        let w = dyadic_cylinder_within(u, MAX_CYLINDER_DEPTH)?;
        self.mint_b(&w)
    }

    /// Registers an explicit b-point.
    pub fn add_b(&mut self, y: UPSet) -> Result<BId> {
        if y.is_finite() || y.is_eventually_constant() {
            return Err(Error::Validation(format!("b-point {y} must be infinite and not eventually constant")));
        }
        if y.almost_disjoint(self.x()).is_none() {
            return Err(Error::Validation(format!("b-point {y} is not almost disjoint from X")));
        }
        if self.registry.contains_b_set(&y) {
            return Err(Error::Validation(format!("b-point {y} is registered twice")));
        }
        Ok(self.registry.push_b(y))
    }
}

/// Neighbouring domain points around a value, sentinels included, and the
/// open image gap between their images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gap {
    pub x0: Rational,
    pub x1: Rational,
    pub image: Interval,
    /// Position in the pair list where a new point would be inserted.
    pub slot: usize,
}

/// A finite partial isomorphism, stored as `(a, b)` pairs sorted by a-value.
/// The sentinels `0 ↦ 0` and `1 ↦ 1` are implicit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Condition {
    pairs: Vec<(AId, BId)>,
}

impl Condition {
    pub fn new() -> Self {
        Condition::default()
    }

    /// Sorts the pairs by a-value; does not check monotonicity.
    pub fn from_pairs(mut pairs: Vec<(AId, BId)>, reg: &PointRegistry) -> Result<Self> {
        for &(a, b) in &pairs {
            reg.get_a(a)?;
            reg.get_b(b)?;
        }
        pairs.sort_by(|x, y| reg.a_value(x.0).cmp(reg.a_value(y.0)));
        Ok(Condition { pairs })
    }

    pub fn pairs(&self) -> &[(AId, BId)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = AId> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    fn slot_of(&self, x: &Rational, reg: &PointRegistry) -> std::result::Result<usize, usize> {
        self.pairs.binary_search_by(|&(a, _)| reg.a_value(a).cmp(x))
    }

    fn range_slot_of(&self, y: &Rational, reg: &PointRegistry) -> std::result::Result<usize, usize> {
        self.pairs.binary_search_by(|&(_, b)| reg.b_value(b).cmp(y))
    }

    /// Number of domain points below `x`.
    pub fn slot(&self, x: &Rational, reg: &PointRegistry) -> usize {
        match self.slot_of(x, reg) {
            Ok(i) | Err(i) => i,
        }
    }

    pub fn image(&self, a: AId, reg: &PointRegistry) -> Option<BId> {
        match self.slot_of(reg.a_value(a), reg) {
            Ok(i) if self.pairs[i].0 == a => Some(self.pairs[i].1),
            _ => None,
        }
    }

    pub fn preimage(&self, b: BId, reg: &PointRegistry) -> Option<AId> {
        match self.range_slot_of(reg.b_value(b), reg) {
            Ok(i) if self.pairs[i].1 == b => Some(self.pairs[i].0),
            _ => None,
        }
    }

    pub fn contains_pair(&self, a: AId, b: BId, reg: &PointRegistry) -> bool {
        self.image(a, reg) == Some(b)
    }

    /// Both coordinate sequences strictly increase together.
    pub fn is_partial_iso(&self, reg: &PointRegistry) -> bool {
        if self
            .pairs
            .iter()
            .any(|&(a, b)| reg.get_a(a).is_err() || reg.get_b(b).is_err())
        {
            return false;
        }
        self.pairs.windows(2).all(|w| {
            reg.a_value(w[0].0) < reg.a_value(w[1].0) && reg.b_value(w[0].1) < reg.b_value(w[1].1)
        })
    }

    /// The sub-condition on the given domain ids.
    pub fn restrict(&self, ids: &[AId]) -> Result<Condition> {
        let keep: HashSet<AId> = ids.iter().copied().collect();
        let dom: HashSet<AId> = self.domain().collect();
        if let Some(bad) = keep.iter().find(|a| !dom.contains(a)) {
            return Err(Error::UnknownId(format!("{bad} is not in the domain")));
        }
        Ok(Condition { pairs: self.pairs.iter().copied().filter(|p| keep.contains(&p.0)).collect() })
    }

    /// `self ≤ p`: every pair of `p` is a pair of `self`.
    pub fn extends(&self, p: &Condition) -> bool {
        let mine: HashSet<(AId, BId)> = self.pairs.iter().copied().collect();
        p.pairs.iter().all(|x| mine.contains(x))
    }

    fn gap_at(&self, slot: usize, reg: &PointRegistry) -> Gap {
        let (x0, z0) = match slot.checked_sub(1) {
            Some(i) => (reg.a_value(self.pairs[i].0).clone(), reg.b_value(self.pairs[i].1).clone()),
            None => (Rational::zero(), Rational::zero()),
        };
        let (x1, z1) = match self.pairs.get(slot) {
            Some(&(a, b)) => (reg.a_value(a).clone(), reg.b_value(b).clone()),
            None => (Rational::one(), Rational::one()),
        };
        let image = Interval::open(z0, z1).expect("valid conditions have nonempty gaps");
        Gap { x0, x1, image, slot }
    }

    pub fn gap_of(&self, x: &Rational, reg: &PointRegistry) -> Result<Gap> {
        if *x <= Rational::zero() || *x >= Rational::one() {
            return Err(Error::Precondition(format!("{x} is not in (0,1)")));
        }
        match self.slot_of(x, reg) {
            Ok(_) => Err(Error::Precondition(format!("{x} is already in the domain"))),
            Err(slot) => Ok(self.gap_at(slot, reg)),
        }
    }

    /// Range-side counterpart of `gap_of`: the domain gap is returned in
    /// `image`, the range neighbours in `x0`, `x1`.
    pub fn range_gap_of(&self, y: &Rational, reg: &PointRegistry) -> Result<Gap> {
        if *y <= Rational::zero() || *y >= Rational::one() {
            return Err(Error::Precondition(format!("{y} is not in (0,1)")));
        }
        match self.range_slot_of(y, reg) {
            Ok(_) => Err(Error::Precondition(format!("{y} is already in the range"))),
            Err(slot) => {
                let g = self.gap_at(slot, reg);
                let image = Interval::open(g.x0, g.x1).expect("nonempty");
                Ok(Gap { x0: g.image.lo().clone(), x1: g.image.hi().clone(), image, slot })
            }
        }
    }

    /// Adds `a ↦ b` in place, keeping the pair list sorted and monotone.
    pub fn insert(&mut self, a: AId, b: BId, reg: &PointRegistry) -> Result<()> {
        let x = reg.get_a(a)?.value.clone();
        let y = reg.get_b(b)?.value.clone();
        let gap = self.gap_of(&x, reg)?;
        if !gap.image.contains(&y) {
            return Err(Error::Precondition(format!("{a} ↦ {b} breaks monotonicity")));
        }
        self.pairs.insert(gap.slot, (a, b));
        Ok(())
    }

    /// In-place form of [`dense_map_extend`].
    pub fn map_into(&mut self, x: AId, u: &Interval, uni: &mut Universe) -> Result<BId> {
        let xv = uni.registry.get_a(x)?.value.clone();
        let gap = self.gap_of(&xv, &uni.registry)?;
        if !u.is_open() || !u.is_subset_of(&gap.image) {
            return Err(Error::Precondition(format!("{u} is not an open subinterval of the image gap {}", gap.image)));
        }
        let b = uni.mint_b_within(u)?;
        self.pairs.insert(gap.slot, (x, b));
        Ok(b)
    }

    /// In-place form of [`dense_map_extend_range`].
    pub fn pull_into(&mut self, y: BId, u: &Interval, uni: &mut Universe) -> Result<AId> {
        let yv = uni.registry.get_b(y)?.value.clone();
        let gap = self.range_gap_of(&yv, &uni.registry)?;
        if !u.is_open() || !u.is_subset_of(&gap.image) {
            return Err(Error::Precondition(format!("{u} is not an open subinterval of the domain gap {}", gap.image)));
        }
        let a = uni.mint_a_within(u)?;
        self.pairs.insert(gap.slot, (a, y));
        Ok(a)
    }
}

/// `q = p ∪ {x ↦ b}` with `b` freshly minted in `u`.
pub fn dense_map_extend(p: &Condition, x: AId, u: &Interval, uni: &mut Universe) -> Result<(Condition, BId)> {
    let mut q = p.clone();
    let b = q.map_into(x, u, uni)?;
    Ok((q, b))
}

/// `q = p ∪ {a ↦ y}` with `a` freshly minted in `u`.
pub fn dense_map_extend_range(p: &Condition, y: BId, u: &Interval, uni: &mut Universe) -> Result<(Condition, AId)> {
    let mut q = p.clone();
    let a = q.pull_into(y, u, uni)?;
    Ok((q, a))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    AddDomain { a: AId },
    AddRange { b: BId },
    /// `k` defaults to one more than the previously witnessed level.
    Meet {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
}

pub type Schedule = Vec<Task>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptStep {
    pub step: usize,
    pub task: Task,
    pub added: Vec<(AId, BId)>,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub condition: Condition,
    pub certificates: Vec<ContainmentCertificate>,
    pub transcript: Vec<TranscriptStep>,
}

pub fn run_schedule(schedule: &[Task], uni: &mut Universe, caps: &Caps) -> Result<RunOutcome> {
    let mut q = Condition::new();
    let mut certificates: Vec<ContainmentCertificate> = Vec::new();
    let mut transcript = Vec::new();
    for (step, task) in schedule.iter().enumerate() {
        let before: HashSet<(AId, BId)> = q.pairs().iter().copied().collect();
        let mut cert_idx = None;
        match *task {
            Task::AddDomain { a } => {
                let xv = uni.registry.get_a(a)?.value.clone();
                if q.image(a, &uni.registry).is_none() {
                    let gap = q.gap_of(&xv, &uni.registry)?;
                    q.map_into(a, &gap.image, uni)?;
                }
            }
            Task::AddRange { b } => {
                let yv = uni.registry.get_b(b)?.value.clone();
                if q.preimage(b, &uni.registry).is_none() {
                    let gap = q.range_gap_of(&yv, &uni.registry)?;
                    q.pull_into(b, &gap.image, uni)?;
                }
            }
            Task::Meet { k } => {
                let k = k.unwrap_or_else(|| certificates.last().map_or(0, |c| c.n + 1));
                let (next, cert) = force_containment(&q, k, uni, caps)?;
                q = next;
                cert_idx = Some(certificates.len());
                certificates.push(cert);
            }
        }
        let added = q.pairs().iter().copied().filter(|p| !before.contains(p)).collect();
        transcript.push(TranscriptStep { step, task: task.clone(), added, size: q.len(), certificate: cert_idx });
    }
    Ok(RunOutcome { condition: q, certificates, transcript })
}

/// Replays a transcript and confirms each step only adds pairs.
pub fn transcript_is_monotone(transcript: &[TranscriptStep], last: &Condition) -> bool {
    let mut acc: HashSet<(AId, BId)> = HashSet::new();
    for step in transcript {
        for p in &step.added {
            if !acc.insert(*p) {
                return false;
            }
        }
        if acc.len() != step.size {
            return false;
        }
    }
    acc.len() == last.len() && last.pairs().iter().all(|p| acc.contains(p))
}

/// Orders two a-points; equal to comparing their values.
pub fn cmp_a(reg: &PointRegistry, x: AId, y: AId) -> Ordering {
    reg.a_value(x).cmp(reg.a_value(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{interval, rat};
    use crate::setalg::{bits_to_string, parse_bits};

    fn universe() -> Universe {
        let t = Tower::generate("|10".parse().unwrap(), &[parse_bits("01").unwrap(), parse_bits("1").unwrap()], 1024)
            .unwrap();
        Universe::new(t)
    }

    #[test]
    fn cylinder_search() {
        assert_eq!(bits_to_string(&dyadic_cylinder_within(&interval("(0,1)"), 8).unwrap()), "01");
        assert_eq!(bits_to_string(&dyadic_cylinder_within(&interval("(1/4,1/2)"), 8).unwrap()), "0101");
        assert!(dyadic_cylinder_within(&interval("(1/3,1000001/3000000)"), 4).is_err());
    }

    #[test]
    fn iso_examples() {
        let mut uni = universe();
        assert!(Condition::new().is_partial_iso(&uni.registry));
        let b1 = uni.mint_b_within(&interval("(0,1/2)")).unwrap();
        let b2 = uni.mint_b_within(&interval("(1/2,1)")).unwrap();
        let (lo, hi) = {
            let mut ids = [AId(1), AId(2)];
            ids.sort_by(|x, y| cmp_a(&uni.registry, *x, *y));
            (ids[0], ids[1])
        };
        let good = Condition::from_pairs(vec![(lo, b1), (hi, b2)], &uni.registry).unwrap();
        assert!(good.is_partial_iso(&uni.registry));
        let bad = Condition::from_pairs(vec![(lo, b2), (hi, b1)], &uni.registry).unwrap();
        assert!(!bad.is_partial_iso(&uni.registry));
    }

    #[test]
    fn restrict_and_extends() {
        let mut uni = universe();
        let mut p = Condition::new();
        for a in [AId(0), AId(1), AId(2)] {
            let v = uni.registry.a_value(a).clone();
            let gap = p.gap_of(&v, &uni.registry).unwrap();
            p.map_into(a, &gap.image, &mut uni).unwrap();
        }
        let all: Vec<AId> = p.domain().collect();
        assert_eq!(p.restrict(&all).unwrap(), p);
        assert!(p.restrict(&[]).unwrap().is_empty());
        let two = p.restrict(&all[..2]).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.is_partial_iso(&uni.registry));
        assert!(p.extends(&p) && p.extends(&two) && !two.extends(&p));
        assert!(p.restrict(&[AId(99)]).is_err());

        let mut changed = p.clone();
        changed.pairs[0].1 = BId(changed.pairs[0].1 .0 + 1);
        assert!(!changed.extends(&p));
    }

    #[test]
    fn gap_examples() {
        let uni = universe();
        let g = Condition::new().gap_of(&rat("1/3"), &uni.registry).unwrap();
        assert_eq!((g.x0, g.x1, g.image), (rat("0"), rat("1"), interval("(0,1)")));
    }

    #[test]
    fn dense_map_examples() {
        let mut uni = universe();
        let p = Condition::new();
        let (q, b) = dense_map_extend(&p, AId(1), &interval("(0,1)"), &mut uni).unwrap();
        assert_eq!(q.len(), 1);
        assert!(interval("(0,1)").contains(uni.registry.b_value(b)));
        let v = uni.registry.a_value(AId(2)).clone();
        let gap = q.gap_of(&v, &uni.registry).unwrap();
        let u = gap.image.equal_partition(3).unwrap()[1].clone();
        let (q2, b2) = dense_map_extend(&q, AId(2), &u, &mut uni).unwrap();
        assert!(u.contains(uni.registry.b_value(b2)));
        assert!(q2.extends(&q) && q2.is_partial_iso(&uni.registry));
        let outside = Interval::open(gap.image.hi().clone(), Rational::one()).ok();
        if let Some(outside) = outside {
            assert!(dense_map_extend(&q, AId(2), &outside, &mut uni).is_err());
        }
    }

    #[test]
    fn range_extension() {
        let mut uni = universe();
        let b = uni.mint_b_within(&interval("(1/3,2/3)")).unwrap();
        let (q, a) = dense_map_extend_range(&Condition::new(), b, &interval("(0,1)"), &mut uni).unwrap();
        assert_eq!(q.image(a, &uni.registry), Some(b));
        uni.tower.validate().unwrap();
    }

    #[test]
    fn schedule_examples() {
        let caps = Caps::default();
        let mut uni = universe();
        let out = run_schedule(&[], &mut uni, &caps).unwrap();
        assert!(out.condition.is_empty() && out.certificates.is_empty() && out.transcript.is_empty());

        let out = run_schedule(&[Task::AddDomain { a: AId(1) }], &mut uni, &caps).unwrap();
        assert_eq!(out.condition.domain().collect::<Vec<_>>(), vec![AId(1)]);

        let mut uni = universe();
        let sched = vec![Task::AddDomain { a: AId(1) }, Task::Meet { k: Some(0) }, Task::Meet { k: None }];
        let out = run_schedule(&sched, &mut uni, &caps).unwrap();
        assert_eq!(out.certificates.len(), 2);
        assert!(out.certificates[1].n > out.certificates[0].n);
        assert!(transcript_is_monotone(&out.transcript, &out.condition));
    }

    #[test]
    fn rollback_restores_everything() {
        let mut uni = universe();
        let cp = uni.checkpoint();
        uni.mint_a(&parse_bits("1").unwrap()).unwrap();
        let b = uni.mint_b(&parse_bits("1").unwrap()).unwrap();
        let set = uni.registry.b(b).set.clone();
        uni.rollback(cp);
        assert_eq!(uni.checkpoint(), cp);
        assert!(!uni.registry.contains_b_set(&set));
    }
}
