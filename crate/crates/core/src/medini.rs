//! Medini's homeomorphism forcing: pairs of a finite color-preserving
//! injection and a permutation of `2^n`, the bit-fixing density argument and
//! its cylinder certificates.
//!
//! A bit string `t ∈ 2^n` is indexed by the integer whose most significant
//! bit is `t(0)`, so `t ↾ m` is `t >> (n - m)`.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mainlemma::Verdict;
use crate::poset::{AId, BId, PointRegistry, Universe};
use crate::setalg::{bits_of_int, bits_to_string, parse_bits, UPSet};

/// Largest permutation level a condition may reach.
pub const MAX_MEDINI_LEVEL: usize = 20;

/// Finitely many color classes on each side, indexed by point id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coloring {
    pub classes: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl Coloring {
    /// Point `i` on either side gets class `i mod classes`.
    pub fn round_robin(classes: usize, reg: &PointRegistry) -> Result<Self> {
        if classes == 0 {
            return Err(Error::Validation("coloring needs at least one class".into()));
        }
        Ok(Coloring {
            classes,
            a: (0..reg.a_len()).map(|i| i % classes).collect(),
            b: (0..reg.b_len()).map(|i| i % classes).collect(),
        })
    }

    pub fn a(&self, id: AId) -> Option<usize> {
        self.a.get(id.0 as usize).copied()
    }

    pub fn b(&self, id: BId) -> Option<usize> {
        self.b.get(id.0 as usize).copied()
    }

    pub fn set_b(&mut self, id: BId, class: usize) {
        let i = id.0 as usize;
        if self.b.len() <= i {
            self.b.resize(i + 1, 0);
        }
        self.b[i] = class;
    }
}

/// `(π, f)` with `π` a permutation of `2^level` stored as an image table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediniCondition {
    pub f: Vec<(AId, BId)>,
    pub level: usize,
    #[serde(serialize_with = "ser_perm", deserialize_with = "de_perm")]
    pub pi: Vec<u32>,
}

fn ser_perm<S: Serializer>(pi: &[u32], s: S) -> std::result::Result<S::Ok, S::Error> {
    let n = pi.len().trailing_zeros() as usize;
    s.collect_seq(pi.iter().map(|&v| bits_to_string(&bits_of_int(v as u64, n))))
}

fn de_perm<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<u32>, D::Error> {
    let strings = Vec::<String>::deserialize(d)?;
    let width = strings.first().map_or(0, |s| if s == "ε" { 0 } else { s.len() });
    strings
        .iter()
        .map(|s| {
            let b = parse_bits(s).map_err(serde::de::Error::custom)?;
            if b.len() != width || width > MAX_MEDINI_LEVEL {
                return Err(serde::de::Error::custom(format!("permutation entry {s:?} has the wrong width")));
            }
            Ok(b.iter().fold(0u32, |acc, x| (acc << 1) | *x as u32))
        })
        .collect()
}

/// Bits `[lo, hi)` of `y` as an integer, most significant first.
fn window(y: &UPSet, lo: usize, hi: usize) -> u32 {
    (lo..hi).fold(0u32, |acc, i| (acc << 1) | y.bit(i) as u32)
}

impl MediniCondition {
    /// Empty `f`, identity on `2^0`.
    pub fn minimal() -> Self {
        MediniCondition { f: Vec::new(), level: 0, pi: vec![0] }
    }

    pub fn image(&self, t: u32) -> u32 {
        self.pi[t as usize]
    }

    pub fn contains_a(&self, a: AId) -> bool {
        self.f.iter().any(|&(x, _)| x == a)
    }

    /// Clauses: injective `f`, color preservation, `π` a permutation,
    /// `f(a) ↾ n = π(a ↾ n)`.
    pub fn validate(&self, coloring: &Coloring, reg: &PointRegistry) -> Verdict {
        let mut dom = HashSet::new();
        let mut rng = HashSet::new();
        for &(a, b) in &self.f {
            reg.get_a(a).map_err(|e| format!("clause (1): {e}"))?;
            reg.get_b(b).map_err(|e| format!("clause (1): {e}"))?;
            if !dom.insert(a) || !rng.insert(b) {
                return Err(format!("clause (1): f is not injective at {a} ↦ {b}"));
            }
        }
        for &(a, b) in &self.f {
            match (coloring.a(a), coloring.b(b)) {
                (Some(x), Some(y)) if x == y => {}
                (x, y) => return Err(format!("clause (2): {a} has color {x:?} but {b} has color {y:?}")),
            }
        }
        if self.level > MAX_MEDINI_LEVEL {
            return Err(format!("clause (3): level {} exceeds {MAX_MEDINI_LEVEL}", self.level));
        }
        let size = 1usize << self.level;
        if self.pi.len() != size {
            return Err(format!("clause (3): π has {} entries, expected 2^{}", self.pi.len(), self.level));
        }
        let mut seen = vec![false; size];
        for (t, &v) in self.pi.iter().enumerate() {
            let v = v as usize;
            if v >= size || seen[v] {
                return Err(format!("clause (3): π is not a permutation (image of {t} repeats or overflows)"));
            }
            seen[v] = true;
        }
        for &(a, b) in &self.f {
            let u = window(&reg.a(a).set, 0, self.level);
            let v = window(&reg.b(b).set, 0, self.level);
            if self.image(u) != v {
                return Err(format!("clause (4): f({a}) ↾ {} differs from π({a} ↾ {})", self.level, self.level));
            }
        }
        Ok(())
    }

    /// `self ≤ q`: `f_self ⊇ f_q` and `π_self(t) ↾ n_q = π_q(t ↾ n_q)`.
    pub fn extends(&self, q: &MediniCondition) -> bool {
        if self.level < q.level || !q.f.iter().all(|pair| self.f.contains(pair)) {
            return false;
        }
        let d = self.level - q.level;
        self.pi.iter().enumerate().all(|(t, &v)| (v >> d) == q.pi[t >> d])
    }
}

/// Least `m ≥ from` at which the given sets have pairwise distinct prefixes.
fn separation_level(sets: &[&UPSet], from: usize) -> Result<usize> {
    let mut m = from;
    loop {
        let mut seen = HashSet::new();
        if sets.iter().all(|y| seen.insert(window(y, 0, m))) {
            return Ok(m);
        }
        m += 1;
        if m > MAX_MEDINI_LEVEL {
            return Err(Error::CapExhausted(format!(
                "points are not separated below level {MAX_MEDINI_LEVEL}"
            )));
        }
    }
}

/// Refines `p` to level `m`: in the fiber over `u` the new bits move by a
/// permutation `σ_u` sending each constrained middle `m_a` to `m_{f(a)}`,
/// fixing free middles where possible and filling the rest in increasing
/// order.
fn refine(p: &MediniCondition, m: usize, reg: &PointRegistry) -> Result<Vec<u32>> {
    let d = m - p.level;
    let width = 1u32 << d;
    let mut fibers: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for &(a, b) in &p.f {
        let (ya, yb) = (&reg.a(a).set, &reg.b(b).set);
        fibers
            .entry(window(ya, 0, p.level))
            .or_default()
            .push((window(ya, p.level, m), window(yb, p.level, m)));
    }
    let mut pi = vec![0u32; 1usize << m];
    for u in 0..(1u32 << p.level) {
        let mut sigma: Vec<Option<u32>> = vec![None; width as usize];
        let mut used = vec![false; width as usize];
        for &(from, to) in fibers.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            if sigma[from as usize].is_some_and(|t| t != to) || (used[to as usize] && sigma[from as usize] != Some(to)) {
                return Err(Error::Precondition(format!("fiber {u} has conflicting constraints")));
            }
            sigma[from as usize] = Some(to);
            used[to as usize] = true;
        }
        for t in 0..width as usize {
            if sigma[t].is_none() && !used[t] {
                sigma[t] = Some(t as u32);
                used[t] = true;
            }
        }
        let mut spare = (0..width).filter(|&v| !used[v as usize]);
        let base = p.image(u) << d;
        for (t, s) in sigma.iter().enumerate() {
            let v = s.unwrap_or_else(|| spare.next().expect("counts match"));
            pi[((u << d) | t as u32) as usize] = base | v;
        }
    }
    Ok(pi)
}

fn separate_with(p: &MediniCondition, extra: Option<AId>, reg: &PointRegistry) -> Result<MediniCondition> {
    let mut dom: Vec<&UPSet> = p.f.iter().map(|&(a, _)| &reg.a(a).set).collect();
    if let Some(a) = extra {
        dom.push(&reg.get_a(a)?.set);
    }
    let rng: Vec<&UPSet> = p.f.iter().map(|&(_, b)| &reg.b(b).set).collect();
    let m = separation_level(&dom, p.level)?.max(separation_level(&rng, p.level)?);
    if m == p.level {
        return Ok(p.clone());
    }
    Ok(MediniCondition { f: p.f.clone(), level: m, pi: refine(p, m, reg)? })
}

/// Raises the level until mapped points have distinct prefixes on each side.
pub fn separate(p: &MediniCondition, reg: &PointRegistry) -> Result<MediniCondition> {
    separate_with(p, None, reg)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixCertificate {
    pub n: usize,
    pub level: usize,
}

/// Least `n ∈ X`, `n ≥ max(k, separation level)`, missing from every mapped
/// set; the result preserves bit `n` of every string.
pub fn fix_bit_extend(p: &MediniCondition, k: usize, uni: &Universe) -> Result<(MediniCondition, usize, FixCertificate)> {
    let reg = &uni.registry;
    let sep = separate(p, reg)?;
    let x = uni.x();
    let n = (k.max(sep.level)..MAX_MEDINI_LEVEL)
        .find(|&n| {
            x.bit(n) && sep.f.iter().all(|&(a, b)| !reg.a(a).set.bit(n) && !reg.b(b).set.bit(n))
        })
        .ok_or_else(|| {
            Error::CapExhausted(format!(
                "no n ∈ X with max({k}, {}) ≤ n < {MAX_MEDINI_LEVEL} avoids every mapped point",
                sep.level
            ))
        })?;
    let middle = refine(&sep, n, reg)?;
    let pi: Vec<u32> = (0..1u32 << (n + 1)).map(|t| (middle[(t >> 1) as usize] << 1) | (t & 1)).collect();
    let q = MediniCondition { f: sep.f, level: n + 1, pi };
    let cert = FixCertificate { n, level: q.level };
    Ok((q, n, cert))
}

/// `π_q` keeps bit `n` of every string of length `n_q`.
pub fn check_fix_certificate(q: &MediniCondition, n: usize) -> Result<Verdict> {
    if n >= q.level {
        return Err(Error::Precondition(format!("bit {n} is not below level {}", q.level)));
    }
    let shift = q.level - 1 - n;
    for (t, &v) in q.pi.iter().enumerate() {
        if ((t as u32 >> shift) & 1) != ((v >> shift) & 1) {
            let show = |x: u32| bits_to_string(&bits_of_int(x as u64, q.level));
            return Ok(Err(format!("π maps {} to {} across bit {n}", show(t as u32), show(v))));
        }
    }
    Ok(Ok(()))
}

/// Puts `a` into the domain, mapped to a fresh b-point of the same color
/// whose prefix is `π(a ↾ n)`.
pub fn medini_add_point(
    p: &MediniCondition,
    a: AId,
    coloring: &mut Coloring,
    uni: &mut Universe,
) -> Result<MediniCondition> {
    if p.contains_a(a) {
        return Err(Error::Precondition(format!("{a} is already in the domain")));
    }
    let class = coloring.a(a).ok_or_else(|| Error::UnknownId(format!("{a} has no color")))?;
    let mut q = separate_with(p, Some(a), &uni.registry)?;
    let u = window(&uni.registry.a(a).set, 0, q.level);
    let w = bits_of_int(q.image(u) as u64, q.level);
    let b = uni.mint_b(&w)?;
    coloring.set_b(b, class);
    q.f.push((a, b));
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setalg::Tower;

    fn setup() -> (Universe, Coloring) {
        let x: UPSet = "|10".parse().unwrap();
        let pre: Vec<_> = ["01", "1", "0011", "110"].iter().map(|s| parse_bits(s).unwrap()).collect();
        let uni = Universe::new(Tower::generate(x, &pre, 256).unwrap());
        let c = Coloring::round_robin(2, &uni.registry).unwrap();
        (uni, c)
    }

    #[test]
    fn validate_examples() {
        let (mut uni, mut c) = setup();
        let p = MediniCondition::minimal();
        assert!(p.validate(&c, &uni.registry).is_ok());

        let q = medini_add_point(&p, AId(1), &mut c, &mut uni).unwrap();
        assert!(q.validate(&c, &uni.registry).is_ok());
        let mut bad = q.clone();
        c.set_b(bad.f[0].1, 0);
        assert!(bad.validate(&c, &uni.registry).unwrap_err().contains("clause (2)"));
        c.set_b(bad.f[0].1, 1);
        bad.pi = vec![0; bad.pi.len()];
        if bad.pi.len() > 1 {
            assert!(bad.validate(&c, &uni.registry).unwrap_err().contains("clause (3)"));
        }
    }

    #[test]
    fn extends_examples() {
        let (uni, _) = setup();
        let p = MediniCondition::minimal();
        assert!(p.extends(&p));
        let q = MediniCondition { f: vec![], level: 1, pi: vec![1, 0] };
        assert!(q.extends(&p));
        let r = MediniCondition { f: vec![], level: 2, pi: vec![0, 2, 1, 3] };
        assert!(!r.extends(&q));
        let r = MediniCondition { f: vec![], level: 2, pi: vec![3, 2, 0, 1] };
        assert!(r.extends(&q));
        assert_eq!(separate(&p, &uni.registry).unwrap(), p);
    }

    #[test]
    fn separate_splits_at_first_disagreement() {
        let (mut uni, mut c) = setup();
        let mut p = MediniCondition::minimal();
        for a in [AId(0), AId(2)] {
            p = medini_add_point(&p, a, &mut c, &mut uni).unwrap();
        }
        let (ya, yb) = (&uni.registry.a(AId(0)).set, &uni.registry.a(AId(2)).set);
        let first = (0..).find(|&i| ya.bit(i) != yb.bit(i)).unwrap();
        assert_eq!(p.level, first + 1);
        assert_eq!(separate(&p, &uni.registry).unwrap(), p);
        assert!(p.validate(&c, &uni.registry).is_ok());
        assert!(medini_add_point(&p, AId(0), &mut c, &mut uni).is_err());
    }

    #[test]
    fn fix_bit_examples() {
        let (mut uni, mut c) = setup();
        let p = MediniCondition::minimal();
        let (q, n, cert) = fix_bit_extend(&p, 0, &uni).unwrap();
        assert_eq!(n, 0);
        assert_eq!(q.pi, vec![0, 1]);
        assert_eq!(check_fix_certificate(&q, cert.n).unwrap(), Ok(()));

        let p = medini_add_point(&p, AId(3), &mut c, &mut uni).unwrap();
        let (q, n, _) = fix_bit_extend(&p, 3, &uni).unwrap();
        assert!(n >= 3 && uni.x().bit(n));
        assert!(q.extends(&p));
        assert!(q.validate(&c, &uni.registry).is_ok());
        assert_eq!(check_fix_certificate(&q, n).unwrap(), Ok(()));

        let mut bad = q.clone();
        let shift = bad.level - 1 - n;
        let (i, j) = (0usize, 1usize << shift);
        bad.pi.swap(i, j);
        assert!(check_fix_certificate(&bad, n).unwrap().is_err());
        assert!(check_fix_certificate(&q, q.level).is_err());
        assert!(fix_bit_extend(&p, MAX_MEDINI_LEVEL, &uni).is_err());
    }

    #[test]
    fn permutation_round_trips_as_strings() {
        let q = MediniCondition { f: vec![(AId(1), BId(0))], level: 2, pi: vec![3, 2, 0, 1] };
        let s = serde_json::to_string(&q).unwrap();
        assert!(s.contains("\"11\",\"10\",\"00\",\"01\""));
        let back: MediniCondition = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
    }
}
