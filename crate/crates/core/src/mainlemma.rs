//! Containment certificates: a condition `q` together with a level `n` and
//! a target level `l` such that every order isomorphism extending `q` sends
//! each good-at-n interval into a good-at-l interval. Also the finite
//! pseudointersection checks that consume them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cantor::{find_good_within, last_good, GoodInterval};
use crate::error::{Error, Result};
use crate::exactnum::{Interval, Rational};
use crate::poset::{AId, BId, Condition, PointRegistry, Universe};
use crate::setalg::UPSet;

/// Largest clear level a single containment step will handle: the step
/// touches `2^n` intervals.
pub const MAX_MEET_LEVEL: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    /// Largest clear level searched.
    pub search_cap: usize,
    /// Largest target level searched.
    pub level_cap: usize,
    /// Truncation `N` for the pseudointersection check.
    pub horizon: usize,
    /// Flanking points are placed within `2^-reserve` of the left end of
    /// each bad piece, keeping the next levels clear.
    pub reserve: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { search_cap: 64, level_cap: 4096, horizon: 256, reserve: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertEntry {
    pub t: GoodInterval,
    pub t_interval: Interval,
    pub a0: AId,
    /// `None` on the last entry, whose right flank is the sentinel 1.
    pub a1: Option<AId>,
    pub s: GoodInterval,
    pub s_interval: Interval,
    pub b0: BId,
    pub b1: Option<BId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContainmentCertificate {
    pub k: usize,
    pub n: usize,
    pub l: usize,
    pub entries: Vec<CertEntry>,
}

fn intersection_diagnostic(sets: &[&UPSet]) -> String {
    let mut acc = UPSet::full();
    for s in sets {
        acc = acc.intersect(s);
    }
    let text = acc.to_string();
    if text.len() <= 120 {
        format!("X ∩ ⋂ X_α = {text}")
    } else {
        format!(
            "X ∩ ⋂ X_α has prefix length {} and period length {}; first elements {:?}",
            acc.prefix_len(),
            acc.period_len(),
            acc.elements_below(64)
        )
    }
}

/// Least `n ∈ X ∩ [k, search_cap]` lying in every tower level behind a
/// domain point of `p`.
pub fn find_clear_level(p: &Condition, uni: &Universe, k: usize, search_cap: usize) -> Result<usize> {
    let x = uni.x();
    let levels: Vec<&UPSet> = p.domain().map(|a| uni.level_of(a)).collect();
    if let Some(n) = (k..=search_cap).find(|&n| x.bit(n) && levels.iter().all(|l| l.bit(n))) {
        return Ok(n);
    }
    let mut sets = vec![x];
    sets.extend(levels);
    Err(Error::CapExhausted(format!(
        "no clear level in [{k}, {search_cap}]; {}",
        intersection_diagnostic(&sets)
    )))
}

/// Same search, decided by where the domain values sit relative to the
/// good-at-n intervals.
pub fn find_clear_level_geometric(p: &Condition, reg: &PointRegistry, x: &UPSet, k: usize, search_cap: usize) -> Result<usize> {
    for n in k..=search_cap {
        if !x.bit(n) {
            continue;
        }
        let mut clear = true;
        for a in p.domain() {
            if crate::cantor::locate(reg.a_value(a), n)?.is_some() {
                clear = false;
                break;
            }
        }
        if clear {
            return Ok(n);
        }
    }
    Err(Error::CapExhausted(format!("no clear level in [{k}, {search_cap}]")))
}

fn open(lo: Rational, hi: Rational) -> Result<Interval> {
    Interval::open(lo, hi)
}

/// Mints `a^i_0 < t_i < a^i_1` for every good-at-n interval `t_i`, the last
/// one taking the sentinel 1 on its right. Each flank hugs its left
/// neighbour (the left end of the bad piece, a point `2^-(H+1)` above it, or
/// the largest domain point in the piece), so that its level agrees with an
/// already clear one below position `H`.
pub fn flank_points(p: &Condition, n: usize, uni: &mut Universe, caps: &Caps) -> Result<Vec<(AId, Option<AId>)>> {
    if n > MAX_MEET_LEVEL {
        return Err(Error::Precondition(format!("level {n} exceeds {MAX_MEET_LEVEL}")));
    }
    let h = caps.reserve.max(n + 1);
    let count = 1usize << n;
    let mut flanks: Vec<(AId, Option<AId>)> = Vec::with_capacity(count);
    for k in 0..count {
        let p_lo = Rational::dyadic(2 * k as i64, n + 1);
        let p_hi = Rational::dyadic(2 * k as i64 + 1, n + 1);
        let r_mid = &p_lo + &Rational::dyadic(1, h + 1);
        let lo_bit = move |i: usize| i <= n && ((2 * k as u64) >> (n - i)) & 1 == 1;
        let lo_slot = p.slot(&p_lo, &uni.registry);
        let hi_slot = p.slot(&p_hi, &uni.registry);
        let inside: Vec<AId> = p.pairs()[lo_slot..hi_slot].iter().map(|x| x.0).collect();
        if k > 0 {
            let right = match inside.first().map(|&a| uni.registry.a_value(a)) {
                Some(m) if *m < r_mid => m.clone(),
                _ => r_mid.clone(),
            };
            let a1 = uni.mint_a_above(lo_bit, &p_lo, &right, h)?;
            flanks[k - 1].1 = Some(a1);
        }
        let a0 = match inside.last() {
            Some(&m) if *uni.registry.a_value(m) > r_mid => {
                let (set, v) = (uni.registry.a(m).set.clone(), uni.registry.a_value(m).clone());
                uni.mint_a_above(|i| set.bit(i), &v, &p_hi, h)?
            }
            _ => uni.mint_a_above(|i| lo_bit(i) || i == h, &r_mid, &p_hi, h)?,
        };
        flanks.push((a0, None));
    }
    Ok(flanks)
}

/// Picks the common target level `l` and one good-at-l interval per
/// good-at-n interval, inside the image gap that interval falls in.
pub fn choose_targets(p: &Condition, n: usize, uni: &Universe, level_cap: usize) -> Result<(usize, Vec<GoodInterval>)> {
    if n > MAX_MEET_LEVEL {
        return Err(Error::Precondition(format!("level {n} exceeds {MAX_MEET_LEVEL}")));
    }
    let count = 1usize << n;
    // (slot, image gap, number of t's inside)
    let mut groups: Vec<(usize, Interval, usize)> = Vec::new();
    for i in 0..count {
        let mid = Rational::dyadic(4 * i as i64 + 3, n + 2);
        let gap = p.gap_of(&mid, &uni.registry)?;
        match groups.last_mut() {
            Some(g) if g.0 == gap.slot => g.2 += 1,
            _ => groups.push((gap.slot, gap.image, 1)),
        }
    }
    let min_piece = groups
        .iter()
        .map(|(_, gap, j)| gap.length().checked_div(&Rational::from(*j as i64)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .expect("at least one gap");
    let x = uni.x();
    let l = (n + 1..=level_cap)
        .find(|&l| x.bit(l) && Rational::dyadic(3, l + 1) < min_piece)
        .ok_or_else(|| {
            Error::CapExhausted(format!(
                "no target level in ({n}, {level_cap}] fits pieces of length {min_piece}"
            ))
        })?;
    let mut targets = Vec::with_capacity(count);
    for (_, gap, j) in &groups {
        for piece in gap.equal_partition(*j)? {
            let s = if targets.len() + 1 == count { last_good(l) } else { find_good_within(&piece, l)? };
            targets.push(s);
        }
    }
    Ok((l, targets))
}

/// Extends `p` so that it certifies containment at the least clear level
/// `n ≥ k`. On failure the universe is rolled back and `p` is untouched.
pub fn force_containment(p: &Condition, k: usize, uni: &mut Universe, caps: &Caps) -> Result<(Condition, ContainmentCertificate)> {
    let cp = uni.checkpoint();
    let out = force_inner(p, k, uni, caps);
    if out.is_err() {
        uni.rollback(cp);
    }
    out
}

fn force_inner(p: &Condition, k: usize, uni: &mut Universe, caps: &Caps) -> Result<(Condition, ContainmentCertificate)> {
    let n = find_clear_level(p, uni, k, caps.search_cap)?;
    let flanks = flank_points(p, n, uni, caps)?;
    let (l, targets) = choose_targets(p, n, uni, caps.level_cap)?;
    let mut q = p.clone();
    let mut entries = Vec::with_capacity(flanks.len());
    for (i, ((a0, a1), s)) in flanks.into_iter().zip(targets).enumerate() {
        let t = GoodInterval::new(n, i as u64)?;
        let s_interval = s.interval();
        let mid = s_interval.lo().midpoint(s_interval.hi());
        let b0 = q.map_into(a0, &open(s_interval.lo().clone(), mid.clone())?, uni)?;
        let b1 = match a1 {
            Some(a1) => Some(q.map_into(a1, &open(mid, s_interval.hi().clone())?, uni)?),
            None => None,
        };
        entries.push(CertEntry { t_interval: t.interval(), t, a0, a1, s, s_interval, b0, b1 });
    }
    Ok((q, ContainmentCertificate { k, n, l, entries }))
}

pub type Verdict = std::result::Result<(), String>;

/// Re-verifies a certificate against `q` using exact comparisons only.
pub fn check_certificate(q: &Condition, cert: &ContainmentCertificate, reg: &PointRegistry, x: &UPSet) -> Verdict {
    let (n, l) = (cert.n, cert.l);
    if !(x.bit(n) && n >= cert.k) {
        return Err(format!("n ∉ X∖k (n = {n}, k = {})", cert.k));
    }
    if !(x.bit(l) && l >= n) {
        return Err(format!("l ∉ X∖n (l = {l}, n = {n})"));
    }
    if n > MAX_MEET_LEVEL || cert.entries.len() != 1usize << n {
        return Err(format!("expected 2^{n} entries, found {}", cert.entries.len()));
    }
    if !q.is_partial_iso(reg) {
        return Err("q is not a partial isomorphism".into());
    }
    let one = Rational::one();
    let last = cert.entries.len() - 1;
    let mut prev_hi: Option<Rational> = None;
    for (i, e) in cert.entries.iter().enumerate() {
        let at = |msg: &str| format!("entry {i}: {msg}");
        if e.t.level != n || e.t.index != i as u64 || e.t_interval != e.t.interval() {
            return Err(at("t_i is not good(n,i)"));
        }
        if e.s.level != l || GoodInterval::new(l, e.s.index.clone()).is_err() || e.s_interval != e.s.interval() {
            return Err(at("s_i is not good at l"));
        }
        let a0 = reg.get_a(e.a0).map_err(|err| at(&err.to_string()))?;
        let b0 = reg.get_b(e.b0).map_err(|err| at(&err.to_string()))?;
        if a0.value >= *e.t_interval.lo() {
            return Err(at("a0 does not lie below t_i"));
        }
        if !(b0.value > *e.s_interval.lo() && b0.value < *e.s_interval.hi()) {
            return Err(at("image not in s_i"));
        }
        if !q.contains_pair(e.a0, e.b0, reg) {
            return Err(at("(a0, b0) is not a pair of q"));
        }
        match (i == last, e.a1, e.b1) {
            (true, None, None) => {
                if *e.s_interval.hi() != one {
                    return Err(at("last target must end at 1"));
                }
            }
            (false, Some(a1), Some(b1)) => {
                let a1v = &reg.get_a(a1).map_err(|err| at(&err.to_string()))?.value;
                let b1v = &reg.get_b(b1).map_err(|err| at(&err.to_string()))?.value;
                if *a1v <= *e.t_interval.hi() {
                    return Err(at("a1 does not lie above t_i"));
                }
                if !(*b1v > *e.s_interval.lo() && *b1v < *e.s_interval.hi()) {
                    return Err(at("image not in s_i"));
                }
                if !q.contains_pair(a1, b1, reg) {
                    return Err(at("(a1, b1) is not a pair of q"));
                }
            }
            _ => return Err(at("right flank must be the sentinel exactly on the last entry")),
        }
        if let Some(h) = &prev_hi {
            if h >= e.s_interval.lo() {
                return Err(at("s-intervals are not increasing"));
            }
        }
        prev_hi = Some(e.s_interval.hi().clone());
    }
    Ok(())
}

/// `(ω ∖ X_α, Y)` for every pair of a tower-derived condition.
pub fn induced_map(pairs: &[(AId, BId)], reg: &PointRegistry) -> Vec<(UPSet, UPSet)> {
    pairs.iter().map(|&(a, b)| (reg.a(a).set.clone(), reg.b(b).set.clone())).collect()
}

/// `{n ∈ X ∩ [0,N) : n ∈ Y ⇒ some m ≥ n lies in X ∩ f(Y)}`.
pub fn little_xinf(f: &[(UPSet, UPSet)], x: &UPSet, horizon: usize) -> Result<BTreeSet<usize>> {
    let mut tops: Vec<(&UPSet, Option<usize>)> = Vec::with_capacity(f.len());
    for (y, z) in f {
        let k = z
            .almost_disjoint(x)
            .ok_or_else(|| Error::Precondition(format!("f-value {z} is not almost disjoint from X")))?;
        tops.push((y, (k as usize).checked_sub(1)));
    }
    Ok((0..horizon)
        .filter(|&n| x.bit(n) && tops.iter().all(|(y, top)| !y.bit(n) || top.is_some_and(|m| n <= m)))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantViolation {
    pub a: AId,
    pub level: usize,
    /// Least `k` with `Y ∩ X ⊆ k`; `None` when the intersection is infinite.
    pub k: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantRow {
    pub n: usize,
    pub checked: usize,
    pub violations: Vec<InvariantViolation>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantReport {
    pub rows: Vec<InvariantRow>,
    pub pass: bool,
}

/// For each witnessed `n` and each pair `a ↦ b`: `n ∈ X_α` or `n ≤ k_α`,
/// where `k_α` bounds `Y_b ∩ X`.
pub fn little_invariant_check(w: &[usize], pairs: &[(AId, BId)], uni: &Universe) -> InvariantReport {
    let x = uni.x();
    let bounds: Vec<Option<u64>> = pairs.iter().map(|&(_, b)| uni.registry.b(b).set.almost_disjoint(x)).collect();
    let rows: Vec<InvariantRow> = w
        .iter()
        .map(|&n| {
            let violations = pairs
                .iter()
                .zip(&bounds)
                .filter(|(&(a, _), k)| {
                    let holds = uni.level_of(a).bit(n) || k.is_some_and(|k| n as u64 <= k);
                    !holds
                })
                .map(|(&(a, _), k)| InvariantViolation { a, level: uni.registry.a(a).level, k: *k })
                .collect();
            InvariantRow { n, checked: pairs.len(), violations }
        })
        .collect();
    let pass = rows.iter().all(|r| r.violations.is_empty());
    InvariantReport { rows, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{interval, rat};
    use crate::setalg::{parse_bits, Tower};

    fn evens() -> UPSet {
        "|10".parse().unwrap()
    }

    fn bare(cap: usize) -> Universe {
        Universe::new(Tower::generate(evens(), &[], cap).unwrap())
    }

    #[test]
    fn clear_level_examples() {
        let uni = bare(8);
        assert_eq!(find_clear_level(&Condition::new(), &uni, 0, 64).unwrap(), 0);
        assert_eq!(find_clear_level(&Condition::new(), &uni, 5, 64).unwrap(), 6);

        let thin = evens().difference(&UPSet::finite(&[0, 2]));
        let mut uni = Universe::new(Tower::from_levels(vec![evens(), thin], 64).unwrap());
        let (p, _) = crate::poset::dense_map_extend(&Condition::new(), AId(1), &interval("(0,1)"), &mut uni).unwrap();
        assert_eq!(find_clear_level(&p, &uni, 0, 64).unwrap(), 4);
        assert_eq!(find_clear_level_geometric(&p, &uni.registry, uni.x(), 0, 64).unwrap(), 4);
        let err = find_clear_level(&p, &uni, 0, 3).unwrap_err();
        assert!(err.to_string().contains("X ∩ ⋂ X_α"));
    }

    #[test]
    fn flank_examples() {
        let caps = Caps::default();
        let mut uni = bare(64);
        let f = flank_points(&Condition::new(), 0, &mut uni, &caps).unwrap();
        assert_eq!(f.len(), 1);
        assert!(f[0].1.is_none());
        assert!(interval("(0,1/2)").contains(uni.registry.a_value(f[0].0)));

        let f = flank_points(&Condition::new(), 1, &mut uni, &caps).unwrap();
        let v = |a: AId| uni.registry.a_value(a).clone();
        let (a00, a01) = (f[0].0, f[0].1.unwrap());
        let a10 = f[1].0;
        assert!(v(a00) < rat("1/4") && rat("1/2") < v(a01) && v(a01) < v(a10) && v(a10) < rat("3/4"));
        assert!(f[1].1.is_none());
    }

    #[test]
    fn flanks_respect_domain_points() {
        let caps = Caps::default();
        let mut uni = bare(64);
        // a domain point inside the bad piece [1/2, 3/4] at level 1
        let a = uni.mint_a_within(&interval("(9/16,5/8)")).unwrap();
        let (p, _) = crate::poset::dense_map_extend(&Condition::new(), a, &interval("(0,1)"), &mut uni).unwrap();
        let f = flank_points(&p, 1, &mut uni, &caps).unwrap();
        let xa = uni.registry.a_value(a).clone();
        let right_of_t0 = uni.registry.a_value(f[0].1.unwrap()).clone();
        let left_of_t1 = uni.registry.a_value(f[1].0).clone();
        assert!(right_of_t0 < xa && xa < left_of_t1);
        let g = p.gap_of(&rat("5/16"), &uni.registry).unwrap();
        assert!(right_of_t0 < g.x1);
    }

    #[test]
    fn target_examples() {
        let uni = bare(8);
        let (l, s) = choose_targets(&Condition::new(), 0, &uni, 64).unwrap();
        assert_eq!(l, 2);
        assert_eq!(s[0].interval(), interval("[7/8,1]"));
        let (l, s) = choose_targets(&Condition::new(), 1, &uni, 64).unwrap();
        assert_eq!(l, 2);
        assert_eq!(s.len(), 2);
        assert!(s[0].interval().is_subset_of(&interval("(0,1/2)")));
        assert_eq!(s[1].interval(), interval("[7/8,1]"));
        assert!(choose_targets(&Condition::new(), 1, &uni, 1).is_err());
    }

    #[test]
    fn force_examples() {
        let caps = Caps::default();
        let mut uni = bare(256);
        let (q, cert) = force_containment(&Condition::new(), 0, &mut uni, &caps).unwrap();
        assert_eq!(cert.n, 0);
        assert!(q.len() <= 2);
        check_certificate(&q, &cert, &uni.registry, uni.x()).unwrap();

        let (q2, cert2) = force_containment(&q, cert.n + 1, &mut uni, &caps).unwrap();
        assert!(cert2.n > cert.n);
        assert!(q2.extends(&q));
        check_certificate(&q2, &cert2, &uni.registry, uni.x()).unwrap();
        check_certificate(&q2, &cert, &uni.registry, uni.x()).unwrap();

        let cp = uni.checkpoint();
        let capped = Caps { search_cap: 10, ..caps };
        assert!(force_containment(&q2, 11, &mut uni, &capped).is_err());
        assert_eq!(uni.checkpoint(), cp);
    }

    #[test]
    fn tampering_is_detected() {
        let caps = Caps::default();
        let mut uni = bare(256);
        let (q, cert) = force_containment(&Condition::new(), 1, &mut uni, &caps).unwrap();
        check_certificate(&q, &cert, &uni.registry, uni.x()).unwrap();

        let mut swapped = cert.clone();
        let b = swapped.entries[0].b0;
        swapped.entries[0].b0 = swapped.entries[1].b0;
        swapped.entries[1].b0 = b;
        let err = check_certificate(&q, &swapped, &uni.registry, uni.x()).unwrap_err();
        assert!(err.contains("image not in s_i"), "{err}");

        let mut bad_l = cert.clone();
        bad_l.l = 3;
        let err = check_certificate(&q, &bad_l, &uni.registry, uni.x()).unwrap_err();
        assert!(err.contains("l ∉ X∖n"), "{err}");
    }

    #[test]
    fn little_xinf_examples() {
        let x = evens();
        assert_eq!(little_xinf(&[], &x, 10).unwrap(), [0, 2, 4, 6, 8].into_iter().collect());
        // Y = everything, Z ∩ X = {6}
        let z: UPSet = UPSet::finite(&[6]).union(&"|01".parse().unwrap());
        let got = little_xinf(&[(UPSet::full(), z.clone())], &x, 10).unwrap();
        assert_eq!(got, [0, 2, 4, 6].into_iter().collect());
        let far = UPSet::from_fn(20, 2, |i| i >= 20 && i % 2 == 1);
        let got = little_xinf(&[(far, z)], &x, 10).unwrap();
        assert_eq!(got, [0, 2, 4, 6, 8].into_iter().collect());
        assert!(little_xinf(&[(UPSet::full(), x.clone())], &x, 10).is_err());
    }

    #[test]
    fn invariant_examples() {
        let caps = Caps::default();
        let mut uni = Universe::new(Tower::generate(evens(), &[parse_bits("1").unwrap()], 1024).unwrap());
        let (p, _) = crate::poset::dense_map_extend(&Condition::new(), AId(1), &interval("(0,1)"), &mut uni).unwrap();
        let (q, c0) = force_containment(&p, 0, &mut uni, &caps).unwrap();
        let (q, c1) = force_containment(&q, c0.n + 1, &mut uni, &caps).unwrap();
        let w = [c0.n, c1.n];
        let rep = little_invariant_check(&w, q.pairs(), &uni);
        assert!(rep.pass);
        assert!(little_invariant_check(&[], q.pairs(), &uni).pass);

        // 0 ∉ X_1 and the image of a1 meets X far below any useful bound
        let k = uni.registry.b(q.image(AId(1), &uni.registry).unwrap()).set.almost_disjoint(uni.x()).unwrap();
        let inject = (k as usize + 1..200).find(|&n| !uni.tower.level(1).bit(n)).unwrap();
        let rep = little_invariant_check(&[inject], q.pairs(), &uni);
        assert!(!rep.pass);
        assert!(rep.rows[0].violations.iter().any(|v| v.a == AId(1)));

        let xinf = little_xinf(&induced_map(q.pairs(), &uni.registry), uni.x(), 64).unwrap();
        assert!(w.iter().all(|n| xinf.contains(n)));
    }
}
