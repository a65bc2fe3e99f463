//! Brute-force reference computations. None of these call the routines they
//! are used to check; they enumerate, scan or sum directly.

use crate::exactnum::{Int, Interval, Rational};
use crate::mainlemma::ContainmentCertificate;
use crate::medini::MediniCondition;
use crate::poset::{Condition, PointRegistry};
use crate::setalg::UPSet;

/// `Σ_{i<len} s(i)/2^{i+1}` plus `tail_ones`·`2^{-len}` (the value of an
/// all-ones tail).
fn finite_sum(s: &[bool], tail_ones: bool) -> Rational {
    let mut acc = Rational::zero();
    let mut w = Rational::new(1, 2).expect("nonzero");
    for &b in s {
        if b {
            acc = &acc + &w;
        }
        w = w.halve();
    }
    if tail_ones {
        acc = &acc + &(&w + &w);
    }
    acc
}

fn bits_msb(v: u64, len: usize) -> Vec<bool> {
    (0..len).map(|i| (v >> (len - 1 - i)) & 1 == 1).collect()
}

/// Image of `[x(n)=1]` under λ, by hulls of all length-`n+1` cylinders with
/// last bit set, merged where they touch.
pub fn cylinder_image_bruteforce(n: usize) -> Vec<Interval> {
    let mut hulls: Vec<(Rational, Rational)> = (0..1u64 << (n + 1))
        .map(|v| bits_msb(v, n + 1))
        .filter(|s| s[n])
        .map(|s| (finite_sum(&s, false), finite_sum(&s, true)))
        .collect();
    hulls.sort();
    let mut merged: Vec<(Rational, Rational)> = Vec::new();
    for (lo, hi) in hulls {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => {
                if hi > last.1 {
                    last.1 = hi;
                }
            }
            _ => merged.push((lo, hi)),
        }
    }
    merged.into_iter().map(|(lo, hi)| Interval::closed(lo, hi).expect("hull")).collect()
}

/// Every closed `[(2i+1)/2^{n+1}, (2i+2)/2^{n+1}]` with `i < 2^n`, by formula.
fn good_list(n: usize) -> impl Iterator<Item = (u64, Interval)> {
    let den = Int::from(1u32) << (n as u64 + 1);
    (0..1u64 << n).map(move |i| {
        let lo = Rational::new(Int::from(2 * i + 1), den.clone()).expect("den");
        let hi = Rational::new(Int::from(2 * i + 2), den.clone()).expect("den");
        (i, Interval::closed(lo, hi).expect("nonempty"))
    })
}

/// Least index whose good-at-`n` interval sits inside `i`, by scanning all.
pub fn good_within_scan(i: &Interval, n: usize) -> Option<u64> {
    good_list(n).find(|(_, g)| g.is_subset_of(i)).map(|(k, _)| k)
}

/// Index of the good-at-`n` interval containing `x`, by scanning all.
pub fn locate_scan(x: &Rational, n: usize) -> Option<u64> {
    good_list(n).find(|(_, g)| g.contains(x)).map(|(k, _)| k)
}

/// `λ(y)` summed to `depth` bits, with the exact error bound `2^{-depth}`.
pub fn lambda_bracket(y: &UPSet, depth: usize) -> (Rational, Rational) {
    let s: Vec<bool> = (0..depth).map(|i| y.bit(i)).collect();
    (finite_sum(&s, false), finite_sum(&s, true))
}

/// Least `k` with `s ∖ k ⊆ t`, by scanning past both prefixes for a full
/// common period.
pub fn almost_subset_scan(s: &UPSet, t: &UPSet) -> Option<u64> {
    let horizon = s.prefix_len() + t.prefix_len() + s.period_len() * t.period_len();
    let bad: Vec<usize> = (0..horizon).filter(|&i| s.bit(i) && !t.bit(i)).collect();
    let tail = s.prefix_len().max(t.prefix_len());
    if bad.iter().any(|&i| i >= tail) {
        return None;
    }
    Some(bad.last().map_or(0, |&i| i as u64 + 1))
}

/// Grid check that `intervals` cover `(0,1) ∖ f` exactly once.
pub fn partition_grid_check(f: &[Rational], intervals: &[Interval], grid: usize) -> Result<(), String> {
    for k in 1..grid {
        let x = Rational::new(k as i64, grid as i64).expect("grid");
        let hits = intervals.iter().filter(|i| i.contains(&x)).count();
        let expect = if f.contains(&x) { 0 } else { 1 };
        if hits != expect {
            return Err(format!("{x} lies in {hits} intervals, expected {expect}"));
        }
    }
    for i in intervals {
        let ok = |e: &Rational| e.is_zero() || *e == Rational::one() || f.contains(e);
        if !ok(i.lo()) || !ok(i.hi()) {
            return Err(format!("{i} has an endpoint outside F ∪ {{0,1}}"));
        }
    }
    Ok(())
}

/// For each certified `t_i`: the nearest domain points of `q` below and above
/// `t_i` (sentinels 0 and 1) have images inside `s_i`, so every order
/// isomorphism extending `q` sends `t_i` into `s_i`. Points are sorted here
/// rather than trusting the order of `q`.
pub fn certificate_soundness(q: &Condition, cert: &ContainmentCertificate, reg: &PointRegistry) -> Result<(), String> {
    let mut pts: Vec<(Rational, Rational)> =
        q.pairs().iter().map(|&(a, b)| (reg.a_value(a).clone(), reg.b_value(b).clone())).collect();
    pts.sort_by(|u, v| u.0.cmp(&v.0));
    // max image among the first j points, min image among the points from j on
    let mut below_max = vec![Rational::zero()];
    for (_, y) in &pts {
        let m = below_max.last().expect("seeded").clone().max(y.clone());
        below_max.push(m);
    }
    let mut above_min = vec![Rational::one(); pts.len() + 1];
    for j in (0..pts.len()).rev() {
        above_min[j] = above_min[j + 1].clone().min(pts[j].1.clone());
    }
    let den = Int::from(1u32) << (cert.n as u64 + 1);
    for i in 0..(1u64 << cert.n) {
        let lo = Rational::new(Int::from(2 * i + 1), den.clone()).expect("den");
        let hi = Rational::new(Int::from(2 * i + 2), den.clone()).expect("den");
        let under = pts.partition_point(|(x, _)| *x < lo);
        let upto = pts.partition_point(|(x, _)| *x <= hi);
        if upto > under {
            return Err(format!("t_{i} contains a domain point"));
        }
        let (below, above) = (&below_max[under], &above_min[upto]);
        let entry = cert.entries.get(i as usize).ok_or_else(|| format!("no entry for t_{i}"))?;
        let s = &entry.s_interval;
        if !(s.lo() <= below && above <= s.hi()) {
            return Err(format!("images of t_{i} span [{below},{above}], not inside {s}"));
        }
        // good at l: [(2j+1)/2^{l+1}, (2j+2)/2^{l+1}] with 0 ≤ j < 2^l
        let l = entry.s.level;
        let d = Int::from(1u32) << (l as u64 + 1);
        let k = s.lo().floor_scaled(l + 1);
        let odd = (&k % Int::from(2u32)) == 1u32;
        let good = odd
            && k < d
            && Rational::new(k.clone(), d.clone()).ok() == Some(s.lo().clone())
            && Rational::new(k + Int::from(1u32), d).ok() == Some(s.hi().clone());
        if !good {
            return Err(format!("{s} is not good at {l}"));
        }
    }
    Ok(())
}

/// Counts strings of length `n_q` by enumeration: bit `n` classes preserved.
pub fn cylinder_action_preserved(q: &MediniCondition, n: usize) -> bool {
    let len = q.level;
    (0..1u64 << len).all(|t| {
        let s = bits_msb(t, len);
        let v = q.pi[t as usize] as u64;
        let img = bits_msb(v, len);
        s[n] == img[n]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{interval, rat};

    #[test]
    fn bruteforce_images() {
        let shown: Vec<_> = cylinder_image_bruteforce(1).iter().map(|i| i.to_string()).collect();
        assert_eq!(shown, ["[1/4,1/2]", "[3/4,1/1]"]);
        assert_eq!(cylinder_image_bruteforce(2).len(), 4);
    }

    #[test]
    fn scans() {
        assert_eq!(good_within_scan(&interval("(1/8,1/2)"), 3), Some(1));
        assert_eq!(good_within_scan(&interval("(0,1)"), 0), None);
        assert_eq!(locate_scan(&rat("2/3"), 2), Some(2));
        assert_eq!(locate_scan(&rat("2/3"), 1), None);
        let evens: UPSet = "|10".parse().unwrap();
        assert_eq!(almost_subset_scan(&evens, &evens.difference(&UPSet::finite(&[0, 2]))), Some(3));
        assert_eq!(almost_subset_scan(&evens, &evens.complement()), None);
        let (lo, hi) = lambda_bracket(&evens, 20);
        assert!(lo < rat("2/3") && rat("2/3") < hi);
    }
}
