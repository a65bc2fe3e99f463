//! Randomized property batteries, one per selector. Trial `i` of a run with
//! seed `s` uses seed `s + i`, so a counterexample replays as trial 0 of a
//! one-trial run.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cantor::{cylinder_image, find_good_within, lambda_value, locate};
use crate::decomp::{assemble, check_order_iso, induced_iso, max_intervals, FiniteNwdSet};
use crate::error::{Error, Result};
use crate::exactnum::{Int, Interval, Rational};
use crate::mainlemma::{check_certificate, force_containment, little_invariant_check, Caps};
use crate::medini::{check_fix_certificate, fix_bit_extend, medini_add_point, Coloring, MediniCondition};
use crate::oracle;
use crate::poset::{dense_map_extend, dense_map_extend_range, AId, BId, Condition, Universe};
use crate::setalg::{Bits, Tower, UPSet};

type Trial = fn(u64, &mut ChaCha8Rng) -> std::result::Result<(), Value>;

struct Battery {
    name: &'static str,
    about: &'static str,
    default_trials: usize,
    trial: Trial,
}

const BATTERIES: &[Battery] = &[
    Battery { name: "setalg.boolean", about: "boolean operations and ⊆* against bitwise scans", default_trials: 300, trial: setalg_boolean },
    Battery { name: "setalg.tower", about: "generated towers validate and rebuild from their levels", default_trials: 100, trial: setalg_tower },
    Battery { name: "cantor.fact3", about: "cylinder images equal brute-force hulls, n = trial mod 11", default_trials: 11, trial: cantor_fact3 },
    Battery { name: "cantor.prop25", about: "a good interval inside every random open interval", default_trials: 1000, trial: cantor_prop25 },
    Battery { name: "cantor.duality", about: "locate(λ(Y), n) is defined iff n ∈ Y, n ≤ 12", default_trials: 500, trial: cantor_duality },
    Battery { name: "poset.axioms", about: "restriction closure and dense mapping on both sides", default_trials: 300, trial: poset_axioms },
    Battery { name: "mainlemma.density", about: "force_containment yields a checked certificate", default_trials: 200, trial: mainlemma_density },
    Battery { name: "medini.density", about: "bit-fixing extensions validate and preserve their bit", default_trials: 200, trial: medini_density },
    Battery { name: "decomp.skeleton", about: "maximal intervals, induced map and assembly", default_trials: 200, trial: decomp_skeleton },
];

pub fn selectors() -> Vec<(&'static str, &'static str)> {
    BATTERIES.iter().map(|b| (b.name, b.about)).collect()
}

pub fn default_trials(selector: &str) -> Option<usize> {
    BATTERIES.iter().find(|b| b.name == selector).map(|b| b.default_trials)
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub seed: u64,
    pub data: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub selector: String,
    pub trials: usize,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub max_trial_ms: f64,
    pub total_ms: f64,
    pub counterexample: Option<Counterexample>,
}

impl SuiteSummary {
    pub fn pass(&self) -> bool {
        self.failed == 0
    }
}

/// Runs `trials` trials of one battery; `None` uses its default count.
pub fn run_suite(selector: &str, trials: Option<usize>, seed: u64) -> Result<SuiteSummary> {
    let battery = BATTERIES.iter().find(|b| b.name == selector).ok_or_else(|| {
        let names: Vec<&str> = BATTERIES.iter().map(|b| b.name).collect();
        Error::Validation(format!("unknown selector {selector:?}; available: {}", names.join(", ")))
    })?;
    let trials = trials.unwrap_or(battery.default_trials);
    let start = Instant::now();
    let mut summary = SuiteSummary {
        selector: selector.to_string(),
        trials,
        seed,
        passed: 0,
        failed: 0,
        max_trial_ms: 0.0,
        total_ms: 0.0,
        counterexample: None,
    };
    for i in 0..trials {
        let s = seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let t = Instant::now();
        let out = (battery.trial)(s, &mut rng);
        summary.max_trial_ms = summary.max_trial_ms.max(t.elapsed().as_secs_f64() * 1e3);
        match out {
            Ok(()) => summary.passed += 1,
            Err(data) => {
                summary.failed += 1;
                if summary.counterexample.is_none() {
                    summary.counterexample = Some(Counterexample { trial: i, seed: s, data });
                }
            }
        }
    }
    summary.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(summary)
}

fn fail(what: &str, data: Value) -> Value {
    json!({ "property": what, "data": data })
}

fn err_value(e: impl std::fmt::Display) -> Value {
    json!({ "error": e.to_string() })
}

fn rand_bits(rng: &mut ChaCha8Rng, len: usize) -> Bits {
    (0..len).map(|_| rng.gen::<bool>()).collect()
}

pub(crate) fn rand_upset(rng: &mut ChaCha8Rng, max_prefix: usize, max_period: usize) -> UPSet {
    let p = rng.gen_range(0..=max_prefix);
    let q = rng.gen_range(1..=max_period);
    UPSet::new(rand_bits(rng, p), rand_bits(rng, q)).expect("period is nonempty")
}

/// Periodic part holding both a 0 and a 1, so the set is infinite,
/// coinfinite and not eventually constant.
pub(crate) fn rand_mixed(rng: &mut ChaCha8Rng, max_prefix: usize, max_period: usize) -> UPSet {
    loop {
        let y = rand_upset(rng, max_prefix, max_period.max(2));
        if !y.is_eventually_constant() {
            return y;
        }
    }
}

/// `a/d` with `0 < a < d ≤ max_den`.
fn rand_unit(rng: &mut ChaCha8Rng, max_den: i64) -> Rational {
    let d = rng.gen_range(2..=max_den);
    Rational::new(rng.gen_range(1..d), d).expect("den")
}

/// Random open interval strictly inside `i`.
fn rand_subinterval(rng: &mut ChaCha8Rng, i: &Interval) -> Interval {
    let len = i.length();
    let d = 64i64;
    let a = rng.gen_range(0..d - 1);
    let b = rng.gen_range(a + 1..d);
    let at = |k: i64| i.lo() + &(&len * &Rational::new(k, d).expect("den"));
    Interval::open(at(a), at(b)).expect("a < b")
}

/// `levels` levels below a random `X`, with `b_count` b-points. With
/// `distinct`, level complements start with distinct 6-bit words.
/// `capacity` should cover every level the trial mints: past it the tower
/// period grows superlinearly.
fn rand_universe(rng: &mut ChaCha8Rng, levels: usize, b_count: usize, distinct: bool, capacity: usize) -> Result<Universe> {
    // dense X keeps clear levels easy to find
    let x = loop {
        let y = rand_mixed(rng, 4, 6);
        if y.period().count_ones() * 2 >= y.period_len() {
            break y;
        }
    };
    let prefixes: Vec<Bits> = if distinct {
        let mut words: Vec<u64> = (0..64).collect();
        words.shuffle(rng);
        words.iter().take(levels).map(|&v| crate::setalg::bits_of_int(v, 6)).collect()
    } else {
        (0..levels).map(|_| {
            let len = rng.gen_range(0..=6);
            rand_bits(rng, len)
        }).collect()
    };
    let mut uni = Universe::new(Tower::generate(x, &prefixes, capacity)?);
    for _ in 0..b_count {
        let w = rand_bits(rng, 8);
        uni.mint_b(&w)?;
    }
    Ok(uni)
}

/// Maps up to `size` random a-points into random subintervals of their gaps.
fn rand_condition(rng: &mut ChaCha8Rng, uni: &mut Universe, size: usize) -> Result<Condition> {
    let mut ids: Vec<u32> = (0..uni.registry.a_len() as u32).collect();
    ids.shuffle(rng);
    let mut p = Condition::new();
    for &id in ids.iter().take(size) {
        let a = AId(id);
        let gap = p.gap_of(uni.registry.a_value(a), &uni.registry)?;
        let u = rand_subinterval(rng, &gap.image);
        p = dense_map_extend(&p, a, &u, uni)?.0;
    }
    Ok(p)
}

type BoolOp = fn(bool, bool) -> bool;

fn setalg_boolean(_seed: u64, rng: &mut ChaCha8Rng) -> std::result::Result<(), Value> {
    let s = rand_upset(rng, 8, 8);
    let t = rand_upset(rng, 8, 8);
    let horizon = 8 + 8 + 2 * 8 * 8;
    let ops: [(&str, UPSet, BoolOp); 3] = [
        ("union", s.union(&t), |a, b| a || b),
        ("intersect", s.intersect(&t), |a, b| a && b),
        ("difference", s.difference(&t), |a, b| a && !b),
    ];
    for (name, got, op) in ops {
        if let Some(i) = (0..horizon).find(|&i| got.bit(i) != op(s.bit(i), t.bit(i))) {
            return Err(fail(name, json!({ "s": s, "t": t, "bit": i })));
        }
    }
    if (0..horizon).any(|i| s.complement().bit(i) == s.bit(i)) {
        return Err(fail("complement", json!({ "s": s })));
    }
    if s.almost_subset(&t) != oracle::almost_subset_scan(&s, &t) {
        return Err(fail("almost_subset", json!({ "s": s, "t": t, "got": s.almost_subset(&t) })));
    }
    Ok(())
}

fn setalg_tower(_seed: u64, rng: &mut ChaCha8Rng) -> std::result::Result<(), Value> {
    let x = rand_mixed(rng, 4, 6);
    let n = rng.gen_range(1..=16);
    let prefixes: Vec<Bits> = (0..n).map(|_| {
        let len = rng.gen_range(0..=6);
        rand_bits(rng, len)
    }).collect();
    let t = Tower::generate(x.clone(), &prefixes, 64).map_err(|e| fail("generate", err_value(e)))?;
    t.validate().map_err(|e| fail("validate", json!({ "x": x, "error": e.to_string() })))?;
    for (i, w) in prefixes.iter().enumerate() {
        let lvl = t.level(i + 1);
        if w.iter().enumerate().any(|(j, b)| lvl.bit(j) == *b) {
            return Err(fail("complement prefix", json!({ "x": x, "level": i + 1 })));
        }
    }
    let again = Tower::from_levels(t.levels().to_vec(), 64).map_err(|e| fail("from_levels", err_value(e)))?;
    if (1..t.len()).any(|b| again.bound(b) != t.bound(b)) {
        return Err(fail("bounds", json!({ "x": x })));
    }
    Ok(())
}

fn cantor_fact3(seed: u64, _rng: &mut ChaCha8Rng) -> std::result::Result<(), Value> {
    // any 11 consecutive seeds cover every n ≤ 10
    let n = (seed % 11) as usize;
    let got: Vec<Interval> = cylinder_image(n).iter().map(|g| g.interval()).collect();
    let want = oracle::cylinder_image_bruteforce(n);
    if got != want {
        return Err(fail("cylinder_image", json!({ "n": n, "got": got.len(), "want": want.len() })));
    }
    Ok(())
}

fn cantor_prop25(_seed: u64, rng: &mut ChaCha8Rng) -> std::result::Result<(), Value> {
    let (a, b) = loop {
        let a = rand_unit(rng, 512);
        let b = rand_unit(rng, 512);
        if a != b {
            break if a < b { (a, b) } else { (b, a) };
        }
    };
    let i = Interval::open(a, b).expect("a < b");
    let len = i.length();
    let n = (0..).find(|&n| Rational::new(3, Int::from(1u32) << (n as u64 + 1)).expect("den") < len).expect("len > 0");
    let g = find_good_within(&i, n).map_err(|e| fail("find_good_within", json!({ "i": i, "n": n, "error": e.to_string() })))?;
    let gi = g.interval();
    if !gi.is_subset_of(&i) || oracle::locate_scan(&gi.lo().midpoint(gi.hi()), n).is_none() {
        return Err(fail("containment", json!({ "i": i, "n": n, "good": g })));
    }
    if oracle::good_within_scan(&i, n).is_none() {
        return Err(fail("scan", json!({ "i": i, "n": n })));
    }
    Ok(())
}

fn cantor_duality(_seed: u64, rng: &mut ChaCha8Rng) -> std::result::Result<(), Value> {
    let y = rand_mixed(rng, 8, 8);
    let v = lambda_value(&y);
    let (lo, hi) = oracle::lambda_bracket(&y, 64);
    if !(lo <= v && v <= hi) {
        return Err(fail("lambda", json!({ "y": y, "value": v })));
    }
    for n in 0..=12 {
        let got = locate(&v, n).map_err(|e| fail("locate", json!({ "y": y, "n": n, "error": e.to_string() })))?;
        let scanned = oracle::locate_scan(&v, n);
        if got.is_some() != y.bit(n) || scanned.is_some() != y.bit(n) {
            return Err(fail("duality", json!({ "y": y, "n": n, "located": got.map(|g| g.to_string()) })));
        }
    }
    Ok(())
}

fn poset_axioms(_seed: u64, rng: &mut ChaCha8Rng) -> std::result::Result<(), Value> {
    let levels = rng.gen_range(2..=12);
    let mut uni = rand_universe(rng, levels, 4, false, 256).map_err(|e| fail("universe", err_value(e)))?;
    let size = rng.gen_range(0..=6);
    let p = rand_condition(rng, &mut uni, size).map_err(|e| fail("condition", err_value(e)))?;
    let reg = &uni.registry;
    let pairs: Vec<Value> = p.pairs().iter().map(|(a, b)| json!([a, b])).collect();
    if !p.is_partial_iso(reg) {
        return Err(fail("partial_iso", json!({ "pairs": pairs })));
    }

    // restriction closure
    let keep: Vec<AId> = p.domain().filter(|_| rng.gen::<bool>()).collect();
    let r = p.restrict(&keep).map_err(|e| fail("restrict", err_value(e)))?;
    if !r.is_partial_iso(reg) || !p.extends(&r) || r.len() != keep.len() {
        return Err(fail("restriction", json!({ "pairs": pairs, "keep": keep })));
    }

    // dense mapping, domain side: a fresh point, then an existing one if free
    let fresh_in = rand_subinterval(rng, &Interval::open(Rational::zero(), Rational::one()).expect("unit"));
    let x = uni.mint_a_within(&fresh_in).map_err(|e| fail("mint", err_value(e)))?;
    let gap = p.gap_of(uni.registry.a_value(x), &uni.registry).map_err(|e| fail("gap", err_value(e)))?;
    let u = rand_subinterval(rng, &gap.image);
    let (q, b) = dense_map_extend(&p, x, &u, &mut uni).map_err(|e| fail("dense_map_extend", err_value(e)))?;
    let reg = &uni.registry;
    if !q.is_partial_iso(reg) || !q.extends(&p) || q.image(x, reg) != Some(b) || !u.contains(reg.b_value(b)) {
        return Err(fail("dense_map", json!({ "pairs": pairs, "x": x, "u": u })));
    }

    // dense mapping, range side
    let free: Vec<BId> = (0..reg.b_len() as u32).map(BId).filter(|&b| q.preimage(b, reg).is_none()).collect();
    if let Some(&y) = free.choose(rng) {
        let gap = q.range_gap_of(reg.b_value(y), reg).map_err(|e| fail("range_gap", err_value(e)))?;
        let u = rand_subinterval(rng, &gap.image);
        let (r, a) = dense_map_extend_range(&q, y, &u, &mut uni).map_err(|e| fail("dense_map_extend_range", err_value(e)))?;
        let reg = &uni.registry;
        if !r.is_partial_iso(reg) || !r.extends(&q) || r.image(a, reg) != Some(y) || !u.contains(reg.a_value(a)) {
            return Err(fail("dense_map_range", json!({ "pairs": pairs, "y": y, "u": u })));
        }
    }
    Ok(())
}

fn mainlemma_density(_seed: u64, rng: &mut ChaCha8Rng) -> std::result::Result<(), Value> {
    let levels = rng.gen_range(1..=16);
    let mut uni = rand_universe(rng, levels, 0, false, 4096).map_err(|e| fail("universe", err_value(e)))?;
    let size = rng.gen_range(0..=6);
    let p = rand_condition(rng, &mut uni, size).map_err(|e| fail("condition", err_value(e)))?;
    let k = rng.gen_range(0..=8);
    let x = uni.x().clone();
    let ctx = || json!({ "x": x, "levels": levels, "size": size, "k": k });
    let (q, cert) = force_containment(&p, k, &mut uni, &Caps::default())
        .map_err(|e| fail("force_containment", json!({ "case": ctx(), "error": e.to_string() })))?;
    let reg = &uni.registry;
    if !q.extends(&p) || !q.is_partial_iso(reg) {
        return Err(fail("q ≤ p", ctx()));
    }
    check_certificate(&q, &cert, reg, &x).map_err(|e| fail("check_certificate", json!({ "case": ctx(), "error": e })))?;
    oracle::certificate_soundness(&q, &cert, reg).map_err(|e| fail("soundness", json!({ "case": ctx(), "error": e })))?;
    Ok(())
}

fn medini_density(_seed: u64, rng: &mut ChaCha8Rng) -> std::result::Result<(), Value> {
    let levels = rng.gen_range(2..=8);
    let b_count = rng.gen_range(0..=4);
    let mut uni = rand_universe(rng, levels, b_count, true, 256).map_err(|e| fail("universe", err_value(e)))?;
    let classes = rng.gen_range(1..=3);
    let mut coloring = Coloring::round_robin(classes, &uni.registry).map_err(|e| fail("coloring", err_value(e)))?;
    let x = uni.x().clone();
    let mut p = MediniCondition::minimal();
    // level 0 is X itself, whose complement need not avoid the words
    let mut ids: Vec<u32> = (1..uni.registry.a_len() as u32).collect();
    ids.shuffle(rng);
    let mut ids = ids.into_iter().take(rng.gen_range(0..=3));
    let mut fixed: Vec<usize> = Vec::new();
    let steps = rng.gen_range(1..=5);
    let mut log: Vec<String> = Vec::new();
    for _ in 0..steps {
        let add = rng.gen::<bool>();
        let q = match ids.next().filter(|_| add) {
            Some(id) => {
                log.push(format!("add {id}"));
                medini_add_point(&p, AId(id), &mut coloring, &mut uni)
                    .map_err(|e| fail("medini_add_point", json!({ "x": x, "log": log, "error": e.to_string() })))?
            }
            None => {
                let k = fixed.last().map_or(rng.gen_range(0..=3), |n| n + 1);
                log.push(format!("fix {k}"));
                let (q, n, _) = fix_bit_extend(&p, k, &uni)
                    .map_err(|e| fail("fix_bit_extend", json!({ "x": x, "log": log, "error": e.to_string() })))?;
                match check_fix_certificate(&q, n) {
                    Ok(Ok(())) => {}
                    other => return Err(fail("check_fix_certificate", json!({ "x": x, "log": log, "got": format!("{other:?}") }))),
                }
                if q.level <= 14 && !oracle::cylinder_action_preserved(&q, n) {
                    return Err(fail("cylinder oracle", json!({ "x": x, "log": log, "n": n })));
                }
                fixed.push(n);
                q
            }
        };
        if !q.extends(&p) {
            return Err(fail("extends", json!({ "x": x, "log": log })));
        }
        q.validate(&coloring, &uni.registry).map_err(|e| fail("validate", json!({ "x": x, "log": log, "error": e })))?;
        p = q;
    }
    // bits fixed earlier stay fixed
    for &n in &fixed {
        if check_fix_certificate(&p, n) != Ok(Ok(())) {
            return Err(fail("fixed bit lost", json!({ "x": x, "log": log, "n": n })));
        }
    }
    if crate::scenario::increasing_in_x(&fixed, &x).is_err() || !little_invariant_check(&fixed, &p.f, &uni).pass {
        return Err(fail("witnessed", json!({ "x": x, "log": log, "w": fixed })));
    }
    Ok(())
}

fn decomp_skeleton(_seed: u64, rng: &mut ChaCha8Rng) -> std::result::Result<(), Value> {
    const D: i64 = 2520;
    let size = rng.gen_range(1..=12);
    let pick = |rng: &mut ChaCha8Rng| -> Vec<Rational> {
        let mut nums: Vec<i64> = (1..D).collect();
        nums.shuffle(rng);
        let mut nums: Vec<i64> = nums.into_iter().take(size).collect();
        nums.sort();
        nums.into_iter().map(|a| Rational::new(a, D).expect("den")).collect()
    };
    let fv = pick(rng);
    let gv = pick(rng);
    let f = FiniteNwdSet::new(fv.clone()).map_err(|e| fail("F", err_value(e)))?;
    let g = FiniteNwdSet::new(gv.clone()).map_err(|e| fail("G", err_value(e)))?;
    let ctx = || json!({ "f": fv, "g": gv });
    let m = max_intervals(&f);
    oracle::partition_grid_check(&fv, &m, 2 * D as usize).map_err(|e| fail("max_intervals", json!({ "case": ctx(), "error": e })))?;
    let phi: Vec<(Rational, Rational)> = fv.iter().cloned().zip(gv.iter().cloned()).collect();
    let hat = induced_iso(&phi, &f, &g).map_err(|e| fail("induced_iso", err_value(e)))?;
    let lows: Vec<(Rational, Rational)> = hat.iter().map(|(i, j)| (i.lo().clone(), j.lo().clone())).collect();
    let highs: Vec<(Rational, Rational)> = hat.iter().map(|(i, j)| (i.hi().clone(), j.hi().clone())).collect();
    if !check_order_iso(&lows) || !check_order_iso(&highs) || hat.iter().any(|(i, j)| !i.is_open() || !j.is_open()) {
        return Err(fail("induced order", ctx()));
    }
    let mut budget = rng.gen_range(0..=200usize);
    let mut psi: Vec<Vec<(Rational, Rational)>> = Vec::with_capacity(hat.len());
    for (i, j) in &hat {
        let take = rng.gen_range(0..=budget.min(200 / hat.len()));
        budget -= take;
        let mut xs: Vec<Rational> = (0..take).map(|_| i.lo() + &(&i.length() * &rand_unit(rng, 1 << 20))).collect();
        let mut ys: Vec<Rational> = (0..take).map(|_| j.lo() + &(&j.length() * &rand_unit(rng, 1 << 20))).collect();
        xs.sort();
        xs.dedup();
        ys.sort();
        ys.dedup();
        let n = xs.len().min(ys.len());
        psi.push(xs.into_iter().take(n).zip(ys.into_iter().take(n)).collect());
    }
    let total: usize = psi.iter().map(Vec::len).sum();
    let out = assemble(&phi, &psi, &f, &g).map_err(|e| fail("assemble", json!({ "case": ctx(), "error": e.to_string() })))?;
    if !check_order_iso(&out) || out.len() != phi.len() + total || phi.iter().any(|pr| !out.contains(pr)) {
        return Err(fail("assembled map", ctx()));
    }
    Ok(())
}
