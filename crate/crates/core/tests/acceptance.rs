//! One line per acceptance criterion, written straight to stderr so it shows
//! even when test output is captured. The test fails if any criterion does.

use std::io::Write;
use std::time::{Duration, Instant};

use towerforce::cantor::cylinder_image;
use towerforce::oracle;
use towerforce::report::check_text;
use towerforce::scenario::{demo, run, Scenario};
use towerforce::suite::run_suite;

const SEED: u64 = 20240601;

// time budgets, pinned
const FACT3_BUDGET: Duration = Duration::from_secs(5);
const PROP25_BUDGET: Duration = Duration::from_secs(10);
const DUALITY_BUDGET: Duration = Duration::from_secs(10);
const PER_SCENARIO_BUDGET_MS: f64 = 1000.0;
const TOWER16_BUDGET: Duration = Duration::from_secs(30);
const DECOMP_BUDGET: Duration = Duration::from_secs(10);
const AXIOMS_BUDGET: Duration = Duration::from_secs(10);

// exact arithmetic throughout: every comparison below is equality or order
// on rationals, so there is no numeric tolerance to pin

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(lines: &[Line]) {
    let mut err = std::io::stderr().lock();
    for l in lines {
        let _ = writeln!(err, "criterion {} [{}] {}: {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
    }
}

fn within(t: Duration, budget: Duration) -> bool {
    t < budget
}

fn fact3() -> Line {
    let start = Instant::now();
    let bad: Vec<usize> = (0..=10)
        .filter(|&n| {
            let got: Vec<_> = cylinder_image(n).iter().map(|g| g.interval()).collect();
            got != oracle::cylinder_image_bruteforce(n)
        })
        .collect();
    let t = start.elapsed();
    Line {
        id: 1,
        name: "cylinder images equal brute force, n ≤ 10",
        pass: bad.is_empty() && within(t, FACT3_BUDGET),
        detail: format!("mismatches {bad:?}, {t:.2?} (budget {FACT3_BUDGET:?})"),
    }
}

fn battery(id: usize, name: &'static str, selector: &str, trials: usize, total: Option<Duration>, per_trial_ms: Option<f64>) -> Line {
    let start = Instant::now();
    let s = run_suite(selector, Some(trials), SEED).expect("known selector");
    let t = start.elapsed();
    let time_ok = total.is_none_or(|b| within(t, b)) && per_trial_ms.is_none_or(|b| s.max_trial_ms < b);
    let mut detail = format!("{}/{} passed, {t:.2?}, slowest trial {:.1} ms", s.passed, s.trials, s.max_trial_ms);
    if let Some(c) = &s.counterexample {
        detail.push_str(&format!("; counterexample (seed {}): {}", c.seed, c.data));
    }
    Line { id, name, pass: s.passed == trials && time_ok, detail }
}

fn tower16() -> (Line, Option<String>) {
    let sc = Scenario::from_toml(demo("tower16").expect("bundled")).expect("valid");
    let start = Instant::now();
    let r = match run(&sc) {
        Ok(r) => r,
        Err(e) => {
            return (Line { id: 5, name: "tower16 pipeline", pass: false, detail: e.to_string() }, None);
        }
    };
    let t = start.elapsed();
    let p = r.poset.as_ref().expect("poset stage ran");
    let w = &p.witnessed;
    let in_x = w.iter().all(|&n| sc.x.bit(n));
    let increasing = w.windows(2).all(|v| v[0] < v[1]);
    let pairs_checked: usize = p.invariant.rows.iter().map(|row| row.checked).sum();
    let rows_ok = p.invariant.pass
        && p.invariant.rows.len() == w.len()
        && p.invariant.rows.iter().all(|row| row.violations.is_empty());
    let in_xinf = w.iter().all(|n| p.little_xinf.contains(n));
    let pass = r.pass && w.len() == 12 && p.certificates.len() == 12 && in_x && increasing && rows_ok && in_xinf && within(t, TOWER16_BUDGET);
    let detail = format!(
        "|W| = {}, W = {w:?}, W ⊆ X {in_x}, increasing {increasing}, invariant over {pairs_checked} (n, α) pairs {rows_ok}, W ⊆ little_xinf(N = {}) {in_xinf}, {t:.2?} (budget {TOWER16_BUDGET:?})",
        w.len(),
        sc.caps.horizon
    );
    (Line { id: 5, name: "tower16 pipeline", pass, detail }, Some(r.to_json()))
}

fn determinism(tower16_json: Option<&str>) -> Line {
    let mut problems = Vec::new();
    let mut checked = 0;
    for name in ["empty", "medini"] {
        let sc = Scenario::from_toml(demo(name).expect("bundled")).expect("valid");
        let a = run(&sc).expect("runs");
        let b = run(&sc).expect("runs");
        if a.to_json_untimed() != b.to_json_untimed() {
            problems.push(format!("{name}: reruns differ"));
        }
        match check_text(&a.to_json()) {
            Ok(o) if o.pass() => checked += o.certificates,
            Ok(o) => problems.push(format!("{name}: {:?}", o.failures)),
            Err(e) => problems.push(format!("{name}: {e}")),
        }
    }
    match tower16_json {
        Some(json) => match check_text(json) {
            Ok(o) if o.pass() => checked += o.certificates,
            Ok(o) => problems.push(format!("tower16: {:?}", o.failures)),
            Err(e) => problems.push(format!("tower16: {e}")),
        },
        None => problems.push("tower16 produced no report".into()),
    }
    // a rerun of tower16 must match too; compared on the untimed form
    let sc = Scenario::from_toml(demo("tower16").expect("bundled")).expect("valid");
    if let (Some(json), Ok(again)) = (tower16_json, run(&sc)) {
        let mut v: serde_json::Value = serde_json::from_str(json).expect("json");
        v.as_object_mut().expect("object").remove("timing");
        let mut u: serde_json::Value = serde_json::from_str(&again.to_json()).expect("json");
        u.as_object_mut().expect("object").remove("timing");
        if u != v {
            problems.push("tower16: reruns differ".into());
        }
    }
    Line {
        id: 9,
        name: "determinism and independent re-check",
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("reruns identical; check re-verified {checked} certificates")
        } else {
            problems.join("; ")
        },
    }
}

#[test]
fn acceptance() {
    let mut lines = vec![fact3()];
    lines.push(battery(2, "good interval inside 1000 random intervals", "cantor.prop25", 1000, Some(PROP25_BUDGET), None));
    lines.push(battery(3, "λ/cylinder duality on 500 sets, n ≤ 12", "cantor.duality", 500, Some(DUALITY_BUDGET), None));
    lines.push(battery(4, "containment density, 200 scenarios", "mainlemma.density", 200, None, Some(PER_SCENARIO_BUDGET_MS)));
    let (l5, json) = tower16();
    lines.push(l5);
    lines.push(battery(6, "bit-fixing density, 200 scenarios", "medini.density", 200, None, Some(PER_SCENARIO_BUDGET_MS)));
    lines.push(battery(7, "interval decomposition skeleton, 200 triples", "decomp.skeleton", 200, Some(DECOMP_BUDGET), None));
    lines.push(battery(8, "restriction and dense mapping, 300 trials", "poset.axioms", 300, Some(AXIOMS_BUDGET), None));
    lines.push(determinism(json.as_deref()));
    report(&lines);
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
