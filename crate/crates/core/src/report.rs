//! JSON reports and their independent re-verification.
//!
//! A report carries everything `check` needs: the tower as a replay recipe
//! (base set, explicit levels, the prefix request behind every minted level),
//! every b-point with its value, conditions as id pairs, and certificates.

use serde::{Deserialize, Serialize};

use crate::cantor::lambda_value;
use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::mainlemma::{
    check_certificate, induced_map, little_invariant_check, little_xinf, ContainmentCertificate, InvariantReport,
};
use crate::medini::{check_fix_certificate, Coloring, FixCertificate, MediniCondition};
use crate::poset::{transcript_is_monotone, BId, Condition, Task, TranscriptStep, Universe};
use crate::scenario::{increasing_in_x, request_strings, Scenario};
use crate::setalg::{parse_bits, Tower, UPSet};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerRecipe {
    pub x: UPSet,
    pub capacity: usize,
    /// Explicit levels after `X`.
    pub levels: Vec<UPSet>,
    /// Complement prefixes of the minted levels, in minting order.
    pub requests: Vec<String>,
}

impl TowerRecipe {
    pub fn new(x: UPSet, capacity: usize, levels: Vec<UPSet>) -> Self {
        TowerRecipe { x, capacity, levels, requests: Vec::new() }
    }

    pub fn record(&mut self, t: &Tower) {
        self.requests = request_strings(t, 1 + self.levels.len());
    }

    pub fn build(&self) -> Result<Tower> {
        let mut levels = vec![self.x.clone()];
        levels.extend(self.levels.iter().cloned());
        let mut t = Tower::from_levels(levels, self.capacity)?;
        for w in &self.requests {
            t.mint_below(&parse_bits(w)?)?;
        }
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BRecord {
    pub id: BId,
    pub set: UPSet,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetSection {
    pub condition: Condition,
    pub certificates: Vec<ContainmentCertificate>,
    pub transcript: Vec<TranscriptStep>,
    pub witnessed: Vec<usize>,
    pub invariant: InvariantReport,
    pub little_xinf: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediniSection {
    pub coloring: Coloring,
    pub condition: MediniCondition,
    pub certificates: Vec<FixCertificate>,
    pub witnessed: Vec<usize>,
    pub invariant: InvariantReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub run_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema: u32,
    pub scenario: Scenario,
    pub tower: TowerRecipe,
    pub a_count: usize,
    pub b_points: Vec<BRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poset: Option<PosetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medini: Option<MediniSection>,
    pub checks: Vec<CheckRow>,
    pub pass: bool,
    pub timing: Timing,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// The JSON with `timing` zeroed, for determinism comparisons.
    pub fn to_json_untimed(&self) -> String {
        let mut r = self.clone();
        r.timing = Timing { run_ms: 0 };
        r.to_json()
    }
}

/// Result of re-verifying a report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub failures: Vec<String>,
    pub certificates: usize,
}

impl CheckOutcome {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Why a report could not be checked at all.
#[derive(Debug)]
pub enum CheckError {
    /// Not JSON.
    Malformed(String),
    /// JSON whose content does not fit the schema; located by path.
    Data(String),
}

impl std::fmt::Display for CheckError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckError::Malformed(m) => write!(f, "malformed report: {m}"),
            CheckError::Data(m) => write!(f, "invalid report data: {m}"),
        }
    }
}

pub fn parse_report(text: &str) -> std::result::Result<Report, CheckError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CheckError::Malformed(e.to_string()))?;
    serde_path_to_error::deserialize(value).map_err(|e| CheckError::Data(format!("at {}: {}", e.path(), e.inner())))
}

/// Re-verifies a report from its own contents.
pub fn check_text(text: &str) -> std::result::Result<CheckOutcome, CheckError> {
    let r = parse_report(text)?;
    Ok(check_report(&r))
}

pub fn check_report(r: &Report) -> CheckOutcome {
    let mut failures = Vec::new();
    let certificates = r.poset.as_ref().map_or(0, |p| p.certificates.len())
        + r.medini.as_ref().map_or(0, |m| m.certificates.len());
    match verify(r, &mut failures) {
        Ok(()) => {}
        Err(e) => failures.push(e.to_string()),
    }
    let claimed: Vec<&str> = r.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if !claimed.is_empty() {
        failures.push(format!("report records failed checks: {}", claimed.join(", ")));
    }
    if r.pass != r.checks.iter().all(|c| c.pass) {
        failures.push("pass flag disagrees with the check rows".into());
    }
    CheckOutcome { failures, certificates }
}

fn verify(r: &Report, failures: &mut Vec<String>) -> Result<()> {
    let mut fail = |msg: String| failures.push(msg);
    if r.schema != SCHEMA {
        fail(format!("schema: expected {SCHEMA}, found {}", r.schema));
    }
    r.scenario.validate()?;
    if r.tower.x != r.scenario.x {
        fail("tower.x differs from scenario.x".into());
    }
    let tower = r.tower.build()?;
    tower.validate()?;
    if tower.len() != r.a_count {
        fail(format!("a_count: recipe yields {} a-points, report says {}", tower.len(), r.a_count));
    }
    let mut uni = Universe::new(tower);
    for (i, b) in r.b_points.iter().enumerate() {
        if b.id.0 as usize != i {
            fail(format!("b_points[{i}].id: expected b{i}, found {}", b.id));
        }
        uni.add_b(b.set.clone()).map_err(|e| Error::Validation(format!("b_points[{i}]: {e}")))?;
        if lambda_value(&b.set) != b.value {
            fail(format!("b_points[{i}].value: {} is not λ({})", b.value, b.set));
        }
    }
    let x = uni.x().clone();
    if let Some(p) = &r.poset {
        let q = Condition::from_pairs(p.condition.pairs().to_vec(), &uni.registry)
            .map_err(|e| Error::Validation(format!("poset.condition: {e}")))?;
        if q != p.condition {
            fail("poset.condition: pairs are not sorted by a-value".into());
        }
        if !q.is_partial_iso(&uni.registry) {
            fail("poset.condition: not a partial isomorphism".into());
        }
        for (i, c) in p.certificates.iter().enumerate() {
            if let Err(e) = check_certificate(&q, c, &uni.registry, &x) {
                fail(format!("poset.certificates[{i}]: {e}"));
            }
        }
        let w: Vec<usize> = p.certificates.iter().map(|c| c.n).collect();
        if w != p.witnessed {
            fail("poset.witnessed: differs from the certificates' levels".into());
        }
        if let Err(e) = increasing_in_x(&p.witnessed, &x) {
            fail(format!("poset.witnessed: {e}"));
        }
        if !transcript_is_monotone(&p.transcript, &q) {
            fail("poset.transcript: not a monotone build-up of the condition".into());
        }
        for step in &p.transcript {
            if let Task::AddDomain { a } = step.task {
                if q.image(a, &uni.registry).is_none() {
                    fail(format!("poset.transcript[{}]: {a} is not in the final domain", step.step));
                }
            }
        }
        let inv = little_invariant_check(&p.witnessed, q.pairs(), &uni);
        if inv != p.invariant {
            fail("poset.invariant: recomputed table differs".into());
        }
        if !inv.pass {
            fail("poset.invariant: dichotomy fails".into());
        }
        let xinf: Vec<usize> =
            little_xinf(&induced_map(q.pairs(), &uni.registry), &x, r.scenario.caps.horizon)?.into_iter().collect();
        if xinf != p.little_xinf {
            fail("poset.little_xinf: recomputed set differs".into());
        }
        if let Some(n) = p.witnessed.iter().find(|n| !xinf.contains(n)) {
            fail(format!("poset.witnessed: {n} is not in little_xinf"));
        }
    }
    if let Some(m) = &r.medini {
        if let Err(e) = m.condition.validate(&m.coloring, &uni.registry) {
            fail(format!("medini.condition: {e}"));
        }
        for (i, c) in m.certificates.iter().enumerate() {
            match check_fix_certificate(&m.condition, c.n) {
                Ok(Ok(())) => {}
                Ok(Err(e)) => fail(format!("medini.certificates[{i}]: {e}")),
                Err(e) => fail(format!("medini.certificates[{i}]: {e}")),
            }
        }
        let w: Vec<usize> = m.certificates.iter().map(|c| c.n).collect();
        if w != m.witnessed {
            fail("medini.witnessed: differs from the certificates' levels".into());
        }
        if let Err(e) = increasing_in_x(&m.witnessed, &x) {
            fail(format!("medini.witnessed: {e}"));
        }
        let inv = little_invariant_check(&m.witnessed, &m.condition.f, &uni);
        if inv != m.invariant {
            fail("medini.invariant: recomputed table differs".into());
        }
        if !inv.pass {
            fail("medini.invariant: dichotomy fails".into());
        }
    }
    Ok(())
}
