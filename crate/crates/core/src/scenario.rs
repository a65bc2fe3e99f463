//! Scenario files (TOML) and the pipeline that turns one into a report.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mainlemma::{check_certificate, induced_map, little_invariant_check, little_xinf, Caps};
use crate::medini::{check_fix_certificate, fix_bit_extend, medini_add_point, Coloring, MediniCondition, MAX_MEDINI_LEVEL};
use crate::poset::{run_schedule, transcript_is_monotone, AId, Schedule, Task, Universe};
use crate::report::{BRecord, CheckRow, MediniSection, PosetSection, Report, Timing, TowerRecipe, SCHEMA};
use crate::setalg::{bits_to_string, parse_bits, Bits, Tower, UPSet};

/// Levels generated from prefixes, or given outright; not both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TowerSpec {
    pub prefixes: Vec<String>,
    pub levels: Vec<UPSet>,
    pub capacity: usize,
}

impl Default for TowerSpec {
    fn default() -> Self {
        TowerSpec { prefixes: Vec::new(), levels: Vec::new(), capacity: 256 }
    }
}

/// `count` b-points; the first ones start with `prefixes`, the rest with
/// eight seeded random bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BSideSpec {
    pub count: usize,
    pub prefixes: Vec<String>,
    pub classes: usize,
}

impl Default for BSideSpec {
    fn default() -> Self {
        BSideSpec { count: 0, prefixes: Vec::new(), classes: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum MediniTask {
    AddPoint { a: AId },
    /// `k` defaults to one more than the previously fixed bit.
    FixBit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediniSpec {
    /// Defaults to `b_side.classes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(default)]
    pub schedule: Vec<MediniTask>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub x: UPSet,
    #[serde(default)]
    pub tower: TowerSpec,
    #[serde(default)]
    pub b_side: BSideSpec,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medini: Option<MediniSpec>,
}

/// Scenarios shipped with the crate, by name.
pub const DEMOS: &[(&str, &str)] = &[
    ("tower16", include_str!("../scenarios/tower16.toml")),
    ("medini", include_str!("../scenarios/medini.toml")),
    ("empty", include_str!("../scenarios/empty.toml")),
];

pub fn demo(name: &str) -> Option<&'static str> {
    DEMOS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Validation(format!("{field}: {msg}"))
}

impl Scenario {
    /// Parses and validates.
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(invalid("schema", format!("expected {SCHEMA}, found {}", self.schema)));
        }
        if !self.x.is_infinite_coinfinite() {
            return Err(invalid("x", "X must be infinite-coinfinite"));
        }
        let t = &self.tower;
        if !t.prefixes.is_empty() && !t.levels.is_empty() {
            return Err(invalid("tower", "give either prefixes or levels, not both"));
        }
        if t.capacity == 0 {
            return Err(invalid("tower.capacity", "must be positive"));
        }
        for (i, w) in t.prefixes.iter().enumerate() {
            parse_bits(w).map_err(|e| invalid(&format!("tower.prefixes[{i}]"), e))?;
        }
        let b = &self.b_side;
        if b.prefixes.len() > b.count {
            return Err(invalid("b_side.prefixes", format!("{} prefixes for {} points", b.prefixes.len(), b.count)));
        }
        for (i, w) in b.prefixes.iter().enumerate() {
            parse_bits(w).map_err(|e| invalid(&format!("b_side.prefixes[{i}]"), e))?;
        }
        if b.classes == 0 {
            return Err(invalid("b_side.classes", "must be positive"));
        }
        let c = &self.caps;
        if c.search_cap == 0 || c.level_cap == 0 || c.horizon == 0 {
            return Err(invalid("caps", "caps must be positive"));
        }
        for (i, task) in self.schedule.iter().enumerate() {
            if let Task::Meet { k: Some(k) } = task {
                if *k > c.search_cap {
                    return Err(invalid(&format!("schedule[{i}].k"), format!("{k} exceeds search_cap {}", c.search_cap)));
                }
            }
        }
        if let Some(m) = &self.medini {
            if m.classes == Some(0) {
                return Err(invalid("medini.classes", "must be positive"));
            }
            for (i, task) in m.schedule.iter().enumerate() {
                if let MediniTask::FixBit { k: Some(k) } = task {
                    if *k >= MAX_MEDINI_LEVEL {
                        return Err(invalid(&format!("medini.schedule[{i}].k"), format!("must be below {MAX_MEDINI_LEVEL}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Initial tower and its replay recipe.
    pub fn build_tower(&self) -> Result<(Tower, TowerRecipe)> {
        let t = &self.tower;
        if t.levels.is_empty() {
            let prefixes: Vec<Bits> = t.prefixes.iter().map(|w| parse_bits(w)).collect::<Result<_>>()?;
            let capacity = t.capacity.max(prefixes.len() + 1);
            let tower = Tower::generate(self.x.clone(), &prefixes, capacity)?;
            Ok((tower, TowerRecipe::new(self.x.clone(), capacity, Vec::new())))
        } else {
            let mut levels = vec![self.x.clone()];
            levels.extend(t.levels.iter().cloned());
            let tower = Tower::from_levels(levels, t.capacity)?;
            Ok((tower, TowerRecipe::new(self.x.clone(), t.capacity, t.levels.clone())))
        }
    }

    /// Universe with the tower and the declared b-points.
    pub fn build_universe(&self) -> Result<(Universe, TowerRecipe)> {
        let (tower, recipe) = self.build_tower()?;
        let mut uni = Universe::new(tower);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for i in 0..self.b_side.count {
            let w = match self.b_side.prefixes.get(i) {
                Some(w) => parse_bits(w)?,
                None => (0..8).map(|_| rng.gen::<bool>()).collect(),
            };
            uni.mint_b(&w)?;
        }
        Ok((uni, recipe))
    }
}

pub(crate) fn row(name: &str, verdict: std::result::Result<(), String>) -> CheckRow {
    match verdict {
        Ok(()) => CheckRow { name: name.into(), pass: true, detail: None },
        Err(d) => CheckRow { name: name.into(), pass: false, detail: Some(d) },
    }
}

pub(crate) fn increasing_in_x(w: &[usize], x: &UPSet) -> std::result::Result<(), String> {
    if let Some(n) = w.iter().find(|&&n| !x.bit(n)) {
        return Err(format!("{n} ∉ X"));
    }
    if w.windows(2).any(|p| p[0] >= p[1]) {
        return Err("witnessed levels are not strictly increasing".into());
    }
    Ok(())
}

fn poset_stage(sc: &Scenario, uni: &mut Universe, checks: &mut Vec<CheckRow>) -> Result<PosetSection> {
    let out = run_schedule(&sc.schedule, uni, &sc.caps)?;
    let x = uni.x().clone();
    let reg = &uni.registry;
    let q = &out.condition;
    let certs = out.certificates;
    let witnessed: Vec<usize> = certs.iter().map(|c| c.n).collect();
    checks.push(row("poset.partial_iso", if q.is_partial_iso(reg) { Ok(()) } else { Err("not increasing".into()) }));
    checks.push(row(
        "poset.certificates",
        certs
            .iter()
            .enumerate()
            .try_for_each(|(i, c)| check_certificate(q, c, reg, &x).map_err(|e| format!("certificate {i}: {e}"))),
    ));
    checks.push(row(
        "poset.transcript_monotone",
        if transcript_is_monotone(&out.transcript, q) { Ok(()) } else { Err("a step removed or repeated a pair".into()) },
    ));
    let missing: Vec<AId> = sc
        .schedule
        .iter()
        .filter_map(|t| match t {
            Task::AddDomain { a } if q.image(*a, reg).is_none() => Some(*a),
            _ => None,
        })
        .collect();
    checks.push(row(
        "poset.domain_tasks_met",
        if missing.is_empty() { Ok(()) } else { Err(format!("not in the domain: {missing:?}")) },
    ));
    checks.push(row("poset.witnessed", increasing_in_x(&witnessed, &x)));
    let invariant = little_invariant_check(&witnessed, q.pairs(), uni);
    checks.push(row(
        "poset.little_invariant",
        if invariant.pass { Ok(()) } else { Err("some (n, α) pair violates the dichotomy".into()) },
    ));
    let xinf = little_xinf(&induced_map(q.pairs(), &uni.registry), &x, sc.caps.horizon)?;
    let outside: Vec<usize> = witnessed.iter().copied().filter(|n| !xinf.contains(n)).collect();
    checks.push(row(
        "poset.witnessed_in_little_xinf",
        if outside.is_empty() { Ok(()) } else { Err(format!("not in X_∞: {outside:?}")) },
    ));
    Ok(PosetSection {
        condition: out.condition,
        certificates: certs,
        transcript: out.transcript,
        witnessed,
        invariant,
        little_xinf: xinf.into_iter().collect(),
    })
}

fn medini_stage(sc: &Scenario, spec: &MediniSpec, uni: &mut Universe, checks: &mut Vec<CheckRow>) -> Result<MediniSection> {
    let classes = spec.classes.unwrap_or(sc.b_side.classes);
    let mut coloring = Coloring::round_robin(classes, &uni.registry)?;
    let mut p = MediniCondition::minimal();
    let mut certificates = Vec::new();
    let mut chain_ok = Ok(());
    for (i, task) in spec.schedule.iter().enumerate() {
        let q = match *task {
            MediniTask::AddPoint { a } => medini_add_point(&p, a, &mut coloring, uni)?,
            MediniTask::FixBit { k } => {
                let k = k.unwrap_or_else(|| certificates.last().map_or(0, |c: &crate::medini::FixCertificate| c.n + 1));
                let (q, _, cert) = fix_bit_extend(&p, k, uni)?;
                certificates.push(cert);
                q
            }
        };
        if chain_ok.is_ok() && !q.extends(&p) {
            chain_ok = Err(format!("step {i} does not extend its predecessor"));
        }
        p = q;
    }
    let witnessed: Vec<usize> = certificates.iter().map(|c| c.n).collect();
    checks.push(row("medini.chain_extends", chain_ok));
    checks.push(row("medini.valid", p.validate(&coloring, &uni.registry)));
    checks.push(row(
        "medini.certificates",
        certificates.iter().try_for_each(|c| match check_fix_certificate(&p, c.n) {
            Ok(v) => v,
            Err(e) => Err(e.to_string()),
        }),
    ));
    checks.push(row("medini.witnessed", increasing_in_x(&witnessed, uni.x())));
    let invariant = little_invariant_check(&witnessed, &p.f, uni);
    checks.push(row(
        "medini.little_invariant",
        if invariant.pass { Ok(()) } else { Err("some (n, α) pair violates the dichotomy".into()) },
    ));
    Ok(MediniSection { coloring, condition: p, certificates, witnessed, invariant })
}

/// Runs the whole pipeline. Deterministic in the scenario (seed included);
/// only `timing` varies between runs.
pub fn run(sc: &Scenario) -> Result<Report> {
    sc.validate()?;
    let start = Instant::now();
    let (mut uni, mut recipe) = sc.build_universe()?;
    let mut checks = Vec::new();
    let poset = if !sc.schedule.is_empty() || sc.medini.is_none() {
        Some(poset_stage(sc, &mut uni, &mut checks)?)
    } else {
        None
    };
    let medini = match &sc.medini {
        Some(spec) => Some(medini_stage(sc, spec, &mut uni, &mut checks)?),
        None => None,
    };
    checks.push(row("tower.valid", uni.tower.validate().map_err(|e| e.to_string())));
    recipe.record(&uni.tower);
    let b_points = uni
        .registry
        .b_points()
        .iter()
        .map(|b| BRecord { id: b.id, set: b.set.clone(), value: b.value.clone() })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        schema: SCHEMA,
        scenario: sc.clone(),
        tower: recipe,
        a_count: uni.registry.a_len(),
        b_points,
        poset,
        medini,
        checks,
        pass,
        timing: Timing { run_ms: start.elapsed().as_millis() as u64 },
    })
}

/// Request strings for minted levels, in order.
pub(crate) fn request_strings(t: &Tower, from: usize) -> Vec<String> {
    (from..t.len()).map(|a| t.request(a).map_or_else(String::new, |w| bits_to_string(w))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
schema = 1
name = "small"
seed = 3
x = "|10"
schedule = [
  { task = "add_domain", a = 1 },
  { task = "meet" },
  { task = "add_domain", a = 2 },
  { task = "meet" },
]

[tower]
prefixes = ["0000", "00001"]
capacity = 128

[b_side]
count = 2
prefixes = ["1"]
classes = 2

[medini]
schedule = [
  { task = "add_point", a = 1 },
  { task = "fix_bit" },
  { task = "fix_bit" },
]
"#;

    #[test]
    fn small_scenario_passes() {
        let sc = Scenario::from_toml(SMALL).unwrap();
        let r = run(&sc).unwrap();
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.pass).collect();
        assert!(r.pass, "{failed:?}");
        assert_eq!(r.poset.as_ref().unwrap().certificates.len(), 2);
        assert_eq!(r.medini.as_ref().unwrap().certificates.len(), 2);
    }

    #[test]
    fn validation_messages() {
        let bad = SMALL.replace("x = \"|10\"", "x = \"101|0\"");
        let e = Scenario::from_toml(&bad).unwrap_err().to_string();
        assert!(e.contains("X must be infinite-coinfinite"), "{e}");
        let bad = SMALL.replace("seed = 3", "seed = 3\ncolour = 1");
        assert!(Scenario::from_toml(&bad).is_err());
        let bad = SMALL.replace("schema = 1", "schema = 2");
        assert!(Scenario::from_toml(&bad).unwrap_err().to_string().contains("schema"));
    }

    #[test]
    fn empty_schedule_is_vacuous() {
        let sc = Scenario::from_toml("schema = 1\nname = \"e\"\nx = \"|10\"\n").unwrap();
        let r = run(&sc).unwrap();
        assert!(r.pass);
        assert!(r.poset.unwrap().condition.is_empty());
    }

    #[test]
    fn demos_parse() {
        for (name, text) in DEMOS {
            let sc = Scenario::from_toml(text).unwrap();
            assert_eq!(sc.name, *name);
        }
        assert!(demo("nope").is_none());
    }
}
