//! Scenario files: a base ring, an algebra, an action and a list of tasks with
//! expected values. Running one yields a deterministic report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::action::{Action, AlgebraAutomorphism, ConstantAction, Derivation, HopfAction, ProductAction};
use crate::algebra::{AlgebraBuilder, Element, NormalFormAlgebra};
use crate::base_change::{self, BaseChange};
use crate::cohomology;
use crate::curves::{self, NodeModel, SmoothPointModel};
use crate::error::{Error, Result};
use crate::group::ConstantGroup;
use crate::invariants::{self, InducedData, SpanLabel, SubalgebraSpan};
use crate::parse::{parse_element, parse_ring};
use crate::polarize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub spec: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub vars: Vec<String>,
    /// Variables that do not count towards the truncation degree.
    #[serde(default)]
    pub ungraded: Vec<String>,
    /// Monomials set to zero, e.g. `"x*y"`, `"b^8"`.
    #[serde(default)]
    pub relations: Vec<String>,
    /// Total-degree truncation; `0` means none, absent means the library default.
    pub truncation: Option<u32>,
    #[serde(default = "one")]
    pub copies: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub element: String,
    pub images: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ActionKindSpec {
    Trivial,
    Constant,
    AlphaP,
    Product,
    Induced,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub kind: ActionKindSpec,
    /// `Z/n`, products written `Z/2 x Z/2`, or `trivial`.
    pub group: Option<String>,
    #[serde(default)]
    pub generators: Vec<GeneratorSpec>,
    /// One map variable -> image per derivation; unlisted variables go to 0.
    #[serde(default)]
    pub derivations: Vec<BTreeMap<String, String>>,
    /// For induced actions: labels of `H` inside the group; `generators` then act on the algebra as `H`.
    pub subgroup: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Paper,
    Trivial,
    Derived,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub op: String,
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default)]
    pub expect: toml::Table,
    pub provenance: Option<Provenance>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub tags: Vec<String>,
    pub description: Option<String>,
    pub ring: Option<RingSpec>,
    pub algebra: Option<AlgebraSpec>,
    pub action: Option<ActionSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    /// Where the scenario came from, for error locations.
    #[serde(skip)]
    pub origin: String,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

impl Scenario {
    /// Parses and statically checks a scenario; `origin` names the source in errors.
    pub fn parse(src: &str, origin: &str) -> Result<Scenario> {
        let mut sc: Scenario = toml::from_str(src).map_err(|e| {
            let loc = match e.span() {
                Some(span) => {
                    let (l, c) = line_col(src, span.start);
                    format!("{origin}:{l}:{c}")
                }
                None => origin.to_string(),
            };
            Error::parse(loc, e.message().to_string())
        })?;
        for (i, t) in sc.tasks.iter().enumerate() {
            if !t.expect.is_empty() && t.provenance.is_none() {
                return Err(Error::parse(
                    format!("{origin}: tasks[{i}]"),
                    "expected values need a provenance (paper, trivial or derived)",
                ));
            }
            if !KNOWN_OPS.contains(&t.op.as_str()) {
                return Err(Error::parse(format!("{origin}: tasks[{i}].op"), format!("unknown operation `{}`", t.op)));
            }
        }
        if sc.action.is_some() && sc.algebra.is_none() {
            return Err(Error::parse(origin, "an action needs an [algebra]"));
        }
        if sc.algebra.is_some() && sc.ring.is_none() {
            return Err(Error::parse(origin, "an algebra needs a [ring]"));
        }
        sc.origin = origin.to_string();
        Ok(sc)
    }

    pub fn from_path(path: &Path) -> Result<Scenario> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::parse(path.display().to_string(), format!("cannot read: {e}")))?;
        Scenario::parse(&src, &path.display().to_string())
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }

    /// Builds the algebra and action, with `truncation` overriding the file's value.
    pub fn build(&self, truncation: Option<u32>) -> Result<Built> {
        self.build_inner(truncation).map_err(|e| match e {
            Error::Parse { location, message } if !self.origin.is_empty() => {
                Error::parse(format!("{}: {location}", self.origin), message)
            }
            other => other,
        })
    }

    fn build_inner(&self, truncation: Option<u32>) -> Result<Built> {
        let (Some(ring), Some(alg_spec)) = (&self.ring, &self.algebra) else {
            return Ok(Built::default());
        };
        let base = parse_ring(&ring.spec).map_err(|e| locate(e, "ring.spec"))?;
        let mut b = AlgebraBuilder::new(base);
        for v in &alg_spec.vars {
            b = if alg_spec.ungraded.contains(v) { b.ungraded_var(v) } else { b.var(v) };
        }
        for (i, r) in alg_spec.relations.iter().enumerate() {
            let factors = parse_monomial(r).map_err(|e| locate(e, &format!("algebra.relations[{i}]")))?;
            let refs: Vec<(&str, u32)> = factors.iter().map(|(n, e)| (n.as_str(), *e)).collect();
            b = b.relation(&refs);
        }
        let trunc = match truncation.or(alg_spec.truncation) {
            Some(0) => Some(None),
            Some(n) => Some(Some(n)),
            None => None,
        };
        if let Some(t) = trunc {
            b = b.truncation(t);
        }
        let alg = b.copies(alg_spec.copies).build()?;
        let Some(act) = &self.action else {
            return Ok(Built { algebra: Some(alg), ..Built::default() });
        };
        let group = || -> Result<ConstantGroup> {
            parse_group(act.group.as_deref().ok_or_else(|| Error::parse("action.group", "missing group"))?)
        };
        let constant_on = |alg: &Arc<NormalFormAlgebra>, group: ConstantGroup| -> Result<ConstantAction> {
            let mut idx = Vec::new();
            let mut autos = Vec::new();
            for (i, g) in act.generators.iter().enumerate() {
                idx.push(
                    group
                        .index_of_label(&g.element)
                        .ok_or_else(|| Error::parse(format!("action.generators[{i}].element"), format!("no element `{}`", g.element)))?,
                );
                let named = g
                    .images
                    .iter()
                    .map(|(v, s)| {
                        let e = parse_element(alg, s).map_err(|e| locate(e, &format!("action.generators[{i}].images.{v}")))?;
                        Ok((v.clone(), e))
                    })
                    .collect::<Result<Vec<_>>>()?;
                autos.push(AlgebraAutomorphism::from_named(alg, &named)?);
            }
            ConstantAction::new(alg, group, &idx, autos)
        };
        let hopf_on = |alg: &Arc<NormalFormAlgebra>| -> Result<HopfAction> {
            let names = alg.var_names();
            let mut ds = Vec::new();
            for (i, d) in act.derivations.iter().enumerate() {
                let mut images = vec![Element::zero(alg); names.len()];
                for (v, s) in d {
                    let k = names.iter().position(|n| n == v).ok_or_else(|| Error::UnknownVariable(v.clone()))?;
                    images[k] = parse_element(alg, s).map_err(|e| locate(e, &format!("action.derivations[{i}].{v}")))?;
                }
                ds.push(Derivation::new(alg, images)?);
            }
            HopfAction::new(alg, ds)
        };
        let built = match act.kind {
            ActionKindSpec::Trivial => Built { algebra: Some(alg.clone()), action: Some(Action::trivial(&alg)), induced: None },
            ActionKindSpec::Constant => {
                let a = Action::constant(constant_on(&alg, group()?)?)?;
                Built { algebra: Some(alg), action: Some(a), induced: None }
            }
            ActionKindSpec::AlphaP => {
                let a = Action::hopf(hopf_on(&alg)?)?;
                Built { algebra: Some(alg), action: Some(a), induced: None }
            }
            ActionKindSpec::Product => {
                let p = ProductAction::new(hopf_on(&alg)?, constant_on(&alg, group()?)?)?;
                Built { algebra: Some(alg), action: Some(Action::product(p)?), induced: None }
            }
            ActionKindSpec::Induced => {
                let g = group()?;
                let labels = act.subgroup.as_ref().ok_or_else(|| Error::parse("action.subgroup", "missing subgroup"))?;
                let sub = element_indices(&g, labels, "action.subgroup")?;
                let (h, _) = g.subgroup_as_group(&sub)?;
                let h_action = constant_on(&alg, h)?;
                let data = invariants::induced_action(&g, &sub, &h_action)?;
                let a = Action::constant(data.action.clone())?;
                Built { algebra: Some(data.algebra.clone()), action: Some(a), induced: Some(data) }
            }
        };
        Ok(built)
    }
}

fn locate(e: Error, field: &str) -> Error {
    match e {
        Error::Parse { location, message } => Error::parse(format!("{field} {location}"), message),
        other => other,
    }
}

/// `x^2*y` as `[("x", 2), ("y", 1)]`.
fn parse_monomial(s: &str) -> Result<Vec<(String, u32)>> {
    s.split('*')
        .map(|f| {
            let f = f.trim();
            let (name, e) = match f.split_once('^') {
                Some((n, e)) => (n.trim(), e.trim().parse::<u32>().map_err(|_| Error::parse(f, "bad exponent"))?),
                None => (f, 1),
            };
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::parse(f, "expected a variable name"));
            }
            Ok((name.to_string(), e))
        })
        .collect()
}

/// `Z/n`, `Z/2 x Z/3`, `trivial`.
pub fn parse_group(s: &str) -> Result<ConstantGroup> {
    let s = s.trim();
    if s == "trivial" || s == "1" {
        return Ok(ConstantGroup::trivial());
    }
    let mut out: Option<ConstantGroup> = None;
    for part in s.split(" x ") {
        let n = part
            .trim()
            .strip_prefix("Z/")
            .and_then(|n| n.trim().parse::<usize>().ok())
            .filter(|&n| (1..=64).contains(&n))
            .ok_or_else(|| Error::parse(format!("group `{s}`"), format!("expected Z/n, got `{part}`")))?;
        let c = ConstantGroup::cyclic(n)?;
        out = Some(match out {
            Some(g) => g.product(&c),
            None => c,
        });
    }
    out.ok_or_else(|| Error::parse(format!("group `{s}`"), "empty group"))
}

fn element_indices(g: &ConstantGroup, labels: &[String], field: &str) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| g.index_of_label(l).ok_or_else(|| Error::parse(field, format!("no element `{l}`"))))
        .collect()
}

/// The objects a scenario describes.
#[derive(Clone, Debug, Default)]
pub struct Built {
    pub algebra: Option<Arc<NormalFormAlgebra>>,
    pub action: Option<Action>,
    pub induced: Option<InducedData>,
}

impl Built {
    fn action(&self) -> Result<&Action> {
        self.action.as_ref().ok_or_else(|| Error::Precondition("the scenario has no action".into()))
    }

    fn constant(&self) -> Result<&ConstantAction> {
        self.action()?
            .as_constant()
            .ok_or_else(|| Error::Precondition("the operation needs a constant group action".into()))
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Gated,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Gated => "gated",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub op: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_degree: Option<u32>,
    pub artifacts: Map<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub schema: u32,
    pub scenario: String,
    pub tags: Vec<String>,
    pub truncation: Option<u32>,
    pub outcome: Outcome,
    pub tasks: Vec<TaskReport>,
    pub timing_ms: u64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub truncation: Option<u32>,
}

/// Runs every task in order; a build failure fails every task.
pub fn run(sc: &Scenario, opts: &RunOptions) -> ScenarioReport {
    let start = Instant::now();
    let built = sc.build(opts.truncation);
    let tasks: Vec<TaskReport> = sc
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| match &built {
            Ok(b) => run_task(b, i, t),
            Err(e) => TaskReport {
                index: i,
                op: t.op.clone(),
                outcome: if e.is_gated() { Outcome::Gated } else { Outcome::Fail },
                provenance: t.provenance,
                certified_degree: None,
                artifacts: Map::new(),
                mismatches: Vec::new(),
                message: Some(format!("scenario does not build: {e}")),
            },
        })
        .collect();
    let outcome = if tasks.iter().any(|t| t.outcome == Outcome::Fail) { Outcome::Fail } else { Outcome::Pass };
    let truncation = built.ok().and_then(|b| b.algebra.and_then(|a| a.truncation()));
    ScenarioReport {
        schema: SCHEMA_VERSION,
        scenario: sc.name.clone(),
        tags: sc.tags.clone(),
        truncation,
        outcome,
        tasks,
        timing_ms: start.elapsed().as_millis() as u64,
    }
}

struct TaskOutput {
    ok: bool,
    artifacts: Map<String, Value>,
    certified_degree: Option<u32>,
}

impl TaskOutput {
    fn new(ok: bool, artifacts: Map<String, Value>) -> Self {
        TaskOutput { ok, artifacts, certified_degree: None }
    }
}

fn run_task(built: &Built, index: usize, task: &TaskSpec) -> TaskReport {
    let expected_outcome = task.expect.get("outcome").and_then(|v| v.as_str()).map(str::to_string);
    let mut report = TaskReport {
        index,
        op: task.op.clone(),
        outcome: Outcome::Pass,
        provenance: task.provenance,
        certified_degree: None,
        artifacts: Map::new(),
        mismatches: Vec::new(),
        message: None,
    };
    match execute(built, task) {
        Ok(out) => {
            report.artifacts = out.artifacts;
            report.certified_degree = out.certified_degree;
            for (k, v) in &task.expect {
                if k == "outcome" {
                    continue;
                }
                let want = serde_json::to_value(v).unwrap_or(Value::Null);
                match report.artifacts.get(k) {
                    Some(got) if *got == want => {}
                    Some(got) => report.mismatches.push(format!("{k}: expected {want}, got {got}")),
                    None => report.mismatches.push(format!("{k}: expected {want}, not produced")),
                }
            }
            if !out.ok {
                report.message = Some("the operation's own check failed".into());
            }
            report.outcome = if out.ok && report.mismatches.is_empty() { Outcome::Pass } else { Outcome::Fail };
            if let Some(want) = &expected_outcome {
                if want != "pass" {
                    report.mismatches.push(format!("outcome: expected {want}, got pass"));
                    report.outcome = Outcome::Fail;
                }
            }
        }
        Err(e) if e.is_gated() => {
            report.message = Some(e.to_string());
            report.outcome = Outcome::Gated;
            if expected_outcome.as_deref().is_some_and(|w| w != "gated") {
                report.mismatches.push("outcome: expected pass, got gated".into());
                report.outcome = Outcome::Fail;
            }
        }
        Err(e) => {
            report.message = Some(e.to_string());
            report.outcome = Outcome::Fail;
        }
    }
    report
}

pub const KNOWN_OPS: &[&str] = &[
    "describe",
    "invariants",
    "kl",
    "compare",
    "compare_generated",
    "norm",
    "char_poly",
    "cayley_hamilton",
    "det_vs_orbit",
    "etale_power_identity",
    "gabber",
    "free_on_points",
    "extraction",
    "induced_identities",
    "smooth_invariants",
    "cogenerated",
    "node_decompose",
    "node_invariants",
    "node_sigma",
    "comparison_maps",
    "radicial",
    "exchange_criterion",
    "quotient_commutes",
    "polarization",
    "sum_expansion",
    "verify_identity",
    "theta_h1",
    "restriction_inflation",
    "composite",
];

fn param<'a>(task: &'a TaskSpec, key: &str) -> Result<&'a toml::Value> {
    task.params
        .get(key)
        .ok_or_else(|| Error::parse(format!("params.{key}"), "missing parameter"))
}

fn param_str<'a>(task: &'a TaskSpec, key: &str) -> Result<&'a str> {
    param(task, key)?
        .as_str()
        .ok_or_else(|| Error::parse(format!("params.{key}"), "expected a string"))
}

fn param_u64(task: &TaskSpec, key: &str, default: Option<u64>) -> Result<u64> {
    match task.params.get(key) {
        Some(v) => v
            .as_integer()
            .and_then(|i| u64::try_from(i).ok())
            .ok_or_else(|| Error::parse(format!("params.{key}"), "expected a nonnegative integer")),
        None => default.ok_or_else(|| Error::parse(format!("params.{key}"), "missing parameter")),
    }
}

fn param_strings(task: &TaskSpec, key: &str) -> Result<Vec<String>> {
    param(task, key)?
        .as_array()
        .and_then(|a| a.iter().map(|v| v.as_str().map(str::to_string)).collect())
        .ok_or_else(|| Error::parse(format!("params.{key}"), "expected a list of strings"))
}

fn param_u32s(task: &TaskSpec, key: &str) -> Result<Vec<u32>> {
    param(task, key)?
        .as_array()
        .and_then(|a| a.iter().map(|v| v.as_integer().and_then(|i| u32::try_from(i).ok())).collect())
        .ok_or_else(|| Error::parse(format!("params.{key}"), "expected a list of nonnegative integers"))
}

fn param_element(built: &Built, task: &TaskSpec, key: &str) -> Result<Element> {
    let alg = built
        .algebra
        .as_ref()
        .ok_or_else(|| Error::Precondition("the scenario has no algebra".into()))?;
    parse_element(alg, param_str(task, key)?).map_err(|e| locate(e, &format!("params.{key}")))
}

fn param_subgroup(built: &Built, task: &TaskSpec, key: &str) -> Result<Vec<usize>> {
    let g = built.constant()?.group();
    element_indices(g, &param_strings(task, key)?, &format!("params.{key}"))
}

fn to_map<T: Serialize>(t: &T) -> Map<String, Value> {
    match serde_json::to_value(t) {
        Ok(Value::Object(m)) => m,
        Ok(other) => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
        Err(_) => Map::new(),
    }
}

fn strings(es: &[Element]) -> Value {
    Value::from(es.iter().map(|e| e.to_string()).collect::<Vec<_>>())
}

fn random_elements(built: &Built, task: &TaskSpec, default_count: u64) -> Result<Vec<Element>> {
    let alg = built.action()?.algebra().clone();
    let count = param_u64(task, "count", Some(default_count))?;
    let seed = param_u64(task, "seed", Some(0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| Element::random(&alg, &mut rng)).collect())
}

fn default_guard(action: &Action) -> Option<u32> {
    action.algebra().truncation().map(|n| curves::degree_guard(n, action.order()))
}

fn execute(built: &Built, task: &TaskSpec) -> Result<TaskOutput> {
    let mut m = Map::new();
    let out = match task.op.as_str() {
        "describe" => {
            let act = built.action()?;
            m.insert("algebra".into(), act.algebra().describe().into());
            m.insert("action".into(), act.describe().into());
            m.insert("order".into(), act.order().into());
            m.insert("dim".into(), act.algebra().dim().into());
            TaskOutput::new(true, m)
        }
        "invariants" | "kl" => {
            let act = built.action()?;
            let s = if task.op == "invariants" {
                invariants::invariant_subring(act)?
            } else {
                invariants::kl_subalgebra(act)?
            };
            m.insert("generators".into(), strings(s.generators()));
            m.insert("length".into(), s.length().into());
            TaskOutput::new(s.is_closed(), m)
        }
        "compare" => {
            let act = built.action()?;
            let inv = invariants::invariant_subring(act)?;
            let kl = invariants::kl_subalgebra(act)?;
            let guard = default_guard(act);
            let rep = invariants::compare_spans(&inv, &kl, guard);
            m = to_map(&rep);
            m.remove("certified_degree");
            m.insert("invariant_generators".into(), strings(inv.generators()));
            m.insert("kl_generators".into(), strings(kl.generators()));
            TaskOutput { ok: inv.includes(&kl), artifacts: m, certified_degree: guard }
        }
        "compare_generated" => {
            let act = built.action()?;
            let alg = act.algebra();
            let gens = param_strings(task, "generators")?
                .iter()
                .map(|s| parse_element(alg, s).map_err(|e| locate(e, "params.generators")))
                .collect::<Result<Vec<_>>>()?;
            let inv = invariants::invariant_subring(act)?;
            let other = SubalgebraSpan::generated_by(alg, &gens, SpanLabel::Custom)?;
            let guard = default_guard(act);
            let rep = invariants::compare_spans(&inv, &other, guard);
            m.insert("equal".into(), rep.equal.into());
            m.insert("witness".into(), rep.witness.into());
            TaskOutput { ok: inv.includes(&other), artifacts: m, certified_degree: guard }
        }
        "norm" => {
            let act = built.action()?;
            let a = param_element(built, task, "a")?;
            let n = act.norm(&a);
            m.insert("norm".into(), n.to_string().into());
            m.insert("valuation".into(), n.valuation().into());
            TaskOutput::new(act.is_invariant(&n), m)
        }
        "char_poly" => {
            let act = built.action()?;
            let a = param_element(built, task, "a")?;
            let chi = act.char_poly(&a);
            m.insert("char_poly".into(), chi.to_string().into());
            m.insert("sigmas".into(), strings(&act.sigma(&a)));
            TaskOutput::new(act.cayley_hamilton_check(&a), m)
        }
        "cayley_hamilton" => {
            let act = built.action()?;
            let es = random_elements(built, task, 10)?;
            let holds = es.iter().all(|a| act.cayley_hamilton_check(a));
            m.insert("checked".into(), es.len().into());
            m.insert("holds".into(), holds.into());
            TaskOutput::new(holds, m)
        }
        "det_vs_orbit" => {
            let act = built.action()?;
            let c = built.constant()?;
            let es = random_elements(built, task, 20)?;
            let holds = es.iter().all(|a| act.char_poly(a) == c.orbit_char_poly(a));
            m.insert("checked".into(), es.len().into());
            m.insert("holds".into(), holds.into());
            TaskOutput::new(holds, m)
        }
        "etale_power_identity" => {
            let act = built.action()?;
            let es = match task.params.get("a") {
                Some(_) => vec![param_element(built, task, "a")?],
                None => random_elements(built, task, 5)?,
            };
            let mut holds = true;
            for a in &es {
                holds &= act.etale_power_identity_check(a)?;
            }
            let (pr, red) = act.split_orders();
            m.insert("p_power".into(), pr.into());
            m.insert("reduced_order".into(), red.into());
            m.insert("checked".into(), es.len().into());
            m.insert("holds".into(), holds.into());
            TaskOutput::new(holds, m)
        }
        "gabber" => {
            let act = built.action()?;
            let kl = invariants::kl_subalgebra(act)?;
            let es = match task.params.get("a") {
                Some(_) => vec![param_element(built, task, "a")?],
                None => invariants::invariant_subring(act)?.generators().to_vec(),
            };
            let mut holds = true;
            for a in &es {
                holds &= invariants::gabber_power_check(act, &kl, a)?;
            }
            m.insert("p_power".into(), invariants::p_part(act).into());
            m.insert("checked".into(), strings(&es));
            m.insert("holds".into(), holds.into());
            TaskOutput::new(holds, m)
        }
        "free_on_points" => {
            let free = invariants::is_free_on_points(built.constant()?);
            m.insert("free".into(), free.into());
            TaskOutput::new(true, m)
        }
        "extraction" => {
            let c = built.constant()?;
            let normal = param_subgroup(built, task, "normal")?;
            let a = param_element(built, task, "a")?;
            let ex = invariants::quotient_extraction(c, &normal, &a)?;
            let ok = ex.matches_direct && ex.power_identity;
            TaskOutput::new(ok, to_map(&ex))
        }
        "induced_identities" => {
            let data = built
                .induced
                .as_ref()
                .ok_or_else(|| Error::Precondition("the scenario's action is not induced".into()))?;
            let f = param_element(built, task, "f")?;
            let rep = invariants::induced_identities_check(data, &f)?;
            let mut m = to_map(&rep);
            m.insert("holds".into(), rep.holds().into());
            m.insert("cosets".into(), data.cosets.len().into());
            TaskOutput::new(rep.holds(), m)
        }
        "smooth_invariants" => {
            let model = SmoothPointModel::new(built.action()?.clone())?;
            let rep = curves::smooth_invariants_check(&model)?;
            TaskOutput { ok: rep.equal, certified_degree: Some(rep.certified_degree), artifacts: to_map(&rep) }
        }
        "cogenerated" => {
            let act = built.action()?;
            let rep = if act.algebra().variables().len() == 2 {
                curves::cogenerated_check_node(&NodeModel::new(built.constant()?.clone())?)?
            } else {
                curves::cogenerated_check_smooth(&SmoothPointModel::new(act.clone())?)?
            };
            TaskOutput { ok: rep.equal, certified_degree: rep.certified_degree, artifacts: to_map(&rep) }
        }
        "node_decompose" => {
            let model = NodeModel::new(built.constant()?.clone())?;
            TaskOutput::new(true, to_map(&model.decompose()))
        }
        "node_invariants" => {
            let model = NodeModel::new(built.constant()?.clone())?;
            let rep = curves::node_invariants_check(&model)?;
            let mut m = to_map(&rep);
            m.insert("holds".into(), rep.holds().into());
            TaskOutput { ok: rep.holds(), certified_degree: Some(rep.certified_degree), artifacts: m }
        }
        "node_sigma" => {
            let model = NodeModel::new(built.constant()?.clone())?;
            let holds = curves::node_sigma_check(&model)?;
            m.insert("holds".into(), holds.into());
            TaskOutput::new(holds, m)
        }
        "comparison_maps" => {
            let act = built.action()?;
            let base = act.algebra().base();
            let bcs = base_changes(task, base)?;
            let mut results = Vec::new();
            let mut ok = true;
            for bc in &bcs {
                let r = base_change::comparison_maps(act, bc)?;
                ok &= r.phi_surjective && (!r.flat || r.all_bijective());
                results.push(r);
            }
            if let [single] = results.as_slice() {
                m = to_map(single);
            } else {
                m.insert("maps".into(), serde_json::to_value(&results).unwrap_or(Value::Null));
            }
            m.insert("phi_surjective_all".into(), results.iter().all(|r| r.phi_surjective).into());
            m.insert("psi_surjective_all".into(), results.iter().all(|r| r.psi_surjective).into());
            m.insert("flat_bijective".into(), results.iter().filter(|r| r.flat).all(|r| r.all_bijective()).into());
            TaskOutput::new(ok, m)
        }
        "radicial" => {
            let act = built.action()?;
            let bc = BaseChange::parse(act.algebra().base(), param_str(task, "target")?)?;
            let rep = base_change::radicial_shadow_check(act, &bc)?;
            let mut m = to_map(&rep);
            m.insert("holds".into(), rep.holds().into());
            TaskOutput::new(rep.holds(), m)
        }
        "exchange_criterion" => {
            let rep = base_change::exchange_criterion(built.action()?)?;
            TaskOutput::new(!rep.framework_bug, to_map(&rep))
        }
        "quotient_commutes" => {
            let act = built.action()?;
            let base = act.algebra().base();
            let bcs = if task.params.contains_key("target") {
                vec![BaseChange::parse(base, param_str(task, "target")?)?]
            } else {
                base_change::stock_extensions(base)
            };
            let mut results = Vec::new();
            for bc in &bcs {
                results.push(base_change::quotient_commutes(act, bc)?);
            }
            let all = results.iter().all(|r| r.bijective);
            m.insert("results".into(), serde_json::to_value(&results).unwrap_or(Value::Null));
            m.insert("bijective".into(), all.into());
            TaskOutput::new(true, m)
        }
        "polarization" => {
            let alpha = param_u32s(task, "alpha")?;
            let n = param_u64(task, "n", None)? as usize;
            let e = polarize::express_in_power_products(&alpha, n)?;
            let verified = polarize::verify_symbolic(&e, &alpha, n)?;
            let control = !polarize::verify_symbolic(&e.corrupted(), &alpha, n)?;
            m.insert("expression".into(), e.to_string().into());
            m.insert("terms".into(), e.terms().len().into());
            let pats: Vec<String> = e.patterns_used().iter().map(|p| format!("{p:?}")).collect();
            m.insert("patterns".into(), pats.into());
            m.insert("verified".into(), verified.into());
            m.insert("corrupted_rejected".into(), control.into());
            TaskOutput::new(verified && control, m)
        }
        "sum_expansion" => {
            let k = param_u64(task, "k", None)? as u32;
            let q = param_u64(task, "q", None)? as usize;
            let n = param_u64(task, "n", None)? as usize;
            let r = polarize::sum_expansion(k, q, n)?;
            TaskOutput::new(r.holds, to_map(&r))
        }
        "verify_identity" => {
            let alpha = param_u32s(task, "alpha")?;
            let values: Vec<Vec<i64>> = param(task, "values")?
                .as_array()
                .and_then(|rows| {
                    rows.iter()
                        .map(|r| r.as_array().and_then(|r| r.iter().map(|v| v.as_integer()).collect()))
                        .collect()
                })
                .ok_or_else(|| Error::parse("params.values", "expected a list of integer lists"))?;
            let n = values.first().map_or(0, |v| v.len());
            let corrupt = task.params.get("corrupt").and_then(|v| v.as_bool()).unwrap_or(false);
            let mut e = polarize::express_in_power_products(&alpha, n)?;
            if corrupt {
                e = e.corrupted();
            }
            let verified = polarize::verify_identity(&e, &alpha, &values)?;
            m.insert("value".into(), polarize::partial_polarization(&alpha, n)?.eval(&values).to_string().into());
            m.insert("verified".into(), verified.into());
            TaskOutput::new(verified != corrupt, m)
        }
        "theta_h1" => {
            let c = built.constant()?;
            let n = param_u64(task, "n", None)? as u32;
            let margin = param_u64(task, "margin", Some(cohomology::default_margin(c.group().order()) as u64))? as u32;
            let module = cohomology::theta_module(c, n)?;
            let st = cohomology::theta_h1(c, n, margin)?;
            let cyclic = cohomology::cyclic_oracle_h1_dim(&module);
            let complex = module.differentials_compose_to_zero();
            let base = module.ring();
            let tame = base.is_unit(&base.from_i64(c.group().order() as i64));
            let mut m = to_map(&st);
            m.insert("differentials_compose_to_zero".into(), complex.into());
            m.insert("cyclic_oracle_dim".into(), cyclic.into());
            let ok = complex && cyclic.is_none_or(|d| d == st.raw_dim) && (!tame || st.raw_dim == 0);
            TaskOutput::new(ok, m)
        }
        "restriction_inflation" => {
            let c = built.constant()?;
            let n = param_u64(task, "n", None)? as u32;
            let normal = param_subgroup(built, task, "normal")?;
            let module = cohomology::theta_module(c, n)?;
            let inf = cohomology::inflation_h1(&module, &normal)?;
            let res = cohomology::restriction_h1(&module, &normal)?;
            let comp = cohomology::restriction_after_inflation(&module, &normal)?;
            m.insert("inflation".into(), inf.rows.clone().into());
            m.insert("restriction".into(), res.rows.clone().into());
            m.insert("composite_zero".into(), comp.map.is_zero().into());
            m.insert("well_defined".into(), (inf.well_defined && res.well_defined).into());
            TaskOutput::new(comp.map.is_zero() && inf.well_defined && res.well_defined, m)
        }
        "composite" => {
            let c = built.constant()?;
            let n = param_u64(task, "n", None)? as u32;
            let normal = param_subgroup(built, task, "normal")?;
            let margin = param_u64(task, "margin", Some(cohomology::default_margin(c.group().order()) as u64))? as u32;
            let rep = cohomology::induction_differential_composite_with_margin(c, &normal, n, margin)?;
            let ok = rep.equivariant && rep.well_defined && rep.oracle_agrees != Some(false);
            TaskOutput::new(ok, to_map(&rep))
        }
        other => return Err(Error::Precondition(format!("unknown operation `{other}`"))),
    };
    Ok(out)
}

fn base_changes(task: &TaskSpec, base: &crate::ring::BaseRing) -> Result<Vec<BaseChange>> {
    match task.params.get("target") {
        Some(_) => Ok(vec![BaseChange::parse(base, param_str(task, "target")?)?]),
        None => Ok(BaseChange::stock(base)),
    }
}

/// Plain-text rendering; timing is left out when `with_timing` is false.
pub fn render_text(r: &ScenarioReport, with_timing: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "schema: {}", r.schema);
    let _ = writeln!(s, "scenario: {} [{}]", r.scenario, r.outcome.as_str());
    let _ = writeln!(s, "tags:{}", r.tags.iter().map(|t| format!(" {t}")).collect::<Vec<_>>().join(","));
    let _ = writeln!(s, "truncation: {}", r.truncation.map_or("none".to_string(), |t| t.to_string()));
    for t in &r.tasks {
        let prov = t.provenance.map(|p| format!(" ({})", serde_json::to_value(p).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()));
        let _ = writeln!(s, "  #{} {} [{}]{}", t.index, t.op, t.outcome.as_str(), prov.unwrap_or_default());
        if let Some(d) = t.certified_degree {
            let _ = writeln!(s, "      certified below degree {d}");
        }
        for (k, v) in &t.artifacts {
            let _ = writeln!(s, "      {k}: {v}");
        }
        for mm in &t.mismatches {
            let _ = writeln!(s, "      mismatch: {mm}");
        }
        if let Some(msg) = &t.message {
            let _ = writeln!(s, "      note: {msg}");
        }
    }
    if with_timing {
        let _ = writeln!(s, "timing_ms: {}", r.timing_ms);
    }
    s
}

/// Tree (JSON) rendering; timing is dropped when `with_timing` is false.
pub fn render_tree(r: &ScenarioReport, with_timing: bool) -> String {
    let mut v = serde_json::to_value(r).unwrap_or(Value::Null);
    if !with_timing {
        if let Some(o) = v.as_object_mut() {
            o.remove("timing_ms");
        }
    }
    serde_json::to_string_pretty(&v).unwrap_or_default()
}

const CORPUS_FILES: &[(&str, &str)] = &[
    ("alpha-p-product.toml", include_str!("../corpus/alpha-p-product.toml")),
    ("alpha-p-translation.toml", include_str!("../corpus/alpha-p-translation.toml")),
    ("appendix.toml", include_str!("../corpus/appendix.toml")),
    ("base-change.toml", include_str!("../corpus/base-change.toml")),
    ("cohomology.toml", include_str!("../corpus/cohomology.toml")),
    ("extraction.toml", include_str!("../corpus/extraction.toml")),
    ("induction.toml", include_str!("../corpus/induction.toml")),
    ("nodes.toml", include_str!("../corpus/nodes.toml")),
    ("remark-2-4.toml", include_str!("../corpus/remark-2-4.toml")),
    ("remark-3-6.toml", include_str!("../corpus/remark-3-6.toml")),
    ("smooth.toml", include_str!("../corpus/smooth.toml")),
];

/// The shipped scenarios. A corpus file holds one scenario per `[[scenario]]` table.
pub fn corpus() -> Result<Vec<Scenario>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct CorpusFile {
        scenario: Vec<toml::Value>,
    }
    let mut out = Vec::new();
    for (file, src) in CORPUS_FILES {
        let f: CorpusFile = toml::from_str(src).map_err(|e| Error::parse(*file, e.message().to_string()))?;
        for (i, v) in f.scenario.into_iter().enumerate() {
            let text = toml::to_string(&v).map_err(|e| Error::parse(format!("{file}[{i}]"), e.to_string()))?;
            out.push(Scenario::parse(&text, &format!("{file}[{i}]"))?);
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

pub fn corpus_scenario(name: &str) -> Result<Scenario> {
    corpus()?
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Precondition(format!("no corpus scenario named `{name}`")))
}

#[derive(Clone, Debug, Default)]
pub struct CorpusOptions {
    pub tag: Option<String>,
    pub jobs: Option<usize>,
    pub truncation: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub schema: u32,
    pub passed: usize,
    pub failed: usize,
    pub scenarios: Vec<ScenarioReport>,
}

impl CorpusReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

pub fn select(tag: Option<&str>) -> Result<Vec<Scenario>> {
    Ok(corpus()?.into_iter().filter(|s| tag.is_none_or(|t| s.has_tag(t))).collect())
}

/// Runs the selected corpus scenarios, in parallel when `jobs` allows; output order is by name.
pub fn run_corpus(opts: &CorpusOptions) -> Result<CorpusReport> {
    let scenarios = select(opts.tag.as_deref())?;
    let run_opts = RunOptions { truncation: opts.truncation };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let reports: Vec<ScenarioReport> = pool.install(|| scenarios.par_iter().map(|s| run(s, &run_opts)).collect());
    let failed = reports.iter().filter(|r| r.outcome == Outcome::Fail).count();
    Ok(CorpusReport { schema: SCHEMA_VERSION, passed: reports.len() - failed, failed, scenarios: reports })
}

pub fn render_corpus_text(r: &CorpusReport, with_timing: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "schema: {}", r.schema);
    let width = r.scenarios.iter().map(|x| x.scenario.len()).max().unwrap_or(0);
    for sc in &r.scenarios {
        let gated = sc.tasks.iter().filter(|t| t.outcome == Outcome::Gated).count();
        let failed = sc.tasks.iter().filter(|t| t.outcome == Outcome::Fail).count();
        let _ = write!(
            s,
            "{:<width$}  {:<5}  tasks {:>2}  failed {}  gated {}",
            sc.scenario,
            sc.outcome.as_str(),
            sc.tasks.len(),
            failed,
            gated
        );
        if with_timing {
            let _ = write!(s, "  {} ms", sc.timing_ms);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "passed {} failed {}", r.passed, r.failed);
    s
}

pub fn render_corpus_tree(r: &CorpusReport, with_timing: bool) -> String {
    let mut v = serde_json::to_value(r).unwrap_or(Value::Null);
    if !with_timing {
        if let Some(list) = v.get_mut("scenarios").and_then(|s| s.as_array_mut()) {
            for sc in list {
                if let Some(o) = sc.as_object_mut() {
                    o.remove("timing_ms");
                }
            }
        }
    }
    serde_json::to_string_pretty(&v).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIGN: &str = r#"
name = "sign"
tags = ["test"]
[ring]
spec = "F_5"
[algebra]
vars = ["t"]
truncation = 8
[action]
kind = "constant"
group = "Z/2"
[[action.generators]]
element = "g^1"
images = { t = "-t" }
[[tasks]]
op = "invariants"
expect = { generators = ["t^2"] }
provenance = "derived"
[[tasks]]
op = "norm"
params = { a = "t" }
expect = { norm = "4*t^2" }
provenance = "derived"
"#;

    #[test]
    fn sign_scenario_passes() {
        let sc = Scenario::parse(SIGN, "sign.toml").unwrap();
        let r = run(&sc, &RunOptions::default());
        assert_eq!(r.outcome, Outcome::Pass, "{}", render_text(&r, false));
        assert_eq!(render_text(&r, false), render_text(&run(&sc, &RunOptions::default()), false));
    }

    #[test]
    fn wrong_expectation_fails() {
        let src = SIGN.replace("4*t^2", "t^2");
        let r = run(&Scenario::parse(&src, "x").unwrap(), &RunOptions::default());
        assert_eq!(r.outcome, Outcome::Fail);
        assert_eq!(r.tasks[1].mismatches.len(), 1);
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = Scenario::parse("name = \"x\"\n[ring\n", "bad.toml").unwrap_err();
        match err {
            Error::Parse { location, .. } => assert!(location.starts_with("bad.toml:2:"), "{location}"),
            other => panic!("{other}"),
        }
        assert!(Scenario::parse("name = \"x\"\n[[tasks]]\nop = \"nope\"\n", "x").is_err());
        let missing_prov = "name = \"x\"\n[[tasks]]\nop = \"sum_expansion\"\nexpect = { holds = true }\n";
        assert!(Scenario::parse(missing_prov, "x").is_err());
    }

    #[test]
    fn empty_task_list_passes() {
        let sc = Scenario::parse("name = \"empty\"\n", "x").unwrap();
        let r = run(&sc, &RunOptions::default());
        assert_eq!(r.outcome, Outcome::Pass);
        assert!(r.tasks.is_empty());
    }

    #[test]
    fn groups() {
        assert_eq!(parse_group("Z/2 x Z/3").unwrap().order(), 6);
        assert_eq!(parse_group("trivial").unwrap().order(), 1);
        assert!(parse_group("S_3").is_err());
        assert_eq!(parse_monomial("x^2*y").unwrap(), vec![("x".to_string(), 2), ("y".to_string(), 1)]);
    }
}
