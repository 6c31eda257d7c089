//! Analysis reports and their independent re-verification.
//!
//! Every command runs on the label-sorted form of its input, so payloads do
//! not depend on the order in which points were listed. A report embeds that
//! canonical space, which makes it self-contained: [`verify_report`] re-checks
//! each numeric claim from the embedded space alone, using certificates
//! (transport plans with dual potentials, violating quadruples, explicit
//! functions) and elementary recomputation rather than the code paths that
//! produced the claim.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bm::{bm_lower_certified, bm_lower_formula};
use crate::error::{CommandError, FormatError};
use crate::extremal::{ell1_verdict, is_extreme_lip_lp, is_extreme_molecule_lp, rank, Verdict};
use crate::free_space::{free_norm, free_norm_tree, godard_embed, lip_norm_with_pair, FreeVector, LipFunction};
use crate::io::{self, InputFormat, NormInput, SpaceDocument};
use crate::metric::{FiniteMetricSpace, FourPoint, Ultrametric};
use crate::rational::{self, int, Rational};
use crate::transport::Shipment;
use crate::tree::{realize, RealizedTree, TreeDocument};

pub const TOOL: &str = "lipfree";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Realize,
    Norm,
    Verdict,
    Bm,
}

impl Command {
    pub const ALL: [Command; 5] = [Command::Check, Command::Realize, Command::Norm, Command::Verdict, Command::Bm];

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Realize => "realize",
            Command::Norm => "norm",
            Command::Verdict => "verdict",
            Command::Bm => "bm",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the canonical space document.
    pub input_digest: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub space: SpaceDocument,
    pub result: Value,
}

/// The same space with points in label order.
pub fn canonical(space: &FiniteMetricSpace) -> FiniteMetricSpace {
    space.permuted(&space.sorted_order())
}

pub fn input_digest(space: &FiniteMetricSpace) -> String {
    let doc = SpaceDocument::from_space(&canonical(space));
    let bytes = serde_json::to_vec(&doc).expect("space documents serialize");
    hex::encode(Sha256::digest(bytes))
}

fn num(r: &Rational) -> Value {
    json!({ "value": rational::to_text(r), "approx": rational::approx(r) })
}

fn labels_of(space: &FiniteMetricSpace, points: impl IntoIterator<Item = usize>) -> Value {
    points.into_iter().map(|p| Value::from(space.label(p))).collect()
}

fn function_values(space: &FiniteMetricSpace, f: &LipFunction) -> Value {
    io::function_to_json(space, f)["values"].take()
}

fn plan_json(space: &FiniteMetricSpace, plan: &[Shipment]) -> Value {
    plan.iter()
        .map(|s| {
            json!({
                "from": space.label(s.from),
                "to": space.label(s.to),
                "amount": rational::to_text(&s.amount),
            })
        })
        .collect()
}

/// Runs `command` on `space`. `norm_input` is the vector or function JSON
/// that the `norm` command evaluates.
pub fn analyze(
    command: Command,
    space: &FiniteMetricSpace,
    norm_input: Option<&str>,
) -> Result<AnalysisReport, CommandError> {
    let space = canonical(space);
    let result = match command {
        Command::Check => check_payload(&space),
        Command::Realize => realize_payload(&space)?,
        Command::Norm => {
            let text = norm_input
                .ok_or_else(|| FormatError::Invalid("norm needs a vector or function".into()))?;
            norm_payload(&space, io::parse_norm_input(&space, text)?)
        }
        Command::Verdict => verdict_payload(&space),
        Command::Bm => bm_payload(&space)?,
    };
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    Ok(AnalysisReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: command.name().into(),
        input_digest: input_digest(&space),
        timestamp,
        space: SpaceDocument::from_space(&space),
        result,
    })
}

pub fn cmd_check(path: &Path, format: Option<InputFormat>) -> Result<AnalysisReport, CommandError> {
    analyze(Command::Check, &io::load_space(path, format)?, None)
}

pub fn cmd_realize(path: &Path, format: Option<InputFormat>) -> Result<AnalysisReport, CommandError> {
    analyze(Command::Realize, &io::load_space(path, format)?, None)
}

pub fn cmd_norm(path: &Path, input: &Path, format: Option<InputFormat>) -> Result<AnalysisReport, CommandError> {
    let space = io::load_space(path, format)?;
    let text = io::read_text(input)?;
    analyze(Command::Norm, &space, Some(&text))
}

pub fn cmd_verdict(path: &Path, format: Option<InputFormat>) -> Result<AnalysisReport, CommandError> {
    analyze(Command::Verdict, &io::load_space(path, format)?, None)
}

pub fn cmd_bm(path: &Path, format: Option<InputFormat>) -> Result<AnalysisReport, CommandError> {
    analyze(Command::Bm, &io::load_space(path, format)?, None)
}

/// Reads a stored report and re-verifies it. Unreadable or syntactically
/// invalid files are errors; wrong claims are failed checks.
pub fn cmd_verify(report_path: &Path) -> Result<Verification, FormatError> {
    let text = io::read_text(report_path)?;
    let report: AnalysisReport = serde_json::from_str(&text)?;
    Ok(verify_report(&report))
}

fn check_payload(space: &FiniteMetricSpace) -> Value {
    let four_point = match space.four_point_check() {
        FourPoint::Pass => json!({ "pass": true }),
        FourPoint::Fail(q) => json!({ "pass": false, "quadruple": labels_of(space, q) }),
    };
    let ultrametric = match space.is_ultrametric() {
        Ultrametric::Pass => json!({ "pass": true }),
        Ultrametric::Fail(t) => json!({ "pass": false, "triple": labels_of(space, t) }),
    };
    json!({
        "points": space.len(),
        "base": space.label(space.base()),
        "four_point": four_point,
        "ultrametric": ultrametric,
        "diam": num(&space.diam()),
        "sep": space.sep().map_or(Value::Null, |s| num(&s)),
    })
}

fn realize_payload(space: &FiniteMetricSpace) -> Result<Value, CommandError> {
    let tree = realize(space)?;
    Ok(json!({
        "tree": tree.to_document(space),
        "branching": tree.branching_points(),
        "missing": tree.missing_branch_points(),
    }))
}

fn norm_payload(space: &FiniteMetricSpace, input: NormInput) -> Value {
    match input {
        NormInput::Vector(v) => {
            let cert = free_norm(space, &v);
            let mut out = json!({
                "kind": "vector",
                "vector": io::vector_to_json(space, &v)["coeffs"].take(),
                "norm": num(&cert.norm),
                "plan": plan_json(space, &cert.plan),
                "dual": function_values(space, &cert.dual),
            });
            if let Ok(tree) = realize(space) {
                out["tree_norm"] = num(&free_norm_tree(space, &tree, &v));
            }
            out
        }
        NormInput::Function(f) => {
            let (norm, at) = lip_norm_with_pair(space, &f);
            json!({
                "kind": "function",
                "function": function_values(space, &f),
                "norm": num(&norm),
                "attained_at": at.map_or(Value::Null, |(x, y)| labels_of(space, [x, y])),
            })
        }
    }
}

fn verdict_payload(space: &FiniteMetricSpace) -> Value {
    match ell1_verdict(space) {
        Verdict::NotZeroHyperbolic { quadruple } => json!({
            "tag": "NotZeroHyperbolic",
            "quadruple": labels_of(space, quadruple),
        }),
        Verdict::IsometricToL1 { tree } => {
            let coordinates: BTreeMap<&str, Vec<String>> = (0..space.len())
                .map(|p| {
                    let coords = godard_embed(space, &tree, &FreeVector::dirac(space, p));
                    (space.label(p), coords.iter().map(rational::to_text).collect())
                })
                .collect();
            json!({
                "tag": "IsometricToL1",
                "tree": tree.to_document(space),
                "coordinates": coordinates,
            })
        }
        Verdict::NotIsometric { tree, missing, primal, dual } => {
            let diff = primal.mu.vector(space).sub(&primal.nu.vector(space));
            let cert = free_norm(space, &diff);
            let (_, at) = lip_norm_with_pair(space, &dual.f.sub(&dual.g));
            json!({
                "tag": "NotIsometric",
                "tree": tree.to_document(space),
                "missing": missing,
                "primal": {
                    "branch_node": primal.branch_node,
                    "x": space.label(primal.x),
                    "y": space.label(primal.y),
                    "z": space.label(primal.z),
                    "mu": labels_of(space, [primal.mu.x, primal.mu.y]),
                    "nu": labels_of(space, [primal.nu.x, primal.nu.y]),
                    "distance": num(&primal.distance),
                    "plan": plan_json(space, &cert.plan),
                    "dual": function_values(space, &cert.dual),
                },
                "dual": {
                    "branch_node": dual.branch_node,
                    "z": space.label(dual.z),
                    "z_branch": labels_of(space, dual.z_branch.iter().copied()),
                    "f": function_values(space, &dual.f),
                    "g": function_values(space, &dual.g),
                    "distance": num(&dual.distance),
                    "attained_at": at.map_or(Value::Null, |(x, y)| labels_of(space, [x, y])),
                },
            })
        }
    }
}

fn bm_payload(space: &FiniteMetricSpace) -> Result<Value, CommandError> {
    bm_lower_formula(space)?;
    let tree = realize(space)?;
    let cert = bm_lower_certified(space, &tree)?;
    let member = |k: usize| {
        let m = &cert.family.members[k];
        json!({
            "index": k,
            "i": space.label(m.i),
            "j": space.label(m.j),
            "values": function_values(space, &m.f),
        })
    };
    Ok(json!({
        "sep": num(&space.sep().expect("at least three points")),
        "diam": num(&space.diam()),
        "formula_bound": num(&cert.formula_bound),
        "certified_bound": num(&cert.certified_bound),
        "epsilon": num(&cert.epsilon),
        "worst_norm": num(&cert.worst_norm),
        "worst_pair": [cert.worst_pair.0, cert.worst_pair.1],
        "exhaustive": cert.exhaustive,
        "family_size": cert.family.members.len(),
        "selected": cert.selected.iter().map(|&k| member(k)).collect::<Vec<_>>(),
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub command: String,
    pub checks: Vec<Check>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn check(&mut self, name: &str, passed: bool) {
        self.checks.push(Check { name: name.into(), passed, detail: None });
    }

    fn fail(&mut self, name: &str, detail: String) {
        self.checks.push(Check { name: name.into(), passed: false, detail: Some(detail) });
    }
}

type Claim<T> = Result<T, String>;

pub fn verify_report(report: &AnalysisReport) -> Verification {
    let mut v = Verification { command: report.command.clone(), checks: Vec::new() };
    v.check("tool", report.tool == TOOL);
    let space = match report.space.to_space() {
        Ok(space) => space,
        Err(e) => {
            v.fail("space is a valid metric", e.to_string());
            return v;
        }
    };
    v.check("input digest", report.input_digest == input_digest(&space));
    let outcome = match report.command.parse::<Command>() {
        Ok(Command::Check) => verify_check(&space, &report.result, &mut v),
        Ok(Command::Realize) => verify_realize(&space, &report.result, &mut v),
        Ok(Command::Norm) => verify_norm(&space, &report.result, &mut v),
        Ok(Command::Verdict) => verify_verdict(&space, &report.result, &mut v),
        Ok(Command::Bm) => verify_bm(&space, &report.result, &mut v),
        Err(e) => Err(e),
    };
    if let Err(detail) = outcome {
        v.fail("well-formed result", detail);
    }
    v
}

fn field<'a>(v: &'a Value, key: &str) -> Claim<&'a Value> {
    v.get(key).ok_or_else(|| format!("missing field {key:?}"))
}

fn rat(v: &Value) -> Claim<Rational> {
    let v = v.get("value").unwrap_or(v);
    rational::from_json(v).map_err(|e| e.to_string())
}

fn point(space: &FiniteMetricSpace, v: &Value) -> Claim<usize> {
    let label = v.as_str().ok_or_else(|| format!("expected a label, got {v}"))?;
    space.index_of(label).map_err(|e| e.to_string())
}

fn points(space: &FiniteMetricSpace, v: &Value) -> Claim<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| format!("expected a list of labels, got {v}"))?
        .iter()
        .map(|p| point(space, p))
        .collect()
}

fn indices(v: &Value) -> Claim<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| format!("expected a list of indices, got {v}"))?
        .iter()
        .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| format!("bad index {i}")))
        .collect()
}

/// A function given at every point.
fn function(space: &FiniteMetricSpace, v: &Value) -> Claim<Vec<Rational>> {
    let map = v.as_object().ok_or_else(|| format!("expected label/value pairs, got {v}"))?;
    if map.len() != space.len() {
        return Err(format!("function lists {} of {} points", map.len(), space.len()));
    }
    let mut out = vec![Rational::zero(); space.len()];
    for (label, value) in map {
        out[space.index_of(label).map_err(|e| e.to_string())?] = rat(value)?;
    }
    Ok(out)
}

/// The signed mass of `sum a_x delta_x`: listed coefficients plus the
/// balancing mass at the base.
fn mass(space: &FiniteMetricSpace, v: &Value) -> Claim<Vec<Rational>> {
    let map = v.as_object().ok_or_else(|| format!("expected label/value pairs, got {v}"))?;
    let mut out = vec![Rational::zero(); space.len()];
    for (label, value) in map {
        let p = space.index_of(label).map_err(|e| e.to_string())?;
        if p == space.base() {
            return Err("a free vector has no coefficient at the base".into());
        }
        out[p] = rat(value)?;
    }
    let total: Rational = out.iter().sum();
    out[space.base()] = -total;
    Ok(out)
}

fn shipments(space: &FiniteMetricSpace, v: &Value) -> Claim<Vec<(usize, usize, Rational)>> {
    v.as_array()
        .ok_or_else(|| "plan must be a list".to_string())?
        .iter()
        .map(|s| Ok((point(space, field(s, "from")?)?, point(space, field(s, "to")?)?, rat(field(s, "amount")?)?)))
        .collect()
}

/// Largest `|f(x) - f(y)| / d(x,y)`.
fn slope_max(space: &FiniteMetricSpace, f: &[Rational]) -> Rational {
    let n = space.len();
    (0..n)
        .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
        .map(|(x, y)| (&f[x] - &f[y]).abs() / space.d(x, y))
        .max()
        .unwrap_or_else(Rational::zero)
}

fn four_point_fails(space: &FiniteMetricSpace, [a, b, c, d]: [usize; 4]) -> bool {
    let mut sums = [
        space.d(a, b) + space.d(c, d),
        space.d(a, c) + space.d(b, d),
        space.d(a, d) + space.d(b, c),
    ];
    sums.sort();
    sums[2] != sums[1]
}

fn all_distinct(points: &[usize]) -> bool {
    points.iter().collect::<BTreeSet<_>>().len() == points.len()
}

fn brute_diam(space: &FiniteMetricSpace) -> Rational {
    space.matrix().iter().flatten().max().cloned().unwrap_or_else(Rational::zero)
}

fn brute_sep(space: &FiniteMetricSpace) -> Option<Rational> {
    let n = space.len();
    let mut best: Option<Rational> = None;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if x == y || y == z || x == z {
                    continue;
                }
                let g = (space.d(x, y) + space.d(x, z) - space.d(y, z)) / int(2);
                if best.as_ref().is_none_or(|b| &g < b) {
                    best = Some(g);
                }
            }
        }
    }
    best
}

/// A feasible plan and a 1-Lipschitz potential with equal value prove that
/// both are optimal and that the transport cost is `claimed`.
fn check_transport(
    space: &FiniteMetricSpace,
    mass: &[Rational],
    plan: &[(usize, usize, Rational)],
    dual: &[Rational],
    claimed: &Rational,
    prefix: &str,
    v: &mut Verification,
) {
    let mut net = vec![Rational::zero(); space.len()];
    let mut cost = Rational::zero();
    for (from, to, amount) in plan {
        net[*from] += amount;
        net[*to] -= amount;
        cost += amount * space.d(*from, *to);
    }
    v.check(
        &format!("{prefix}: plan amounts are positive"),
        plan.iter().all(|s| s.2.is_positive()),
    );
    v.check(&format!("{prefix}: plan moves the given mass"), net == mass);
    v.check(&format!("{prefix}: plan cost equals the claim"), &cost == claimed);
    v.check(&format!("{prefix}: dual vanishes at the base"), dual[space.base()].is_zero());
    v.check(&format!("{prefix}: dual is 1-Lipschitz"), slope_max(space, dual) <= Rational::one());
    let pairing: Rational = mass.iter().zip(dual).map(|(m, f)| m * f).sum();
    v.check(&format!("{prefix}: dual pairing equals the claim"), &pairing == claimed);
}

fn verify_check(space: &FiniteMetricSpace, result: &Value, v: &mut Verification) -> Claim<()> {
    let n = space.len();
    v.check("point count", field(result, "points")?.as_u64() == Some(n as u64));
    v.check("base", point(space, field(result, "base")?)? == space.base());

    let four = field(result, "four_point")?;
    if field(four, "pass")?.as_bool() == Some(true) {
        let mut ok = true;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        ok &= !four_point_fails(space, [a, b, c, d]);
                    }
                }
            }
        }
        v.check("four-point condition holds on every quadruple", ok);
    } else {
        let q = points(space, field(four, "quadruple")?)?;
        let ok = q.len() == 4 && all_distinct(&q) && four_point_fails(space, [q[0], q[1], q[2], q[3]]);
        v.check("quadruple violates the four-point condition", ok);
    }

    let ultra = field(result, "ultrametric")?;
    let violates = |i: usize, j: usize, k: usize| space.d(i, k) > space.d(i, j).max(space.d(j, k));
    if field(ultra, "pass")?.as_bool() == Some(true) {
        let ok = (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !violates(i, j, k))));
        v.check("ultrametric inequality holds on every triple", ok);
    } else {
        let t = points(space, field(ultra, "triple")?)?;
        v.check("triple violates the ultrametric inequality", t.len() == 3 && violates(t[0], t[1], t[2]));
    }

    v.check("diam", rat(field(result, "diam")?)? == brute_diam(space));
    let sep = field(result, "sep")?;
    match brute_sep(space) {
        Some(s) => v.check("sep", !sep.is_null() && rat(sep)? == s),
        None => v.check("sep is undefined below three points", sep.is_null()),
    }
    Ok(())
}

fn tree_document(result: &Value) -> Claim<TreeDocument> {
    serde_json::from_value(field(result, "tree")?.clone()).map_err(|e| e.to_string())
}

/// Whether the labelled nodes of `doc` realize exactly the distances of
/// `space`, computed by path search in the document itself.
fn tree_realizes(space: &FiniteMetricSpace, doc: &TreeDocument) -> bool {
    let Ok(tree_space) = doc.to_space() else {
        return false;
    };
    if tree_space.len() != space.len() {
        return false;
    }
    let Ok(map) = (0..space.len())
        .map(|p| tree_space.index_of(space.label(p)))
        .collect::<Result<Vec<_>, _>>()
    else {
        return false;
    };
    (0..space.len()).all(|x| (0..space.len()).all(|y| tree_space.d(map[x], map[y]) == space.d(x, y)))
}

fn degrees(doc: &TreeDocument) -> BTreeMap<usize, usize> {
    let mut deg: BTreeMap<usize, usize> = doc.nodes.iter().map(|n| (n.id, 0)).collect();
    for e in &doc.edges {
        *deg.entry(e.u).or_default() += 1;
        *deg.entry(e.v).or_default() += 1;
    }
    deg
}

fn steiner_branching(doc: &TreeDocument) -> Vec<usize> {
    let deg = degrees(doc);
    doc.nodes
        .iter()
        .filter(|n| n.kind == "steiner" && deg[&n.id] >= 3)
        .map(|n| n.id)
        .collect()
}

fn check_tree(space: &FiniteMetricSpace, doc: &TreeDocument, v: &mut Verification) {
    v.check("tree realizes every distance", tree_realizes(space, doc));
    let canonical = RealizedTree::from_document(doc, space);
    match canonical {
        Ok(_) => v.check("tree is minimal (Steiner nodes branch)", true),
        Err(e) => v.fail("tree is minimal (Steiner nodes branch)", e.to_string()),
    }
}

fn verify_realize(space: &FiniteMetricSpace, result: &Value, v: &mut Verification) -> Claim<()> {
    let doc = tree_document(result)?;
    check_tree(space, &doc, v);
    let deg = degrees(&doc);
    let mut branching: Vec<usize> = deg.iter().filter(|(_, &d)| d >= 3).map(|(&id, _)| id).collect();
    branching.sort();
    let mut claimed = indices(field(result, "branching")?)?;
    claimed.sort();
    v.check("branching nodes", claimed == branching);
    let mut missing = indices(field(result, "missing")?)?;
    missing.sort();
    v.check("missing branch points", missing == steiner_branching(&doc));
    Ok(())
}

fn verify_norm(space: &FiniteMetricSpace, result: &Value, v: &mut Verification) -> Claim<()> {
    let claimed = rat(field(result, "norm")?)?;
    match field(result, "kind")?.as_str() {
        Some("vector") => {
            let mass = mass(space, field(result, "vector")?)?;
            let plan = shipments(space, field(result, "plan")?)?;
            let dual = function(space, field(result, "dual")?)?;
            check_transport(space, &mass, &plan, &dual, &claimed, "free norm", v);
            if let Some(tree_norm) = result.get("tree_norm") {
                v.check("tree formula agrees", rat(tree_norm)? == claimed);
            }
        }
        Some("function") => {
            let f = function(space, field(result, "function")?)?;
            v.check("function vanishes at the base", f[space.base()].is_zero());
            let norm = slope_max(space, &f);
            v.check("Lipschitz norm", norm == claimed);
            let at = field(result, "attained_at")?;
            if at.is_null() {
                v.check("zero function has no attaining pair", norm.is_zero());
            } else {
                let pair = points(space, at)?;
                let ok = pair.len() == 2
                    && pair[0] != pair[1]
                    && (&f[pair[0]] - &f[pair[1]]).abs() / space.d(pair[0], pair[1]) == norm;
                v.check("norm attained at the stated pair", ok);
            }
        }
        other => return Err(format!("unknown norm kind {other:?}")),
    }
    Ok(())
}

/// Edge coordinates recomputed from the document: the coordinate of point
/// `p` on edge `e` is `len(e)` when `e` separates `p` from the base.
fn edge_coordinates(space: &FiniteMetricSpace, doc: &TreeDocument) -> Claim<Vec<Vec<Rational>>> {
    let node_of: BTreeMap<&str, usize> = doc
        .nodes
        .iter()
        .filter_map(|n| n.label.as_deref().map(|l| (l, n.id)))
        .collect();
    let base_node = *node_of
        .get(space.label(space.base()))
        .ok_or("base missing from the tree")?;
    let mut coords = vec![vec![Rational::zero(); doc.edges.len()]; space.len()];
    for (e, edge) in doc.edges.iter().enumerate() {
        let mut reached = BTreeSet::from([base_node]);
        let mut queue = VecDeque::from([base_node]);
        while let Some(u) = queue.pop_front() {
            for (k, other) in doc.edges.iter().enumerate() {
                if k == e {
                    continue;
                }
                let next = if other.u == u {
                    other.v
                } else if other.v == u {
                    other.u
                } else {
                    continue;
                };
                if reached.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        for (p, row) in coords.iter_mut().enumerate() {
            let node = node_of.get(space.label(p)).ok_or("point missing from the tree")?;
            if !reached.contains(node) {
                row[e] = edge.len.clone();
            }
        }
    }
    Ok(coords)
}

fn verify_verdict(space: &FiniteMetricSpace, result: &Value, v: &mut Verification) -> Claim<()> {
    match field(result, "tag")?.as_str() {
        Some("NotZeroHyperbolic") => {
            let q = points(space, field(result, "quadruple")?)?;
            let ok = q.len() == 4 && all_distinct(&q) && four_point_fails(space, [q[0], q[1], q[2], q[3]]);
            v.check("quadruple violates the four-point condition", ok);
        }
        Some("IsometricToL1") => {
            let doc = tree_document(result)?;
            check_tree(space, &doc, v);
            v.check("no Steiner nodes", doc.nodes.iter().all(|n| n.kind == "original"));
            v.check("|M| - 1 edges", doc.edges.len() + 1 == space.len());
            let claimed = field(result, "coordinates")?
                .as_object()
                .ok_or("coordinates must map labels to lists")?;
            let expected = edge_coordinates(space, &doc)?;
            let mut ok = claimed.len() == space.len();
            for (label, coords) in claimed {
                let p = space.index_of(label).map_err(|e| e.to_string())?;
                let coords: Vec<Rational> = coords
                    .as_array()
                    .ok_or("coordinates must be lists")?
                    .iter()
                    .map(rat)
                    .collect::<Claim<_>>()?;
                ok &= coords == expected[p];
            }
            v.check("coordinates are the edge cuts", ok);
            let n = space.len();
            let l1 = |a: &[Rational], b: &[Rational]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<Rational>();
            let isometric = (0..n).all(|x| (0..n).all(|y| &l1(&expected[x], &expected[y]) == space.d(x, y)));
            v.check("coordinates are isometric on points", isometric);
            let columns: Vec<Vec<Rational>> = (0..n).filter(|&p| p != space.base()).map(|p| expected[p].clone()).collect();
            v.check("coordinate map is onto", rank(&columns) == n - 1);
        }
        Some("NotIsometric") => {
            let doc = tree_document(result)?;
            check_tree(space, &doc, v);
            let steiner = steiner_branching(&doc);
            let mut missing = indices(field(result, "missing")?)?;
            missing.sort();
            v.check("missing branch points", !missing.is_empty() && missing == steiner);

            let primal = field(result, "primal")?;
            let b = field(primal, "branch_node")?.as_u64().ok_or("bad branch node")? as usize;
            v.check("primal witness sits at a missing branch point", steiner.contains(&b));
            let mu = points(space, field(primal, "mu")?)?;
            let nu = points(space, field(primal, "nu")?)?;
            if mu.len() != 2 || nu.len() != 2 || mu[0] == mu[1] || nu[0] == nu[1] {
                return Err("molecules need two distinct points".into());
            }
            v.check("mu is extreme", is_extreme_molecule_lp(space, mu[0], mu[1]));
            v.check("nu is extreme", is_extreme_molecule_lp(space, nu[0], nu[1]));
            v.check("mu and nu differ", mu != nu);
            let diff = FreeVector::molecule(space, mu[0], mu[1]).sub(&FreeVector::molecule(space, nu[0], nu[1]));
            let claimed = rat(field(primal, "distance")?)?;
            let plan = shipments(space, field(primal, "plan")?)?;
            let dual = function(space, field(primal, "dual")?)?;
            check_transport(space, &diff.mass(space), &plan, &dual, &claimed, "primal distance", v);
            v.check("primal distance is at most 1", claimed <= Rational::one());

            let dual = field(result, "dual")?;
            let b = field(dual, "branch_node")?.as_u64().ok_or("bad branch node")? as usize;
            v.check("dual witness sits at a missing branch point", steiner.contains(&b));
            let f = function(space, field(dual, "f")?)?;
            let g = function(space, field(dual, "g")?)?;
            for (name, h) in [("f", &f), ("g", &g)] {
                let lip = LipFunction::new(space, h.clone());
                v.check(&format!("{name} vanishes at the base"), lip.is_some());
                v.check(&format!("{name} is 1-Lipschitz"), slope_max(space, h) <= Rational::one());
                let extreme = lip.is_some_and(|l| is_extreme_lip_lp(space, &l) == Ok(true));
                v.check(&format!("{name} is extreme"), extreme);
            }
            v.check("f and g differ", f != g);
            let fg: Vec<Rational> = f.iter().zip(&g).map(|(a, b)| a - b).collect();
            let claimed = rat(field(dual, "distance")?)?;
            v.check("dual distance", slope_max(space, &fg) == claimed);
            v.check("dual distance is below 2", claimed < int(2));
        }
        other => return Err(format!("unknown verdict tag {other:?}")),
    }
    Ok(())
}

fn verify_bm(space: &FiniteMetricSpace, result: &Value, v: &mut Verification) -> Claim<()> {
    let n = space.len();
    let (Some(sep), diam) = (brute_sep(space), brute_diam(space)) else {
        return Err("a Banach-Mazur bound needs three points".into());
    };
    v.check("sep", rat(field(result, "sep")?)? == sep);
    v.check("diam", rat(field(result, "diam")?)? == diam);
    v.check("sep is positive", sep.is_positive());
    let formula = (Rational::one() - &sep / (int(4) * &diam)).recip();
    let claimed_formula = rat(field(result, "formula_bound")?)?;
    v.check("formula bound", claimed_formula == formula);

    let selected = field(result, "selected")?.as_array().ok_or("selected must be a list")?;
    v.check("2n + 1 functions selected", selected.len() == 2 * (n - 1) + 1);
    let cap = Rational::one() - &sep / &diam;
    let mut members = Vec::with_capacity(selected.len());
    let mut pairs = BTreeSet::new();
    let mut peaking = true;
    for m in selected {
        let index = field(m, "index")?.as_u64().ok_or("bad member index")? as usize;
        let (i, j) = (point(space, field(m, "i")?)?, point(space, field(m, "j")?)?);
        let f = function(space, field(m, "values")?)?;
        peaking &= i != j && f[space.base()].is_zero();
        for x in 0..n {
            for y in x + 1..n {
                let slope = (&f[x] - &f[y]).abs() / space.d(x, y);
                let own = (x, y) == (i.min(j), i.max(j));
                peaking &= if own { slope.is_one() } else { slope <= cap };
            }
        }
        pairs.insert((i, j));
        members.push((index, f));
    }
    v.check("selected functions peak at distinct pairs", pairs.len() == members.len());
    v.check("each function peaks only at its own pair", peaking);

    let mut worst: Option<(Rational, (usize, usize))> = None;
    for (a, (ia, fa)) in members.iter().enumerate() {
        for (ib, fb) in &members[a + 1..] {
            let mid: Vec<Rational> = fa.iter().zip(fb).map(|(x, y)| (x + y) / int(2)).collect();
            let norm = slope_max(space, &mid);
            if worst.as_ref().is_none_or(|w| norm > w.0) {
                worst = Some((norm, (*ia, *ib)));
            }
        }
    }
    let (worst_norm, _) = worst.ok_or("need at least two selected functions")?;
    let claimed_worst = rat(field(result, "worst_norm")?)?;
    v.check("largest midpoint norm", claimed_worst == worst_norm);
    let pair = indices(field(result, "worst_pair")?)?;
    let attained = pair.len() == 2 && {
        let find = |k: usize| members.iter().find(|(idx, _)| *idx == k).map(|(_, f)| f);
        match (find(pair[0]), find(pair[1])) {
            (Some(fa), Some(fb)) if pair[0] != pair[1] => {
                let mid: Vec<Rational> = fa.iter().zip(fb).map(|(x, y)| (x + y) / int(2)).collect();
                slope_max(space, &mid) == worst_norm
            }
            _ => false,
        }
    };
    v.check("worst pair attains the largest midpoint norm", attained);
    v.check("midpoints stay inside the unit ball", worst_norm < Rational::one());
    let epsilon = Rational::one() - &worst_norm;
    v.check("epsilon", rat(field(result, "epsilon")?)? == epsilon);
    let certified = rat(field(result, "certified_bound")?)?;
    v.check("certified bound", worst_norm.is_positive() && certified == worst_norm.recip());
    v.check("certified bound dominates the formula", certified >= formula);
    Ok(())
}
