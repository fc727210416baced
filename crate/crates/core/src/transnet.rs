//! The transformation graph: point canonical transformations, projections,
//! isospectral extensions and the restricted extension `R_a1`.
//!
//! Nodes are catalog ids. PCT edges are walkable both ways. Projections and
//! `R_a1` are one-way. Isospectral extensions may also be walked backwards,
//! since every extension reduces to its kernel as ħ → 0.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::catalog::{self, CatalogError, Class, Superpotential};
use crate::expr::{evaluate, parse, Bindings, EvalMode, Expr, ExprError};
use crate::susy::partners_of;

/// Relative constancy threshold for PCT verification.
pub const PCT_TOL: f64 = 1e-8;
/// Largest imaginary part accepted for a quantity that should be real.
pub const BRANCH_TOL: f64 = 1e-8;
/// Successive projection errors must shrink at least by this factor.
pub const RATIO_BOUND: f64 = 0.5;
const SUP_POINTS: usize = 201;

#[derive(Debug, thiserror::Error)]
pub enum TransnetError {
    #[error("unknown edge `{id}`; valid edges: {}", valid.join(", "))]
    UnknownEdge { id: String, valid: Vec<String> },
    #[error("unknown node `{id}`; valid nodes: {}", valid.join(", "))]
    UnknownNode { id: String, valid: Vec<String> },
    #[error("edge {id} is a {kind}, expected a {expected}")]
    WrongKind { id: String, kind: EdgeKind, expected: EdgeKind },
    #[error("no parameter correspondence is shipped for {0}; supply target parameters")]
    NoCorrespondence(String),
    #[error("substitution has du/dz identically zero")]
    DegenerateSubstitution,
    #[error("du/dz vanishes at z = {0}")]
    VanishingJacobian(f64),
    #[error("branch cut crossed at z = {z}: imaginary part {imag:.3e}")]
    BranchCut { z: f64, imag: f64 },
    #[error("PCTs are written with hbar = 1, got hbar = {0}")]
    HbarNotOne(f64),
    #[error("correspondence undefined: {0}")]
    Correspondence(String),
    #[error("limit sequence must have at least two elements and move toward the limit")]
    BadSequence,
    #[error("no path from {src} to {dst}")]
    Unreachable { src: String, dst: String },
    #[error("graph invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    Pct,
    Projection,
    IsospectralExtension,
    RestrictedExtension,
}

impl std::fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EdgeKind::Pct => "PCT",
            EdgeKind::Projection => "projection",
            EdgeKind::IsospectralExtension => "isospectral extension",
            EdgeKind::RestrictedExtension => "restricted extension",
        })
    }
}

/// Maps source parameters and the source energy to target parameters.
pub type Correspondence = fn(&Bindings, f64) -> Result<Bindings, TransnetError>;

#[derive(Debug, Clone)]
pub struct PctRecipe {
    /// Old variable as a function of the new one.
    pub u: Expr,
    pub complex: bool,
    pub correspondence: Option<(&'static str, Correspondence)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitDirection {
    Zero,
    Infinity,
}

#[derive(Debug, Clone)]
pub struct ProjectionRecipe {
    /// The type-I superpotential with its scale and offset made explicit.
    pub source_w: Expr,
    pub source_energy: Expr,
    /// Substitutions applied in order, top to bottom.
    pub maps: Vec<(String, Expr)>,
    pub limit_var: String,
    pub direction: LimitDirection,
    pub default_sequence: Vec<f64>,
    pub interval: (f64, f64),
}

#[derive(Debug, Clone)]
pub enum Payload {
    Pct(PctRecipe),
    Projection(ProjectionRecipe),
    IsospectralExtension,
    /// Checked by `extension::map_to_scarf`.
    RestrictedExtension,
}

#[derive(Debug, Clone)]
pub struct TransformEdge {
    pub id: String,
    pub kind: EdgeKind,
    pub source: String,
    pub target: String,
    pub payload: Payload,
}

impl TransformEdge {
    pub fn reversible(&self) -> bool {
        matches!(self.kind, EdgeKind::Pct | EdgeKind::IsospectralExtension)
    }

    /// One-line human description of the recipe.
    pub fn recipe(&self) -> String {
        match &self.payload {
            Payload::Pct(p) => format!("{} -> {}", var_of(&self.source), p.u),
            Payload::Projection(p) => {
                let mut parts: Vec<String> = p.maps.iter().map(|(k, v)| format!("{k} -> {v}")).collect();
                let to = match p.direction {
                    LimitDirection::Zero => "0",
                    LimitDirection::Infinity => "inf",
                };
                parts.push(format!("{} -> {to}", p.limit_var));
                parts.join(", ")
            }
            Payload::IsospectralExtension => "add hbar-dependent terms (hbar -> 0 reverses)".into(),
            Payload::RestrictedExtension => "Morse hbar-series summed, then absorbed into Scarf II".into(),
        }
    }
}

fn var_of(id: &str) -> String {
    catalog::get(id).map(|s| s.variable.clone()).unwrap_or_else(|_| "x".into())
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeView {
    pub id: String,
    pub kind: EdgeKind,
    pub source: String,
    pub target: String,
    pub reversible: bool,
    pub recipe: String,
}

impl From<&TransformEdge> for EdgeView {
    fn from(e: &TransformEdge) -> EdgeView {
        EdgeView {
            id: e.id.clone(),
            kind: e.kind,
            source: e.source.clone(),
            target: e.target.clone(),
            reversible: e.reversible(),
            recipe: e.recipe(),
        }
    }
}

#[derive(Debug)]
pub struct Graph {
    nodes: Vec<String>,
    edges: Vec<TransformEdge>,
}

fn ex(text: &str) -> Expr {
    parse(text).expect("builtin expression")
}

fn pct(
    id: &str,
    source: &str,
    target: &str,
    u: &str,
    complex: bool,
    c: Option<(&'static str, Correspondence)>,
) -> TransformEdge {
    TransformEdge {
        id: id.into(),
        kind: EdgeKind::Pct,
        source: source.into(),
        target: target.into(),
        payload: Payload::Pct(PctRecipe { u: ex(u), complex, correspondence: c }),
    }
}

#[allow(clippy::too_many_arguments)]
fn projection(
    id: &str,
    source: &str,
    target: &str,
    w: &str,
    energy: &str,
    maps: &[(&str, &str)],
    limit: (&str, LimitDirection, &[f64]),
    interval: (f64, f64),
) -> TransformEdge {
    TransformEdge {
        id: id.into(),
        kind: EdgeKind::Projection,
        source: source.into(),
        target: target.into(),
        payload: Payload::Projection(ProjectionRecipe {
            source_w: ex(w),
            source_energy: ex(energy),
            maps: maps.iter().map(|(k, v)| (k.to_string(), ex(v))).collect(),
            limit_var: limit.0.into(),
            direction: limit.1,
            default_sequence: limit.2.to_vec(),
            interval,
        }),
    }
}

fn real(b: &Bindings, name: &str) -> Result<f64, TransnetError> {
    b.get_real(name).ok_or_else(|| TransnetError::Correspondence(format!("missing real parameter {name}")))
}

fn out(pairs: &[(&str, f64)]) -> Bindings {
    Bindings::from_pairs(pairs).with("hbar", 1.0)
}

// Morse(A, B) at energy E under x = -2 ln r: ω = 4B, ℓ = 1/2 + 2√(A² − E).
fn corr_ab(s: &Bindings, e: f64) -> Result<Bindings, TransnetError> {
    let (a, b) = (real(s, "A")?, real(s, "B")?);
    if a * a <= e {
        return Err(TransnetError::Correspondence(format!("need E < A^2 = {}", a * a)));
    }
    Ok(out(&[("omega", 4.0 * b), ("l", 0.5 + 2.0 * (a * a - e).sqrt())]))
}

// 3-D oscillator at energy E under r = √z.
fn corr_bc(s: &Bindings, e: f64) -> Result<Bindings, TransnetError> {
    let (w, l) = (real(s, "omega")?, real(s, "l")?);
    Ok(out(&[("e2", (w * l + w / 2.0 + e) / 4.0), ("l", l / 2.0 + 0.25)]))
}

// Coulomb at energy E under r = e^{-x}.
fn corr_ca(s: &Bindings, e: f64) -> Result<Bindings, TransnetError> {
    let (e2, l) = (real(s, "e2")?, real(s, "l")?);
    let b2 = e2 * e2 / (4.0 * l * l) - e;
    if b2 <= 0.0 {
        return Err(TransnetError::Correspondence(format!("need E < e2^2/(4 l^2) = {}", b2 + e)));
    }
    let b = b2.sqrt();
    Ok(out(&[("A", (e2 / b - 1.0) / 2.0), ("B", b)]))
}

// The 1-D oscillator is the 3-D one at ℓ = 0.
fn corr_db(s: &Bindings, _e: f64) -> Result<Bindings, TransnetError> {
    Ok(out(&[("omega", real(s, "omega")?), ("l", 0.0)]))
}

// tanh(r + iπ/2) = coth r, sech(r + iπ/2) = -i csch r.
fn corr_12(s: &Bindings, _e: f64) -> Result<Bindings, TransnetError> {
    let mut b = Bindings::complex();
    b.set("A", real(s, "A")?);
    b.set_complex("B", Complex64::new(0.0, real(s, "B")?));
    b.set("hbar", 1.0);
    Ok(b)
}

// coth(ix + iπ/2) = i tan x, csch(ix + iπ/2) = -i sec x, and du/dz = i.
fn corr_23(s: &Bindings, _e: f64) -> Result<Bindings, TransnetError> {
    Ok(out(&[("A", -real(s, "A")?), ("B", real(s, "B")?)]))
}

fn build() -> Graph {
    use LimitDirection::*;
    let alpha_seq: &[f64] = &[0.1, 0.05, 0.025];
    let gpt_w = "A*coth(alpha*r + beta) - B*csch(alpha*r + beta)";
    let gpt_e = "A^2 - (A - n*alpha*hbar)^2";
    let mut edges = vec![
        pct("T_12", "scarf-hyp", "gen-poschl-teller", "r + i*pi/2", true, Some(("A' = A, B' = iB", corr_12))),
        pct("T_23", "gen-poschl-teller", "scarf-trig", "i*x + i*pi/2", true, Some(("A' = -A, B' = B", corr_23))),
        pct("T_34", "scarf-trig", "rosen-morse-1", "arccos(csc(x))", true, None),
        pct("T_45", "rosen-morse-1", "rosen-morse-2", "pi/2 + i*x", true, None),
        pct("T_56", "rosen-morse-2", "eckart", "-r + i*pi/2", true, None),
        pct("T_61", "eckart", "scarf-hyp", "arccoth(i*sinh(x))", true, None),
        pct("T_ab", "morse", "osc-3d", "-2*ln(r)", false, Some(("omega = 4B, l = 1/2 + 2 sqrt(A^2 - E)", corr_ab))),
        pct(
            "T_bc",
            "osc-3d",
            "coulomb",
            "sqrt(r)",
            false,
            Some(("e2 = (omega l + omega/2 + E)/4, l' = l/2 + 1/4", corr_bc)),
        ),
        pct(
            "T_ca",
            "coulomb",
            "morse",
            "exp(-x)",
            false,
            Some(("B = sqrt(e2^2/(4 l^2) - E), A = (e2/B - 1)/2", corr_ca)),
        ),
        pct("T_db", "harmonic-oscillator", "osc-3d", "r", false, Some(("omega' = omega, l = 0", corr_db))),
        projection(
            "P_1a",
            "scarf-hyp",
            "morse",
            "A*tanh(x + beta) + B*sech(x + beta)",
            "A^2 - (A - n*hbar)^2",
            &[("B", "-B*exp(beta)/2")],
            ("beta", Infinity, &[2.0, 4.0, 6.0]),
            (-2.0, 2.0),
        ),
        projection(
            "P_2a",
            "gen-poschl-teller",
            "morse",
            gpt_w,
            gpt_e,
            &[("B", "B*exp(beta)/2"), ("alpha", "1"), ("r", "x")],
            ("beta", Infinity, &[4.0, 6.0, 8.0]),
            (-2.0, 2.0),
        ),
        projection(
            "P_2b",
            "gen-poschl-teller",
            "osc-3d",
            gpt_w,
            gpt_e,
            &[("A", "omega/alpha - alpha*l/2"), ("B", "omega/alpha + alpha*l/2"), ("beta", "0")],
            ("alpha", Zero, alpha_seq),
            (0.5, 3.0),
        ),
        projection(
            "P_3b",
            "scarf-trig",
            "osc-3d",
            "A*tan(alpha*x) - B*sec(alpha*x)",
            "(A + n*alpha*hbar)^2 - A^2",
            &[("A", "omega/alpha + alpha*l/2"), ("B", "omega/alpha - alpha*l/2"), ("x", "r + pi/(2*alpha)")],
            ("alpha", Zero, alpha_seq),
            (0.5, 3.0),
        ),
        projection(
            "P_4c",
            "rosen-morse-1",
            "coulomb",
            "-A*cot(alpha*x) - B/A",
            "-A^2 + (A + n*alpha*hbar)^2 + B^2/A^2 - B^2/(A + n*alpha*hbar)^2",
            &[("A", "alpha*l"), ("B", "-alpha/2*e2"), ("x", "r")],
            ("alpha", Zero, alpha_seq),
            (0.5, 3.0),
        ),
        projection(
            "P_6c",
            "eckart",
            "coulomb",
            "-A*coth(alpha*r) + B/A",
            "A^2 - (A + n*alpha*hbar)^2 + B^2/A^2 - B^2/(A + n*alpha*hbar)^2",
            &[("A", "alpha*l"), ("B", "alpha/2*e2")],
            ("alpha", Zero, alpha_seq),
            (0.5, 3.0),
        ),
    ];
    for (id, source, target, kind, payload) in [
        ("R_a1", "morse", "scarf-hyp", EdgeKind::RestrictedExtension, Payload::RestrictedExtension),
        ("X_a", "morse", "morse-restricted-ext", EdgeKind::IsospectralExtension, Payload::IsospectralExtension),
        ("X_b", "osc-3d", "quesne-3d-osc", EdgeKind::IsospectralExtension, Payload::IsospectralExtension),
    ] {
        edges.push(TransformEdge { id: id.into(), kind, source: source.into(), target: target.into(), payload });
    }
    edges.sort_by(|a, b| a.id.cmp(&b.id));
    Graph { nodes: catalog::Catalog::builtin().ids(), edges }
}

/// The built-in graph.
pub fn graph() -> &'static Graph {
    static GRAPH: OnceLock<Graph> = OnceLock::new();
    GRAPH.get_or_init(build)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub edge: String,
    pub from: String,
    pub to: String,
    pub reversed: bool,
}

impl Graph {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    /// Edges sorted by id.
    pub fn edges(&self) -> &[TransformEdge] {
        &self.edges
    }

    pub fn edge(&self, id: &str) -> Result<&TransformEdge, TransnetError> {
        self.edges.iter().find(|e| e.id == id).ok_or_else(|| TransnetError::UnknownEdge {
            id: id.into(),
            valid: self.edges.iter().map(|e| e.id.clone()).collect(),
        })
    }

    fn check_node(&self, id: &str) -> Result<(), TransnetError> {
        if self.nodes.iter().any(|n| n == id) {
            Ok(())
        } else {
            Err(TransnetError::UnknownNode { id: id.into(), valid: self.nodes.clone() })
        }
    }

    /// Steps leaving `node`, ordered by edge id.
    fn steps_from<'a>(&'a self, node: &'a str) -> impl Iterator<Item = PathStep> + 'a {
        self.edges.iter().filter_map(move |e| {
            if e.source == node {
                Some(PathStep { edge: e.id.clone(), from: e.source.clone(), to: e.target.clone(), reversed: false })
            } else if e.target == node && e.reversible() {
                Some(PathStep { edge: e.id.clone(), from: e.target.clone(), to: e.source.clone(), reversed: true })
            } else {
                None
            }
        })
    }

    /// Breadth-first shortest path; among equally short paths the one whose
    /// edge ids come first lexicographically step by step wins.
    pub fn find_path(&self, src: &str, dst: &str) -> Result<Vec<PathStep>, TransnetError> {
        self.check_node(src)?;
        self.check_node(dst)?;
        let mut prev: BTreeMap<String, PathStep> = BTreeMap::new();
        let mut queue = VecDeque::from([src.to_string()]);
        let mut seen = std::collections::BTreeSet::from([src.to_string()]);
        while let Some(node) = queue.pop_front() {
            if node == dst {
                break;
            }
            for step in self.steps_from(&node) {
                if seen.insert(step.to.clone()) {
                    queue.push_back(step.to.clone());
                    prev.insert(step.to.clone(), step);
                }
            }
        }
        if !seen.contains(dst) {
            return Err(TransnetError::Unreachable { src: src.into(), dst: dst.into() });
        }
        let mut path = Vec::new();
        let mut at = dst.to_string();
        while at != src {
            let step = prev[&at].clone();
            at = step.from.clone();
            path.push(step);
        }
        path.reverse();
        Ok(path)
    }

    /// Endpoints exist, PCTs stay within a type, projections go type-I → type-II.
    pub fn validate(&self) -> Result<(), TransnetError> {
        let cat = catalog::Catalog::builtin();
        for e in &self.edges {
            let (s, t) = (cat.get(&e.source)?, cat.get(&e.target)?);
            let ok = match e.kind {
                EdgeKind::Pct => s.class == t.class,
                EdgeKind::Projection => s.class == Class::TypeI && t.class == Class::TypeII,
                EdgeKind::IsospectralExtension => s.class.is_conventional() && t.class == Class::Extended,
                EdgeKind::RestrictedExtension => s.class == Class::TypeII && t.class == Class::TypeI,
            };
            if !ok {
                return Err(TransnetError::Invariant(format!(
                    "{} ({}) joins {:?} to {:?}",
                    e.id, e.kind, s.class, t.class
                )));
            }
        }
        Ok(())
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let cat = catalog::Catalog::builtin();
        let mut s = String::from("digraph shape_invariance {\n  rankdir=LR;\n");
        for id in &self.nodes {
            let (label, shape) = match cat.get(id) {
                Ok(sp) => (
                    sp.name.clone(),
                    match sp.class {
                        Class::TypeI => "ellipse",
                        Class::TypeII => "box",
                        Class::Extended => "hexagon",
                    },
                ),
                Err(_) => (id.clone(), "ellipse"),
            };
            let _ = writeln!(s, "  \"{id}\" [label=\"{label}\", shape={shape}];");
        }
        for e in &self.edges {
            let style = match e.kind {
                EdgeKind::Pct => "dir=both",
                EdgeKind::Projection => "style=dashed, arrowhead=normalnormal",
                EdgeKind::IsospectralExtension => "style=dotted",
                EdgeKind::RestrictedExtension => "style=bold, color=red",
            };
            let _ = writeln!(s, "  \"{}\" -> \"{}\" [label=\"{}\", {style}];", e.source, e.target, e.id);
        }
        s.push_str("}\n");
        s
    }
}

/// Shortest path in the built-in graph.
pub fn find_path(src: &str, dst: &str) -> Result<Vec<PathStep>, TransnetError> {
    graph().find_path(src, dst)
}

/// Transformed potential u̇²[V(u(z)) − E] + ½(3ü²/(2u̇²) − u⃛/u̇), in `z`.
pub fn pct_transform(v: &Expr, x: &str, e: f64, u: &Expr, z: &str) -> Result<Expr, TransnetError> {
    let u1 = u.differentiate(z);
    if u1.is_zero() {
        return Err(TransnetError::DegenerateSubstitution);
    }
    let u2 = u1.differentiate(z);
    let u3 = u2.differentiate(z);
    let composed = v.substitute(x, u);
    let shifted = if e == 0.0 { composed } else { composed - Expr::float(e) };
    let schwarz = (Expr::int(3) * u2.pow(2) / (Expr::int(2) * u1.pow(2)) - u3 / &u1) / Expr::int(2);
    Ok(u1.pow(2) * shifted + schwarz)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PctReport {
    pub edge: String,
    pub source: String,
    pub target: String,
    pub energy: f64,
    pub source_params: BTreeMap<String, f64>,
    /// Target parameters as (re, im).
    pub target_params: BTreeMap<String, (f64, f64)>,
    pub samples: usize,
    /// Mean of Δ(z) = Ṽ(z) − V_target(z), as (re, im).
    pub offset: (f64, f64),
    /// −offset: the energy level the transformed equation sits at.
    pub emergent_energy: (f64, f64),
    pub stddev: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn v_minus(s: &Superpotential) -> Expr {
    partners_of(&s.w, &s.variable).v_minus
}

/// Check that a PCT edge turns the source V₋ at energy `e` into the target
/// V₋ plus a constant. Target parameters come from the shipped
/// correspondence unless given.
pub fn verify_pct_edge(
    edge_id: &str,
    source_params: &Bindings,
    target_params: Option<&Bindings>,
    e: f64,
    samples: usize,
) -> Result<PctReport, TransnetError> {
    let edge = graph().edge(edge_id)?;
    let Payload::Pct(recipe) = &edge.payload else {
        return Err(TransnetError::WrongKind { id: edge.id.clone(), kind: edge.kind, expected: EdgeKind::Pct });
    };
    let (src, tgt) = (catalog::get(&edge.source)?, catalog::get(&edge.target)?);
    if let Some(h) = source_params.get_real("hbar").filter(|h| *h != 1.0) {
        return Err(TransnetError::HbarNotOne(h));
    }
    let sp = src.complete_bindings(source_params)?;
    src.check_constraints(&sp)?;
    let tp = match target_params {
        Some(t) => t.clone().with("hbar", 1.0),
        None => {
            let (_, f) = recipe.correspondence.ok_or_else(|| TransnetError::NoCorrespondence(edge.id.clone()))?;
            f(&sp, e)?
        }
    };
    let transformed = pct_transform(&v_minus(src), &src.variable, e, &recipe.u, &tgt.variable)?;
    let target_v = v_minus(tgt);
    let du = recipe.u.differentiate(&tgt.variable);

    let mut sb = sp.clone().with_mode(EvalMode::Complex);
    let mut tb = tp.clone().with_mode(EvalMode::Complex);
    let (lo, hi) = tgt.domain.sample_range();
    let n = samples.max(2);
    let mut deltas = Vec::with_capacity(n);
    for i in 0..n {
        let z = lo + (i as f64 + 0.5) * (hi - lo) / n as f64;
        sb.set(&tgt.variable, z);
        tb.set(&tgt.variable, z);
        if evaluate(&du, &sb)?.norm() < 1e-12 {
            return Err(TransnetError::VanishingJacobian(z));
        }
        let vt = evaluate(&transformed, &sb)?;
        if !recipe.complex && vt.im.abs() > BRANCH_TOL * (1.0 + vt.re.abs()) {
            return Err(TransnetError::BranchCut { z, imag: vt.im });
        }
        deltas.push(vt - evaluate(&target_v, &tb)?);
    }
    let mean = deltas.iter().sum::<Complex64>() / n as f64;
    let stddev = (deltas.iter().map(|d| (d - mean).norm_sqr()).sum::<f64>() / n as f64).sqrt();
    let tolerance = PCT_TOL * (1.0 + mean.norm());
    Ok(PctReport {
        edge: edge.id.clone(),
        source: edge.source.clone(),
        target: edge.target.clone(),
        energy: e,
        source_params: sp.to_real_map(),
        target_params: tp.iter().map(|(k, v)| (k.to_string(), (v.re, v.im))).collect(),
        samples: n,
        offset: (mean.re, mean.im),
        emergent_energy: (-mean.re, -mean.im),
        stddev,
        tolerance,
        pass: stddev < tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnergyComparison {
    pub n: u32,
    pub projected: f64,
    pub target: f64,
    /// Relative error, or absolute when the target level is 0.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectionStep {
    pub limit_value: f64,
    pub sup_error: f64,
    pub energies: Vec<EnergyComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectionReport {
    pub edge: String,
    pub source: String,
    pub target: String,
    pub limit_var: String,
    pub direction: LimitDirection,
    pub interval: (f64, f64),
    pub target_params: BTreeMap<String, f64>,
    pub steps: Vec<ProjectionStep>,
    /// sup_error[i+1] / sup_error[i].
    pub ratios: Vec<f64>,
    pub ratio_bound: f64,
    pub strictly_decreasing: bool,
    pub pass: bool,
}

impl ProjectionRecipe {
    /// Source W and energy after the maps, in the target variable.
    pub fn mapped(&self) -> (Expr, Expr) {
        self.maps.iter().fold((self.source_w.clone(), self.source_energy.clone()), |(w, en), (k, v)| {
            (w.substitute(k, v), en.substitute(k, v))
        })
    }

    /// Mapped value of each source parameter at the given limit value.
    fn mapped_source_params(&self, tb: &Bindings) -> Result<Bindings, ExprError> {
        let mut b = Bindings::real().with("hbar", 1.0);
        let mut applied: Vec<(String, Expr)> = Vec::new();
        for (k, v) in &self.maps {
            if self.source_w.depends_on(k) && !["x", "r"].contains(&k.as_str()) {
                applied.push((k.clone(), v.clone()));
            }
        }
        for (k, v) in applied {
            b.set(&k, crate::expr::evaluate_real(&v, tb)?);
        }
        for name in ["A", "B"] {
            if !b.contains(name) {
                if let Some(v) = tb.get_real(name) {
                    b.set(name, v);
                }
            }
        }
        Ok(b)
    }
}

fn sequence_ok(seq: &[f64], dir: LimitDirection) -> bool {
    seq.len() >= 2
        && seq.iter().all(|v| v.is_finite())
        && seq.windows(2).all(|w| match dir {
            LimitDirection::Zero => w[1].abs() < w[0].abs(),
            LimitDirection::Infinity => w[1] > w[0],
        })
}

/// Apply a projection along a limit sequence and measure how fast the mapped
/// superpotential approaches the target on the edge's compare interval.
pub fn verify_projection(
    edge_id: &str,
    sequence: Option<&[f64]>,
    target_params: Option<&Bindings>,
) -> Result<ProjectionReport, TransnetError> {
    let edge = graph().edge(edge_id)?;
    let Payload::Projection(recipe) = &edge.payload else {
        return Err(TransnetError::WrongKind { id: edge.id.clone(), kind: edge.kind, expected: EdgeKind::Projection });
    };
    let seq = sequence.unwrap_or(&recipe.default_sequence);
    if !sequence_ok(seq, recipe.direction) {
        return Err(TransnetError::BadSequence);
    }
    let (src, tgt) = (catalog::get(&edge.source)?, catalog::get(&edge.target)?);
    let base = match target_params {
        Some(b) => b.merged(&Bindings::real().with("hbar", 1.0)),
        None => tgt.default_bindings(),
    };
    let tb0 = tgt.complete_bindings(&base)?;
    tgt.check_constraints(&tb0)?;
    let (w_mapped, e_mapped) = recipe.mapped();
    let z = &tgt.variable;

    let mut steps = Vec::with_capacity(seq.len());
    for &lv in seq {
        let mut tb = tb0.clone().with(&recipe.limit_var, lv);
        let sp = recipe.mapped_source_params(&tb)?;
        src.check_constraints(&sp)?;
        let (lo, hi) = recipe.interval;
        let mut sup: f64 = 0.0;
        for i in 0..SUP_POINTS {
            let x = lo + (hi - lo) * i as f64 / (SUP_POINTS - 1) as f64;
            tb.set(z, x);
            let d = crate::expr::evaluate_real(&w_mapped, &tb)? - crate::expr::evaluate_real(&tgt.w, &tb)?;
            sup = sup.max(d.abs());
        }
        let mut energies = Vec::with_capacity(4);
        for n in 0..4u32 {
            let projected = crate::expr::evaluate_real(&e_mapped, &tb.clone().with("n", f64::from(n)))?;
            let target = catalog::energy_at(tgt, n, &tb0)?;
            let diff = (projected - target).abs();
            let error = if target == 0.0 { diff } else { diff / target.abs() };
            energies.push(EnergyComparison { n, projected, target, error });
        }
        steps.push(ProjectionStep { limit_value: lv, sup_error: sup, energies });
    }
    let ratios: Vec<f64> = steps.windows(2).map(|w| w[1].sup_error / w[0].sup_error).collect();
    let strictly_decreasing = steps.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
    let pass = strictly_decreasing && ratios.iter().all(|r| *r < RATIO_BOUND);
    Ok(ProjectionReport {
        edge: edge.id.clone(),
        source: edge.source.clone(),
        target: edge.target.clone(),
        limit_var: recipe.limit_var.clone(),
        direction: recipe.direction,
        interval: recipe.interval,
        target_params: tb0.to_real_map(),
        steps,
        ratios,
        ratio_bound: RATIO_BOUND,
        strictly_decreasing,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_shape() {
        let g = graph();
        g.validate().unwrap();
        let of = |k: EdgeKind| g.edges().iter().filter(|e| e.kind == k).map(|e| e.id.as_str()).collect::<Vec<_>>();
        assert_eq!(of(EdgeKind::Pct), ["T_12", "T_23", "T_34", "T_45", "T_56", "T_61", "T_ab", "T_bc", "T_ca", "T_db"]);
        assert_eq!(of(EdgeKind::Projection), ["P_1a", "P_2a", "P_2b", "P_3b", "P_4c", "P_6c"]);
        assert_eq!(of(EdgeKind::RestrictedExtension), ["R_a1"]);
        let type_i: Vec<_> = catalog::Catalog::builtin().iter().filter(|s| s.class == Class::TypeI).collect();
        assert_eq!(type_i.len(), 6);
        for s in type_i {
            let degree =
                g.edges().iter().filter(|e| e.kind == EdgeKind::Pct && (e.source == s.id || e.target == s.id)).count();
            assert_eq!(degree, 2, "{} should sit on the PCT hexagon", s.id);
        }
    }

    #[test]
    fn morse_reaches_scarf_directly() {
        let p = find_path("morse", "scarf-hyp").unwrap();
        assert_eq!(p.iter().map(|s| s.edge.as_str()).collect::<Vec<_>>(), ["R_a1"]);
        assert!(find_path("morse", "morse").unwrap().is_empty());
    }

    #[test]
    fn every_pair_connected() {
        let ids = graph().nodes().to_vec();
        assert_eq!(ids.len(), 12);
        for a in &ids {
            for b in &ids {
                let p = find_path(a, b).unwrap_or_else(|e| panic!("{a} -> {b}: {e}"));
                let mut at = a.clone();
                for s in &p {
                    assert_eq!(s.from, at);
                    at = s.to.clone();
                }
                assert_eq!(&at, b);
            }
        }
    }

    #[test]
    fn projections_are_one_way() {
        let p = find_path("morse", "gen-poschl-teller").unwrap();
        assert!(p.iter().all(|s| !s.edge.starts_with('P')));
    }

    #[test]
    fn unknown_node() {
        assert!(matches!(find_path("morse", "nosuch"), Err(TransnetError::UnknownNode { .. })));
    }

    #[test]
    fn dot_lists_every_edge() {
        let dot = graph().to_dot();
        for e in graph().edges() {
            assert!(dot.contains(&format!("label=\"{}\"", e.id)));
        }
        assert!(dot.starts_with("digraph"));
    }

    #[test]
    fn identity_substitution() {
        let v = parse("x^2 + sin(x)").unwrap();
        let t = pct_transform(&v, "x", 0.0, &Expr::sym("z"), "z").unwrap();
        assert_eq!(t, parse("z^2 + sin(z)").unwrap());
        assert!(matches!(
            pct_transform(&v, "x", 0.0, &Expr::float(2.0), "z"),
            Err(TransnetError::DegenerateSubstitution)
        ));
    }

    #[test]
    fn type_ii_cycle_edges_are_constant() {
        let cases = [
            ("T_ab", vec![("A", 3.0), ("B", 0.7)]),
            ("T_bc", vec![("omega", 1.3), ("l", 1.5)]),
            ("T_ca", vec![("e2", 2.0), ("l", 1.2)]),
        ];
        for (id, params) in cases {
            for e in [0.0, 0.4] {
                let r = verify_pct_edge(id, &Bindings::from_pairs(&params), None, e, 64).unwrap();
                assert!(r.pass, "{id} at E={e}: {r:?}");
            }
        }
    }

    #[test]
    fn morse_ground_state_lands_on_oscillator_ground_state() {
        let r = verify_pct_edge("T_ab", &Bindings::from_pairs(&[("A", 5.0), ("B", 1.0)]), None, 0.0, 64).unwrap();
        assert!(r.offset.0.abs() < 1e-9, "{r:?}");
        // E_1 = 9 maps to 2ω·1 = 8B.
        let r = verify_pct_edge("T_ab", &Bindings::from_pairs(&[("A", 5.0), ("B", 1.0)]), None, 9.0, 64).unwrap();
        assert!((r.emergent_energy.0 - 8.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn complex_type_i_edges() {
        for id in ["T_12", "T_23"] {
            let r = verify_pct_edge(id, &Bindings::from_pairs(&[("A", 3.0), ("B", 1.0)]), None, 0.0, 64);
            if id == "T_23" {
                // Source must satisfy B > A for the generalized Pöschl-Teller entry.
                assert!(r.is_err());
                let r = verify_pct_edge(id, &Bindings::from_pairs(&[("A", 2.0), ("B", 3.0)]), None, 0.5, 64).unwrap();
                assert!(r.pass, "{r:?}");
            } else {
                assert!(r.unwrap().pass);
            }
        }
    }

    #[test]
    fn wrong_correspondence_fails() {
        let t = Bindings::from_pairs(&[("omega", 4.0), ("l", 3.0)]);
        let r = verify_pct_edge("T_ab", &Bindings::from_pairs(&[("A", 5.0), ("B", 1.0)]), Some(&t), 0.0, 64).unwrap();
        assert!(!r.pass);
        assert!(matches!(
            verify_pct_edge("T_34", &Bindings::from_pairs(&[("A", 3.0), ("B", 1.0)]), None, 0.0, 16),
            Err(TransnetError::NoCorrespondence(_))
        ));
        assert!(matches!(
            verify_pct_edge("P_1a", &Bindings::real(), None, 0.0, 16),
            Err(TransnetError::WrongKind { .. })
        ));
    }

    #[test]
    fn projections_converge() {
        for id in ["P_1a", "P_2a", "P_2b", "P_3b", "P_4c", "P_6c"] {
            let r = verify_projection(id, None, None).unwrap();
            assert!(r.pass, "{id}: {:?} {:?}", r.steps.iter().map(|s| s.sup_error).collect::<Vec<_>>(), r.ratios);
        }
    }

    #[test]
    fn rosen_morse_energies_reach_coulomb() {
        let r = verify_projection("P_4c", Some(&[1e-2, 1e-3]), None).unwrap();
        let last = r.steps.last().unwrap();
        for c in &last.energies[1..] {
            assert!(c.error < 1e-3, "{c:?}");
        }
    }

    #[test]
    fn projection_rejects_bad_input() {
        assert!(matches!(verify_projection("P_1a", Some(&[6.0, 4.0]), None), Err(TransnetError::BadSequence)));
        // B e^β / 2 must exceed A = 5 for the Pöschl-Teller source.
        assert!(matches!(
            verify_projection("P_2a", Some(&[1.0, 2.0]), None),
            Err(TransnetError::Catalog(CatalogError::ConstraintViolated { .. }))
        ));
    }
}
