//! The single structured document emitted per run, and its text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dihomotopy::{BranchReport, InvarianceReport, NewStateStatus, Resultat1Report};
use crate::flow::{BallReport, FlowReport};
use crate::homology::HomologyGroup;
use crate::poset::{PosetReport, ReedyReport};
use crate::presentation::FlowSummary;
use crate::probe::ProbeReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }

    pub fn of(pass: bool) -> Status {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Body>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", content = "report", rename_all = "kebab-case")]
pub enum Body {
    PosetReport(PosetBody),
    Validate(ValidateBody),
    Homology(HomologyBody),
    Branch(BranchReport),
    Merge(BranchReport),
    BallCheck(BallCheckBody),
    Subdivide(SubdivideBody),
    CheckInvariance(InvarianceBody),
    LemmaProbe(ProbeReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthEntry {
    pub from: String,
    pub to: String,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectEntry {
    pub chain: String,
    pub degree: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowEntry {
    pub index: usize,
    pub source: String,
    pub target: String,
    pub source_degree: u64,
    pub target_degree: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetBody {
    pub validation: PosetReport,
    pub lengths: Vec<LengthEntry>,
    pub objects: Vec<ObjectEntry>,
    pub arrows: Vec<ArrowEntry>,
    pub terminal: Option<String>,
    pub simplicial_relations: bool,
    pub reedy: Option<ReedyReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateBody {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poset: Option<PosetReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<FlowSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceHomology {
    pub space: String,
    /// `(degree, group)`
    pub groups: Vec<(usize, HomologyGroup)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyBody {
    pub cap: usize,
    pub spaces: Vec<SpaceHomology>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallCheckBody {
    pub ball: BallReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branching_at_bottom: Option<Resultat1Report>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivideBody {
    pub edge: (String, String, String),
    pub ball_vertex: String,
    pub ball_vertex_choices: usize,
    pub state_map: Vec<(String, String)>,
    pub new_states: Vec<String>,
    pub flow: FlowSummary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceCase {
    pub label: String,
    pub report: InvarianceReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceBody {
    pub cases: Vec<InvarianceCase>,
    pub passed: usize,
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub counterexamples: Vec<String>,
}

impl Document {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(input) = &self.input {
            let _ = writeln!(s, "input: {input}");
        }
        if let Some(e) = &self.error {
            match (e.line, e.column) {
                (Some(l), Some(c)) => {
                    let _ = writeln!(s, "error ({}) at {l}:{c}: {}", e.kind, e.message);
                }
                _ => {
                    let _ = writeln!(s, "error ({}): {}", e.kind, e.message);
                }
            }
        }
        if let Some(body) = &self.result {
            body.render(&mut s);
        }
        let _ = writeln!(s, "status: {}", match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        });
        s
    }
}

fn groups(g: &Option<Vec<HomologyGroup>>) -> String {
    match g {
        None => "empty".into(),
        Some(v) => v.iter().enumerate().map(|(n, h)| format!("H{n}={h}")).collect::<Vec<_>>().join(" "),
    }
}

impl Body {
    fn render(&self, s: &mut String) {
        match self {
            Body::PosetReport(b) => {
                let v = &b.validation;
                let _ = writeln!(s, "elements: {}", v.elements);
                let _ = writeln!(s, "bounded: {} (bottom {}, top {})", v.bounded, v.bottom.as_deref().unwrap_or("-"), v.top.as_deref().unwrap_or("-"));
                let _ = writeln!(s, "locally finite: {}", v.locally_finite);
                let _ = writeln!(s, "chain lengths:");
                for l in &b.lengths {
                    let _ = writeln!(s, "  l({},{}) = {}", l.from, l.to, l.length);
                }
                if !b.objects.is_empty() {
                    let _ = writeln!(s, "objects ({}):", b.objects.len());
                    for o in &b.objects {
                        let _ = writeln!(s, "  {}  d={}", o.chain, o.degree);
                    }
                    let _ = writeln!(s, "arrows ({}):", b.arrows.len());
                    for a in &b.arrows {
                        let _ = writeln!(s, "  d{}: {} -> {}  ({} -> {})", a.index, a.source, a.target, a.source_degree, a.target_degree);
                    }
                }
                if let Some(t) = &b.terminal {
                    let _ = writeln!(s, "terminal: {t}");
                }
                let _ = writeln!(s, "simplicial relations: {}", b.simplicial_relations);
                if let Some(r) = &b.reedy {
                    let _ = writeln!(
                        s,
                        "direct category: {} ({} arrows, {} triangles checked)",
                        r.direct, r.arrows_checked, r.triangles_checked
                    );
                    for d in &r.degree_violations {
                        let _ = writeln!(s, "  degree violation: d{} {} -> {} ({} -> {})", d.index, d.source, d.target, d.source_degree, d.target_degree);
                    }
                    for t in &r.triangle_violations {
                        let _ = writeln!(s, "  triangle violation: {:?} lengths {:?}", t.simplex, t.lengths);
                    }
                }
            }
            Body::Validate(b) => {
                if let Some(v) = &b.poset {
                    let _ = writeln!(s, "poset: {} elements, bounded {}", v.elements, v.bounded);
                }
                if let Some(f) = &b.flow {
                    let _ = writeln!(s, "states: {}", f.states.join(" "));
                    let _ = writeln!(s, "loopless: {}", f.loopless);
                    let _ = writeln!(s, "initial: {}", f.initial_states.join(" "));
                    let _ = writeln!(s, "final: {}", f.final_states.join(" "));
                }
                if let Some(sum) = &b.summary {
                    for p in &sum.paths {
                        let _ = writeln!(s, "  P({},{}) sizes {:?} vertices {}", p.source, p.target, p.sizes, p.vertices.join(" "));
                    }
                }
            }
            Body::Homology(b) => {
                let _ = writeln!(s, "cap: {}", b.cap);
                for sp in &b.spaces {
                    let gs: Vec<String> = sp.groups.iter().map(|(n, g)| format!("H{n}={g}")).collect();
                    let _ = writeln!(s, "  {}: {}", sp.space, gs.join(" "));
                }
            }
            Body::Branch(r) | Body::Merge(r) => {
                let _ = writeln!(s, "{} spaces:", r.direction);
                for st in &r.states {
                    let _ = writeln!(s, "  {}: {}", st.state, groups(&st.homology));
                    for (i, c) in st.classes.iter().enumerate() {
                        let _ = writeln!(s, "    class {i}: {}", c.join(" "));
                    }
                }
            }
            Body::BallCheck(b) => {
                let r = &b.ball;
                let _ = writeln!(s, "initial: {}  final: {}", r.initial_states.join(" "), r.final_states.join(" "));
                let _ = writeln!(s, "unique endpoints: {}", r.unique_endpoints);
                let _ = writeln!(s, "loopless: {}", r.loopless);
                let _ = writeln!(s, "all states between: {}", r.all_between);
                let nc: Vec<String> = r.non_contractible.iter().map(|(a, b)| format!("P({a},{b})")).collect();
                let _ = writeln!(s, "non-contractible path spaces: {}", if nc.is_empty() { "none".into() } else { nc.join(" ") });
                let _ = writeln!(s, "full directed ball: {}", r.is_ball);
                if let Some(t) = &b.branching_at_bottom {
                    let _ = writeln!(s, "branching at {}: poset-flow classes {}, homology {}, contractible {}", t.bottom, t.poset_flow_classes, groups(&Some(t.bottom_homology.clone())), t.contractible);
                }
                let _ = writeln!(s, "note: {}", r.contractibility);
            }
            Body::Subdivide(b) => {
                let _ = writeln!(s, "edge: {} -> {} vertex {}", b.edge.0, b.edge.1, b.edge.2);
                let _ = writeln!(s, "ball vertex: {} (of {})", b.ball_vertex, b.ball_vertex_choices);
                let m: Vec<String> = b.state_map.iter().map(|(a, b)| format!("{a}->{b}")).collect();
                let _ = writeln!(s, "state map: {}", m.join(" "));
                let _ = writeln!(s, "new states: {}", b.new_states.join(" "));
                for p in &b.flow.paths {
                    let _ = writeln!(s, "  P({},{}) sizes {:?}", p.source, p.target, p.sizes);
                }
            }
            Body::CheckInvariance(b) => {
                for c in &b.cases {
                    let _ = writeln!(s, "case {}: {}", c.label, if c.report.pass { "PASS" } else { "FAIL" });
                    if b.cases.len() == 1 {
                        for cmp in &c.report.comparisons {
                            let _ = writeln!(
                                s,
                                "  {} {} -> {}: {} vs {}{}",
                                cmp.direction,
                                cmp.state,
                                cmp.image,
                                groups(&cmp.before),
                                groups(&cmp.after),
                                if cmp.equal { "" } else { "  DIFFERENT" }
                            );
                        }
                        for n in &c.report.new_states {
                            let st = match n.status {
                                NewStateStatus::Empty => "empty",
                                NewStateStatus::Contractible => "contractible",
                                NewStateStatus::NotContractible => "NOT contractible",
                            };
                            let _ = writeln!(s, "  {} new state {}: {st}", n.direction, n.state);
                        }
                    }
                    for f in &c.report.failures {
                        let _ = writeln!(s, "  failure: {f}");
                    }
                }
                let _ = writeln!(s, "passed {} failed {}", b.passed, b.failed);
                for c in &b.counterexamples {
                    let _ = writeln!(s, "counterexample written to {c}");
                }
            }
            Body::LemmaProbe(r) => {
                let _ = writeln!(s, "join probe ({} of {} isomorphic):", r.joins_isomorphic, r.joins.len());
                for j in &r.joins {
                    let _ = write!(s, "  [{},{}]*[{},{}] vs [{},{}]: ", j.triple[0], j.triple[1], j.triple[1], j.triple[2], j.triple[0], j.triple[2]);
                    match &j.witness {
                        Some(w) => {
                            let m: Vec<String> = w.iter().map(|(a, b)| format!("{a}->{b}")).collect();
                            let _ = writeln!(s, "isomorphic via {}", m.join(" "));
                        }
                        None => {
                            let _ = writeln!(
                                s,
                                "not isomorphic ({} vs {} states; incomparable to {}: {})",
                                j.join_states,
                                j.interval_states,
                                j.triple[1],
                                if j.incomparable_to_middle.is_empty() { "none".into() } else { j.incomparable_to_middle.join(" ") }
                            );
                        }
                    }
                }
                let l = &r.latching;
                let _ = writeln!(s, "latching object over {} objects, {} arrows", l.objects.len(), l.arrows.len());
                for a in &l.arrows {
                    let _ = writeln!(s, "  {a}");
                }
                for (i, c) in l.components.iter().enumerate() {
                    let _ = writeln!(s, "  component {i}: {}", c.join(" "));
                }
                let _ = writeln!(s, "  latching states: {}", l.latching.states.join(" "));
                let _ = writeln!(s, "  terminal states: {}", l.terminal.states.join(" "));
                let _ = writeln!(s, "  isomorphic to the terminal object: {}", l.isomorphic);
                for d in &l.differences {
                    let _ = writeln!(s, "  difference: {d}");
                }
                let _ = writeln!(s, "consistent: {}", r.consistent);
                for i in &r.inconsistencies {
                    let _ = writeln!(s, "  inconsistency: {i}");
                }
            }
        }
    }
}
