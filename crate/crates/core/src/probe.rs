//! Join-isomorphism and latching-object probes on a full directed ball.
//!
//! Both report what they find; neither assumes the isomorphism holds.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flow::{ball_diagram, find_isomorphism, join, BallDiagram, CombFlow, FlowMorphism};
use crate::presentation::{colimit, level_profile, Colimit, FlowSummary};

/// One triple `α < β < γ`: is `F↾[α,β] * F↾[β,γ]` isomorphic to `F↾[α,γ]`?
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinCase {
    pub triple: [String; 3],
    pub join_states: usize,
    pub interval_states: usize,
    /// States of `[α,γ]` incomparable to `β`; these cannot appear in the join.
    pub incomparable_to_middle: Vec<String>,
    pub isomorphic: bool,
    /// The state bijection when `isomorphic`.
    pub witness: Option<Vec<(String, String)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatchingComparison {
    /// Labels of the objects of the punctured index category.
    pub objects: Vec<String>,
    pub arrows: Vec<String>,
    pub components: Vec<Vec<String>>,
    pub latching: FlowSummary,
    pub terminal: FlowSummary,
    pub isomorphic: bool,
    /// Differences in state count and per-pair level sizes, when not isomorphic.
    pub differences: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub joins: Vec<JoinCase>,
    pub joins_isomorphic: usize,
    pub latching: LatchingComparison,
    pub consistent: bool,
    /// Internal consistency problems; empty when `consistent`.
    pub inconsistencies: Vec<String>,
}

/// Colimit of the ball diagram restricted to the non-terminal objects.
pub fn latching_object(g: &BallDiagram, budget: usize) -> Result<Colimit> {
    let keep: Vec<usize> = (0..g.objects.len()).filter(|&o| o != g.category.terminal).collect();
    let pos = |o: usize| keep.iter().position(|&k| k == o);
    let objects: Vec<&CombFlow> = keep.iter().map(|&o| &g.objects[o]).collect();
    let arrows: Vec<(usize, usize, &FlowMorphism)> = g
        .category
        .arrows
        .iter()
        .zip(&g.arrows)
        .filter_map(|(a, f)| Some((pos(a.source)?, pos(a.target)?, f)))
        .collect();
    colimit(&objects, &arrows, budget)
}

fn punctured_components(g: &BallDiagram) -> Vec<Vec<String>> {
    let n = g.objects.len();
    let mut comp: Vec<usize> = (0..n).collect();
    fn root(c: &mut [usize], mut x: usize) -> usize {
        while c[x] != x {
            c[x] = c[c[x]];
            x = c[x];
        }
        x
    }
    for a in &g.category.arrows {
        if a.source != g.category.terminal && a.target != g.category.terminal {
            let (r, s) = (root(&mut comp, a.source), root(&mut comp, a.target));
            comp[r] = s;
        }
    }
    let mut groups: Vec<(usize, Vec<String>)> = Vec::new();
    for o in (0..n).filter(|&o| o != g.category.terminal) {
        let r = root(&mut comp, o);
        match groups.iter_mut().find(|(k, _)| *k == r) {
            Some((_, v)) => v.push(g.category.object_label(o)),
            None => groups.push((r, vec![g.category.object_label(o)])),
        }
    }
    groups.into_iter().map(|(_, v)| v).collect()
}

fn differences(x: &CombFlow, y: &CombFlow) -> Vec<String> {
    let mut out = Vec::new();
    if x.state_count() != y.state_count() {
        out.push(format!("state count {} vs {}", x.state_count(), y.state_count()));
    }
    let (px, py) = (level_profile(x), level_profile(y));
    let mut sx: Vec<&Vec<usize>> = px.values().collect();
    let mut sy: Vec<&Vec<usize>> = py.values().collect();
    sx.sort();
    sy.sort();
    if sx.len() != sy.len() {
        out.push(format!("nonempty path spaces {} vs {}", sx.len(), sy.len()));
    } else if sx != sy {
        out.push(format!("path level sizes {sx:?} vs {sy:?}"));
    }
    if out.is_empty() {
        out.push("same counts, no isomorphism found".into());
    }
    out
}

/// Runs both probes on the ball `d`: every join triple of its state poset,
/// then the latching object of its ball diagram.
pub fn lemma_probe(d: &CombFlow, budget: usize) -> Result<ProbeReport> {
    let poset = d.state_poset()?;
    d.require_ball()?;
    let mut joins = Vec::new();
    let n = poset.len();
    for a in 0..n {
        for b in (0..n).filter(|&b| poset.lt(a, b)) {
            for c in (0..n).filter(|&c| poset.lt(b, c)) {
                let left = d.interval(a, b);
                let right = d.interval(b, c);
                let whole = d.interval(a, c);
                let j = join(&left, &right, budget)?;
                let iso = find_isomorphism(&j, &whole);
                let incomparable = poset
                    .interval(a, c)
                    .into_iter()
                    .filter(|&s| !poset.comparable(s, b))
                    .map(|s| poset.name(s).to_string())
                    .collect();
                joins.push(JoinCase {
                    triple: [poset.name(a).into(), poset.name(b).into(), poset.name(c).into()],
                    join_states: j.state_count(),
                    interval_states: whole.state_count(),
                    incomparable_to_middle: incomparable,
                    isomorphic: iso.is_some(),
                    witness: iso.map(|f| {
                        f.states
                            .iter()
                            .enumerate()
                            .map(|(s, &t)| (j.state_name(s).to_string(), whole.state_name(t).to_string()))
                            .collect()
                    }),
                });
            }
        }
    }
    let g = ball_diagram(d, budget)?;
    let lat = latching_object(&g, budget)?;
    let terminal = g.terminal();
    let iso = find_isomorphism(&lat.flow, terminal).is_some();
    let cat = &g.category;
    let latching = LatchingComparison {
        objects: (0..cat.objects.len()).filter(|&o| o != cat.terminal).map(|o| cat.object_label(o)).collect(),
        arrows: cat
            .arrows
            .iter()
            .filter(|a| a.target != cat.terminal)
            .map(|a| format!("d{}: {} -> {}", a.index, cat.object_label(a.source), cat.object_label(a.target)))
            .collect(),
        components: punctured_components(&g),
        latching: FlowSummary::of(&lat.flow),
        terminal: FlowSummary::of(terminal),
        isomorphic: iso,
        differences: if iso { Vec::new() } else { differences(&lat.flow, terminal) },
    };
    let mut inconsistencies = Vec::new();
    for case in &joins {
        let t = case.triple.join(",");
        if case.isomorphic != case.witness.is_some() {
            inconsistencies.push(format!("{t}: verdict and witness disagree"));
        }
        if case.isomorphic && case.join_states != case.interval_states {
            inconsistencies.push(format!("{t}: isomorphic with different state counts"));
        }
        if case.isomorphic && !case.incomparable_to_middle.is_empty() {
            inconsistencies.push(format!("{t}: isomorphic although states avoid the middle"));
        }
    }
    if latching.isomorphic == !latching.differences.is_empty() {
        inconsistencies.push("latching verdict and differences disagree".into());
    }
    if latching.objects.len() != latching.components.iter().map(Vec::len).sum::<usize>() {
        inconsistencies.push("components do not partition the punctured category".into());
    }
    Ok(ProbeReport {
        joins_isomorphic: joins.iter().filter(|c| c.isomorphic).count(),
        joins,
        latching,
        consistent: inconsistencies.is_empty(),
        inconsistencies,
    })
}
