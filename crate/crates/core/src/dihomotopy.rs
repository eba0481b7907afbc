//! Branching and merging spaces, their homology, T-subdivision and the
//! per-state invariance check.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{CombFlow, FlowMorphism, Pair, CONTRACTIBILITY_NOTE};
use crate::homology::{homology_profile, is_homology_contractible, HomologyGroup};
use crate::presentation::colimit;
use crate::simpset::{FinSimplicialSet, SimplicialMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Branching: `x ~ x*y`, grouped by source state.
    Minus,
    /// Merging: `y ~ x*y`, grouped by target state.
    Plus,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Minus, Direction::Plus];
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Minus => "branching",
            Direction::Plus => "merging",
        })
    }
}

/// The quotient space at one state, with the class map from each path space
/// that starts (or ends) there.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub state: usize,
    /// `None` when no path starts (ends) at the state.
    pub space: Option<FinSimplicialSet>,
    /// `(other endpoint, map of P(state, other) or P(other, state) into the quotient)`.
    pub parts: Vec<(usize, SimplicialMap)>,
}

/// `P⁻_α X` (or `P⁺_α X`) for every state `α`.
#[derive(Debug, Clone)]
pub struct BranchSpaces {
    pub direction: Direction,
    pub states: Vec<StateSpace>,
}

pub fn branching_space(x: &CombFlow, direction: Direction) -> BranchSpaces {
    let states = (0..x.state_count()).map(|s| state_space(x, direction, s)).collect();
    BranchSpaces { direction, states }
}

fn state_space(x: &CombFlow, direction: Direction, s: usize) -> StateSpace {
    let cap = x.cap();
    let others: Vec<usize> = match direction {
        Direction::Minus => x.successors(s).collect(),
        Direction::Plus => x.predecessors(s).collect(),
    };
    if others.is_empty() {
        return StateSpace { state: s, space: None, parts: Vec::new() };
    }
    let pair = |o: usize| -> Pair {
        match direction {
            Direction::Minus => (s, o),
            Direction::Plus => (o, s),
        }
    };
    let spaces: Vec<&FinSimplicialSet> = others.iter().map(|&o| x.path(pair(o).0, pair(o).1).unwrap()).collect();
    let union = FinSimplicialSet::disjoint_union(&spaces).expect("equal caps");
    // offset of part i at level n
    let offset = |i: usize, n: usize| spaces[..i].iter().map(|sp| sp.len(n)).sum::<usize>();
    let position: BTreeMap<usize, usize> = others.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let mut seeds = Vec::new();
    for (i, &o) in others.iter().enumerate() {
        match direction {
            Direction::Minus => {
                // x in P(s,o), y in P(o,t): x ~ x*y in P(s,t)
                for t in x.successors(o) {
                    let j = position[&t];
                    let (l, r) = (spaces[i], x.path(o, t).unwrap());
                    for n in 0..=cap {
                        for a in 0..l.len(n) {
                            for b in 0..r.len(n) {
                                let z = x.compose(s, o, t, n, a, b);
                                seeds.push((n, offset(i, n) + a, offset(j, n) + z));
                            }
                        }
                    }
                }
            }
            Direction::Plus => {
                // y in P(o,s), x in P(t,o): y ~ x*y in P(t,s)
                for t in x.predecessors(o).collect::<Vec<_>>() {
                    let j = position[&t];
                    let (l, r) = (x.path(t, o).unwrap(), spaces[i]);
                    for n in 0..=cap {
                        for a in 0..l.len(n) {
                            for b in 0..r.len(n) {
                                let z = x.compose(t, o, s, n, a, b);
                                seeds.push((n, offset(i, n) + b, offset(j, n) + z));
                            }
                        }
                    }
                }
            }
        }
    }
    let (space, proj) = union.quotient(&seeds);
    let parts = others
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            let levels = (0..=cap)
                .map(|n| (0..spaces[i].len(n)).map(|k| proj.levels[n][offset(i, n) + k]).collect())
                .collect();
            (o, SimplicialMap { levels })
        })
        .collect();
    StateSpace { state: s, space: Some(space), parts }
}

/// The quotient of the whole path space `PX` by the same relation, without
/// grouping by state.
pub fn total_branching_space(x: &CombFlow, direction: Direction) -> Option<FinSimplicialSet> {
    let pairs: Vec<Pair> = x.pairs().collect();
    if pairs.is_empty() {
        return None;
    }
    let spaces: Vec<&FinSimplicialSet> = pairs.iter().map(|&(a, b)| x.path(a, b).unwrap()).collect();
    let union = FinSimplicialSet::disjoint_union(&spaces).ok()?;
    let index: BTreeMap<Pair, usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let offset = |i: usize, n: usize| spaces[..i].iter().map(|sp| sp.len(n)).sum::<usize>();
    let mut seeds = Vec::new();
    for (a, b, c) in x.triples() {
        let (l, r) = (x.path(a, b).unwrap(), x.path(b, c).unwrap());
        let (il, ir, io) = (index[&(a, b)], index[&(b, c)], index[&(a, c)]);
        for n in 0..=x.cap() {
            for p in 0..l.len(n) {
                for q in 0..r.len(n) {
                    let z = offset(io, n) + x.compose(a, b, c, n, p, q);
                    match direction {
                        Direction::Minus => seeds.push((n, offset(il, n) + p, z)),
                        Direction::Plus => seeds.push((n, offset(ir, n) + q, z)),
                    }
                }
            }
        }
    }
    Some(union.quotient(&seeds).0)
}

/// Homology of one state's quotient; `None` for an empty quotient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateProfile {
    pub state: String,
    pub homology: Option<Vec<HomologyGroup>>,
    /// Level-0 classes, each listed as `target:path` (or `source:path`).
    pub classes: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchReport {
    pub direction: Direction,
    pub states: Vec<StateProfile>,
}

pub fn branching_profile(x: &CombFlow, direction: Direction) -> BranchReport {
    let spaces = branching_space(x, direction);
    let states = spaces
        .states
        .iter()
        .map(|st| {
            let homology = st.space.as_ref().map(homology_profile);
            let nclasses = st.space.as_ref().map_or(0, |sp| sp.len(0));
            let mut classes = vec![Vec::new(); nclasses];
            for (o, m) in &st.parts {
                let (a, b) = match direction {
                    Direction::Minus => (st.state, *o),
                    Direction::Plus => (*o, st.state),
                };
                let sp = x.path(a, b).unwrap();
                for k in 0..sp.len(0) {
                    classes[m.levels[0][k] as usize].push(format!("{}:{}", x.state_name(*o), sp.name(0, k)));
                }
            }
            StateProfile { state: x.state_name(st.state).to_string(), homology, classes }
        })
        .collect();
    BranchReport { direction, states }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resultat1Report {
    pub bottom: String,
    /// Level-0 classes of the branching space at the bottom of `F(D⁰)`.
    pub poset_flow_classes: usize,
    pub single_class: bool,
    pub bottom_homology: Vec<HomologyGroup>,
    pub contractible: bool,
    pub passes: bool,
    pub contractibility: String,
}

/// The branching space at the bottom state is trivial for `F(D⁰)` and
/// homology contractible for `D`.
pub fn resultat1_check(d: &CombFlow) -> Result<Resultat1Report> {
    let (bottom, _) = d.require_ball()?;
    let poset = d.state_poset()?;
    let f = CombFlow::from_poset(&poset, d.cap());
    let fsp = state_space(&f, Direction::Minus, bottom);
    let classes = fsp.space.as_ref().map_or(0, |s| s.len(0));
    let dsp = state_space(d, Direction::Minus, bottom).space.expect("a ball has paths out of its bottom");
    let contractible = is_homology_contractible(&dsp)?;
    Ok(Resultat1Report {
        bottom: d.state_name(bottom).to_string(),
        poset_flow_classes: classes,
        single_class: classes == 1,
        bottom_homology: homology_profile(&dsp),
        contractible,
        passes: classes == 1 && contractible,
        contractibility: CONTRACTIBILITY_NOTE.to_string(),
    })
}

/// Result of replacing a level-0 path by a full directed ball.
#[derive(Debug, Clone)]
pub struct Subdivision {
    pub flow: CombFlow,
    /// The canonical map `X → Y`.
    pub map: FlowMorphism,
    /// The vertex of `P(0̂,1̂)D` glued to the chosen path.
    pub ball_vertex: String,
    /// How many level-0 vertices `P(0̂,1̂)D` has; the first is used.
    pub ball_vertex_choices: usize,
}

/// Pushout of `D ← I → X`, where `I → X` picks vertex `vertex` of `P(a,b)X`
/// and `I → D` picks the first vertex of `P(0̂,1̂)D`.
pub fn t_subdivide(x: &CombFlow, edge: (usize, usize, usize), d: &CombFlow, budget: usize) -> Result<Subdivision> {
    let (a, b, vertex) = edge;
    x.state_poset()?;
    let (lo, hi) = d.require_ball()?;
    let Some(px) = x.path(a, b) else {
        return Err(Error::MalformedSubdivision(format!(
            "no path from {} to {}",
            x.state_name(a),
            x.state_name(b)
        )));
    };
    if vertex >= px.len(0) {
        return Err(Error::MalformedSubdivision(format!("P({},{}) has no vertex {vertex}", x.state_name(a), x.state_name(b))));
    }
    let pd = d.path(lo, hi).expect("a ball has a path from bottom to top");
    let cap = x.cap();
    let seg = CombFlow::segment(cap);
    let pick = |sp: &FinSimplicialSet, v: usize| SimplicialMap { levels: (0..=cap).map(|n| vec![sp.constant(v, n) as u32]).collect() };
    let to_x = FlowMorphism { states: vec![a, b], paths: BTreeMap::from([((0, 1), pick(px, vertex))]) };
    let to_d = FlowMorphism { states: vec![lo, hi], paths: BTreeMap::from([((0, 1), pick(pd, 0))]) };
    let col = colimit(&[x, d, &seg], &[(2, 0, &to_x), (2, 1, &to_d)], budget)?;
    let map = col.injections[0].clone();
    Ok(Subdivision { flow: col.flow, map, ball_vertex: pd.name(0, 0).to_string(), ball_vertex_choices: pd.len(0) })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub direction: Direction,
    pub state: String,
    pub image: String,
    pub before: Option<Vec<HomologyGroup>>,
    pub after: Option<Vec<HomologyGroup>>,
    pub equal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NewStateStatus {
    Empty,
    Contractible,
    NotContractible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewState {
    pub direction: Direction,
    pub state: String,
    pub status: NewStateStatus,
    pub homology: Option<Vec<HomologyGroup>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub comparisons: Vec<Comparison>,
    pub new_states: Vec<NewState>,
    pub failures: Vec<String>,
    pub pass: bool,
    pub contractibility: String,
}

/// Compares per-state branching and merging homology along `f: X → Y`;
/// states of `Y` outside the image must have empty or contractible
/// quotients.
pub fn check_invariance(x: &CombFlow, y: &CombFlow, f: &FlowMorphism) -> Result<InvarianceReport> {
    let mut image = vec![None; y.state_count()];
    for (s, &t) in f.states.iter().enumerate() {
        if t >= y.state_count() {
            return Err(Error::MalformedSubdivision(format!("state {} maps outside the target", x.state_name(s))));
        }
        if let Some(prev) = image[t].replace(s) {
            return Err(Error::MalformedSubdivision(format!(
                "states {} and {} have the same image",
                x.state_name(prev),
                x.state_name(s)
            )));
        }
    }
    let mut comparisons = Vec::new();
    let mut new_states = Vec::new();
    let mut failures = Vec::new();
    for dir in Direction::BOTH {
        let bx = branching_space(x, dir);
        let by = branching_space(y, dir);
        for (s, &t) in f.states.iter().enumerate() {
            let before = bx.states[s].space.as_ref().map(homology_profile);
            let after = by.states[t].space.as_ref().map(homology_profile);
            let equal = before == after;
            if !equal {
                failures.push(format!("{dir} homology at {} changes", x.state_name(s)));
            }
            comparisons.push(Comparison {
                direction: dir,
                state: x.state_name(s).to_string(),
                image: y.state_name(t).to_string(),
                before,
                after,
                equal,
            });
        }
        for t in (0..y.state_count()).filter(|&t| image[t].is_none()) {
            let space = by.states[t].space.as_ref();
            let status = match space {
                None => NewStateStatus::Empty,
                Some(sp) if is_homology_contractible(sp)? => NewStateStatus::Contractible,
                Some(_) => NewStateStatus::NotContractible,
            };
            if status == NewStateStatus::NotContractible {
                failures.push(format!("{dir} space at new state {} is not contractible", y.state_name(t)));
            }
            new_states.push(NewState {
                direction: dir,
                state: y.state_name(t).to_string(),
                status,
                homology: space.map(homology_profile),
            });
        }
    }
    Ok(InvarianceReport {
        pass: failures.is_empty(),
        comparisons,
        new_states,
        failures,
        contractibility: CONTRACTIBILITY_NOTE.to_string(),
    })
}
